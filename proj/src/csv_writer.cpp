#include "pathflow/csv_writer.hpp"

#include <cstdio>

namespace pathflow {

namespace {

std::ofstream open_csv(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  return out;
}

}  // namespace

std::string format_number(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

TraceWriter::TraceWriter(const std::filesystem::path& path, std::string run_id, std::vector<std::string> metric_names)
    : out_(open_csv(path)), run_id_(std::move(run_id)), metric_count_(metric_names.size()) {
  out_ << "run,iter,t,dt,loss,train_steps";
  for (const auto& m : metric_names) out_ << ',' << m;
  out_ << '\n';
  out_.flush();
}

void TraceWriter::row(const TraceRow& row, const std::vector<double>& metrics) {
  internal::require(metrics.size() == metric_count_, "TraceWriter: metric count mismatch");
  out_ << run_id_ << ',' << row.iteration << ',' << format_number(row.t) << ',' << format_number(row.dt) << ','
       << format_number(row.loss) << ',' << row.train_steps;
  for (double m : metrics) out_ << ',' << format_number(m);
  out_ << '\n';
  out_.flush();
}

void TraceWriter::footer(const std::string& text) {
  out_ << "# " << text << '\n';
  out_.flush();
}

void write_samples_csv(const std::filesystem::path& path, const std::string& run_id,
                       const ParticleMatrix<double>& positions) {
  std::ofstream out = open_csv(path);
  out << "run,particle";
  for (Eigen::Index k = 0; k < positions.cols(); ++k) out << ",x" << k;
  out << '\n';
  for (Eigen::Index i = 0; i < positions.rows(); ++i) {
    out << run_id << ',' << i;
    for (Eigen::Index k = 0; k < positions.cols(); ++k) out << ',' << format_number(positions(i, k));
    out << '\n';
  }
}

void write_rows_csv(const std::filesystem::path& path, const std::vector<SummaryRow>& rows) {
  std::ofstream out = open_csv(path);
  if (rows.empty()) return;
  const SummaryRow& first = rows.front();
  for (std::size_t c = 0; c < first.size(); ++c) out << (c ? "," : "") << first[c].first;
  out << '\n';
  for (const auto& row : rows) {
    internal::require(row.size() == first.size(), "write_rows_csv: rows differ in width");
    for (std::size_t c = 0; c < row.size(); ++c) {
      internal::require(row[c].first == first[c].first, "write_rows_csv: rows differ in columns");
      out << (c ? "," : "") << row[c].second;
    }
    out << '\n';
  }
}

void write_grid_csv(const std::filesystem::path& path, const VectorX<double>& ts, const VectorX<double>& xs,
                    const MatrixX<double>& density) {
  internal::require(density.rows() == ts.size() && density.cols() == xs.size(), "write_grid_csv: shape mismatch");
  std::ofstream out = open_csv(path);
  out << "t,x,density\n";
  for (Eigen::Index i = 0; i < ts.size(); ++i) {
    for (Eigen::Index j = 0; j < xs.size(); ++j) {
      out << format_number(ts(i)) << ',' << format_number(xs(j)) << ',' << format_number(density(i, j)) << '\n';
    }
  }
}

}  // namespace pathflow
