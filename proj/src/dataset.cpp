#include "pathflow/dataset.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace pathflow {

namespace {

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream stream(line);
  while (std::getline(stream, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_number(const std::string& raw, long row, long col) {
  const std::string cell = trim(raw);
  if (cell.empty()) throw ParseError("empty cell at row " + std::to_string(row) + ", column " + std::to_string(col), row, col);
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(cell.c_str(), &end);
  if (end != cell.c_str() + cell.size() || errno == ERANGE || !std::isfinite(v)) {
    throw ParseError("non-numeric cell '" + cell + "' at row " + std::to_string(row) + ", column " + std::to_string(col),
                     row, col);
  }
  return v;
}

}  // namespace

Dataset parse_dataset_csv(std::istream& in, bool standardize) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("missing header row", 1, 0);
  Dataset data;
  const std::vector<std::string> header = split_row(line);
  if (header.size() < 2) throw ParseError("header needs at least one feature and a label column", 1, 0);
  for (std::size_t c = 0; c + 1 < header.size(); ++c) data.feature_names.push_back(trim(header[c]));
  const auto width = static_cast<long>(header.size());

  std::vector<std::vector<double>> rows;
  std::vector<double> labels;
  long row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const std::vector<std::string> cells = split_row(line);
    if (static_cast<long>(cells.size()) != width) {
      throw ParseError("row " + std::to_string(row) + " has " + std::to_string(cells.size()) + " cells, expected " +
                           std::to_string(width),
                       row, static_cast<long>(cells.size()));
    }
    std::vector<double> values;
    for (long c = 0; c + 1 < width; ++c) values.push_back(parse_number(cells[static_cast<std::size_t>(c)], row, c + 1));
    const double label = parse_number(cells.back(), row, width);
    if (label != 0 && label != 1) {
      throw ParseError("label outside {0, 1} at row " + std::to_string(row) + ", column " + std::to_string(width), row,
                       width);
    }
    rows.push_back(std::move(values));
    labels.push_back(label);
  }

  data.features.resize(static_cast<Eigen::Index>(rows.size()), width - 1);
  data.labels.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    for (std::size_t c = 0; c < rows[i].size(); ++c) data.features(ii, static_cast<Eigen::Index>(c)) = rows[i][c];
    data.labels(ii) = labels[i];
  }
  if (standardize) standardize_columns(data.features);
  return data;
}

Dataset load_dataset_csv(const std::filesystem::path& path, bool standardize) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open dataset '" + path.string() + "'");
  return parse_dataset_csv(in, standardize);
}

void standardize_columns(MatrixX<double>& features) {
  if (features.rows() == 0) return;
  for (Eigen::Index c = 0; c < features.cols(); ++c) {
    auto col = features.col(c);
    const double mean = col.mean();
    const double sd = std::sqrt((col.array() - mean).square().mean());
    if (sd > 0) {
      col = (col.array() - mean) / sd;
    } else {
      col.setZero();
    }
  }
}

std::pair<Dataset, Dataset> split_dataset(const Dataset& data, Eigen::Index train_rows) {
  internal::require(train_rows >= 0 && train_rows <= data.features.rows(), "split_dataset: train_rows out of range");
  const Eigen::Index test_rows = data.features.rows() - train_rows;
  Dataset train{data.feature_names, data.features.topRows(train_rows), data.labels.head(train_rows)};
  Dataset test{data.feature_names, data.features.bottomRows(test_rows), data.labels.tail(test_rows)};
  return {std::move(train), std::move(test)};
}

}  // namespace pathflow
