#pragma once

#include "pathflow/samplers.hpp"
#include "pathflow/types.hpp"

#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

namespace pathflow {

/// 17 significant digits, enough to round-trip any double.
std::string format_number(double value);

/// Streams trace rows `run,iter,t,dt,loss,train_steps,<metrics...>`. Every row is flushed
/// so an aborted run leaves the trace up to the failure on disk.
class TraceWriter {
 public:
  TraceWriter(const std::filesystem::path& path, std::string run_id, std::vector<std::string> metric_names);

  void row(const TraceRow& row, const std::vector<double>& metrics);
  /// Trailing comment line, e.g. `# wall_seconds=1.25`.
  void footer(const std::string& text);

 private:
  std::ofstream out_;
  std::string run_id_;
  std::size_t metric_count_;
};

/// `run,particle,x0,...,x{d-1}`.
void write_samples_csv(const std::filesystem::path& path, const std::string& run_id,
                       const ParticleMatrix<double>& positions);

/// Rows of (name, value) pairs sharing one header; the first row fixes the column order.
using SummaryRow = std::vector<std::pair<std::string, std::string>>;
void write_rows_csv(const std::filesystem::path& path, const std::vector<SummaryRow>& rows);

/// `t,x,density`, one row per grid cell.
void write_grid_csv(const std::filesystem::path& path, const VectorX<double>& ts, const VectorX<double>& xs,
                    const MatrixX<double>& density);

}  // namespace pathflow
