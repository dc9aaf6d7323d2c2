#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace pathflow {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

// Particles are stored one per row.
template <typename Scalar>
using ParticleMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Precondition broken by the caller (dimension mismatch, out-of-range t, ...).
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Invalid configuration value or unusable input data.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed dataset or config file. Carries the 1-based row and column when known.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, long row, long column)
      : std::runtime_error(what), row_(row), column_(column) {}

  long row() const { return row_; }
  long column() const { return column_; }

 private:
  long row_;
  long column_;
};

/// Unsupported request, e.g. a 1D-only routine invoked on a higher-dimensional path.
class Unsupported : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Particle positions became non-finite.
class SamplerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite loss during vector-field training.
class TrainingDivergence : public SamplerError {
 public:
  TrainingDivergence(const std::string& what, double t, long step, double loss)
      : SamplerError(what), t_(t), step_(step), loss_(loss) {}

  double t() const { return t_; }
  long step() const { return step_; }
  double loss() const { return loss_; }

 private:
  double t_;
  long step_;
  double loss_;
};

namespace internal {

inline void require(bool condition, const char* message) {
  if (!condition) throw ContractViolation(message);
}

inline void require_dimension(Eigen::Index got, Eigen::Index expected, const char* what) {
  if (got != expected) {
    throw ContractViolation(std::string(what) + ": dimension mismatch (got " + std::to_string(got) +
                            ", expected " + std::to_string(expected) + ")");
  }
}

}  // namespace internal
}  // namespace pathflow
