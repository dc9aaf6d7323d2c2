#pragma once

#include "pathflow/types.hpp"

#include <filesystem>
#include <istream>
#include <string>
#include <vector>

namespace pathflow {

/// Binary classification data: one feature row per sample, labels in {0, 1}.
struct Dataset {
  std::vector<std::string> feature_names;
  MatrixX<double> features;
  VectorX<double> labels;
};

/// Reads a comma-separated file with a header row whose final column is an integer
/// label in {0, 1}. With `standardize`, every feature column is shifted and scaled to zero
/// mean and unit variance; constant columns become all zeros.
///
/// Throws ParseError naming the 1-based row and column of the first bad cell.
Dataset load_dataset_csv(const std::filesystem::path& path, bool standardize);
Dataset parse_dataset_csv(std::istream& in, bool standardize);

/// Zero-mean, unit-variance columns (population variance); constant columns become zero.
void standardize_columns(MatrixX<double>& features);

/// First `train_rows` rows for training, the rest for testing.
std::pair<Dataset, Dataset> split_dataset(const Dataset& data, Eigen::Index train_rows);

}  // namespace pathflow
