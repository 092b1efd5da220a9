#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fcmer/core.hpp"

namespace fcmer {

/// One bivariate normal class: mean, variances, correlation and size.
struct GaussianClassSpec {
  std::array<double, 2> mu;
  std::array<double, 2> sigma2;
  double rho = 0.0;
  int n = 0;

  /// [[s1^2, s1 s2 rho], [s1 s2 rho, s2^2]]
  Eigen::Matrix2d covariance() const;
  void validate() const;
};

/// Class parameters of the four-class synthetic configurations (id 1..4).
std::vector<GaussianClassSpec> config_classes(int id);

/// Draws the given classes; labels are the class positions 0, 1, ...
Dataset sample_gaussian_classes(const std::vector<GaussianClassSpec>& classes, std::uint64_t seed);

/// 450 x 2 labeled sample of configuration `id` (1..4), class sizes 150/150/50/100.
Dataset generate_config(int id, std::uint64_t seed);

struct OutlierSet {
  Dataset data;               // labels 0/1 for the base classes, 2 for outliers
  std::vector<bool> outlier;  // true for the added noise points
  Matrix ideal_centers;       // 2 x 2 generating means of the base classes

  Index base_count() const;
};

/// 80 base points (40 per class) plus ceil(pct/100 * 80) outliers; pct in {0,10,20,30}.
OutlierSet generate_outlier_set(int pct, std::uint64_t seed);

/// Reads a comma-separated file with a header row. Every column other than
/// `label_column` must be numeric; labels are encoded by first appearance.
Dataset load_csv(const std::filesystem::path& path, const std::optional<std::string>& label_column = std::nullopt);

/// Writes features (and a "label" column when present) with 17 significant digits.
void write_csv(const std::filesystem::path& path, const Dataset& data);

/// Writes a numeric matrix under the given header with 17 significant digits.
void write_matrix_csv(const std::filesystem::path& path, const Matrix& m, const std::vector<std::string>& header);

/// Reads an all-numeric CSV with a header row into a matrix.
Matrix read_matrix_csv(const std::filesystem::path& path, std::vector<std::string>* header = nullptr);

struct Standardized {
  Dataset data;
  Vector means;
  Vector stds;                // population standard deviations
  std::vector<bool> constant;  // columns that were only centered
};

/// Column-wise z-scores with the population standard deviation.
Standardized standardize(const Dataset& data);

/// Maps rows expressed in standardized units back to the original scale.
Matrix destandardize(const Matrix& rows, const Standardized& s);

}  // namespace fcmer
