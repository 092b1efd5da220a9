#pragma once

#include <span>
#include <vector>

#include "fcmer/core.hpp"

namespace fcmer {

/// Crisp assignment of each object to one of C clusters.
class HardPartition {
 public:
  HardPartition(std::vector<int> assign, int clusters);

  const std::vector<int>& assign() const noexcept { return assign_; }
  int clusters() const noexcept { return clusters_; }
  std::size_t size() const noexcept { return assign_.size(); }

 private:
  std::vector<int> assign_;
  int clusters_;
};

/// argmax_k u_ik; ties go to the lowest cluster index.
HardPartition hard_partition(const FuzzyPartition& u);

/// Hubert-Arabie adjusted Rand index between two labelings of the same objects.
double adjusted_rand_index(std::span<const int> a, std::span<const int> b);
double adjusted_rand_index(const HardPartition& a, std::span<const int> labels);

/// Hullermeier index between a fuzzy partition and crisp class labels, using
/// the normalized L1 equivalence 1 - |u_i - u_i'|_1 / 2.
double hullermeier_index(const FuzzyPartition& u, std::span<const int> labels);

/// Fuzzy-vs-fuzzy form of the same index.
double hullermeier_index(const Matrix& u, const Matrix& v);

enum class RdFormula {
  Symmetric,  // both prototypes against both ideals
  AsPrinted,  // Delta(g2_id, g1) counted twice, Delta(g2_id, g2) omitted
};

/// Robustness-detection ratio between two prototypes and two ideal centers
/// (each a 2 x P matrix). Equals 1 when the prototypes sit on the ideals.
double robustness_detection(const Matrix& prototypes, const Matrix& ideal, RdFormula formula = RdFormula::Symmetric);

}  // namespace fcmer
