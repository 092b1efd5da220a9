#include "fcmer/eval.hpp"

#include <algorithm>
#include <map>
#include <string>

namespace fcmer {

namespace {

double comb2(double x) { return x * (x - 1.0) / 2.0; }

std::vector<int> dense_codes(std::span<const int> labels, int& count) {
  std::map<int, int> codes;
  std::vector<int> out;
  out.reserve(labels.size());
  for (int l : labels) {
    auto [it, inserted] = codes.emplace(l, static_cast<int>(codes.size()));
    out.push_back(it->second);
  }
  count = static_cast<int>(codes.size());
  return out;
}

}  // namespace

HardPartition::HardPartition(std::vector<int> assign, int clusters) : assign_(std::move(assign)), clusters_(clusters) {
  if (clusters_ < 1) throw Error(ErrorCode::InvalidArgument, "hard partition needs at least one cluster");
  for (int a : assign_)
    if (a < 0 || a >= clusters_)
      throw Error(ErrorCode::InvalidArgument, "cluster id " + std::to_string(a) + " outside [0, C)");
}

HardPartition hard_partition(const FuzzyPartition& u) {
  std::vector<int> assign(static_cast<std::size_t>(u.n()));
  for (Index i = 0; i < u.n(); ++i) {
    Index best = 0;
    for (Index k = 1; k < u.c(); ++k)
      if (u(i, k) > u(i, best)) best = k;
    assign[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return HardPartition(std::move(assign), static_cast<int>(u.c()));
}

double adjusted_rand_index(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) throw Error(ErrorCode::LengthMismatch, "partitions differ in length");
  if (a.size() < 2) throw Error(ErrorCode::Undefined, "adjusted Rand index needs at least 2 objects");
  int ca = 0;
  int cb = 0;
  const auto ra = dense_codes(a, ca);
  const auto rb = dense_codes(b, cb);

  Eigen::MatrixXd table = Eigen::MatrixXd::Zero(ca, cb);
  for (std::size_t i = 0; i < ra.size(); ++i) table(ra[i], rb[i]) += 1.0;

  double sum_cells = 0.0;
  for (Index i = 0; i < table.rows(); ++i)
    for (Index j = 0; j < table.cols(); ++j) sum_cells += comb2(table(i, j));
  double sum_a = 0.0;
  for (Index i = 0; i < table.rows(); ++i) sum_a += comb2(table.row(i).sum());
  double sum_b = 0.0;
  for (Index j = 0; j < table.cols(); ++j) sum_b += comb2(table.col(j).sum());

  const double expected = sum_a * sum_b / comb2(static_cast<double>(a.size()));
  const double max_index = 0.5 * (sum_a + sum_b);
  // both labelings are all-one-cluster or all-singletons, hence identical
  if (max_index == expected) return 1.0;
  return (sum_cells - expected) / (max_index - expected);
}

double adjusted_rand_index(const HardPartition& a, std::span<const int> labels) {
  return adjusted_rand_index(std::span<const int>(a.assign()), labels);
}

double hullermeier_index(const Matrix& u, const Matrix& v) {
  if (u.rows() != v.rows()) throw Error(ErrorCode::LengthMismatch, "partitions differ in object count");
  const Index n = u.rows();
  if (n < 2) throw Error(ErrorCode::Undefined, "Hullermeier index needs at least 2 objects");
  double total = 0.0;
  for (Index i = 0; i + 1 < n; ++i) {
    const Index rest = n - i - 1;
    const Eigen::ArrayXd eu = 1.0 - 0.5 * (u.bottomRows(rest).rowwise() - u.row(i)).cwiseAbs().rowwise().sum().array();
    const Eigen::ArrayXd ev = 1.0 - 0.5 * (v.bottomRows(rest).rowwise() - v.row(i)).cwiseAbs().rowwise().sum().array();
    total += (eu - ev).abs().sum();
  }
  return 1.0 - 2.0 * total / (static_cast<double>(n) * static_cast<double>(n - 1));
}

double hullermeier_index(const FuzzyPartition& u, std::span<const int> labels) {
  if (static_cast<Index>(labels.size()) != u.n()) throw Error(ErrorCode::LengthMismatch, "label count differs from N");
  int classes = 0;
  const auto codes = dense_codes(labels, classes);
  Matrix y = Matrix::Zero(u.n(), classes);
  for (std::size_t i = 0; i < codes.size(); ++i) y(static_cast<Index>(i), codes[i]) = 1.0;
  return hullermeier_index(u.matrix(), y);
}

double robustness_detection(const Matrix& prototypes, const Matrix& ideal, RdFormula formula) {
  if (prototypes.rows() != 2 || ideal.rows() != 2)
    throw Error(ErrorCode::ShapeMismatch, "robustness detection needs exactly two prototypes and two ideals");
  if (prototypes.cols() != ideal.cols()) throw Error(ErrorCode::ShapeMismatch, "prototype and ideal dimensions differ");
  auto dist = [](const auto& a, const auto& b) { return (a - b).norm(); };
  const double sep = dist(ideal.row(0), ideal.row(1));
  if (!(sep > 0.0)) throw Error(ErrorCode::IdenticalIdealCenters, "ideal centers coincide");
  const double d11 = dist(ideal.row(0), prototypes.row(0));
  const double d12 = dist(ideal.row(0), prototypes.row(1));
  const double d21 = dist(ideal.row(1), prototypes.row(0));
  const double d22 = dist(ideal.row(1), prototypes.row(1));
  const double last = formula == RdFormula::Symmetric ? d22 : d21;
  return (d11 + d12 + d21 + last) / (2.0 * sep);
}

}  // namespace fcmer
