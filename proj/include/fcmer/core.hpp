#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "fcmer/error.hpp"

namespace fcmer {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Index = Eigen::Index;

namespace detail {

template <typename Derived>
bool all_finite(const Eigen::DenseBase<Derived>& m) {
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j)
      if (!std::isfinite(static_cast<double>(m(i, j)))) return false;
  return true;
}

// Symmetry, unit determinant and positive definiteness of a metric matrix.
template <typename Scalar>
void check_unit_det_spd(const MatrixX<Scalar>& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0)
    throw Error(ErrorCode::ShapeMismatch, std::string(what) + " must be square and non-empty");
  if (!all_finite(m)) throw Error(ErrorCode::NonFiniteValue, std::string(what) + " has non-finite entries");
  const Scalar scale = std::max<Scalar>(Scalar(1), m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > Scalar(1e-9) * scale)
    throw Error(ErrorCode::NonSymmetric, std::string(what) + " is not symmetric");
  Eigen::LLT<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>> llt(m);
  if (llt.info() != Eigen::Success)
    throw Error(ErrorCode::NotPositiveDefinite, std::string(what) + " is not positive definite");
  const auto diag = llt.matrixLLT().diagonal();
  Scalar log_det = 0;
  for (Index i = 0; i < diag.size(); ++i) {
    if (!(diag(i) > Scalar(0)))
      throw Error(ErrorCode::NotPositiveDefinite, std::string(what) + " is not positive definite");
    log_det += Scalar(2) * std::log(diag(i));
  }
  // a computed determinant is only good to about cond * eps; ridged scatter
  // from collinear data is legitimately that ill-conditioned
  const Scalar ratio = diag.maxCoeff() / diag.minCoeff();
  const Scalar tol = std::max(Scalar(1e-6), Scalar(100) * std::numeric_limits<Scalar>::epsilon() * ratio * ratio);
  if (std::abs(std::exp(log_det) - Scalar(1)) > tol)
    throw Error(ErrorCode::InvalidArgument, std::string(what) + " must have unit determinant");
}

}  // namespace detail

/// N x P feature matrix with optional class labels.
template <typename Scalar>
class BasicDataset {
 public:
  BasicDataset(MatrixX<Scalar> features, std::optional<std::vector<int>> labels = std::nullopt,
               std::vector<std::string> feature_names = {})
      : features_(std::move(features)), labels_(std::move(labels)), names_(std::move(feature_names)) {
    if (features_.rows() < 2) throw Error(ErrorCode::InvalidArgument, "dataset needs at least 2 objects");
    if (features_.cols() < 1) throw Error(ErrorCode::InvalidArgument, "dataset needs at least 1 feature");
    if (!detail::all_finite(features_)) throw Error(ErrorCode::NonFiniteValue, "dataset features must be finite");
    if (labels_) {
      if (static_cast<Index>(labels_->size()) != features_.rows())
        throw Error(ErrorCode::LengthMismatch, "label count differs from object count");
      for (int l : *labels_)
        if (l < 0) throw Error(ErrorCode::InvalidArgument, "labels must be non-negative class ids");
    }
    if (!names_.empty() && static_cast<Index>(names_.size()) != features_.cols())
      throw Error(ErrorCode::LengthMismatch, "feature name count differs from feature count");
  }

  const MatrixX<Scalar>& features() const noexcept { return features_; }
  Index n() const noexcept { return features_.rows(); }
  Index p() const noexcept { return features_.cols(); }

  bool has_labels() const noexcept { return labels_.has_value(); }
  const std::vector<int>& labels() const {
    if (!labels_) throw Error(ErrorCode::Undefined, "dataset has no labels");
    return *labels_;
  }
  const std::optional<std::vector<int>>& maybe_labels() const noexcept { return labels_; }

  /// Number of a-priori classes (max label + 1).
  int num_classes() const {
    const auto& l = labels();
    return l.empty() ? 0 : *std::max_element(l.begin(), l.end()) + 1;
  }

  const std::vector<std::string>& feature_names() const noexcept { return names_; }

  BasicDataset with_features(MatrixX<Scalar> features) const {
    return BasicDataset(std::move(features), labels_, names_);
  }

 private:
  MatrixX<Scalar> features_;
  std::optional<std::vector<int>> labels_;
  std::vector<std::string> names_;
};

/// Membership matrix U (N x C); each row lies on the probability simplex.
template <typename Scalar>
class BasicFuzzyPartition {
 public:
  explicit BasicFuzzyPartition(MatrixX<Scalar> u) : u_(std::move(u)) {
    if (u_.rows() < 1 || u_.cols() < 1) throw Error(ErrorCode::ShapeMismatch, "empty membership matrix");
    if (!detail::all_finite(u_)) throw Error(ErrorCode::NonFiniteValue, "memberships must be finite");
    for (Index i = 0; i < u_.rows(); ++i) {
      Scalar sum = 0;
      for (Index k = 0; k < u_.cols(); ++k) {
        const Scalar v = u_(i, k);
        if (v < Scalar(0) || v > Scalar(1))
          throw Error(ErrorCode::InvalidArgument, "membership outside [0,1] at row " + std::to_string(i));
        sum += v;
      }
      if (std::abs(sum - Scalar(1)) > Scalar(1e-9))
        throw Error(ErrorCode::InvalidArgument, "membership row " + std::to_string(i) + " does not sum to 1");
    }
  }

  const MatrixX<Scalar>& matrix() const noexcept { return u_; }
  Index n() const noexcept { return u_.rows(); }
  Index c() const noexcept { return u_.cols(); }
  Scalar operator()(Index i, Index k) const { return u_(i, k); }

 private:
  MatrixX<Scalar> u_;
};

/// Prototype matrix G (C x P).
template <typename Scalar>
class BasicPrototypeSet {
 public:
  explicit BasicPrototypeSet(MatrixX<Scalar> g) : g_(std::move(g)) {
    if (g_.rows() < 1 || g_.cols() < 1) throw Error(ErrorCode::ShapeMismatch, "empty prototype matrix");
    if (!detail::all_finite(g_)) throw Error(ErrorCode::NonFiniteValue, "prototypes must be finite");
  }

  const MatrixX<Scalar>& matrix() const noexcept { return g_; }
  Index c() const noexcept { return g_.rows(); }
  Index p() const noexcept { return g_.cols(); }
  auto row(Index k) const { return g_.row(k); }

 private:
  MatrixX<Scalar> g_;
};

enum class WeightConstraint { SumToOne, ProductToOne };

template <typename Scalar>
struct NoMetric {};

template <typename Scalar>
struct GlobalCov {
  MatrixX<Scalar> m;
};

template <typename Scalar>
struct LocalCov {
  std::vector<MatrixX<Scalar>> ms;
};

template <typename Scalar>
struct GlobalWeights {
  VectorX<Scalar> v;
  WeightConstraint constraint;
};

template <typename Scalar>
struct LocalWeights {
  MatrixX<Scalar> v;  // C x P
  WeightConstraint constraint;
};

/// Adaptive-distance parameters. Built only through the validating factories.
template <typename Scalar>
class BasicMetricState {
 public:
  using Storage = std::variant<NoMetric<Scalar>, GlobalCov<Scalar>, LocalCov<Scalar>, GlobalWeights<Scalar>,
                               LocalWeights<Scalar>>;

  static BasicMetricState none() { return BasicMetricState(NoMetric<Scalar>{}); }

  static BasicMetricState global_cov(MatrixX<Scalar> m) {
    detail::check_unit_det_spd(m, "global metric matrix");
    return BasicMetricState(GlobalCov<Scalar>{std::move(m)});
  }

  static BasicMetricState local_cov(std::vector<MatrixX<Scalar>> ms) {
    if (ms.empty()) throw Error(ErrorCode::ShapeMismatch, "no local metric matrices");
    for (const auto& m : ms) {
      if (m.rows() != ms.front().rows()) throw Error(ErrorCode::ShapeMismatch, "local metric sizes differ");
      detail::check_unit_det_spd(m, "local metric matrix");
    }
    return BasicMetricState(LocalCov<Scalar>{std::move(ms)});
  }

  static BasicMetricState global_weights(VectorX<Scalar> v, WeightConstraint constraint) {
    check_weights(v.transpose(), constraint);
    return BasicMetricState(GlobalWeights<Scalar>{std::move(v), constraint});
  }

  static BasicMetricState local_weights(MatrixX<Scalar> v, WeightConstraint constraint) {
    if (v.rows() < 1) throw Error(ErrorCode::ShapeMismatch, "no local weight rows");
    for (Index k = 0; k < v.rows(); ++k) check_weights(v.row(k), constraint);
    return BasicMetricState(LocalWeights<Scalar>{std::move(v), constraint});
  }

  const Storage& storage() const noexcept { return state_; }

  template <typename T>
  const T* get_if() const noexcept {
    return std::get_if<T>(&state_);
  }

 private:
  explicit BasicMetricState(Storage s) : state_(std::move(s)) {}

  template <typename Row>
  static void check_weights(const Row& v, WeightConstraint constraint) {
    if (v.size() < 1) throw Error(ErrorCode::ShapeMismatch, "empty weight vector");
    if (!detail::all_finite(v)) throw Error(ErrorCode::NonFiniteValue, "weights must be finite");
    if (constraint == WeightConstraint::SumToOne) {
      Scalar sum = 0;
      for (Index j = 0; j < v.size(); ++j) {
        if (v(j) < Scalar(0) || v(j) > Scalar(1))
          throw Error(ErrorCode::InvalidArgument, "sum-constrained weight outside [0,1]");
        sum += v(j);
      }
      if (std::abs(sum - Scalar(1)) > Scalar(1e-9))
        throw Error(ErrorCode::InvalidArgument, "weights must sum to 1");
    } else {
      Scalar log_prod = 0;
      for (Index j = 0; j < v.size(); ++j) {
        if (!(v(j) > Scalar(0))) throw Error(ErrorCode::InvalidArgument, "product-constrained weight must be > 0");
        log_prod += std::log(v(j));
      }
      if (std::abs(std::exp(log_prod) - Scalar(1)) > Scalar(1e-6))
        throw Error(ErrorCode::InvalidArgument, "weights must have product 1");
    }
  }

  Storage state_;
};

enum class Variant {
  FcmErL2,
  FcmErL1,
  AfcmErM,
  AfcmErMk,
  AfcmErGsL2,
  AfcmErGsL1,
  AfcmErGpL2,
  AfcmErGpL1,
  AfcmErLsL2,
  AfcmErLsL1,
  AfcmErLpL2,
  AfcmErLpL1,
};

inline constexpr std::array<Variant, 12> kAllVariants = {
    Variant::FcmErL2,    Variant::FcmErL1,    Variant::AfcmErM,    Variant::AfcmErMk,
    Variant::AfcmErGpL2, Variant::AfcmErGpL1, Variant::AfcmErLpL2, Variant::AfcmErLpL1,
    Variant::AfcmErGsL2, Variant::AfcmErGsL1, Variant::AfcmErLsL2, Variant::AfcmErLsL1,
};

/// Display name, e.g. "AFCM-ER-GP-L1".
std::string_view variant_name(Variant v) noexcept;
/// Lower-case command-line name, e.g. "afcm-er-gp-l1".
std::string variant_cli_name(Variant v);
/// Accepts either form, case-insensitively.
std::optional<Variant> parse_variant(std::string_view name);

enum class L1Solver { WeightedMedian, Irls };

struct AlgorithmSpec {
  Variant variant = Variant::FcmErL2;
  int clusters = 2;
  double t_u = 1.0;
  std::optional<double> t_v;
  int max_iter = 100;
  double epsilon = 1e-5;
  std::uint64_t seed = 0;
  L1Solver l1_solver = L1Solver::WeightedMedian;
};

enum class Termination { Converged, MaxIterations };

template <typename Scalar>
struct BasicFitResult {
  BasicFuzzyPartition<Scalar> partition;
  BasicPrototypeSet<Scalar> prototypes;
  BasicMetricState<Scalar> metric;
  std::vector<Scalar> objective_trace;
  int iterations = 0;
  Termination termination = Termination::MaxIterations;
  int reseeds = 0;  // empty-cluster rescues

  Scalar objective() const { return objective_trace.back(); }
};

using Dataset = BasicDataset<double>;
using FuzzyPartition = BasicFuzzyPartition<double>;
using PrototypeSet = BasicPrototypeSet<double>;
using MetricState = BasicMetricState<double>;
using FitResult = BasicFitResult<double>;
using Matrix = MatrixX<double>;
using Vector = VectorX<double>;

}  // namespace fcmer
