#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "fcmer/core.hpp"

namespace fcmer {

template <typename Scalar>
struct SpdResult {
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> inverse;
  Scalar determinant;
  Scalar log_determinant;
  Scalar ridge;  // ridge actually added to the diagonal
};

/// Inverse and determinant of A + ridge*I through a Cholesky factorization.
///
/// When the shifted matrix is not numerically positive definite the ridge is
/// escalated geometrically, starting at 1e-10 * trace(A)/P and multiplying by
/// 10 each attempt, until it would exceed 1e-2 * trace(A)/P.
template <typename Derived>
SpdResult<typename Derived::Scalar> spd_invert_det(const Eigen::MatrixBase<Derived>& a,
                                                   typename Derived::Scalar ridge = 0) {
  using Scalar = typename Derived::Scalar;
  using Dense = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Index p = a.rows();
  if (p == 0 || a.cols() != p) throw Error(ErrorCode::ShapeMismatch, "spd_invert_det needs a square matrix");
  if (ridge < Scalar(0)) throw Error(ErrorCode::InvalidArgument, "ridge must be non-negative");
  const Dense m = a;
  if (!detail::all_finite(m)) throw Error(ErrorCode::NonFiniteValue, "matrix has non-finite entries");
  const Scalar scale = std::max<Scalar>(Scalar(1), m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > Scalar(1e-9) * scale)
    throw Error(ErrorCode::NonSymmetric, "matrix is not symmetric");

  const Scalar unit = m.trace() / Scalar(p);
  const Scalar ridge_cap = Scalar(1e-2) * unit;

  auto attempt = [&](Scalar r, SpdResult<Scalar>& out) {
    Dense shifted = (m + m.transpose()) / Scalar(2);
    shifted.diagonal().array() += r;
    Eigen::LLT<Dense> llt(shifted);
    if (llt.info() != Eigen::Success) return false;
    const auto d = llt.matrixLLT().diagonal();
    const Scalar dmax = d.cwiseAbs().maxCoeff();
    Scalar log_det = 0;
    for (Index i = 0; i < p; ++i) {
      // pivots this small relative to the largest mean the matrix is singular
      // to working precision
      if (!(d(i) > Scalar(0)) || d(i) * d(i) <= Scalar(1e-13) * dmax * dmax) return false;
      log_det += Scalar(2) * std::log(d(i));
    }
    Dense inv = llt.solve(Dense::Identity(p, p));
    out.inverse = (inv + inv.transpose()) / Scalar(2);
    out.log_determinant = log_det;
    out.determinant = std::exp(log_det);
    out.ridge = r;
    return true;
  };

  SpdResult<Scalar> out;
  if (attempt(ridge, out)) return out;
  if (!(unit > Scalar(0)))
    throw Error(ErrorCode::NotPositiveDefinite, "matrix is not positive definite and has non-positive trace");
  Scalar r = std::max(ridge * Scalar(10), Scalar(1e-10) * unit);
  while (r <= ridge_cap) {
    if (attempt(r, out)) return out;
    r *= Scalar(10);
  }
  throw Error(ErrorCode::NotPositiveDefinite, "ridge escalation exhausted");
}

/// [det(A)]^(1/P) * A^-1, the unit-determinant metric closest to A's scatter.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> det_normalized_inverse(
    const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  auto r = spd_invert_det(a);
  const Scalar factor = std::exp(r.log_determinant / Scalar(a.rows()));
  return factor * r.inverse;
}

/// Minimizer of sum_i w_i |v_i - a|.
///
/// Cumulative-weight form of the classic ranking procedure: the first sorted
/// value whose cumulative weight reaches half the total. If the half-total is
/// hit exactly, the midpoint with the next value is returned.
template <typename Scalar>
Scalar weighted_median(std::span<const Scalar> values, std::span<const Scalar> weights) {
  if (values.empty()) throw Error(ErrorCode::EmptyInput, "weighted_median of no values");
  if (values.size() != weights.size()) throw Error(ErrorCode::LengthMismatch, "values and weights differ in length");
  Scalar total = 0;
  for (Scalar w : weights) {
    if (!(w >= Scalar(0))) throw Error(ErrorCode::InvalidArgument, "weights must be non-negative");
    total += w;
  }
  if (!(total > Scalar(0))) throw Error(ErrorCode::AllZeroWeights, "weighted_median with all-zero weights");

  std::vector<std::size_t> order;
  order.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i)
    if (weights[i] > Scalar(0)) order.push_back(i);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return values[a] < values[b] || (values[a] == values[b] && a < b);
  });

  const Scalar half = total / Scalar(2);
  Scalar cum = 0;
  for (std::size_t r = 0; r < order.size(); ++r) {
    cum += weights[order[r]];
    if (cum < half) continue;
    if (cum == half && r + 1 < order.size())
      return (values[order[r]] + values[order[r + 1]]) / Scalar(2);
    return values[order[r]];
  }
  return values[order.back()];
}

template <typename Scalar>
Scalar weighted_median(const std::vector<Scalar>& values, const std::vector<Scalar>& weights) {
  return weighted_median<Scalar>(std::span<const Scalar>(values), std::span<const Scalar>(weights));
}

/// One reweighting step towards the L1 prototype:
/// sum w_i v_i / sum w_i with w_i = m_i / max(|v_i - g_prev|, floor).
template <typename Scalar>
Scalar irls_prototype(std::span<const Scalar> values, std::span<const Scalar> memberships, Scalar g_prev,
                      Scalar floor = Scalar(1e-10)) {
  if (values.size() != memberships.size())
    throw Error(ErrorCode::LengthMismatch, "values and memberships differ in length");
  if (!(floor > Scalar(0))) throw Error(ErrorCode::InvalidArgument, "IRLS floor must be positive");
  Scalar mass = 0;
  Scalar num = 0;
  Scalar den = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(memberships[i] >= Scalar(0))) throw Error(ErrorCode::InvalidArgument, "memberships must be non-negative");
    mass += memberships[i];
    const Scalar w = memberships[i] / std::max(std::abs(values[i] - g_prev), floor);
    num += w * values[i];
    den += w;
  }
  if (!(mass > Scalar(0))) throw Error(ErrorCode::AllZeroWeights, "irls_prototype with all-zero memberships");
  return num / den;
}

/// exp(-s_w / T) / sum_l exp(-s_l / T), evaluated after shifting by min(s).
template <typename Derived>
VectorX<typename Derived::Scalar> stable_normalized_exponentials(const Eigen::MatrixBase<Derived>& scores,
                                                                 typename Derived::Scalar temperature) {
  using Scalar = typename Derived::Scalar;
  if (!(temperature > Scalar(0))) throw Error(ErrorCode::InvalidArgument, "temperature must be positive");
  const Index m = scores.size();
  if (m == 0) throw Error(ErrorCode::EmptyInput, "no scores");
  Scalar lo = std::numeric_limits<Scalar>::infinity();
  for (Index w = 0; w < m; ++w) {
    const Scalar s = scores(w);
    if (!std::isfinite(s)) throw Error(ErrorCode::NonFiniteScore, "score " + std::to_string(w) + " is not finite");
    lo = std::min(lo, s);
  }
  VectorX<Scalar> out(m);
  Scalar sum = 0;
  for (Index w = 0; w < m; ++w) {
    out(w) = std::exp(-(scores(w) - lo) / temperature);
    sum += out(w);
  }
  out /= sum;
  return out;
}

}  // namespace fcmer
