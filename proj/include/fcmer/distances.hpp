#pragma once

#include <Eigen/Dense>

#include <cmath>

#include "fcmer/core.hpp"

namespace fcmer {

enum class PointwiseKind { SquaredDiff, AbsDiff };

template <typename Scalar>
inline Scalar pointwise(PointwiseKind kind, Scalar x, Scalar g) {
  const Scalar d = x - g;
  return kind == PointwiseKind::SquaredDiff ? d * d : std::abs(d);
}

// The kernels below accumulate left to right in plain loops so that unit
// weights or an identity metric reproduce the unweighted sum bit for bit.

/// sum_j v_j * d(x_j, g_j)
template <typename DX, typename DG, typename DV>
typename DX::Scalar weighted_distance(PointwiseKind kind, const Eigen::MatrixBase<DX>& x,
                                      const Eigen::MatrixBase<DG>& g, const Eigen::MatrixBase<DV>& v) {
  using Scalar = typename DX::Scalar;
  if (x.size() != g.size() || x.size() != v.size())
    throw Error(ErrorCode::LengthMismatch, "weighted_distance operands differ in length");
  Scalar sum = 0;
  for (Index j = 0; j < x.size(); ++j) sum += v(j) * pointwise(kind, x(j), g(j));
  return sum;
}

/// sum_j d(x_j, g_j)
template <typename DX, typename DG>
typename DX::Scalar unweighted_distance(PointwiseKind kind, const Eigen::MatrixBase<DX>& x,
                                        const Eigen::MatrixBase<DG>& g) {
  using Scalar = typename DX::Scalar;
  if (x.size() != g.size()) throw Error(ErrorCode::LengthMismatch, "distance operands differ in length");
  Scalar sum = 0;
  for (Index j = 0; j < x.size(); ++j) sum += pointwise(kind, x(j), g(j));
  return sum;
}

/// (x - g)^T M (x - g)
template <typename DX, typename DG, typename DM>
typename DX::Scalar mahalanobis(const Eigen::MatrixBase<DX>& x, const Eigen::MatrixBase<DG>& g,
                                const Eigen::MatrixBase<DM>& m) {
  using Scalar = typename DX::Scalar;
  const Index p = x.size();
  if (g.size() != p || m.rows() != p || m.cols() != p)
    throw Error(ErrorCode::ShapeMismatch, "mahalanobis operands have inconsistent dimensions");
  Scalar sum = 0;
  for (Index a = 0; a < p; ++a) {
    const Scalar da = x(a) - g(a);
    Scalar row = 0;
    for (Index b = 0; b < p; ++b) row += m(a, b) * (x(b) - g(b));
    sum += da * row;
  }
  // rounding can leave a tiny negative value for x close to g
  return sum < Scalar(0) ? Scalar(0) : sum;
}

}  // namespace fcmer
