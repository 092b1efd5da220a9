#pragma once

// Hand-rolled generators and independent oracles shared by the test binaries.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "fcmer/core.hpp"
#include "fcmer/engine.hpp"

namespace fcmer::test {

using Gen = std::mt19937_64;

inline double uniform(Gen& g, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(g); }
inline double normal(Gen& g) { return std::normal_distribution<double>(0.0, 1.0)(g); }
inline int uniform_int(Gen& g, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(g); }

inline Matrix random_matrix(Gen& g, Index rows, Index cols, double lo = -3.0, double hi = 3.0) {
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = uniform(g, lo, hi);
  return m;
}

inline Dataset random_dataset(Gen& g, Index n, Index p) { return Dataset(random_matrix(g, n, p)); }

// Rows strictly inside the simplex.
inline FuzzyPartition random_membership(Gen& g, Index n, Index c) {
  Matrix u(n, c);
  for (Index i = 0; i < n; ++i) {
    double sum = 0.0;
    for (Index k = 0; k < c; ++k) sum += u(i, k) = uniform(g, 0.05, 1.0);
    u.row(i) /= sum;
  }
  return FuzzyPartition(std::move(u));
}

inline Matrix random_spd(Gen& g, Index p) {
  Matrix a = random_matrix(g, p, p, -1.0, 1.0);
  Matrix s = a * a.transpose();
  s.diagonal().array() += 0.5;
  return s;
}

// Symmetric PD matrix scaled to determinant one.
inline Matrix random_unit_det_spd(Gen& g, Index p) {
  Matrix s = random_spd(g, p);
  return s / std::pow(s.determinant(), 1.0 / static_cast<double>(p));
}

inline Vector random_sum_weights(Gen& g, Index p) {
  Vector v(p);
  for (Index j = 0; j < p; ++j) v(j) = uniform(g, 0.1, 1.0);
  return v / v.sum();
}

inline Vector random_product_weights(Gen& g, Index p) {
  Vector v(p);
  double log_sum = 0.0;
  for (Index j = 0; j < p; ++j) {
    v(j) = std::exp(uniform(g, -1.0, 1.0));
    log_sum += std::log(v(j));
  }
  return v * std::exp(-log_sum / static_cast<double>(p));
}

// Any admissible metric for the variant.
inline MetricState random_metric(Gen& g, Variant v, Index c, Index p) {
  const auto d = describe(v);
  switch (d.metric_scope) {
    case MetricScope::None:
      return MetricState::none();
    case MetricScope::GlobalCov:
      return MetricState::global_cov(random_unit_det_spd(g, p));
    case MetricScope::LocalCov: {
      std::vector<Matrix> ms;
      for (Index k = 0; k < c; ++k) ms.push_back(random_unit_det_spd(g, p));
      return MetricState::local_cov(std::move(ms));
    }
    case MetricScope::GlobalWeights:
      return MetricState::global_weights(
          *d.weight_constraint == WeightConstraint::SumToOne ? random_sum_weights(g, p) : random_product_weights(g, p),
          *d.weight_constraint);
    case MetricScope::LocalWeights: {
      Matrix w(c, p);
      for (Index k = 0; k < c; ++k)
        w.row(k) = (*d.weight_constraint == WeightConstraint::SumToOne ? random_sum_weights(g, p)
                                                                        : random_product_weights(g, p))
                       .transpose();
      return MetricState::local_weights(std::move(w), *d.weight_constraint);
    }
  }
  return MetricState::none();
}

// Term-by-term objective, written from the definitions and sharing no code with the engine.
inline double oracle_objective(const AlgorithmSpec& spec, const Matrix& x, const Matrix& u, const Matrix& g,
                               const MetricState& metric) {
  const auto d = describe(spec.variant);
  const bool l1 = d.pointwise_kind == PointwiseKind::AbsDiff;
  double j_total = 0.0;
  for (Index i = 0; i < x.rows(); ++i) {
    for (Index k = 0; k < g.rows(); ++k) {
      double delta = 0.0;
      if (const auto* m = metric.get_if<GlobalCov<double>>()) {
        const Vector diff = (x.row(i) - g.row(k)).transpose();
        delta = diff.dot(m->m * diff);
      } else if (const auto* ms = metric.get_if<LocalCov<double>>()) {
        const Vector diff = (x.row(i) - g.row(k)).transpose();
        delta = diff.dot(ms->ms[static_cast<std::size_t>(k)] * diff);
      } else {
        for (Index j = 0; j < x.cols(); ++j) {
          const double e = x(i, j) - g(k, j);
          double w = 1.0;
          if (const auto* gw = metric.get_if<GlobalWeights<double>>()) w = gw->v(j);
          if (const auto* lw = metric.get_if<LocalWeights<double>>()) w = lw->v(k, j);
          delta += w * (l1 ? std::abs(e) : e * e);
        }
      }
      j_total += u(i, k) * delta;
      if (u(i, k) > 0.0) j_total += spec.t_u * u(i, k) * std::log(u(i, k));
    }
  }
  if (d.uses_tv) {
    const double tv = spec.t_v.value_or(1.0);
    if (const auto* gw = metric.get_if<GlobalWeights<double>>())
      for (Index j = 0; j < gw->v.size(); ++j)
        if (gw->v(j) > 0.0) j_total += tv * gw->v(j) * std::log(gw->v(j));
    if (const auto* lw = metric.get_if<LocalWeights<double>>())
      for (Index k = 0; k < lw->v.rows(); ++k)
        for (Index j = 0; j < lw->v.cols(); ++j)
          if (lw->v(k, j) > 0.0) j_total += tv * lw->v(k, j) * std::log(lw->v(k, j));
  }
  return j_total;
}

inline AlgorithmSpec make_spec(Variant v, int clusters, double t_u = 1.0, double t_v = 1.0, std::uint64_t seed = 0) {
  AlgorithmSpec s;
  s.variant = v;
  s.clusters = clusters;
  s.t_u = t_u;
  if (describe(v).uses_tv) s.t_v = t_v;
  s.seed = seed;
  return s;
}

// Multiplicative perturbations that stay on each variant's feasible set.
inline MetricState perturb_metric(Gen& gen, const MetricState& metric, double scale) {
  auto sym_step = [&](const Matrix& m) {
    const Index p = m.rows();
    Matrix s = random_matrix(gen, p, p, -scale, scale);
    Matrix out = m + 0.5 * (s + s.transpose());
    out = 0.5 * (out + out.transpose());
    const double det = out.determinant();
    if (!(det > 0.0)) return m;
    Eigen::LLT<Matrix> llt(out);
    if (llt.info() != Eigen::Success) return m;
    return Matrix(out / std::pow(det, 1.0 / static_cast<double>(p)));
  };
  auto weight_step = [&](Eigen::VectorXd v, WeightConstraint c) {
    for (Index j = 0; j < v.size(); ++j) v(j) *= std::exp(uniform(gen, -scale, scale));
    if (c == WeightConstraint::SumToOne) return Eigen::VectorXd(v / v.sum());
    double log_sum = 0.0;
    for (Index j = 0; j < v.size(); ++j) log_sum += std::log(v(j));
    return Eigen::VectorXd(v * std::exp(-log_sum / static_cast<double>(v.size())));
  };
  if (const auto* m = metric.get_if<GlobalCov<double>>()) return MetricState::global_cov(sym_step(m->m));
  if (const auto* ms = metric.get_if<LocalCov<double>>()) {
    std::vector<Matrix> out;
    for (const auto& m : ms->ms) out.push_back(sym_step(m));
    return MetricState::local_cov(std::move(out));
  }
  if (const auto* gw = metric.get_if<GlobalWeights<double>>())
    return MetricState::global_weights(weight_step(gw->v, gw->constraint), gw->constraint);
  if (const auto* lw = metric.get_if<LocalWeights<double>>()) {
    Matrix out = lw->v;
    for (Index k = 0; k < out.rows(); ++k) out.row(k) = weight_step(lw->v.row(k).transpose(), lw->constraint).transpose();
    return MetricState::local_weights(std::move(out), lw->constraint);
  }
  return metric;
}

inline Matrix perturb_row_on_simplex(Gen& gen, const Matrix& u, Index i, double scale) {
  Matrix out = u;
  for (Index k = 0; k < u.cols(); ++k) out(i, k) *= std::exp(uniform(gen, -scale, scale));
  out.row(i) /= out.row(i).sum();
  return out;
}

}  // namespace fcmer::test
