#include "fcmer/engine.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "fcmer/linalg.hpp"

namespace fcmer {

namespace {

constexpr double kMassFloor = 1e-12;
constexpr double kLogClamp = 1e-300;
constexpr double kProductFloor = 1e-10;

double xlogx(double x) { return x > 0.0 ? x * std::log(std::max(x, kLogClamp)) : 0.0; }

void check_shapes(const Dataset& data, const PrototypeSet& g) {
  if (g.p() != data.p()) throw Error(ErrorCode::ShapeMismatch, "prototype dimension differs from feature count");
}

void check_metric(const AlgorithmSpec& spec, const MetricState& metric, Index c, Index p) {
  const auto d = describe(spec.variant);
  const std::string name(variant_name(spec.variant));
  auto mismatch = [&](const char* why) { return Error(ErrorCode::MetricMismatch, name + ": " + why); };
  switch (d.metric_scope) {
    case MetricScope::None:
      if (!metric.get_if<NoMetric<double>>()) throw mismatch("expected no metric");
      return;
    case MetricScope::GlobalCov: {
      const auto* m = metric.get_if<GlobalCov<double>>();
      if (!m) throw mismatch("expected a global covariance metric");
      if (m->m.rows() != p) throw mismatch("metric dimension differs from feature count");
      return;
    }
    case MetricScope::LocalCov: {
      const auto* m = metric.get_if<LocalCov<double>>();
      if (!m) throw mismatch("expected per-cluster covariance metrics");
      if (static_cast<Index>(m->ms.size()) != c || m->ms.front().rows() != p)
        throw mismatch("metric shape differs from C x P x P");
      return;
    }
    case MetricScope::GlobalWeights: {
      const auto* w = metric.get_if<GlobalWeights<double>>();
      if (!w) throw mismatch("expected global weights");
      if (w->v.size() != p) throw mismatch("weight count differs from feature count");
      if (w->constraint != *d.weight_constraint) throw mismatch("weight constraint differs from variant");
      return;
    }
    case MetricScope::LocalWeights: {
      const auto* w = metric.get_if<LocalWeights<double>>();
      if (!w) throw mismatch("expected per-cluster weights");
      if (w->v.rows() != c || w->v.cols() != p) throw mismatch("weight matrix shape differs from C x P");
      if (w->constraint != *d.weight_constraint) throw mismatch("weight constraint differs from variant");
      return;
    }
  }
}

// Scatter of the data around g_k weighted by column k of U.
Eigen::MatrixXd scatter(const Dataset& data, const FuzzyPartition& u, const PrototypeSet& g, Index k) {
  const Eigen::MatrixXd diff = data.features().rowwise() - g.row(k);
  Eigen::MatrixXd s = diff.transpose() * (diff.array().colwise() * u.matrix().col(k).array()).matrix();
  return (s + s.transpose()) / 2.0;
}

Matrix unit_det_metric(const Eigen::MatrixXd& scatter_matrix) {
  // a cluster with zero dispersion carries no shape information
  if (!(scatter_matrix.trace() > 0.0)) return Matrix::Identity(scatter_matrix.rows(), scatter_matrix.cols());
  return det_normalized_inverse(scatter_matrix);
}

// D_kj = sum_i u_ik d(x_ij, g_kj)
Matrix dispersions(PointwiseKind kind, const Dataset& data, const FuzzyPartition& u, const PrototypeSet& g) {
  const auto& x = data.features();
  Matrix d = Matrix::Zero(g.c(), data.p());
  for (Index k = 0; k < g.c(); ++k)
    for (Index i = 0; i < data.n(); ++i) {
      const double uik = u(i, k);
      for (Index j = 0; j < data.p(); ++j) d(k, j) += uik * pointwise(kind, x(i, j), g.matrix()(k, j));
    }
  return d;
}

template <typename Row>
Vector product_weights(const Row& dispersion) {
  const Index p = dispersion.size();
  Vector log_d(p);
  for (Index j = 0; j < p; ++j) log_d(j) = std::log(std::max(dispersion(j), kProductFloor));
  const double log_geo = log_d.mean();
  Vector v(p);
  for (Index j = 0; j < p; ++j) v(j) = std::exp(log_geo - log_d(j));
  return v;
}

}  // namespace

VariantDescriptor describe(Variant v) noexcept {
  using PK = PointwiseKind;
  using MS = MetricScope;
  using WC = WeightConstraint;
  switch (v) {
    case Variant::FcmErL2: return {PK::SquaredDiff, false, MS::None, std::nullopt, false};
    case Variant::FcmErL1: return {PK::AbsDiff, false, MS::None, std::nullopt, false};
    case Variant::AfcmErM: return {PK::SquaredDiff, true, MS::GlobalCov, std::nullopt, false};
    case Variant::AfcmErMk: return {PK::SquaredDiff, true, MS::LocalCov, std::nullopt, false};
    case Variant::AfcmErGsL2: return {PK::SquaredDiff, false, MS::GlobalWeights, WC::SumToOne, true};
    case Variant::AfcmErGsL1: return {PK::AbsDiff, false, MS::GlobalWeights, WC::SumToOne, true};
    case Variant::AfcmErGpL2: return {PK::SquaredDiff, false, MS::GlobalWeights, WC::ProductToOne, false};
    case Variant::AfcmErGpL1: return {PK::AbsDiff, false, MS::GlobalWeights, WC::ProductToOne, false};
    case Variant::AfcmErLsL2: return {PK::SquaredDiff, false, MS::LocalWeights, WC::SumToOne, true};
    case Variant::AfcmErLsL1: return {PK::AbsDiff, false, MS::LocalWeights, WC::SumToOne, true};
    case Variant::AfcmErLpL2: return {PK::SquaredDiff, false, MS::LocalWeights, WC::ProductToOne, false};
    case Variant::AfcmErLpL1: return {PK::AbsDiff, false, MS::LocalWeights, WC::ProductToOne, false};
  }
  return {PK::SquaredDiff, false, MS::None, std::nullopt, false};
}

void validate(const AlgorithmSpec& spec, Index n) {
  if (spec.clusters < 2) throw Error(ErrorCode::InvalidArgument, "need at least 2 clusters");
  if (spec.clusters > n) throw Error(ErrorCode::InvalidArgument, "more clusters than objects");
  if (!(spec.t_u > 0.0) || !std::isfinite(spec.t_u)) throw Error(ErrorCode::InvalidArgument, "T_u must be > 0");
  if (describe(spec.variant).uses_tv) {
    if (!spec.t_v) throw Error(ErrorCode::InvalidArgument, std::string(variant_name(spec.variant)) + " needs T_v");
    if (!(*spec.t_v > 0.0) || !std::isfinite(*spec.t_v)) throw Error(ErrorCode::InvalidArgument, "T_v must be > 0");
  }
  if (spec.max_iter < 1) throw Error(ErrorCode::InvalidArgument, "max_iter must be positive");
  if (!(spec.epsilon > 0.0)) throw Error(ErrorCode::InvalidArgument, "epsilon must be positive");
}

Matrix distance_matrix(const AlgorithmSpec& spec, const Dataset& data, const PrototypeSet& g,
                       const MetricState& metric) {
  check_shapes(data, g);
  check_metric(spec, metric, g.c(), data.p());
  const auto desc = describe(spec.variant);
  const auto& x = data.features();
  const Index n = data.n();
  const Index c = g.c();
  Matrix delta(n, c);
  for (Index i = 0; i < n; ++i) {
    const auto xi = x.row(i);
    for (Index k = 0; k < c; ++k) {
      const auto gk = g.row(k);
      double d = 0.0;
      switch (desc.metric_scope) {
        case MetricScope::None: d = unweighted_distance(desc.pointwise_kind, xi, gk); break;
        case MetricScope::GlobalCov: d = mahalanobis(xi, gk, metric.get_if<GlobalCov<double>>()->m); break;
        case MetricScope::LocalCov: d = mahalanobis(xi, gk, metric.get_if<LocalCov<double>>()->ms[k]); break;
        case MetricScope::GlobalWeights:
          d = weighted_distance(desc.pointwise_kind, xi, gk, metric.get_if<GlobalWeights<double>>()->v);
          break;
        case MetricScope::LocalWeights:
          d = weighted_distance(desc.pointwise_kind, xi, gk, metric.get_if<LocalWeights<double>>()->v.row(k));
          break;
      }
      delta(i, k) = d;
    }
  }
  return delta;
}

double objective(const AlgorithmSpec& spec, const Dataset& data, const FuzzyPartition& u, const PrototypeSet& g,
                 const MetricState& metric) {
  if (u.n() != data.n() || u.c() != g.c())
    throw Error(ErrorCode::ShapeMismatch, "partition shape differs from N x C");
  const Matrix delta = distance_matrix(spec, data, g, metric);
  double heterogeneity = 0.0;
  double entropy = 0.0;
  for (Index i = 0; i < u.n(); ++i)
    for (Index k = 0; k < u.c(); ++k) {
      heterogeneity += u(i, k) * delta(i, k);
      entropy += xlogx(u(i, k));
    }
  double j = heterogeneity + spec.t_u * entropy;

  if (describe(spec.variant).uses_tv) {
    if (!spec.t_v) throw Error(ErrorCode::InvalidArgument, "T_v required");
    double weight_entropy = 0.0;
    if (const auto* w = metric.get_if<GlobalWeights<double>>()) {
      for (Index p = 0; p < w->v.size(); ++p) weight_entropy += xlogx(w->v(p));
    } else if (const auto* lw = metric.get_if<LocalWeights<double>>()) {
      for (Index k = 0; k < lw->v.rows(); ++k)
        for (Index p = 0; p < lw->v.cols(); ++p) weight_entropy += xlogx(lw->v(k, p));
    }
    j += *spec.t_v * weight_entropy;
  }
  return j;
}

PrototypeSet update_prototypes(const AlgorithmSpec& spec, const Dataset& data, const FuzzyPartition& u, Rng& rng,
                               const PrototypeSet* previous, PrototypeUpdateInfo* info) {
  if (u.n() != data.n()) throw Error(ErrorCode::ShapeMismatch, "partition rows differ from object count");
  const auto desc = describe(spec.variant);
  const auto& x = data.features();
  const Index n = data.n();
  const Index c = u.c();
  const Index p = data.p();
  const bool city_block = desc.pointwise_kind == PointwiseKind::AbsDiff;
  if (previous && (previous->c() != c || previous->p() != p))
    throw Error(ErrorCode::ShapeMismatch, "previous prototypes have the wrong shape");

  Matrix g(c, p);
  std::vector<double> column(static_cast<std::size_t>(n));
  std::vector<double> weights(static_cast<std::size_t>(n));
  for (Index k = 0; k < c; ++k) {
    const double mass = u.matrix().col(k).sum();
    if (mass < kMassFloor) {
      const auto pick = static_cast<Index>(uniform01(rng) * static_cast<double>(n));
      g.row(k) = x.row(std::min(pick, n - 1));
      if (info) ++info->reseeds;
      continue;
    }
    if (!city_block) {
      g.row(k) = (u.matrix().col(k).transpose() * x) / mass;
      continue;
    }
    for (Index i = 0; i < n; ++i) weights[static_cast<std::size_t>(i)] = u(i, k);
    for (Index j = 0; j < p; ++j) {
      for (Index i = 0; i < n; ++i) column[static_cast<std::size_t>(i)] = x(i, j);
      if (spec.l1_solver == L1Solver::Irls) {
        const double start = previous ? previous->matrix()(k, j) : u.matrix().col(k).dot(x.col(j)) / mass;
        g(k, j) = irls_prototype<double>(column, weights, start);
      } else {
        g(k, j) = weighted_median(column, weights);
      }
    }
  }
  return PrototypeSet(std::move(g));
}

MetricState update_metric(const AlgorithmSpec& spec, const Dataset& data, const FuzzyPartition& u,
                          const PrototypeSet& g) {
  check_shapes(data, g);
  if (u.n() != data.n() || u.c() != g.c()) throw Error(ErrorCode::ShapeMismatch, "partition shape differs from N x C");
  const auto desc = describe(spec.variant);
  const Index c = g.c();
  switch (desc.metric_scope) {
    case MetricScope::None: return MetricState::none();
    case MetricScope::LocalCov: {
      std::vector<Matrix> ms;
      ms.reserve(static_cast<std::size_t>(c));
      for (Index k = 0; k < c; ++k) ms.push_back(unit_det_metric(scatter(data, u, g, k)));
      return MetricState::local_cov(std::move(ms));
    }
    case MetricScope::GlobalCov: {
      Eigen::MatrixXd q = Eigen::MatrixXd::Zero(data.p(), data.p());
      for (Index k = 0; k < c; ++k) q += scatter(data, u, g, k);
      return MetricState::global_cov(unit_det_metric(q));
    }
    case MetricScope::GlobalWeights: {
      const Vector d = dispersions(desc.pointwise_kind, data, u, g).colwise().sum().transpose();
      if (*desc.weight_constraint == WeightConstraint::SumToOne)
        return MetricState::global_weights(stable_normalized_exponentials(d, *spec.t_v), WeightConstraint::SumToOne);
      return MetricState::global_weights(product_weights(d), WeightConstraint::ProductToOne);
    }
    case MetricScope::LocalWeights: {
      const Matrix d = dispersions(desc.pointwise_kind, data, u, g);
      Matrix v(c, data.p());
      for (Index k = 0; k < c; ++k) {
        if (*desc.weight_constraint == WeightConstraint::SumToOne)
          v.row(k) = stable_normalized_exponentials(d.row(k).transpose(), *spec.t_v).transpose();
        else
          v.row(k) = product_weights(d.row(k)).transpose();
      }
      return MetricState::local_weights(std::move(v), *desc.weight_constraint);
    }
  }
  return MetricState::none();
}

FuzzyPartition update_membership(const AlgorithmSpec& spec, const Dataset& data, const PrototypeSet& g,
                                 const MetricState& metric) {
  const Matrix delta = distance_matrix(spec, data, g, metric);
  Matrix u(delta.rows(), delta.cols());
  for (Index i = 0; i < delta.rows(); ++i)
    u.row(i) = stable_normalized_exponentials(delta.row(i).transpose(), spec.t_u).transpose();
  return FuzzyPartition(std::move(u));
}

FuzzyPartition random_partition(Index n, Index c, Rng& rng) {
  Matrix u(n, c);
  for (Index i = 0; i < n; ++i) {
    double sum = 0.0;
    for (Index k = 0; k < c; ++k) {
      u(i, k) = -std::log(1.0 - uniform01(rng));
      sum += u(i, k);
    }
    if (sum > 0.0)
      u.row(i) /= sum;
    else
      u.row(i).setConstant(1.0 / static_cast<double>(c));
  }
  return FuzzyPartition(std::move(u));
}

FitResult fit(const AlgorithmSpec& spec, const Dataset& data, const FitOptions& options) {
  validate(spec, data.n());
  const Index c = spec.clusters;
  Rng rng(spec.seed);

  FuzzyPartition u = options.initial_partition ? *options.initial_partition : random_partition(data.n(), c, rng);
  if (u.n() != data.n() || u.c() != c) throw Error(ErrorCode::ShapeMismatch, "initial partition must be N x C");
  if (options.fixed_metric) check_metric(spec, *options.fixed_metric, c, data.p());

  std::optional<PrototypeSet> g;
  std::optional<MetricState> metric;
  std::vector<double> trace;
  PrototypeUpdateInfo info;
  Termination termination = Termination::MaxIterations;
  int t = 0;
  while (t < spec.max_iter) {
    ++t;
    g = update_prototypes(spec, data, u, rng, g ? &*g : nullptr, &info);
    metric = options.fixed_metric ? *options.fixed_metric : update_metric(spec, data, u, *g);
    FuzzyPartition next = update_membership(spec, data, *g, *metric);
    const double j = objective(spec, data, next, *g, *metric);
    if (!trace.empty() && j > trace.back() + 1e-6 * std::max(1.0, std::abs(trace.back())))
      throw Error(ErrorCode::NonDecreasingObjective,
                  "objective rose from " + std::to_string(trace.back()) + " to " + std::to_string(j) +
                      " at iteration " + std::to_string(t));
    trace.push_back(j);
    const double change = (next.matrix() - u.matrix()).cwiseAbs().maxCoeff();
    u = std::move(next);
    if (options.observer) options.observer(IterationState{t, u, *g, *metric, j, change});
    if (change < spec.epsilon) {
      termination = Termination::Converged;
      break;
    }
  }
  return FitResult{std::move(u), std::move(*g), std::move(*metric), std::move(trace), t, termination, info.reseeds};
}

}  // namespace fcmer
