#pragma once

#include <functional>
#include <optional>
#include <random>

#include "fcmer/core.hpp"
#include "fcmer/distances.hpp"

namespace fcmer {

enum class MetricScope { None, GlobalCov, LocalCov, GlobalWeights, LocalWeights };

/// Structural description of one of the twelve algorithms.
struct VariantDescriptor {
  PointwiseKind pointwise_kind;  // SquaredDiff for the quadratic-form variants
  bool quadratic_form;           // true for AFCM-ER-M / AFCM-ER-Mk
  MetricScope metric_scope;
  std::optional<WeightConstraint> weight_constraint;
  bool uses_tv;
};

VariantDescriptor describe(Variant v) noexcept;

using Rng = std::mt19937_64;

/// Uniform double in [0, 1) from the top 53 bits of one draw.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Throws InvalidArgument when the spec is unusable for a dataset of n objects.
void validate(const AlgorithmSpec& spec, Index n);

/// Objective J of the variant at (U, G, metric); 0 ln 0 counts as 0.
double objective(const AlgorithmSpec& spec, const Dataset& data, const FuzzyPartition& u, const PrototypeSet& g,
                 const MetricState& metric);

/// N x C matrix of the variant's object-to-prototype distances.
Matrix distance_matrix(const AlgorithmSpec& spec, const Dataset& data, const PrototypeSet& g,
                       const MetricState& metric);

struct PrototypeUpdateInfo {
  int reseeds = 0;
};

/// Representation step. `previous` seeds the reweighting solver when
/// spec.l1_solver is Irls; `rng` is used only to rescue empty clusters.
PrototypeSet update_prototypes(const AlgorithmSpec& spec, const Dataset& data, const FuzzyPartition& u, Rng& rng,
                               const PrototypeSet* previous = nullptr, PrototypeUpdateInfo* info = nullptr);

/// Weighting step.
MetricState update_metric(const AlgorithmSpec& spec, const Dataset& data, const FuzzyPartition& u,
                          const PrototypeSet& g);

/// Assignment step.
FuzzyPartition update_membership(const AlgorithmSpec& spec, const Dataset& data, const PrototypeSet& g,
                                 const MetricState& metric);

/// Random fuzzy partition with rows drawn uniformly on the simplex.
FuzzyPartition random_partition(Index n, Index c, Rng& rng);

/// State after each full iteration, handed to FitOptions::observer.
struct IterationState {
  int iteration;
  const FuzzyPartition& partition;
  const PrototypeSet& prototypes;
  const MetricState& metric;
  double objective;
  double max_membership_change;
};

struct FitOptions {
  /// Replaces the weighting step with a constant metric.
  std::optional<MetricState> fixed_metric;
  /// Replaces the random initial partition.
  std::optional<FuzzyPartition> initial_partition;
  std::function<void(const IterationState&)> observer;
};

/// Alternates representation, weighting and assignment until
/// max |u(t) - u(t-1)| < epsilon or max_iter iterations have run.
FitResult fit(const AlgorithmSpec& spec, const Dataset& data, const FitOptions& options = {});

}  // namespace fcmer
