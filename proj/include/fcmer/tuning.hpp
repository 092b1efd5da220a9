#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fcmer/core.hpp"
#include "fcmer/data.hpp"
#include "fcmer/engine.hpp"

namespace fcmer {

enum class SweepSearch {
  Exact,   // every lattice point from tu_min upwards
  Bisect,  // geometric coarse scan, then binary search inside the bracketing step
};

struct SweepConfig {
  double tu_min = 0.01;
  double tu_max = 100.0;
  double tu_step = 0.01;
  std::vector<double> tv_grid;
  double min_centroid_threshold = 0.1;
  int restarts_per_candidate = 1;
  SweepSearch search = SweepSearch::Exact;

  void validate() const;
};

/// T_v values tried when a sum-constrained variant has no explicit grid.
std::vector<double> default_tv_grid();

struct SweepPoint {
  double t_u;
  double min_distance;
};

struct TuSelection {
  double t_u;
  bool crossed;                   // false when no candidate fell below the threshold
  std::vector<SweepPoint> curve;  // every evaluated candidate, ascending in t_u
};

struct TuTvCandidate {
  double t_u;
  double t_v;
  double min_distance;
  bool crossed;
};

struct TuTvSelection {
  double t_u;
  double t_v;
  double min_distance;
  std::vector<TuTvCandidate> candidates;  // one per tv_grid entry, in grid order
};

/// Smallest Euclidean distance between two prototypes.
double min_centroid_distance(const PrototypeSet& g);

/// First T_u of the sweep whose fitted prototypes come closer than the
/// threshold. Candidate m is fitted from derive_seed(template seed, m).
TuSelection select_tu(const AlgorithmSpec& spec_template, const Dataset& data, const SweepConfig& cfg);

/// For each T_v in the grid, runs the T_u sweep; returns the pair whose fit
/// keeps its prototypes furthest apart (ties: smaller T_v, then smaller T_u).
TuTvSelection select_tu_tv(const AlgorithmSpec& spec_template, const Dataset& data, const SweepConfig& cfg);

/// Runs seeds seed, seed+1, ..., seed+n-1 and keeps the lowest final objective
/// (earliest run on ties).
FitResult best_of_restarts(const AlgorithmSpec& spec, const Dataset& data, int n_restarts, std::uint64_t seed);

/// Mixes a base seed with stream coordinates (splitmix64).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0);

struct Experiment {
  enum class Kind { Config, Outliers } kind = Kind::Config;
  int value = 1;  // configuration id or outlier percentage

  std::string name() const;
  int clusters() const { return kind == Kind::Config ? 4 : 2; }
  /// "config1".."config4", or "outliers" with the given percentage.
  static std::optional<Experiment> parse(const std::string& name, int pct = 0);
};

struct MonteCarloConfig {
  Experiment experiment;
  std::vector<Variant> variants;
  int replications = 10;
  int restarts = 50;
  std::uint64_t seed = 1;
  std::optional<double> fixed_tu;  // skips the T_u sweep
  std::optional<double> fixed_tv;  // skips the T_v grid
  SweepConfig sweep;
  bool standardize = true;
  bool include_outliers = false;  // score outliers as a third class instead of dropping them
  int threads = 1;
  bool keep_going = false;
  L1Solver l1_solver = L1Solver::WeightedMedian;
  int max_iter = 100;
  double epsilon = 1e-5;
};

struct ReplicationRecord {
  Variant variant;
  int replication;
  double t_u = 0.0;
  std::optional<double> t_v;
  double objective = 0.0;
  double hul = 0.0;
  double ari = 0.0;
  std::optional<double> rd;
  std::optional<std::string> error;
};

struct ReportRow {
  Variant variant;
  std::string index;  // "HUL", "ARI" or "rd"
  double mean;
  double std;  // sample standard deviation; 0 for a single replication
  int count;
};

struct Report {
  std::string experiment;
  std::vector<ReportRow> rows;
  std::vector<ReplicationRecord> records;  // replication-major, then variant order
};

/// One replication: regenerate, standardize, tune, best-of-restarts, score.
std::vector<ReplicationRecord> run_replication(const MonteCarloConfig& cfg, int replication);

/// Replications run on cfg.threads workers; the report does not depend on it.
Report monte_carlo(const MonteCarloConfig& cfg);

/// "variant,index,mean,std" rows with 17 significant digits.
std::string report_csv(const Report& report);
/// Per-replication detail as CSV.
std::string records_csv(const Report& report);
/// Variants down, indices across, "mean (std)" to 4 decimals.
std::string report_table(const Report& report);

}  // namespace fcmer
