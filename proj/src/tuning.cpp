#include "fcmer/tuning.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>
#include <thread>

#include "fcmer/eval.hpp"
#include "fcmer/io_format.hpp"

namespace fcmer {

namespace {

constexpr double kCoarseGrowth = 1.25;

class Sweep {
 public:
  Sweep(const AlgorithmSpec& tmpl, const Dataset& data, const SweepConfig& cfg)
      : tmpl_(tmpl), data_(data), cfg_(cfg),
        last_(static_cast<long>(std::floor((cfg.tu_max - cfg.tu_min) / cfg.tu_step + 1e-9))) {}

  long last() const { return last_; }

  double value(long m) const {
    const double raw = cfg_.tu_min + static_cast<double>(m) * cfg_.tu_step;
    return std::round(raw * 1e12) / 1e12;
  }

  long index_at_least(double t) const {
    const long m = static_cast<long>(std::ceil((t - cfg_.tu_min) / cfg_.tu_step - 1e-9));
    return std::clamp(m, 0L, last_);
  }

  double distance(long m) {
    if (auto it = cache_.find(m); it != cache_.end()) return it->second;
    AlgorithmSpec spec = tmpl_;
    spec.t_u = value(m);
    const FitResult best = best_of_restarts(spec, data_, cfg_.restarts_per_candidate, derive_seed(tmpl_.seed, static_cast<std::uint64_t>(m)));
    const double d = min_centroid_distance(best.prototypes);
    cache_.emplace(m, d);
    return d;
  }

  bool crosses(long m) { return distance(m) < cfg_.min_centroid_threshold; }

  std::vector<SweepPoint> curve() const {
    std::vector<SweepPoint> out;
    for (const auto& [m, d] : cache_) out.push_back({value(m), d});
    return out;
  }

 private:
  const AlgorithmSpec& tmpl_;
  const Dataset& data_;
  const SweepConfig& cfg_;
  long last_;
  std::map<long, double> cache_;
};

double sample_std(const std::vector<double>& xs, double mean) {
  if (xs.size() < 2) return 0.0;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

}  // namespace

void SweepConfig::validate() const {
  if (!(tu_min > 0.0) || !(tu_step > 0.0)) throw Error(ErrorCode::InvalidArgument, "T_u sweep bounds must be > 0");
  if (!(tu_min < tu_max)) throw Error(ErrorCode::InvalidArgument, "tu_min must be below tu_max");
  if (!(min_centroid_threshold > 0.0)) throw Error(ErrorCode::InvalidArgument, "centroid threshold must be > 0");
  if (restarts_per_candidate < 1) throw Error(ErrorCode::InvalidArgument, "restarts per candidate must be >= 1");
  for (double tv : tv_grid)
    if (!(tv > 0.0)) throw Error(ErrorCode::InvalidArgument, "T_v grid values must be > 0");
}

std::vector<double> default_tv_grid() { return {0.1, 1.0, 10.0, 100.0, 1000.0}; }

double min_centroid_distance(const PrototypeSet& g) {
  double best = std::numeric_limits<double>::infinity();
  for (Index a = 0; a < g.c(); ++a)
    for (Index b = a + 1; b < g.c(); ++b) best = std::min(best, (g.row(a) - g.row(b)).norm());
  return best;
}

TuSelection select_tu(const AlgorithmSpec& spec_template, const Dataset& data, const SweepConfig& cfg) {
  cfg.validate();
  Sweep sweep(spec_template, data, cfg);
  auto done = [&](long m) { return TuSelection{sweep.value(m), true, sweep.curve()}; };

  if (cfg.search == SweepSearch::Exact) {
    for (long m = 0; m <= sweep.last(); ++m)
      if (sweep.crosses(m)) return done(m);
    return TuSelection{cfg.tu_max, false, sweep.curve()};
  }

  long lo = -1;
  long m = 0;
  while (true) {
    if (sweep.crosses(m)) break;
    if (m == sweep.last()) return TuSelection{cfg.tu_max, false, sweep.curve()};
    lo = m;
    m = std::max(m + 1, sweep.index_at_least(sweep.value(m) * kCoarseGrowth));
  }
  long hi = m;
  while (hi - lo > 1) {
    const long mid = lo + (hi - lo) / 2;
    if (sweep.crosses(mid))
      hi = mid;
    else
      lo = mid;
  }
  return done(hi);
}

TuTvSelection select_tu_tv(const AlgorithmSpec& spec_template, const Dataset& data, const SweepConfig& cfg) {
  if (!describe(spec_template.variant).uses_tv)
    throw Error(ErrorCode::InvalidArgument, std::string(variant_name(spec_template.variant)) + " has no T_v");
  if (cfg.tv_grid.empty()) throw Error(ErrorCode::MissingTvGrid, "T_v grid is empty");

  TuTvSelection out{0.0, 0.0, -1.0, {}};
  for (double tv : cfg.tv_grid) {
    AlgorithmSpec spec = spec_template;
    spec.t_v = tv;
    const TuSelection s = select_tu(spec, data, cfg);
    double d = 0.0;
    if (s.crossed) {
      for (const auto& pt : s.curve)
        if (pt.t_u == s.t_u) d = pt.min_distance;
    } else {
      spec.t_u = s.t_u;
      d = min_centroid_distance(best_of_restarts(spec, data, cfg.restarts_per_candidate, spec.seed).prototypes);
    }
    out.candidates.push_back({s.t_u, tv, d, s.crossed});
  }
  const TuTvCandidate* best = nullptr;
  for (const auto& c : out.candidates) {
    if (!best || c.min_distance > best->min_distance ||
        (c.min_distance == best->min_distance &&
         (c.t_v < best->t_v || (c.t_v == best->t_v && c.t_u < best->t_u))))
      best = &c;
  }
  out.t_u = best->t_u;
  out.t_v = best->t_v;
  out.min_distance = best->min_distance;
  return out;
}

FitResult best_of_restarts(const AlgorithmSpec& spec, const Dataset& data, int n_restarts, std::uint64_t seed) {
  if (n_restarts < 1) throw Error(ErrorCode::InvalidArgument, "need at least one restart");
  std::optional<FitResult> best;
  for (int r = 0; r < n_restarts; ++r) {
    AlgorithmSpec s = spec;
    s.seed = seed + static_cast<std::uint64_t>(r);
    FitResult res = fit(s, data);
    if (!best || res.objective() < best->objective()) best = std::move(res);
  }
  return std::move(*best);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
  auto mix = [](std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  };
  return mix(mix(mix(base) ^ a) ^ (b + 0x632BE59BD9B4E019ULL));
}

std::string Experiment::name() const {
  if (kind == Kind::Config) return "config" + std::to_string(value);
  return "outliers" + std::to_string(value);
}

std::optional<Experiment> Experiment::parse(const std::string& name, int pct) {
  if (name.size() == 7 && name.rfind("config", 0) == 0 && name[6] >= '1' && name[6] <= '4')
    return Experiment{Kind::Config, name[6] - '0'};
  if (name == "outliers" && (pct == 0 || pct == 10 || pct == 20 || pct == 30)) return Experiment{Kind::Outliers, pct};
  return std::nullopt;
}

std::vector<ReplicationRecord> run_replication(const MonteCarloConfig& cfg, int replication) {
  const auto rep = static_cast<std::uint64_t>(replication);
  const std::uint64_t data_seed = cfg.seed + rep;
  const bool outliers = cfg.experiment.kind == Experiment::Kind::Outliers;

  std::optional<OutlierSet> noisy;
  std::optional<Dataset> raw;
  if (outliers) {
    noisy = generate_outlier_set(cfg.experiment.value, data_seed);
    raw = noisy->data;
  } else {
    raw = generate_config(cfg.experiment.value, data_seed);
  }
  std::optional<Standardized> st;
  if (cfg.standardize) st = standardize(*raw);
  const Dataset& data = st ? st->data : *raw;

  // rows scored against the a-priori classes
  std::vector<Index> scored;
  std::vector<int> labels;
  for (Index i = 0; i < data.n(); ++i) {
    const bool is_outlier = noisy && noisy->outlier[static_cast<std::size_t>(i)];
    if (is_outlier && !cfg.include_outliers) continue;
    scored.push_back(i);
    labels.push_back(data.labels()[static_cast<std::size_t>(i)]);
  }

  std::vector<ReplicationRecord> out;
  for (std::size_t vi = 0; vi < cfg.variants.size(); ++vi) {
    const Variant v = cfg.variants[vi];
    ReplicationRecord rec{};
    rec.variant = v;
    rec.replication = replication;
    try {
      AlgorithmSpec spec;
      spec.variant = v;
      spec.clusters = cfg.experiment.clusters();
      spec.max_iter = cfg.max_iter;
      spec.epsilon = cfg.epsilon;
      spec.l1_solver = cfg.l1_solver;
      spec.seed = derive_seed(cfg.seed, rep, 2 * vi);
      const bool uses_tv = describe(v).uses_tv;

      if (uses_tv && !cfg.fixed_tv) {
        if (cfg.fixed_tu) throw Error(ErrorCode::InvalidArgument, "a fixed T_u needs a fixed T_v for this variant");
        SweepConfig sweep = cfg.sweep;
        if (sweep.tv_grid.empty()) sweep.tv_grid = default_tv_grid();
        const TuTvSelection sel = select_tu_tv(spec, data, sweep);
        spec.t_u = sel.t_u;
        spec.t_v = sel.t_v;
      } else {
        if (uses_tv) spec.t_v = cfg.fixed_tv;
        spec.t_u = cfg.fixed_tu ? *cfg.fixed_tu : select_tu(spec, data, cfg.sweep).t_u;
      }
      rec.t_u = spec.t_u;
      rec.t_v = spec.t_v;

      const FitResult best = best_of_restarts(spec, data, cfg.restarts, derive_seed(cfg.seed, rep, 2 * vi + 1));
      rec.objective = best.objective();

      Matrix u(static_cast<Index>(scored.size()), best.partition.c());
      for (std::size_t s = 0; s < scored.size(); ++s) u.row(static_cast<Index>(s)) = best.partition.matrix().row(scored[s]);
      const FuzzyPartition scored_u(std::move(u));
      rec.hul = hullermeier_index(scored_u, labels);
      rec.ari = adjusted_rand_index(hard_partition(scored_u), labels);

      if (noisy) {
        const Matrix g = st ? destandardize(best.prototypes.matrix(), *st) : best.prototypes.matrix();
        rec.rd = robustness_detection(g, noisy->ideal_centers);
      }
    } catch (const Error& e) {
      if (!cfg.keep_going) throw;
      rec.error = e.what();
    }
    out.push_back(std::move(rec));
  }
  return out;
}

Report monte_carlo(const MonteCarloConfig& cfg) {
  if (cfg.replications < 1) throw Error(ErrorCode::InvalidArgument, "need at least one replication");
  if (cfg.restarts < 1) throw Error(ErrorCode::InvalidArgument, "need at least one restart");
  if (cfg.variants.empty()) throw Error(ErrorCode::InvalidArgument, "no variants selected");
  cfg.sweep.validate();

  const auto reps = static_cast<std::size_t>(cfg.replications);
  std::vector<std::vector<ReplicationRecord>> results(reps);
  std::vector<std::exception_ptr> failures(reps);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t r = next++; r < reps; r = next++) {
      try {
        results[r] = run_replication(cfg, static_cast<int>(r));
      } catch (...) {
        failures[r] = std::current_exception();
      }
    }
  };
  const int threads = std::max(1, std::min(cfg.threads, cfg.replications));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  for (const auto& f : failures)
    if (f) std::rethrow_exception(f);

  Report report;
  report.experiment = cfg.experiment.name();
  for (auto& batch : results)
    for (auto& rec : batch) report.records.push_back(std::move(rec));

  const bool with_rd = cfg.experiment.kind == Experiment::Kind::Outliers;
  for (Variant v : cfg.variants) {
    std::vector<double> hul;
    std::vector<double> ari;
    std::vector<double> rd;
    for (const auto& rec : report.records) {
      if (rec.variant != v || rec.error) continue;
      hul.push_back(rec.hul);
      ari.push_back(rec.ari);
      if (rec.rd) rd.push_back(*rec.rd);
    }
    auto add = [&](const char* index, const std::vector<double>& xs) {
      double mean = 0.0;
      for (double x : xs) mean += x;
      mean = xs.empty() ? std::numeric_limits<double>::quiet_NaN() : mean / static_cast<double>(xs.size());
      report.rows.push_back({v, index, mean, sample_std(xs, mean), static_cast<int>(xs.size())});
    };
    add("HUL", hul);
    add("ARI", ari);
    if (with_rd) add("rd", rd);
  }
  return report;
}

std::string report_csv(const Report& report) {
  std::ostringstream out;
  out << "variant,index,mean,std\n";
  for (const auto& row : report.rows)
    out << variant_name(row.variant) << ',' << row.index << ',' << format_number(row.mean) << ','
        << format_number(row.std) << '\n';
  return out.str();
}

std::string records_csv(const Report& report) {
  std::ostringstream out;
  out << "variant,replication,t_u,t_v,objective,HUL,ARI,rd,error\n";
  for (const auto& r : report.records) {
    out << variant_name(r.variant) << ',' << r.replication << ',' << format_number(r.t_u) << ','
        << (r.t_v ? format_number(*r.t_v) : "") << ',' << format_number(r.objective) << ',' << format_number(r.hul)
        << ',' << format_number(r.ari) << ',' << (r.rd ? format_number(*r.rd) : "") << ','
        << (r.error ? "\"" + *r.error + "\"" : "") << '\n';
  }
  return out.str();
}

std::string report_table(const Report& report) {
  std::vector<std::string> indices;
  for (const auto& row : report.rows)
    if (std::find(indices.begin(), indices.end(), row.index) == indices.end()) indices.push_back(row.index);

  std::ostringstream out;
  out << report.experiment << '\n';
  out << std::left << std::setw(16) << "Algorithm";
  for (const auto& idx : indices) out << std::setw(19) << idx;
  out << '\n';
  std::vector<Variant> order;
  for (const auto& row : report.rows)
    if (std::find(order.begin(), order.end(), row.variant) == order.end()) order.push_back(row.variant);
  out << std::fixed << std::setprecision(4);
  for (Variant v : order) {
    out << std::setw(16) << variant_name(v);
    for (const auto& idx : indices)
      for (const auto& row : report.rows)
        if (row.variant == v && row.index == idx) {
          std::ostringstream cell;
          cell << std::fixed << std::setprecision(4) << row.mean << " (" << row.std << ")";
          out << std::setw(19) << cell.str();
        }
    out << '\n';
  }
  return out.str();
}

}  // namespace fcmer
