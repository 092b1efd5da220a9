#include <doctest.h>

#include <set>

#include "fcmer/tuning.hpp"
#include "support.hpp"

using namespace fcmer;
using namespace fcmer::test;

namespace {

// Ten copies each of -a and +a on a line. For FCM-ER-L2 with two clusters the
// split fixed point s = a tanh(2 a s / T_u) exists only while T_u < 2 a^2.
Dataset two_masses(double a) {
  Matrix x(20, 1);
  for (Index i = 0; i < 20; ++i) x(i, 0) = i < 10 ? -a : a;
  return Dataset(x);
}

SweepConfig coarse_sweep(double lo, double hi, double step) {
  SweepConfig cfg;
  cfg.tu_min = lo;
  cfg.tu_max = hi;
  cfg.tu_step = step;
  return cfg;
}

}  // namespace

TEST_SUITE("tuning") {
  TEST_CASE("minimum centroid distance") {
    Matrix g(3, 2);
    g << 0, 0, 3, 4, 0, 1;
    CHECK(min_centroid_distance(PrototypeSet(g)) == 1.0);

    Gen gen(12);
    for (int t = 0; t < 100; ++t) {
      const Matrix m = random_matrix(gen, uniform_int(gen, 2, 6), uniform_int(gen, 1, 4));
      double best = 1e300;
      for (Index a = 0; a < m.rows(); ++a)
        for (Index b = 0; b < m.rows(); ++b)
          if (a != b) best = std::min(best, std::sqrt((m.row(a) - m.row(b)).squaredNorm()));
      CHECK(min_centroid_distance(PrototypeSet(m)) == doctest::Approx(best).epsilon(1e-14));
    }
  }

  TEST_CASE("sweep config validation") {
    SweepConfig ok;
    CHECK_NOTHROW(ok.validate());
    auto bad = ok;
    bad.tu_min = 0.0;
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = ok;
    bad.tu_max = ok.tu_min;
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = ok;
    bad.tu_step = -1.0;
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = ok;
    bad.restarts_per_candidate = 0;
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = ok;
    bad.tv_grid = {1.0, 0.0};
    CHECK_THROWS_AS(bad.validate(), Error);
  }

  TEST_CASE("two point masses merge just above the critical temperature") {
    const double a = 5.0;
    const Dataset data = two_masses(a);
    const AlgorithmSpec tmpl = make_spec(Variant::FcmErL2, 2, 1.0, 1.0, 3);
    const TuSelection s = select_tu(tmpl, data, coarse_sweep(40.0, 100.0, 0.5));
    REQUIRE(s.crossed);
    CHECK(s.t_u > 2 * a * a);
    // within 100 iterations the split contracts by (2a^2/T_u) per step
    CHECK(s.t_u <= 55.0);

    // first crossing: everything before it stays apart
    REQUIRE(!s.curve.empty());
    CHECK(s.curve.back().t_u == s.t_u);
    CHECK(s.curve.back().min_distance < 0.1);
    for (std::size_t i = 0; i + 1 < s.curve.size(); ++i) {
      CHECK(s.curve[i].t_u < s.curve[i + 1].t_u);
      CHECK(s.curve[i].min_distance >= 0.1);
    }
    CHECK(s.curve.size() == static_cast<std::size_t>(std::lround((s.t_u - 40.0) / 0.5)) + 1);

    // below the critical temperature the split solves s = a tanh(2 a s / T_u)
    double split = a;
    for (int it = 0; it < 10000; ++it) split = a * std::tanh(2 * a * split / 40.0);
    CHECK(s.curve.front().min_distance == doctest::Approx(2 * split).epsilon(1e-4));
  }

  TEST_CASE("bisection returns a first crossing of its bracket") {
    const Dataset data = two_masses(5.0);
    auto cfg = coarse_sweep(1.0, 100.0, 0.5);
    const AlgorithmSpec tmpl = make_spec(Variant::FcmErL2, 2, 1.0, 1.0, 3);
    const TuSelection exact = select_tu(tmpl, data, cfg);
    cfg.search = SweepSearch::Bisect;
    const TuSelection bisect = select_tu(tmpl, data, cfg);
    REQUIRE(bisect.crossed);
    CHECK(bisect.curve.size() < exact.curve.size());
    bool found = false;
    for (std::size_t i = 0; i < bisect.curve.size(); ++i) {
      if (bisect.curve[i].t_u != bisect.t_u) continue;
      found = true;
      CHECK(bisect.curve[i].min_distance < 0.1);
      REQUIRE(i > 0);
      CHECK(bisect.curve[i - 1].t_u == doctest::Approx(bisect.t_u - 0.5));
      CHECK(bisect.curve[i - 1].min_distance >= 0.1);
    }
    CHECK(found);
    // the curve here is monotone, so both searches agree
    CHECK(bisect.t_u == exact.t_u);
  }

  TEST_CASE("sweep edge cases") {
    const Dataset data = two_masses(5.0);
    const AlgorithmSpec tmpl = make_spec(Variant::FcmErL2, 2, 1.0, 1.0, 1);

    auto huge = coarse_sweep(0.25, 10.0, 0.25);
    huge.min_centroid_threshold = 1e6;
    const TuSelection first = select_tu(tmpl, data, huge);
    CHECK(first.crossed);
    CHECK(first.t_u == 0.25);
    CHECK(first.curve.size() == 1);

    const TuSelection none = select_tu(tmpl, data, coarse_sweep(1.0, 5.0, 1.0));
    CHECK_FALSE(none.crossed);
    CHECK(none.t_u == 5.0);
    CHECK(none.curve.size() == 5);

    // lattice values are exact decimals
    const TuSelection fine = select_tu(tmpl, data, coarse_sweep(0.1, 0.7, 0.1));
    REQUIRE(fine.curve.size() == 7);
    CHECK(fine.curve[2].t_u == 0.3);
    CHECK(fine.curve[6].t_u == 0.7);
  }

  TEST_CASE("the T_v grid picks the widest separation, smaller values on ties") {
    // with a single feature the sum-constrained weight is 1 whatever T_v is,
    // so every grid entry yields the same fit
    const Dataset data = two_masses(5.0);
    const AlgorithmSpec tmpl = make_spec(Variant::AfcmErGsL2, 2, 1.0, 1.0, 3);
    auto cfg = coarse_sweep(45.0, 60.0, 0.5);
    cfg.tv_grid = {10.0, 0.1, 1.0, 0.1};
    const TuTvSelection sel = select_tu_tv(tmpl, data, cfg);
    REQUIRE(sel.candidates.size() == 4);
    CHECK(sel.candidates[0].t_v == 10.0);
    CHECK(sel.candidates[1].t_v == 0.1);
    for (const auto& c : sel.candidates) {
      CHECK(c.t_u == sel.candidates[0].t_u);
      CHECK(c.min_distance == sel.candidates[0].min_distance);
    }
    CHECK(sel.t_v == 0.1);

    const TuSelection plain = select_tu(make_spec(Variant::AfcmErGsL2, 2, 1.0, 1.0, 3), data, cfg);
    CHECK(sel.t_u == plain.t_u);

    cfg.tv_grid = {7.0};
    const TuTvSelection single = select_tu_tv(tmpl, data, cfg);
    CHECK(single.t_v == 7.0);
    CHECK(single.candidates.size() == 1);

    cfg.tv_grid.clear();
    try {
      select_tu_tv(tmpl, data, cfg);
      FAIL("expected MissingTvGrid");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::MissingTvGrid);
    }
    cfg.tv_grid = {1.0};
    CHECK_THROWS_AS(select_tu_tv(make_spec(Variant::FcmErL2, 2), data, cfg), Error);
  }

  TEST_CASE("best of restarts keeps the lowest objective") {
    Gen gen(31);
    for (int t = 0; t < 20; ++t) {
      const Dataset data = random_dataset(gen, uniform_int(gen, 6, 30), uniform_int(gen, 1, 3));
      const Variant v = kAllVariants[static_cast<std::size_t>(uniform_int(gen, 0, 11))];
      const AlgorithmSpec spec = make_spec(v, uniform_int(gen, 2, 3), uniform(gen, 0.2, 3.0), uniform(gen, 0.5, 5.0));
      const int n = uniform_int(gen, 1, 6);
      const std::uint64_t seed = static_cast<std::uint64_t>(uniform_int(gen, 0, 1000));
      const FitResult best = best_of_restarts(spec, data, n, seed);

      int argmin = -1;
      double lowest = 0.0;
      std::optional<FitResult> expected;
      for (int r = 0; r < n; ++r) {
        AlgorithmSpec s = spec;
        s.seed = seed + static_cast<std::uint64_t>(r);
        FitResult one = fit(s, data);
        CHECK(best.objective() <= one.objective());
        if (argmin < 0 || one.objective() < lowest) {
          argmin = r;
          lowest = one.objective();
          expected = std::move(one);
        }
      }
      CHECK(best.objective() == lowest);
      CHECK(best.partition.matrix() == expected->partition.matrix());
    }
    CHECK_THROWS_AS(best_of_restarts(make_spec(Variant::FcmErL2, 2), two_masses(1.0), 0, 1), Error);
  }

  TEST_CASE("derived seeds are deterministic and spread out") {
    CHECK(derive_seed(1, 2, 3) == derive_seed(1, 2, 3));
    std::set<std::uint64_t> seen;
    for (std::uint64_t base = 0; base < 5; ++base)
      for (std::uint64_t a = 0; a < 20; ++a)
        for (std::uint64_t b = 0; b < 10; ++b) seen.insert(derive_seed(base, a, b));
    CHECK(seen.size() == 1000);
  }

  TEST_CASE("experiment names") {
    CHECK(Experiment::parse("config3")->value == 3);
    CHECK(Experiment::parse("config3")->clusters() == 4);
    CHECK(Experiment::parse("outliers", 20)->name() == "outliers20");
    CHECK(Experiment::parse("outliers", 20)->clusters() == 2);
    CHECK_FALSE(Experiment::parse("config5").has_value());
    CHECK_FALSE(Experiment::parse("outliers", 15).has_value());
  }

  TEST_CASE("monte carlo summaries") {
    MonteCarloConfig cfg;
    cfg.experiment = *Experiment::parse("outliers", 10);
    cfg.variants = {Variant::FcmErL2, Variant::AfcmErGpL1};
    cfg.replications = 1;
    cfg.restarts = 2;
    cfg.fixed_tu = 0.5;
    const Report one = monte_carlo(cfg);
    REQUIRE(one.rows.size() == 6);
    for (const auto& row : one.rows) {
      CHECK(row.std == 0.0);
      CHECK(row.count == 1);
    }
    CHECK(one.records.size() == 2);
    CHECK(one.records[0].rd.has_value());
    CHECK(report_csv(one).rfind("variant,index,mean,std\nFCM-ER-L2,HUL,", 0) == 0);

    // means and sample deviations recomputed from the records
    cfg.replications = 4;
    cfg.threads = 1;
    const Report serial = monte_carlo(cfg);
    for (const auto& row : serial.rows) {
      if (row.index != "ARI") continue;
      std::vector<double> xs;
      for (const auto& r : serial.records)
        if (r.variant == row.variant) xs.push_back(r.ari);
      REQUIRE(xs.size() == 4);
      double mean = 0.0;
      for (double x : xs) mean += x / 4.0;
      double ss = 0.0;
      for (double x : xs) ss += (x - mean) * (x - mean);
      CHECK(row.mean == doctest::Approx(mean).epsilon(1e-14));
      CHECK(row.std == doctest::Approx(std::sqrt(ss / 3.0)).epsilon(1e-12));
    }

    cfg.threads = 3;
    const Report parallel = monte_carlo(cfg);
    CHECK(report_csv(parallel) == report_csv(serial));
    CHECK(records_csv(parallel) == records_csv(serial));
  }

  TEST_CASE("replication failures") {
    MonteCarloConfig cfg;
    cfg.experiment = *Experiment::parse("outliers", 0);
    cfg.variants = {Variant::AfcmErGsL2, Variant::FcmErL2};
    cfg.replications = 2;
    cfg.restarts = 1;
    cfg.fixed_tu = 0.5;  // no T_v for the GS variant
    CHECK_THROWS_AS(monte_carlo(cfg), Error);

    cfg.keep_going = true;
    const Report r = monte_carlo(cfg);
    CHECK(r.records.size() == 4);
    CHECK(r.records[0].error.has_value());
    CHECK_FALSE(r.records[1].error.has_value());
    for (const auto& row : r.rows)
      if (row.variant == Variant::AfcmErGsL2) CHECK(row.count == 0);

    cfg.replications = 0;
    CHECK_THROWS_AS(monte_carlo(cfg), Error);
  }
}
