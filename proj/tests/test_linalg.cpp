#include <doctest.h>

#include <cmath>
#include <numeric>

#include "fcmer/linalg.hpp"
#include "support.hpp"

using namespace fcmer;
using namespace fcmer::test;

namespace {

double l1_cost(const std::vector<double>& v, const std::vector<double>& w, double a) {
  double f = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) f += w[i] * std::abs(v[i] - a);
  return f;
}

}  // namespace

TEST_SUITE("linalg") {
  TEST_CASE("spd inverse of identity and diagonal matrices") {
    auto r = spd_invert_det(Matrix::Identity(2, 2));
    CHECK(r.inverse.isApprox(Matrix::Identity(2, 2)));
    CHECK(r.determinant == doctest::Approx(1.0));
    CHECK(r.ridge == 0.0);

    Matrix d(2, 2);
    d << 4, 0, 0, 1;
    r = spd_invert_det(d);
    CHECK(r.inverse(0, 0) == doctest::Approx(0.25));
    CHECK(r.inverse(1, 1) == doctest::Approx(1.0));
    CHECK(r.inverse(0, 1) == 0.0);
    CHECK(r.determinant == doctest::Approx(4.0));
  }

  TEST_CASE("spd inverse multiplies back to the identity") {
    Gen gen(11);
    for (int t = 0; t < 50; ++t) {
      const Matrix a = random_spd(gen, 5);
      const auto r = spd_invert_det(a);
      CHECK((a * r.inverse - Matrix::Identity(5, 5)).cwiseAbs().maxCoeff() < 1e-8);
      // determinant from an independent LU factorization
      CHECK(r.determinant == doctest::Approx(a.fullPivLu().determinant()).epsilon(1e-10));
    }
  }

  TEST_CASE("spd inverse rejects bad input") {
    Matrix ns(2, 2);
    ns << 1, 0.5, 0, 1;
    CHECK_THROWS_AS(spd_invert_det(ns), Error);
    try {
      spd_invert_det(ns);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::NonSymmetric);
    }

    Matrix neg(2, 2);
    neg << -1, 0, 0, -2;
    try {
      spd_invert_det(neg);
      FAIL("expected NotPositiveDefinite");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::NotPositiveDefinite);
    }

    Matrix indefinite(2, 2);
    indefinite << 1, 0, 0, -1;
    CHECK_THROWS_AS(spd_invert_det(indefinite), Error);
    CHECK_THROWS_AS(spd_invert_det(Matrix(2, 3)), Error);
  }

  TEST_CASE("rank-deficient scatter gets a small ridge") {
    Matrix a(2, 2);
    a << 1, 1, 1, 1;
    const auto r = spd_invert_det(a);
    CHECK(r.ridge > 0.0);
    CHECK(r.ridge <= 1e-2 * a.trace() / 2.0);
    CHECK(std::isfinite(r.determinant));
  }

  TEST_CASE("det-normalized inverse") {
    Matrix d(2, 2);
    d << 4, 0, 0, 1;
    const Matrix m = det_normalized_inverse(d);
    CHECK(m(0, 0) == doctest::Approx(0.5));
    CHECK(m(1, 1) == doctest::Approx(2.0));
    CHECK(m.determinant() == doctest::Approx(1.0));
    CHECK(det_normalized_inverse(Matrix::Identity(3, 3)).isApprox(Matrix::Identity(3, 3)));

    Gen gen(5);
    for (int t = 0; t < 200; ++t) {
      const Index p = uniform_int(gen, 1, 6);
      const Matrix out = det_normalized_inverse(random_spd(gen, p));
      CHECK(std::abs(out.determinant() - 1.0) < 1e-6);
      CHECK(Eigen::LLT<Matrix>(out).info() == Eigen::Success);
    }
  }

  TEST_CASE("weighted median examples") {
    CHECK(weighted_median<double>({1, 2, 3}, {1, 1, 1}) == 2.0);
    CHECK(weighted_median<double>({0, 10}, {1, 1}) == 5.0);
    CHECK(weighted_median<double>({3, 1, 2}, {0, 1, 0}) == 1.0);
    CHECK(weighted_median<double>({5}, {2}) == 5.0);
    CHECK(weighted_median<double>({1, 2, 100}, {1, 1, 5}) == 100.0);
  }

  TEST_CASE("weighted median errors") {
    auto code = [](auto&& fn) {
      try {
        fn();
      } catch (const Error& e) {
        return e.code();
      }
      return ErrorCode::Undefined;
    };
    CHECK(code([] { weighted_median<double>(std::vector<double>{}, std::vector<double>{}); }) == ErrorCode::EmptyInput);
    CHECK(code([] { weighted_median<double>({1, 2}, {1}); }) == ErrorCode::LengthMismatch);
    CHECK(code([] { weighted_median<double>({1, 2}, {0, 0}); }) == ErrorCode::AllZeroWeights);
    CHECK(code([] { weighted_median<double>({1, 2}, {1, -1}); }) == ErrorCode::InvalidArgument);
  }

  TEST_CASE("weighted median minimizes the weighted absolute deviation") {
    Gen gen(2024);
    for (int t = 0; t < 1000; ++t) {
      const int n = uniform_int(gen, 1, 9);
      std::vector<double> v(n), w(n);
      for (int i = 0; i < n; ++i) {
        // a coarse lattice produces ties and exact half-mass splits
        v[i] = uniform_int(gen, -5, 5) * 0.5;
        w[i] = uniform_int(gen, 0, 4);
      }
      if (std::accumulate(w.begin(), w.end(), 0.0) == 0.0) w[0] = 1.0;
      const double a = weighted_median(v, w);
      const double fa = l1_cost(v, w, a);
      for (int i = 0; i < n; ++i) {
        CHECK(fa <= l1_cost(v, w, v[i]) + 1e-12);
        for (int k = 0; k < n; ++k) CHECK(fa <= l1_cost(v, w, 0.5 * (v[i] + v[k])) + 1e-12);
      }
    }
  }

  TEST_CASE("irls step examples") {
    const std::vector<double> ones{1, 1, 1};
    const std::vector<double> m{0.2, 0.5, 0.3};
    CHECK(irls_prototype<double>(ones, m, 0.0) == doctest::Approx(1.0));

    const std::vector<double> v{0, 10};
    const std::vector<double> u{1, 1};
    CHECK(irls_prototype<double>(v, u, 5.0) == doctest::Approx(5.0));
  }

  TEST_CASE("irls fixed point approaches the weighted median") {
    Gen gen(77);
    int checked = 0;
    for (int t = 0; t < 200; ++t) {
      const int n = 2 * uniform_int(gen, 1, 4) + 1;
      std::vector<double> v(n), w(n);
      for (int i = 0; i < n; ++i) {
        v[i] = uniform(gen, -5, 5);
        w[i] = uniform(gen, 0.1, 1.0);
      }
      const double target = weighted_median(v, w);
      double g = std::accumulate(v.begin(), v.end(), 0.0) / n;
      for (int it = 0; it < 5000; ++it) g = irls_prototype<double>(v, w, g);
      // IRLS converges to a minimizer of the weighted L1 cost; compare cost values
      // and, when the minimizer is unique, the point itself
      CHECK(l1_cost(v, w, g) <= l1_cost(v, w, target) + 1e-3);
      if (std::abs(g - target) < 1e-3) ++checked;
    }
    CHECK(checked > 150);
  }

  TEST_CASE("normalized exponentials") {
    Vector s(3);
    s << 2, 2, 2;
    const Vector u = stable_normalized_exponentials(s, 0.7);
    for (Index i = 0; i < 3; ++i) CHECK(u(i) == doctest::Approx(1.0 / 3.0));

    Vector s2(2);
    s2 << 1, 2;
    const Vector u2 = stable_normalized_exponentials(s2, 1.0);
    CHECK(u2(0) == doctest::Approx(1.0 / (1.0 + std::exp(-1.0))));
    CHECK(u2(1) == doctest::Approx(std::exp(-1.0) / (1.0 + std::exp(-1.0))));

    Vector s3(2);
    s3 << 0, 1e6;
    const Vector u3 = stable_normalized_exponentials(s3, 1.0);
    CHECK(std::isfinite(u3(0)));
    CHECK(std::isfinite(u3(1)));
    CHECK(u3(0) == 1.0);
    CHECK(u3.sum() == doctest::Approx(1.0));

    Vector bad(2);
    bad << 0, std::nan("");
    CHECK_THROWS_AS(stable_normalized_exponentials(bad, 1.0), Error);
    CHECK_THROWS_AS(stable_normalized_exponentials(s, 0.0), Error);
  }

  TEST_CASE("normalized exponentials are shift invariant and permutation equivariant") {
    Gen gen(9);
    for (int t = 0; t < 200; ++t) {
      const Index m = uniform_int(gen, 1, 7);
      Vector s(m);
      for (Index i = 0; i < m; ++i) s(i) = uniform(gen, -20, 20);
      const double temp = uniform(gen, 0.05, 5.0);
      const Vector u = stable_normalized_exponentials(s, temp);
      const double shift = uniform(gen, -100, 100);
      const Vector shifted = stable_normalized_exponentials((s.array() + shift).matrix(), temp);
      CHECK((u - shifted).cwiseAbs().maxCoeff() < 1e-12);

      std::vector<Index> perm(static_cast<std::size_t>(m));
      std::iota(perm.begin(), perm.end(), Index(0));
      std::shuffle(perm.begin(), perm.end(), gen);
      Vector ps(m);
      for (Index i = 0; i < m; ++i) ps(i) = s(perm[static_cast<std::size_t>(i)]);
      const Vector pu = stable_normalized_exponentials(ps, temp);
      for (Index i = 0; i < m; ++i) CHECK(std::abs(pu(i) - u(perm[static_cast<std::size_t>(i)])) < 1e-14);
    }
  }
}
