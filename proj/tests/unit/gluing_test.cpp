#include <doctest.h>

#include <cmath>
#include <random>

#include "qpl/errors.hpp"
#include "qpl/gluing.hpp"
#include "support.hpp"

using namespace qpl;
using qpl::test::cube;
using qpl::test::vec;

namespace {

PointSet interval(int a, int b) { return PointSet::from_box({LatticePoint{a}, LatticePoint{b}}); }

double direct_tail(double rho, int d) {
  double s = 0.0;
  for (int j = 0; j < 100000; ++j) s += std::pow(2.0 * j + 1.0, d) * std::exp(-rho * j / 2.0);
  return s;
}

}  // namespace

TEST_SUITE("gluing") {
  TEST_CASE("resolvent identity without coupling is exact") {
    const ModelConfig cfg = qpl::test::cosine_model(1, ToeplitzKernel::zero(1), 3.0);
    CHECK(resolvent_residual(cfg, interval(-5, 0), interval(1, 5), 0.05, vec({0.2})) == 0.0);
  }

  TEST_CASE("resolvent identity on a split interval") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (double lambda : {2.0, 30.0, 1e8}) {
      const ModelConfig cfg = qpl::test::cosine_model(1, ToeplitzKernel::exp_decay(1, 1.0), lambda);
      CHECK(resolvent_residual(cfg, interval(-5, 0), interval(1, 5), -0.9 + 1.8 * u(rng), vec({u(rng)})) <= 1e-8);
    }
  }

  TEST_CASE("window tail sum") {
    for (double rho : {0.5, 1.0, 3.0})
      for (int d = 1; d <= 3; ++d) CHECK(window_tail_sum(rho, d) == doctest::Approx(direct_tail(rho, d)).epsilon(1e-12));
  }

  TEST_CASE("pasting condition") {
    const PasteBound big = ml_condition(400, 400, 10.0, 1.0, 1);
    CHECK(big.feasible);
    const double expect = 2.0 / 10.0 * std::exp(20.0) * 801.0 * std::exp(-60.0) * direct_tail(1.0, 1);
    CHECK(big.ml_margin == doctest::Approx(expect).epsilon(1e-10));
    CHECK(big.bound_log == doctest::Approx(std::log(4.0 * 801.0) + 20.0));

    const PasteBound small = ml_condition(4, 4, 10.0, 1.0, 1);
    CHECK_FALSE(small.feasible);
    CHECK(small.ml_margin > 0.5);
    CHECK(ml_condition(4, 4, 1e9, 1.0, 1).feasible);

    const PasteBound range = ml_condition(3, 8, 50.0, 2.0, 1);
    double worst = 0.0;
    for (int M = 3; M <= 8; ++M)
      worst = std::max(worst, 2.0 / 50.0 * std::exp(std::sqrt(M)) * (2 * M + 1) * std::exp(-0.3 * M) * direct_tail(2.0, 1));
    CHECK(range.ml_margin == doctest::Approx(worst).epsilon(1e-10));
  }

  TEST_CASE("cover construction") {
    const WindowCover c = build_cover(cube(1, 24), 5);
    CHECK(c.windows.size() == 49);
    CHECK(c.min_size() == 5);
    CHECK(c.max_size() == 5);
    CHECK_FALSE(c.first_violation().has_value());
    CHECK_THROWS_AS(build_cover(PointSet({LatticePoint{0}}), 2), PreconditionFailure);
  }

  TEST_CASE("pasting in the Neumann regime") {
    const ModelConfig cfg = qpl::test::cosine_model(1, ToeplitzKernel::exp_decay(1, 3.0), 220.0);
    const PointSet Q = cube(1, 24);
    const WindowCover cover = build_cover(Q, 5);
    for (double E : {1.2, -1.3, 1.45}) {
      const PasteResult r = paste_norm(cfg, Q, E, vec({0.37}), cover, 1.5);
      CHECK(r.certified);
      CHECK(r.empirical_norm <= 2.0 / 0.1);
      CHECK(std::log(r.empirical_norm) <= r.bound_log);
      CHECK(r.windows_checked == 49);
    }
  }

  TEST_CASE("pasting a decoupled system") {
    const ModelConfig cfg = qpl::test::cosine_model(1, ToeplitzKernel::zero(1), 1e6);
    const PointSet Q = cube(1, 24);
    const PasteResult r = paste_norm(cfg, Q, 1.3, vec({0.1}), build_cover(Q, 5), 1.0);
    CHECK(r.certified);
    CHECK(r.empirical_norm <= 1.0 / 0.3 + 1e-12);
  }

  TEST_CASE("a bad cover names the point") {
    const ModelConfig cfg = qpl::test::cosine_model(1, ToeplitzKernel::exp_decay(1, 3.0), 220.0);
    const PointSet Q = cube(1, 24);
    WindowCover cover = build_cover(Q, 5);
    cover.windows[24] = ElementaryRegion{LatticePoint{4}, 5, std::nullopt};
    try {
      paste_norm(cfg, Q, 1.3, vec({0.1}), cover, 1.5);
      FAIL("bad cover accepted");
    } catch (const PreconditionFailure& e) {
      CHECK(e.condition() == "cover");
      CHECK(std::string(e.what()).find(to_string(LatticePoint{0})) != std::string::npos);
    }
  }

  TEST_CASE("decay propagation without coupling") {
    const ModelConfig cfg = qpl::test::cosine_model(1, ToeplitzKernel::zero(1), 1e6);
    const PointSet Q = cube(1, 24);
    const DecayPropagation p = propagate_decay(cfg, Q, PointSet(), 1.3, vec({0.1}), build_cover(Q, 5), 5, 0.6, 0.0);
    CHECK(p.violation_count == 0);
    CHECK(p.pairs_checked > 0);
  }

  TEST_CASE("decay propagation in the Neumann regime") {
    const ModelConfig cfg = qpl::test::cosine_model(1, ToeplitzKernel::exp_decay(1, 3.0), 220.0);
    const PointSet Q = cube(1, 24);
    const WindowCover cover = build_cover(Q, 5);
    for (double E : {1.2, -1.4}) {
      const DecayPropagation p = propagate_decay(cfg, Q, PointSet(), E, vec({0.61}), cover, 5, 1.5, 0.0);
      CHECK(p.violation_count == 0);
      CHECK(p.effective_rate == doctest::Approx(1.5));
      CHECK(p.observed_rate >= 1.5);
    }
    const DecayPropagation d = propagate_decay(cfg, Q, PointSet(), 1.2, vec({0.61}), cover, 5, 1.5, 2.0);
    CHECK(d.effective_rate == doctest::Approx(1.5 - 2.0 / std::sqrt(5.0)));
  }

  TEST_CASE("decay propagation checks the excluded set") {
    const ModelConfig cfg = qpl::test::cosine_model(1, ToeplitzKernel::exp_decay(1, 3.0), 220.0);
    const PointSet Q = cube(1, 24);
    const PointSet big = interval(-12, 12);
    try {
      propagate_decay(cfg, Q, big, 1.3, vec({0.2}), build_cover(Q.minus(big), 5), 5, 1.5, 0.0);
      FAIL("large excluded set accepted");
    } catch (const PreconditionFailure& e) {
      CHECK(e.condition() == "diam_excluded");
    }
  }

  TEST_CASE("scale of a region") {
    CHECK(scale_of(cube(1, 24)) == 24);
    CHECK(scale_of(interval(0, 4)) == 2);
    CHECK(scale_of(interval(0, 5)) == 2);
  }
}
