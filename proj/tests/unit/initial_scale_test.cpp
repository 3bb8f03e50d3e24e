#include <doctest.h>

#include <cmath>
#include <numbers>

#include "qpl/errors.hpp"
#include "qpl/greens.hpp"
#include "qpl/initial_scale.hpp"
#include "qpl/io.hpp"
#include "support.hpp"

using namespace qpl;
using qpl::test::vec;

namespace {

double cos_sublevel_oracle(double E, double delta) {
  // |cos 2 pi t - E| < delta on [0,1): the arc where cos lies in (E - delta, E + delta).
  const double lo = std::max(-1.0, E - delta), hi = std::min(1.0, E + delta);
  if (lo >= hi) return 0.0;
  return (std::acos(lo) - std::acos(hi)) / std::numbers::pi;
}

Phase outside_bad_set(const ModelConfig& cfg, double E, int N, double delta) {
  for (int i = 0; i < 1000; ++i) {
    const Phase x = vec({std::fmod(0.01 + i * 0.0371, 1.0)});
    if (!in_bad_set({cfg.potential, E, delta}, cfg.blocks, x, N, cfg.omega)) return x;
  }
  throw std::runtime_error("no phase outside the bad set");
}

}  // namespace

TEST_SUITE("initial_scale") {
  TEST_CASE("bad set membership") {
    const auto v = TrigPotential::cosine_sum(1);
    const auto b = BlockStructure::ones(1);
    CHECK(in_bad_set({v, 0.0, 3.0}, b, vec({0.3}), 2, vec({kGoldenMean})));
    CHECK_FALSE(in_bad_set({v, 5.0, 0.1}, b, vec({0.3}), 50, vec({kGoldenMean})));
    CHECK(in_bad_set({v, 0.0, 0.1}, b, vec({0.25}), 7, vec({0.0})));
  }

  TEST_CASE("sublevel length in one variable") {
    auto g = [](double t) { return std::cos(2 * std::numbers::pi * t); };
    for (double E : {0.0, 0.5, 0.95, 1.0})
      for (double delta : {1e-3, 0.1})
        CHECK(sublevel_length_1d([&](double t) { return g(t) - E; }, delta) ==
              doctest::Approx(cos_sublevel_oracle(E, delta)).epsilon(1e-9));
  }

  TEST_CASE("section measure examples") {
    const auto v = TrigPotential::cosine_sum(1);
    const auto b = BlockStructure::ones(1);
    const Eigen::VectorXd none(0);
    const auto m0 = section_measure({v, 0.0, 0.1}, b, 0, none, SamplingMethod::Quadrature);
    CHECK(m0.value == doctest::Approx(2.0 * std::asin(0.1) / std::numbers::pi).epsilon(1e-6));
    CHECK(std::abs(m0.value - 0.06377) < 1e-4);
    const auto m1 = section_measure({v, 1.0, 0.1}, b, 0, none, SamplingMethod::Quadrature);
    CHECK(m1.value == doctest::Approx(std::acos(0.9) / std::numbers::pi).epsilon(1e-6));
    CHECK(section_measure({v, 0.0, 0.0}, b, 0, none, SamplingMethod::Quadrature).value == 0.0);

    const auto mc = section_measure({v, 0.0, 0.1}, b, 0, none, SamplingMethod::MonteCarlo, 200000, 4);
    CHECK(std::abs(mc.value - m0.value) <= mc.half_width);
    const auto sb = section_measure({v, 0.0, 0.1}, b, 0, none, SamplingMethod::Sobol, 1 << 16, 0);
    CHECK(std::abs(sb.value - m0.value) < 1e-3);
  }

  TEST_CASE("two variable sections") {
    const auto v = TrigPotential::cosine_sum(2);
    const auto b = BlockStructure::ones(2);
    // v(s, t) = cos 2 pi t + cos 2 pi s; the section at s = 1/4 is a plain cosine.
    const auto m = section_measure({v, 0.0, 0.1}, b, 1, vec({0.25}), SamplingMethod::Quadrature);
    CHECK(m.value == doctest::Approx(2.0 * std::asin(0.1) / std::numbers::pi).epsilon(1e-6));
  }

  TEST_CASE("Lojasiewicz exponents") {
    const auto deltas = log_grid(1e-4, 1e-1, 13);
    CHECK(deltas.size() == 13);
    CHECK(deltas.front() == doctest::Approx(1e-4));
    CHECK(deltas.back() == doctest::Approx(1e-1));
    const auto b = BlockStructure::ones(1);
    CHECK(lojasiewicz_fit(TrigPotential::cosine_sum(1), 0.0, b, 0, deltas).exponent_a == doctest::Approx(1.0).epsilon(0.05));
    CHECK(lojasiewicz_fit(TrigPotential::cosine_sum(1), 1.0, b, 0, deltas).exponent_a == doctest::Approx(0.5).epsilon(0.1));
    // Sections of cos + cos reach the band edge, so the sup over sections sits between the
    // interior exponent 1 and the edge exponent 1/2; a single interior section has exponent 1.
    const auto f2 = lojasiewicz_fit(TrigPotential::cosine_sum(2), 0.0, BlockStructure::ones(2), 0, deltas, 8);
    CHECK(f2.exponent_a >= 0.45);
    CHECK(f2.exponent_a <= 1.05);
    std::vector<double> ld, lm;
    for (double d : deltas) {
      ld.push_back(std::log(d));
      lm.push_back(std::log(section_measure({TrigPotential::cosine_sum(2), 0.0, d}, BlockStructure::ones(2), 0,
                                            vec({0.25}), SamplingMethod::Quadrature)
                                .value));
    }
    CHECK(least_squares_slope(ld, lm) == doctest::Approx(1.0).epsilon(0.05));
    CHECK(f2.section_ids.size() == deltas.size());
    CHECK(f2.half_widths.size() == deltas.size());
    CHECK_THROWS_AS(lojasiewicz_fit(TrigPotential::cosine_sum(1), 0.0, b, 0, log_grid(1e-2, 5e-2, 5)), InputError);
  }

  TEST_CASE("Lojasiewicz fit json") {
    const Json j = to_json(lojasiewicz_fit(TrigPotential::cosine_sum(1), 0.0, BlockStructure::ones(1), 0,
                                           log_grid(1e-4, 1e-1, 7)));
    for (const char* key : {"a", "C", "residual", "deltas", "measures", "half_widths", "section_ids"})
      CHECK_MESSAGE(j.contains(key), key);
    CHECK(j.at("deltas").size() == 7);
  }

  TEST_CASE("Neumann bound check") {
    const ModelConfig cfg = qpl::test::cosine_model(1, ToeplitzKernel::exp_decay(1, 3.0), 220.0);
    const ElementaryRegion Q{LatticePoint{0}, 5, std::nullopt};
    const Phase x = outside_bad_set(cfg, 0.02, 5, 0.1);
    const NeumannReport r = neumann_bound_check(cfg, Q, 0.02, x, 0.1);
    CHECK(r.norm <= 20.0);
    CHECK(r.bound == 20.0);
    CHECK(r.decay_ok);
    CHECK(r.lambda_ok);

    CHECK_THROWS_AS(neumann_bound_check(cfg, Q, 0.0, vec({0.25}), 0.1), PreconditionFailure);
    const ModelConfig weak = qpl::test::cosine_model(1, ToeplitzKernel::exp_decay(1, 3.0), 100.0);
    CHECK_THROWS_AS(neumann_bound_check(weak, Q, 0.02, x, 0.1), PreconditionFailure);
  }

  TEST_CASE("Neumann bound without coupling") {
    const ModelConfig cfg = qpl::test::cosine_model(1, ToeplitzKernel::zero(1), 1e4);
    const ElementaryRegion Q{LatticePoint{0}, 5, std::nullopt};
    const PointSet pts = Q.points();
    const double E = 0.02;
    const Phase x = outside_bad_set(cfg, E, 5, 0.1);
    const NeumannReport r = neumann_bound_check(cfg, Q, E, x, 0.1);
    CHECK(r.norm == doctest::Approx(1.0 / (potential_on(cfg, pts, x).array() - E).abs().minCoeff()));
    CHECK(r.norm <= 10.0);
  }

  TEST_CASE("Neumann series") {
    const ModelConfig cfg = qpl::test::cosine_model(1, ToeplitzKernel::exp_decay(1, 3.0), 220.0);
    const ElementaryRegion Q{LatticePoint{0}, 5, std::nullopt};
    const Phase x = outside_bad_set(cfg, 0.02, 5, 0.1);
    const NeumannSeries s = neumann_series_compare(cfg, Q, 0.02, x, 0.1, 40);
    REQUIRE(s.residuals.size() == 41);
    CHECK(s.residuals.back() <= 1e-9);
    CHECK(s.contraction <= 0.5);
    for (int k = 0; k <= 40; ++k) CHECK(s.residuals[k] <= s.tail_bound(k, 0.1));

    const ModelConfig free = qpl::test::cosine_model(1, ToeplitzKernel::zero(1), 220.0);
    CHECK(neumann_series_compare(free, Q, 0.02, x, 0.1, 0).residuals.at(0) == 0.0);
  }

  TEST_CASE("bad set measure grows at most linearly in the box") {
    const auto v = TrigPotential::cosine_sum(1);
    const auto b = BlockStructure::ones(1);
    const SublevelSpec spec{v, 0.3, 0.01};
    const double single = section_measure(spec, b, 0, Eigen::VectorXd(0), SamplingMethod::Quadrature).value;
    for (int N : {2, 5, 10}) {
      const auto est = estimate_fraction(1, 200000, 9, SamplingMethod::MonteCarlo, [&](const Eigen::VectorXd& x) {
        return in_bad_set(spec, b, x, N, vec({kGoldenMean}));
      });
      CHECK(est.value <= (2 * N + 1) * single + est.half_width);
    }
  }
}
