#include <doctest.h>

#include <cmath>

#include "qpl/errors.hpp"
#include "qpl/log_scale.hpp"
#include "qpl/multiscale.hpp"
#include "qpl/toy_msa.hpp"
#include "support.hpp"

using namespace qpl;
using qpl::test::vec;

TEST_SUITE("multiscale") {
  TEST_CASE("log scale towers") {
    const LogScale a(100.0);
    CHECK(a.level() == 0);
    CHECK(a.log().to_double() == doctest::Approx(std::log(100.0)));
    const LogScale big = LogScale::from_log(1000.0);
    CHECK(big.level() == 1);
    CHECK(std::isinf(big.to_double()));
    CHECK(big.log_double() == 1000.0);
    CHECK(big > LogScale(1e300));
    CHECK(LogScale::from_log(5.0) == LogScale(std::exp(5.0)));
    CHECK(big.exp().level() == 2);
    CHECK(big.exp().log() == big);
    CHECK(big.pow(2.0).log_double() == doctest::Approx(2000.0));
    CHECK(big.scale(std::exp(1.0)).log_double() == doctest::Approx(1001.0));
    CHECK(LogScale(3.0).add(2.0) == LogScale(5.0));
    CHECK_THROWS_AS(LogScale(-1.0).log(), InputError);
  }

  TEST_CASE("scale constants") {
    const ScaleConstants k(0.04, 0.2, 1);
    CHECK(k.c1() == 0.01);
    CHECK(k.c2() == doctest::Approx(5e-5).epsilon(1e-15));
    for (double c3 : {0.01, 0.1, 0.5})
      for (int b : {1, 2, 5}) {
        const ScaleConstants q(c3, 0.9, b);
        CHECK(q.c2() < q.c1());
        CHECK(q.c1() < q.c3());
      }
    CHECK_THROWS_AS(ScaleConstants(0.3, 0.2, 1), InputError);
    CHECK_THROWS_AS(ScaleConstants(0.1, 0.2, 0), InputError);
  }

  TEST_CASE("scale step") {
    const auto k = ScaleConstants::toy(0.5, 0.125);
    const ScaleStep s = scale_step(LogScale(100.0), k);
    CHECK(s.N2.to_double() == doctest::Approx(1e8));
    CHECK(s.N3.log_double() == doctest::Approx(10.0));
    const ScaleStep t = scale_step(LogScale(101.0), k);
    CHECK(s.N3 < t.N3);
  }

  TEST_CASE("schedule maps") {
    const auto k = ScaleConstants::toy(0.5, 0.125);
    const ScheduleMaps m = schedule_maps(LogScale(100.0), k);
    CHECK(m.f.to_double() == doctest::Approx(22026.465794806718));
    CHECK(m.g.log_double() == doctest::Approx(20.0));
    CHECK(schedule_f(LogScale(50.0), k) < schedule_f(LogScale(51.0), k));
    const double x0 = g_dominates_threshold(0.5);
    CHECK(x0 == doctest::Approx(1.0 / 3.0));
    for (double x = x0; x < 1e6; x = x * 1.3 + 0.01) {
      const double lf = std::sqrt(x + 1.0), lg = 2.0 * std::sqrt(x);
      CHECK(lg >= lf - 1e-12);
      CHECK(schedule_g(LogScale(x), k) >= schedule_f(LogScale(x + 1.0), k));
    }
    CHECK(schedule_maps(LogScale(0.1), k).below_threshold);
    CHECK(schedule_f_iterate(LogScale(100.0), k, 2).log_double() == doctest::Approx(std::sqrt(std::exp(10.0))));
  }

  TEST_CASE("schedule maps match extended precision") {
    const ScaleConstants k(0.04, 0.2, 1);
    for (long double x : {10.0L, 1e3L, 1e8L, 1e250L}) {
      const long double lf = std::pow(x, 0.01L);
      const double got = schedule_f(LogScale(static_cast<double>(x)), k).log_double();
      CHECK(std::abs(got - static_cast<double>(lf)) <= 1e-12 * static_cast<double>(lf));
    }
  }

  TEST_CASE("rate sequence") {
    const auto k = ScaleConstants::toy(0.5, 0.125);
    const RhoSequence zero = rho_sequence(1.0, LogScale(25.0), 0.0, k, 5);
    for (double r : zero.rho) CHECK(r == doctest::Approx(0.8));

    const RhoSequence s = rho_sequence(1.0, LogScale(25.0), 1.0, k, 5);
    CHECK(schedule_f(LogScale(25.0), k).to_double() >= 100.0);
    double sum = 0.0;
    for (double t : s.terms) sum += t;
    CHECK(sum <= 0.1 + 1e-12);
    CHECK(sum + s.tail_bound < 0.3);
    CHECK(s.above_half);
    for (std::size_t i = 1; i + 1 < s.terms.size() && s.terms[i] > 0; ++i)
      CHECK(s.terms[i + 1] / s.terms[i] <= s.terms[i] / s.terms[i - 1]);
  }

  TEST_CASE("power sums") {
    long double direct = 0.0L;
    for (long n = 3000000; n >= 10; --n) direct += 1.0L / std::pow(static_cast<long double>(n), 5.0L);
    CHECK(power_sum(10.0, INFINITY) == doctest::Approx(static_cast<double>(direct)).epsilon(1e-10));
    CHECK(power_sum(10.0, INFINITY) == doctest::Approx(3.0413798676e-05).epsilon(1e-9));
    double finite = 0.0;
    for (int n = 7; n <= 40; ++n) finite += std::pow(n, -5.0);
    CHECK(power_sum(7.0, 40.0) == doctest::Approx(finite).epsilon(1e-13));
    CHECK(power_sum(1.0, 1.0) == 1.0);
    CHECK(power_sum(1e20, INFINITY) == doctest::Approx(0.25e-76));
    CHECK(power_sum(INFINITY, INFINITY) == 0.0);
  }

  TEST_CASE("omega budget") {
    const ScaleConstants k(0.04, 0.2, 1);
    const OmegaBudget empty = omega_budget({}, k);
    CHECK(empty.excluded == 0.0);

    const auto toy = ScaleConstants::toy(0.5, 0.125, 1.0);
    const LogScale th = omega_threshold(toy);
    const double N = th.to_double();
    auto ok = [](double n) { return std::sqrt(n) >= 5.0 * std::log(n); };
    CHECK(ok(N));
    CHECK_FALSE(ok(N - 1.0));
    for (double n = N; n < N + 5000; n += 7) CHECK(ok(n));

    const OmegaBudget b = omega_budget({{LogScale(N), LogScale(N + 100)}}, toy);
    CHECK(b.comparison_ok);
    CHECK(b.excluded == doctest::Approx(power_sum(N, N + 100)));
    CHECK(b.tail_bound == doctest::Approx(power_sum(N, INFINITY)));
    const OmegaBudget low = omega_budget({{LogScale(10.0), LogScale(20.0)}}, toy);
    CHECK_FALSE(low.comparison_ok);
    CHECK_FALSE(low.flagged.empty());
  }

  TEST_CASE("initial coupling") {
    const InitialLambda il = initial_lambda(LogScale(100.0), 1);
    CHECK(il.lambda_min.to_double() == doctest::Approx(4.0 * std::exp(10.0) * 201.0));
    CHECK(il.lambda_min.to_double() == doctest::Approx(1.771e7).epsilon(1e-3));
    CHECK(il.delta == doctest::Approx(0.5 * std::exp(-10.0)));
    CHECK(initial_lambda(LogScale(200.0), 1).lambda_min > il.lambda_min);
    CHECK(initial_lambda(LogScale(100.0), 2).lambda_min > il.lambda_min);
    for (int N = 1; N <= 100; ++N)
      CHECK(il.log_lambda_min >= std::log(2.0 / il.delta) + std::log(2.0 * N + 1.0) - 1e-12);
  }

  TEST_CASE("property ledger") {
    const auto rows = property_ledger(1.0, LogScale(25.0), 1.0, ScaleConstants::toy(0.5, 0.125), 3);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].step == 0);
    CHECK(rows[0].rho == doctest::Approx(0.8));
    CHECK(rows[1].N > rows[0].N);
    CHECK(rows[3].rho <= rows[1].rho);
    CHECK(rows[3].omega_excluded < rows[0].omega_excluded);
  }

  TEST_CASE("hit counts") {
    const ModelConfig cfg = qpl::test::cosine_model(1, ToeplitzKernel::exp_decay(1, 1.0), 10.0);
    const HitCount none = hit_count(cfg, {cfg.potential, 3.0, 0.5}, vec({0.1}), 30, 2);
    CHECK(none.count == 0);
    CHECK(none.cap > 0);

    ModelConfig frozen = cfg;
    frozen.omega = vec({0.0});
    const HitCount all = hit_count(frozen, {cfg.potential, 0.0, 0.1}, vec({0.25}), 30, 2);
    CHECK(all.count == all.cap);

    const HitScan scan = hit_count_scan(cfg, {cfg.potential, 0.0, 1e-3}, vec({0.1}), 10, 40, 1);
    CHECK(scan.counts.size() == 31);
    CHECK(scan.zero_fraction > 0.0);
    CHECK(scan.zero_fraction <= 1.0);
  }

  TEST_CASE("toy pipeline on a decoupled system") {
    const ModelConfig cfg = qpl::test::cosine_model(1, ToeplitzKernel::zero(1, 10.0), 220.0);
    ToyOptions opt;
    opt.scales.N1 = 1;
    opt.scales.N = 16;
    opt.cartan_samples = 32;
    const ToyTrace t = toy_msa_run(cfg, opt, {vec({0.1}), vec({0.6})}, {1.4});
    CHECK(t.geometry_ok);
    CHECK_FALSE(t.invariant_violated);
    CHECK(t.bad_fraction == 0.0);
    REQUIRE(t.cells.size() == 2);
    for (const auto& c : t.cells) {
      CHECK(c.good);
      CHECK(std::log(c.glued_norm) <= c.paste_bound_log);
    }
    for (const auto& r : t.records)
      if (r.status != StageStatus::Pass) {
        CHECK(r.stage == "propagate");
        CHECK(r.condition == "diam_excluded");
      }
  }

  TEST_CASE("toy pipeline stage names") {
    const auto& names = toy_stage_names();
    CHECK(names == std::vector<std::string>{"geometry", "windows", "cartan", "propagate", "paste", "final", "goodness"});
    CHECK(default_outer_size(24, 4) == 32);
    CHECK(default_outer_size(64, 2) == 64);
  }
}
