#include <doctest.h>

#include <cmath>
#include <numbers>

#include "qpl/errors.hpp"
#include "qpl/io.hpp"
#include "qpl/model.hpp"

using namespace qpl;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double a : v) x[i++] = a;
  return x;
}

}  // namespace

TEST_SUITE("operator_model") {
  TEST_CASE("shift phase") {
    const auto b11 = BlockStructure::ones(2);
    CHECK(shift_phase(vec({0, 0}), vec({0.3, 0.7}), b11, {0, 0}).norm() == 0.0);
    const Phase y = shift_phase(vec({0.1, 0.2}), vec({0.3, 0.4}), b11, {2, -1});
    CHECK(y[0] == doctest::Approx(0.7).epsilon(1e-14));
    CHECK(y[1] == doctest::Approx(0.8).epsilon(1e-14));

    const BlockStructure b21({2, 1});
    const Phase z = shift_phase(vec({0.0, 0.0, 0.0}), vec({0.1, 0.2, 0.3}), b21, {1, 2});
    CHECK(z[0] == doctest::Approx(0.1));
    CHECK(z[1] == doctest::Approx(0.2));
    CHECK(z[2] == doctest::Approx(0.6));
    CHECK_THROWS_AS(shift_phase(vec({0.1}), vec({0.1, 0.2}), b11, {1, 1}), InputError);
  }

  TEST_CASE("shift phase stays in the unit interval") {
    const auto b = BlockStructure::ones(1);
    for (int n = -100000; n <= 100000; n += 997) {
      const Phase y = shift_phase(vec({0.999999}), vec({kGoldenMean}), b, LatticePoint{n});
      CHECK(y[0] >= 0.0);
      CHECK(y[0] < 1.0);
      const double exact = std::fmod(0.999999 + static_cast<long double>(n) * kGoldenMean, 1.0L) + (n < 0 ? 1.0L : 0.0L);
      CHECK(std::abs(y[0] - std::fmod(exact, 1.0)) < 1e-12);
    }
  }

  TEST_CASE("block sections") {
    const BlockStructure b({2, 1});
    CHECK(b.total() == 3);
    CHECK(b.max_block() == 2);
    CHECK(b.offset(1) == 2);
    const Phase x = vec({0.1, 0.2, 0.3});
    const Eigen::VectorXd s = drop_block(x, b, 0);
    REQUIRE(s.size() == 1);
    CHECK(s[0] == 0.3);
    CHECK(insert_block(s, vec({0.1, 0.2}), b, 0) == x);
  }

  TEST_CASE("trig potential evaluation") {
    const auto v = TrigPotential::cosine_sum(1);
    CHECK(v(vec({0.0})) == 1.0);
    CHECK(std::abs(v(vec({0.25}))) < 1e-15);
    CHECK(std::abs(TrigPotential::cosine_sum(2)(vec({0.5, 0.0}))) < 1e-15);
    CHECK(v.coefficient_sum() == 1.0);
    CHECK(v.is_even());
    const TrigPotential s(1, {{{1}, 0.0, 2.0}});
    CHECK(s(vec({0.25})) == doctest::Approx(2.0));
    CHECK_FALSE(s.is_even());
  }

  TEST_CASE("nondegeneracy") {
    const auto r = check_nondegeneracy(TrigPotential::cosine_sum(2), BlockStructure::ones(2), 16);
    CHECK(r.nondegenerate());
    for (const auto& b : r.blocks) CHECK(b.min_oscillation == doctest::Approx(2.0).epsilon(1e-6));

    const TrigPotential only_first(2, {{{1, 0}, 1.0, 0.0}});
    const auto d = check_nondegeneracy(only_first, BlockStructure::ones(2), 16);
    CHECK_FALSE(d.nondegenerate());
    CHECK(d.blocks[0].nondegenerate);
    CHECK_FALSE(d.blocks[1].nondegenerate);

    const TrigPotential diag(2, {{{1, 1}, 1.0, 0.0}});
    CHECK(check_nondegeneracy(diag, BlockStructure::ones(2), 16).nondegenerate());
  }

  TEST_CASE("kernel families") {
    const auto L = ToeplitzKernel::laplacian_l1(2);
    CHECK(L({1, 0}) == 1.0);
    CHECK(L({0, -1}) == 1.0);
    CHECK(L({1, 1}) == 0.0);
    CHECK(L({2, 0}) == 0.0);
    CHECK(ToeplitzKernel::laplacian_sup(2)({1, 1}) == 1.0);

    const auto X = ToeplitzKernel::exp_decay(2, 1.0);
    CHECK(X.entry({0, 0}, {3, 0}) == doctest::Approx(std::exp(-3.0)));
    CHECK(X.entry({0, 0}, {0, 0}) == 0.0);
    CHECK(X.satisfies_go());
    CHECK(X.decay_certificate() == doctest::Approx(1.0));
    CHECK(X.radius() >= 33);
    CHECK(std::exp(-X.radius()) < 1e-14);
    CHECK_FALSE(L.satisfies_go());
  }

  TEST_CASE("kernel symmetry is checked") {
    CHECK_THROWS_AS(ToeplitzKernel::from_table(KernelFamily::FourierSymbol, 1, 1, 1.0, {{LatticePoint{1}, 0.5}}),
                    InputError);
    CHECK_NOTHROW(ToeplitzKernel::from_table(KernelFamily::FourierSymbol, 1, 1, 1.0,
                                             {{LatticePoint{1}, 0.5}, {LatticePoint{-1}, 0.5}}));
  }

  TEST_CASE("dual kernel from symbol") {
    const auto S = dual_kernel_from_symbol(TrigPotential(1, {{{1}, 2.0, 0.0}}));
    CHECK(S(LatticePoint{1}) == doctest::Approx(1.0));
    CHECK(S(LatticePoint{-1}) == doctest::Approx(1.0));
    CHECK(S(LatticePoint{0}) == 0.0);
    CHECK(S(LatticePoint{2}) == 0.0);

    const auto D = dual_kernel_from_symbol(TrigPotential::constant(1, 0.7));
    CHECK(D(LatticePoint{0}) == doctest::Approx(0.7));
    CHECK(D.support().size() == 1);

    const auto S2 = dual_kernel_from_symbol(TrigPotential(2, {{{1, 0}, 2.0, 0.0}, {{0, 1}, 2.0, 0.0}}));
    const auto L2 = ToeplitzKernel::laplacian_l1(2);
    for_each_point(Box::cube(LatticePoint(2), 2), [&](const LatticePoint& r) { CHECK(S2(r) == doctest::Approx(L2(r))); });

    CHECK_THROWS_AS(dual_kernel_from_symbol(TrigPotential(1, {{{1}, 0.0, 1.0}})), InputError);

    const TrigPotential back = kernel_symbol(S);
    for (double t : {0.0, 0.1, 0.37}) CHECK(back(vec({t})) == doctest::Approx(2.0 * std::cos(2 * std::numbers::pi * t)));
  }

  TEST_CASE("restricted matrix example") {
    ModelConfig cfg;
    cfg.kernel = ToeplitzKernel::laplacian_l1(1);
    cfg.potential = TrigPotential::cosine_sum(1);
    cfg.blocks = BlockStructure::ones(1);
    cfg.lambda = 2.0;
    cfg.omega = vec({0.5});
    const Eigen::MatrixXd M = assemble_restricted(cfg, PointSet({LatticePoint{0}, LatticePoint{1}}), vec({0.0}), 0.0);
    Eigen::Matrix2d expect;
    expect << 1.0, 0.5, 0.5, -1.0;
    CHECK((M - expect).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(spectral_bound(cfg) == doctest::Approx(2.0));
  }

  TEST_CASE("model validation") {
    ModelConfig cfg;
    cfg.kernel = ToeplitzKernel::laplacian_l1(1);
    cfg.potential = TrigPotential::cosine_sum(1);
    cfg.blocks = BlockStructure::ones(1);
    cfg.omega = vec({kGoldenMean});
    cfg.lambda = 1.0;
    try {
      cfg.validate();
      FAIL("lambda = 1 accepted");
    } catch (const InputError& e) {
      CHECK(std::string(e.what()).find("lambda must exceed 1") != std::string::npos);
    }
    cfg.lambda = 3.0;
    CHECK_NOTHROW(cfg.validate());
    cfg.omega = vec({0.1, 0.2});
    CHECK_THROWS_AS(cfg.validate(), InputError);
  }

  TEST_CASE("model json round trip") {
    const Json j = Json::parse(R"({"kernel": {"family": "exp_decay", "rho": 3.0}, "potential": "cosine_sum",
                                   "blocks": [1], "lambda": 220, "omega": "golden"})");
    const ModelConfig cfg = model_from_json(j);
    CHECK(cfg.kernel.family() == KernelFamily::ExpDecay);
    CHECK(cfg.lambda == 220.0);
    CHECK(cfg.omega[0] == kGoldenMean);
    const ModelConfig again = model_from_json(model_to_json(cfg));
    CHECK(again.kernel.support() == cfg.kernel.support());
    CHECK(again.omega == cfg.omega);
    CHECK(again.potential(vec({0.3})) == cfg.potential(vec({0.3})));
    Json bad = j;
    bad["lambda"] = 0.5;
    CHECK_THROWS_AS(model_from_json(bad), InputError);
  }
}
