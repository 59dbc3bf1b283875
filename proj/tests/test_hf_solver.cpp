#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <vector>

#include <lhf/hf_solver.hpp>

using namespace lhf;
using Catch::Matchers::WithinAbs;

namespace {

SolverConfig sc_config(double lambda)
{
    SolverConfig cfg;
    cfg.potential = Potential::screened_coulomb(1.0);
    cfg.lambda = lambda;
    cfg.n_max = 32;
    return cfg;
}

SolverConfig indicator_config(std::size_t N, double lambda)
{
    SolverConfig cfg = sc_config(lambda);
    cfg.f = ScalarFunction::indicator(N, cfg.b);
    return cfg;
}

} // namespace

TEST_CASE("lambda = 0 converges after one step to f(E_n)")
{
    auto cfg = sc_config(0.0);
    auto rep = solve_fixed_point(cfg);
    CHECK(rep.converged);
    CHECK(rep.iterations == 1);
    auto free = free_function_coefficients(cfg.f, cfg.b, cfg.n_max);
    CHECK(op_norm(rep.fixed_point - free) == 0.0);
    for (std::size_t n = 0; n <= cfg.n_max; ++n) {
        CHECK(rep.effective_levels[n] == landau_level(n, cfg.b));
    }
}

TEST_CASE("indicator at lambda = 0 has ids N b / 2pi")
{
    for (std::size_t N : {1u, 2u, 3u}) {
        for (double b : {0.8, 1.0, 1.7}) {
            auto cfg = indicator_config(N, 0.0);
            cfg.b = b;
            cfg.f = ScalarFunction::indicator(N, b);
            auto rep = solve_fixed_point(cfg);
            REQUIRE(rep.converged);
            CHECK_THAT(rep.ids, WithinAbs(N * b / (2.0 * std::numbers::pi), 1e-14));
        }
    }
}

TEST_CASE("converged iterate is a fixed point and residuals contract")
{
    auto cfg = sc_config(0.05);
    auto rep = solve_fixed_point(cfg);
    REQUIRE(rep.converged);
    CHECK(rep.iterations <= 50);
    FixedPointMap phi(cfg);
    CHECK(phi.distance(phi(rep.fixed_point), rep.fixed_point) < cfg.tol);
    const auto& h = rep.residual_history;
    for (std::size_t k = 1; k + 1 < h.size(); ++k) {
        CHECK(h[k] <= h[k - 1]);
    }
    REQUIRE(rep.contraction_estimate);
    CHECK(*rep.contraction_estimate < 1.0);
    CHECK(sup_norm(rep.fixed_point) <= cfg.ball_radius);
}

TEST_CASE("fixed point is unique in the ball")
{
    auto cfg = sc_config(0.05);
    auto ref = solve_fixed_point(cfg);
    REQUIRE(ref.converged);
    for (std::uint64_t s = 0; s < 4; ++s) {
        SplitMix64 rng(substream_seed(99, s));
        auto init = random_ball_element(cfg.b, cfg.n_max, cfg.ball_radius, rng);
        REQUIRE(sup_norm(init) <= cfg.ball_radius);
        auto rep = solve_fixed_point(cfg, init);
        REQUIRE(rep.converged);
        CHECK(sup_norm(rep.fixed_point - ref.fixed_point) <= 10.0 * cfg.tol);
    }
}

TEST_CASE("random ball elements stay inside the ball")
{
    SplitMix64 rng(7);
    for (int t = 0; t < 50; ++t) {
        auto F = random_ball_element(1.3, 20, 0.8, rng);
        CHECK(sup_norm(F) <= 0.8);
    }
}

TEST_CASE("contraction estimate is deterministic and scales with lambda")
{
    auto a = sc_config(0.04);
    double L1 = estimate_contraction(a, 6, 11);
    CHECK(estimate_contraction(a, 6, 11) == L1);
    auto b = sc_config(0.08);
    double L2 = estimate_contraction(b, 6, 11);
    CHECK(L1 > 0.0);
    CHECK(L2 / L1 > 1.5);
    CHECK(L2 / L1 < 2.5);
    CHECK(estimate_contraction(sc_config(0.0), 6, 11) == 0.0);
}

TEST_CASE("threshold search with zero interaction accepts lambda = 1/2")
{
    auto cfg = indicator_config(2, 0.0);
    cfg.potential = Potential::zero();
    auto rep = lambda_threshold_search(cfg);
    CHECK(rep.lambda0 == 0.5);
}

TEST_CASE("lambda1 is the largest dyadic value meeting the plateau margin")
{
    auto cfg = indicator_config(2, 0.0);
    auto rep = lambda_threshold_search(cfg);
    REQUIRE(rep.lambda0 > 0.0);
    const auto& si = std::get<SmoothedIndicator>(cfg.f.kind());
    double expect = 0.0;
    for (double lam = rep.lambda0; lam > 0.0; lam *= 0.5) {
        if (2.0 * lam * cfg.potential.l1_norm() * cfg.ball_radius < si.plateau_halfwidth) {
            expect = lam;
            break;
        }
    }
    CHECK(rep.lambda1 == expect);
    CHECK(rep.lambda1 == 0.03125);
    for (const auto& row : rep.scan) {
        if (row.lambda > rep.lambda0) {
            CHECK_FALSE((row.contraction < 1.0 && row.ball_invariant));
        }
    }
}

TEST_CASE("zero-temperature projections")
{
    auto z0 = zero_temp_projection(indicator_config(3, 0.0), 0.03125);
    CHECK(z0.passed);
    CHECK_THAT(z0.solver.ids, WithinAbs(3.0 / (2.0 * std::numbers::pi), 1e-9));

    auto z1 = zero_temp_projection(indicator_config(2, 0.015625), 0.03125);
    CHECK(z1.passed);
    CHECK(z1.idempotency_defect <= 1e-8);
    CHECK_THAT(z1.solver.ids, WithinAbs(2.0 / (2.0 * std::numbers::pi), 1e-9));
    for (const auto& L : z1.levels) {
        CHECK(L.ok);
        CHECK(L.occupied == (L.n < 2));
    }
    CHECK_THROWS_AS(zero_temp_projection(indicator_config(2, 0.1), 0.03125), InvalidArgument);
    CHECK_THROWS_AS(zero_temp_projection(sc_config(0.0), 0.03125), InvalidArgument);
}

TEST_CASE("Streda slope equals N / 2pi")
{
    auto tmpl = indicator_config(2, 0.0);
    auto rep = streda_slope(tmpl, 2, 0.01);
    for (bool c : rep.converged) {
        CHECK(c);
    }
    CHECK_THAT(rep.slope, WithinAbs(rep.expected, 1e-8));
    CHECK_THAT(rep.expected, WithinAbs(1.0 / std::numbers::pi, 1e-15));
}

TEST_CASE("configuration validation")
{
    auto cfg = sc_config(0.05);
    cfg.n_max = 2;
    CHECK_THROWS_AS(solve_fixed_point(cfg), InvalidArgument); // f(E_2) is not dead

    cfg = sc_config(0.05);
    cfg.ball_radius = 0.1; // sup|Phi(0)| is about 0.3
    CHECK_THROWS_AS(solve_fixed_point(cfg), InvalidArgument);

    cfg = sc_config(0.05);
    cfg.damping = 0.0;
    CHECK_THROWS_AS(solve_fixed_point(cfg), InvalidArgument);

    cfg = indicator_config(2, 0.0);
    cfg.b = 1.5;
    CHECK_THROWS_AS(solve_fixed_point(cfg), InvalidArgument); // indicator built for b = 1

    cfg = sc_config(0.05);
    CHECK_THROWS_AS(solve_fixed_point(cfg, LandauCoefficients::zero(1.0, 16)), InvalidArgument);
    CHECK_THROWS_AS(solve_fixed_point(cfg, 10.0 * LandauCoefficients::level(1.0, 32, 0)), InvalidArgument);
}

TEST_CASE("an iteration that leaves the ball is reported")
{
    // attractive coupling pulls more Fermi-Dirac weight below mu
    auto cfg = sc_config(-0.3);
    cfg.ball_radius = 1.01 * sup_norm(free_function_coefficients(cfg.f, cfg.b, cfg.n_max));
    CHECK_THROWS_AS(solve_fixed_point(cfg), BallExitError);
}

TEST_CASE("damped iteration reaches the same fixed point and is flagged")
{
    auto cfg = sc_config(0.05);
    auto plain = solve_fixed_point(cfg);
    cfg.damping = 0.7;
    auto damped = solve_fixed_point(cfg);
    REQUIRE(damped.converged);
    CHECK(damped.exploratory);
    CHECK_FALSE(plain.exploratory);
    CHECK(sup_norm(damped.fixed_point - plain.fixed_point) <= 1e-11);
}
