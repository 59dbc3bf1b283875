#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <vector>

#include <lhf/hf_solver.hpp>
#include <lhf/radial_algebra.hpp>
#include <lhf/random.hpp>

using namespace lhf;
using Catch::Matchers::WithinAbs;

namespace {

// J_0(x) = (1/pi) int_0^pi cos(x sin t) dt; trapezoid is spectral for periodic integrands
double bessel_j0(double x)
{
    const int K = 256;
    double s = 0.0;
    for (int k = 0; k < K; ++k) {
        s += std::cos(x * std::sin(std::numbers::pi * (k + 0.5) / K));
    }
    return s / K;
}

// composite Simpson of 2 pi int_0^R F(r) J_0(xi r) r dr
double symbol_oracle(const LandauCoefficients& A, double xi, double R, std::size_t K)
{
    double h = R / static_cast<double>(K);
    double s = 0.0;
    for (std::size_t k = 0; k <= K; ++k) {
        double r = h * static_cast<double>(k);
        double w = (k == 0 || k == K) ? 1.0 : (k % 2 ? 4.0 : 2.0);
        s += w * synthesize(A, r) * bessel_j0(xi * r) * r;
    }
    return 2.0 * std::numbers::pi * s * h / 3.0;
}

LandauCoefficients random_coeffs(double b, std::size_t n_max, SplitMix64& rng)
{
    std::vector<double> a(n_max + 1);
    for (auto& v : a) {
        v = rng.uniform(-1.0, 1.0);
    }
    return {b, a};
}

} // namespace

TEST_CASE("analyze recovers single cells and their combinations")
{
    const double b = 1.0;
    auto rule = gauss_laguerre_rule(48);
    auto a0 = analyze([&](double r) { return cell(0, r, b); }, b, 16, rule).coeffs;
    for (std::size_t n = 0; n <= 16; ++n) {
        CHECK_THAT(a0[n], WithinAbs(n == 0 ? 1.0 : 0.0, 1e-12));
    }
    auto a03 = analyze([&](double r) { return cell(0, r, b) + 2.0 * cell(3, r, b); }, b, 16, rule).coeffs;
    for (std::size_t n = 0; n <= 16; ++n) {
        double expect = n == 0 ? 1.0 : (n == 3 ? 2.0 : 0.0);
        CHECK_THAT(a03[n], WithinAbs(expect, 1e-12));
    }
    auto z = analyze([](double) { return 0.0; }, b, 8, rule);
    CHECK(op_norm(z.coeffs) == 0.0);
    CHECK_FALSE(z.tail.aliasing);
}

TEST_CASE("analyze works with the radial trapezoid rule too")
{
    const double b = 0.7;
    auto rule = default_radial_rule(12, b);
    auto a = analyze([&](double r) { return 3.0 * cell(5, r, b); }, b, 12, rule).coeffs;
    for (std::size_t n = 0; n <= 12; ++n) {
        CHECK_THAT(a[n], WithinAbs(n == 5 ? 3.0 : 0.0, 1e-8));
    }
}

TEST_CASE("analyze rejects an under-resolved Gauss-Laguerre rule")
{
    auto rule = gauss_laguerre_rule(10);
    CHECK_THROWS_AS(analyze([](double) { return 1.0; }, 1.0, 8, rule), InvalidArgument);
}

TEST_CASE("aliasing flag fires for a kernel that needs more levels")
{
    const double b = 1.0;
    auto rule = gauss_laguerre_rule(64);
    auto an = analyze([&](double r) { return cell(7, r, b); }, b, 7, rule);
    CHECK(an.tail.aliasing);
    CHECK(an.tail.tail_mass > 0.5);
}

TEST_CASE("synthesize at the origin")
{
    CHECK_THAT(synthesize(LandauCoefficients(1.0, {1.0, 0.0, 0.0}), 0.0), WithinAbs(1.0 / (2.0 * std::numbers::pi), 1e-16));
    CHECK_THAT(synthesize(LandauCoefficients(1.0, {1.0, 1.0, 0.0}), 0.0), WithinAbs(1.0 / std::numbers::pi, 1e-16));
}

TEST_CASE("analyze inverts synthesize for n_max = 16")
{
    SplitMix64 rng(3);
    auto rule = gauss_laguerre_rule(40);
    for (int trial = 0; trial < 20; ++trial) {
        double b = rng.uniform(0.3, 3.0);
        auto A = random_coeffs(b, 16, rng);
        auto back = analyze([&](double r) { return synthesize(A, r); }, b, 16, rule).coeffs;
        for (std::size_t n = 0; n <= 16; ++n) {
            CHECK_THAT(back[n], WithinAbs(A[n], 1e-9));
        }
    }
}

TEST_CASE("product is diagonal multiplication")
{
    const double b = 1.0;
    for (std::size_t n = 0; n < 5; ++n) {
        for (std::size_t m = 0; m < 5; ++m) {
            auto P = product(LandauCoefficients::level(b, 4, n), LandauCoefficients::level(b, 4, m));
            for (std::size_t k = 0; k <= 4; ++k) {
                CHECK(P[k] == ((n == m && k == n) ? 1.0 : 0.0));
            }
        }
    }
    SplitMix64 rng(5);
    auto A = random_coeffs(b, 9, rng);
    auto I = LandauCoefficients::projection(b, 9, 10);
    auto IA = product(I, A);
    for (std::size_t k = 0; k <= 9; ++k) {
        CHECK(IA[k] == A[k]);
    }
    CHECK_THROWS_AS(product(A, LandauCoefficients::zero(b, 8)), InvalidArgument);
    CHECK_THROWS_AS(product(A, LandauCoefficients::zero(2.0, 9)), InvalidArgument);
}

TEST_CASE("ids, op_norm")
{
    for (std::size_t N : {1u, 2u, 3u, 7u}) {
        CHECK_THAT(ids(LandauCoefficients::projection(1.0, 16, N)), WithinAbs(N / (2.0 * std::numbers::pi), 1e-15));
    }
    CHECK(ids(LandauCoefficients::zero(1.0, 4)) == 0.0);
    for (std::size_t n = 0; n < 10; ++n) {
        CHECK_THAT(ids(LandauCoefficients::level(2.5, 12, n)), WithinAbs(2.5 / (2.0 * std::numbers::pi), 1e-15));
    }
    CHECK(op_norm(LandauCoefficients(1.0, {1.0, -2.0, 0.0})) == 2.0);
    CHECK(op_norm(LandauCoefficients::projection(1.0, 8, 3)) == 1.0);
}

TEST_CASE("ids is linear")
{
    SplitMix64 rng(17);
    for (int t = 0; t < 50; ++t) {
        auto A = random_coeffs(1.2, 10, rng);
        auto B = random_coeffs(1.2, 10, rng);
        double s = rng.uniform(-3.0, 3.0);
        CHECK_THAT(ids(A + s * B), WithinAbs(ids(A) + s * ids(B), 1e-13));
    }
}

TEST_CASE("idempotency iff coefficients in {0,1}")
{
    SplitMix64 rng(23);
    for (int t = 0; t < 50; ++t) {
        std::vector<double> a(12);
        for (auto& v : a) {
            v = rng.uniform() < 0.5 ? 0.0 : 1.0;
        }
        LandauCoefficients P(1.0, a);
        CHECK(op_norm(product(P, P) - P) <= 1e-8);
        a[static_cast<std::size_t>(rng.uniform(0.0, 12.0))] = rng.uniform(0.05, 0.95);
        LandauCoefficients Q(1.0, a);
        CHECK(op_norm(product(Q, Q) - Q) > 1e-8);
    }
}

TEST_CASE("constructor validation")
{
    CHECK_THROWS_AS(LandauCoefficients(0.0, {1.0}), InvalidArgument);
    CHECK_THROWS_AS(LandauCoefficients(1.0, std::vector<double>{}), InvalidArgument);
    CHECK_THROWS_AS(LandauCoefficients(1.0, {std::nan("")}), InvalidArgument);
    CHECK_THROWS_AS(LandauCoefficients(1.0, std::vector<double>(514, 0.0)), InvalidArgument);
    CHECK_THROWS_AS(LandauCoefficients::level(1.0, 3, 4), InvalidArgument);
}

TEST_CASE("sup norm dominates sampled values and is attained for a single cell at 0")
{
    CHECK_THAT(sup_norm(LandauCoefficients::level(1.0, 8, 0)), WithinAbs(1.0 / (2.0 * std::numbers::pi), 1e-12));
    SplitMix64 rng(29);
    auto A = random_coeffs(1.0, 8, rng);
    double s = sup_norm(A);
    for (double r = 0.0; r < 15.0; r += 0.013) {
        CHECK(std::fabs(synthesize(A, r)) <= s * (1.0 + 1e-12));
    }
}

TEST_CASE("symbol of Pi_0 at zero momentum equals 2")
{
    auto P0 = LandauCoefficients::level(1.0, 4, 0);
    CHECK_THAT(symbol_eval(P0, 0.0), WithinAbs(2.0, 1e-10));
    CHECK_THAT(symbol_oracle(P0, 0.0, 14.0, 4000), WithinAbs(2.0, 1e-9));
    CHECK(symbol_eval(LandauCoefficients::zero(1.0, 4), 1.0) == 0.0);
}

TEST_CASE("symbol quadrature agrees with the Bessel oracle and the closed form")
{
    SplitMix64 rng(31);
    const double b = 1.4;
    auto A = random_coeffs(b, 6, rng);
    double R = cell_extent(6, b);
    for (double xi : {0.0, 0.5, 1.3, 2.7, 4.0}) {
        double q = symbol_eval(A, xi);
        CHECK_THAT(q, WithinAbs(symbol_oracle(A, xi, R, 6000), 1e-8));
        CHECK_THAT(q, WithinAbs(landau_symbol(A, xi), 1e-9));
    }
}

TEST_CASE("symbol of a fixed-point projection is smoothing")
{
    SolverConfig cfg;
    cfg.potential = Potential::gaussian(1.0);
    cfg.lambda = 0.05;
    cfg.n_max = 32;
    auto rep = solve_fixed_point(cfg);
    REQUIRE(rep.converged);
    const auto& F = rep.fixed_point;
    double peak = 0.0;
    double last = 0.0;
    for (int k = 0; k <= 40; ++k) {
        double xi = 20.0 * std::sqrt(cfg.b) * k / 40.0;
        double w = std::pow(1.0 + xi * xi, 2.0) * std::fabs(landau_symbol(F, xi));
        peak = std::max(peak, w);
        last = w;
    }
    CHECK(std::isfinite(peak));
    CHECK(last < 1e-6 * peak);
    CHECK_THAT(symbol_eval(F, 3.0), WithinAbs(landau_symbol(F, 3.0), 1e-8));
}
