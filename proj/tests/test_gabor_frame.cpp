#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <sstream>

#include <lhf/gabor_frame.hpp>
#include <lhf/random.hpp>

using namespace lhf;
using Catch::Matchers::WithinAbs;

TEST_CASE("window squares partition unity")
{
    GaborWindow w;
    for (double y1 = -2.0; y1 <= 2.0; y1 += 0.037) {
        for (double y2 = -2.0; y2 <= 2.0; y2 += 0.041) {
            double s = 0.0;
            for (int g1 = -4; g1 <= 4; ++g1) {
                for (int g2 = -4; g2 <= 4; ++g2) {
                    double v = w(y1 - g1, y2 - g2);
                    s += v * v;
                }
            }
            CHECK_THAT(s, WithinAbs(1.0, 1e-12));
        }
    }
}

TEST_CASE("window support, symmetry and smoothness")
{
    GaborWindow w;
    CHECK(w.g1(-1.0) == 0.0);
    CHECK(w.g1(1.0) == 0.0);
    CHECK(w.g1(1.5) == 0.0);
    CHECK(w.g1(0.0) > 0.9);
    double prev = w.g1(-1.0);
    double max_slope = 0.0;
    const double h = 1e-3;
    for (double t = -1.0 + h; t < 1.0; t += h) {
        CHECK_THAT(w.g1(t), WithinAbs(w.g1(-t), 1e-15));
        double v = w.g1(t);
        max_slope = std::max(max_slope, std::fabs(v - prev) / h);
        prev = v;
    }
    CHECK(max_slope < 5.0);
}

TEST_CASE("frame coefficients of zero vanish")
{
    GaborFrameSpec spec;
    spec.Gamma = 2;
    spec.Gamma_star = 4;
    auto c = frame_coefficients([](double, double) { return cplx(0.0, 0.0); }, spec);
    for (auto v : c.values) {
        CHECK(v == cplx(0.0, 0.0));
    }
}

TEST_CASE("frame function has norm 1/(2pi)")
{
    GaborFrameSpec spec;
    for (auto [g1, g2, k1, k2] : {std::array{0, 0, 0, 0}, {2, -1, 3, 0}, {-3, 4, -2, 5}}) {
        auto psi = [&](double y1, double y2) { return frame_function(g1, g2, k1, k2, y1, y2, spec.b); };
        cplx self = frame_coefficient(psi, g1, g2, k1, k2, spec);
        CHECK_THAT(self.real(), WithinAbs(1.0 / (4.0 * std::numbers::pi * std::numbers::pi), 1e-12));
        CHECK(std::fabs(self.imag()) < 1e-14);
    }
}

TEST_CASE("batched coefficients agree with single evaluations")
{
    GaborFrameSpec spec;
    spec.Gamma = 2;
    spec.Gamma_star = 5;
    auto f = parseval_catalog()[1].f;
    auto c = frame_coefficients(f, spec);
    SplitMix64 rng(4);
    for (int t = 0; t < 20; ++t) {
        int g1 = static_cast<int>(rng.uniform(-2.0, 3.0));
        int g2 = static_cast<int>(rng.uniform(-2.0, 3.0));
        int k1 = static_cast<int>(rng.uniform(-5.0, 6.0));
        int k2 = static_cast<int>(rng.uniform(-5.0, 6.0));
        CHECK(std::abs(c.at(g1, g2, k1, k2) - frame_coefficient(f, g1, g2, k1, k2, spec)) < 1e-14);
    }
}

TEST_CASE("coefficients of a Gaussian decay with the lattice distance")
{
    GaborFrameSpec spec;
    spec.Gamma = 8;
    spec.Gamma_star = 6;
    auto c = frame_coefficients([](double x, double y) { return cplx(std::exp(-(x * x + y * y)), 0.0); }, spec);
    for (int g1 = -8; g1 <= 8; ++g1) {
        for (int g2 = -8; g2 <= 8; ++g2) {
            if (std::max(std::abs(g1), std::abs(g2)) < 6) {
                continue;
            }
            for (int k1 = -6; k1 <= 6; ++k1) {
                for (int k2 = -6; k2 <= 6; ++k2) {
                    CHECK(std::abs(c.at(g1, g2, k1, k2)) < 1e-8);
                }
            }
        }
    }
}

TEST_CASE("Parseval identity over the catalog")
{
    GaborFrameSpec spec;
    for (const auto& e : parseval_catalog()) {
        INFO(e.name);
        CHECK_THAT(l2_norm_squared(e.f, spec.Gamma + 10.0), WithinAbs(e.norm_squared, 1e-10 * e.norm_squared));
        auto c = frame_coefficients(e.f, spec);
        double prev = 2.0;
        for (int gs : {10, 20, 30, 40}) {
            double defect = std::fabs(e.norm_squared - c.energy(gs)) / e.norm_squared;
            CHECK(defect <= prev);
            prev = defect;
        }
        CHECK(prev <= 1e-3);
        auto r = parseval_check(e.f, spec);
        CHECK(r.defect <= 1e-3);
        CHECK_THAT(r.ratio, WithinAbs(1.0, 1e-3));
    }
}

TEST_CASE("Parseval check flags mass outside the lattice window")
{
    GaborFrameSpec spec;
    spec.Gamma = 3;
    spec.Gamma_star = 10;
    auto far = [](double x, double y) { return cplx(std::exp(-0.5 * ((x - 9.0) * (x - 9.0) + y * y)), 0.0); };
    auto r = parseval_check(far, spec);
    CHECK_THAT(r.defect, WithinAbs(1.0, 1e-6));
    CHECK_THROWS_AS(parseval_check([](double, double) { return cplx(0.0, 0.0); }, spec), InvalidArgument);
}

TEST_CASE("coefficients are covariant under magnetic lattice translations")
{
    GaborFrameSpec spec;
    spec.b = 1.3;
    spec.Gamma = 3;
    spec.Gamma_star = 4;
    auto f = parseval_catalog(spec.b)[1].f;
    for (auto [t1, t2] : {std::pair{1, 0}, {-1, 2}}) {
        auto moved = [&](double y1, double y2) { return peierls_phase(y1, y2, t1, t2, spec.b) * f(y1 - t1, y2 - t2); };
        auto cm = frame_coefficients(moved, spec);
        auto c = frame_coefficients(f, spec);
        for (int g1 = -1; g1 <= 1; ++g1) {
            for (int g2 = -1; g2 <= 1; ++g2) {
                cplx ph = std::conj(peierls_phase(t1, t2, g1, g2, spec.b));
                for (int k1 = -4; k1 <= 4; ++k1) {
                    for (int k2 = -4; k2 <= 4; ++k2) {
                        CHECK(std::abs(cm.at(g1, g2, k1, k2) - ph * c.at(g1 - t1, g2 - t2, k1, k2)) < 1e-10);
                    }
                }
            }
        }
    }
}

TEST_CASE("matrix decay scan")
{
    const GridSpec s{1.0, 64, 8.0};
    DecayScanRanges ranges;
    ranges.lattice = 2;
    ranges.dual = 3;
    auto zero = matrix_decay_scan(GridKernel(s), ranges, 2);
    CHECK(zero.sup_weighted == 0.0);
    CHECK(zero.rows.size() == 25u * 49u);

    auto P0 = landau_projection_kernel(0, s);
    auto scan = matrix_decay_scan(P0, ranges, 2);
    double psi_norm2 = 1.0 / (4.0 * std::numbers::pi * std::numbers::pi);
    CHECK(scan.sup_diagonal > 0.0);
    CHECK(scan.sup_diagonal <= 1.1 * operator_norm_estimate(P0) * psi_norm2);
    // the largest entry sits near the diagonal
    double far = 0.0;
    for (const auto& r : scan.rows) {
        if (std::max(std::abs(r.a1 - r.b1), std::abs(r.a2 - r.b2)) == 2) {
            far = std::max(far, r.magnitude);
        }
    }
    CHECK(far < scan.sup_diagonal);

    std::ostringstream os;
    write_decay_csv(os, scan);
    std::string text = os.str();
    CHECK(text.rfind("alpha1,alpha2,alpha_star1,alpha_star2,beta1,beta2,beta_star1,beta_star2,magnitude,weighted_magnitude\n", 0) == 0);
    CHECK(static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')) == scan.rows.size() + 1);
}
