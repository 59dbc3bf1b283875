#pragma once

// Invariant suite behind `lhf verify`: every check compares two independent
// computations or a computation against an exact value.

#include <chrono>
#include <functional>
#include <string>
#include <vector>

#include "gabor_frame.hpp"
#include "hf_solver.hpp"
#include "hs_calculus.hpp"
#include "io.hpp"
#include "landau_matrix.hpp"
#include "twisted_grid.hpp"

namespace lhf {

struct CheckResult
{
    std::string name;
    bool passed = false;
    double value = 0.0;
    double threshold = 0.0;
    std::string detail;
    double seconds = 0.0;
};

inline json to_json(const CheckResult& c)
{
    return {{"name", c.name}, {"passed", c.passed}, {"value", c.value}, {"threshold", c.threshold},
            {"detail", c.detail}, {"seconds", c.seconds}};
}

namespace detail {

inline CheckResult timed(const std::string& name, const std::function<CheckResult()>& body)
{
    auto t0 = std::chrono::steady_clock::now();
    CheckResult r;
    try {
        r = body();
    } catch (const Error& e) {
        r.passed = false;
        r.detail = std::string("error: ") + e.what();
    }
    r.name = name;
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

inline GridKernel sample_coefficients(const LandauCoefficients& A, const GridSpec& s)
{
    return GridKernel::sample_radial(s, [&](double r) { return synthesize(A, r); });
}

} // namespace detail

/// Reference grid for the diagonalization checks: b = 1, n = 128, R = 8.
inline GridSpec reference_grid() { return {1.0, 128, 8.0}; }

/// Kato-Nagy / boundary reference: b = 1, n = 128, R = 16.
inline GridSpec kato_nagy_grid() { return {1.0, 128, 16.0}; }

inline std::vector<CheckResult> run_verification_suite(const RunConfig& cfg)
{
    std::vector<CheckResult> out;
    const GridSpec g = reference_grid();

    out.push_back(detail::timed("grid_cell_algebra", [&] {
        double worst = 0.0;
        std::vector<GridKernel> c;
        for (std::size_t n = 0; n <= 2; ++n) {
            c.push_back(landau_projection_kernel(n, g));
        }
        for (std::size_t n = 0; n <= 2; ++n) {
            for (std::size_t m = 0; m <= 2; ++m) {
                GridKernel p = twisted_convolution(c[n], c[m]);
                worst = std::max(worst, n == m ? GridKernel::diff_sup(p, c[n]) : p.sup_norm());
            }
        }
        return CheckResult{"", worst <= 1e-3, worst, 1e-3, "cells n, m <= 2 on the reference grid"};
    }));

    out.push_back(detail::timed("radial_grid_equivalence", [&] {
        LandauCoefficients A(1.0, {0.7, 0.3, 0.0});
        LandauCoefficients B(1.0, {0.5, -0.2, 1.0});
        GridKernel grid = twisted_convolution(detail::sample_coefficients(A, g), detail::sample_coefficients(B, g));
        double d = GridKernel::diff_sup(grid, detail::sample_coefficients(product(A, B), g));
        return CheckResult{"", d <= 1e-3, d, 1e-3, "twisted convolution vs coefficient product"};
    }));

    out.push_back(detail::timed("finite_volume_trace", [&] {
        GridKernel P = landau_projection_kernel(0, g);
        double L = 3.0;
        double d = std::fabs(finite_volume_trace(P, L) / (std::numbers::pi * L * L) -
                             ids(LandauCoefficients::level(1.0, 4, 0)));
        return CheckResult{"", d <= 1e-9, d, 1e-9, "Tr(chi_L P)/(pi L^2) vs radial ids"};
    }));

    out.push_back(detail::timed("gabor_parseval", [&] {
        GaborFrameSpec spec;
        double worst = 0.0;
        for (const auto& e : parseval_catalog(spec.b)) {
            worst = std::max(worst, parseval_check(e.f, spec).defect);
        }
        return CheckResult{"", worst <= 1e-3, worst, 1e-3, "5-function catalog, Gamma = 6, Gamma* = 40"};
    }));

    out.push_back(detail::timed("hs_cross_validation", [&] {
        SolverReport rep = solve_fixed_point(cfg.solver);
        CrossValidationReport cv = hs_cross_validate(cfg.solver, rep.fixed_point, 1e-6);
        return CheckResult{"", cv.passed, cv.max_discrepancy, 1e-6, cv.diagnostic};
    }));

    out.push_back(detail::timed("effective_potential_norm_bound", [&] {
        SplitMix64 rng(cfg.seed);
        std::size_t violations = 0;
        double worst = 0.0;
        for (std::size_t k = 0; k < 100; ++k) {
            Potential p = k % 3 == 0 ? Potential::screened_coulomb(rng.uniform(0.5, 2.0))
                          : k % 3 == 1 ? Potential::gaussian(rng.uniform(0.5, 2.0))
                                       : Potential::exponential(rng.uniform(0.5, 2.0));
            LandauCoefficients F = random_ball_element(1.0, 24, 1.0, rng);
            double lhs = op_norm(effective_potential(p, F).coeffs);
            double rhs = 2.0 * p.l1_norm() * sup_norm(F);
            worst = std::max(worst, lhs / rhs);
            violations += lhs > rhs ? 1 : 0;
        }
        return CheckResult{"", violations == 0, worst, 1.0, "max ratio op_norm / (2 ||v||_1 sup|F|) over 100 draws"};
    }));

    // Kato-Nagy and boundary defect share the interacting projection
    MatrixSolverConfig mc;
    KatoNagyResult kn;
    GridKernel Q;
    out.push_back(detail::timed("kato_nagy", [&] {
        MatrixSolverReport rep = solve_projection_matrix(mc);
        GridSpec s = kato_nagy_grid();
        GridKernel P = synthesize_matrix_kernel(rep.coeffs, s);
        Q = synthesize_matrix_kernel(rep.free_coeffs, s);
        kn = kato_nagy_unitary(P, Q);
        double worst = std::max(kn.unitarity_defect, kn.intertwining_defect);
        bool ok = kn.norm_estimate <= 0.5 && worst <= 1e-3;
        std::ostringstream os;
        os << "||P - Q|| ~ " << kn.norm_estimate << ", unitarity " << kn.unitarity_defect << ", intertwining "
           << kn.intertwining_defect;
        return CheckResult{"", ok, worst, 1e-3, os.str()};
    }));

    out.push_back(detail::timed("boundary_defect_scaling", [&] {
        if (Q.data().empty()) {
            return CheckResult{"", false, 0.0, 0.0, "skipped: Kato-Nagy step failed"};
        }
        BoundaryDefect d4 = boundary_defect_from_unitary(Q, kn.V, 4.0);
        BoundaryDefect d8 = boundary_defect_from_unitary(Q, kn.V, 8.0);
        double ratio = d8.majorant / d4.majorant;
        double density_drop = (d4.majorant / 16.0) / (d8.majorant / 64.0);
        bool ok = ratio >= 1.6 && ratio <= 2.4 && density_drop >= 1.5;
        std::ostringstream os;
        os << "defect(8)/defect(4) = " << ratio << ", density drop " << density_drop << ", signed traces "
           << std::abs(d4.signed_trace) << ", " << std::abs(d8.signed_trace);
        return CheckResult{"", ok, ratio, 2.0, os.str()};
    }));

    return out;
}

} // namespace lhf
