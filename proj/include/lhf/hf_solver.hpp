#pragma once

// Self-consistent Hartree-Fock map Phi_lambda(F) = f(H_b + lambda W_F)(., 0)
// on the Landau-diagonal representation, its Banach iteration, and the
// zero-temperature projection checks.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "error.hpp"
#include "interaction.hpp"
#include "parallel.hpp"
#include "radial_algebra.hpp"
#include "random.hpp"
#include "scalar_functions.hpp"

namespace lhf {

struct SolverConfig
{
    double b = 1.0;
    double lambda = 0.0;
    Potential potential = Potential::screened_coulomb(1.0);
    ScalarFunction f = ScalarFunction::fermi_dirac(2.0, 4.0);
    std::size_t n_max = 64;
    double ball_radius = 1.0;
    double damping = 1.0;
    double tol = 1e-12;
    std::size_t max_iter = 200;
};

/// Landau level E_n = b(2n+1).
inline double landau_level(std::size_t n, double b) { return b * (2.0 * static_cast<double>(n) + 1.0); }

/// Coefficients f(E_n) of f(H_b).
inline LandauCoefficients free_function_coefficients(const ScalarFunction& f, double b, std::size_t n_max)
{
    std::vector<double> a(n_max + 1);
    for (std::size_t n = 0; n <= n_max; ++n) {
        a[n] = f(landau_level(n, b));
    }
    return {b, std::move(a)};
}

inline void validate(const SolverConfig& cfg)
{
    require(cfg.b > 0.0 && std::isfinite(cfg.b), "b must be positive and finite");
    require(std::isfinite(cfg.lambda), "lambda must be finite");
    require(cfg.damping > 0.0 && cfg.damping <= 1.0, "damping must lie in (0, 1]");
    require(cfg.tol > 0.0, "tolerance must be positive");
    require(cfg.max_iter >= 1, "max_iter must be >= 1");
    require(cfg.n_max <= max_laguerre_level, "n_max exceeds the Laguerre cap of 512");
    require(cfg.ball_radius > 0.0, "ball radius must be positive");
    if (auto* si = std::get_if<SmoothedIndicator>(&cfg.f.kind())) {
        require(std::fabs(si->b - cfg.b) <= 1e-12 * cfg.b,
                "indicator must be built for the solver's field strength");
        require(si->N <= cfg.n_max, "indicator occupies more levels than n_max");
    }
    double phi0 = sup_norm(free_function_coefficients(cfg.f, cfg.b, cfg.n_max));
    if (!(cfg.ball_radius > phi0)) {
        std::ostringstream os;
        os << "ball radius M = " << cfg.ball_radius << " must exceed sup|Phi(0)| = " << phi0;
        throw InvalidArgument(os.str());
    }
}

/// Phi_lambda with its quadrature prepared once.
class FixedPointMap
{
  public:
    explicit FixedPointMap(const SolverConfig& cfg)
        : cfg_(cfg), rule_(exchange_rule(cfg.potential, cfg.n_max, cfg.b)), mesh_(sampling_mesh(cfg.b))
    {
    }

    const SolverConfig& config() const { return cfg_; }
    const std::vector<double>& mesh() const { return mesh_; }

    LandauCoefficients zero() const { return LandauCoefficients::zero(cfg_.b, cfg_.n_max); }

    /// Effective potential coefficients c F(0) + z_n.
    LandauCoefficients effective(const LandauCoefficients& F) const
    {
        check(F);
        if (cfg_.lambda == 0.0) {
            return zero();
        }
        return effective_potential(cfg_.potential, F, rule_).coeffs;
    }

    /// e_n = b(2n+1) + lambda (c F(0) + z_n).
    std::vector<double> levels(const LandauCoefficients& F) const
    {
        LandauCoefficients w = effective(F);
        std::vector<double> e(cfg_.n_max + 1);
        for (std::size_t n = 0; n <= cfg_.n_max; ++n) {
            e[n] = landau_level(n, cfg_.b) + cfg_.lambda * w[n];
        }
        return e;
    }

    LandauCoefficients operator()(const LandauCoefficients& F) const
    {
        std::vector<double> e = levels(F);
        std::vector<double> a(e.size());
        for (std::size_t n = 0; n < e.size(); ++n) {
            a[n] = cfg_.f(e[n]);
        }
        if (a.back() > 1e-12) {
            std::ostringstream os;
            os << "truncation rejected: f(e_" << cfg_.n_max << ") = " << a.back()
               << " > 1e-12; increase n_max";
            throw InvalidArgument(os.str());
        }
        return {cfg_.b, std::move(a)};
    }

    /// Residual metric: sup over the fixed mesh of the synthesized kernel.
    double distance(const LandauCoefficients& F, const LandauCoefficients& G) const
    {
        return sup_norm_on(F - G, mesh_);
    }

  private:
    void check(const LandauCoefficients& F) const
    {
        require(F.n_max() == cfg_.n_max, "coefficient truncation differs from the solver's n_max");
        require(std::fabs(F.b() - cfg_.b) <= 1e-14 * cfg_.b, "coefficients built for another b");
    }

    SolverConfig cfg_;
    QuadratureRule rule_;
    std::vector<double> mesh_;
};

inline std::vector<double> effective_levels(const LandauCoefficients& F, const SolverConfig& cfg)
{
    return FixedPointMap(cfg).levels(F);
}

inline LandauCoefficients phi_map(const LandauCoefficients& F, const SolverConfig& cfg)
{
    return FixedPointMap(cfg)(F);
}

struct SolverReport
{
    bool converged = false;
    std::size_t iterations = 0;
    std::vector<double> residual_history;
    LandauCoefficients fixed_point;
    std::vector<double> effective_levels;
    double ids = 0.0;
    std::optional<double> contraction_estimate;
    /// damping < 1: outside the regime where the plain iteration is proven.
    bool exploratory = false;
};

inline SolverReport solve_fixed_point(const SolverConfig& cfg,
                                      std::optional<LandauCoefficients> initial = std::nullopt)
{
    validate(cfg);
    FixedPointMap phi(cfg);
    LandauCoefficients F = initial ? *initial : phi.zero();
    require(F.n_max() == cfg.n_max, "initial guess has a different n_max");
    const double M = cfg.ball_radius;
    if (sup_norm(F) > M) {
        throw InvalidArgument("initial guess lies outside the ball of radius M");
    }

    SolverReport rep;
    rep.exploratory = cfg.damping < 1.0;
    for (std::size_t k = 0;; ++k) {
        LandauCoefficients G = phi(F);
        double res = phi.distance(G, F);
        rep.residual_history.push_back(res);
        if (res < cfg.tol) {
            rep.converged = true;
            break;
        }
        if (k == cfg.max_iter) {
            break;
        }
        F = combine(1.0 - cfg.damping, F, cfg.damping, G);
        ++rep.iterations;
        double norm = sup_norm(F);
        if (norm > M * (1.0 + 1e-12)) {
            std::ostringstream os;
            os << "iterate " << rep.iterations << " left the ball: sup|F| = " << norm << " > M = " << M
               << "; reduce |lambda| (currently " << cfg.lambda << ")";
            throw BallExitError(os.str());
        }
    }
    const auto& h = rep.residual_history;
    double ratio = 0.0;
    std::size_t count = 0;
    for (std::size_t k = 1; k < h.size(); ++k) {
        if (h[k - 1] > 0.0 && h[k] > 0.0) {
            ratio = std::max(ratio, h[k] / h[k - 1]);
            ++count;
        }
    }
    if (count > 0) {
        rep.contraction_estimate = ratio;
    }
    rep.effective_levels = phi.levels(F);
    rep.ids = ids(F);
    rep.fixed_point = std::move(F);
    return rep;
}

/// Random element of the ball: a truncated Landau series on levels
/// 0..min(n_max, 16) with coefficients uniform in [-M', M'],
/// M' = 2 pi M / (b (levels+1)). Since |F_n| <= b/2pi, sup|F| <= M.
inline LandauCoefficients random_ball_element(double b, std::size_t n_max, double M, SplitMix64& rng)
{
    std::size_t top = std::min<std::size_t>(n_max, 16);
    double Mp = 2.0 * std::numbers::pi * M / (b * static_cast<double>(top + 1));
    std::vector<double> a(n_max + 1, 0.0);
    for (std::size_t n = 0; n <= top; ++n) {
        a[n] = rng.uniform(-Mp, Mp);
    }
    return {b, std::move(a)};
}

struct ProbePair
{
    LandauCoefficients F;
    LandauCoefficients G;
};

inline std::vector<ProbePair> ball_probes(const SolverConfig& cfg, std::size_t count, std::uint64_t seed)
{
    std::vector<ProbePair> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        SplitMix64 rng(substream_seed(seed, i));
        LandauCoefficients F = random_ball_element(cfg.b, cfg.n_max, cfg.ball_radius, rng);
        LandauCoefficients G = random_ball_element(cfg.b, cfg.n_max, cfg.ball_radius, rng);
        out.push_back({std::move(F), std::move(G)});
    }
    return out;
}

inline double contraction_over(const FixedPointMap& phi, const std::vector<ProbePair>& probes)
{
    std::vector<double> ratios(probes.size(), 0.0);
    parallel_for(0, probes.size(), [&](std::size_t i) {
        double den = sup_norm(probes[i].F - probes[i].G);
        double num = sup_norm(phi(probes[i].F) - phi(probes[i].G));
        ratios[i] = den > 0.0 ? num / den : 0.0;
    });
    return *std::max_element(ratios.begin(), ratios.end());
}

/// L-hat: max over seeded pairs in the ball of sup|Phi F - Phi G| / sup|F - G|.
inline double estimate_contraction(const SolverConfig& cfg, std::size_t probes, std::uint64_t seed)
{
    require(probes >= 2, "need at least 2 probe pairs");
    validate(cfg);
    return contraction_over(FixedPointMap(cfg), ball_probes(cfg, probes, seed));
}

struct ThresholdScanRow
{
    double lambda = 0.0;
    double contraction = 0.0;
    bool ball_invariant = false;
};

struct ThresholdReport
{
    double lambda0 = 0.0;
    double lambda1 = 0.0;
    std::vector<ThresholdScanRow> scan;
    std::string warning;
};

inline constexpr std::size_t threshold_probe_count = 6;
inline constexpr std::uint64_t threshold_probe_seed = 20240229;

/// lambda0: largest dyadic lambda in [2^-20, 1/2] where L-hat < 1 and
/// Phi maps every probe back into the ball. lambda1: largest dyadic
/// lambda <= lambda0 with 2 lambda ||v||_1 M < plateau half-width.
inline ThresholdReport lambda_threshold_search(const SolverConfig& tmpl,
                                               std::size_t probes = threshold_probe_count,
                                               std::uint64_t seed = threshold_probe_seed)
{
    validate(tmpl);
    ThresholdReport rep;
    std::vector<ProbePair> pairs;
    for (int k = 1; k <= 20; ++k) {
        SolverConfig cfg = tmpl;
        cfg.lambda = std::ldexp(1.0, -k);
        if (pairs.empty()) {
            pairs = ball_probes(cfg, probes, seed);
        }
        FixedPointMap phi(cfg);
        ThresholdScanRow row;
        row.lambda = cfg.lambda;
        row.contraction = contraction_over(phi, pairs);
        row.ball_invariant = true;
        for (const auto& p : pairs) {
            for (const auto* X : {&p.F, &p.G}) {
                if (sup_norm(phi(*X)) > cfg.ball_radius) {
                    row.ball_invariant = false;
                }
            }
        }
        rep.scan.push_back(row);
        if (row.contraction < 1.0 && row.ball_invariant) {
            rep.lambda0 = cfg.lambda;
            break;
        }
    }
    if (rep.lambda0 == 0.0) {
        rep.warning = "no dyadic lambda in [2^-20, 1/2] passed the contraction and ball checks";
        return rep;
    }
    if (auto* si = std::get_if<SmoothedIndicator>(&tmpl.f.kind())) {
        double margin = 2.0 * tmpl.potential.l1_norm() * tmpl.ball_radius;
        for (double lam = rep.lambda0; lam >= std::ldexp(1.0, -20); lam *= 0.5) {
            if (lam * margin < si->plateau_halfwidth) {
                rep.lambda1 = lam;
                break;
            }
        }
        if (rep.lambda1 == 0.0) {
            rep.warning = "no dyadic lambda satisfies the plateau margin";
            rep.lambda0 = 0.0;
        }
    } else {
        rep.warning = "lambda1 requires an indicator f; reported as 0";
    }
    return rep;
}

struct LevelRegion
{
    std::size_t n = 0;
    double e = 0.0;
    bool occupied = false;
    bool ok = false;
};

struct ZeroTempReport
{
    SolverReport solver;
    double lambda1 = 0.0;
    std::vector<LevelRegion> levels;
    double idempotency_defect = 0.0;
    double ids_error = 0.0;
    bool passed = false;
    std::string diagnostic;
};

/// Runs the solver with an indicator f_N and checks the projection
/// property, idempotency, and ids = N b/2pi. A failed check raises
/// VerificationError naming the offending level.
inline ZeroTempReport zero_temp_projection(const SolverConfig& cfg, std::optional<double> lambda1 = std::nullopt)
{
    const auto* si = std::get_if<SmoothedIndicator>(&cfg.f.kind());
    require(si != nullptr, "zero-temperature projection needs an indicator f");
    ZeroTempReport rep;
    rep.lambda1 = lambda1 ? *lambda1 : lambda_threshold_search(cfg).lambda1;
    if (std::fabs(cfg.lambda) > rep.lambda1) {
        std::ostringstream os;
        os << "|lambda| = " << std::fabs(cfg.lambda) << " exceeds lambda1 = " << rep.lambda1;
        throw InvalidArgument(os.str());
    }
    rep.solver = solve_fixed_point(cfg);
    if (!rep.solver.converged) {
        throw ConvergenceError("zero-temperature solve did not converge");
    }
    const double occ_lo = si->t_lo() + si->transition_width;
    const double occ_hi = si->t_hi() - si->transition_width;
    std::ostringstream diag;
    bool levels_ok = true;
    for (std::size_t n = 0; n <= cfg.n_max; ++n) {
        LevelRegion L;
        L.n = n;
        L.e = rep.solver.effective_levels[n];
        L.occupied = n < si->N;
        L.ok = L.occupied ? (L.e >= occ_lo && L.e <= occ_hi) : (L.e <= si->t_lo() || L.e >= si->t_hi());
        if (!L.ok && levels_ok) {
            diag << "level " << n << " (e = " << L.e << ") left its "
                 << (L.occupied ? "plateau" : "zero region") << "; ";
        }
        levels_ok = levels_ok && L.ok;
        rep.levels.push_back(L);
    }
    const auto& A = rep.solver.fixed_point;
    LandauCoefficients A2 = product(A, A);
    for (std::size_t n = 0; n <= cfg.n_max; ++n) {
        rep.idempotency_defect = std::max(rep.idempotency_defect, std::fabs(A2[n] - A[n]));
        rep.idempotency_defect = std::max(rep.idempotency_defect, std::fabs(A[n] - std::round(A[n])));
    }
    double target = static_cast<double>(si->N) * cfg.b / (2.0 * std::numbers::pi);
    rep.ids_error = std::fabs(rep.solver.ids - target);
    if (rep.idempotency_defect > 1e-8) {
        diag << "coefficients not in {0,1}: defect " << rep.idempotency_defect << "; ";
    }
    if (rep.ids_error > 1e-9) {
        diag << "ids off by " << rep.ids_error << "; ";
    }
    rep.passed = levels_ok && rep.idempotency_defect <= 1e-8 && rep.ids_error <= 1e-9;
    rep.diagnostic = diag.str();
    if (!rep.passed) {
        throw VerificationError("zero-temperature projection check failed: " + rep.diagnostic);
    }
    return rep;
}

struct StredaReport
{
    std::vector<double> b_values;
    std::vector<double> ids_values;
    std::vector<bool> converged;
    double slope = 0.0;
    double expected = 0.0;
};

/// ids over b in {b0 - db, b0, b0 + db} at fixed lambda/b with f_N rebuilt
/// for each b; slope by central difference.
inline StredaReport streda_slope(const SolverConfig& tmpl, std::size_t N, double lambda_over_b,
                                 double db = 0.1)
{
    StredaReport rep;
    rep.b_values = {tmpl.b - db, tmpl.b, tmpl.b + db};
    rep.ids_values.assign(3, 0.0);
    std::vector<char> ok(3, 0);
    parallel_for(0, 3, [&](std::size_t i) {
        SolverConfig cfg = tmpl;
        cfg.b = rep.b_values[i];
        cfg.lambda = lambda_over_b * cfg.b;
        cfg.f = ScalarFunction::indicator(N, cfg.b);
        ZeroTempReport z = zero_temp_projection(cfg);
        rep.ids_values[i] = z.solver.ids;
        ok[i] = z.solver.converged ? 1 : 0;
    });
    rep.converged.assign(ok.begin(), ok.end());
    rep.slope = (rep.ids_values[2] - rep.ids_values[0]) / (2.0 * db);
    rep.expected = static_cast<double>(N) / (2.0 * std::numbers::pi);
    return rep;
}

} // namespace lhf
