#pragma once

// Helffer-Sjostrand functional calculus on the Landau-diagonal
// representation, free resolvent kernels, and the Neumann-series check.
//
// Sign: with z = x + iy and g~ an almost analytic extension of g,
//   g(e) = (1/pi) int int dbar g~(z) / (e - z) dx dy,
// which is Cauchy-Pompeiu applied to g~ on the strip. Writing the resolvent
// as (T - z)^{-1} this carries a plus sign.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "error.hpp"
#include "hf_solver.hpp"
#include "jet.hpp"
#include "parallel.hpp"
#include "quadrature.hpp"
#include "radial_algebra.hpp"
#include "scalar_functions.hpp"

namespace lhf {

enum class StripRule { gauss_legendre, midpoint };

/// Tensor quadrature on [x_lo, x_hi] x [-2, 2].
///
/// Gauss-Legendre layout: x panels of width <= x_panel_width with
/// x_nodes each (feature_nodes inside feature intervals of f); in y,
/// y_inner_nodes on [0,1] and y_outer_nodes on [1,2] per side (the
/// cutoff chi turns off on [1,2] and needs the finer rule). Panels
/// containing a level are graded geometrically toward it when
/// refine_levels is set.
///
/// Midpoint layout: x_count x y_count uniform cells.
///
/// x_lo / x_hi left as NaN are chosen per call: x_lo = min(e) - 7.5,
/// x_hi from the decay of f.
struct StripQuadrature
{
    StripRule rule = StripRule::gauss_legendre;
    double x_lo = std::numeric_limits<double>::quiet_NaN();
    double x_hi = std::numeric_limits<double>::quiet_NaN();
    double x_panel_width = 0.75;
    std::size_t x_nodes = 8;
    std::size_t feature_nodes = 64;
    std::size_t y_inner_nodes = 32;
    std::size_t y_outer_nodes = 32;
    bool refine_levels = true;
    std::size_t refine_depth = 14;
    std::size_t x_count = 0;
    std::size_t y_count = 0;

    static StripQuadrature midpoint(std::size_t nx, std::size_t ny)
    {
        StripQuadrature q;
        q.rule = StripRule::midpoint;
        q.x_count = nx;
        q.y_count = ny;
        q.refine_levels = false;
        return q;
    }

    /// Total node count for a strip of the given width (without refinement).
    std::size_t node_count(double width) const
    {
        if (rule == StripRule::midpoint) {
            return x_count * y_count;
        }
        std::size_t nx = static_cast<std::size_t>(std::ceil(width / x_panel_width)) * x_nodes;
        return nx * 2 * (y_inner_nodes + y_outer_nodes);
    }
};

/// Derivative table provider: jet(x, order) -> Taylor coefficients of g at x.
struct StripFunction
{
    std::function<Jet(double, std::size_t)> jet;
    double upper_cutoff = 0.0;
    std::vector<std::pair<double, double>> features;
};

inline StripFunction strip_function(const ScalarFunction& f)
{
    return {[f](double x, std::size_t k) { return f.jet(x, k); }, f.upper_cutoff(1e-14),
            f.feature_intervals()};
}

namespace detail {

struct Panel
{
    double a;
    double b;
    std::size_t nodes;
};

struct Node
{
    double x;
    double w;
};

/// Lower cutoff h(x) = erfc(-(x-c)/s)/2 as a jet. It is 1 to double
/// precision a few s above c and removes the Fermi-Dirac plateau at -inf.
inline Jet lower_cutoff_jet(double x, double c, double s, std::size_t order)
{
    double u = (x - c) / s;
    Jet j = Jet::constant(0.5 * std::erfc(-u), order);
    if (order == 0) {
        return j;
    }
    // d^k/dx^k h = (1/(s sqrt(pi))) (-1)^{k-1} H_{k-1}(u) e^{-u^2} / s^{k-1}
    double g = std::exp(-u * u) / (s * std::sqrt(std::numbers::pi));
    double hm1 = 0.0;
    double h0 = 1.0; // H_0
    double fact = 1.0;
    double sp = 1.0;
    for (std::size_t k = 1; k <= order; ++k) {
        std::size_t m = k - 1; // Hermite index
        if (m >= 1) {
            double next = 2.0 * u * h0 - 2.0 * static_cast<double>(m - 1) * hm1;
            hm1 = h0;
            h0 = next;
        }
        fact *= static_cast<double>(k);
        double sign = (m % 2 == 0) ? 1.0 : -1.0;
        j.c[k] = sign * h0 * g / sp / fact;
        sp *= s;
    }
    return j;
}

inline std::vector<Node> panel_nodes(const Panel& p, const std::vector<GaussLegendre>& rules)
{
    const GaussLegendre& gl = rules[p.nodes];
    std::vector<Node> out;
    double half = 0.5 * (p.b - p.a);
    double mid = 0.5 * (p.a + p.b);
    for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
        out.push_back({mid + half * gl.nodes[i], half * gl.weights[i]});
    }
    return out;
}

/// Geometric grading of [a, b] toward the point e (an endpoint).
inline std::vector<Panel> graded_toward(double a, double b, double e, std::size_t nodes, std::size_t depth)
{
    std::vector<Panel> out;
    double len = b - a;
    if (len <= 0.0) {
        return out;
    }
    bool toward_right = (e == b);
    std::vector<double> br;
    for (std::size_t k = 0; k <= depth; ++k) {
        double d = len * std::ldexp(1.0, -static_cast<int>(k));
        br.push_back(toward_right ? b - d : a + d);
    }
    br.push_back(e);
    for (std::size_t i = 0; i + 1 < br.size(); ++i) {
        double lo = std::min(br[i], br[i + 1]);
        double hi = std::max(br[i], br[i + 1]);
        out.push_back({lo, hi, nodes});
    }
    return out;
}

} // namespace detail

struct StripLayout
{
    double x_lo = 0.0;
    double x_hi = 0.0;
    double cutoff_center = 0.0;
    double cutoff_scale = 0.5;
};

/// Helffer-Sjostrand evaluation of g(e_n) for each level, g = h f with the
/// lower cutoff h. If probe_tol is set, the level where f is most sensitive
/// is compared against the direct value and a ConvergenceError suggests a
/// finer strip when it is missed.
inline std::vector<double> hs_apply_diag(const StripFunction& f, const std::vector<double>& e,
                                         const StripQuadrature& q, std::size_t n_ext,
                                         std::optional<double> probe_tol = std::nullopt)
{
    require(n_ext >= 1 && n_ext + 1 <= max_jet_order - 1, "extension order out of range");
    std::vector<double> out(e.size(), 0.0);
    if (e.empty()) {
        return out;
    }
    for (double v : e) {
        require(std::isfinite(v), "levels must be finite reals");
    }
    double e_min = *std::min_element(e.begin(), e.end());
    StripLayout lay;
    lay.x_lo = std::isnan(q.x_lo) ? e_min - 7.5 : q.x_lo;
    lay.x_hi = std::isnan(q.x_hi) ? f.upper_cutoff : q.x_hi;
    require(lay.x_lo <= e_min - 5.0, "strip must start at least 5 below the lowest level");
    require(lay.x_hi > lay.x_lo, "strip x-range is empty");
    lay.cutoff_center = e_min - 4.0;

    auto table = [&](double x) {
        Jet g = f.jet(x, n_ext + 1);
        Jet h = detail::lower_cutoff_jet(x, lay.cutoff_center, lay.cutoff_scale, n_ext + 1);
        return g * h;
    };

    // y nodes (both half-strips)
    std::vector<detail::Node> ynodes;
    std::vector<detail::Panel> xpanels;
    std::vector<GaussLegendre> rules;
    auto rule_for = [&](std::size_t n) -> const GaussLegendre& {
        require(n >= 1, "quadrature node counts must be >= 1");
        if (rules.size() <= n) {
            rules.resize(n + 1);
        }
        if (rules[n].nodes.empty()) {
            rules[n] = gauss_legendre(n);
        }
        return rules[n];
    };
    if (q.rule == StripRule::midpoint) {
        require(q.x_count >= 1 && q.y_count >= 1, "midpoint strip needs node counts");
        double hy = 4.0 / static_cast<double>(q.y_count);
        for (std::size_t j = 0; j < q.y_count; ++j) {
            ynodes.push_back({-2.0 + hy * (static_cast<double>(j) + 0.5), hy});
        }
    } else {
        for (auto [lo, hi, n] : {std::tuple{0.0, 1.0, q.y_inner_nodes}, std::tuple{1.0, 2.0, q.y_outer_nodes}}) {
            const GaussLegendre& gl = rule_for(n);
            for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
                double y = lo + 0.5 * (hi - lo) * (gl.nodes[i] + 1.0);
                double w = 0.5 * (hi - lo) * gl.weights[i];
                ynodes.push_back({y, w});
                ynodes.push_back({-y, w});
            }
        }
        // x panels: split at feature interval ends, then by width
        std::vector<std::pair<double, double>> feats;
        for (auto [a, b] : f.features) {
            a = std::max(a, lay.x_lo);
            b = std::min(b, lay.x_hi);
            if (b > a) {
                feats.emplace_back(a, b);
            }
        }
        std::vector<double> br{lay.x_lo, lay.x_hi};
        for (auto [a, b] : feats) {
            br.push_back(a);
            br.push_back(b);
        }
        std::sort(br.begin(), br.end());
        br.erase(std::unique(br.begin(), br.end()), br.end());
        for (std::size_t i = 0; i + 1 < br.size(); ++i) {
            double a = br[i];
            double b = br[i + 1];
            double mid = 0.5 * (a + b);
            bool feature = std::any_of(feats.begin(), feats.end(),
                                       [&](auto& iv) { return mid > iv.first && mid < iv.second; });
            std::size_t nodes = feature ? q.feature_nodes : q.x_nodes;
            std::size_t count = static_cast<std::size_t>(std::ceil((b - a) / q.x_panel_width - 1e-12));
            count = std::max<std::size_t>(count, 1);
            for (std::size_t p = 0; p < count; ++p) {
                double lo = a + (b - a) * static_cast<double>(p) / static_cast<double>(count);
                double hi = a + (b - a) * static_cast<double>(p + 1) / static_cast<double>(count);
                xpanels.push_back({lo, hi, nodes});
            }
        }
        for (const auto& p : xpanels) {
            rule_for(p.nodes);
        }
    }

    // weighted dbar on a column of y nodes at abscissa x
    auto column = [&](double x, double wx, std::vector<std::complex<double>>& col) {
        Jet g = table(x);
        col.resize(ynodes.size());
        for (std::size_t j = 0; j < ynodes.size(); ++j) {
            ExtensionValue ev = extension_from_jet(g, n_ext, ynodes[j].x);
            col[j] = wx * ynodes[j].w * ev.dbar;
        }
    };

    // base x nodes with their dbar columns
    std::vector<detail::Node> xnodes;
    std::vector<std::size_t> panel_start;
    if (q.rule == StripRule::midpoint) {
        double hx = (lay.x_hi - lay.x_lo) / static_cast<double>(q.x_count);
        for (std::size_t i = 0; i < q.x_count; ++i) {
            xnodes.push_back({lay.x_lo + hx * (static_cast<double>(i) + 0.5), hx});
        }
    } else {
        for (const auto& p : xpanels) {
            panel_start.push_back(xnodes.size());
            for (auto nd : detail::panel_nodes(p, rules)) {
                xnodes.push_back(nd);
            }
        }
        panel_start.push_back(xnodes.size());
    }
    std::vector<std::vector<std::complex<double>>> columns(xnodes.size());
    parallel_for(0, xnodes.size(), [&](std::size_t i) { column(xnodes[i].x, xnodes[i].w, columns[i]); });

    auto accumulate = [&](double ev, double x, const std::vector<std::complex<double>>& col) {
        std::complex<double> s(0.0, 0.0);
        for (std::size_t j = 0; j < ynodes.size(); ++j) {
            s += col[j] / std::complex<double>(ev - x, -ynodes[j].x);
        }
        return s;
    };

    parallel_for(0, e.size(), [&](std::size_t n) {
        double ev = e[n];
        std::complex<double> total(0.0, 0.0);
        if (q.rule == StripRule::midpoint) {
            for (std::size_t i = 0; i < xnodes.size(); ++i) {
                total += accumulate(ev, xnodes[i].x, columns[i]);
            }
        } else {
            std::vector<std::complex<double>> col;
            for (std::size_t pi = 0; pi < xpanels.size(); ++pi) {
                const auto& p = xpanels[pi];
                if (q.refine_levels && ev >= p.a && ev <= p.b) {
                    auto sub = detail::graded_toward(p.a, ev, ev, p.nodes, q.refine_depth);
                    auto right = detail::graded_toward(ev, p.b, ev, p.nodes, q.refine_depth);
                    sub.insert(sub.end(), right.begin(), right.end());
                    for (const auto& sp : sub) {
                        for (auto nd : detail::panel_nodes(sp, rules)) {
                            column(nd.x, nd.w, col);
                            total += accumulate(ev, nd.x, col);
                        }
                    }
                    continue;
                }
                for (std::size_t i = panel_start[pi]; i < panel_start[pi + 1]; ++i) {
                    total += accumulate(ev, xnodes[i].x, columns[i]);
                }
            }
        }
        out[n] = total.real() / std::numbers::pi;
    });

    if (probe_tol) {
        std::size_t probe = 0;
        double best = -1.0;
        for (std::size_t n = 0; n < e.size(); ++n) {
            double s = std::fabs(f.jet(e[n], 1).c[1]);
            if (s > best) {
                best = s;
                probe = n;
            }
        }
        double direct = f.jet(e[probe], 0).c[0];
        double miss = std::fabs(out[probe] - direct);
        if (miss > *probe_tol) {
            std::ostringstream os;
            os << "Helffer-Sjostrand quadrature misses f at probe level e = " << e[probe] << " by " << miss
               << " (tolerance " << *probe_tol << "); refine the strip quadrature";
            throw ConvergenceError(os.str());
        }
    }
    return out;
}

inline std::vector<double> hs_apply_diag(const ScalarFunction& f, const std::vector<double>& e,
                                         const StripQuadrature& q = {}, std::size_t n_ext = 3,
                                         std::optional<double> probe_tol = std::nullopt)
{
    return hs_apply_diag(strip_function(f), e, q, n_ext, probe_tol);
}

// ---------------------------------------------------------------------------
// resolvents

inline double distance_to_landau_levels(std::complex<double> z, double b)
{
    double k = std::max(0.0, std::round((z.real() / b - 1.0) / 2.0));
    double d = std::abs(z - landau_level(static_cast<std::size_t>(k), b));
    if (k > 0.0) {
        d = std::min(d, std::abs(z - landau_level(static_cast<std::size_t>(k) - 1, b)));
    }
    return std::min(d, std::abs(z - landau_level(static_cast<std::size_t>(k) + 1, b)));
}

struct ResolventKernelValue
{
    std::complex<double> value;
    double tail_bound = 0.0;
};

/// Partial sums probe the slow convergence, so they run past the Laguerre cap.
inline constexpr std::size_t max_resolvent_level = 4096;

/// G_z(r) = sum_{n <= n_max} F_n(r) / (E_n - z). Partial sums converge
/// slowly for r > 0 (error ~ n_max^{-3/4}) and diverge like
/// (1/4pi) ln n_max at r = 0.
inline ResolventKernelValue free_resolvent_kernel(std::complex<double> z, double r, double b, std::size_t n_max)
{
    require(b > 0.0, "b must be positive");
    require(r >= 0.0, "radius must be non-negative");
    if (distance_to_landau_levels(z, b) < 1e-8) {
        throw InvalidArgument("z lies within 1e-8 of a Landau level");
    }
    require(n_max <= max_resolvent_level, "resolvent partial sums are capped at 4096 levels");
    std::vector<double> buf(n_max + 1);
    detail::laguerre_scaled_unchecked(0.5 * b * r * r, buf);
    for (auto& v : buf) {
        v *= b / (2.0 * std::numbers::pi);
    }
    ResolventKernelValue out{{0.0, 0.0}, 0.0};
    for (std::size_t n = 0; n <= n_max; ++n) {
        out.value += buf[n] / (landau_level(n, b) - z);
    }
    out.tail_bound = b / (2.0 * std::numbers::pi) / std::abs(landau_level(n_max, b) - z);
    return out;
}

/// Infinite-level limit of G_z(r) for Re z < b, r > 0, from the Laplace
/// transform of the Mehler heat kernel:
///   G_z(r) = int_0^inf e^{tau z} b/(4 pi sinh(b tau)) exp(-(b r^2/4) coth(b tau)) dtau.
inline std::complex<double> free_resolvent_kernel_limit(std::complex<double> z, double r, double b)
{
    require(b > 0.0, "b must be positive");
    require(r > 0.0, "the limit kernel is singular at r = 0");
    require(z.real() < b, "the Laplace representation needs Re z < b");
    double gap = b - z.real();
    double tau_max = 45.0 / gap;
    double scale = std::max(r * r, 1e-6);
    std::vector<double> br;
    for (int k = 40; k >= 0; --k) {
        br.push_back(std::ldexp(scale, -k));
    }
    double width = std::min(0.25, 0.5 / std::max(1.0, std::fabs(z.imag())));
    for (double t = br.back() + width; t < tau_max; t += width) {
        br.push_back(t);
    }
    br.push_back(std::max(tau_max, br.back() + width));
    auto run = [&](std::size_t order) {
        PanelRule rule = composite_gauss_legendre(br, order);
        std::complex<double> s(0.0, 0.0);
        for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
            double tau = rule.nodes[k];
            double bt = b * tau;
            double em = std::exp(-2.0 * bt);
            double coth = (1.0 + em) / (1.0 - em);
            double pre = b / (2.0 * std::numbers::pi) / (1.0 - em);
            double expo = -0.25 * b * r * r * coth;
            s += rule.weights[k] * pre * std::exp(tau * (z - b) + expo);
        }
        return s;
    };
    std::complex<double> a = run(16);
    std::complex<double> c = run(24);
    if (std::abs(a - c) > 1e-12 * std::max(1e-3, std::abs(c))) {
        throw ConvergenceError("Mehler-kernel quadrature did not settle");
    }
    return c;
}

/// Complex kernel synthesis from complex Landau coefficients.
inline std::vector<std::complex<double>> synthesize_complex(double b, const std::vector<std::complex<double>>& a,
                                                            std::span<const double> radii)
{
    std::vector<std::complex<double>> out(radii.size());
    std::vector<double> buf(a.size());
    for (std::size_t i = 0; i < radii.size(); ++i) {
        cells_all(radii[i], b, buf);
        std::complex<double> s(0.0, 0.0);
        for (std::size_t n = 0; n < a.size(); ++n) {
            s += a[n] * buf[n];
        }
        out[i] = s;
    }
    return out;
}

/// Neumann partial sum R0 sum_{k<=K} (-lambda W R0)^k in the diagonal algebra.
inline std::vector<std::complex<double>> neumann_partial(std::complex<double> z, double lambda,
                                                         const LandauCoefficients& W, std::size_t K)
{
    std::vector<std::complex<double>> out(W.size());
    for (std::size_t n = 0; n < W.size(); ++n) {
        std::complex<double> r0 = 1.0 / (landau_level(n, W.b()) - z);
        std::complex<double> q = -lambda * W[n] * r0;
        std::complex<double> term = r0;
        std::complex<double> s = term;
        for (std::size_t k = 1; k <= K; ++k) {
            term *= q;
            s += term;
        }
        out[n] = s;
    }
    return out;
}

struct NeumannReport
{
    double rho = 0.0;
    std::size_t terms = 0;
    double op_discrepancy = 0.0;
    double kernel_discrepancy = 0.0;
    double tail_bound = 0.0;
    double r0_norm = 0.0;
};

/// Resolvent of H_b + lambda W two ways: 1/(e_n - z) directly and the
/// K-term Neumann series. Requires rho = |lambda| ||W|| ||R0|| < 0.9.
inline NeumannReport resolvent_neumann_check(std::complex<double> z, double lambda, const LandauCoefficients& W,
                                             std::span<const double> radii, std::size_t K = 12)
{
    const double b = W.b();
    if (distance_to_landau_levels(z, b) < 1e-8) {
        throw InvalidArgument("z lies within 1e-8 of a Landau level");
    }
    NeumannReport rep;
    for (std::size_t n = 0; n < W.size(); ++n) {
        rep.r0_norm = std::max(rep.r0_norm, 1.0 / std::abs(landau_level(n, b) - z));
    }
    rep.rho = std::fabs(lambda) * op_norm(W) * rep.r0_norm;
    if (!(rep.rho < 0.9)) {
        std::ostringstream os;
        os << "Neumann series margin violated: rho = " << rep.rho << " >= 0.9";
        throw InvalidArgument(os.str());
    }
    rep.terms = K;
    std::vector<std::complex<double>> series = neumann_partial(z, lambda, W, K);
    std::vector<std::complex<double>> diff(W.size());
    for (std::size_t n = 0; n < W.size(); ++n) {
        std::complex<double> exact = 1.0 / (landau_level(n, b) + lambda * W[n] - z);
        diff[n] = exact - series[n];
        rep.op_discrepancy = std::max(rep.op_discrepancy, std::abs(diff[n]));
    }
    for (auto v : synthesize_complex(b, diff, radii)) {
        rep.kernel_discrepancy = std::max(rep.kernel_discrepancy, std::abs(v));
    }
    rep.tail_bound = std::pow(rep.rho, static_cast<double>(K + 1)) / (1.0 - rep.rho) * rep.r0_norm;
    return rep;
}

// ---------------------------------------------------------------------------
// two-path cross validation

struct CrossValidationRow
{
    std::size_t n = 0;
    double e = 0.0;
    double direct = 0.0;
    double hs = 0.0;
};

struct CrossValidationReport
{
    double max_discrepancy = 0.0;
    double tol = 0.0;
    bool passed = false;
    std::vector<CrossValidationRow> rows;
    std::string diagnostic;
};

/// phi_map(F) against Helffer-Sjostrand on the effective levels of F.
inline CrossValidationReport hs_cross_validate(const SolverConfig& cfg, const LandauCoefficients& F, double tol,
                                               const StripQuadrature& q = {}, std::size_t n_ext = 3)
{
    CrossValidationReport rep;
    rep.tol = tol;
    FixedPointMap phi(cfg);
    std::vector<double> e = phi.levels(F);
    LandauCoefficients direct = phi(F);
    std::vector<double> hs = hs_apply_diag(cfg.f, e, q, n_ext);
    for (std::size_t n = 0; n < e.size(); ++n) {
        rep.rows.push_back({n, e[n], direct[n], hs[n]});
        double d = std::fabs(direct[n] - hs[n]);
        if (!(d <= rep.max_discrepancy)) {
            rep.max_discrepancy = std::isnan(d) ? std::numeric_limits<double>::infinity() : std::max(rep.max_discrepancy, d);
        }
    }
    rep.passed = rep.max_discrepancy <= tol;
    if (!rep.passed) {
        std::ostringstream os;
        double width = (std::isnan(q.x_hi) ? cfg.f.upper_cutoff() : q.x_hi) -
                       (std::isnan(q.x_lo) ? *std::min_element(e.begin(), e.end()) - 7.5 : q.x_lo);
        os << "max discrepancy " << rep.max_discrepancy << " exceeds " << tol << " with "
           << q.node_count(width) << " strip nodes; the strip quadrature is too coarse";
        rep.diagnostic = os.str();
    }
    return rep;
}

} // namespace lhf
