#pragma once

// Quadrature rules: Gauss-Laguerre for radial analysis, a graded trapezoid
// rule on the radius for log-singular integrands, and Gauss-Legendre panels.

#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "error.hpp"
#include "laguerre.hpp"

namespace lhf {

enum class RuleKind { gauss_laguerre, radial_trapezoid };

/// Gauss-Laguerre kind: integrates g(t) e^{-t} dt over (0, inf).
///   sum_k weights[k] g(nodes[k]) = sum_k scaled_weights[k] e^{-nodes[k]} g(nodes[k]).
///   Plain weights underflow to zero for nodes past ~700 (orders above ~180);
///   scaled_weights = w_k e^{t_k} stay representable and are what callers use.
/// Radial trapezoid kind: integrates g(r) dr over (0, R]; nodes are radii.
struct QuadratureRule
{
    RuleKind kind = RuleKind::gauss_laguerre;
    std::vector<double> nodes;
    std::vector<double> weights;
    std::vector<double> scaled_weights;
    std::vector<double> log_weights;

    std::size_t order() const { return nodes.size(); }
};

inline constexpr std::size_t max_gauss_laguerre_order = 512;

inline QuadratureRule gauss_laguerre_rule(std::size_t m)
{
    require(m >= 1, "Gauss-Laguerre order must be >= 1");
    if (m > max_gauss_laguerre_order) {
        throw ConvergenceError("Gauss-Laguerre order " + std::to_string(m) +
                               " is beyond the supported cap of " +
                               std::to_string(max_gauss_laguerre_order));
    }
    // Golub-Welsch starting values: Jacobi matrix with diagonal 2k+1 and
    // off-diagonal k, then Newton polish on the scaled polynomial.
    Eigen::VectorXd diag(m);
    Eigen::VectorXd off(m > 1 ? m - 1 : 1);
    for (std::size_t k = 0; k < m; ++k) {
        diag(static_cast<Eigen::Index>(k)) = 2.0 * static_cast<double>(k) + 1.0;
        if (k + 1 < m) {
            off(static_cast<Eigen::Index>(k)) = static_cast<double>(k + 1);
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
    if (m > 1) {
        eig.computeFromTridiagonal(diag, off.head(static_cast<Eigen::Index>(m - 1)),
                                   Eigen::EigenvaluesOnly);
    }

    QuadratureRule rule;
    rule.kind = RuleKind::gauss_laguerre;
    rule.nodes.resize(m);
    rule.weights.resize(m);
    rule.scaled_weights.resize(m);
    rule.log_weights.resize(m);
    const double md = static_cast<double>(m);
    std::vector<double> buf(m + 1);
    for (std::size_t k = 0; k < m; ++k) {
        double t = m > 1 ? eig.eigenvalues()(static_cast<Eigen::Index>(k)) : 1.0;
        // Newton stalls at the rounding floor of the recurrence (relative
        // ~1e-12 near the smallest nodes of high orders); accept that.
        double last = 0.0;
        for (int it = 0; it < 60; ++it) {
            laguerre_scaled_all(t, std::span<double>(buf.data(), m + 1));
            double lm = buf[m];
            double lm1 = buf[m - 1];
            last = t * lm / (md * (lm - lm1));
            t -= last;
            if (std::fabs(last) <= 1e-13 * t) {
                break;
            }
        }
        if (!(std::fabs(last) <= 1e-10 * t) || !(t > 0.0)) {
            throw ConvergenceError("Gauss-Laguerre Newton refinement failed at order " +
                                   std::to_string(m));
        }
        laguerre_scaled_all(t, std::span<double>(buf.data(), m + 1));
        // At a root of L_m: L_{m+1} = -m L_{m-1}/(m+1), so
        // w e^{t} = t / ((m+1) S_{m+1})^2 = t / (m S_{m-1})^2.
        double s = md * buf[m - 1];
        double scaled = t / (s * s);
        rule.nodes[k] = t;
        rule.scaled_weights[k] = scaled;
        rule.log_weights[k] = std::log(scaled) - t;
        rule.weights[k] = std::exp(rule.log_weights[k]);
    }
    for (std::size_t k = 1; k < m; ++k) {
        if (!(rule.nodes[k] > rule.nodes[k - 1])) {
            throw ConvergenceError("Gauss-Laguerre nodes not strictly increasing at order " +
                                   std::to_string(m));
        }
    }
    return rule;
}

/// Trapezoid rule in s = sqrt(r/R) on (0, R]: r_k = R (k/K)^2, which grades
/// the mesh quadratically toward r = 0 where log-singular integrands live.
inline QuadratureRule radial_trapezoid_rule(double R, std::size_t K)
{
    require(R > 0.0, "radial trapezoid extent must be positive");
    require(K >= 2, "radial trapezoid needs at least 2 intervals");
    QuadratureRule rule;
    rule.kind = RuleKind::radial_trapezoid;
    rule.nodes.resize(K);
    rule.weights.resize(K);
    const double kd = static_cast<double>(K);
    for (std::size_t k = 1; k <= K; ++k) {
        double s = static_cast<double>(k) / kd;
        double w = 2.0 * R * s / kd;
        if (k == K) {
            w *= 0.5;
        }
        rule.nodes[k - 1] = R * s * s;
        rule.weights[k - 1] = w;
    }
    rule.scaled_weights = rule.weights;
    rule.log_weights.resize(K);
    for (std::size_t k = 0; k < K; ++k) {
        rule.log_weights[k] = std::log(rule.weights[k]);
    }
    return rule;
}

/// Radius beyond which every cell F_n with n <= n_max is below 1e-18 (b/2pi).
inline double cell_extent(std::size_t n_max, double b)
{
    detail::check_level(n_max);
    double t = 4.0 * static_cast<double>(n_max) + 2.0;
    while (std::fabs(laguerre_scaled(n_max, t)) > 1e-18) {
        t += 2.0;
    }
    return std::sqrt(2.0 * t / b);
}

/// Default trapezoid rule covering the support of the first n_max+1 cells.
inline QuadratureRule default_radial_rule(std::size_t n_max, double b)
{
    return radial_trapezoid_rule(cell_extent(n_max, b), 64 * (n_max + 16));
}

struct GaussLegendre
{
    std::vector<double> nodes;   // on [-1, 1], increasing
    std::vector<double> weights;
};

inline GaussLegendre gauss_legendre(std::size_t n)
{
    require(n >= 1, "Gauss-Legendre order must be >= 1");
    GaussLegendre gl;
    gl.nodes.resize(n);
    gl.weights.resize(n);
    const double nd = static_cast<double>(n);
    for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (nd + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0;
            double p1 = x;
            for (std::size_t k = 2; k <= n; ++k) {
                double kd = static_cast<double>(k);
                double p2 = ((2.0 * kd - 1.0) * x * p1 - (kd - 1.0) * p0) / kd;
                p0 = p1;
                p1 = p2;
            }
            dp = nd * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::fabs(dx) < 1e-16) {
                break;
            }
        }
        // recompute derivative at the polished root
        double p0 = 1.0;
        double p1 = x;
        for (std::size_t k = 2; k <= n; ++k) {
            double kd = static_cast<double>(k);
            double p2 = ((2.0 * kd - 1.0) * x * p1 - (kd - 1.0) * p0) / kd;
            p0 = p1;
            p1 = p2;
        }
        dp = nd * (x * p1 - p0) / (x * x - 1.0);
        double w = 2.0 / ((1.0 - x * x) * dp * dp);
        gl.nodes[i] = -x;
        gl.nodes[n - 1 - i] = x;
        gl.weights[i] = w;
        gl.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) {
        gl.nodes[n / 2] = 0.0;
    }
    return gl;
}

/// Nodes/weights of a composite Gauss-Legendre rule over the given breakpoints.
struct PanelRule
{
    std::vector<double> nodes;
    std::vector<double> weights;
};

inline void append_panel(PanelRule& out, const GaussLegendre& gl, double a, double b)
{
    double half = 0.5 * (b - a);
    double mid = 0.5 * (a + b);
    for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
        out.nodes.push_back(mid + half * gl.nodes[i]);
        out.weights.push_back(half * gl.weights[i]);
    }
}

inline PanelRule composite_gauss_legendre(const std::vector<double>& breaks, std::size_t order)
{
    GaussLegendre gl = gauss_legendre(order);
    PanelRule out;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        append_panel(out, gl, breaks[i], breaks[i + 1]);
    }
    return out;
}

} // namespace lhf
