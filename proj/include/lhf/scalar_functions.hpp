#pragma once

// The scalar function f applied to the effective Hamiltonian: Fermi-Dirac
// or a C^infinity indicator of the lowest N Landau levels, together with
// derivative tables and the almost analytic extension used by the
// Helffer-Sjostrand backend.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "error.hpp"
#include "jet.hpp"

namespace lhf {

// ---------------------------------------------------------------------------
// smoothstep S(u) = s(u)/(s(u)+s(1-u)), s(u) = e^{-1/u} for u > 0

inline double flat_bump(double u) { return u > 0.0 ? std::exp(-1.0 / u) : 0.0; }

inline double smoothstep(double u)
{
    if (u <= 0.0) {
        return 0.0;
    }
    if (u >= 1.0) {
        return 1.0;
    }
    double a = flat_bump(u);
    double b = flat_bump(1.0 - u);
    return a / (a + b);
}

inline Jet flat_bump(const Jet& u)
{
    // e^{-1/u} and all its derivatives underflow once 1/u > 745
    if (u.c[0] <= 1.0 / 745.0) {
        return Jet::constant(0.0, u.order);
    }
    return exp(-1.0 * reciprocal(u));
}

inline Jet smoothstep(const Jet& u)
{
    if (u.c[0] <= 0.0) {
        return Jet::constant(0.0, u.order);
    }
    if (u.c[0] >= 1.0) {
        return Jet::constant(1.0, u.order);
    }
    Jet one = Jet::constant(1.0, u.order);
    Jet a = flat_bump(u);
    Jet b = flat_bump(one - u);
    return a / (a + b);
}

// ---------------------------------------------------------------------------

struct FermiDirac
{
    double beta = 1.0;
    double mu = 0.0;
};

/// Equal to 1 on [E_0 - p, E_{N-1} + p], 0 outside [E_0 - p - w, E_{N-1} + p + w],
/// with E_n = b(2n+1), p the plateau half-width and w the transition width.
struct SmoothedIndicator
{
    std::size_t N = 1;
    double b = 1.0;
    double plateau_halfwidth = 0.5;
    double transition_width = 0.5;

    static SmoothedIndicator with_defaults(std::size_t N, double b)
    {
        return {N, b, 0.5 * b, 0.5 * b};
    }

    double level(std::size_t n) const { return b * (2.0 * static_cast<double>(n) + 1.0); }
    double t_lo() const { return level(0) - plateau_halfwidth - transition_width; }
    double t_hi() const { return level(N - 1) + plateau_halfwidth + transition_width; }
};

class ScalarFunction
{
  public:
    using Kind = std::variant<FermiDirac, SmoothedIndicator>;

    explicit ScalarFunction(Kind kind, std::size_t max_order = 8) : kind_(kind), max_order_(max_order)
    {
        require(max_order_ <= max_jet_order - 1, "maximum derivative order too large");
        if (auto* fd = std::get_if<FermiDirac>(&kind_)) {
            require(fd->beta > 0.0 && std::isfinite(fd->beta), "Fermi-Dirac beta must be > 0");
            require(std::isfinite(fd->mu), "Fermi-Dirac mu must be finite");
            build_fermi_polynomials();
        } else {
            const auto& si = std::get<SmoothedIndicator>(kind_);
            require(si.N >= 1, "indicator needs N >= 1");
            require(si.b > 0.0, "indicator needs b > 0");
            require(si.plateau_halfwidth > 0.0 && si.transition_width > 0.0,
                    "indicator plateau and transition widths must be positive");
            require(2.0 * si.plateau_halfwidth + si.transition_width <= 2.0 * si.b,
                    "indicator transitions must sit inside the spectral gaps (2p + w <= 2b)");
        }
    }

    static ScalarFunction fermi_dirac(double beta, double mu) { return ScalarFunction(FermiDirac{beta, mu}); }

    static ScalarFunction indicator(std::size_t N, double b)
    {
        return ScalarFunction(SmoothedIndicator::with_defaults(N, b));
    }

    const Kind& kind() const { return kind_; }
    std::size_t max_order() const { return max_order_; }
    bool is_indicator() const { return std::holds_alternative<SmoothedIndicator>(kind_); }

    double evaluate(double t) const
    {
        if (auto* fd = std::get_if<FermiDirac>(&kind_)) {
            return fermi(fd->beta * (t - fd->mu)).first;
        }
        const auto& si = std::get<SmoothedIndicator>(kind_);
        double w = si.transition_width;
        return smoothstep((t - si.t_lo()) / w) * smoothstep((si.t_hi() - t) / w);
    }

    double operator()(double t) const { return evaluate(t); }

    /// Taylor jet of f at t up to the given order (may exceed max_order, up to 14).
    Jet jet(double t, std::size_t order) const
    {
        require(order <= max_jet_order - 1, "jet order exceeds the supported maximum");
        if (auto* fd = std::get_if<FermiDirac>(&kind_)) {
            auto [f, g] = fermi(fd->beta * (t - fd->mu));
            Jet j = Jet::constant(f, order);
            double bk = 1.0;
            double fact = 1.0;
            for (std::size_t k = 1; k <= order; ++k) {
                bk *= fd->beta;
                fact *= static_cast<double>(k);
                const auto& q = fermi_q_[k];
                double s = 0.0;
                for (std::size_t i = q.size(); i-- > 0;) {
                    s = s * f + q[i];
                }
                j.c[k] = bk * f * g * s / fact;
            }
            return j;
        }
        const auto& si = std::get<SmoothedIndicator>(kind_);
        double w = si.transition_width;
        Jet lo = smoothstep(Jet::affine((t - si.t_lo()) / w, 1.0 / w, order));
        Jet hi = smoothstep(Jet::affine((si.t_hi() - t) / w, -1.0 / w, order));
        return lo * hi;
    }

    double derivative(std::size_t k, double t) const
    {
        require(k <= max_order_, "derivative order " + std::to_string(k) + " exceeds K = " +
                                     std::to_string(max_order_));
        return jet(t, k).derivative(k);
    }

    /// Point past which <x>^8 f(x) < tol and f keeps decreasing.
    double upper_cutoff(double tol = 1e-14) const
    {
        if (auto* si = std::get_if<SmoothedIndicator>(&kind_)) {
            return si->t_hi();
        }
        const auto& fd = std::get<FermiDirac>(kind_);
        double x = fd.mu + 8.0 / fd.beta;
        double step = 0.25 / fd.beta;
        auto weight = [](double v) { double s = 1.0 + v * v; return s * s * s * s; };
        while (weight(x) * evaluate(x) >= tol) {
            x += step;
        }
        return x;
    }

    /// Intervals where f varies on a scale much shorter than 1; quadrature
    /// places extra nodes there.
    std::vector<std::pair<double, double>> feature_intervals() const
    {
        if (auto* si = std::get_if<SmoothedIndicator>(&kind_)) {
            double w = si->transition_width;
            return {{si->t_lo(), si->t_lo() + w}, {si->t_hi() - w, si->t_hi()}};
        }
        return {};
    }

    std::string name() const { return is_indicator() ? "indicator" : "fermi_dirac"; }

  private:
    // (f, 1-f) at x = beta (t - mu), both computed without cancellation.
    static std::pair<double, double> fermi(double x)
    {
        if (x >= 0.0) {
            double e = std::exp(-x);
            return {e / (1.0 + e), 1.0 / (1.0 + e)};
        }
        double e = std::exp(x);
        return {1.0 / (1.0 + e), e / (1.0 + e)};
    }

    // f^{(k)} = beta^k f (1-f) Q_k(f) with Q_1 = -1 and
    // Q_{k+1}(f) = -d/df [f (1-f) Q_k(f)].
    void build_fermi_polynomials()
    {
        fermi_q_.assign(max_jet_order, {});
        fermi_q_[1] = {-1.0};
        for (std::size_t k = 1; k + 1 < max_jet_order; ++k) {
            const auto& q = fermi_q_[k];
            // p(f) = (f - f^2) q(f)
            std::vector<double> p(q.size() + 2, 0.0);
            for (std::size_t i = 0; i < q.size(); ++i) {
                p[i + 1] += q[i];
                p[i + 2] -= q[i];
            }
            std::vector<double> next(p.size() - 1, 0.0);
            for (std::size_t i = 1; i < p.size(); ++i) {
                next[i - 1] = -static_cast<double>(i) * p[i];
            }
            fermi_q_[k + 1] = std::move(next);
        }
    }

    Kind kind_;
    std::size_t max_order_;
    std::vector<std::vector<double>> fermi_q_;
};

// ---------------------------------------------------------------------------
// almost analytic extension

/// chi(y) = S(2 - |y|): 1 on [-1,1], 0 outside [-2,2].
inline std::pair<double, double> strip_cutoff(double y)
{
    double a = std::fabs(y);
    if (a <= 1.0) {
        return {1.0, 0.0};
    }
    if (a >= 2.0) {
        return {0.0, 0.0};
    }
    Jet j = smoothstep(Jet::affine(2.0 - a, -1.0, 1));
    double d = j.c[1];
    return {j.c[0], y > 0.0 ? d : -d};
}

struct ExtensionValue
{
    std::complex<double> value;
    std::complex<double> dbar;
};

/// Extension value and dbar at x + iy from a Taylor table c_k = g^{(k)}(x)/k!
/// with at least order+2 entries:
///   value = chi(y) sum_{n<=N} (iy)^n/n! g^{(n)}(x)
///   dbar  = 1/2 [chi(y) (iy)^N/N! g^{(N+1)}(x) + i chi'(y) sum_{n<=N} (iy)^n/n! g^{(n)}(x)]
inline ExtensionValue extension_from_jet(const Jet& table, std::size_t order, double y)
{
    auto [chi, dchi] = strip_cutoff(y);
    ExtensionValue out{{0.0, 0.0}, {0.0, 0.0}};
    if (chi == 0.0) {
        return out;
    }
    const std::complex<double> iy(0.0, y);
    std::complex<double> pow(1.0, 0.0); // (iy)^n
    std::complex<double> sum(0.0, 0.0);
    for (std::size_t n = 0; n <= order; ++n) {
        // (iy)^n/n! g^{(n)} = (iy)^n c_n
        sum += pow * table.c[n];
        if (n < order) {
            pow *= iy;
        }
    }
    // (iy)^N/N! g^{(N+1)} = (iy)^N (N+1) c_{N+1}
    std::complex<double> rem = pow * (static_cast<double>(order + 1) * table.c[order + 1]);
    out.value = chi * sum;
    out.dbar = 0.5 * (chi * rem + std::complex<double>(0.0, 1.0) * dchi * sum);
    return out;
}

struct AlmostAnalyticExtension
{
    ScalarFunction base;
    std::size_t order = 3;

    AlmostAnalyticExtension(ScalarFunction f, std::size_t n_ext = 3) : base(std::move(f)), order(n_ext)
    {
        require(order >= 1, "extension order must be >= 1");
        require(order + 1 <= max_jet_order - 1, "extension order too large");
    }

    ExtensionValue operator()(std::complex<double> z) const
    {
        return extension_from_jet(base.jet(z.real(), order + 1), order, z.imag());
    }
};

inline ExtensionValue extension_eval(const AlmostAnalyticExtension& e, std::complex<double> z)
{
    return e(z);
}

} // namespace lhf
