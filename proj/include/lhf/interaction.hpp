#pragma once

// Radial two-body potentials and the Hartree + exchange effective potential
// W_F = c F(0) Id + Z_F, with Z_F the operator whose reduced kernel is -v F.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <variant>
#include <vector>

#include "error.hpp"
#include "quadrature.hpp"
#include "radial_algebra.hpp"

namespace lhf {

/// e^{-alpha r} ln r
struct ScreenedCoulomb
{
    double alpha = 1.0;
};

/// e^{-r^2/sigma^2}
struct GaussianPotential
{
    double sigma = 1.0;
};

/// e^{-alpha r}
struct ExponentialPotential
{
    double alpha = 1.0;
};

/// v = 0; decouples the self-consistency.
struct ZeroPotential
{
};

using PotentialModel =
    std::variant<ScreenedCoulomb, GaussianPotential, ExponentialPotential, ZeroPotential>;

inline constexpr std::size_t potential_moment_count = 9;

class Potential
{
  public:
    explicit Potential(PotentialModel model) : model_(model)
    {
        std::visit(
            [](const auto& m) {
                using M = std::decay_t<decltype(m)>;
                if constexpr (std::is_same_v<M, GaussianPotential>) {
                    require(m.sigma > 0.0 && std::isfinite(m.sigma), "Gaussian sigma must be > 0");
                } else if constexpr (!std::is_same_v<M, ZeroPotential>) {
                    require(m.alpha > 0.0 && std::isfinite(m.alpha), "alpha must be > 0");
                }
            },
            model_);
        integrate();
    }

    static Potential screened_coulomb(double alpha) { return Potential(ScreenedCoulomb{alpha}); }
    static Potential gaussian(double sigma) { return Potential(GaussianPotential{sigma}); }
    static Potential exponential(double alpha) { return Potential(ExponentialPotential{alpha}); }
    static Potential zero() { return Potential(ZeroPotential{}); }

    const PotentialModel& model() const { return model_; }

    std::string name() const
    {
        switch (model_.index()) {
            case 0: return "screened_coulomb";
            case 1: return "gaussian";
            case 2: return "exponential";
            default: return "zero";
        }
    }

    bool is_zero() const { return std::holds_alternative<ZeroPotential>(model_); }

    /// Log singularity at the origin; analysis must avoid Gauss-Laguerre.
    bool singular_at_origin() const { return std::holds_alternative<ScreenedCoulomb>(model_); }

    double value(double r) const
    {
        return std::visit(
            [r](const auto& m) -> double {
                using M = std::decay_t<decltype(m)>;
                if constexpr (std::is_same_v<M, ScreenedCoulomb>) {
                    if (!(r > 0.0)) {
                        throw InvalidArgument(
                            "screened Coulomb potential is -infinity at r = 0; integrate, do not "
                            "evaluate there");
                    }
                    return std::exp(-m.alpha * r) * std::log(r);
                } else if constexpr (std::is_same_v<M, GaussianPotential>) {
                    return std::exp(-(r * r) / (m.sigma * m.sigma));
                } else if constexpr (std::is_same_v<M, ExponentialPotential>) {
                    return std::exp(-m.alpha * r);
                } else {
                    return 0.0;
                }
            },
            model_);
    }

    double operator()(double r) const { return value(r); }

    /// c = int_{R^2} v.
    double integral() const { return c_; }

    /// ||v||_{L^1} = int |v|.
    double l1_norm() const { return moments_[0]; }

    /// int <x>^n |v| for n <= 8.
    double moment(std::size_t n) const
    {
        require(n < potential_moment_count, "moments are cached for n <= 8");
        return moments_[n];
    }

  private:
    // Breakpoints: geometric toward 0 below the length scale l (60 halvings),
    // uniform panels of width l/2 beyond it, a break at r = 1 where ln r
    // changes sign, and an outer radius where every moment integrand is dead.
    std::vector<double> breakpoints() const
    {
        double ell = 1.0;
        double outer = 1.0;
        std::visit(
            [&](const auto& m) {
                using M = std::decay_t<decltype(m)>;
                if constexpr (std::is_same_v<M, GaussianPotential>) {
                    ell = m.sigma;
                    outer = 14.0 * m.sigma;
                } else if constexpr (!std::is_same_v<M, ZeroPotential>) {
                    ell = 1.0 / m.alpha;
                    outer = 130.0 / m.alpha;
                }
            },
            model_);
        std::vector<double> br;
        for (int k = 60; k >= 1; --k) {
            br.push_back(std::ldexp(ell, -k));
        }
        std::size_t steps = static_cast<std::size_t>(std::ceil(2.0 * (outer - ell) / ell));
        for (std::size_t i = 0; i <= steps; ++i) {
            br.push_back(ell + (outer - ell) * static_cast<double>(i) / static_cast<double>(steps));
        }
        if (singular_at_origin() && 1.0 > br.front() && 1.0 < br.back()) {
            br.push_back(1.0);
        }
        std::sort(br.begin(), br.end());
        br.erase(std::unique(br.begin(), br.end(),
                             [](double a, double b) { return std::fabs(a - b) <= 1e-14 * b; }),
                 br.end());
        return br;
    }

    void integrate()
    {
        if (is_zero()) {
            c_ = 0.0;
            moments_.fill(0.0);
            return;
        }
        std::vector<double> br = breakpoints();
        auto run = [&](std::size_t order, double& c, std::array<double, potential_moment_count>& mom) {
            PanelRule rule = composite_gauss_legendre(br, order);
            c = 0.0;
            mom.fill(0.0);
            for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
                double r = rule.nodes[k];
                double v = value(r) * r * rule.weights[k];
                c += v;
                double bracket = std::sqrt(1.0 + r * r);
                double p = std::fabs(v);
                for (std::size_t n = 0; n < potential_moment_count; ++n) {
                    mom[n] += p;
                    p *= bracket;
                }
            }
            c *= 2.0 * std::numbers::pi;
            for (auto& m : mom) {
                m *= 2.0 * std::numbers::pi;
            }
        };
        double c16 = 0.0;
        double c24 = 0.0;
        std::array<double, potential_moment_count> m16{};
        std::array<double, potential_moment_count> m24{};
        run(16, c16, m16);
        run(24, c24, m24);
        auto close = [](double a, double b) {
            return std::fabs(a - b) <= 1e-10 * std::max(1.0, std::fabs(b));
        };
        bool ok = close(c16, c24);
        for (std::size_t n = 0; n < potential_moment_count; ++n) {
            ok = ok && close(m16[n], m24[n]);
        }
        if (!ok) {
            throw ConvergenceError("potential integral did not reach 1e-10 for model " + name());
        }
        c_ = c24;
        moments_ = m24;
    }

    PotentialModel model_;
    double c_ = 0.0;
    std::array<double, potential_moment_count> moments_{};
};

/// Quadrature used to analyze products v*F: Gauss-Laguerre for smooth
/// potentials, the graded radial trapezoid for those with a cusp or log at 0.
inline QuadratureRule exchange_rule(const Potential& p, std::size_t n_max, double b)
{
    if (std::holds_alternative<ScreenedCoulomb>(p.model()) ||
        std::holds_alternative<ExponentialPotential>(p.model())) {
        return default_radial_rule(n_max, b);
    }
    return gauss_laguerre_rule(2 * n_max + 16);
}

/// Coefficients z_n of the exchange operator Z_F (reduced kernel -v F).
inline Analysis exchange_term(const Potential& p, const LandauCoefficients& F,
                              const QuadratureRule& rule)
{
    if (p.is_zero()) {
        LandauCoefficients z = LandauCoefficients::zero(F.b(), F.n_max());
        return {z, tail_report(z)};
    }
    std::vector<double> buf(F.size());
    const double b = F.b();
    auto kernel = [&](double r) {
        cells_all(r, b, buf);
        double s = 0.0;
        for (std::size_t n = 0; n < buf.size(); ++n) {
            s += F[n] * buf[n];
        }
        return -p.value(r) * s;
    };
    return analyze(kernel, b, F.n_max(), rule);
}

inline Analysis exchange_term(const Potential& p, const LandauCoefficients& F)
{
    return exchange_term(p, F, exchange_rule(p, F.n_max(), F.b()));
}

/// w_n = c F(0) + z_n.
inline Analysis effective_potential(const Potential& p, const LandauCoefficients& F,
                                    const QuadratureRule& rule)
{
    Analysis z = exchange_term(p, F, rule);
    double shift = p.integral() * ids(F);
    std::vector<double> w(z.coeffs.vector());
    for (auto& v : w) {
        v += shift;
    }
    return {LandauCoefficients(F.b(), std::move(w)), z.tail};
}

inline Analysis effective_potential(const Potential& p, const LandauCoefficients& F)
{
    return effective_potential(p, F, exchange_rule(p, F.n_max(), F.b()));
}

} // namespace lhf
