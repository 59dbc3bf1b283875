#pragma once

// Rotation- and magnetic-translation-invariant operators, stored as their
// diagonal in the Landau basis: A = sum_n a_n Pi_n, kernel F(r) = sum_n a_n F_n(r).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"
#include "laguerre.hpp"
#include "quadrature.hpp"

namespace lhf {

class LandauCoefficients
{
  public:
    LandauCoefficients() : LandauCoefficients(1.0, std::vector<double>(1, 0.0)) {}

    LandauCoefficients(double b, std::vector<double> coeffs) : b_(b), a_(std::move(coeffs))
    {
        require(b_ > 0.0 && std::isfinite(b_), "field strength b must be positive and finite");
        require(!a_.empty(), "coefficient sequence must hold at least a_0");
        require(a_.size() <= max_laguerre_level + 1, "n_max exceeds the Laguerre cap");
        for (double v : a_) {
            require(std::isfinite(v), "coefficients must be finite");
        }
    }

    static LandauCoefficients zero(double b, std::size_t n_max)
    {
        return {b, std::vector<double>(n_max + 1, 0.0)};
    }

    /// Sum of the first N Landau projections.
    static LandauCoefficients projection(double b, std::size_t n_max, std::size_t N)
    {
        std::vector<double> a(n_max + 1, 0.0);
        for (std::size_t n = 0; n < std::min(N, n_max + 1); ++n) {
            a[n] = 1.0;
        }
        return {b, std::move(a)};
    }

    /// The single projection Pi_n.
    static LandauCoefficients level(double b, std::size_t n_max, std::size_t n)
    {
        require(n <= n_max, "level index beyond n_max");
        std::vector<double> a(n_max + 1, 0.0);
        a[n] = 1.0;
        return {b, std::move(a)};
    }

    double b() const { return b_; }
    std::size_t n_max() const { return a_.size() - 1; }
    std::size_t size() const { return a_.size(); }
    double operator[](std::size_t n) const { return a_[n]; }
    std::span<const double> coeffs() const { return a_; }
    const std::vector<double>& vector() const { return a_; }

  private:
    double b_;
    std::vector<double> a_;
};

namespace detail {

inline void check_compatible(const LandauCoefficients& A, const LandauCoefficients& B)
{
    if (std::fabs(A.b() - B.b()) > 1e-14 * std::max(A.b(), B.b())) {
        throw InvalidArgument("mismatched field strength: " + std::to_string(A.b()) + " vs " +
                              std::to_string(B.b()));
    }
    if (A.n_max() != B.n_max()) {
        throw InvalidArgument("mismatched n_max: " + std::to_string(A.n_max()) + " vs " +
                              std::to_string(B.n_max()));
    }
}

} // namespace detail

/// alpha*A + beta*B
inline LandauCoefficients combine(double alpha, const LandauCoefficients& A, double beta,
                                  const LandauCoefficients& B)
{
    detail::check_compatible(A, B);
    std::vector<double> c(A.size());
    for (std::size_t n = 0; n < c.size(); ++n) {
        c[n] = alpha * A[n] + beta * B[n];
    }
    return {A.b(), std::move(c)};
}

inline LandauCoefficients operator+(const LandauCoefficients& A, const LandauCoefficients& B)
{
    return combine(1.0, A, 1.0, B);
}

inline LandauCoefficients operator-(const LandauCoefficients& A, const LandauCoefficients& B)
{
    return combine(1.0, A, -1.0, B);
}

inline LandauCoefficients operator*(double s, const LandauCoefficients& A)
{
    std::vector<double> c(A.vector());
    for (auto& v : c) {
        v *= s;
    }
    return {A.b(), std::move(c)};
}

/// Operator product; diagonal in this subalgebra.
inline LandauCoefficients product(const LandauCoefficients& A, const LandauCoefficients& B)
{
    detail::check_compatible(A, B);
    std::vector<double> c(A.size());
    for (std::size_t n = 0; n < c.size(); ++n) {
        c[n] = A[n] * B[n];
    }
    return {A.b(), std::move(c)};
}

/// Trace per unit area, F(0) = (b/2pi) sum a_n.
inline double ids(const LandauCoefficients& A)
{
    double s = 0.0;
    for (double v : A.coeffs()) {
        s += v;
    }
    return A.b() / (2.0 * std::numbers::pi) * s;
}

inline double op_norm(const LandauCoefficients& A)
{
    double m = 0.0;
    for (double v : A.coeffs()) {
        m = std::max(m, std::fabs(v));
    }
    return m;
}

inline double synthesize(const LandauCoefficients& A, double r)
{
    std::vector<double> buf(A.size());
    cells_all(r, A.b(), buf);
    double s = 0.0;
    for (std::size_t n = 0; n < buf.size(); ++n) {
        s += A[n] * buf[n];
    }
    return s;
}

inline std::vector<double> synthesize(const LandauCoefficients& A, std::span<const double> radii)
{
    std::vector<double> out(radii.size());
    std::vector<double> buf(A.size());
    for (std::size_t i = 0; i < radii.size(); ++i) {
        cells_all(radii[i], A.b(), buf);
        double s = 0.0;
        for (std::size_t n = 0; n < buf.size(); ++n) {
            s += A[n] * buf[n];
        }
        out[i] = s;
    }
    return out;
}

/// Fixed residual mesh: 512 radii evenly spaced on [0, 10/sqrt(b)].
inline std::vector<double> sampling_mesh(double b, std::size_t points = 512)
{
    std::vector<double> r(points);
    double R = 10.0 / std::sqrt(b);
    for (std::size_t i = 0; i < points; ++i) {
        r[i] = R * static_cast<double>(i) / static_cast<double>(points - 1);
    }
    return r;
}

inline double sup_norm_on(const LandauCoefficients& A, std::span<const double> radii)
{
    double m = 0.0;
    for (double v : synthesize(A, radii)) {
        m = std::max(m, std::fabs(v));
    }
    return m;
}

/// Index of the highest coefficient with |a_n| > 0.
inline std::size_t effective_top_level(const LandauCoefficients& A)
{
    std::size_t top = 0;
    for (std::size_t n = 0; n < A.size(); ++n) {
        if (A[n] != 0.0) {
            top = n;
        }
    }
    return top;
}

/// sup_r |F(r)|: dense sampling out to max(10/sqrt(b), the turning radius of
/// the highest occupied level), plus a tail bound past that radius. Beyond
/// t = 4n+2 each |L_n(t) e^{-t/2}| decreases monotonically, so the sum of
/// |a_n F_n(R)| bounds |F| for all r >= R.
inline double sup_norm(const LandauCoefficients& A)
{
    const double b = A.b();
    std::size_t top = effective_top_level(A);
    double R = std::max(10.0 / std::sqrt(b),
                        std::sqrt(2.0 * (4.0 * static_cast<double>(top) + 2.0) / b));
    std::size_t points = static_cast<std::size_t>(std::ceil(512.0 * R * std::sqrt(b) / 10.0));
    std::vector<double> radii(points);
    for (std::size_t i = 0; i < points; ++i) {
        radii[i] = R * static_cast<double>(i) / static_cast<double>(points - 1);
    }
    double m = sup_norm_on(A, radii);
    std::vector<double> buf(A.size());
    cells_all(R, b, buf);
    double tail = 0.0;
    for (std::size_t n = 0; n < buf.size(); ++n) {
        tail += std::fabs(A[n] * buf[n]);
    }
    return std::max(m, tail);
}

struct TailReport
{
    double tail_mass = 0.0;
    bool aliasing = false;
};

struct Analysis
{
    LandauCoefficients coeffs;
    TailReport tail;
};

inline TailReport tail_report(const LandauCoefficients& A)
{
    std::size_t count = A.size();
    std::size_t top = std::max<std::size_t>(1, (count + 9) / 10);
    TailReport rep;
    for (std::size_t n = count - top; n < count; ++n) {
        rep.tail_mass = std::max(rep.tail_mass, std::fabs(A[n]));
    }
    double peak = op_norm(A);
    rep.aliasing = peak > 0.0 && rep.tail_mass > 1e-6 * peak;
    return rep;
}

/// a_n = (2pi/b) int_0^inf K(sqrt(2t/b)) L_n(t) e^{-t/2} dt.
/// With a radial trapezoid rule the same integral is taken in r:
/// a_n = 2pi int_0^R K(r) L_n(b r^2/2) e^{-b r^2/4} r dr.
template <class Kernel>
Analysis analyze(const Kernel& K, double b, std::size_t n_max, const QuadratureRule& rule)
{
    require(b > 0.0, "field strength b must be positive");
    detail::check_level(n_max);
    std::vector<double> a(n_max + 1, 0.0);
    std::vector<double> buf(n_max + 1);
    if (rule.kind == RuleKind::gauss_laguerre) {
        require(rule.order() >= n_max + 8,
                "Gauss-Laguerre order " + std::to_string(rule.order()) +
                    " is below n_max + 8 = " + std::to_string(n_max + 8));
        for (std::size_t k = 0; k < rule.order(); ++k) {
            double t = rule.nodes[k];
            double kv = K(std::sqrt(2.0 * t / b));
            if (kv == 0.0) {
                continue;
            }
            laguerre_scaled_all(t, buf);
            // sum_k w_k e^{t_k} K S_n(t_k) with S_n = L_n e^{-t/2}
            double w = rule.scaled_weights[k] * kv;
            for (std::size_t n = 0; n <= n_max; ++n) {
                a[n] += w * buf[n];
            }
        }
        for (auto& v : a) {
            v *= 2.0 * std::numbers::pi / b;
        }
    } else {
        for (std::size_t k = 0; k < rule.order(); ++k) {
            double r = rule.nodes[k];
            double kv = K(r);
            if (kv == 0.0) {
                continue;
            }
            laguerre_scaled_all(0.5 * b * r * r, buf);
            double w = rule.weights[k] * kv * r;
            for (std::size_t n = 0; n <= n_max; ++n) {
                a[n] += w * buf[n];
            }
        }
        for (auto& v : a) {
            v *= 2.0 * std::numbers::pi;
        }
    }
    LandauCoefficients coeffs(b, std::move(a));
    TailReport tail = tail_report(coeffs);
    return {std::move(coeffs), tail};
}

/// Symbol via the closed-form Fourier transform of each cell:
/// hat F_n(xi) = 2 (-1)^n L_n(2 xi^2/b) e^{-xi^2/b}.
inline double landau_symbol(const LandauCoefficients& A, double xi)
{
    std::vector<double> buf(A.size());
    laguerre_scaled_all(2.0 * xi * xi / A.b(), buf);
    double s = 0.0;
    for (std::size_t n = 0; n < buf.size(); ++n) {
        s += (n % 2 == 0 ? 2.0 : -2.0) * A[n] * buf[n];
    }
    return s;
}

/// p(xi) = 2pi int_0^inf F(r) J_0(xi r) r dr by composite Gauss-Legendre on
/// the support of the occupied cells, checked against a panel-doubled run.
inline double symbol_eval(const LandauCoefficients& A, double xi)
{
    require(xi >= 0.0, "momentum magnitude must be non-negative");
    if (op_norm(A) == 0.0) {
        return 0.0;
    }
    const double b = A.b();
    std::size_t top = effective_top_level(A);
    double R = cell_extent(top, b);
    double k_max = xi + std::sqrt(b * (4.0 * static_cast<double>(top) + 2.0));
    double width = std::min(0.5 / std::sqrt(b), std::numbers::pi / k_max);
    std::size_t panels = static_cast<std::size_t>(std::ceil(R / width));
    GaussLegendre gl = gauss_legendre(16);
    std::vector<double> buf(A.size());

    auto integrate = [&](std::size_t P) {
        double h = R / static_cast<double>(P);
        double s = 0.0;
        for (std::size_t p = 0; p < P; ++p) {
            double a = h * static_cast<double>(p);
            for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
                double r = a + 0.5 * h * (gl.nodes[i] + 1.0);
                cells_all(r, b, buf);
                double F = 0.0;
                for (std::size_t n = 0; n <= top; ++n) {
                    F += A[n] * buf[n];
                }
                s += 0.5 * h * gl.weights[i] * F * std::cyl_bessel_j(0.0, xi * r) * r;
            }
        }
        return 2.0 * std::numbers::pi * s;
    };
    double coarse = integrate(panels);
    double fine = integrate(2 * panels);
    double scale = 0.0;
    for (double v : A.coeffs()) {
        scale += 2.0 * std::fabs(v);
    }
    if (std::fabs(fine - coarse) > 1e-10 * std::max(1.0, scale)) {
        throw ConvergenceError("symbol quadrature did not converge at xi = " + std::to_string(xi) +
                               ": panel-doubling change " + std::to_string(fine - coarse));
    }
    return fine;
}

} // namespace lhf
