#pragma once

// Reduced kernels of magnetic-translation-invariant operators sampled on a
// square grid, T(x, x') = e^{i b phi(x, x')} F_T(x - x') with
// phi(x, y) = (x2 y1 - x1 y2)/2. Products are twisted convolutions.

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "error.hpp"
#include "laguerre.hpp"
#include "parallel.hpp"
#include "random.hpp"

namespace lhf {

using cplx = std::complex<double>;

// plain complex product; std::complex operator* goes through the
// NaN-recovering library routine and is several times slower in hot loops
inline cplx cmul(cplx a, cplx b)
{
    return {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
}

inline cplx cmulc(cplx a, cplx b) // a * conj(b)
{
    return {a.real() * b.real() + a.imag() * b.imag(), a.imag() * b.real() - a.real() * b.imag()};
}

struct GridSpec
{
    double b = 1.0;
    std::size_t n = 128;
    double R = 8.0;

    double h() const { return 2.0 * R / static_cast<double>(n); }
    double coord(std::size_t i) const { return -R + static_cast<double>(i) * h(); }
    std::size_t origin() const { return n / 2; }

    bool operator==(const GridSpec& o) const { return b == o.b && n == o.n && R == o.R; }
};

inline void validate(const GridSpec& s)
{
    require(s.b > 0.0, "grid field strength must be positive");
    require(s.n >= 4 && s.n % 2 == 0, "grid size n must be even and >= 4");
    require(s.R > 0.0, "grid extent must be positive");
}

/// e^{i b phi(x, y)}, phi(x, y) = (x2 y1 - x1 y2)/2.
inline cplx peierls_phase(double x1, double x2, double y1, double y2, double b)
{
    double phi = 0.5 * (x2 * y1 - x1 * y2);
    return std::polar(1.0, b * phi);
}

class GridKernel
{
  public:
    GridKernel() = default;

    explicit GridKernel(GridSpec spec) : spec_(spec), data_(spec.n * spec.n, cplx(0.0, 0.0))
    {
        validate(spec_);
    }

    template <class Fn>
    static GridKernel sample(GridSpec spec, Fn&& fn)
    {
        GridKernel K(spec);
        for (std::size_t i = 0; i < spec.n; ++i) {
            for (std::size_t j = 0; j < spec.n; ++j) {
                K(i, j) = fn(spec.coord(i), spec.coord(j));
            }
        }
        return K;
    }

    template <class Fn>
    static GridKernel sample_radial(GridSpec spec, Fn&& fn)
    {
        return sample(spec, [&](double x1, double x2) { return cplx(fn(std::hypot(x1, x2)), 0.0); });
    }

    /// Discrete identity: h^{-2} at the origin.
    static GridKernel delta(GridSpec spec)
    {
        GridKernel K(spec);
        double h = spec.h();
        K(spec.origin(), spec.origin()) = 1.0 / (h * h);
        return K;
    }

    const GridSpec& spec() const { return spec_; }
    std::size_t n() const { return spec_.n; }
    cplx& operator()(std::size_t i, std::size_t j) { return data_[i * spec_.n + j]; }
    cplx operator()(std::size_t i, std::size_t j) const { return data_[i * spec_.n + j]; }
    std::vector<cplx>& data() { return data_; }
    const std::vector<cplx>& data() const { return data_; }

    /// Value at the index offset (di, dj) from the origin, 0 outside the window.
    cplx at_offset(long di, long dj) const
    {
        long c = static_cast<long>(spec_.origin());
        long i = c + di;
        long j = c + dj;
        long n = static_cast<long>(spec_.n);
        if (i < 0 || j < 0 || i >= n || j >= n) {
            return {0.0, 0.0};
        }
        return (*this)(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
    }

    /// Kernel of the adjoint operator: conj(F(-u)).
    GridKernel adjoint() const
    {
        GridKernel out(spec_);
        long n = static_cast<long>(spec_.n);
        for (long i = 0; i < n; ++i) {
            for (long j = 0; j < n; ++j) {
                long ri = n - i;
                long rj = n - j;
                if (ri < n && rj < n) {
                    out(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) =
                        std::conj((*this)(static_cast<std::size_t>(ri), static_cast<std::size_t>(rj)));
                }
            }
        }
        return out;
    }

    double sup_norm() const
    {
        double m = 0.0;
        for (const auto& v : data_) {
            m = std::max(m, std::abs(v));
        }
        return m;
    }

    /// sup over points at least `margin` indices from every edge.
    double sup_norm_interior(std::size_t margin) const
    {
        double m = 0.0;
        for (std::size_t i = margin; i + margin < spec_.n; ++i) {
            for (std::size_t j = margin; j + margin < spec_.n; ++j) {
                m = std::max(m, std::abs((*this)(i, j)));
            }
        }
        return m;
    }

    /// sup |v| over the outermost ring of samples.
    double boundary_ring_max() const
    {
        double m = 0.0;
        std::size_t n = spec_.n;
        for (std::size_t k = 0; k < n; ++k) {
            m = std::max({m, std::abs((*this)(0, k)), std::abs((*this)(n - 1, k)), std::abs((*this)(k, 0)),
                          std::abs((*this)(k, n - 1))});
        }
        return m;
    }

    /// sup |conj(F(-u)) - F(u)| over points whose reflection is in the window.
    double hermitian_defect() const { return diff_sup(*this, adjoint(), 1); }

    static double diff_sup(const GridKernel& A, const GridKernel& B, std::size_t margin = 0)
    {
        require(A.spec_ == B.spec_, "grid shape mismatch");
        double m = 0.0;
        for (std::size_t i = margin; i < A.spec_.n; ++i) {
            for (std::size_t j = margin; j < A.spec_.n; ++j) {
                m = std::max(m, std::abs(A(i, j) - B(i, j)));
            }
        }
        return m;
    }

    GridKernel& operator+=(const GridKernel& o)
    {
        require(spec_ == o.spec_, "grid shape mismatch");
        for (std::size_t k = 0; k < data_.size(); ++k) {
            data_[k] += o.data_[k];
        }
        return *this;
    }

    GridKernel& operator-=(const GridKernel& o)
    {
        require(spec_ == o.spec_, "grid shape mismatch");
        for (std::size_t k = 0; k < data_.size(); ++k) {
            data_[k] -= o.data_[k];
        }
        return *this;
    }

    GridKernel& operator*=(cplx s)
    {
        for (auto& v : data_) {
            v *= s;
        }
        return *this;
    }

  private:
    GridSpec spec_;
    std::vector<cplx> data_;
};

inline GridKernel operator+(GridKernel a, const GridKernel& b) { return a += b; }
inline GridKernel operator-(GridKernel a, const GridKernel& b) { return a -= b; }
inline GridKernel operator*(cplx s, GridKernel a) { return a *= s; }

/// (F * G)(x) = h^2 sum_y e^{i b phi(x, y)} F(x - y) G(y); F outside the
/// window counts as 0. With a finite support_radius only offsets
/// |x - y| <= support_radius contribute.
inline GridKernel twisted_convolution(const GridKernel& F, const GridKernel& G,
                                      double support_radius = std::numeric_limits<double>::infinity())
{
    if (!(F.spec() == G.spec())) {
        throw InvalidArgument("twisted convolution of kernels on different grids");
    }
    const GridSpec& s = F.spec();
    const std::size_t n = s.n;
    const long c = static_cast<long>(s.origin());
    const double h = s.h();
    // E[a][b] = e^{i (b/2) u_a u_b}; the phase factorizes as E[i2][j1] conj(E[i1][j2]).
    std::vector<cplx> E(n * n);
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t q = 0; q < n; ++q) {
            E[a * n + q] = std::polar(1.0, 0.5 * s.b * s.coord(a) * s.coord(q));
        }
    }
    const double rad = support_radius / h;
    GridKernel out(s);
    parallel_for(0, n, [&](std::size_t i1) {
        // Hrow[j1][j2] = G(j1, j2) conj(E[i1][j2])
        std::vector<cplx> H(n * n);
        for (std::size_t j1 = 0; j1 < n; ++j1) {
            for (std::size_t j2 = 0; j2 < n; ++j2) {
                H[j1 * n + j2] = cmulc(G(j1, j2), E[i1 * n + j2]);
            }
        }
        for (std::size_t i2 = 0; i2 < n; ++i2) {
            cplx acc(0.0, 0.0);
            for (std::size_t j1 = 0; j1 < n; ++j1) {
                long k1 = static_cast<long>(i1) - static_cast<long>(j1) + c;
                if (k1 < 0 || k1 >= static_cast<long>(n)) {
                    continue;
                }
                long d1 = k1 - c;
                long lo = static_cast<long>(i2) + c - static_cast<long>(n) + 1;
                long hi = static_cast<long>(i2) + c;
                if (std::isfinite(rad)) {
                    double rem = rad * rad - static_cast<double>(d1 * d1);
                    if (rem < 0.0) {
                        continue;
                    }
                    long w = static_cast<long>(std::floor(std::sqrt(rem)));
                    // |k2 - c| <= w  <=>  j2 in [i2 - w, i2 + w]
                    lo = std::max(lo, static_cast<long>(i2) - w);
                    hi = std::min(hi, static_cast<long>(i2) + w);
                }
                lo = std::max(lo, 0L);
                hi = std::min(hi, static_cast<long>(n) - 1);
                double re = 0.0;
                double im = 0.0;
                const cplx* Frow = &F.data()[static_cast<std::size_t>(k1) * n];
                const cplx* Hrow = &H[j1 * n];
                for (long j2 = lo; j2 <= hi; ++j2) {
                    cplx f = Frow[static_cast<long>(i2) - j2 + c];
                    cplx g = Hrow[j2];
                    re += f.real() * g.real() - f.imag() * g.imag();
                    im += f.real() * g.imag() + f.imag() * g.real();
                }
                acc += cmul(E[i2 * n + j1], cplx(re, im));
            }
            out(i1, i2) = h * h * acc;
        }
    });
    return out;
}

/// Sampled Landau cell F_n; the grid must resolve it: h <= 0.5/sqrt(b (n+1)).
inline GridKernel landau_projection_kernel(std::size_t level, const GridSpec& spec)
{
    validate(spec);
    double limit = 0.5 / std::sqrt(spec.b * static_cast<double>(level + 1));
    if (spec.h() > limit) {
        std::ostringstream os;
        os << "grid spacing " << spec.h() << " does not resolve Landau cell " << level << " (need <= " << limit
           << ")";
        throw InvalidArgument(os.str());
    }
    return GridKernel::sample_radial(spec, [&](double r) { return cell(level, r, spec.b); });
}

/// (-i grad - b A)^2 in x applied to T(x, 0) = F(x), symmetric gauge
/// A = (-x2, x1)/2: -Lap F + i b (x1 d2 F - x2 d1 F) + (b^2 |x|^2/4) F,
/// with 5-point Laplacian and central first differences; samples outside
/// the window count as 0.
inline GridKernel magnetic_laplacian_apply(const GridKernel& F)
{
    const GridSpec& s = F.spec();
    const double h = s.h();
    const long n = static_cast<long>(s.n);
    GridKernel out(s);
    auto at = [&](long i, long j) -> cplx {
        if (i < 0 || j < 0 || i >= n || j >= n) {
            return {0.0, 0.0};
        }
        return F(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
    };
    for (long i = 0; i < n; ++i) {
        for (long j = 0; j < n; ++j) {
            double x1 = s.coord(static_cast<std::size_t>(i));
            double x2 = s.coord(static_cast<std::size_t>(j));
            cplx f = at(i, j);
            cplx lap = (at(i + 1, j) + at(i - 1, j) + at(i, j + 1) + at(i, j - 1) - 4.0 * f) / (h * h);
            cplx d1 = (at(i + 1, j) - at(i - 1, j)) / (2.0 * h);
            cplx d2 = (at(i, j + 1) - at(i, j - 1)) / (2.0 * h);
            cplx ang = cplx(0.0, s.b) * (x1 * d2 - x2 * d1);
            out(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) =
                -lap + ang + 0.25 * s.b * s.b * (x1 * x1 + x2 * x2) * f;
        }
    }
    return out;
}

/// sup |H_b F - E F| over the central half of the window (|u_i| <= R/2);
/// the zero padding outside the window spoils the stencil near the edge.
inline double laplacian_eigen_defect(const GridKernel& F, double E)
{
    GridKernel D = magnetic_laplacian_apply(F);
    D -= cplx(E, 0.0) * F;
    return D.sup_norm_interior(F.spec().n / 4);
}

/// Default phase: e^{i b phi(x, y)}.
struct PeierlsPhase
{
    cplx operator()(double x1, double x2, double y1, double y2, double b) const
    {
        return peierls_phase(x1, x2, y1, y2, b);
    }
};

/// sup over sampled (x, x') of |(tau_y T tau_{-y})(x, x') - T(x, x')| with the
/// full kernel built from F and the given phase. (di, dj) is the lattice shift
/// y in grid steps; points are taken every `stride` samples.
template <class Phase = PeierlsPhase>
double magnetic_translation_covariance_check(const GridKernel& F, long di, long dj, std::size_t stride = 8,
                                             Phase phase = {})
{
    const GridSpec& s = F.spec();
    const double h = s.h();
    const double b = s.b;
    const long n = static_cast<long>(s.n);
    const long c = static_cast<long>(s.origin());
    const double y1 = static_cast<double>(di) * h;
    const double y2 = static_cast<double>(dj) * h;
    auto kernel = [&](long a1, long a2, long b1, long b2, bool& ok) -> cplx {
        // points given as offsets from the origin in grid steps
        long k1 = a1 - b1;
        long k2 = a2 - b2;
        if (std::labs(k1) >= c || std::labs(k2) >= c) {
            ok = false;
            return {0.0, 0.0};
        }
        double p1 = static_cast<double>(a1) * h;
        double p2 = static_cast<double>(a2) * h;
        double q1 = static_cast<double>(b1) * h;
        double q2 = static_cast<double>(b2) * h;
        return phase(p1, p2, q1, q2, b) * F.at_offset(k1, k2);
    };
    double defect = 0.0;
    long st = static_cast<long>(stride);
    for (long a1 = -c + 1; a1 < n - c; a1 += st) {
        for (long a2 = -c + 1; a2 < n - c; a2 += st) {
            for (long b1 = -c + 1; b1 < n - c; b1 += st) {
                for (long b2 = -c + 1; b2 < n - c; b2 += st) {
                    bool ok = true;
                    cplx t = kernel(a1, a2, b1, b2, ok);
                    cplx shifted = kernel(a1 - di, a2 - dj, b1 - di, b2 - dj, ok);
                    if (!ok) {
                        continue;
                    }
                    double x1 = static_cast<double>(a1) * h;
                    double x2 = static_cast<double>(a2) * h;
                    double xp1 = static_cast<double>(b1) * h;
                    double xp2 = static_cast<double>(b2) * h;
                    cplx conj_part = phase(x1, x2, y1, y2, b) * std::conj(phase(xp1, xp2, y1, y2, b));
                    defect = std::max(defect, std::abs(conj_part * shifted - t));
                }
            }
        }
    }
    return defect;
}

/// Largest |eigenvalue| of the operator with kernel A, by power iteration of
/// the twisted action on window functions.
inline double operator_norm_estimate(const GridKernel& A, std::size_t steps = 50, std::uint64_t seed = 7,
                                     double support_radius = std::numeric_limits<double>::infinity())
{
    SplitMix64 rng(seed);
    GridKernel psi(A.spec());
    for (auto& v : psi.data()) {
        v = cplx(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
    }
    auto l2 = [](const GridKernel& K) {
        double s = 0.0;
        for (const auto& v : K.data()) {
            s += std::norm(v);
        }
        return std::sqrt(s);
    };
    double est = 0.0;
    double norm = l2(psi);
    for (std::size_t k = 0; k < steps; ++k) {
        psi *= cplx(1.0 / norm, 0.0);
        GridKernel next = twisted_convolution(A, psi, support_radius);
        norm = l2(next);
        est = norm;
        if (norm == 0.0) {
            return 0.0;
        }
        psi = std::move(next);
    }
    return est;
}

/// Binomial coefficients of (1 - d)^{-1/2} = sum_k c_k d^k, c_k = C(2k, k)/4^k.
inline double inverse_sqrt_coefficient(std::size_t k)
{
    double c = 1.0;
    for (std::size_t j = 1; j <= k; ++j) {
        c *= (2.0 * static_cast<double>(j) - 1.0) / (2.0 * static_cast<double>(j));
    }
    return c;
}

/// (1 - d)^{-1/2} - 1 by the binomial series, |d| <= 1/4.
inline double inverse_sqrt_series(double d, double tol = 1e-16)
{
    double s = 0.0;
    double term = 1.0;
    for (std::size_t k = 1; k < 200; ++k) {
        term *= d * (2.0 * static_cast<double>(k) - 1.0) / (2.0 * static_cast<double>(k));
        s += term;
        if (std::fabs(term) < tol) {
            break;
        }
    }
    return s;
}

/// The same function by the Cauchy integral over a circle around [0, 1/4]
/// that stays clear of the branch point at 1 (trapezoid rule in angle).
inline double inverse_sqrt_contour(double d, std::size_t nodes = 256)
{
    const double center = 0.125;
    const double radius = 0.5;
    cplx s(0.0, 0.0);
    for (std::size_t k = 0; k < nodes; ++k) {
        double th = 2.0 * std::numbers::pi * (static_cast<double>(k) + 0.5) / static_cast<double>(nodes);
        cplx e = std::polar(1.0, th);
        cplx zeta = center + radius * e;
        cplx g = 1.0 / std::sqrt(1.0 - zeta) - 1.0;
        // dzeta / (2 pi i) = radius e dtheta / (2 pi)
        s += g / (zeta - d) * radius * e;
    }
    return (s / static_cast<double>(nodes)).real();
}

/// Largest disagreement between the series and the contour evaluation over
/// the spectrum values of a test D (entries in [0, 1/4]).
inline double kato_nagy_series_contour_check(const std::vector<double>& spectrum, std::size_t nodes = 256)
{
    double worst = 0.0;
    for (double d : spectrum) {
        require(d >= 0.0 && d <= 0.25, "test spectrum must lie in [0, 1/4]");
        worst = std::max(worst, std::fabs(inverse_sqrt_series(d) - inverse_sqrt_contour(d, nodes)));
    }
    return worst;
}

struct KatoNagyResult
{
    GridKernel V;
    double norm_estimate = 0.0;
    double unitarity_defect = 0.0;
    double intertwining_defect = 0.0;
    std::size_t series_terms = 0;
};

/// Kato-Nagy unitary U = (Id - D)^{-1/2} (P Q + (Id - P)(Id - Q)),
/// D = (P - Q)^2, returned as V = U - Id. Identity kernels never enter a
/// product: with M - Id = 2PQ - P - Q and T = (Id - D)^{-1/2} - Id,
/// V = (M - Id) + T + T (M - Id).
inline KatoNagyResult kato_nagy_unitary(const GridKernel& P, const GridKernel& Q, std::size_t power_steps = 50)
{
    require(P.spec() == Q.spec(), "grid shape mismatch");
    KatoNagyResult res;
    GridKernel diff = P - Q;
    res.norm_estimate = diff.sup_norm() == 0.0 ? 0.0 : operator_norm_estimate(diff, power_steps);
    if (res.norm_estimate > 0.5 * 1.1) {
        std::ostringstream os;
        os << "||P - Q|| estimate " << res.norm_estimate << " > 1/2: lambda too large for the Kato-Nagy regime";
        throw InvalidArgument(os.str());
    }
    const GridSpec& s = P.spec();
    GridKernel PQ = twisted_convolution(P, Q);
    GridKernel MmI = 2.0 * PQ - P - Q;
    GridKernel T(s);
    if (diff.sup_norm() > 0.0) {
        GridKernel D = twisted_convolution(diff, diff);
        GridKernel Dk = D;
        for (std::size_t k = 1; k < 200; ++k) {
            double ck = inverse_sqrt_coefficient(k);
            GridKernel term = cplx(ck, 0.0) * Dk;
            T += term;
            res.series_terms = k;
            if (term.sup_norm() < 1e-12) {
                break;
            }
            Dk = twisted_convolution(Dk, D);
        }
    }
    res.V = MmI + T + twisted_convolution(T, MmI);
    GridKernel Vs = res.V.adjoint();
    GridKernel unit = res.V + Vs + twisted_convolution(Vs, res.V);
    res.unitarity_defect = unit.sup_norm();
    GridKernel inter = diff + twisted_convolution(P, res.V) - twisted_convolution(res.V, Q);
    res.intertwining_defect = inter.sup_norm();
    return res;
}

/// Tr(chi_L P) = pi L^2 F_P(0).
inline double finite_volume_trace(const GridKernel& P, double L)
{
    require(L > 0.0 && L <= P.spec().R, "trace radius must satisfy 0 < L <= R");
    std::size_t c = P.spec().origin();
    return std::numbers::pi * L * L * P(c, c).real();
}

struct BoundaryDefect
{
    double L = 0.0;
    /// Tr(chi_L P) - Tr(chi_L Q) from the commutator expansion; vanishes for
    /// invariant kernels because sum_x (chi(x) - chi(x - u)) = 0 for every u.
    cplx signed_trace{0.0, 0.0};
    /// int int |chi(x) - chi(y)| (|V(x,y) (Q V*)(y,x)| + |V(x,y) Q(y,x)|) dx dy
    double majorant = 0.0;
};

/// Boundary trace defect over the annulus where chi_L(x) != chi_L(y), with
/// the kernels truncated at |x - y| <= 8/sqrt(b).
inline BoundaryDefect boundary_defect_from_unitary(const GridKernel& Q, const GridKernel& V, double L)
{
    const GridSpec& s = Q.spec();
    require(V.spec() == s, "grid shape mismatch");
    require(L > 0.0 && L <= 0.5 * s.R, "boundary defect needs 0 < L <= R/2");
    GridKernel QVs = twisted_convolution(Q, V.adjoint());
    const double h = s.h();
    const long n = static_cast<long>(s.n);
    const long c = static_cast<long>(s.origin());
    const double rho = 8.0 / std::sqrt(s.b);
    const long w = static_cast<long>(std::floor(rho / h));
    auto inside = [&](long i, long j) {
        double x1 = static_cast<double>(i - c) * h;
        double x2 = static_cast<double>(j - c) * h;
        return x1 * x1 + x2 * x2 < L * L;
    };
    BoundaryDefect out;
    out.L = L;
    std::vector<std::pair<long, long>> offsets;
    for (long d1 = -w; d1 <= w; ++d1) {
        for (long d2 = -w; d2 <= w; ++d2) {
            if (static_cast<double>(d1 * d1 + d2 * d2) * h * h <= rho * rho) {
                offsets.emplace_back(d1, d2);
            }
        }
    }
    std::vector<cplx> signed_part(offsets.size());
    std::vector<double> abs_part(offsets.size());
    parallel_for(0, offsets.size(), [&](std::size_t k) {
        auto [d1, d2] = offsets[k];
        // u = x - y; V(x,y) carries F_V(u), (Q V*)(y,x) and Q(y,x) carry F(-u);
        // the Peierls phases cancel in each product
        cplx fv = V.at_offset(d1, d2);
        cplx fqv = QVs.at_offset(-d1, -d2);
        cplx fq = Q.at_offset(-d1, -d2);
        long count_signed = 0;
        long count_abs = 0;
        for (long i = 0; i < n; ++i) {
            long yi = i - d1;
            if (yi < 0 || yi >= n) {
                continue;
            }
            for (long j = 0; j < n; ++j) {
                long yj = j - d2;
                if (yj < 0 || yj >= n) {
                    continue;
                }
                int d = static_cast<int>(inside(i, j)) - static_cast<int>(inside(yi, yj));
                count_signed += d;
                count_abs += d != 0 ? 1 : 0;
            }
        }
        signed_part[k] = static_cast<double>(count_signed) * (cmul(fv, fqv) + cmul(fv, fq));
        abs_part[k] = static_cast<double>(count_abs) * (std::abs(fv) * std::abs(fqv) + std::abs(fv) * std::abs(fq));
    });
    double h4 = h * h * h * h;
    for (std::size_t k = 0; k < offsets.size(); ++k) {
        out.signed_trace += h4 * signed_part[k];
        out.majorant += h4 * abs_part[k];
    }
    return out;
}

/// Runs the Kato-Nagy construction for (P, Q) first; errors as there.
inline BoundaryDefect boundary_trace_defect(const GridKernel& P, const GridKernel& Q, double L)
{
    KatoNagyResult kn = kato_nagy_unitary(P, Q);
    return boundary_defect_from_unitary(Q, kn.V, L);
}

// ---------------------------------------------------------------------------
// binary format: {b f64, n u32, R f64} then n^2 (re, im) f64 pairs, row-major,
// little-endian

namespace detail {

template <class T>
void write_le(std::ostream& os, T v)
{
    static_assert(std::endian::native == std::endian::little, "big-endian hosts are not supported");
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T read_le(std::istream& is)
{
    static_assert(std::endian::native == std::endian::little, "big-endian hosts are not supported");
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) {
        throw InvalidArgument("truncated grid kernel file");
    }
    return v;
}

} // namespace detail

inline void write_grid_kernel(const std::string& path, const GridKernel& K)
{
    std::ofstream os(path, std::ios::binary);
    if (!os) {
        throw InvalidArgument("cannot open " + path + " for writing");
    }
    detail::write_le<double>(os, K.spec().b);
    detail::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(K.spec().n));
    detail::write_le<double>(os, K.spec().R);
    for (const auto& v : K.data()) {
        detail::write_le<double>(os, v.real());
        detail::write_le<double>(os, v.imag());
    }
}

inline GridKernel read_grid_kernel(const std::string& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is) {
        throw InvalidArgument("cannot open " + path);
    }
    GridSpec s;
    s.b = detail::read_le<double>(is);
    s.n = detail::read_le<std::uint32_t>(is);
    s.R = detail::read_le<double>(is);
    GridKernel K(s);
    for (auto& v : K.data()) {
        double re = detail::read_le<double>(is);
        double im = detail::read_le<double>(is);
        v = cplx(re, im);
    }
    return K;
}

} // namespace lhf
