#pragma once

// Tight magnetic Gabor frame
//   Psi_{g,g*}(y) = e^{i b phi(y, g)} w(y - g) (2pi)^{-1} e^{i g* . (y - g)},
// g, g* in Z^2, with a smooth window whose squares partition unity.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

#include "error.hpp"
#include "laguerre.hpp"
#include "parallel.hpp"
#include "quadrature.hpp"
#include "twisted_grid.hpp"

namespace lhf {

using PlaneFunction = std::function<cplx(double, double)>;

/// One-dimensional window g1 = sqrt(w / sum_k w(. - k)), w(t) = s(1+t) s(1-t),
/// s(u) = e^{-1/u} for u > 0.
struct GaborWindow
{
    static double sigma(double u) { return u > 0.0 ? std::exp(-1.0 / u) : 0.0; }
    static double bump(double t) { return sigma(1.0 + t) * sigma(1.0 - t); }

    double g1(double t) const
    {
        if (!(t > -1.0 && t < 1.0)) {
            return 0.0;
        }
        double base = std::floor(t);
        double sum = 0.0;
        for (int k = -1; k <= 2; ++k) {
            sum += bump(t - (base + k));
        }
        return std::sqrt(bump(t) / sum);
    }

    double operator()(double x1, double x2) const { return g1(x1) * g1(x2); }
};

inline GaborWindow build_window() { return {}; }

struct GaborFrameSpec
{
    double b = 1.0;
    int Gamma = 6;        // lattice truncation, |g|_inf <= Gamma
    int Gamma_star = 40;  // dual truncation, |g*|_inf <= Gamma_star
    std::size_t panels = 16;
    std::size_t panel_nodes = 8;
};

namespace detail {

struct CellRule
{
    std::vector<double> s;
    std::vector<double> w;  // quadrature weight times g1(s)
};

inline CellRule cell_rule(const GaborFrameSpec& spec)
{
    std::vector<double> breaks;
    for (std::size_t k = 0; k <= spec.panels; ++k) {
        breaks.push_back(-1.0 + 2.0 * static_cast<double>(k) / static_cast<double>(spec.panels));
    }
    PanelRule pr = composite_gauss_legendre(breaks, spec.panel_nodes);
    GaborWindow win;
    CellRule out;
    out.s = pr.nodes;
    out.w.resize(pr.nodes.size());
    for (std::size_t i = 0; i < pr.nodes.size(); ++i) {
        out.w[i] = pr.weights[i] * win.g1(pr.nodes[i]);
    }
    return out;
}

} // namespace detail

/// Psi_{g,g*}(y).
inline cplx frame_function(int g1, int g2, int k1, int k2, double y1, double y2, double b)
{
    GaborWindow win;
    double s1 = y1 - g1;
    double s2 = y2 - g2;
    double wv = win(s1, s2);
    if (wv == 0.0) {
        return {0.0, 0.0};
    }
    return peierls_phase(y1, y2, g1, g2, b) * wv / (2.0 * std::numbers::pi) *
           std::polar(1.0, k1 * s1 + k2 * s2);
}

/// <Psi_{g,g*}, f> by tensor Gauss-Legendre over the support cell.
inline cplx frame_coefficient(const PlaneFunction& f, int g1, int g2, int k1, int k2, const GaborFrameSpec& spec)
{
    detail::CellRule cr = detail::cell_rule(spec);
    cplx acc(0.0, 0.0);
    for (std::size_t i = 0; i < cr.s.size(); ++i) {
        for (std::size_t j = 0; j < cr.s.size(); ++j) {
            double y1 = g1 + cr.s[i];
            double y2 = g2 + cr.s[j];
            cplx psi = peierls_phase(y1, y2, g1, g2, spec.b) * std::polar(1.0, k1 * cr.s[i] + k2 * cr.s[j]);
            acc += cr.w[i] * cr.w[j] * std::conj(psi) * f(y1, y2);
        }
    }
    return acc / (2.0 * std::numbers::pi);
}

/// All coefficients in the truncation window. Layout: for lattice index
/// (g1, g2) in [-Gamma, Gamma]^2 row-major, a (2 Gamma* + 1)^2 block with
/// dual index (k1, k2) row-major.
struct FrameCoefficients
{
    int Gamma = 0;
    int Gamma_star = 0;
    std::vector<cplx> values;

    std::size_t side() const { return static_cast<std::size_t>(2 * Gamma + 1); }
    std::size_t dual_side() const { return static_cast<std::size_t>(2 * Gamma_star + 1); }

    cplx at(int g1, int g2, int k1, int k2) const
    {
        std::size_t a = static_cast<std::size_t>(g1 + Gamma) * side() + static_cast<std::size_t>(g2 + Gamma);
        std::size_t d = static_cast<std::size_t>(k1 + Gamma_star) * dual_side() +
                        static_cast<std::size_t>(k2 + Gamma_star);
        return values[a * dual_side() * dual_side() + d];
    }

    /// sum of |c|^2 over |g*|_inf <= gs (gs <= Gamma_star).
    double energy(int gs) const
    {
        double s = 0.0;
        for (int g1 = -Gamma; g1 <= Gamma; ++g1) {
            for (int g2 = -Gamma; g2 <= Gamma; ++g2) {
                for (int k1 = -gs; k1 <= gs; ++k1) {
                    for (int k2 = -gs; k2 <= gs; ++k2) {
                        s += std::norm(at(g1, g2, k1, k2));
                    }
                }
            }
        }
        return s;
    }
};

inline FrameCoefficients frame_coefficients(const PlaneFunction& f, const GaborFrameSpec& spec)
{
    require(spec.Gamma >= 0 && spec.Gamma_star >= 0, "frame truncation radii must be >= 0");
    detail::CellRule cr = detail::cell_rule(spec);
    const std::size_t m = cr.s.size();
    FrameCoefficients out;
    out.Gamma = spec.Gamma;
    out.Gamma_star = spec.Gamma_star;
    const std::size_t side = out.side();
    const std::size_t ds = out.dual_side();
    out.values.assign(side * side * ds * ds, cplx(0.0, 0.0));
    // E[k][i] = e^{-i k s_i}
    std::vector<cplx> E(ds * m);
    for (std::size_t k = 0; k < ds; ++k) {
        double kk = static_cast<double>(static_cast<int>(k) - spec.Gamma_star);
        for (std::size_t i = 0; i < m; ++i) {
            E[k * m + i] = std::polar(1.0, -kk * cr.s[i]);
        }
    }
    const double inv2pi = 1.0 / (2.0 * std::numbers::pi);
    parallel_for(0, side * side, [&](std::size_t a) {
        int g1 = static_cast<int>(a / side) - spec.Gamma;
        int g2 = static_cast<int>(a % side) - spec.Gamma;
        std::vector<cplx> H(m * m);
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < m; ++j) {
                double y1 = g1 + cr.s[i];
                double y2 = g2 + cr.s[j];
                cplx ph = std::conj(peierls_phase(y1, y2, g1, g2, spec.b));
                H[i * m + j] = cr.w[i] * cr.w[j] * inv2pi * cmul(ph, f(y1, y2));
            }
        }
        std::vector<cplx> T(ds * m);  // T[k1][j] = sum_i E[k1][i] H[i][j]
        for (std::size_t k1 = 0; k1 < ds; ++k1) {
            for (std::size_t j = 0; j < m; ++j) {
                cplx s(0.0, 0.0);
                for (std::size_t i = 0; i < m; ++i) {
                    s += cmul(E[k1 * m + i], H[i * m + j]);
                }
                T[k1 * m + j] = s;
            }
        }
        cplx* blk = &out.values[a * ds * ds];
        for (std::size_t k1 = 0; k1 < ds; ++k1) {
            for (std::size_t k2 = 0; k2 < ds; ++k2) {
                cplx s(0.0, 0.0);
                for (std::size_t j = 0; j < m; ++j) {
                    s += cmul(T[k1 * m + j], E[k2 * m + j]);
                }
                blk[k1 * ds + k2] = s;
            }
        }
    });
    return out;
}

/// ||f||^2 over the square |y|_inf <= half_width by composite Gauss-Legendre.
inline double l2_norm_squared(const PlaneFunction& f, double half_width, double panel = 0.5, std::size_t order = 8)
{
    std::vector<double> breaks;
    auto np = static_cast<std::size_t>(std::ceil(2.0 * half_width / panel));
    for (std::size_t k = 0; k <= np; ++k) {
        breaks.push_back(-half_width + 2.0 * half_width * static_cast<double>(k) / static_cast<double>(np));
    }
    PanelRule pr = composite_gauss_legendre(breaks, order);
    double s = 0.0;
    for (std::size_t i = 0; i < pr.nodes.size(); ++i) {
        for (std::size_t j = 0; j < pr.nodes.size(); ++j) {
            s += pr.weights[i] * pr.weights[j] * std::norm(f(pr.nodes[i], pr.nodes[j]));
        }
    }
    return s;
}

struct ParsevalReport
{
    double norm_squared = 0.0;
    double frame_energy = 0.0;
    double defect = 0.0;  // |norm^2 - energy| / norm^2
    double ratio = 0.0;   // energy / norm^2; a systematic departure from 1 flags a normalization error
};

/// Parseval defect at the spec truncation; ||f||^2 is integrated
/// independently over a box 10 units wider than the lattice window.
inline ParsevalReport parseval_check(const PlaneFunction& f, const GaborFrameSpec& spec)
{
    ParsevalReport r;
    r.norm_squared = l2_norm_squared(f, spec.Gamma + 10.0);
    require(r.norm_squared > 0.0, "Parseval check needs a nonzero function");
    FrameCoefficients c = frame_coefficients(f, spec);
    r.frame_energy = c.energy(spec.Gamma_star);
    r.defect = std::fabs(r.norm_squared - r.frame_energy) / r.norm_squared;
    r.ratio = r.frame_energy / r.norm_squared;
    return r;
}

struct CatalogEntry
{
    std::string name;
    PlaneFunction f;
    double norm_squared;  // closed form
};

/// Schwartz-type test functions with closed-form L2 norms.
inline std::vector<CatalogEntry> parseval_catalog(double b = 1.0)
{
    const double pi = std::numbers::pi;
    std::vector<CatalogEntry> cat;
    cat.push_back({"gaussian", [](double x, double y) { return cplx(std::exp(-0.5 * (x * x + y * y)), 0.0); }, pi});
    cat.push_back({"shifted_modulated_gaussian",
                   [](double x, double y) {
                       double dx = x - 1.3;
                       double dy = y + 0.7;
                       return std::exp(-0.5 * (dx * dx + dy * dy)) * std::polar(1.0, 2.0 * x - 1.5 * y);
                   },
                   pi});
    cat.push_back({"anisotropic_gaussian",
                   [](double x, double y) { return cplx(std::exp(-0.5 * x * x - y * y / 4.5), 0.0); },
                   pi * 1.5});
    cat.push_back({"hermite_1_0",
                   [](double x, double y) { return cplx(x * std::exp(-0.5 * (x * x + y * y)), 0.0); }, 0.5 * pi});
    cat.push_back({"landau_cell_1",
                   [b](double x, double y) { return cplx(cell(1, std::hypot(x, y), b), 0.0); },
                   b / (2.0 * pi)});
    return cat;
}

struct DecayEntry
{
    int a1, a2, as1, as2, b1, b2, bs1, bs2;
    double magnitude;
    double weighted;
};

struct DecayScanRanges
{
    int lattice = 4;   // |alpha - beta|_inf <= lattice
    int dual = 8;      // |alpha* - beta*|_inf <= dual
    std::vector<std::array<int, 4>> bases{{0, 0, 0, 0}};  // (beta, beta*)
};

struct DecayScan
{
    std::vector<DecayEntry> rows;
    double sup_weighted = 0.0;
    double sup_diagonal = 0.0;
};

/// |<Psi_a, T Psi_b>| <a - b>^n <a* - b*>^n over the scan, with T applied by
/// the twisted kernel sum on the grid (frame functions sampled at grid points).
inline DecayScan matrix_decay_scan(const GridKernel& T, const DecayScanRanges& ranges, int order)
{
    const GridSpec& s = T.spec();
    const double h = s.h();
    const long c = static_cast<long>(s.origin());
    const double b = s.b;
    // grid offsets covering one support cell (-1, 1)^2
    const long half = static_cast<long>(std::ceil(1.0 / h));
    auto jb = [](double d) { return std::sqrt(1.0 + d); };
    DecayScan out;
    for (const auto& base : ranges.bases) {
        const int b1 = base[0], b2 = base[1], bs1 = base[2], bs2 = base[3];
        // (T Psi_beta) at the sample points of every alpha cell
        for (int d1 = -ranges.lattice; d1 <= ranges.lattice; ++d1) {
            for (int d2 = -ranges.lattice; d2 <= ranges.lattice; ++d2) {
                const int a1 = b1 + d1;
                const int a2 = b2 + d2;
                struct Pt
                {
                    long i, j;
                    double x1, x2;
                };
                auto cell_points = [&](int g1, int g2) {
                    std::vector<Pt> pts;
                    long ci = c + std::lround(g1 / h);
                    long cj = c + std::lround(g2 / h);
                    for (long i = ci - half; i <= ci + half; ++i) {
                        for (long j = cj - half; j <= cj + half; ++j) {
                            double x1 = static_cast<double>(i - c) * h;
                            double x2 = static_cast<double>(j - c) * h;
                            if (std::fabs(x1 - g1) < 1.0 && std::fabs(x2 - g2) < 1.0) {
                                pts.push_back({i, j, x1, x2});
                            }
                        }
                    }
                    return pts;
                };
                std::vector<Pt> ya = cell_points(a1, a2);
                std::vector<Pt> yb = cell_points(b1, b2);
                std::vector<cplx> psi_b(yb.size());
                for (std::size_t q = 0; q < yb.size(); ++q) {
                    psi_b[q] = frame_function(b1, b2, bs1, bs2, yb[q].x1, yb[q].x2, b);
                }
                std::vector<cplx> tpsi(ya.size());
                for (std::size_t p = 0; p < ya.size(); ++p) {
                    cplx acc(0.0, 0.0);
                    for (std::size_t q = 0; q < yb.size(); ++q) {
                        cplx k = T.at_offset(ya[p].i - yb[q].i, ya[p].j - yb[q].j);
                        if (k == cplx(0.0, 0.0)) {
                            continue;
                        }
                        acc += peierls_phase(ya[p].x1, ya[p].x2, yb[q].x1, yb[q].x2, b) * k * psi_b[q];
                    }
                    tpsi[p] = h * h * acc;
                }
                for (int e1 = -ranges.dual; e1 <= ranges.dual; ++e1) {
                    for (int e2 = -ranges.dual; e2 <= ranges.dual; ++e2) {
                        const int as1 = bs1 + e1;
                        const int as2 = bs2 + e2;
                        cplx m(0.0, 0.0);
                        for (std::size_t p = 0; p < ya.size(); ++p) {
                            m += std::conj(frame_function(a1, a2, as1, as2, ya[p].x1, ya[p].x2, b)) * tpsi[p];
                        }
                        m *= h * h;
                        double mag = std::abs(m);
                        double wl = jb(static_cast<double>(d1 * d1 + d2 * d2));
                        double wd = jb(static_cast<double>(e1 * e1 + e2 * e2));
                        double weighted = mag * std::pow(wl, order) * std::pow(wd, order);
                        out.rows.push_back({a1, a2, as1, as2, b1, b2, bs1, bs2, mag, weighted});
                        out.sup_weighted = std::max(out.sup_weighted, weighted);
                        if (d1 == 0 && d2 == 0 && e1 == 0 && e2 == 0) {
                            out.sup_diagonal = std::max(out.sup_diagonal, mag);
                        }
                    }
                }
            }
        }
    }
    return out;
}

inline void write_decay_csv(std::ostream& os, const DecayScan& scan)
{
    auto old = os.precision(17);
    os << "alpha1,alpha2,alpha_star1,alpha_star2,beta1,beta2,beta_star1,beta_star2,magnitude,weighted_magnitude\n";
    for (const auto& r : scan.rows) {
        os << r.a1 << ',' << r.a2 << ',' << r.as1 << ',' << r.as2 << ',' << r.b1 << ',' << r.b2 << ',' << r.bs1
           << ',' << r.bs2 << ',' << r.magnitude << ',' << r.weighted << '\n';
    }
    os.precision(old);
}

} // namespace lhf
