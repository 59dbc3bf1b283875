#pragma once

// Non-radial Hartree-Fock in the matrix-unit basis of the twisted algebra.
// Invariant operators are A = sum a_nm F_nm with F_nm * F_kl = delta_mk F_nl,
// so products are matrix products of the coefficient arrays. A potential that
// is not rotation invariant couples levels, which the radial solver cannot
// represent; this module supplies the interacting projection P_lambda used by
// the Kato-Nagy and boundary-trace checks.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <sstream>
#include <vector>

#include "error.hpp"
#include "quadrature.hpp"
#include "twisted_grid.hpp"

namespace lhf {

/// v(u) = A exp(-u1^2/(2 s1^2) - u2^2/(2 s2^2)); even, bounded, integrable.
struct AnisotropicGaussian
{
    double amplitude = 1.0;
    double sigma1 = 1.0;
    double sigma2 = 2.0;

    double value(double u1, double u2) const
    {
        return amplitude * std::exp(-0.5 * (u1 * u1 / (sigma1 * sigma1) + u2 * u2 / (sigma2 * sigma2)));
    }
    double integral() const { return 2.0 * std::numbers::pi * amplitude * sigma1 * sigma2; }
};

inline double generalized_laguerre(std::size_t m, double alpha, double x)
{
    double p0 = 1.0;
    if (m == 0) {
        return p0;
    }
    double p1 = 1.0 + alpha - x;
    for (std::size_t k = 1; k < m; ++k) {
        double kd = static_cast<double>(k);
        double p2 = ((2.0 * kd + 1.0 + alpha - x) * p1 - (kd + alpha) * p0) / (kd + 1.0);
        p0 = p1;
        p1 = p2;
    }
    return p1;
}

/// Reduced kernel of the matrix unit F_nm. For n >= m:
///   (b/2pi) sqrt(m!/n!) zeta^{n-m} L_m^{(n-m)}(b|u|^2/2) e^{-b|u|^2/4},
///   zeta = sqrt(b/2) (u1 - i u2);
/// F_mn(u) = conj(F_nm(-u)). F_nn is the Landau cell.
inline cplx matrix_unit(std::size_t n, std::size_t m, double u1, double u2, double b)
{
    if (n < m) {
        return std::conj(matrix_unit(m, n, -u1, -u2, b));
    }
    double t = 0.5 * b * (u1 * u1 + u2 * u2);
    double ratio = 1.0;
    for (std::size_t k = m + 1; k <= n; ++k) {
        ratio /= static_cast<double>(k);
    }
    cplx zeta = std::sqrt(0.5 * b) * cplx(u1, -u2);
    cplx zp(1.0, 0.0);
    for (std::size_t k = m; k < n; ++k) {
        zp *= zeta;
    }
    double radial = b / (2.0 * std::numbers::pi) * std::sqrt(ratio) *
                    generalized_laguerre(m, static_cast<double>(n - m), t) * std::exp(-0.5 * t);
    return radial * zp;
}

inline GridKernel matrix_unit_kernel(std::size_t n, std::size_t m, const GridSpec& spec)
{
    validate(spec);
    std::size_t top = std::max(n, m);
    double limit = 0.5 / std::sqrt(spec.b * static_cast<double>(top + 1));
    require(spec.h() <= limit, "grid spacing does not resolve the matrix unit");
    return GridKernel::sample(spec, [&](double a, double c) { return matrix_unit(n, m, a, c, spec.b); });
}

/// Kernel of sum_nm a(n, m) F_nm.
inline GridKernel synthesize_matrix_kernel(const Eigen::MatrixXcd& a, const GridSpec& spec)
{
    validate(spec);
    GridKernel out(spec);
    const auto K = static_cast<std::size_t>(a.rows());
    for (std::size_t n = 0; n < K; ++n) {
        for (std::size_t m = 0; m < K; ++m) {
            cplx c = a(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
            if (c == cplx(0.0, 0.0)) {
                continue;
            }
            for (std::size_t i = 0; i < spec.n; ++i) {
                for (std::size_t j = 0; j < spec.n; ++j) {
                    out(i, j) += c * matrix_unit(n, m, spec.coord(i), spec.coord(j), spec.b);
                }
            }
        }
    }
    return out;
}

struct MatrixSolverConfig
{
    double b = 1.0;
    double lambda = 0.02;
    std::size_t filled = 1;  // N: levels below the gap
    std::size_t levels = 8;  // K: Galerkin truncation
    AnisotropicGaussian potential{};
    double tol = 1e-13;
    std::size_t max_iter = 200;
};

/// Exchange matrix elements G[(n,m),(k,l)] = int conj(F_nm) v F_kl d^2u by a
/// polar product rule (Gauss-Legendre panels in r, trapezoid in angle).
class ExchangeTensor
{
  public:
    ExchangeTensor(double b, std::size_t K, const AnisotropicGaussian& v) : K_(K)
    {
        require(b > 0.0 && K >= 1, "exchange tensor needs b > 0 and K >= 1");
        double rmax = cell_extent(K - 1, b);
        std::vector<double> breaks;
        for (double r = 0.0; r < rmax; r += 0.5 / std::sqrt(b)) {
            breaks.push_back(r);
        }
        breaks.push_back(rmax);
        PanelRule radial = composite_gauss_legendre(breaks, 16);
        const std::size_t nth = 128;
        const Eigen::Index npts = static_cast<Eigen::Index>(radial.nodes.size() * nth);
        const Eigen::Index nk = static_cast<Eigen::Index>(K * K);
        Eigen::MatrixXcd A(npts, nk);
        Eigen::VectorXd w(npts);
        Eigen::Index p = 0;
        for (std::size_t ir = 0; ir < radial.nodes.size(); ++ir) {
            double r = radial.nodes[ir];
            for (std::size_t it = 0; it < nth; ++it, ++p) {
                double th = 2.0 * std::numbers::pi * static_cast<double>(it) / static_cast<double>(nth);
                double u1 = r * std::cos(th);
                double u2 = r * std::sin(th);
                w(p) = radial.weights[ir] * r * (2.0 * std::numbers::pi / static_cast<double>(nth)) * v.value(u1, u2);
                for (std::size_t n = 0; n < K; ++n) {
                    for (std::size_t m = 0; m < K; ++m) {
                        A(p, static_cast<Eigen::Index>(n * K + m)) = matrix_unit(n, m, u1, u2, b);
                    }
                }
            }
        }
        G_ = A.adjoint() * w.asDiagonal() * A;
    }

    std::size_t levels() const { return K_; }
    const Eigen::MatrixXcd& matrix() const { return G_; }

  private:
    std::size_t K_;
    Eigen::MatrixXcd G_;
};

struct MatrixSolverReport
{
    bool converged = false;
    std::size_t iterations = 0;
    std::vector<double> residual_history;
    Eigen::MatrixXcd coeffs;      // P_lambda
    Eigen::MatrixXcd free_coeffs; // P_0
    Eigen::VectorXd spectrum;     // eigenvalues of the final effective Hamiltonian
    double gap = 0.0;             // E_{N} - E_{N-1} of that Hamiltonian
};

/// Coefficient matrix of the effective one-particle operator
/// H_b + lambda W_F, W_F = c F(0) Id - v F.
inline Eigen::MatrixXcd effective_matrix(const MatrixSolverConfig& cfg, const ExchangeTensor& G,
                                         const Eigen::MatrixXcd& a)
{
    const auto K = static_cast<Eigen::Index>(cfg.levels);
    const double cell0 = cfg.b / (2.0 * std::numbers::pi);
    Eigen::VectorXcd avec(K * K);
    for (Eigen::Index n = 0; n < K; ++n) {
        for (Eigen::Index m = 0; m < K; ++m) {
            avec(n * K + m) = a(n, m);
        }
    }
    // <F_nm, -v F> / ||F_nm||^2 with ||F_nm||^2 = b/2pi
    Eigen::VectorXcd z = -(G.matrix() * avec) / cell0;
    cplx F0 = cell0 * a.trace();
    Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(K, K);
    for (Eigen::Index n = 0; n < K; ++n) {
        for (Eigen::Index m = 0; m < K; ++m) {
            H(n, m) = cfg.lambda * z(n * K + m);
        }
        H(n, n) += cfg.b * (2.0 * static_cast<double>(n) + 1.0) +
                   cfg.lambda * cfg.potential.integral() * F0;
    }
    return 0.5 * (H + H.adjoint()); // removes quadrature rounding only
}

inline MatrixSolverReport solve_projection_matrix(const MatrixSolverConfig& cfg)
{
    require(cfg.b > 0.0, "b must be positive");
    require(cfg.filled >= 1 && cfg.filled < cfg.levels, "need 1 <= N < K");
    require(std::fabs(cfg.lambda) <= 0.5, "|lambda| must be <= 1/2");
    ExchangeTensor G(cfg.b, cfg.levels, cfg.potential);
    const auto K = static_cast<Eigen::Index>(cfg.levels);
    const auto N = static_cast<Eigen::Index>(cfg.filled);
    MatrixSolverReport rep;
    rep.free_coeffs = Eigen::MatrixXcd::Zero(K, K);
    for (Eigen::Index n = 0; n < N; ++n) {
        rep.free_coeffs(n, n) = 1.0;
    }
    Eigen::MatrixXcd a = rep.free_coeffs;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig;
    for (std::size_t it = 0; it < cfg.max_iter; ++it) {
        eig.compute(effective_matrix(cfg, G, a));
        Eigen::MatrixXcd vecs = eig.eigenvectors().leftCols(N);
        Eigen::MatrixXcd next = vecs * vecs.adjoint();
        double res = (next - a).cwiseAbs().maxCoeff();
        rep.residual_history.push_back(res);
        a = next;
        rep.iterations = it + 1;
        if (res < cfg.tol) {
            rep.converged = true;
            break;
        }
    }
    eig.compute(effective_matrix(cfg, G, a));
    rep.spectrum = eig.eigenvalues();
    rep.gap = rep.spectrum(N) - rep.spectrum(N - 1);
    rep.coeffs = a;
    if (!rep.converged) {
        std::ostringstream os;
        os << "matrix-unit fixed point did not converge in " << cfg.max_iter << " iterations (last residual "
           << rep.residual_history.back() << ")";
        throw ConvergenceError(os.str());
    }
    return rep;
}

} // namespace lhf
