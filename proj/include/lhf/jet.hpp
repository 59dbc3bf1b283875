#pragma once

// Truncated Taylor series arithmetic. A Jet holds c_k = f^{(k)}(t0)/k! for
// k = 0..order, which gives exact derivative tables of compositions without
// finite differences.

#include <array>
#include <cmath>
#include <cstddef>

#include "error.hpp"

namespace lhf {

inline constexpr std::size_t max_jet_order = 15;

struct Jet
{
    std::size_t order = 0;
    std::array<double, max_jet_order + 1> c{};

    static Jet constant(double v, std::size_t order)
    {
        require(order <= max_jet_order, "jet order exceeds the supported maximum");
        Jet j;
        j.order = order;
        j.c[0] = v;
        return j;
    }

    /// The identity map t -> t around t0, scaled: s * (t - t0) + v.
    static Jet affine(double v, double slope, std::size_t order)
    {
        Jet j = constant(v, order);
        if (order >= 1) {
            j.c[1] = slope;
        }
        return j;
    }

    /// k-th derivative at the expansion point.
    double derivative(std::size_t k) const
    {
        double f = 1.0;
        for (std::size_t i = 2; i <= k; ++i) {
            f *= static_cast<double>(i);
        }
        return c[k] * f;
    }
};

inline Jet operator+(Jet a, const Jet& b)
{
    for (std::size_t k = 0; k <= a.order; ++k) {
        a.c[k] += b.c[k];
    }
    return a;
}

inline Jet operator-(Jet a, const Jet& b)
{
    for (std::size_t k = 0; k <= a.order; ++k) {
        a.c[k] -= b.c[k];
    }
    return a;
}

inline Jet operator*(double s, Jet a)
{
    for (std::size_t k = 0; k <= a.order; ++k) {
        a.c[k] *= s;
    }
    return a;
}

inline Jet operator*(const Jet& a, const Jet& b)
{
    Jet r = Jet::constant(0.0, a.order);
    for (std::size_t k = 0; k <= a.order; ++k) {
        double s = 0.0;
        for (std::size_t j = 0; j <= k; ++j) {
            s += a.c[j] * b.c[k - j];
        }
        r.c[k] = s;
    }
    return r;
}

inline Jet reciprocal(const Jet& a)
{
    Jet r = Jet::constant(1.0 / a.c[0], a.order);
    for (std::size_t k = 1; k <= a.order; ++k) {
        double s = 0.0;
        for (std::size_t j = 1; j <= k; ++j) {
            s += a.c[j] * r.c[k - j];
        }
        r.c[k] = -s / a.c[0];
    }
    return r;
}

inline Jet operator/(const Jet& a, const Jet& b) { return a * reciprocal(b); }

inline Jet exp(const Jet& a)
{
    Jet r = Jet::constant(std::exp(a.c[0]), a.order);
    for (std::size_t k = 1; k <= a.order; ++k) {
        double s = 0.0;
        for (std::size_t j = 1; j <= k; ++j) {
            s += static_cast<double>(j) * a.c[j] * r.c[k - j];
        }
        r.c[k] = s / static_cast<double>(k);
    }
    return r;
}

} // namespace lhf
