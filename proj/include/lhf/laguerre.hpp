#pragma once

// Laguerre polynomials L_n(t) and the Landau cell functions built from them.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"

namespace lhf {

inline constexpr std::size_t max_laguerre_level = 512;

namespace detail {

inline void check_level(std::size_t n)
{
    require(n <= max_laguerre_level,
            "Laguerre level " + std::to_string(n) + " exceeds the maximum " +
                std::to_string(max_laguerre_level));
}

} // namespace detail

/// L_n(t) by the three-term recurrence (k+1) L_{k+1} = (2k+1-t) L_k - k L_{k-1}.
inline double laguerre(std::size_t n, double t)
{
    detail::check_level(n);
    double prev = 1.0;
    if (n == 0) {
        return prev;
    }
    double cur = 1.0 - t;
    for (std::size_t k = 1; k < n; ++k) {
        double kd = static_cast<double>(k);
        double next = ((2.0 * kd + 1.0 - t) * cur - kd * prev) / (kd + 1.0);
        prev = cur;
        cur = next;
    }
    return cur;
}

namespace detail {

/// Scaled recurrence without the level cap; callers own the bound.
inline void laguerre_scaled_unchecked(double t, std::span<double> out)
{
    if (out.empty()) {
        return;
    }
    constexpr double big = 1e150;
    constexpr double shrink = 1e-150;
    const double log_big = 150.0 * std::numbers::ln10;

    double log_scale = -0.5 * t;
    double factor = std::exp(log_scale);
    auto emit = [&](double v) {
        if (log_scale > -600.0) {
            return v * factor;
        }
        if (v == 0.0) {
            return 0.0;
        }
        return std::copysign(std::exp(log_scale + std::log(std::fabs(v))), v);
    };

    double prev = 1.0;
    out[0] = emit(prev);
    if (out.size() == 1) {
        return;
    }
    double cur = 1.0 - t;
    out[1] = emit(cur);
    for (std::size_t k = 1; k + 1 < out.size(); ++k) {
        double kd = static_cast<double>(k);
        double next = ((2.0 * kd + 1.0 - t) * cur - kd * prev) / (kd + 1.0);
        prev = cur;
        cur = next;
        if (std::fabs(cur) > big) {
            cur *= shrink;
            prev *= shrink;
            log_scale += log_big;
            factor = std::exp(log_scale);
        }
        out[k + 1] = emit(cur);
    }
}

} // namespace detail

/// Fills out[k] = L_k(t) e^{-t/2} for k = 0..out.size()-1.
///
/// The recurrence runs on an unnormalized copy; whenever it grows past
/// 1e150 both carried values are rescaled and the factor moves into a
/// separate log-scale, so nothing overflows even for t ~ 1e4.
inline void laguerre_scaled_all(double t, std::span<double> out)
{
    if (out.empty()) {
        return;
    }
    detail::check_level(out.size() - 1);
    detail::laguerre_scaled_unchecked(t, out);
}

/// L_n(t) e^{-t/2}, finite for all n <= 512 and t >= 0.
inline double laguerre_scaled(std::size_t n, double t)
{
    detail::check_level(n);
    std::vector<double> buf(n + 1);
    laguerre_scaled_all(t, buf);
    return buf[n];
}

/// Landau cell F_n(r) = (b/2pi) L_n(b r^2/2) e^{-b r^2/4}.
inline double cell(std::size_t n, double r, double b)
{
    return b / (2.0 * std::numbers::pi) * laguerre_scaled(n, 0.5 * b * r * r);
}

/// Fills out[n] = F_n(r) for n = 0..out.size()-1.
inline void cells_all(double r, double b, std::span<double> out)
{
    laguerre_scaled_all(0.5 * b * r * r, out);
    const double pref = b / (2.0 * std::numbers::pi);
    for (auto& v : out) {
        v *= pref;
    }
}

} // namespace lhf
