#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace exitmoments::detail {

// ============================================================================
// Shared quadrature kernels
// ============================================================================
//
// Everything radial in this library reduces to integrals of the shape
//
//   T(t) = integral_t^r  R(tau) dtau,   R(tau) = (integral_0^tau w(s) g(s) ds) / w(tau),
//
// where the weight w = phi^beta vanishes like tau^beta at the origin
// (phi(0) = 0, phi'(0) = 1). The ratio R is regular there with
// R(tau) ~ g(0) tau/(beta+1); below a cutoff radius the ratio is replaced by
// that asymptote, which also supplies the starting value of the cumulative
// integral when beta < 0 makes the raw integrand singular.
//
// Composite trapezoid throughout. The tail is accumulated from the right so
// that T(r) = 0 exactly and T is non-increasing term by term; these two
// discrete facts are load-bearing for the moment recursion (boundary value,
// monotonicity and the factorial tower bound all hold in exact arithmetic of
// the discretization, not just in the limit).

struct RatioTail {
    std::vector<double> ratio;  // R on the grid
    std::vector<double> tail;   // T on the grid, tail.back() == 0
};

// grid_t: uniform grid 0 = t_0 < ... < t_M = r
// weight: phi(t_i)^beta
// source: g(t_i); empty span means g == 1
// cutoff: largest index with t_i below the series radius (>= 1)
inline RatioTail ratio_tail_integral(std::span<const double> grid_t,
                                     std::span<const double> weight,
                                     std::span<const double> source, double beta,
                                     std::size_t cutoff) {
    const std::size_t n = grid_t.size();
    const double step = grid_t[1] - grid_t[0];
    const double g0 = source.empty() ? 1.0 : source[0];

    RatioTail out;
    out.ratio.resize(n);
    out.tail.resize(n);

    // Cumulative inner integral of w * g. Inside the asymptote region the
    // closed form g(0) t^(beta+1)/(beta+1) replaces the raw sum (with
    // beta < 0 the integrand blows up at 0 but stays integrable). Past the
    // cutoff, weights with beta < 1 still vary like t^beta across a cell, so
    // those cells integrate the power law exactly and trapezoid only the
    // smooth factor (phi/t)^beta g; for beta >= 1 plain trapezoid applies.
    std::vector<double> cum(n);
    if (cutoff >= n - 1) cutoff = n - 2;
    for (std::size_t i = 0; i <= cutoff; ++i)
        cum[i] = g0 * std::pow(grid_t[i], beta + 1.0) / (beta + 1.0);
    if (beta < 1.0) {
        double prev_t_pow = std::pow(grid_t[cutoff], beta + 1.0);
        double prev_smooth = weight[cutoff] / std::pow(grid_t[cutoff], beta) *
                             (source.empty() ? 1.0 : source[cutoff]);
        for (std::size_t i = cutoff + 1; i < n; ++i) {
            double t_pow = std::pow(grid_t[i], beta + 1.0);
            double smooth =
                weight[i] / std::pow(grid_t[i], beta) * (source.empty() ? 1.0 : source[i]);
            cum[i] = cum[i - 1] +
                     (t_pow - prev_t_pow) / (beta + 1.0) * 0.5 * (prev_smooth + smooth);
            prev_t_pow = t_pow;
            prev_smooth = smooth;
        }
    } else {
        for (std::size_t i = cutoff + 1; i < n; ++i) {
            double fa = weight[i - 1] * (source.empty() ? 1.0 : source[i - 1]);
            double fb = weight[i] * (source.empty() ? 1.0 : source[i]);
            cum[i] = cum[i - 1] + 0.5 * step * (fa + fb);
        }
    }

    for (std::size_t i = 0; i < n; ++i) {
        out.ratio[i] = i <= cutoff ? g0 * grid_t[i] / (beta + 1.0) : cum[i] / weight[i];
    }

    out.tail[n - 1] = 0.0;
    for (std::size_t i = n - 1; i-- > 0;)
        out.tail[i] = out.tail[i + 1] + 0.5 * step * (out.ratio[i] + out.ratio[i + 1]);
    return out;
}

inline std::vector<double> cumulative_trapezoid(std::span<const double> values, double step) {
    std::vector<double> cum(values.size());
    cum[0] = 0.0;
    for (std::size_t i = 1; i < values.size(); ++i)
        cum[i] = cum[i - 1] + 0.5 * step * (values[i - 1] + values[i]);
    return cum;
}

// Linear interpolation on a uniform grid starting at 0.
inline double lerp_uniform(std::span<const double> values, double step, double t) {
    double pos = t / step;
    auto i = static_cast<std::size_t>(pos);
    if (i >= values.size() - 1) return values.back();
    double x = pos - static_cast<double>(i);
    return values[i] + x * (values[i + 1] - values[i]);
}

// C^1 Hermite interpolation on a uniform grid when nodal derivatives are known.
inline double hermite_uniform(std::span<const double> values, std::span<const double> derivs,
                              double step, double t) {
    double pos = t / step;
    auto i = static_cast<std::size_t>(pos);
    if (i >= values.size() - 1) i = values.size() - 2;
    double x = pos - static_cast<double>(i);
    double x2 = x * x;
    double x3 = x2 * x;
    return (2.0 * x3 - 3.0 * x2 + 1.0) * values[i] + (x3 - 2.0 * x2 + x) * step * derivs[i] +
           (-2.0 * x3 + 3.0 * x2) * values[i + 1] + (x3 - x2) * step * derivs[i + 1];
}

}  // namespace exitmoments::detail
