#pragma once

// Test-only oracles. These deliberately do not share code with the library's
// quadrature path: plain forward cumulative sums on their own fine grid, no
// series asymptote, tail values by subtraction from the total. Agreement
// between this path and the library is the point of the comparisons.

#include <cmath>
#include <cstddef>
#include <random>
#include <vector>

namespace oracles {

// Exit moments of the flat model ball (h(s) = s) by direct nested trapezoid.
// Returns u^k on the oracle grid; u^0 == 1.
inline std::vector<std::vector<double>> flat_moment_profiles(int n, double r, int max_k,
                                                             std::size_t cells) {
    const std::size_t m = cells + 1;
    const double step = r / static_cast<double>(cells);
    std::vector<double> t(m), w(m);
    for (std::size_t i = 0; i < m; ++i) {
        t[i] = step * static_cast<double>(i);
        w[i] = std::pow(t[i], n - 1);
    }
    std::vector<std::vector<double>> u(static_cast<std::size_t>(max_k) + 1,
                                       std::vector<double>(m, 1.0));
    for (int k = 1; k <= max_k; ++k) {
        const auto& prev = u[static_cast<std::size_t>(k - 1)];
        std::vector<double> inner(m, 0.0);
        for (std::size_t i = 1; i < m; ++i)
            inner[i] = inner[i - 1] + 0.5 * step * (w[i - 1] * prev[i - 1] + w[i] * prev[i]);
        std::vector<double> ratio(m, 0.0);
        for (std::size_t i = 1; i < m; ++i) ratio[i] = inner[i] / w[i];
        std::vector<double> cum(m, 0.0);
        for (std::size_t i = 1; i < m; ++i)
            cum[i] = cum[i - 1] + 0.5 * step * (ratio[i - 1] + ratio[i]);
        auto& uk = u[static_cast<std::size_t>(k)];
        for (std::size_t i = 0; i < m; ++i) uk[i] = static_cast<double>(k) * (cum[m - 1] - cum[i]);
    }
    return u;
}

inline double flat_exit_moment(int n, double r, int k, double t, std::size_t cells = 32768) {
    auto u = flat_moment_profiles(n, r, k, cells);
    double step = r / static_cast<double>(cells);
    double pos = t / step;
    auto i = static_cast<std::size_t>(pos);
    if (i >= cells) return u[static_cast<std::size_t>(k)].back();
    double x = pos - static_cast<double>(i);
    const auto& uk = u[static_cast<std::size_t>(k)];
    return uk[i] + x * (uk[i + 1] - uk[i]);
}

inline double flat_mean_exit(int n, double r, double t) {
    return (r * r - t * t) / (2.0 * static_cast<double>(n));
}

}  // namespace oracles
