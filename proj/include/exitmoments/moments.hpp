#pragma once

#include "exitmoments/errors.hpp"
#include "exitmoments/quadrature.hpp"
#include "exitmoments/warping.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

namespace exitmoments {

// ============================================================================
// Model balls and exit-time moments
// ============================================================================

// Geodesic ball of radius r about the pole of the n-dimensional model with
// warping h: metric dt^2 + h^2(t) dtheta^2.
struct ModelBall {
    int n;
    WarpingFunction warping;
    double r;

    ModelBall(int n_, WarpingFunction w, double r_) : n(n_), warping(std::move(w)), r(r_) {
        if (n < 2) throw OutOfRange("model dimension must be >= 2");
        if (!(r > 0.0)) throw OutOfRange("ball radius must be positive");
        if (r > warping.t_max() * (1.0 + 1e-12))
            throw OutOfRange("ball radius exceeds the warping grid");
    }
};

// Parameters of the mean-exit upper bound for cylindrically bounded domains:
// intrinsic dimension m, fiber dimension l, exponent eta (beta = eta - 1) and
// the radius r_d of the ball containing the projection.
struct BoundSpec {
    int m;
    int l;
    double eta;
    double r_d;
    WarpingFunction warping;

    BoundSpec(int m_, int l_, double eta_, double r_d_, WarpingFunction w)
        : m(m_), l(l_), eta(eta_), r_d(r_d_), warping(std::move(w)) {
        if (l < 0 || m < l + 1) throw OutOfRange("need m >= l + 1 and l >= 0");
        if (!(eta > 0.0)) throw EtaNonPositive("eta must be positive (beta = eta - 1 > -1)");
        if (!(r_d > 0.0) || r_d > warping.t_max() * (1.0 + 1e-12))
            throw OutOfRange("r_d outside the warping grid");
    }
};

struct QuadratureOptions {
    std::size_t grid_cells = 4096;
    // Combine the grid with its half-resolution subgrid as (4 f - c)/3,
    // cancelling the leading O(step^2) trapezoid error. Used by the
    // acceptance runs; the plain grid is the default everywhere else.
    bool richardson = false;
};

enum class MomentMethod { quadrature, monte_carlo };

struct MomentTable {
    int n = 0;
    double r = 0.0;
    int max_order = 0;
    std::vector<double> grid;                 // radial nodes in [0, r]
    std::vector<std::vector<double>> values;  // values[k][i] = u^k(t_i)
    MomentMethod method = MomentMethod::quadrature;

    double value_at(int k, double t) const {
        if (k < 0 || k > max_order) throw NegativeOrder("moment order outside the table");
        if (!(t >= 0.0) || t > r * (1.0 + 1e-12)) throw OutOfRange("t outside [0, r]");
        double step = grid[1] - grid[0];
        return detail::lerp_uniform(values[static_cast<std::size_t>(k)], step, std::min(t, r));
    }
};

namespace detail {

struct RadialGrid {
    std::vector<double> t;
    std::vector<double> weight;  // h(t_i)^beta
    std::size_t cutoff;          // asymptote region is i <= cutoff
    double step;
};

// series_radius <= 0 selects the default max(10 step, 1e-3). The Richardson
// driver passes the coarse grid's radius to both resolutions so that the
// corner treatment is common and the step^2 error cancels cleanly.
inline double default_series_radius(double r, double step) {
    return std::min(std::max(10.0 * step, 1e-3), 0.25 * r);
}

inline RadialGrid make_radial_grid(const WarpingFunction& w, double r, double beta,
                                   std::size_t cells, double series_radius = 0.0) {
    RadialGrid g;
    g.step = r / static_cast<double>(cells);
    g.t.resize(cells + 1);
    g.weight.resize(cells + 1);
    for (std::size_t i = 0; i <= cells; ++i) {
        g.t[i] = g.step * static_cast<double>(i);
        g.weight[i] = i == 0 ? 0.0 : std::pow(w.value(std::min(g.t[i], r)), beta);
    }
    if (series_radius <= 0.0) series_radius = default_series_radius(r, g.step);
    g.cutoff = std::max<std::size_t>(1, static_cast<std::size_t>(series_radius / g.step));
    if (g.cutoff >= cells - 1) g.cutoff = cells >= 3 ? cells - 2 : 1;
    return g;
}

// u^0..u^K on the grid via the recursion
// u^k(t) = k * integral_t^r (integral_0^tau h^{n-1} u^{k-1}) / h^{n-1}(tau) dtau.
inline std::vector<std::vector<double>> moment_arrays(const ModelBall& ball, int max_order,
                                                      std::size_t cells, RadialGrid& grid_out,
                                                      double series_radius = 0.0) {
    const double beta = static_cast<double>(ball.n - 1);
    grid_out = make_radial_grid(ball.warping, ball.r, beta, cells, series_radius);
    std::vector<std::vector<double>> u(static_cast<std::size_t>(max_order) + 1);
    u[0].assign(grid_out.t.size(), 1.0);
    for (int k = 1; k <= max_order; ++k) {
        auto rt = ratio_tail_integral(grid_out.t, grid_out.weight, u[static_cast<std::size_t>(k - 1)],
                                      beta, grid_out.cutoff);
        auto& uk = u[static_cast<std::size_t>(k)];
        uk = std::move(rt.tail);
        for (auto& v : uk) v *= static_cast<double>(k);
    }
    return u;
}

inline double moment_value_plain(const ModelBall& ball, int k, double t, std::size_t cells,
                                 double series_radius = 0.0) {
    RadialGrid grid;
    auto u = moment_arrays(ball, k, cells, grid, series_radius);
    return lerp_uniform(u[static_cast<std::size_t>(k)], grid.step, std::min(t, ball.r));
}

inline double bound_value_plain(const WarpingFunction& w, double eta, double r, std::size_t cells,
                                double series_radius = 0.0) {
    const double beta = eta - 1.0;
    auto grid = make_radial_grid(w, r, beta, cells, series_radius);
    auto rt = ratio_tail_integral(grid.t, grid.weight, {}, beta, grid.cutoff);
    return rt.tail.front();
}

}  // namespace detail

// E(t) = integral_t^r vol(B(tau))/vol(dB(tau)) dtau on the model ball.
inline double mean_exit_time(const ModelBall& ball, double t,
                             const QuadratureOptions& opt = {});

// k-th exit-time moment u^k(t); u^0 == 1.
inline double exit_moment(const ModelBall& ball, int k, double t,
                          const QuadratureOptions& opt = {}) {
    if (k < 0) throw NegativeOrder("moment order must be >= 0");
    if (!(t >= 0.0) || t > ball.r * (1.0 + 1e-12)) throw OutOfRange("t outside [0, r]");
    if (k == 0) return 1.0;
    if (!opt.richardson) return detail::moment_value_plain(ball, k, t, opt.grid_cells);
    double radius = detail::default_series_radius(
        ball.r, ball.r / static_cast<double>(opt.grid_cells / 2));
    double fine = detail::moment_value_plain(ball, k, t, opt.grid_cells, radius);
    double coarse = detail::moment_value_plain(ball, k, t, opt.grid_cells / 2, radius);
    return (4.0 * fine - coarse) / 3.0;
}

inline double mean_exit_time(const ModelBall& ball, double t, const QuadratureOptions& opt) {
    return exit_moment(ball, 1, t, opt);
}

// U(0) = integral_0^{r_d} (integral_0^tau h^{eta-1}) / h^{eta-1}(tau) dtau,
// the mean-exit upper bound for the cylinder criterion. With eta equal to the
// model dimension this is exactly the model ball's mean exit time from the
// center, computed through the identical discretization.
inline double cylinder_mean_exit_bound(const BoundSpec& spec, const QuadratureOptions& opt = {}) {
    if (!opt.richardson)
        return detail::bound_value_plain(spec.warping, spec.eta, spec.r_d, opt.grid_cells);
    double radius = detail::default_series_radius(
        spec.r_d, spec.r_d / static_cast<double>(opt.grid_cells / 2));
    double fine = detail::bound_value_plain(spec.warping, spec.eta, spec.r_d, opt.grid_cells, radius);
    double coarse =
        detail::bound_value_plain(spec.warping, spec.eta, spec.r_d, opt.grid_cells / 2, radius);
    return (4.0 * fine - coarse) / 3.0;
}

// k! * (cylinder bound)^k, the factorial tower estimate for the k-th moment.
inline double moment_tower_bound(const BoundSpec& spec, int k, const QuadratureOptions& opt = {}) {
    if (k < 1) throw NegativeOrder("tower bound needs k >= 1");
    double base = cylinder_mean_exit_bound(spec, opt);
    double out = 1.0;
    for (int i = 1; i <= k; ++i) out *= static_cast<double>(i) * base;
    return out;
}

inline MomentTable moment_table(const ModelBall& ball, int max_order,
                                const QuadratureOptions& opt = {}) {
    if (max_order < 0) throw NegativeOrder("table order must be >= 0");
    MomentTable table;
    table.n = ball.n;
    table.r = ball.r;
    table.max_order = max_order;
    table.method = MomentMethod::quadrature;
    detail::RadialGrid grid;
    // The extrapolated table lives on the coarse nodes, so the fine count
    // must be even for the grids to nest.
    std::size_t cells = opt.richardson ? opt.grid_cells & ~std::size_t{1} : opt.grid_cells;
    double radius = opt.richardson
                        ? detail::default_series_radius(
                              ball.r, ball.r / static_cast<double>(cells / 2))
                        : 0.0;
    auto u = detail::moment_arrays(ball, max_order, cells, grid, radius);
    if (opt.richardson) {
        detail::RadialGrid cgrid;
        auto uc = detail::moment_arrays(ball, max_order, cells / 2, cgrid, radius);
        // Shared nodes are every second fine node; emit the extrapolated table
        // on the coarse grid.
        table.grid = cgrid.t;
        table.values.resize(u.size());
        for (std::size_t k = 0; k < u.size(); ++k) {
            table.values[k].resize(cgrid.t.size());
            for (std::size_t i = 0; i < cgrid.t.size(); ++i)
                table.values[k][i] = (4.0 * u[k][2 * i] - uc[k][i]) / 3.0;
        }
    } else {
        table.grid = grid.t;
        table.values = std::move(u);
    }
    return table;
}

// CSV: one comment line with the ball metadata, then t,u0,...,uK.
inline void export_moment_csv(const MomentTable& table, std::ostream& out) {
    out << "# n=" << table.n << ",r=";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", table.r);
    out << buf << ",method="
        << (table.method == MomentMethod::quadrature ? "quadrature" : "monte_carlo") << "\n";
    out << "t";
    for (int k = 0; k <= table.max_order; ++k) out << ",u" << k;
    out << "\n";
    for (std::size_t i = 0; i < table.grid.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.12g", table.grid[i]);
        out << buf;
        for (int k = 0; k <= table.max_order; ++k) {
            std::snprintf(buf, sizeof(buf), ",%.12g", table.values[static_cast<std::size_t>(k)][i]);
            out << buf;
        }
        out << "\n";
    }
}

}  // namespace exitmoments
