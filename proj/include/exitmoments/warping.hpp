#pragma once

#include "exitmoments/errors.hpp"
#include "exitmoments/profile.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <ostream>
#include <vector>

namespace exitmoments {

// ============================================================================
// WarpingFunction: grid solution of  h'' = G h,  h(0) = 0, h'(0) = 1
// ============================================================================
//
// The solution controls all radial geometry downstream: with G >= 0 it
// satisfies h(t) >= t, h > 0 for t > 0 and h' non-decreasing. Values are
// stored on a uniform grid; h'' = G h is kept alongside so that both h and h'
// interpolate with C^1 Hermite cubics. For constant curvature the closed form
// is used instead of the integrator and evaluations are analytic.

enum class ClosedForm { none, euclidean, hyperbolic };

class WarpingFunction {
public:
    WarpingFunction(double t_max, std::vector<double> h, std::vector<double> h_prime,
                    std::vector<double> h_second, double g_at_zero, ClosedForm tag,
                    double b, double tol)
        : t_max_(t_max),
          step_(t_max / static_cast<double>(h.size() - 1)),
          g_at_zero_(g_at_zero),
          b_(b),
          tag_(tag),
          h_(std::move(h)),
          hp_(std::move(h_prime)),
          hpp_(std::move(h_second)) {
        if (std::abs(hp_.front() - 1.0) > std::max(tol, 1e-12))
            throw NonPositiveH("initial slope deviates from 1");
        for (std::size_t i = 1; i < h_.size(); ++i) {
            if (!(h_[i] > 0.0)) throw NonPositiveH("h <= 0 at t > 0; decrease the step or tol");
        }
        series_cutoff_ = std::max(10.0 * step_, 1e-3);
    }

    double t_max() const { return t_max_; }
    double step() const { return step_; }
    std::size_t size() const { return h_.size(); }
    double grid_t(std::size_t i) const { return static_cast<double>(i) * step_; }
    const std::vector<double>& h_values() const { return h_; }
    const std::vector<double>& h_prime_values() const { return hp_; }
    const std::vector<double>& h_second_values() const { return hpp_; }
    ClosedForm closed_form() const { return tag_; }
    double curvature_at_zero() const { return g_at_zero_; }
    // Below this radius h'/h switches to its series; see log_derivative.
    double series_cutoff() const { return series_cutoff_; }

    double value(double t) const {
        check_range(t);
        if (t == 0.0) return 0.0;
        switch (tag_) {
            case ClosedForm::euclidean: return t;
            case ClosedForm::hyperbolic: {
                double s = std::sqrt(b_);
                return std::sinh(s * t) / s;
            }
            case ClosedForm::none: break;
        }
        return hermite(h_, hp_, t);
    }

    double derivative(double t) const {
        check_range(t);
        switch (tag_) {
            case ClosedForm::euclidean: return 1.0;
            case ClosedForm::hyperbolic: return std::cosh(std::sqrt(b_) * t);
            case ClosedForm::none: break;
        }
        return hermite(hp_, hpp_, t);
    }

    // h'/h with the 0/0 corner at t = 0 handled by the expansion
    // h'/h = 1/t + (G(0)/3) t + O(t^3), used below the series cutoff.
    double log_derivative(double t) const {
        if (t == 0.0) throw SingularAtZero("h'/h is singular at t = 0");
        check_range(t);
        if (t < series_cutoff_) return 1.0 / t + g_at_zero_ * t / 3.0;
        return derivative(t) / value(t);
    }

private:
    void check_range(double t) const {
        if (!(t >= 0.0) || t > t_max_ * (1.0 + 1e-12))
            throw OutOfRange("t outside [0, t_max]");
    }

    // C^1 cubic through (f_i, f'_i) and (f_{i+1}, f'_{i+1}) on the cell holding t.
    double hermite(const std::vector<double>& f, const std::vector<double>& fp, double t) const {
        double pos = t / step_;
        auto i = static_cast<std::size_t>(pos);
        if (i >= f.size() - 1) i = f.size() - 2;
        double x = pos - static_cast<double>(i);  // in [0, 1]
        double x2 = x * x;
        double x3 = x2 * x;
        double h00 = 2.0 * x3 - 3.0 * x2 + 1.0;
        double h10 = x3 - 2.0 * x2 + x;
        double h01 = -2.0 * x3 + 3.0 * x2;
        double h11 = x3 - x2;
        return h00 * f[i] + h10 * step_ * fp[i] + h01 * f[i + 1] + h11 * step_ * fp[i + 1];
    }

    double t_max_;
    double step_;
    double g_at_zero_;
    double b_;  // curvature bound when tag_ == hyperbolic
    ClosedForm tag_;
    double series_cutoff_;
    std::vector<double> h_, hp_, hpp_;
};

// ============================================================================
// solve_warping
// ============================================================================

namespace detail {

// Classical RK4 on y = (h, h'), y' = (h', G(t) h). The rejection of G < 0
// happens inside CurvatureProfile::operator().
inline void rk4_step(const CurvatureProfile& g, double t, double dt, double& h, double& hp) {
    auto f = [&](double tt, double y0, double y1, double& d0, double& d1) {
        d0 = y1;
        d1 = g(tt) * y0;
    };
    double k1h, k1p, k2h, k2p, k3h, k3p, k4h, k4p;
    f(t, h, hp, k1h, k1p);
    f(t + 0.5 * dt, h + 0.5 * dt * k1h, hp + 0.5 * dt * k1p, k2h, k2p);
    f(t + 0.5 * dt, h + 0.5 * dt * k2h, hp + 0.5 * dt * k2p, k3h, k3p);
    f(t + dt, h + dt * k3h, hp + dt * k3p, k4h, k4p);
    h += dt / 6.0 * (k1h + 2.0 * (k2h + k3h) + k4h);
    hp += dt / 6.0 * (k1p + 2.0 * (k2p + k3p) + k4p);
}

}  // namespace detail

// Solves the warping Cauchy problem on [0, t_max] with per-step truncation
// error <= tol. Constant profiles short-circuit to the closed form
// (h = t for b = 0, h = sinh(sqrt(b) t)/sqrt(b) otherwise). The integrator
// launches from a Taylor series at t = 0, h = t + G(0) t^3/6 + G'(0) t^4/12,
// and continues with fixed-step RK4, sub-stepping when tol requires it.
inline WarpingFunction solve_warping(const CurvatureProfile& profile, double t_max,
                                     double tol = 1e-10, std::size_t grid_cells = 4096) {
    if (!(t_max > 0.0)) throw OutOfRange("t_max must be positive");
    if (!(tol > 0.0)) throw OutOfRange("tol must be positive");
    if (grid_cells < 16) throw OutOfRange("grid too coarse");

    const std::size_t n = grid_cells + 1;
    const double dt = t_max / static_cast<double>(grid_cells);
    std::vector<double> h(n), hp(n), hpp(n);

    if (profile.is_constant()) {
        const double b = profile.constant_value();
        if (b == 0.0) {
            for (std::size_t i = 0; i < n; ++i) {
                double t = dt * static_cast<double>(i);
                h[i] = t;
                hp[i] = 1.0;
                hpp[i] = 0.0;
            }
            return WarpingFunction(t_max, std::move(h), std::move(hp), std::move(hpp), 0.0,
                                   ClosedForm::euclidean, 0.0, tol);
        }
        const double s = std::sqrt(b);
        if (s * t_max > 700.0) throw OutOfRange("sqrt(b)*t_max too large: sinh overflows");
        for (std::size_t i = 0; i < n; ++i) {
            double t = dt * static_cast<double>(i);
            h[i] = std::sinh(s * t) / s;
            hp[i] = std::cosh(s * t);
            hpp[i] = b * h[i];
        }
        return WarpingFunction(t_max, std::move(h), std::move(hp), std::move(hpp), b,
                               ClosedForm::hyperbolic, b, tol);
    }

    const double g0 = profile(0.0);
    const double g0p = (profile(dt) - g0) / dt;

    // Substep count from the RK4 error model err ~ (t_max/180) |y^(5)| dt_sub^4,
    // with |y^(5)| estimated from the curvature scale over the interval.
    double g_max = g0;
    for (std::size_t i = 1; i < n; ++i)
        g_max = std::max(g_max, profile(dt * static_cast<double>(i)));
    double h_scale = std::max(t_max, std::sqrt(g_max) > 0.0
                                         ? std::sinh(std::min(std::sqrt(g_max) * t_max, 30.0)) /
                                               std::max(std::sqrt(g_max), 1e-30)
                                         : t_max);
    double y5 = (g_max * g_max + 1.0) * h_scale;
    double err_est = t_max / 180.0 * y5 * dt * dt * dt * dt;
    std::size_t sub = 1;
    if (err_est > tol) sub = static_cast<std::size_t>(std::ceil(std::pow(2.0 * err_est / tol, 0.25)));
    sub = std::min<std::size_t>(sub, 256);
    const double dts = dt / static_cast<double>(sub);

    h[0] = 0.0;
    hp[0] = 1.0;
    hpp[0] = 0.0;
    // First cell from the series: the ODE is regular at 0 but the series
    // start keeps the launch independent of the RHS evaluation at h = 0.
    {
        double t = dt;
        h[1] = t + g0 * t * t * t / 6.0 + g0p * t * t * t * t / 12.0;
        hp[1] = 1.0 + g0 * t * t / 2.0 + g0p * t * t * t / 3.0;
        hpp[1] = profile(t) * h[1];
    }
    double yh = h[1], yp = hp[1];
    for (std::size_t i = 1; i + 1 < n; ++i) {
        double t = dt * static_cast<double>(i);
        for (std::size_t s = 0; s < sub; ++s)
            detail::rk4_step(profile, t + dts * static_cast<double>(s), dts, yh, yp);
        if (!(yh > 0.0)) throw NonPositiveH("integrator produced h <= 0; tol/step misconfigured");
        h[i + 1] = yh;
        hp[i + 1] = yp;
        hpp[i + 1] = profile(t + dt) * yh;
    }
    return WarpingFunction(t_max, std::move(h), std::move(hp), std::move(hpp), g0,
                           ClosedForm::none, 0.0, tol);
}

// ---- free-function forms used throughout the library ----

inline double eval_h(const WarpingFunction& w, double t) { return w.value(t); }
inline double eval_h_prime(const WarpingFunction& w, double t) { return w.derivative(t); }
inline double log_derivative(const WarpingFunction& w, double t) { return w.log_derivative(t); }

// CSV columns t,h,h_prime over the solution grid.
inline void export_warping_csv(const WarpingFunction& w, std::ostream& out) {
    out << "t,h,h_prime\n";
    char buf[96];
    for (std::size_t i = 0; i < w.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.12g,%.12g,%.12g\n", w.grid_t(i), w.h_values()[i],
                      w.h_prime_values()[i]);
        out << buf;
    }
}

}  // namespace exitmoments
