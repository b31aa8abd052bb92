#pragma once

#include "exitmoments/errors.hpp"
#include "exitmoments/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace exitmoments {

// ============================================================================
// Dirichlet eigenvalue machinery for spherical caps and warped cones
// ============================================================================

// Geodesic ball of polar radius r about the north pole of the unit sphere of
// dimension m - 1.
struct CapSpec {
    int m;
    double r;

    CapSpec(int m_, double r_) : m(m_), r(r_) {
        if (m < 2) throw OutOfRange("cap parameter m must be >= 2");
        if (!(r > 0.0)) throw OutOfRange("cap radius must be positive");
        if (r >= std::numbers::pi / 2.0 + 1e-9)
            throw DegenerateCap("cap radius beyond pi/2: trial function loses positivity");
    }
};

struct EigenEstimate {
    enum class Kind { lower_bound, shooting };
    double value = 0.0;
    Kind kind = Kind::lower_bound;
    std::optional<double> achieved_at;
    double tolerance = 0.0;
};

// Trial function for the Barta quotient. The derivative is only needed at
// t = r where the quotient becomes 0/0 and is evaluated by its limit.
struct BartaTrial {
    std::function<double(double)> value;
    std::function<double(double)> derivative;
};

inline BartaTrial default_barta_trial(double r) {
    const double w = std::numbers::pi / (2.0 * r);
    return BartaTrial{[w](double t) { return std::cos(w * t); },
                      [w](double t) { return -w * std::sin(w * t); }};
}

namespace detail {

// Grid evaluation of the Barta quotient q(t) = u(t)/D(t) where
//   D(t) = integral_t^r integral_0^tau sin^{m-2}(s) u(s) / sin^{m-2}(tau) ds dtau.
// The double integral is the same ratio/tail kernel as the exit moments with
// weight sin^{m-2}; near 0 the ratio is replaced by u(0) tau/(m-1), and at
// t = r the 0/0 quotient is evaluated by its limit u'(r)/(-D'(r)).
struct BartaProfile {
    double step = 0.0;
    std::vector<double> t;
    std::vector<double> q;
    std::vector<double> denom;      // D on the grid
    std::vector<double> neg_ratio;  // D' on the grid
    double q_end = 0.0;

    double q_at(double x, double r, const BartaTrial& u) const {
        if (x >= r - 1e-14 * r) return q_end;
        return u.value(x) / hermite_uniform(denom, neg_ratio, step, x);
    }
};

inline BartaProfile barta_quotient(const CapSpec& cap, std::size_t grid_size,
                                   const BartaTrial& u) {
    if (grid_size < 64) throw OutOfRange("barta grid too coarse");
    const double beta = static_cast<double>(cap.m - 2);
    const std::size_t n = grid_size + 1;

    BartaProfile prof;
    prof.step = cap.r / static_cast<double>(grid_size);
    prof.t.resize(n);
    std::vector<double> weight(n), source(n);
    for (std::size_t i = 0; i < n; ++i) {
        prof.t[i] = prof.step * static_cast<double>(i);
        weight[i] = i == 0 ? 0.0 : std::pow(std::sin(prof.t[i]), beta);
        source[i] = u.value(prof.t[i]);
    }
    double series_radius = std::min(std::max(10.0 * prof.step, 1e-3), 0.25 * cap.r);
    auto cutoff = std::max<std::size_t>(1, static_cast<std::size_t>(series_radius / prof.step));
    if (weight[cutoff + 1] < 1e-280)
        throw QuadratureUnderflow("sin^{m-2} underflows past the series radius");

    auto rt = ratio_tail_integral(prof.t, weight, source, beta, cutoff);
    prof.denom = std::move(rt.tail);
    prof.neg_ratio.resize(n);
    for (std::size_t i = 0; i < n; ++i) prof.neg_ratio[i] = -rt.ratio[i];
    // limit of u/D at t = r: u'(r)/D'(r) with D' = -ratio
    prof.q_end = u.derivative(cap.r) / prof.neg_ratio.back();

    prof.q.resize(n);
    for (std::size_t i = 0; i + 1 < n; ++i) prof.q[i] = source[i] / prof.denom[i];
    prof.q.back() = prof.q_end;
    return prof;
}

}  // namespace detail

// Lower bound for the first Dirichlet eigenvalue of the cap: inf_t q(t). The
// infimum is located on a dense grid and refined by golden-section search.
inline EigenEstimate barta_lower_bound(const CapSpec& cap, std::size_t grid_size = 4096,
                                       double refine_tol = 1e-9,
                                       const BartaTrial* trial = nullptr) {
    BartaTrial def = default_barta_trial(cap.r);
    const BartaTrial& u = trial ? *trial : def;
    auto prof = detail::barta_quotient(cap, grid_size, u);
    const std::size_t n = prof.t.size();
    auto q_at = [&](double x) { return prof.q_at(x, cap.r, u); };

    std::size_t best = 0;
    double best_q = prof.q[0];
    for (std::size_t i = 1; i < n; ++i) {
        if (prof.q[i] < best_q) {
            best_q = prof.q[i];
            best = i;
        }
    }

    // Golden-section refinement inside the bracketing cells.
    double a = best == 0 ? prof.t[0] : prof.t[best - 1];
    double b = best + 1 >= n ? prof.t[n - 1] : prof.t[best + 1];
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = q_at(x1), f2 = q_at(x2);
    while (b - a > refine_tol) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = q_at(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = q_at(x2);
        }
    }
    double t_star = 0.5 * (a + b);
    double q_star = q_at(t_star);

    EigenEstimate est;
    est.kind = EigenEstimate::Kind::lower_bound;
    if (q_star < best_q) {
        est.value = q_star;
        est.achieved_at = t_star;
    } else {
        est.value = best_q;
        est.achieved_at = prof.t[best];
    }
    est.tolerance = refine_tol;
    return est;
}

// Quotient profile (t, q(t)) for plotting.
inline std::vector<std::pair<double, double>> barta_quotient_profile(
    const CapSpec& cap, std::size_t grid_size = 512, const BartaTrial* trial = nullptr) {
    BartaTrial def = default_barta_trial(cap.r);
    auto prof = detail::barta_quotient(cap, grid_size, trial ? *trial : def);
    std::vector<std::pair<double, double>> rows(prof.t.size());
    for (std::size_t i = 0; i < prof.t.size(); ++i) rows[i] = {prof.t[i], prof.q[i]};
    return rows;
}

namespace detail {

struct ShootOutcome {
    double end_value;
    int interior_sign_changes;
};

// Integrates phi'' + (m-2) cot(t) phi' + lambda phi = 0 with phi(0) = 1,
// phi'(0) = 0, launching from the even series
// phi = 1 + a1 t^2 + a2 t^4 to clear the cot singularity.
inline ShootOutcome shoot_radial(int m, double r, double lambda, std::size_t steps) {
    const double a1 = -lambda / (2.0 * static_cast<double>(m - 1));
    const double a2 =
        a1 * (2.0 * static_cast<double>(m - 2) / 3.0 - lambda) / (4.0 * static_cast<double>(m + 1));
    const double dt = r / static_cast<double>(steps);
    double t = dt;
    double phi = 1.0 + a1 * t * t + a2 * t * t * t * t;
    double psi = 2.0 * a1 * t + 4.0 * a2 * t * t * t;
    const double coef = static_cast<double>(m - 2);

    auto rhs = [&](double tt, double y0, double y1, double& d0, double& d1) {
        d0 = y1;
        d1 = -coef * (std::cos(tt) / std::sin(tt)) * y1 - lambda * y0;
    };

    int sign_changes = 0;
    double prev = phi;
    for (std::size_t i = 1; i < steps; ++i) {
        double k1a, k1b, k2a, k2b, k3a, k3b, k4a, k4b;
        rhs(t, phi, psi, k1a, k1b);
        rhs(t + 0.5 * dt, phi + 0.5 * dt * k1a, psi + 0.5 * dt * k1b, k2a, k2b);
        rhs(t + 0.5 * dt, phi + 0.5 * dt * k2a, psi + 0.5 * dt * k2b, k3a, k3b);
        rhs(t + dt, phi + dt * k3a, psi + dt * k3b, k4a, k4b);
        phi += dt / 6.0 * (k1a + 2.0 * (k2a + k3a) + k4a);
        psi += dt / 6.0 * (k1b + 2.0 * (k2b + k3b) + k4b);
        t += dt;
        if (i + 1 < steps && prev * phi < 0.0) ++sign_changes;
        prev = phi;
    }
    return {phi, sign_changes};
}

}  // namespace detail

// Shooting oracle for the same cap eigenvalue: bisection on lambda for the
// first zero of the radial eigenfunction at t = r. Bisection runs on the
// predicate "phi stays positive on (0, r]", which is monotone in lambda and
// flips exactly at lambda_1 (above lambda_2 the endpoint sign alone is
// uninformative). For m = 2 the problem degenerates to
// phi'' + lambda phi = 0 and the result is (pi/(2r))^2 exactly.
inline EigenEstimate cap_eigenvalue_shooting(const CapSpec& cap, double tol = 1e-8,
                                             std::size_t steps = 2048) {
    const double one_dim = std::pow(std::numbers::pi / (2.0 * cap.r), 2.0);
    const double hi_cap = 1024.0 * static_cast<double>(cap.m) * one_dim;

    auto below_fundamental = [&](double lam) {
        auto s = detail::shoot_radial(cap.m, cap.r, lam, steps);
        return s.end_value > 0.0 && s.interior_sign_changes == 0;
    };

    double lo = 0.5 * one_dim;
    for (int attempt = 0; !below_fundamental(lo); ++attempt) {
        if (attempt > 16) throw BracketFailure("no positive-solution lambda found");
        lo *= 0.25;
    }
    double hi = 4.0 * static_cast<double>(cap.m) * one_dim;
    while (below_fundamental(hi)) {
        hi *= 2.0;
        if (hi > hi_cap) throw BracketFailure("no sign change up to the bracket cap");
    }
    while (hi - lo > tol) {
        double mid = 0.5 * (lo + hi);
        if (below_fundamental(mid))
            lo = mid;
        else
            hi = mid;
    }
    EigenEstimate est;
    est.value = 0.5 * (lo + hi);
    est.kind = EigenEstimate::Kind::shooting;
    est.tolerance = tol;
    return est;
}

// Finiteness of the Dirichlet mean exit time of the cone over a cross-section
// with first eigenvalue lambda1: the threshold is strict.
inline bool cone_exit_finite(double lambda1, int l) {
    if (!(lambda1 > 0.0)) throw OutOfRange("lambda1 must be positive");
    if (l < 2) throw OutOfRange("cone fiber dimension must be >= 2");
    return lambda1 > 2.0 * static_cast<double>(l);
}

// ============================================================================
// Warped cones over [0, inf) x_w L
// ============================================================================

struct LinearWarp {
    double alpha = 0.0;
    double k = 1.0;
};

struct TabulatedWarp {
    std::vector<std::pair<double, double>> knots;  // (t, w(t)), strictly increasing t
};

struct WarpedConeSpec {
    int l;
    std::variant<LinearWarp, TabulatedWarp> warp;
    double lambda;
    double r0;
    double horizon;

    WarpedConeSpec(int l_, std::variant<LinearWarp, TabulatedWarp> w, double lambda_, double r0_,
                   double horizon_)
        : l(l_), warp(std::move(w)), lambda(lambda_), r0(r0_), horizon(horizon_) {
        if (l < 2) throw OutOfRange("warped cone needs l >= 2");
        if (!(lambda > 0.0)) throw OutOfRange("lambda must be positive");
        if (!(r0 > 0.0) || !(horizon > r0)) throw OutOfRange("need 0 < r0 < horizon");
        if (const auto* lin = std::get_if<LinearWarp>(&warp)) {
            if (lin->alpha < 0.0 || lin->k < 0.0 || (lin->alpha == 0.0 && lin->k == 0.0))
                throw InvalidProfile("linear warp needs alpha, k >= 0, not both zero");
        } else {
            const auto& tab = std::get<TabulatedWarp>(warp);
            if (tab.knots.size() < 2) throw InvalidProfile("tabulated warp needs two knots");
            for (std::size_t i = 1; i < tab.knots.size(); ++i)
                if (!(tab.knots[i].first > tab.knots[i - 1].first))
                    throw InvalidProfile("tabulated warp knots must increase in t");
            if (tab.knots.back().first < horizon)
                throw OutOfRange("tabulated warp does not reach the horizon");
        }
    }

    double w(double t) const {
        if (const auto* lin = std::get_if<LinearWarp>(&warp)) return lin->alpha + lin->k * t;
        const auto& knots = std::get<TabulatedWarp>(warp).knots;
        if (t <= knots.front().first) return knots.front().second;
        auto hi = std::upper_bound(knots.begin(), knots.end(), t,
                                   [](double v, const auto& kn) { return v < kn.first; });
        if (hi == knots.end()) return knots.back().second;
        auto lo = hi - 1;
        double x = (t - lo->first) / (hi->first - lo->first);
        return lo->second + x * (hi->second - lo->second);
    }
};

struct WarpedConeResult {
    bool satisfiable = false;
    double inf_f = 0.0;                   // certified infimum of F on [r_used, horizon]
    std::optional<double> c_witness;      // solves c/(c lambda - 1) = inf_f when satisfiable
    double r_used = 0.0;                  // truncation radius that certifies the verdict
    double horizon_value = 0.0;           // F at the horizon
    double horizon_slope = 0.0;           // trend of F at the horizon
    double asymptotic_diagnostic = 0.0;   // w^2 (l H^2 - K) at the horizon, reported undecided
};

namespace detail {

struct WarpedConeArrays {
    double step = 0.0;
    std::vector<double> f;     // F on the grid
    std::vector<double> cum2;  // integral_0^t psi/psi'
};

inline WarpedConeArrays warped_cone_profile(const WarpedConeSpec& spec, std::size_t cells) {
    WarpedConeArrays out;
    const std::size_t n = cells + 1;
    out.step = spec.horizon / static_cast<double>(cells);
    std::vector<double> w(n), wl(n), integrand(n);
    for (std::size_t i = 0; i < n; ++i) {
        double t = out.step * static_cast<double>(i);
        w[i] = spec.w(t);
        if (i > 0 && !(w[i] > 0.0)) throw InvalidProfile("warp w must be positive for t > 0");
        wl[i] = std::pow(w[i], static_cast<double>(spec.l - 1));
    }
    auto psi = cumulative_trapezoid(wl, out.step);
    integrand[0] = 0.0;  // psi/psi' -> 0 whether or not w vanishes at the tip
    for (std::size_t i = 1; i < n; ++i) integrand[i] = psi[i] / wl[i];
    out.cum2 = cumulative_trapezoid(integrand, out.step);
    out.f.resize(n);
    out.f[0] = 0.0;
    for (std::size_t i = 1; i < n; ++i) out.f[i] = out.cum2[i] / (w[i] * w[i]);
    return out;
}

}  // namespace detail

// Checks whether F(t) = w^{-2}(t) integral_0^t psi/psi' stays above
// c/(c lambda - 1) for some admissible c on a truncated cone. Since
// c -> c/(c lambda - 1) decreases to 1/lambda, the test is inf F > 1/lambda.
// The truncation radius may be raised above r0 (the underlying comparison
// argument allows any truncation), so the verdict uses the best tail window
// [r_used, horizon]. A profile still strictly decreasing at the horizon with
// F(horizon) <= 1/lambda is inconclusive and reported as HorizonTooSmall
// rather than decided.
inline WarpedConeResult warped_cone_condition(const WarpedConeSpec& spec,
                                              std::size_t grid_cells = std::size_t{1} << 19) {
    auto arrays = detail::warped_cone_profile(spec, grid_cells);
    const auto& f = arrays.f;
    const std::size_t n = f.size();
    const double inv_lambda = 1.0 / spec.lambda;

    auto i0 = static_cast<std::size_t>(std::ceil(spec.r0 / arrays.step - 1e-9));
    i0 = std::min(i0, n - 1);

    WarpedConeResult res;
    res.horizon_value = f[n - 1];
    std::size_t back = std::max<std::size_t>(n / 256, 2);
    res.horizon_slope = (f[n - 1] - f[n - 1 - back]) / (arrays.step * static_cast<double>(back));

    // Necessary-condition diagnostic at the horizon: l w'^2 + w w''.
    {
        double h = arrays.step * static_cast<double>(back);
        double t2 = spec.horizon, t1 = t2 - h, t0 = t2 - 2.0 * h;
        double w2 = spec.w(t2), w1 = spec.w(t1), w0 = spec.w(t0);
        double wp = (w2 - w0) / (2.0 * h);
        double wpp = (w2 - 2.0 * w1 + w0) / (h * h);
        res.asymptotic_diagnostic = static_cast<double>(spec.l) * wp * wp + w2 * wpp;
    }

    bool decreasing = res.horizon_slope < -1e-9 * std::max(std::abs(res.horizon_value), 1e-300);
    if (decreasing && res.horizon_value <= inv_lambda)
        throw HorizonTooSmall("F still strictly decreasing at the horizon with F <= 1/lambda");

    // Right-running minimum; certify on the widest window whose infimum
    // clears 1/lambda.
    std::vector<double> run_min(n);
    run_min[n - 1] = f[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) run_min[i] = std::min(f[i], run_min[i + 1]);

    std::size_t certify = n;
    for (std::size_t i = i0; i < n; ++i) {
        if (run_min[i] > inv_lambda) {
            certify = i;
            break;
        }
    }
    if (certify < n) {
        res.satisfiable = true;
        res.inf_f = run_min[certify];
        res.r_used = arrays.step * static_cast<double>(certify);
        res.c_witness = res.inf_f / (res.inf_f * spec.lambda - 1.0);
    } else {
        res.satisfiable = false;
        res.inf_f = run_min[n - 1];  // best achievable tail infimum
        res.r_used = spec.horizon;
    }
    return res;
}

// u(t) = (c lambda - 1) integral_0^t psi/psi', the certified mean-exit upper
// bound profile on the truncated cone.
inline double warped_cone_supersolution(const WarpedConeSpec& spec, double c, double t,
                                        std::size_t grid_cells = std::size_t{1} << 19) {
    if (!(c > 1.0 / spec.lambda)) throw InvalidC("need c > 1/lambda");
    if (!(t >= 0.0) || t > spec.horizon * (1.0 + 1e-12)) throw OutOfRange("t outside [0, horizon]");
    auto arrays = detail::warped_cone_profile(spec, grid_cells);
    double integral = detail::lerp_uniform(arrays.cum2, arrays.step, std::min(t, spec.horizon));
    return (c * spec.lambda - 1.0) * integral;
}

}  // namespace exitmoments
