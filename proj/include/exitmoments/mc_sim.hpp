#pragma once

#include "exitmoments/errors.hpp"
#include "exitmoments/moments.hpp"
#include "exitmoments/warping.hpp"

#include <chrono>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <thread>
#include <vector>

namespace exitmoments {

// ============================================================================
// Monte Carlo oracle: radial diffusion on the model, first exit from a ball
// ============================================================================
//
// The radial part of Brownian motion generated by the full Laplacian solves
// dR = sqrt(2) dW + (n-1) (h'/h)(R) dt; estimated means therefore satisfy
// Delta E = -1 and are directly comparable with the quadrature module.
// Every path consumes its own counter-based random stream keyed by
// (seed, path index), so results are bit-identical across runs and across
// any thread partitioning.

struct SimConfig {
    ModelBall ball;
    double start_t = 0.0;
    std::uint64_t paths = 100000;
    double dt = 1e-4;
    std::uint64_t seed = 0;
    int max_k = 2;
    double t_floor = 0.0;  // <= 0: use 10 * warping grid step
};

struct MomentEstimate {
    int order = 0;
    double mean = 0.0;
    double standard_error = 0.0;
};

struct SimResult {
    std::vector<MomentEstimate> moment_estimates;  // orders 0..max_k
    std::uint64_t paths_used = 0;
    double dt_effective = 0.0;
    std::uint64_t seed_echo = 0;
    double elapsed_seconds = 0.0;
};

namespace detail {

// splitmix64 finalizer; the stream value at counter i is a pure function of
// (key, i), which is what makes the runs scheduling-independent.
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream)
        : key_(mix64(seed + 0x9E3779B97F4A7C15ull * (stream + 1))) {}

    std::uint64_t next_u64() { return mix64(key_ + 0x9E3779B97F4A7C15ull * (++counter_)); }

    double uniform01() {  // in (0, 1]
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform01();
        double u2 = uniform01();
        double rad = std::sqrt(-2.0 * std::log(u1));
        double ang = 2.0 * std::numbers::pi * u2;
        spare_ = rad * std::sin(ang);
        have_spare_ = true;
        return rad * std::cos(ang);
    }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

// Exact exit time of one path. Exit is detected either by an endpoint beyond
// the boundary (crossing time linearly interpolated inside the step) or by
// the Brownian-bridge test between interior endpoints: the probability that
// the bridge touched the boundary is exp(-(r-a)(r-b)/dt) for diffusion
// coefficient sqrt(2). Without the bridge test the missed excursions bias the
// mean by O(sqrt(dt)), which is well above the 3-sigma band at usual path
// counts.
inline double simulate_path(const ModelBall& ball, double start_t, double dt, double t_floor,
                            CounterRng rng) {
    const double r = ball.r;
    const int n = ball.n;
    const double drift_scale = static_cast<double>(n - 1);
    const double drift_cap = 1.0 / t_floor;
    const double sq2dt = std::sqrt(2.0 * dt);
    const WarpingFunction& w = ball.warping;

    double pos = start_t;
    std::uint64_t steps = 0;
    for (;;) {
        double slope = pos <= t_floor ? drift_cap : std::min(w.log_derivative(pos), drift_cap);
        double next = pos + drift_scale * slope * dt + sq2dt * rng.normal();
        if (next >= r) {
            double frac = (r - pos) / (next - pos);
            return (static_cast<double>(steps) + frac) * dt;
        }
        double gap = (r - pos) * (r - next);
        if (gap < 40.0 * dt && rng.uniform01() < std::exp(-gap / dt)) {
            double frac = (r - pos) / ((r - pos) + (r - next));
            return (static_cast<double>(steps) + frac) * dt;
        }
        if (next < t_floor) {
            next = 2.0 * t_floor - next;
            // a reflected step landing past the boundary only happens at
            // absurd dt (guard-free sweeps); count it as a full-step exit
            if (next >= r) return (static_cast<double>(steps) + 1.0) * dt;
        }
        pos = next;
        ++steps;
    }
}

// Pairwise summation in a fixed tree order: the reduction is identical no
// matter how the paths were scheduled.
inline double pairwise_sum(std::span<const double> v) {
    if (v.size() <= 8) {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    }
    std::size_t half = v.size() / 2;
    return pairwise_sum(v.subspan(0, half)) + pairwise_sum(v.subspan(half));
}

inline SimResult reduce_moments(const std::vector<double>& exits, int max_k, double dt,
                                std::uint64_t seed) {
    const auto n = static_cast<double>(exits.size());
    SimResult res;
    res.paths_used = exits.size();
    res.dt_effective = dt;
    res.seed_echo = seed;
    res.moment_estimates.push_back({0, 1.0, 0.0});
    std::vector<double> powered(exits.size());
    for (int k = 1; k <= max_k; ++k) {
        for (std::size_t i = 0; i < exits.size(); ++i)
            powered[i] = std::pow(exits[i], static_cast<double>(k));
        double sum = pairwise_sum(powered);
        for (auto& x : powered) x *= x;
        double sum_sq = pairwise_sum(powered);
        double mean = sum / n;
        double var = exits.size() > 1 ? std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0)) : 0.0;
        res.moment_estimates.push_back({k, mean, std::sqrt(var / n)});
    }
    return res;
}

}  // namespace detail

// Runs the radial Euler-Maruyama simulation. threads == 0 picks the hardware
// count; the estimates do not depend on the choice. When exit_times_out is
// given the raw per-path exit times are copied there (path order).
inline SimResult simulate_exit(const SimConfig& config, int threads = 0,
                               std::vector<double>* exit_times_out = nullptr,
                               bool enforce_step_guard = true) {
    const double r = config.ball.r;
    if (!(config.start_t >= 0.0) || config.start_t >= r)
        throw OutOfRange("start_t must lie in [0, r)");
    if (!(config.dt > 0.0)) throw OutOfRange("dt must be positive");
    if (config.paths < 1) throw OutOfRange("need at least one path");
    if (config.max_k < 1) throw NegativeOrder("max_k must be >= 1");
    if (enforce_step_guard && config.dt > (r / 50.0) * (r / 50.0))
        throw StepTooLarge("dt exceeds (r/50)^2");

    double t_floor = config.t_floor;
    if (t_floor <= 0.0) t_floor = 10.0 * config.ball.warping.step();
    t_floor = std::min(t_floor, 0.25 * r);

    auto t_begin = std::chrono::steady_clock::now();

    std::vector<double> exits(config.paths);
    int n_threads = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
    if (n_threads < 1) n_threads = 1;
    n_threads = static_cast<int>(
        std::min<std::uint64_t>(static_cast<std::uint64_t>(n_threads), config.paths));

    auto work = [&](std::uint64_t begin, std::uint64_t end) {
        for (std::uint64_t p = begin; p < end; ++p)
            exits[p] = detail::simulate_path(config.ball, config.start_t, config.dt, t_floor,
                                             detail::CounterRng(config.seed, p));
    };
    if (n_threads == 1) {
        work(0, config.paths);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(n_threads));
        std::uint64_t chunk = config.paths / static_cast<std::uint64_t>(n_threads);
        for (int i = 0; i < n_threads; ++i) {
            std::uint64_t begin = chunk * static_cast<std::uint64_t>(i);
            std::uint64_t end = i + 1 == n_threads ? config.paths : begin + chunk;
            pool.emplace_back(work, begin, end);
        }
        for (auto& th : pool) th.join();
    }

    SimResult res = detail::reduce_moments(exits, config.max_k, config.dt, config.seed);
    res.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_begin).count();
    if (exit_times_out) *exit_times_out = std::move(exits);
    return res;
}

struct SweepRow {
    double dt = 0.0;
    double mean = 0.0;
    double standard_error = 0.0;
};

// Re-runs the simulation across step sizes with the same seed schedule, for
// weak-convergence inspection (first-order bias in dt expected). The step
// guard is deliberately not applied: coarse steps are the point here.
inline std::vector<SweepRow> convergence_sweep(const SimConfig& config,
                                               std::span<const double> dt_list, int threads = 0) {
    if (dt_list.empty()) throw OutOfRange("dt list must be non-empty");
    std::vector<SweepRow> rows;
    rows.reserve(dt_list.size());
    for (double dt : dt_list) {
        SimConfig c = config;
        c.dt = dt;
        SimResult r = simulate_exit(c, threads, nullptr, /*enforce_step_guard=*/false);
        rows.push_back({dt, r.moment_estimates[1].mean, r.moment_estimates[1].standard_error});
    }
    return rows;
}

}  // namespace exitmoments
