#include "exitmoments/mc_sim.hpp"

#include "doctest.h"
#include "oracles.hpp"

#include <cmath>
#include <cstring>
#include <vector>

using namespace exitmoments;

namespace {

SimConfig flat_config(std::uint64_t paths, double dt, std::uint64_t seed) {
    ModelBall ball(2, solve_warping(CurvatureProfile::constant(0.0), 1.0), 1.0);
    return SimConfig{.ball = ball, .start_t = 0.0, .paths = paths, .dt = dt, .seed = seed,
                     .max_k = 2};
}

bool bitwise_equal(const SimResult& a, const SimResult& b) {
    if (a.moment_estimates.size() != b.moment_estimates.size()) return false;
    for (std::size_t i = 0; i < a.moment_estimates.size(); ++i) {
        if (std::memcmp(&a.moment_estimates[i].mean, &b.moment_estimates[i].mean,
                        sizeof(double)) != 0)
            return false;
        if (std::memcmp(&a.moment_estimates[i].standard_error,
                        &b.moment_estimates[i].standard_error, sizeof(double)) != 0)
            return false;
    }
    return true;
}

}  // namespace

TEST_CASE("fixed seed and config give bit-identical results") {
    auto cfg = flat_config(2000, 2e-4, 77);
    std::vector<double> exits_a, exits_b;
    auto a = simulate_exit(cfg, 2, &exits_a);
    auto b = simulate_exit(cfg, 2, &exits_b);
    CHECK(bitwise_equal(a, b));
    CHECK(exits_a == exits_b);

    auto c = simulate_exit(cfg, 1);
    CHECK(bitwise_equal(a, c));  // independent of the thread count
}

TEST_CASE("different seeds decorrelate") {
    auto a = simulate_exit(flat_config(500, 2e-4, 1), 2);
    auto b = simulate_exit(flat_config(500, 2e-4, 2), 2);
    CHECK(a.moment_estimates[1].mean != b.moment_estimates[1].mean);
}

TEST_CASE("flat ball estimates match the closed forms") {
    auto res = simulate_exit(flat_config(20000, 2e-4, 20260809), 0);
    const auto& m1 = res.moment_estimates[1];
    const auto& m2 = res.moment_estimates[2];
    CHECK(std::abs(m1.mean - 0.25) <= 4.0 * m1.standard_error);
    CHECK(std::abs(m2.mean - 3.0 / 32.0) <= 4.0 * m2.standard_error);
    CHECK(res.paths_used == 20000);
    CHECK(res.moment_estimates[0].mean == 1.0);
    CHECK(res.moment_estimates[0].standard_error == 0.0);
}

TEST_CASE("boundary start exits immediately up to dt resolution") {
    auto cfg = flat_config(200, 1e-4, 3);
    cfg.start_t = 1.0 - 1e-12;
    auto res = simulate_exit(cfg, 1);
    CHECK(res.moment_estimates[1].mean <= 5.0 * cfg.dt);
}

TEST_CASE("exit times are positive and finite") {
    std::vector<double> exits;
    simulate_exit(flat_config(500, 2e-4, 5), 2, &exits);
    for (double t : exits) {
        CHECK(t > 0.0);
        CHECK(std::isfinite(t));
    }
}

TEST_CASE("origin reflection does not distort the estimate") {
    ModelBall ball(2, solve_warping(CurvatureProfile::constant(1.0), 1.0), 1.0);
    SimConfig from_zero{.ball = ball, .start_t = 0.0, .paths = 8000, .dt = 4e-4, .seed = 9,
                        .max_k = 1};
    SimConfig from_floor = from_zero;
    from_floor.start_t = 10.0 * ball.warping.step();
    auto a = simulate_exit(from_zero, 0);
    auto b = simulate_exit(from_floor, 0);
    double se = std::hypot(a.moment_estimates[1].standard_error,
                           b.moment_estimates[1].standard_error);
    CHECK(std::abs(a.moment_estimates[1].mean - b.moment_estimates[1].mean) <= 4.0 * se);
}

TEST_CASE("hyperbolic ball estimate matches the closed form") {
    ModelBall ball(2, solve_warping(CurvatureProfile::constant(1.0), 1.0), 1.0);
    SimConfig cfg{.ball = ball, .start_t = 0.0, .paths = 20000, .dt = 2e-4, .seed = 64,
                  .max_k = 1};
    auto res = simulate_exit(cfg, 0);
    double expected = 2.0 * std::log(std::cosh(0.5));
    CHECK(std::abs(res.moment_estimates[1].mean - expected) <=
          3.0 * res.moment_estimates[1].standard_error);
}

TEST_CASE("moment estimates pass the Jensen screen") {
    auto res = simulate_exit(flat_config(10000, 2e-4, 13), 0);
    double m1 = res.moment_estimates[1].mean;
    double se1 = res.moment_estimates[1].standard_error;
    double m2 = res.moment_estimates[2].mean;
    double se2 = res.moment_estimates[2].standard_error;
    CHECK(m2 >= m1 * m1 - 3.0 * (se2 + 2.0 * m1 * se1));
}

TEST_CASE("step guard") {
    auto cfg = flat_config(10, 1e-2, 1);
    CHECK_THROWS_AS(simulate_exit(cfg), StepTooLarge);
    cfg.dt = 1e-4;
    cfg.start_t = 1.5;
    CHECK_THROWS_AS(simulate_exit(cfg), OutOfRange);
    cfg.start_t = 0.0;
    cfg.paths = 0;
    CHECK_THROWS_AS(simulate_exit(cfg), OutOfRange);
}

TEST_CASE("convergence sweep runs coarse steps and the bias decreases") {
    auto cfg = flat_config(4000, 1e-4, 123);
    const double dts[] = {1e-2, 1e-3, 1e-4};
    auto rows = convergence_sweep(cfg, dts, 0);
    REQUIRE(rows.size() == 3);
    double bias_coarse = std::abs(rows[0].mean - 0.25);
    double bias_mid = std::abs(rows[1].mean - 0.25);
    double bias_fine = std::abs(rows[2].mean - 0.25);
    CHECK(bias_coarse > bias_mid);
    CHECK(bias_mid > bias_fine);

    const double single[] = {5e-4};
    CHECK(convergence_sweep(cfg, single, 0).size() == 1);
}
