#include "exitmoments/moments.hpp"

#include "doctest.h"
#include "oracles.hpp"

#include <cmath>
#include <random>
#include <sstream>

using namespace exitmoments;

namespace {

ModelBall flat_ball(int n, double r) {
    return ModelBall(n, solve_warping(CurvatureProfile::constant(0.0), r), r);
}

ModelBall hyperbolic_ball(int n, double r, double b = 1.0) {
    return ModelBall(n, solve_warping(CurvatureProfile::constant(b), r), r);
}

}  // namespace

TEST_CASE("flat mean exit time matches (r^2 - t^2)/(2n)") {
    auto ball = flat_ball(2, 1.0);
    CHECK(mean_exit_time(ball, 0.0) == doctest::Approx(0.25).epsilon(1e-10));
    CHECK(mean_exit_time(ball, 1.0) == 0.0);
    for (double t : {0.125, 0.5, 0.875})
        CHECK(mean_exit_time(ball, t) ==
              doctest::Approx(oracles::flat_mean_exit(2, 1.0, t)).epsilon(1e-7));
}

TEST_CASE("hyperbolic mean exit time matches 2 ln cosh(r/2)") {
    auto ball = hyperbolic_ball(2, 1.0);
    double expected = 2.0 * std::log(std::cosh(0.5));
    CHECK(mean_exit_time(ball, 0.0) == doctest::Approx(expected).epsilon(1e-6));
    CHECK(mean_exit_time(ball, 0.0, {.richardson = true}) ==
          doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("second flat moment against the independent oracle") {
    auto ball = flat_ball(2, 1.0);
    double oracle = oracles::flat_exit_moment(2, 1.0, 2, 0.0);
    CHECK(oracle == doctest::Approx(3.0 / 32.0).epsilon(1e-8));
    CHECK(exit_moment(ball, 2, 0.0) == doctest::Approx(oracle).epsilon(1e-6));
    CHECK(exit_moment(ball, 2, 0.0, {.richardson = true}) ==
          doctest::Approx(3.0 / 32.0).epsilon(1e-8));
}

TEST_CASE("moment basics") {
    auto ball = flat_ball(3, 1.5);
    SUBCASE("zeroth moment is one") {
        CHECK(exit_moment(ball, 0, 0.0) == 1.0);
        CHECK(exit_moment(ball, 0, 1.2) == 1.0);
    }
    SUBCASE("moments vanish on the boundary") {
        for (int k : {1, 2, 3}) CHECK(exit_moment(ball, k, ball.r) == 0.0);
    }
    SUBCASE("first moment equals the mean exit time") {
        CHECK(exit_moment(ball, 1, 0.4) == mean_exit_time(ball, 0.4));
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(exit_moment(ball, -1, 0.0), NegativeOrder);
        CHECK_THROWS_AS(exit_moment(ball, 1, 2.0), OutOfRange);
        CHECK_THROWS_AS(ModelBall(1, ball.warping, 1.0), OutOfRange);
        CHECK_THROWS_AS(ModelBall(2, ball.warping, 2.0), OutOfRange);
    }
}

TEST_CASE("moment table") {
    SUBCASE("flat K=1 endpoints") {
        auto table = moment_table(flat_ball(2, 1.0), 1);
        CHECK(table.values[1].front() == doctest::Approx(0.25).epsilon(1e-9));
        CHECK(table.values[1].back() == 0.0);
        CHECK(table.value_at(1, 0.5) == doctest::Approx(oracles::flat_mean_exit(2, 1.0, 0.5))
                                            .epsilon(1e-6));
    }
    SUBCASE("K=0 is a row of ones") {
        auto table = moment_table(flat_ball(2, 1.0), 0);
        for (double v : table.values[0]) CHECK(v == 1.0);
    }
    SUBCASE("tower inequality holds entrywise") {
        auto table = moment_table(hyperbolic_ball(3, 1.0), 2);
        double cap = 2.0 * table.values[1].front() * table.values[1].front();
        for (double v : table.values[2]) CHECK(v <= cap + 1e-12);
    }
    SUBCASE("entries are non-increasing in t") {
        auto table = moment_table(hyperbolic_ball(2, 1.0), 3);
        for (int k = 1; k <= 3; ++k) {
            const auto& row = table.values[static_cast<std::size_t>(k)];
            for (std::size_t i = 1; i < row.size(); ++i) CHECK(row[i] <= row[i - 1] + 1e-15);
        }
    }
    SUBCASE("CSV export carries the metadata header") {
        std::ostringstream ss;
        export_moment_csv(moment_table(flat_ball(2, 1.0), 1, {.grid_cells = 64}), ss);
        CHECK(ss.str().starts_with("# n=2,r=1,method=quadrature\nt,u0,u1\n"));
    }
}

TEST_CASE("cylinder mean-exit bound") {
    auto flat = solve_warping(CurvatureProfile::constant(0.0), 1.0);
    SUBCASE("flat closed forms r^2/(2 eta)") {
        CHECK(cylinder_mean_exit_bound(BoundSpec(3, 1, 2.0, 1.0, flat)) ==
              doctest::Approx(0.25).epsilon(1e-10));
        CHECK(cylinder_mean_exit_bound(BoundSpec(4, 1, 3.0, 1.0, flat)) ==
              doctest::Approx(1.0 / 6.0).epsilon(1e-6));
        CHECK(cylinder_mean_exit_bound(BoundSpec(4, 1, 3.0, 1.0, flat), {.richardson = true}) ==
              doctest::Approx(1.0 / 6.0).epsilon(1e-10));
    }
    SUBCASE("fractional eta keeps the integrable corner") {
        // beta = -0.5: the raw integrand is singular at 0 but the bound is
        // r^2/(2 eta) = 1 in the flat case.
        CHECK(cylinder_mean_exit_bound(BoundSpec(2, 1, 0.5, 1.0, flat)) ==
              doctest::Approx(1.0).epsilon(1e-6));
    }
    SUBCASE("hyperbolic eta=2 equals the 2-dimensional ball value") {
        auto hyp = solve_warping(CurvatureProfile::constant(1.0), 1.0);
        CHECK(cylinder_mean_exit_bound(BoundSpec(3, 1, 2.0, 1.0, hyp)) ==
              doctest::Approx(2.0 * std::log(std::cosh(0.5))).epsilon(1e-6));
    }
    SUBCASE("eta equal to the dimension reproduces the center mean exit exactly") {
        auto hyp = solve_warping(CurvatureProfile::constant(1.0), 1.0);
        ModelBall ball(3, hyp, 1.0);
        double bound = cylinder_mean_exit_bound(BoundSpec(4, 1, 3.0, 1.0, hyp));
        CHECK(bound == mean_exit_time(ball, 0.0));  // identical discretization
    }
    SUBCASE("eta validation") {
        CHECK_THROWS_AS(BoundSpec(3, 1, 0.0, 1.0, flat), EtaNonPositive);
        CHECK_THROWS_AS(BoundSpec(3, 1, -1.0, 1.0, flat), EtaNonPositive);
        CHECK_THROWS_AS(BoundSpec(1, 1, 1.0, 1.0, flat), OutOfRange);
    }
}

TEST_CASE("factorial tower bounds") {
    auto flat = solve_warping(CurvatureProfile::constant(0.0), 1.0);
    BoundSpec spec(3, 1, 2.0, 1.0, flat);
    CHECK(moment_tower_bound(spec, 1) == doctest::Approx(0.25).epsilon(1e-10));
    CHECK(moment_tower_bound(spec, 2) == doctest::Approx(0.125).epsilon(1e-10));
    CHECK(moment_tower_bound(spec, 3) == doctest::Approx(0.09375).epsilon(1e-10));
    CHECK_THROWS_AS(moment_tower_bound(spec, 0), NegativeOrder);
}

TEST_CASE("tower inequality across random balls") {
    std::mt19937_64 rng(2026);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        double b = 2.0 * unif(rng);
        double r = 0.3 + 1.2 * unif(rng);
        int n = 2 + static_cast<int>(3.0 * unif(rng));
        int k_max = 1 + static_cast<int>(3.0 * unif(rng));
        auto w = solve_warping(CurvatureProfile::constant(b), r);
        ModelBall ball(n, w, r);
        auto table = moment_table(ball, k_max);
        BoundSpec spec(n + 1, 1, static_cast<double>(n), r, w);
        for (int k = 1; k <= k_max; ++k) {
            double cap = moment_tower_bound(spec, k);
            for (double v : table.values[static_cast<std::size_t>(k)]) CHECK(v <= cap + 1e-9);
        }
    }
}

TEST_CASE("radial equation residual on the interior grid") {
    // (u^k)'' + (n-1)(h'/h)(u^k)' + k u^{k-1} = 0 with centered differences.
    for (bool hyperbolic : {false, true}) {
        auto ball = hyperbolic ? hyperbolic_ball(2, 1.0) : flat_ball(2, 1.0);
        auto table = moment_table(ball, 2);
        double step = table.grid[1] - table.grid[0];
        std::size_t lo = table.grid.size() / 20;
        std::size_t hi = table.grid.size() - table.grid.size() / 20;
        for (int k : {1, 2}) {
            const auto& u = table.values[static_cast<std::size_t>(k)];
            const auto& prev = table.values[static_cast<std::size_t>(k - 1)];
            double worst = 0.0;
            for (std::size_t i = lo; i < hi; ++i) {
                double upp = (u[i + 1] - 2.0 * u[i] + u[i - 1]) / (step * step);
                double up = (u[i + 1] - u[i - 1]) / (2.0 * step);
                double slope = log_derivative(ball.warping, table.grid[i]);
                double residual = upp + (ball.n - 1) * slope * up + k * prev[i];
                worst = std::max(worst, std::abs(residual));
            }
            CHECK(worst <= 1e-3);
        }
    }
}

TEST_CASE("domain monotonicity in the radius") {
    auto w = solve_warping(CurvatureProfile::constant(1.0), 2.0);
    double prev = 0.0;
    for (double r : {0.5, 1.0, 1.5, 2.0}) {
        double v = exit_moment(ModelBall(2, w, r), 2, 0.25);
        CHECK(v >= prev - 1e-12);
        prev = v;
    }
}

TEST_CASE("curvature comparison: hyperbolic exits faster than flat") {
    auto flat = flat_ball(3, 1.0);
    auto hyp = hyperbolic_ball(3, 1.0);
    for (double t : {0.0, 0.25, 0.5, 0.75})
        CHECK(mean_exit_time(hyp, t) <= mean_exit_time(flat, t) + 1e-12);
}
