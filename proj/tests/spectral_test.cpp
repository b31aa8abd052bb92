#include "exitmoments/spectral.hpp"

#include "doctest.h"

#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

using namespace exitmoments;
using std::numbers::pi;

TEST_CASE("shooting reproduces the one-dimensional eigenvalue exactly") {
    for (double r : {pi / 8.0, pi / 6.0, pi / 4.0, pi / 3.0}) {
        auto est = cap_eigenvalue_shooting(CapSpec(2, r), 1e-9);
        double exact = std::pow(pi / (2.0 * r), 2.0);
        CHECK(est.value == doctest::Approx(exact).epsilon(1e-8));
    }
}

TEST_CASE("shooting finds the hemisphere eigenvalue 2") {
    auto est = cap_eigenvalue_shooting(CapSpec(3, pi / 2.0), 1e-9);
    CHECK(est.value == doctest::Approx(2.0).epsilon(1e-7));
}

TEST_CASE("shooting matches exactly known cap eigenvalues") {
    // At the aperture boundary r = arctan(sqrt(m-1)) the first eigenvalue is
    // exactly 2m (the nu = 2 mode of the radial eigenfunction); the interior
    // value is frozen from an independent root-find of the hypergeometric
    // eigenfunction 2F1(-nu, nu+m-2, (m-1)/2, (1-cos t)/2).
    CHECK(cap_eigenvalue_shooting(CapSpec(3, std::atan(std::sqrt(2.0))), 1e-9).value ==
          doctest::Approx(6.0).epsilon(1e-7));
    CHECK(cap_eigenvalue_shooting(CapSpec(4, std::atan(std::sqrt(3.0))), 1e-9).value ==
          doctest::Approx(8.0).epsilon(1e-7));
    CHECK(cap_eigenvalue_shooting(CapSpec(5, std::atan(2.0)), 1e-9).value ==
          doctest::Approx(10.0).epsilon(1e-7));
    CHECK(cap_eigenvalue_shooting(CapSpec(3, pi / 3.0), 1e-9).value ==
          doctest::Approx(4.93604187).epsilon(1e-7));
}

TEST_CASE("cap lower bounds reproduce the reference values") {
    // Caps at the aperture-criterion boundary radii arctan(sqrt(m-1)).
    CHECK(barta_lower_bound(CapSpec(3, std::atan(std::sqrt(2.0)))).value ==
          doctest::Approx(5.85).epsilon(0.01));
    CHECK(barta_lower_bound(CapSpec(4, std::atan(std::sqrt(3.0)))).value ==
          doctest::Approx(7.60).epsilon(0.01));
    CHECK(barta_lower_bound(CapSpec(5, std::atan(2.0))).value ==
          doctest::Approx(9.28).epsilon(0.01));
}

TEST_CASE("barta bound is sharp when the trial is the eigenfunction") {
    // Hemisphere of the 2-sphere: trial cos(t) is the first eigenfunction,
    // so the quotient is constantly 2.
    auto est = barta_lower_bound(CapSpec(3, pi / 2.0));
    CHECK(est.value == doctest::Approx(2.0).epsilon(1e-5));
}

TEST_CASE("barta never exceeds shooting") {
    for (int m : {2, 3, 4}) {
        for (double r : {pi / 6.0, pi / 4.0, pi / 3.0}) {
            double lower = barta_lower_bound(CapSpec(m, r), 2048).value;
            double upper = cap_eigenvalue_shooting(CapSpec(m, r), 1e-8).value;
            CHECK(lower <= upper + 1e-6);
        }
    }
}

TEST_CASE("shooting eigenvalue decreases with the cap radius") {
    for (int m : {2, 3, 5}) {
        double prev = 1e18;
        for (double r : {pi / 8.0, pi / 6.0, pi / 4.0, pi / 3.0}) {
            double v = cap_eigenvalue_shooting(CapSpec(m, r)).value;
            CHECK(v < prev);
            prev = v;
        }
    }
}

TEST_CASE("barta quotient is invariant under trial scaling") {
    CapSpec cap(3, pi / 3.0);
    auto base = default_barta_trial(cap.r);
    BartaTrial scaled{[&](double t) { return 3.7 * base.value(t); },
                      [&](double t) { return 3.7 * base.derivative(t); }};
    double a = barta_lower_bound(cap).value;
    double b = barta_lower_bound(cap, 4096, 1e-9, &scaled).value;
    CHECK(a == doctest::Approx(b).epsilon(1e-12));
}

TEST_CASE("barta quotient profile export") {
    auto rows = barta_quotient_profile(CapSpec(3, pi / 3.0), 128);
    CHECK(rows.size() == 129);
    CHECK(rows.front().first == 0.0);
    CHECK(rows.back().first == doctest::Approx(pi / 3.0));
    for (const auto& [t, q] : rows) CHECK(q > 0.0);
}

TEST_CASE("cap validation") {
    CHECK_THROWS_AS(CapSpec(1, 0.5), OutOfRange);
    CHECK_THROWS_AS(CapSpec(3, 0.0), OutOfRange);
    CHECK_THROWS_AS(CapSpec(3, 2.0), DegenerateCap);
    CHECK_THROWS_AS(barta_lower_bound(CapSpec(3, 0.5), 16), OutOfRange);
}

TEST_CASE("cone eigenvalue threshold is strict") {
    CHECK_FALSE(cone_exit_finite(4.0, 2));
    CHECK(cone_exit_finite(5.85, 2));
    CHECK_FALSE(cone_exit_finite(7.60, 4));
    CHECK_THROWS_AS(cone_exit_finite(-1.0, 2), OutOfRange);
    CHECK_THROWS_AS(cone_exit_finite(1.0, 1), OutOfRange);
}

TEST_CASE("warped cone condition, pure cone") {
    // w = t, l = 2: F is constant 1/4, so the verdict is exactly
    // lambda > 2l and the witness solves c/(5c-1) = 1/4.
    WarpedConeSpec spec(2, LinearWarp{0.0, 1.0}, 5.0, 0.1, 1000.0);
    auto res = warped_cone_condition(spec, 1 << 16);
    CHECK(res.satisfiable);
    CHECK(res.inf_f == doctest::Approx(0.25).epsilon(1e-6));
    REQUIRE(res.c_witness.has_value());
    CHECK(*res.c_witness == doctest::Approx(1.0).epsilon(1e-5));
    CHECK(res.asymptotic_diagnostic == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("warped cone condition, cylinder") {
    // w constant: F = t^2/2 grows without bound, so any lambda works once the
    // truncation radius is allowed to move out.
    WarpedConeSpec spec(3, LinearWarp{1.0, 0.0}, 0.01, 1.0, 1000.0);
    auto res = warped_cone_condition(spec, 1 << 16);
    CHECK(res.satisfiable);
    CHECK(res.r_used > 1.0);
    CHECK(res.inf_f > 100.0);
}

TEST_CASE("warped cone tail infimum approaches 1/(2 l k^2) for linear warps") {
    for (double alpha : {0.0, 1.0, 5.0}) {
        WarpedConeSpec spec(2, LinearWarp{alpha, 1.0}, 4.5, 100.0, 1000.0);
        auto res = warped_cone_condition(spec, 1 << 17);
        CHECK(std::abs(res.inf_f - 0.25) <= 0.02 * 0.25);
    }
}

TEST_CASE("warped cone verdict flips at lambda = 2 l k^2") {
    for (double lambda : {3.0, 3.5, 4.5, 5.0}) {
        WarpedConeSpec spec(2, LinearWarp{1.0, 1.0}, lambda, 100.0, 1000.0);
        auto res = warped_cone_condition(spec, 1 << 16);
        CHECK(res.satisfiable == (lambda > 4.0));
    }
}

TEST_CASE("warped cone agrees with the eigenvalue threshold for w = t") {
    for (double lambda : {3.0, 3.9, 4.1, 5.0}) {
        WarpedConeSpec spec(2, LinearWarp{0.0, 1.0}, lambda, 1.0, 1000.0);
        auto res = warped_cone_condition(spec, 1 << 16);
        CHECK(res.satisfiable == cone_exit_finite(lambda, 2));
    }
}

TEST_CASE("exponentially growing warp is inconclusive at a finite horizon") {
    // F ~ t e^{-2t} decreases through 1/lambda: the truncation cannot decide.
    TabulatedWarp tab;
    for (int i = 0; i <= 200; ++i) {
        double t = 10.0 * static_cast<double>(i) / 200.0;
        tab.knots.emplace_back(t, std::exp(t));
    }
    WarpedConeSpec spec(2, tab, 1.0, 0.5, 10.0);
    CHECK_THROWS_AS(warped_cone_condition(spec, 1 << 14), HorizonTooSmall);
}

TEST_CASE("warped cone supersolution closed forms") {
    // Evaluation points fall between table nodes: tolerance covers the
    // linear interpolation of the cumulative profile.
    WarpedConeSpec cone(2, LinearWarp{0.0, 1.0}, 5.0, 0.1, 10.0);
    CHECK(warped_cone_supersolution(cone, 1.0, 0.0, 1 << 14) == 0.0);
    CHECK(warped_cone_supersolution(cone, 1.0, 1.0, 1 << 14) ==
          doctest::Approx(1.0).epsilon(1e-6));

    WarpedConeSpec cyl(2, LinearWarp{1.0, 0.0}, 1.0, 0.1, 10.0);
    CHECK(warped_cone_supersolution(cyl, 2.0, 2.0, 1 << 14) ==
          doctest::Approx(2.0).epsilon(1e-6));

    CHECK_THROWS_AS(warped_cone_supersolution(cone, 0.1, 1.0), InvalidC);
}

TEST_CASE("warped cone validation") {
    CHECK_THROWS_AS(WarpedConeSpec(1, LinearWarp{0.0, 1.0}, 1.0, 0.1, 10.0), OutOfRange);
    CHECK_THROWS_AS(WarpedConeSpec(2, LinearWarp{0.0, 0.0}, 1.0, 0.1, 10.0), InvalidProfile);
    CHECK_THROWS_AS(WarpedConeSpec(2, LinearWarp{0.0, 1.0}, -1.0, 0.1, 10.0), OutOfRange);
    TabulatedWarp short_tab;
    short_tab.knots = {{0.0, 1.0}, {1.0, 2.0}};
    CHECK_THROWS_AS(WarpedConeSpec(2, short_tab, 1.0, 0.1, 10.0), OutOfRange);
}
