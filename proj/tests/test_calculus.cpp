#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "expsum/calculus.hpp"
#include "expsum/model.hpp"

using namespace expsum;

TEST_CASE("DenseSignal validates and indexes its grid") {
    CHECK_THROWS_AS(DenseSignal({0.0, 1.0}, {1.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(DenseSignal({0.1, 0.5, 1.0}, {1.0, 1.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(DenseSignal({0.0, 0.5, 0.5}, {1.0, 1.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(DenseSignal({0.0, 0.5, 1.0}, {1.0, std::nan(""), 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(DenseSignal({0.0, 0.5, 1.0}, {1.0, 1.0}), std::invalid_argument);

    DenseSignal s({0.0, 0.5, 1.0, 1.5}, {1.0, 2.0, 3.0, 4.0});
    CHECK(s.size() == 4);
    CHECK(s.t_max() == 1.5);
    CHECK(s.index_of(1.0) == 2);
    CHECK(s.index_of(1.0 + 1e-12) == 2);  // parse-rounding slack
    CHECK_THROWS_AS(s.index_of(0.75), std::invalid_argument);
}

TEST_CASE("tabulate pins the grid ends") {
    auto s = DenseSignal::tabulate([](double t) { return t * t; }, 2.0, 201);
    CHECK(s.size() == 201);
    CHECK(s.grid().front() == 0.0);
    CHECK(s.grid().back() == 2.0);
    CHECK(s.values()[100] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("integrals_from_moments applies the binomial identity") {
    MomentTable table;
    table.t = 2.0;
    table.moments = {3.0, 5.0, 7.0};
    CHECK(integrals_from_moments(table, 1) == doctest::Approx(3.0));             // m0
    CHECK(integrals_from_moments(table, 2) == doctest::Approx(3.0 * 2.0 - 5.0)); // m0 t - m1
    // (m0 t^2 - 2 m1 t + m2)/2 = (12 - 20 + 7)/2
    CHECK(integrals_from_moments(table, 3) == doctest::Approx(-0.5));
    CHECK_THROWS_AS(integrals_from_moments(table, 4), std::invalid_argument);
    CHECK_THROWS_AS(integrals_from_moments(table, 0), std::invalid_argument);
}

TEST_CASE("moments_from_signal: quadrature anchors") {
    SUBCASE("constant integrand is exact") {
        auto s = DenseSignal::tabulate([](double) { return 1.0; }, 1.0, 101);
        auto table = moments_from_signal(s, 1.0, 0);
        CHECK(table.moments[0] == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("Simpson integrates cubics exactly: m1 of f = t is 1/3") {
        auto s = DenseSignal::tabulate([](double t) { return t; }, 1.0, 101);
        auto table = moments_from_signal(s, 1.0, 1);
        CHECK(table.moments[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    }
    SUBCASE("m0 of e^{-t} over [0,1] is 1 - 1/e") {
        auto s = DenseSignal::tabulate([](double t) { return std::exp(-t); }, 1.0, 1001);
        auto table = moments_from_signal(s, 1.0, 0);
        CHECK(table.moments[0] == doctest::Approx(0.63212055882855768).epsilon(1e-10));
    }
    SUBCASE("partial upper limits hit interior grid points") {
        auto s = DenseSignal::tabulate([](double t) { return std::exp(-t); }, 1.0, 1001);
        double t = s.grid()[500];
        auto table = moments_from_signal(s, t, 0);
        CHECK(table.moments[0] == doctest::Approx(1.0 - std::exp(-t)).epsilon(1e-10));
    }
    SUBCASE("off-grid or too-early times are rejected") {
        auto s = DenseSignal::tabulate([](double t) { return t; }, 1.0, 101);
        CHECK_THROWS_AS(moments_from_signal(s, 0.505, 0), std::invalid_argument);
        CHECK_THROWS_AS(moments_from_signal(s, s.grid()[1], 0), std::invalid_argument);
    }
}

TEST_CASE("iterated_quadrature_oracle: anchors") {
    SUBCASE("f = 1: J_2(1) = 1/2") {
        auto s = DenseSignal::tabulate([](double) { return 1.0; }, 1.0, 101);
        CHECK(iterated_quadrature_oracle(s, 2, 1.0) == doctest::Approx(0.5).epsilon(1e-10));
    }
    SUBCASE("f = e^t: J_2(1) = e - 2") {
        auto s = DenseSignal::tabulate([](double t) { return std::exp(t); }, 1.0, 2001);
        CHECK(iterated_quadrature_oracle(s, 2, 1.0) ==
              doctest::Approx(0.71828182845904524).epsilon(1e-8));
    }
    SUBCASE("t = 0 gives exactly 0") {
        auto s = DenseSignal::tabulate([](double t) { return std::exp(t); }, 1.0, 101);
        for (int k = 1; k <= 3; ++k) CHECK(iterated_quadrature_oracle(s, k, 0.0) == 0.0);
    }
    SUBCASE("linear integrand on a nonuniform grid is exact") {
        std::vector<double> grid = {0.0, 0.1, 0.25, 0.4, 0.6, 0.7, 0.9, 1.0};
        std::vector<double> vals(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) vals[i] = 2.0 + 3.0 * grid[i];
        DenseSignal s(std::move(grid), std::move(vals));
        CHECK(iterated_quadrature_oracle(s, 1, 1.0) == doctest::Approx(3.5).epsilon(1e-13));
    }
}

TEST_CASE("moment route and cumulative route agree on random models") {
    // both compute J_k from the same dense data; they must agree to 1e-7
    // for k <= 5 on 4001-point grids over [0,3] with |rate| <= 2
    for (std::uint64_t seed : {11u, 22u, 33u}) {
        GeneratorSpec spec;
        spec.n_terms = 1 + static_cast<int>(seed % 4);
        spec.seed = seed;
        ExpSumModel m = generate(spec).model;
        auto s = DenseSignal::tabulate([&](double t) { return evaluate(m, t); }, 3.0, 4001);
        for (std::size_t idx : {1333u, 2667u, 4000u}) {
            double t = s.grid()[idx];
            auto table = moments_from_signal(s, t, 4);
            for (int k = 1; k <= 5; ++k) {
                double via_moments = integrals_from_moments(table, k);
                double via_cumulative = iterated_quadrature_oracle(s, k, t);
                CHECK(std::abs(via_moments - via_cumulative) <= 1e-7);
                // and both sit near the closed form
                CHECK(std::abs(via_moments - iterated_integral_exact(m, k, t)) <= 1e-7);
            }
        }
    }
}

TEST_CASE("halving the grid spacing cuts the quadrature error by >= 8x") {
    ExpSumModel m({{1.0, 1.0}, {0.5, -1.7}});
    auto err = [&](int n_points, int j) {
        auto s = DenseSignal::tabulate([&](double t) { return evaluate(m, t); }, 2.0, n_points);
        auto table = moments_from_signal(s, 2.0, j);
        return std::abs(table.moments[j] - moment_exact(m, j, 2.0));
    };
    for (int j : {0, 2}) {
        double coarse = err(251, j);
        double fine = err(501, j);
        REQUIRE(fine > 0.0);
        CHECK(coarse / fine >= 8.0);
    }
}
