#include <cmath>
#include <complex>
#include <random>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "expsum/errors.hpp"
#include "expsum/solver.hpp"

using namespace expsum;

TEST_CASE("lu_solve: identity and diagonal anchors") {
    SUBCASE("identity") {
        DenseMatrix I(3, 3);
        for (int i = 0; i < 3; ++i) I(i, i) = 1.0;
        LuSolution s = lu_solve(I, {1.0, -2.0, 0.5});
        CHECK(s.x[0] == doctest::Approx(1.0));
        CHECK(s.x[1] == doctest::Approx(-2.0));
        CHECK(s.x[2] == doctest::Approx(0.5));
        CHECK(s.cond_estimate == doctest::Approx(1.0));
    }
    SUBCASE("diag(2, 0.5): solution (1, 2), condition exactly 4") {
        DenseMatrix A(2, 2, {2.0, 0.0, 0.0, 0.5});
        LuSolution s = lu_solve(A, {2.0, 1.0});
        CHECK(s.x[0] == doctest::Approx(1.0));
        CHECK(s.x[1] == doctest::Approx(2.0));
        CHECK(s.cond_estimate == doctest::Approx(4.0));
    }
}

TEST_CASE("lu_solve flags near-singular systems one way or the other") {
    DenseMatrix A(2, 2, {1.0, 1.0, 1.0, 1.0 + 1e-15});
    bool threw = false;
    double cond = 0.0;
    try {
        cond = lu_solve(A, {1.0, 1.0}).cond_estimate;
    } catch (const SingularMatrixError&) {
        threw = true;
    }
    CHECK((threw || cond > 1e13));

    DenseMatrix B(2, 2, {1.0, 1.0, 1.0, 1.0});
    CHECK_THROWS_AS(lu_solve(B, {1.0, 1.0}), SingularMatrixError);
}

TEST_CASE("lu_solve rejects shape mismatches") {
    DenseMatrix R(2, 3);
    CHECK_THROWS_AS(lu_solve(R, {1.0, 2.0}), std::invalid_argument);
    DenseMatrix S(2, 2, {1.0, 0.0, 0.0, 1.0});
    CHECK_THROWS_AS(lu_solve(S, {1.0, 2.0, 3.0}), std::invalid_argument);
}

TEST_CASE("lu_solve residuals stay small relative to conditioning") {
    std::mt19937_64 eng(99);
    auto u = [&] { return 2.0 * ((eng() >> 11) * 0x1.0p-53) - 1.0; };
    for (int n : {2, 4, 8, 12}) {
        DenseMatrix A(n, n);
        std::vector<double> b(n);
        for (int i = 0; i < n; ++i) {
            b[i] = u();
            for (int j = 0; j < n; ++j) A(i, j) = u();
        }
        LuSolution s = lu_solve(A, b);
        double resid = 0.0, bmax = 0.0;
        for (int i = 0; i < n; ++i) {
            double r = -b[i];
            for (int j = 0; j < n; ++j) r += A(i, j) * s.x[j];
            resid = std::max(resid, std::abs(r));
            bmax = std::max(bmax, std::abs(b[i]));
        }
        CHECK(resid <= 1e-12 * std::max(1.0, s.cond_estimate) * bmax);
    }
}

TEST_CASE("MonicPolynomial: expansion, evaluation, derivative") {
    // (a - 2)(a - 3) = a^2 - 5a + 6
    MonicPolynomial p = MonicPolynomial::from_roots({2.0, 3.0});
    REQUIRE(p.degree() == 2);
    CHECK(p.low_coeffs[0] == doctest::Approx(6.0));
    CHECK(p.low_coeffs[1] == doctest::Approx(-5.0));
    CHECK(std::abs(p.eval({2.0, 0.0})) == doctest::Approx(0.0));
    CHECK(std::abs(p.eval({3.0, 0.0})) == doctest::Approx(0.0));
    // p' = 2a - 5
    CHECK(p.deriv({2.0, 0.0}).real() == doctest::Approx(-1.0));
    CHECK(p.deriv({4.0, 0.0}).real() == doctest::Approx(3.0));

    MonicPolynomial lin = MonicPolynomial::from_roots({0.5});
    CHECK(lin.low_coeffs[0] == doctest::Approx(-0.5));
}

TEST_CASE("poly_roots: closed-form degrees") {
    SUBCASE("degree 1") {
        auto r = poly_roots(MonicPolynomial{{-1.7}});
        REQUIRE(r.size() == 1);
        CHECK(r[0].real() == doctest::Approx(1.7));
        CHECK(r[0].imag() == 0.0);
    }
    SUBCASE("a^2 - 1: roots -1, 1 in (real, imag) order") {
        auto r = poly_roots(MonicPolynomial{{-1.0, 0.0}});
        REQUIRE(r.size() == 2);
        CHECK(r[0].real() == doctest::Approx(-1.0));
        CHECK(r[1].real() == doctest::Approx(1.0));
    }
    SUBCASE("a^2 - a - 2: roots -1, 2") {
        auto r = poly_roots(MonicPolynomial{{-2.0, -1.0}});
        REQUIRE(r.size() == 2);
        CHECK(r[0].real() == doctest::Approx(-1.0));
        CHECK(r[1].real() == doctest::Approx(2.0));
    }
    SUBCASE("a^2 + 1: conjugate pair, sorted by imaginary part") {
        auto r = poly_roots(MonicPolynomial{{1.0, 0.0}});
        REQUIRE(r.size() == 2);
        CHECK(r[0].real() == doctest::Approx(0.0));
        CHECK(r[0].imag() == doctest::Approx(-1.0));
        CHECK(r[1].imag() == doctest::Approx(1.0));
    }
    SUBCASE("repeated root survives the stable quadratic") {
        auto r = poly_roots(MonicPolynomial{{1.0, -2.0}});  // (a-1)^2
        REQUIRE(r.size() == 2);
        CHECK(r[0].real() == doctest::Approx(1.0));
        CHECK(r[1].real() == doctest::Approx(1.0));
    }
}

TEST_CASE("poly_roots recovers planted real roots through the companion path") {
    std::vector<std::vector<double>> cases = {
        {-1.7, -0.6, 0.3},
        {-1.9, -1.1, -0.3, 0.8, 1.6},
        {-1.8, -1.2, -0.5, 0.2, 1.0, 1.9},
    };
    for (const auto& planted : cases) {
        MonicPolynomial p = MonicPolynomial::from_roots(planted);
        auto roots = poly_roots(p);
        REQUIRE(roots.size() == planted.size());
        for (std::size_t i = 0; i < planted.size(); ++i) {
            CHECK(std::abs(roots[i].real() - planted[i]) <= 1e-9);
            CHECK(std::abs(roots[i].imag()) <= 1e-12);
        }
        // every root honors the residual contract it was accepted under
        for (const auto& r : roots) {
            double scale = 1.0 + std::pow(std::abs(r), p.degree());
            CHECK(std::abs(p.eval(r)) / scale <= 1e-8);
        }
    }
}

TEST_CASE("poly_roots: zero tolerance rejects inexact roots") {
    MonicPolynomial p = MonicPolynomial::from_roots({0.3, 0.7, 1.1, -0.4, -1.3});
    CHECK_THROWS_AS(poly_roots(p, 0.0), NonConvergenceError);
}

TEST_CASE("exp_collocation_solve: anchors and error paths") {
    const double e = std::exp(1.0);
    SUBCASE("cosh data at {0, 1}: coefficients (1, 1)") {
        CollocationFit fit = exp_collocation_solve({1.0, -1.0}, {0.0, 1.0}, {2.0, e + 1.0 / e}, false);
        REQUIRE(fit.coefficients.size() == 2);
        CHECK(fit.coefficients[0] == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(fit.coefficients[1] == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("single term") {
        CollocationFit fit = exp_collocation_solve({-0.5}, {0.0}, {3.0}, false);
        CHECK(fit.coefficients[0] == doctest::Approx(3.0));
    }
    SUBCASE("constant column") {
        CollocationFit fit = exp_collocation_solve({1.0}, {0.0, 1.0}, {5.0, e + 4.0}, true);
        REQUIRE(fit.coefficients.size() == 2);
        CHECK(fit.coefficients[0] == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(fit.coefficients[1] == doctest::Approx(4.0).epsilon(1e-12));
    }
    SUBCASE("overdetermined consistent data: tiny residual") {
        std::vector<double> pts = {0.0, 0.5, 1.0, 1.5};
        std::vector<double> vals(pts.size());
        double vnorm = 0.0;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            vals[i] = 2.0 * std::exp(0.8 * pts[i]) - 0.7 * std::exp(-1.1 * pts[i]);
            vnorm += vals[i] * vals[i];
        }
        CollocationFit fit = exp_collocation_solve({0.8, -1.1}, pts, vals, false);
        CHECK(fit.coefficients[0] == doctest::Approx(2.0).epsilon(1e-10));
        CHECK(fit.coefficients[1] == doctest::Approx(-0.7).epsilon(1e-10));
        CHECK(fit.residual <= 1e-10 * std::sqrt(vnorm));
    }
    SUBCASE("identical rates collapse the rank") {
        CHECK_THROWS_AS(exp_collocation_solve({1.0, 1.0}, {0.0, 0.5, 1.0}, {1.0, 1.0, 1.0}, false),
                        SingularMatrixError);
        CHECK_THROWS_AS(exp_collocation_solve({1.0, 1.0}, {0.0, 1.0}, {1.0, 1.0}, false),
                        SingularMatrixError);
    }
    SUBCASE("too few points") {
        CHECK_THROWS_AS(exp_collocation_solve({1.0, -1.0}, {0.0}, {1.0}, false),
                        std::invalid_argument);
    }
}
