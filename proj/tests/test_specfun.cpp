#include "doctest.h"
#include "maxindep/specfun.hpp"
#include "maxindep/quadrature.hpp"

#include <cmath>
#include <stdexcept>

using namespace maxindep;
using specfun::airy_ai;
using specfun::bessel_j;
using specfun::gaussian_cdf;
using specfun::gaussian_pdf;
using specfun::modified_bessel_coeff;
using specfun::truncated_gaussian_moment;

TEST_CASE("airy values and decay") {
    // Ai(0) = 3^{-2/3} / Gamma(2/3)
    const double ai0 = std::pow(3.0, -2.0 / 3.0) / std::tgamma(2.0 / 3.0);
    CHECK(airy_ai(0.0).value == doctest::Approx(ai0).epsilon(1e-14));

    // decay envelope: Ai(x) x^{1/4} e^{(2/3) x^{3/2}} -> 1/(2 sqrt(pi))
    for (double x : {20.0, 30.0, 40.0}) {
        double env = airy_ai(x).value * std::pow(x, 0.25) * std::exp(2.0 / 3.0 * std::pow(x, 1.5));
        CHECK(env == doctest::Approx(1.0 / (2.0 * std::sqrt(M_PI))).epsilon(2e-2));
    }

    // oscillatory regime: Ai(-x)^2 ~ sin(pi/4 + (2/3) x^{3/2})^2 / (pi sqrt(x))
    double x = 50.0;
    double approx = std::pow(std::sin(M_PI / 4.0 + 2.0 / 3.0 * std::pow(x, 1.5)), 2) / (M_PI * std::sqrt(x));
    double exact = std::pow(airy_ai(-x).value, 2);
    CHECK(std::fabs(exact - approx) < 5e-5);

    CHECK_THROWS_AS(airy_ai(std::nan("")), std::domain_error);
}

TEST_CASE("airy satisfies the ODE") {
    // Ai'' from a 5-point stencil on the returned derivative.
    const double h = 2e-5;
    for (double x = -10.0; x <= 10.0; x += 0.5) {
        double d2 = (-airy_ai(x + 2 * h).derivative + 8 * airy_ai(x + h).derivative -
                     8 * airy_ai(x - h).derivative + airy_ai(x - 2 * h).derivative) /
                    (12 * h);
        CHECK(std::fabs(d2 - x * airy_ai(x).value) < 1e-9);
    }
}

TEST_CASE("bessel j basics") {
    CHECK(bessel_j(0.0, 0.0) == doctest::Approx(1.0));
    for (double x : {0.5, 2.0, 7.0, 31.0}) {
        double half = std::sqrt(2.0 / (M_PI * x)) * std::sin(x);
        CHECK(bessel_j(0.5, x) == doctest::Approx(half).epsilon(1e-12));
    }
    CHECK_THROWS_AS(bessel_j(-1.0, 2.0), std::domain_error);
    CHECK_THROWS_AS(bessel_j(1.0, -2.0), std::domain_error);
}

TEST_CASE("bessel j three-term recurrence") {
    for (double nu : {1.0, 2.5, 10.0, 60.0}) {
        for (double x : {0.5, 3.0, 17.0, 120.0}) {
            double r = bessel_j(nu - 1, x) + bessel_j(nu + 1, x) - (2.0 * nu / x) * bessel_j(nu, x);
            CHECK(std::fabs(r) < 1e-9);
        }
    }
}

TEST_CASE("bessel to airy transition regime") {
    double nu = 200.0, X = 1.0;
    double lhs = std::cbrt(nu) * bessel_j(2 * nu, 2 * nu - X * std::cbrt(nu));
    CHECK(std::fabs(lhs - airy_ai(X).value) < 1e-2);
}

TEST_CASE("modified bessel coefficient") {
    CHECK(modified_bessel_coeff(0, 0.0) == doctest::Approx(1.0));
    // series oracle: sum_m s^{2m+k} / (m! (m+k)!)
    for (long long k : {0LL, 1LL, 3LL, 7LL}) {
        for (double s : {0.3, 1.0, 2.2}) {
            double sum = 0.0, term;
            for (int m = 0; m < 60; ++m) {
                term = std::pow(s, 2 * m + k) / (std::tgamma(m + 1.0) * std::tgamma(m + k + 1.0));
                sum += term;
                if (term < 1e-18 * (1.0 + sum)) break;
            }
            CHECK(modified_bessel_coeff(k, s) == doctest::Approx(sum).epsilon(1e-12));
        }
    }
    CHECK(modified_bessel_coeff(-3, 1.7) == doctest::Approx(modified_bessel_coeff(3, 1.7)));
}

TEST_CASE("modified bessel normalization identity") {
    // sum_k I_k(s)^2 = I_0(2s) in the e^{s(z+1/z)} convention
    double s = 1.0, sum = 0.0;
    for (long long k = -60; k <= 60; ++k) sum += std::pow(modified_bessel_coeff(k, s), 2);
    CHECK(std::fabs(sum - modified_bessel_coeff(0, 2.0 * s)) < 1e-10);
}

TEST_CASE("truncated gaussian moments") {
    CHECK(truncated_gaussian_moment(0, 40.0) == doctest::Approx(1.0));
    CHECK(truncated_gaussian_moment(1, 0.0) == doctest::Approx(-1.0 / std::sqrt(2.0 * M_PI)));
    for (double t : {-3.0, 0.0, 3.0}) {
        auto grid = composite_gauss_legendre(-42.0, t, 0.5, 24);
        double oracle = grid.integrate([](double x) { return x * x * gaussian_pdf(x); });
        CHECK(std::fabs(truncated_gaussian_moment(2, t) - oracle) < 1e-12);
    }
    // stability for a larger order against quadrature
    auto grid = composite_gauss_legendre(-42.0, 1.0, 0.5, 24);
    double oracle = grid.integrate([](double x) { return std::pow(x, 12) * gaussian_pdf(x); });
    CHECK(truncated_gaussian_moment(12, 1.0) == doctest::Approx(oracle).epsilon(1e-11));
}

TEST_CASE("gaussian cdf sanity") {
    CHECK(gaussian_cdf(0.0) == doctest::Approx(0.5));
    CHECK(gaussian_cdf(1.0) == doctest::Approx(0.8413447460685429).epsilon(1e-14));
}
