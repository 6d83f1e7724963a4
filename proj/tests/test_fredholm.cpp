#include "doctest.h"
#include "maxindep/fredholm.hpp"
#include "maxindep/specfun.hpp"

#include <cmath>

using namespace maxindep;

TEST_CASE("rank-one kernel discretization and spectrum") {
    auto f = [](double x) { return std::exp(-x); };
    auto grid = gauss_legendre(0.0, 10.0, 60);
    auto op = discretize([&](double x, double y) { return 0.5 * f(x) * f(y); }, grid);

    // matrix equals the outer product of sqrt(w_i) f(x_i)
    Eigen::VectorXd v(grid.size());
    for (int i = 0; i < grid.size(); ++i) v(i) = std::sqrt(grid.weights[i]) * f(grid.nodes[i]);
    Eigen::MatrixXd outer = 0.5 * v * v.transpose();
    CHECK((op.matrix - outer).cwiseAbs().maxCoeff() < 1e-15);

    auto spec = leading_spectrum(op, 3);
    double norm2 = 0.5 * grid.integrate([&](double x) { return f(x) * f(x); });
    CHECK(spec.values[0] == doctest::Approx(norm2).epsilon(1e-12));
    CHECK(std::fabs(spec.values[1]) < 1e-14);

    // Nystrom interpolation reproduces the eigenvector at the nodes
    for (int i = 0; i < grid.size(); i += 17) {
        double at_node = spec.vectors(i, 0) / std::sqrt(grid.weights[i]);
        CHECK(spec.eigenfunction_at(0, grid.nodes[i]) == doctest::Approx(at_node).epsilon(1e-10));
    }
}

TEST_CASE("zero operator determinant") {
    auto grid = gauss_legendre(0.0, 5.0, 20);
    auto op = discretize([](double, double) { return 0.0; }, grid);
    CHECK(fredholm_det(op) == doctest::Approx(1.0));
}

TEST_CASE("airy kernel trace against adaptive quadrature") {
    auto grid = gauss_legendre(0.0, 20.0, 80);
    auto op = discretize([](double x, double y) { return airy_kernel(x, y); }, grid);
    double trace = op.matrix.trace();
    // independent route: finer composite quadrature of the diagonal
    auto fine = composite_gauss_legendre(0.0, 20.0, 0.25, 16);
    double oracle = fine.integrate([](double x) { return airy_kernel(x, x); });
    CHECK(std::fabs(trace - oracle) < 1e-8);
}

TEST_CASE("airy determinant: refinement and gauge invariance") {
    auto det_n = [](int n) {
        auto grid = gauss_legendre(0.0, 20.0, n);
        return fredholm_det(discretize([](double x, double y) { return airy_kernel(x, y); }, grid));
    };
    double d40 = det_n(40), d80 = det_n(80), d160 = det_n(160);
    CHECK(std::fabs(d80 - d40) < 1e-9);
    CHECK(std::fabs(d160 - d80) < 1e-10);
}

TEST_CASE("airy determinant tail at s = 8") {
    double det = fredholm_det(airy_kernel_operator(8.0));
    CHECK(det < 1.0);
    // 1 - det <= trace = int_8^inf int_0^inf Ai(x+u)^2 du dx, bounded by quadrature
    auto grid = composite_gauss_legendre(8.0, 30.0, 0.5, 12);
    double trace = grid.integrate([](double x) { return specfun::airy_square_tail(x); });
    CHECK(1.0 - det <= trace * (1.0 + 1e-6) + 1e-15);
    CHECK(det > 1.0 - 1e-6);
}

TEST_CASE("lidskii product matches determinant") {
    auto op = airy_kernel_operator(0.0);
    auto spec = leading_spectrum(op, 40);
    double prod = 1.0;
    for (double lam : spec.values) prod *= (1.0 - lam);
    CHECK(prod == doctest::Approx(fredholm_det(op)).epsilon(1e-8));
}

TEST_CASE("airy eigenvalues decrease in s") {
    auto s2 = leading_spectrum(airy_kernel_operator(-2.0), 5);
    auto s0 = leading_spectrum(airy_kernel_operator(0.0), 5);
    auto sp = leading_spectrum(airy_kernel_operator(2.0), 5);
    for (int k = 0; k < 5; ++k) {
        CHECK(s2.values[k] > s0.values[k]);
        CHECK(s0.values[k] > sp.values[k]);
    }
}

TEST_CASE("varying-interval equivalence") {
    for (double s : {-2.0, 0.0, 1.5}) {
        double det_shifted = fredholm_det(airy_kernel_operator(s));
        // same operator written on L2([s, inf)) with the unshifted kernel
        double L = airy_cutoff(s);
        auto grid = composite_gauss_legendre(s, s + L, 0.5, 12);
        double det_var =
            fredholm_det(discretize([](double x, double y) { return airy_kernel(x, y); }, grid));
        CHECK(std::fabs(det_shifted - det_var) < 1e-9);
    }
}

TEST_CASE("spectral radius guard") {
    auto grid = gauss_legendre(0.0, 2.0, 30);
    auto op = discretize([](double x, double y) { return std::cos(x - y); }, grid);
    CHECK_THROWS_AS(fredholm_det(op), std::runtime_error);
}

TEST_CASE("discrete fredholm determinant of the Bessel kernel") {
    auto bessel_kernel = [](double xi) {
        return DiscreteKernel([xi](long long x, long long y) {
            double acc = 0.0;
            double z = 2.0 * std::sqrt(xi);
            for (int k = 1; k <= 80; ++k) {
                double a = specfun::bessel_j(static_cast<double>(x + k), z);
                double b = specfun::bessel_j(static_cast<double>(y + k), z);
                acc += a * b;
                if (k > 10 && std::fabs(a) < 1e-20 && std::fabs(b) < 1e-20) break;
            }
            return acc;
        });
    };

    SUBCASE("xi = 0 kernel vanishes") {
        auto r = discrete_fredholm_det(bessel_kernel(0.0), 0, 10);
        CHECK(r.value == doctest::Approx(1.0));
        CHECK_FALSE(r.truncation_warning);
    }
    SUBCASE("xi = 1, shift 0 equals exp(-1)") {
        auto r = discrete_fredholm_det(bessel_kernel(1.0), 0, 30);
        CHECK(r.value == doctest::Approx(std::exp(-1.0)).epsilon(1e-10));
    }
    SUBCASE("xi = 1, shift 1 equals exp(-1) I_0(2)") {
        // P(lambda_1 <= 1) = e^{-xi} sum_m xi^m / (m!)^2
        auto r = discrete_fredholm_det(bessel_kernel(1.0), 1, 30);
        double oracle = std::exp(-1.0) * specfun::modified_bessel_coeff(0, 1.0);
        CHECK(r.value == doctest::Approx(oracle).epsilon(1e-10));
    }
    SUBCASE("insufficient truncation is flagged") {
        auto r = discrete_fredholm_det(bessel_kernel(16.0), 0, 4);
        CHECK(r.truncation_warning);
    }
}
