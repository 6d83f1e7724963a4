#include "doctest.h"
#include "maxindep/airy_flow.hpp"
#include "maxindep/fredholm.hpp"
#include "maxindep/painleve.hpp"
#include "maxindep/specfun.hpp"

#include <cmath>

using namespace maxindep;
using namespace maxindep::airy_flow;

namespace {

const EigenFlow& airy_flow_fixture() {
    static EigenFlow flow = build_eigenflow(uniform_grid(-10.0, 8.0, 0.05), 40);
    return flow;
}

const painleve::HastingsMcleod& hm() {
    static painleve::HastingsMcleod q = painleve::hastings_mcleod();
    return q;
}

}  // namespace

TEST_CASE("eigenflow endpoint and completeness") {
    const auto& flow = airy_flow_fixture();

    // lambda_1(8) below the trace bound int_8^inf int_0^inf Ai(x+u)^2 du dx
    double lam1_end = flow.lambda.back()[0];
    CHECK(lam1_end < 1e-6);
    auto g = composite_gauss_legendre(8.0, 30.0, 0.5, 12);
    double trace = g.integrate([](double x) { return specfun::airy_square_tail(x); });
    CHECK(lam1_end <= trace * (1 + 1e-9));

    // completeness: int <Ai_s, Psi_k>^2 ds = 1
    for (int k = 1; k <= 2; ++k) {
        std::vector<double> dens(flow.s_grid.size());
        for (size_t i = 0; i < flow.s_grid.size(); ++i)
            dens[i] = flow.overlap[i][k - 1] * flow.overlap[i][k - 1];
        double mass = cumulative_integral(flow.s_grid, dens).back();
        CHECK(std::fabs(mass - 1.0) < 2e-4);
    }
}

TEST_CASE("fixed-interval fuchs derivative") {
    for (double s : {-2.0, 0.0, 1.5}) {
        CHECK(fixed_fuchs_residual(s, 1) < 1e-5);
        CHECK(fixed_fuchs_residual(s, 2) < 1e-4);
    }
}

TEST_CASE("varying-interval fuchs derivative") {
    for (double s : {-2.0, 0.0, 1.5}) CHECK(varying_fuchs_residual(s, 1) < 1e-4);
}

TEST_CASE("laws of Z_k' reproduce the determinant") {
    const auto& flow = airy_flow_fixture();
    std::vector<TabulatedLaw> laws;
    for (int k = 1; k <= 40; ++k) laws.push_back(law_zk_prime(flow, k));

    for (auto& law : laws) CHECK(std::fabs(law.total_mass - 1.0) < 1e-4);
    CHECK(std::fabs(laws[0].cdf.back() + flow.lambda.back()[0] - 1.0) < 1e-4);

    for (double s : {-2.0, 0.0, 2.0}) {
        double prod = 1.0;
        for (auto& law : laws) prod *= law.cdf_at(s);
        double det = fredholm_det(airy_kernel_operator(s));
        CHECK(std::fabs(prod - det) < 1e-5);
    }
}

TEST_CASE("ter route agrees with prime route") {
    const auto& flow = airy_flow_fixture();
    for (int k : {1, 2, 3}) {
        auto prime = law_zk_prime(flow, k);
        auto ter = law_zk_ter(flow, k);
        double worst = 0.0;
        for (size_t i = 0; i < prime.grid.size(); ++i)
            worst = std::max(worst, std::fabs(prime.cdf[i] - ter.cdf[i]));
        CHECK(worst < 1e-4);
    }
    auto ter1 = law_zk_ter(flow, 1);
    CHECK(ter1.cdf.front() < 1e-3);  // cdf at s = -10
    for (size_t i = 1; i < ter1.cdf.size(); ++i) CHECK(ter1.cdf[i] >= ter1.cdf[i - 1] - 1e-12);
}

TEST_CASE("exponential pushforward inversion") {
    const auto& flow = airy_flow_fixture();
    auto ter = law_zk_ter(flow, 1);
    // Phi_1(t) = -log survival = -log(1 - cdf)
    std::vector<double> phi(ter.grid.size());
    for (size_t i = 0; i < phi.size(); ++i) phi[i] = -std::log1p(-ter.cdf[i]);
    for (int j = 1; j < 10000; j += 97) {
        double u = j / 10000.0;
        if (u <= ter.cdf.front() || u >= ter.cdf.back()) continue;
        double target = -std::log1p(-u);
        // invert Phi by bisection on the pchip interpolant
        double lo = ter.grid.front(), hi = ter.grid.back();
        for (int it = 0; it < 60; ++it) {
            double mid = 0.5 * (lo + hi);
            (pchip_eval(ter.grid, phi, mid) < target ? lo : hi) = mid;
        }
        CHECK(std::fabs(ter.cdf_at(0.5 * (lo + hi)) - u) < 1e-6);
    }
}

TEST_CASE("norm-route laws") {
    auto s_grid = uniform_grid(-10.0, 8.0, 0.05);
    auto family = law_zk_norm_family(12, s_grid);

    SUBCASE("ell = 0 norm matches quadrature") {
        for (double s : {-4.0, 0.0, 3.0}) {
            double direct = specfun::airy_square_tail(s);
            CHECK(std::fabs(hankel_power_norm(s, 0) - direct) < 1e-9);
        }
    }
    SUBCASE("product of norm-route laws reproduces the determinant at s = 1") {
        double prod = 1.0;
        for (auto& law : family) prod *= law.cdf_at(1.0);
        double det = fredholm_det(airy_kernel_operator(1.0));
        CHECK(std::fabs(prod - det) < 1e-5);
    }
    SUBCASE("left divergence exponent") {
        // G(T) = int_{-T}^{8} ||Ai_s||^2 ds should grow ~ T^{3/2}
        auto cdf0 = family[0];
        double g4 = -std::log(cdf0.cdf_at(-4.0));
        double g8 = -std::log(cdf0.cdf_at(-8.0));
        double expo = std::log(g8 / g4) / std::log(2.0);
        CHECK(expo >= 1.4);
    }
}

TEST_CASE("kpz kernel routes") {
    KpzParams p1(1.0);

    SUBCASE("fermi step limit") {
        KpzParams plarge(1e6);
        auto op = kpz_kernel_symmetrized(0.0, plarge);
        for (int i = 0; i < op.grid.size(); i += 37) {
            double x = op.grid.nodes[i];
            if (x < 0.5) continue;
            for (int j = i; j < op.grid.size(); j += 41) {
                double y = op.grid.nodes[j];
                if (y < 0.5) continue;
                double kv = op.matrix(i, j) / std::sqrt(op.grid.weights[i] * op.grid.weights[j]);
                CHECK(std::fabs(kv - airy_kernel(x, y)) < 1e-4);
            }
        }
    }
    SUBCASE("randomized airy identity") {
        auto op = kpz_kernel(0.0, p1);
        for (int i = 0; i < op.grid.size(); i += 29) {
            for (int j = i; j < op.grid.size(); j += 31) {
                double x = op.grid.nodes[i], y = op.grid.nodes[j];
                double direct = op.matrix(i, j) / std::sqrt(op.grid.weights[i] * op.grid.weights[j]);
                double rand_route = kpz_randomized_airy_entry(x, y, 0.0, p1);
                CHECK(std::fabs(direct - rand_route) < 1e-8);
            }
        }
    }
    SUBCASE("determinant in (0,1) and route agreement") {
        double d1 = fredholm_det(kpz_kernel(0.0, p1));
        double d2 = fredholm_det(kpz_kernel_symmetrized(0.0, p1));
        CHECK(d1 > 0.0);
        CHECK(d1 < 1.0);
        CHECK(std::fabs(d1 - d2) < 1e-6);
    }
}

TEST_CASE("kpz max laws product against the determinant") {
    KpzParams p1(1.0);
    auto laws = kpz_max_laws(p1, uniform_grid(-9.0, 2.5, 0.04), 40);
    for (auto& law : laws) CHECK(std::fabs(law.total_mass - 1.0) < 1e-4);
    double prod = 1.0;
    for (auto& law : laws) prod *= law.cdf_at(0.0);
    double det = fredholm_det(kpz_kernel(0.0, p1));
    CHECK(std::fabs(prod - det) < 1e-5);
}

TEST_CASE("kpz laws approach the airy laws as t grows") {
    const auto& flow = airy_flow_fixture();
    auto prime1 = law_zk_prime(flow, 1);
    auto grid = uniform_grid(-8.0, 2.0, 0.1);
    double prev = 1e9;
    for (double t : {10.0, 1e3, 1e6}) {
        auto laws = kpz_max_laws(KpzParams(t), grid, 1);
        double dist = 0.0;
        for (double s = -6.0; s <= 2.0; s += 0.25)
            dist = std::max(dist, std::fabs(laws[0].cdf_at(s) - prime1.cdf_at(s)));
        CHECK(dist < prev);
        prev = dist;
    }
}

TEST_CASE("tw1 routes") {
    const auto& q = hm();
    for (double s : {-3.0, 0.0, 2.0}) {
        double fs = tw1_cdf(s, Tw1Route::ferrari_spohn, q);
        double sq = tw1_cdf(s, Tw1Route::sqrt_formula, q);
        CHECK(std::fabs(fs - sq) < 1e-6);
    }
    CHECK(std::fabs(tw1_cdf(8.0, Tw1Route::ferrari_spohn, q) - 1.0) < 1e-6);

    // det(I-H) det(I+H) = det(I-H^2)
    for (double s : {-2.0, 0.0, 2.0}) {
        double lhs = hankel_det(s, +1) * hankel_det(s, -1);
        double rhs = fredholm_det(airy_kernel_operator(s));
        CHECK(std::fabs(lhs - rhs) < 1e-8);
    }
}

TEST_CASE("Q law and its decomposition") {
    const auto& q = hm();
    auto s_grid = uniform_grid(-10.0, 8.0, 0.05);
    auto laws = law_q_and_qk(s_grid, 40, q);

    // cdf axioms for F_Q
    CHECK(laws.q_law.cdf.front() < 1e-3);
    CHECK(std::fabs(laws.q_law.cdf.back() - 1.0) < 1e-3);
    for (size_t i = 1; i < laws.q_law.cdf.size(); ++i)
        CHECK(laws.q_law.cdf[i] >= laws.q_law.cdf[i - 1] - 1e-12);

    // Lidskii product over all modes against exp(-int q)
    int i0 = 0;
    while (laws.s_grid[i0] < -0.001) ++i0;
    CHECK(std::fabs(laws.product_all[i0] - laws.q_law.cdf[i0]) < 1e-4);

    // F_Q F_TW2 = F_TW1^2 with the Ferrari-Spohn route
    for (double s : {-2.0, 0.0, 2.0}) {
        double f1 = tw1_cdf(s, Tw1Route::ferrari_spohn, q);
        double f2 = fredholm_det(airy_kernel_operator(s));
        double fq = std::exp(-q.integral_tail(s));
        CHECK(std::fabs(fq * f2 - f1 * f1) < 1e-8);
    }
}

TEST_CASE("commuting operator eigenvectors") {
    auto cs = commuting_operator_spectrum(0.0, 6);

    // orthonormality through an independent quadrature
    auto grid = composite_gauss_legendre(0.0, 28.0, 0.5, 12);
    for (int a = 0; a < 3; ++a)
        for (int b = a; b < 3; ++b) {
            double dot = grid.integrate(
                [&](double x) { return cs.eigenfunction_at(a, x) * cs.eigenfunction_at(b, x); });
            CHECK(std::fabs(dot - (a == b ? 1.0 : 0.0)) < 1e-8);
        }

    // overlap with the Nystrom eigenvectors of K_{Ai_s}
    auto op = airy_kernel_operator(0.0);
    auto spec = leading_spectrum(op, 6);
    for (int k = 0; k < 5; ++k) {
        double dot = 0.0, na = 0.0, nb = 0.0;
        for (int i = 0; i < op.grid.size(); ++i) {
            double w = op.grid.weights[i];
            double f_flow = spec.vectors(i, k) / std::sqrt(w);
            double f_comm = cs.eigenfunction_at(k, op.grid.nodes[i]);
            dot += w * f_flow * f_comm;
            na += w * f_flow * f_flow;
            nb += w * f_comm * f_comm;
        }
        CHECK(std::fabs(dot) / std::sqrt(na * nb) >= 1.0 - 1e-4);
    }

    CHECK(commutation_residual(0.0) < 1e-4);
}

TEST_CASE("prolate operator") {
    SUBCASE("c = 0 eigenvalues") {
        auto pf = prolate_flow(4, 0.0, 6, 80);
        for (int k = 0; k < 6; ++k)
            CHECK(std::fabs(pf.values[k] + ProlateFlow::kappa(4, k)) < 1e-10);
    }
    SUBCASE("tridiagonality via quadrature") {
        for (int N : {3, 6}) {
            auto gram = zernike_x2_gram(N, 12);
            for (int j = 0; j < 12; ++j)
                for (int k = 0; k < 12; ++k) {
                    if (std::abs(j - k) > 1) {
                        CHECK(std::fabs(gram(j, k)) < 1e-10);
                    }
                }
            // recurrence-built matrix must match the quadrature Gram
            auto pf = prolate_flow(N, 1.0, 3, 12);
            for (int j = 0; j < 11; ++j) {
                double diag_q = -ProlateFlow::kappa(N, j) + 1.0 * (1.0 - gram(j, j));
                CHECK(std::fabs(pf.matrix(j, j) - diag_q) < 1e-9);
                double off_q = -gram(j, j + 1);
                CHECK(std::fabs(pf.matrix(j, j + 1) - off_q) < 1e-9);
            }
        }
    }
    SUBCASE("bessel kernel approaches the airy kernel") {
        double prev = 1e9;
        for (int N : {50, 100, 200}) {
            double worst = 0.0;
            for (double X : {0.3, 1.0})
                for (double Y : {0.5, 1.5}) {
                    double lhs = prolate_kernel_scaled(N, 0.5, X, Y);
                    double rhs = specfun::airy_ai(X + Y + 0.5).value;
                    worst = std::max(worst, std::fabs(lhs - rhs));
                }
            CHECK(worst < prev);
            prev = worst;
        }
    }
}

TEST_CASE("mixed fuchs residual") {
    KpzParams p1(1.0);
    CHECK(mixed_fuchs_residual(-1.0, p1, 1) < 1e-4);
    CHECK(mixed_fuchs_residual(0.5, p1, 1) < 1e-4);
}
