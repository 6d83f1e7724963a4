#pragma once

#include <Eigen/Dense>
#include <vector>

namespace maxindep::painleve {

// Piecewise-Chebyshev function on a panelled interval, with barycentric
// evaluation (spectral-element collocation output).
struct PiecewiseChebFn {
    std::vector<double> breaks;                // K+1 increasing
    std::vector<std::vector<double>> nodes;    // per panel
    std::vector<std::vector<double>> values;   // per panel

    double operator()(double t) const;
    bool empty() const { return breaks.empty(); }
};

// sigma(t; a): solution of the sigma-form of Painleve II,
//   (y'')^2 + 4 y' ((y')^2 - t y' + y) = a^2,
// with y ~ t^2/4 + (4a^2-1)/(8t) at -inf and y ~ -a sqrt(t) at +inf
// (a = 0: y -> 0 like int_t^inf Ai^2).
struct PainleveSolution {
    double a = 0.0;
    double L_minus = 0.0, L_plus = 0.0;
    PiecewiseChebFn sigma, sigma_d, sigma_dd;
    double ode_residual = 0.0;             // max interior |algebraic residual|
    double left_boundary_residual = 0.0;   // |y(L-) - two-term expansion|

    double at(double t) const { return sigma(t); }
    double deriv_at(double t) const { return sigma_d(t); }
    double deriv2_at(double t) const { return sigma_dd(t); }
};

struct BvpOptions {
    double L_minus = -18.0;
    double L_plus = 32.0;
    int degree = 40;        // Chebyshev degree per panel
    double panel_width = 4.0;
    double newton_tol = 1e-11;
    int max_iter = 60;
};

PainleveSolution solve_sigma_pii(double a, const BvpOptions& opt = {});

// Hastings-McLeod solution of q'' = t q + 2 q^3, q ~ Ai at +inf,
// q ~ sqrt(-t/2) at -inf; solved as a two-point BVP.
struct HastingsMcleod {
    double L_minus = 0.0, L_plus = 0.0;
    PiecewiseChebFn q, q_d;
    double ode_residual = 0.0;

    double at(double t) const { return q(t); }
    double deriv_at(double t) const { return q_d(t); }

    // int_s^inf q(x) dx, with Airy tail completion past L_plus.
    double integral_tail(double s) const;
    // int_s^inf (x - s) q(x)^2 dx, with Airy tail completion.
    double convolution_tail(double s) const;
};

struct HmOptions {
    double L_minus = -18.0;
    double L_plus = 12.0;
    int degree = 40;
    double panel_width = 3.0;
    double newton_tol = 1e-12;
    int max_iter = 60;
};

HastingsMcleod hastings_mcleod(const HmOptions& opt = {});

// Q(x) = exp(-int_x^inf delta_sigma), delta_sigma = sigma(.;1) - sigma(.;0),
// anchored to the Airy decay at the right end of the solved window.
struct QFunction {
    double L_minus = 0.0, L_plus = 0.0;
    std::vector<double> grid;        // dense evaluation grid
    std::vector<double> values;      // Q on grid
    std::vector<double> log_values;  // log Q, used for interpolation
    double anchor = 0.0;             // log anchor used at L_plus

    double at(double x) const;
    // int_s^inf (x - s) Q(x)^2 dx with Airy tail completion.
    double convolution_tail(double s) const;
};

QFunction q_from_delta_sigma(const PainleveSolution& sigma0, const PainleveSolution& sigma1);

// F_TW2(s) = exp(-int_s^inf (x - s) q(x)^2 dx).
double tw2_cdf_classical(const HastingsMcleod& q, double s);

// F_TW2(s) = exp(-int_s^inf (x - s) Q(x)^2 dx), Thm "new expression" route.
double tw2_cdf_new(const QFunction& q, double s);

// sigma-form of Painleve IV (physicist convention, weight e^{-t^2}):
//   (y'')^2 - 4 (t y' - y)^2 + 4 y' (y' - 2a) (y' + 2n) = 0,
//   y ~ -2nt - n(a+n)/t at -inf.
struct SigmaPIVSolution {
    int n = 0;
    double a = 0.0;
    double L_minus = 0.0, L_plus = 0.0;
    PiecewiseChebFn sigma, sigma_d, sigma_dd;
    double ode_residual = 0.0;
    double left_boundary_residual = 0.0;

    double at(double t) const { return sigma(t); }
    double deriv_at(double t) const { return sigma_d(t); }
};

SigmaPIVSolution solve_sigma_piv(int n, double a, int degree = 40);

// Hamiltonian reconstruction from a sigma-PII solution: p = -2 sigma',
// q = (4 sigma'' + 2 alpha + 1)/(8 sigma') with alpha = a - 1/2, and the
// residual of the Painleve XXXIV equation in the same variable,
//   p p'' = (p')^2/2 + 2 p^3 + 2 t p^2 - 2 a^2.
struct HamiltonianReconstruction {
    std::vector<double> t;
    std::vector<double> p, q;
    std::vector<double> p34_residual;
    std::vector<bool> singular;  // sigma' near zero at this node
};

HamiltonianReconstruction hamiltonian_reconstruction(const PainleveSolution& sigma,
                                                     const std::vector<double>& t_grid);

}  // namespace maxindep::painleve
