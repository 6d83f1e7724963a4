#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <vector>

#include "maxindep/fredholm.hpp"
#include "maxindep/painleve.hpp"
#include "maxindep/quadrature.hpp"
#include "maxindep/tabulated_law.hpp"

namespace maxindep::airy_flow {

struct KpzParams {
    double t;
    double gamma;  // (t/2)^{1/3}

    explicit KpzParams(double time);
    // Fermi multiplier f_t(x) = (1 + e^{-gamma x})^{-1/2}
    double fermi(double x) const;
    // distribution function of the randomisation R, F(x) = 1/(1+e^{-x})
    static double fermi_factor_cdf(double x) { return 1.0 / (1.0 + std::exp(-x)); }
};

// Tracked spectral flow s -> eigenpairs of H(Ai_s)^2 (or of the symmetrized
// KPZ operator M_f H(Ai_s)^2 M_f when kpz is set).  Eigenvector signs are
// aligned along s so the recorded overlaps are continuous.
struct EigenFlow {
    std::vector<double> s_grid;
    int k_max = 0;
    std::optional<KpzParams> kpz;
    QuadGrid grid;
    // per s index i, per mode k (0-based k = mode k+1):
    std::vector<std::vector<double>> lambda;       // eigenvalues of the squared operator
    std::vector<std::vector<double>> nu;           // signed eigenvalues of H(Ai_s) (airy case only)
    std::vector<std::vector<double>> overlap;      // <Ai_s, Psi_k>
    std::vector<std::vector<double>> kpz_overlap;  // <f_t Ai_s, Psi_k> (kpz case)
    std::vector<std::vector<double>> boundary;     // Psi_k^{(s)}(0) by Nystrom interpolation

    int index_of(double s) const;
};

std::vector<double> uniform_grid(double lo, double hi, double step);

EigenFlow build_eigenflow(const std::vector<double>& s_grid, int k_max,
                          std::optional<KpzParams> kpz = std::nullopt);

// Law of Z_k'(Ai): density <Ai_s, Psi_k^{(s)}>^2, cdf by cumulative
// quadrature anchored at the window edge via 1 - lambda_k.
TabulatedLaw law_zk_prime(const EigenFlow& flow, int k);

// Same law via the varying-interval route: survival = exp(-int Psi_k(0)^2).
TabulatedLaw law_zk_ter(const EigenFlow& flow, int k);

// Law of Z_ell(Ai): cdf(t) = exp(-int_t^inf ||H(Ai_s)^ell Ai_s||^2 ds).
TabulatedLaw law_zk_norm(int ell, const std::vector<double>& s_grid);

// All laws Z_0..Z_ell_max in one discretization pass.
std::vector<TabulatedLaw> law_zk_norm_family(int ell_max, const std::vector<double>& s_grid);

// ||H(Ai_s)^ell Ai_s||^2 on a fixed discretization.
double hankel_power_norm(double s, int ell);

// KPZ crossover kernel K_{KPZ(s,t)} on L2(R+), by direct quadrature of the
// u-integral against the Fermi factor.
KernelOperator kpz_kernel(double s, const KpzParams& params);

// Equivalent symmetrized form M_{f_t} H(Ai_s)^2 M_{f_t} (no u-integral).
KernelOperator kpz_kernel_symmetrized(double s, const KpzParams& params);

// E[K_{Ai, s + R/gamma_t}(x, y)] over the logistic randomisation R.
double kpz_randomized_airy_entry(double x, double y, double s, const KpzParams& params);

std::vector<TabulatedLaw> kpz_max_laws(const KpzParams& params, const std::vector<double>& s_grid,
                                       int k_max);

enum class Tw1Route { ferrari_spohn, sqrt_formula };

double tw1_cdf(double s, Tw1Route route, const painleve::HastingsMcleod& q);

// det(I -+ H(Ai_s)) over the signed Hankel spectrum.
double hankel_det(double s, int sign);

// Laws of Q (survival exp(-int_s^inf q)) and of the Q_k from the spectral
// flow of L_s = 2 H(Ai_s)(I + H(Ai_s))^{-1}.  Modes whose H-eigenvalue is
// negative somewhere on the window do not define valid survival functions
// (their mu_k is negative); they are excluded from `qk` but enter the
// Lidskii product `product_all`.
struct QLaws {
    TabulatedLaw q_law;
    std::vector<TabulatedLaw> qk;          // valid cdf laws (positive modes)
    std::vector<double> product_all;       // prod over all k<=k_max of (1 - mu_k(s)) on s_grid
    std::vector<double> s_grid;
    int negative_modes = 0;
};

QLaws law_q_and_qk(const std::vector<double>& s_grid, int k_max, const painleve::HastingsMcleod& q);

// Spectral discretization of L_{TW,s} = D X D - X(X + s) on L2(R+) in a
// scaled Laguerre-function basis.
struct CommutingSpectrum {
    double s = 0.0;
    double alpha = 2.0;  // basis scale
    std::vector<double> values;   // top eigenvalues, decreasing
    Eigen::MatrixXd coeffs;       // column k: basis coefficients of Psi_k
    int basis_size = 0;

    double eigenfunction_at(int k, double x) const;
};

CommutingSpectrum commuting_operator_spectrum(double s, int k_max, int basis_size = 200,
                                              double alpha = 2.0);

// Commutation residual ||[L, K] v|| / ||v|| for the leading Nystrom
// eigenvector, both operators expressed in the Laguerre basis.
double commutation_residual(double s, int basis_size = 200, double alpha = 2.0);

// Prolate hyperspheroidal operator PHO_{N,c} in the Zernike basis.
struct ProlateFlow {
    int N = 0;
    double c = 0.0;
    Eigen::MatrixXd matrix;       // tridiagonal representation
    std::vector<double> values;   // top eigenvalues, decreasing

    static double kappa(int N, int k) { return (N + 2.0 * k + 0.5) * (N + 2.0 * k + 1.5); }
};

ProlateFlow prolate_flow(int N, double c, int k_max, int basis_size = 200);

// <T_j, x^2 T_k> assembled by quadrature on [0, 1] (independent check of
// the tridiagonal construction).
Eigen::MatrixXd zernike_x2_gram(int N, int size);

// (N^{-1/6}/sqrt(2)) J-kernel at the Airy rescaling:
//   x = 1 - X N^{-2/3}/2, c = 2N - s N^{1/3}, J_{2N}(c x y) sqrt(c x y).
double prolate_kernel_scaled(int N, double s, double X, double Y);

// Fuchs derivative checks (relative residuals).
double fixed_fuchs_residual(double s, int k, const std::optional<KpzParams>& kpz = std::nullopt);
double varying_fuchs_residual(double s, int k);
double mixed_fuchs_residual(double s, const KpzParams& params, int k);

}  // namespace maxindep::airy_flow
