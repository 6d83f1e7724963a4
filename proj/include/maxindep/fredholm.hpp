#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "maxindep/quadrature.hpp"

namespace maxindep {

using Kernel = std::function<double(double, double)>;

// Symmetric Nystrom discretization M[i][j] = sqrt(w_i w_j) K(x_i, x_j).
struct KernelOperator {
    Eigen::MatrixXd matrix;
    QuadGrid grid;
    Kernel kernel;  // kept for Nystrom interpolation of eigenfunctions
    bool symmetrized = true;

    void check_symmetry(double tol = 1e-13) const;
};

KernelOperator discretize(const Kernel& kernel, QuadGrid grid);

// det(I - M).  Requires spectral radius < 1; throws std::runtime_error otherwise.
double fredholm_det(const KernelOperator& op);

// Leading eigenpairs, eigenvalues in decreasing order; eigenfunctions are
// L2-normalized w.r.t. the grid weights and evaluable anywhere by
// K-weighted (Nystrom) interpolation.
struct LeadingSpectrum {
    QuadGrid grid;
    Kernel kernel;
    std::vector<double> values;
    Eigen::MatrixXd vectors;  // column k: v_i = sqrt(w_i) f_k(x_i), unit l2 norm

    // f_k(x) = (1/lambda_k) sum_j w_j K(x, x_j) f_k(x_j)
    double eigenfunction_at(int k, double x) const;
};

LeadingSpectrum leading_spectrum(const KernelOperator& op, int k_max);

// det(I - K) over indices {0..truncation-1} of an integer kernel shifted by
// `shift`; flags insufficient truncation via a trace-tail estimate.
struct DiscreteDet {
    double value = 1.0;
    double trace_tail = 0.0;
    bool truncation_warning = false;
};

using DiscreteKernel = std::function<double(long long, long long)>;

DiscreteDet discrete_fredholm_det(const DiscreteKernel& kernel, long long shift, int truncation);

// --- Airy kernel helpers -------------------------------------------------

// K_Ai(x, y) = (Ai(x)Ai'(y) - Ai(y)Ai'(x)) / (x - y), with the
// Christoffel-Darboux diagonal Ai'(x)^2 - x Ai(x)^2 and a series branch
// near the diagonal.
double airy_kernel(double x, double y);

// Default half-line truncation for the shifted Airy kernel on L2(R+).
double airy_cutoff(double s);

// Grid for the shifted Airy kernel, resolving the oscillatory region.
QuadGrid airy_grid(double s, double nodes_per_unit = 10.0);

// Hankel matrix B[i][j] = sqrt(w_i w_j) Ai(x_i + x_j + s) on a grid.
Eigen::MatrixXd airy_hankel_matrix(const QuadGrid& grid, double s);

// Shifted Airy kernel operator K_{Ai_s} on L2(R+) (truncated derived grid).
KernelOperator airy_kernel_operator(double s);

}  // namespace maxindep
