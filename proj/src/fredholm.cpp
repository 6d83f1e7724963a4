#include "maxindep/fredholm.hpp"

#include <cmath>
#include <stdexcept>

#include "maxindep/specfun.hpp"

namespace maxindep {

void KernelOperator::check_symmetry(double tol) const {
    double scale = std::max(1.0, matrix.cwiseAbs().maxCoeff());
    double asym = (matrix - matrix.transpose()).cwiseAbs().maxCoeff();
    if (asym > tol * scale) throw std::runtime_error("KernelOperator: matrix not symmetric");
}

KernelOperator discretize(const Kernel& kernel, QuadGrid grid) {
    grid.validate();
    const int n = grid.size();
    KernelOperator op;
    op.grid = std::move(grid);
    op.kernel = kernel;
    op.matrix.resize(n, n);
    std::vector<double> sw(n);
    for (int i = 0; i < n; ++i) sw[i] = std::sqrt(op.grid.weights[i]);
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            double v = kernel(op.grid.nodes[i], op.grid.nodes[j]);
            if (!std::isfinite(v)) {
                throw std::runtime_error("discretize: kernel not finite at nodes (" + std::to_string(i) +
                                         ", " + std::to_string(j) + ")");
            }
            op.matrix(i, j) = op.matrix(j, i) = sw[i] * sw[j] * v;
        }
    }
    return op;
}

double fredholm_det(const KernelOperator& op) {
    op.check_symmetry();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(op.matrix, Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    double rho = std::max(std::fabs(ev(0)), std::fabs(ev(ev.size() - 1)));
    if (rho >= 1.0) throw std::runtime_error("fredholm_det: spectral radius >= 1");
    // Product over the full eigenvalue set, so Lidskii checks are exact at
    // the discrete level.
    double logdet = 0.0;
    for (int i = 0; i < ev.size(); ++i) logdet += std::log1p(-ev(i));
    return std::exp(logdet);
}

LeadingSpectrum leading_spectrum(const KernelOperator& op, int k_max) {
    if (k_max > op.matrix.rows()) throw std::invalid_argument("leading_spectrum: k_max exceeds matrix size");
    op.check_symmetry();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(op.matrix);
    const int n = static_cast<int>(op.matrix.rows());
    LeadingSpectrum out;
    out.grid = op.grid;
    out.kernel = op.kernel;
    out.values.resize(k_max);
    out.vectors.resize(n, k_max);
    // Eigen returns increasing order; take the top k_max.
    for (int k = 0; k < k_max; ++k) {
        out.values[k] = es.eigenvalues()(n - 1 - k);
        out.vectors.col(k) = es.eigenvectors().col(n - 1 - k);
    }
    return out;
}

double LeadingSpectrum::eigenfunction_at(int k, double x) const {
    const int n = grid.size();
    double acc = 0.0;
    for (int j = 0; j < n; ++j) {
        double fj = vectors(j, k) / std::sqrt(grid.weights[j]);
        acc += grid.weights[j] * kernel(x, grid.nodes[j]) * fj;
    }
    return acc / values[k];
}

DiscreteDet discrete_fredholm_det(const DiscreteKernel& kernel, long long shift, int truncation) {
    DiscreteDet out;
    Eigen::MatrixXd m(truncation, truncation);
    for (int i = 0; i < truncation; ++i)
        for (int j = i; j < truncation; ++j) m(i, j) = m(j, i) = kernel(shift + i, shift + j);
    // Trace-tail estimate over the next block of indices.
    double tail = 0.0;
    for (int i = truncation; i < truncation + 24; ++i) tail += kernel(shift + i, shift + i);
    out.trace_tail = tail;
    out.truncation_warning = std::fabs(tail) > 1e-12;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
    double logdet = 0.0;
    for (int i = 0; i < truncation; ++i) {
        double lam = es.eigenvalues()(i);
        if (lam >= 1.0) throw std::runtime_error("discrete_fredholm_det: eigenvalue >= 1");
        logdet += std::log1p(-lam);
    }
    out.value = std::exp(logdet);
    return out;
}

double airy_kernel(double x, double y) {
    using specfun::airy_ai;
    const double d = 0.5 * (x - y);
    if (std::fabs(d) > 2.5e-3) {
        auto ax = airy_ai(x);
        auto ay = airy_ai(y);
        return (ax.value * ay.derivative - ay.value * ax.derivative) / (x - y);
    }
    // Near-diagonal series around the midpoint: K = (u1^2 - u0 u2)
    //   + d^2 (-u0 u4 / 6 + 2 u1 u3 / 3 - u2^2 / 2) + O(d^4),
    // with u2 = m u0, u3 = u0 + m u1, u4 = 2 u1 + m^2 u0.
    const double m = 0.5 * (x + y);
    auto a = airy_ai(m);
    const double u0 = a.value, u1 = a.derivative;
    const double u2 = m * u0;
    const double u3 = u0 + m * u1;
    const double u4 = 2.0 * u1 + m * m * u0;
    double lead = u1 * u1 - u0 * u2;
    double corr = -u0 * u4 / 6.0 + 2.0 * u1 * u3 / 3.0 - 0.5 * u2 * u2;
    return lead + d * d * corr;
}

double airy_cutoff(double s) { return std::max(20.0, s + 20.0) - std::min(0.0, s); }

QuadGrid airy_grid(double s, double nodes_per_unit) {
    // Kernel arguments run over [s, s + L]; the oscillation wavelength near
    // the left end is ~ 2*pi/sqrt(|s|), so scale the panel density with s.
    double L = airy_cutoff(s);
    double osc = std::sqrt(std::max(1.0, -s));
    int per_panel = 12;
    double width = std::min(2.0, per_panel / (nodes_per_unit * osc) * 2.0);
    return composite_gauss_legendre(0.0, L, width, per_panel);
}

Eigen::MatrixXd airy_hankel_matrix(const QuadGrid& grid, double s) {
    const int n = grid.size();
    Eigen::MatrixXd b(n, n);
    std::vector<double> sw(n);
    for (int i = 0; i < n; ++i) sw[i] = std::sqrt(grid.weights[i]);
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            double v = specfun::airy_ai(grid.nodes[i] + grid.nodes[j] + s).value;
            b(i, j) = b(j, i) = sw[i] * sw[j] * v;
        }
    }
    return b;
}

KernelOperator airy_kernel_operator(double s) {
    QuadGrid grid = airy_grid(s);
    return discretize([s](double x, double y) { return airy_kernel(x + s, y + s); }, std::move(grid));
}

}  // namespace maxindep
