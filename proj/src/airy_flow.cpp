#include "maxindep/airy_flow.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "maxindep/specfun.hpp"

namespace maxindep::airy_flow {

namespace {

using specfun::airy_ai;

// Fixed grid for the Airy flow: fine where the kernel oscillates.
QuadGrid airy_flow_grid() {
    QuadGrid a = composite_gauss_legendre(0.0, 12.0, 1.0, 12);
    QuadGrid b = composite_gauss_legendre(12.0, 28.0, 2.0, 12);
    a.upper = b.upper;
    a.nodes.insert(a.nodes.end(), b.nodes.begin(), b.nodes.end());
    a.weights.insert(a.weights.end(), b.weights.begin(), b.weights.end());
    return a;
}

QuadGrid kpz_flow_grid(const KpzParams& p) {
    double U = std::min(46.0, 18.0 / p.gamma + 6.0);
    double mid = std::max(-U + 1.0, -8.0 / p.gamma);
    std::vector<std::pair<std::pair<double, double>, double>> segs;
    if (mid > -U + 1e-9) segs.push_back({{-U, mid}, 2.0});
    segs.push_back({{mid, 10.0}, 1.0});
    segs.push_back({{10.0, 24.0}, 2.0});
    QuadGrid g;
    g.lower = -U;
    g.upper = 24.0;
    for (auto& [ab, w] : segs) {
        QuadGrid part = composite_gauss_legendre(ab.first, ab.second, w, 12);
        g.nodes.insert(g.nodes.end(), part.nodes.begin(), part.nodes.end());
        g.weights.insert(g.weights.end(), part.weights.begin(), part.weights.end());
    }
    return g;
}

struct EigenPointData {
    std::vector<double> lambda, nu, overlap, kpz_overlap, boundary;
    Eigen::MatrixXd vectors;  // columns, in the sqrt(w)-embedding
};

// Eigen data of the (possibly Fermi-multiplied) squared Hankel operator at
// one value of s.
EigenPointData eigen_point(const QuadGrid& grid, double s, const std::optional<KpzParams>& kpz,
                           int k_max) {
    const int n = grid.size();
    EigenPointData out;
    Eigen::VectorXd a(n);  // sqrt(w_i) Ai(x_i + s), possibly Fermi-weighted
    for (int i = 0; i < n; ++i)
        a(i) = std::sqrt(grid.weights[i]) * airy_ai(grid.nodes[i] + s).value;

    if (!kpz) {
        Eigen::MatrixXd b = airy_hankel_matrix(grid, s);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(b);
        std::vector<int> idx(n);
        std::iota(idx.begin(), idx.end(), 0);
        std::sort(idx.begin(), idx.end(), [&](int i, int j) {
            return std::fabs(es.eigenvalues()(i)) > std::fabs(es.eigenvalues()(j));
        });
        out.vectors.resize(n, k_max);
        for (int k = 0; k < k_max; ++k) {
            double nu = es.eigenvalues()(idx[k]);
            out.nu.push_back(nu);
            out.lambda.push_back(nu * nu);
            out.vectors.col(k) = es.eigenvectors().col(idx[k]);
            out.overlap.push_back(a.dot(out.vectors.col(k)));
        }
        // boundary values Psi_k(0) by Nystrom interpolation of the squared kernel
        Eigen::VectorXd k0(n);
        for (int j = 0; j < n; ++j)
            k0(j) = std::sqrt(grid.weights[j]) * airy_kernel(s, grid.nodes[j] + s);
        for (int k = 0; k < k_max; ++k)
            out.boundary.push_back(k0.dot(out.vectors.col(k)) / out.lambda[k]);
    } else {
        // M_f H(Ai_s)^2 M_f: the squared-Hankel kernel is K_Ai(x+s, y+s)
        // (inner integral over R+), not the grid-restricted square of B
        Eigen::MatrixXd c(n, n);
        std::vector<double> f(n), sw(n);
        for (int i = 0; i < n; ++i) {
            f[i] = kpz->fermi(grid.nodes[i]);
            sw[i] = std::sqrt(grid.weights[i]);
        }
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j)
                c(i, j) = c(j, i) =
                    sw[i] * sw[j] * f[i] * f[j] * airy_kernel(grid.nodes[i] + s, grid.nodes[j] + s);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c);
        Eigen::VectorXd fa(n);
        for (int i = 0; i < n; ++i) fa(i) = f[i] * a(i);
        out.vectors.resize(n, k_max);
        for (int k = 0; k < k_max; ++k) {
            out.lambda.push_back(es.eigenvalues()(n - 1 - k));
            out.vectors.col(k) = es.eigenvectors().col(n - 1 - k);
            out.kpz_overlap.push_back(fa.dot(out.vectors.col(k)));
        }
    }
    return out;
}

void parallel_for(int count, const std::function<void(int)>& body) {
    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < hw; ++t) {
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) body(i);
        });
    }
    for (auto& th : pool) th.join();
}

// int_c^inf (x - s) Ai(x)^2 dx
double airy_sq_weighted_tail(double c, double s) {
    auto g = composite_gauss_legendre(c, c + 30.0, 1.0, 16);
    return g.integrate([&](double x) {
        double a = airy_ai(x).value;
        return (x - s) * a * a;
    });
}

}  // namespace

KpzParams::KpzParams(double time) : t(time), gamma(std::cbrt(time / 2.0)) {
    if (!(time > 0.0)) throw std::domain_error("KpzParams: t must be positive");
}

double KpzParams::fermi(double x) const { return 1.0 / std::sqrt(1.0 + std::exp(-gamma * x)); }

int EigenFlow::index_of(double s) const {
    auto it = std::lower_bound(s_grid.begin(), s_grid.end(), s - 1e-9);
    if (it == s_grid.end() || std::fabs(*it - s) > 1e-6)
        throw std::invalid_argument("EigenFlow: s not on the flow grid");
    return static_cast<int>(it - s_grid.begin());
}

std::vector<double> uniform_grid(double lo, double hi, double step) {
    std::vector<double> g;
    int n = static_cast<int>(std::round((hi - lo) / step));
    for (int i = 0; i <= n; ++i) g.push_back(lo + i * step);
    return g;
}

EigenFlow build_eigenflow(const std::vector<double>& s_grid, int k_max, std::optional<KpzParams> kpz) {
    if (s_grid.size() < 2) throw std::invalid_argument("build_eigenflow: need at least two s values");
    EigenFlow flow;
    flow.s_grid = s_grid;
    flow.k_max = k_max;
    flow.kpz = kpz;
    flow.grid = kpz ? kpz_flow_grid(*kpz) : airy_flow_grid();

    const int m = static_cast<int>(s_grid.size());
    std::vector<EigenPointData> pts(m);
    parallel_for(m, [&](int i) { pts[i] = eigen_point(flow.grid, s_grid[i], kpz, k_max); });

    // sequential sign alignment and pairing check
    for (int i = 1; i < m; ++i) {
        for (int k = 0; k < k_max; ++k) {
            double dot = pts[i - 1].vectors.col(k).dot(pts[i].vectors.col(k));
            if (dot < 0.0) {
                pts[i].vectors.col(k) *= -1.0;
                if (!pts[i].overlap.empty()) pts[i].overlap[k] *= -1.0;
                if (!pts[i].kpz_overlap.empty()) pts[i].kpz_overlap[k] *= -1.0;
                if (!pts[i].boundary.empty()) pts[i].boundary[k] *= -1.0;
                if (!pts[i].nu.empty()) {
                    // sign of nu is intrinsic; only the vector flips
                }
            }
        }
        // pairing heuristic: eigenvalues must move less than half the gap
        for (int k = 0; k + 1 < k_max; ++k) {
            double lam = pts[i].lambda[k];
            if (lam < 1e-10) break;
            double move = std::fabs(lam - pts[i - 1].lambda[k]);
            double gap = pts[i - 1].lambda[k] - pts[i - 1].lambda[k + 1];
            if (gap > 1e-9 && move > 0.75 * gap) {
                throw std::runtime_error("build_eigenflow: eigenvalue crossing ambiguity on [" +
                                         std::to_string(s_grid[i - 1]) + ", " + std::to_string(s_grid[i]) +
                                         "]");
            }
        }
    }

    flow.lambda.resize(m);
    flow.nu.resize(m);
    flow.overlap.resize(m);
    flow.kpz_overlap.resize(m);
    flow.boundary.resize(m);
    for (int i = 0; i < m; ++i) {
        flow.lambda[i] = std::move(pts[i].lambda);
        flow.nu[i] = std::move(pts[i].nu);
        flow.overlap[i] = std::move(pts[i].overlap);
        flow.kpz_overlap[i] = std::move(pts[i].kpz_overlap);
        flow.boundary[i] = std::move(pts[i].boundary);
    }
    return flow;
}

namespace {

TabulatedLaw law_from_density(const EigenFlow& flow, int k, const std::vector<std::vector<double>>& ovl) {
    const int m = static_cast<int>(flow.s_grid.size());
    TabulatedLaw law;
    law.grid = flow.s_grid;
    law.pdf.resize(m);
    for (int i = 0; i < m; ++i) law.pdf[i] = ovl[i][k] * ovl[i][k];
    double anchor = 1.0 - flow.lambda.front()[k];
    law.cdf = cumulative_integral(law.grid, law.pdf, anchor);
    law.mass_below_window = anchor;
    law.total_mass = law.cdf.back() + flow.lambda.back()[k];
    if (std::fabs(law.total_mass - 1.0) > 1e-4)
        throw std::runtime_error("law coverage error: total mass " + std::to_string(law.total_mass));
    return law;
}

}  // namespace

TabulatedLaw law_zk_prime(const EigenFlow& flow, int k) {
    if (flow.kpz) throw std::invalid_argument("law_zk_prime: flow carries a KPZ multiplier");
    if (k < 1 || k > flow.k_max) throw std::invalid_argument("law_zk_prime: k out of range");
    return law_from_density(flow, k - 1, flow.overlap);
}

TabulatedLaw law_zk_ter(const EigenFlow& flow, int k) {
    if (flow.kpz) throw std::invalid_argument("law_zk_ter: flow carries a KPZ multiplier");
    if (k < 1 || k > flow.k_max) throw std::invalid_argument("law_zk_ter: k out of range");
    const int m = static_cast<int>(flow.s_grid.size());
    const int kk = k - 1;
    std::vector<double> b2(m);
    for (int i = 0; i < m; ++i) b2[i] = flow.boundary[i][kk] * flow.boundary[i][kk];
    auto cum = cumulative_integral(flow.s_grid, b2, 0.0);
    // survival(s) = exp(-int_{-inf}^s Psi(0)^2), anchored by the
    // varying-interval identity lambda_k(s0) = survival(s0)
    double anchor = flow.lambda.front()[kk];
    TabulatedLaw law;
    law.grid = flow.s_grid;
    law.cdf.resize(m);
    law.pdf.resize(m);
    for (int i = 0; i < m; ++i) {
        double survival = anchor * std::exp(-cum[i]);
        law.cdf[i] = 1.0 - survival;
        law.pdf[i] = survival * b2[i];
    }
    law.mass_below_window = law.cdf.front();
    law.total_mass = law.cdf.back() + anchor * std::exp(-cum.back());
    return law;
}

double hankel_power_norm(double s, int ell) {
    static const QuadGrid grid = airy_flow_grid();
    Eigen::MatrixXd b = airy_hankel_matrix(grid, s);
    Eigen::VectorXd v(grid.size());
    for (int i = 0; i < grid.size(); ++i)
        v(i) = std::sqrt(grid.weights[i]) * airy_ai(grid.nodes[i] + s).value;
    for (int j = 0; j < ell; ++j) v = b * v;
    return v.squaredNorm();
}

std::vector<TabulatedLaw> law_zk_norm_family(int ell_max, const std::vector<double>& s_grid);

TabulatedLaw law_zk_norm(int ell, const std::vector<double>& s_grid) {
    if (ell < 0 || ell > 12) throw std::invalid_argument("law_zk_norm: ell must be in [0, 12]");
    return law_zk_norm_family(ell, s_grid)[ell];
}

std::vector<TabulatedLaw> law_zk_norm_family(int ell_max, const std::vector<double>& s_grid) {
    const QuadGrid grid = airy_flow_grid();
    const int m = static_cast<int>(s_grid.size());
    std::vector<std::vector<double>> norms(ell_max + 1, std::vector<double>(m));
    parallel_for(m, [&](int i) {
        Eigen::MatrixXd b = airy_hankel_matrix(grid, s_grid[i]);
        Eigen::VectorXd v(grid.size());
        for (int j = 0; j < grid.size(); ++j)
            v(j) = std::sqrt(grid.weights[j]) * airy_ai(grid.nodes[j] + s_grid[i]).value;
        for (int ell = 0; ell <= ell_max; ++ell) {
            norms[ell][i] = v.squaredNorm();
            if (ell < ell_max) v = b * v;
        }
    });
    std::vector<TabulatedLaw> out(ell_max + 1);
    for (int ell = 0; ell <= ell_max; ++ell) {
        auto cum = cumulative_integral(s_grid, norms[ell], 0.0);
        // tail of the exponent past the right end of the grid
        double tail;
        double hi = s_grid.back();
        if (ell == 0) {
            tail = airy_sq_weighted_tail(hi, hi);
        } else {
            auto g = composite_gauss_legendre(hi, hi + 6.0, 1.5, 8);
            tail = g.integrate([&](double u) { return hankel_power_norm(u, ell); });
        }
        double total = cum.back() + tail;
        TabulatedLaw& law = out[ell];
        law.grid = s_grid;
        law.cdf.resize(m);
        law.pdf.resize(m);
        for (int i = 0; i < m; ++i) {
            law.cdf[i] = std::exp(-(total - cum[i]));
            law.pdf[i] = law.cdf[i] * norms[ell][i];
        }
        law.mass_below_window = law.cdf.front();
        law.total_mass = law.cdf.back();
    }
    return out;
}

KernelOperator kpz_kernel(double s, const KpzParams& params) {
    QuadGrid xg = composite_gauss_legendre(0.0, 20.0, 1.0, 12);
    // u-quadrature: Fermi-damped on the left, Airy-damped on the right
    double U = std::min(50.0, 34.0 / params.gamma + 4.0);
    QuadGrid ug = composite_gauss_legendre(-U - s, 24.0 - s, 0.5, 12);
    const int n = xg.size(), mu = ug.size();
    Eigen::MatrixXd a(mu, n);
    for (int u = 0; u < mu; ++u)
        for (int i = 0; i < n; ++i) a(u, i) = airy_ai(xg.nodes[i] + s + ug.nodes[u]).value;
    Eigen::VectorXd w(mu);
    for (int u = 0; u < mu; ++u)
        w(u) = ug.weights[u] * KpzParams::fermi_factor_cdf(params.gamma * ug.nodes[u]);
    Eigen::MatrixXd kernel_vals = a.transpose() * w.asDiagonal() * a;

    KernelOperator op;
    op.grid = xg;
    op.kernel = nullptr;  // entries precomputed; Nystrom interpolation unused here
    op.matrix.resize(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            op.matrix(i, j) = std::sqrt(xg.weights[i] * xg.weights[j]) * kernel_vals(i, j);
    return op;
}

KernelOperator kpz_kernel_symmetrized(double s, const KpzParams& params) {
    QuadGrid grid = kpz_flow_grid(params);
    return discretize(
        [s, params](double x, double y) {
            return params.fermi(x) * airy_kernel(x + s, y + s) * params.fermi(y);
        },
        std::move(grid));
}

double kpz_randomized_airy_entry(double x, double y, double s, const KpzParams& params) {
    // logistic density of R; 64-point Gauss panels over the effective support
    auto g = composite_gauss_legendre(-42.0, 42.0, 1.3125, 64);
    return g.integrate([&](double r) {
        double rho = 0.25 / std::pow(std::cosh(0.5 * r), 2);
        return rho * airy_kernel(x + s + r / params.gamma, y + s + r / params.gamma);
    });
}

std::vector<TabulatedLaw> kpz_max_laws(const KpzParams& params, const std::vector<double>& s_grid,
                                       int k_max) {
    EigenFlow flow = build_eigenflow(s_grid, k_max, params);
    std::vector<TabulatedLaw> out;
    for (int k = 0; k < k_max; ++k) out.push_back(law_from_density(flow, k, flow.kpz_overlap));
    return out;
}

double hankel_det(double s, int sign) {
    QuadGrid grid = airy_grid(s);
    Eigen::MatrixXd b = airy_hankel_matrix(grid, s);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(b, Eigen::EigenvaluesOnly);
    double logdet = 0.0;
    for (int i = 0; i < b.rows(); ++i) {
        double v = sign * es.eigenvalues()(i);
        if (v >= 1.0) throw std::runtime_error("hankel_det: eigenvalue >= 1");
        logdet += std::log1p(-v);
    }
    return std::exp(logdet);
}

double tw1_cdf(double s, Tw1Route route, const painleve::HastingsMcleod& q) {
    if (route == Tw1Route::ferrari_spohn) return hankel_det(s, +1);
    double f2 = painleve::tw2_cdf_classical(q, s);
    return std::sqrt(f2 * std::exp(-q.integral_tail(s)));
}

QLaws law_q_and_qk(const std::vector<double>& s_grid, int k_max, const painleve::HastingsMcleod& q) {
    EigenFlow flow = build_eigenflow(s_grid, k_max);
    QLaws out;
    out.s_grid = s_grid;
    const int m = static_cast<int>(s_grid.size());

    // F_Q(s) = exp(-int_s^inf q), increasing to 1: the cdf itself
    out.q_law.grid = s_grid;
    out.q_law.cdf.resize(m);
    out.q_law.pdf.resize(m);
    for (int i = 0; i < m; ++i) {
        double s = s_grid[i];
        out.q_law.cdf[i] = std::exp(-q.integral_tail(s));
        double qs = (s <= q.L_plus) ? q.at(s) : airy_ai(s).value;
        out.q_law.pdf[i] = out.q_law.cdf[i] * qs;
    }
    out.q_law.mass_below_window = out.q_law.cdf.front();
    out.q_law.total_mass = out.q_law.cdf.back();

    // mu_k(s) = 2 nu_k / (1 + nu_k): survival functions for positive modes
    out.product_all.assign(m, 1.0);
    for (int k = 0; k < k_max; ++k) {
        bool positive = true;
        for (int i = 0; i < m; ++i)
            if (flow.nu[i][k] <= 0.0) positive = false;
        for (int i = 0; i < m; ++i) {
            double nu = flow.nu[i][k];
            out.product_all[i] *= (1.0 - nu) / (1.0 + nu);
        }
        if (!positive) {
            ++out.negative_modes;
            continue;
        }
        TabulatedLaw law;
        law.grid = s_grid;
        law.cdf.resize(m);
        for (int i = 0; i < m; ++i) {
            double nu = flow.nu[i][k];
            law.cdf[i] = 1.0 - 2.0 * nu / (1.0 + nu);
        }
        law.mass_below_window = law.cdf.front();
        law.total_mass = law.cdf.back();
        out.qk.push_back(std::move(law));
    }
    return out;
}

// --- commuting operator -----------------------------------------------

namespace {

// multiplication-by-y matrix in the orthonormal Laguerre-function basis
Eigen::MatrixXd laguerre_y_matrix(int n) {
    Eigen::MatrixXd y = Eigen::MatrixXd::Zero(n, n);
    for (int k = 0; k < n; ++k) {
        y(k, k) = 2.0 * k + 1.0;
        if (k + 1 < n) y(k, k + 1) = y(k + 1, k) = -(k + 1.0);
    }
    return y;
}

// L_{TW,s} = alpha (-diag(n+1/2) + Y/4) - (Y/alpha)^2 - s Y/alpha
Eigen::MatrixXd commuting_matrix(double s, int n, double alpha) {
    Eigen::MatrixXd y = laguerre_y_matrix(n);
    Eigen::MatrixXd m = -(y * y) / (alpha * alpha) - (s / alpha) * y + (alpha / 4.0) * y;
    for (int k = 0; k < n; ++k) m(k, k) -= alpha * (k + 0.5);
    return m;
}

// phi_n(x) = sqrt(alpha) L_n(alpha x) e^{-alpha x/2} for n < count
std::vector<double> laguerre_functions_at(double x, double alpha, int count) {
    std::vector<double> out(count);
    double y = alpha * x;
    double e = std::exp(-0.5 * y) * std::sqrt(alpha);
    double l0 = 1.0, l1 = 1.0 - y;
    out[0] = e * l0;
    if (count > 1) out[1] = e * l1;
    for (int k = 2; k < count; ++k) {
        double l2 = ((2.0 * k - 1.0 - y) * l1 - (k - 1.0) * l0) / k;
        out[k] = e * l2;
        l0 = l1;
        l1 = l2;
    }
    return out;
}

}  // namespace

CommutingSpectrum commuting_operator_spectrum(double s, int k_max, int basis_size, double alpha) {
    Eigen::MatrixXd m = commuting_matrix(s, basis_size, alpha);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    CommutingSpectrum out;
    out.s = s;
    out.alpha = alpha;
    out.basis_size = basis_size;
    out.coeffs.resize(basis_size, k_max);
    for (int k = 0; k < k_max; ++k) {
        out.values.push_back(es.eigenvalues()(basis_size - 1 - k));
        out.coeffs.col(k) = es.eigenvectors().col(basis_size - 1 - k);
    }
    return out;
}

double CommutingSpectrum::eigenfunction_at(int k, double x) const {
    auto phi = laguerre_functions_at(x, alpha, basis_size);
    double acc = 0.0;
    for (int n = 0; n < basis_size; ++n) acc += coeffs(n, k) * phi[n];
    return acc;
}

double commutation_residual(double s, int basis_size, double alpha) {
    Eigen::MatrixXd l = commuting_matrix(s, basis_size, alpha);
    // kernel operator in the same basis; the quadrature must resolve the
    // fastest Laguerre oscillation of the basis
    QuadGrid grid = composite_gauss_legendre(0.0, 30.0, 0.2, 10);
    const int n = grid.size();
    Eigen::MatrixXd p(n, basis_size);
    for (int i = 0; i < n; ++i) {
        auto phi = laguerre_functions_at(grid.nodes[i], alpha, basis_size);
        for (int b = 0; b < basis_size; ++b) p(i, b) = phi[b] * std::sqrt(grid.weights[i]);
    }
    Eigen::MatrixXd kmat(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            kmat(i, j) = std::sqrt(grid.weights[i] * grid.weights[j]) *
                         airy_kernel(grid.nodes[i] + s, grid.nodes[j] + s);
    Eigen::MatrixXd kb = p.transpose() * kmat * p;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(kb);
    Eigen::VectorXd v = es.eigenvectors().col(basis_size - 1);
    Eigen::VectorXd c = l * (kb * v) - kb * (l * v);
    return c.norm() / v.norm();
}

// --- prolate ------------------------------------------------------------

namespace {

// orthonormal Jacobi (alpha = N, beta = 0) recurrence on [-1, 1]:
// u p_k = a_{k+1} p_{k+1} + b_k p_k + a_k p_{k-1}
double jacobi_b(int N, int k) {
    double s = 2.0 * k + N;
    return -static_cast<double>(N) * N / (s * (s + 2.0));
}

double jacobi_a(int N, int k) {  // k >= 1
    double s = 2.0 * k + N;
    return 2.0 * k * (k + N) / (s * std::sqrt((s + 1.0) * (s - 1.0)));
}

}  // namespace

Eigen::MatrixXd zernike_x2_gram(int N, int size) {
    // T_j(x) = tau_j x^{N+1/2} P_j^{(N,0)}(1 - 2x^2); Gram of x^2 by quadrature
    auto grid = composite_gauss_legendre(0.0, 1.0, 0.02, 12);
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(size, size);
    std::vector<double> pj(size);
    for (int i = 0; i < grid.size(); ++i) {
        double x = grid.nodes[i];
        double u = 1.0 - 2.0 * x * x;
        // Jacobi recurrence for P_k^{(N,0)}(u)
        pj[0] = 1.0;
        if (size > 1) pj[1] = 0.5 * (N + (N + 2.0) * u);  // P_1^{(N,0)}(u) = ((N+2)u + N)/2
        for (int k = 2; k < size; ++k) {
            double a = 2.0 * k * (k + N) * (2.0 * k + N - 2.0);
            double b = (2.0 * k + N - 1.0) * (N * N + u * (2.0 * k + N) * (2.0 * k + N - 2.0));
            double c = 2.0 * (k + N - 1.0) * (k - 1.0) * (2.0 * k + N);
            pj[k] = (b * pj[k - 1] - c * pj[k - 2]) / a;
        }
        double xp = std::pow(x, N + 0.5);
        double wx2 = grid.weights[i] * x * x;
        for (int j = 0; j < size; ++j) {
            double tj = std::sqrt(2.0 * (2.0 * j + N + 1.0)) * xp * pj[j];
            for (int k = j; k < size; ++k) {
                double tk = std::sqrt(2.0 * (2.0 * k + N + 1.0)) * xp * pj[k];
                g(j, k) += wx2 * tj * tk;
            }
        }
    }
    for (int j = 0; j < size; ++j)
        for (int k = 0; k < j; ++k) g(j, k) = g(k, j);
    return g;
}

ProlateFlow prolate_flow(int N, double c, int k_max, int basis_size) {
    if (N < 1 || c < 0.0) throw std::domain_error("prolate_flow: need N >= 1, c >= 0");
    ProlateFlow out;
    out.N = N;
    out.c = c;
    // x^2 = (1 - U)/2 with U the orthonormal Jacobi matrix; PHO_{N,c} =
    // diag(-kappa_k) + c^2 (1 - x^2)
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(basis_size, basis_size);
    for (int k = 0; k < basis_size; ++k) {
        double x2kk = 0.5 * (1.0 - jacobi_b(N, k));
        m(k, k) = -ProlateFlow::kappa(N, k) + c * c * (1.0 - x2kk);
        if (k + 1 < basis_size) {
            double x2off = 0.5 * (0.0 - jacobi_a(N, k + 1));
            m(k, k + 1) = m(k + 1, k) = -c * c * x2off;
        }
    }
    out.matrix = m;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
    for (int k = 0; k < k_max; ++k) out.values.push_back(es.eigenvalues()(basis_size - 1 - k));
    return out;
}

double prolate_kernel_scaled(int N, double s, double X, double Y) {
    double x = 1.0 - 0.5 * X * std::pow(N, -2.0 / 3.0);
    double y = 1.0 - 0.5 * Y * std::pow(N, -2.0 / 3.0);
    double c = 2.0 * N - s * std::cbrt(static_cast<double>(N));
    double arg = c * x * y;
    double j = specfun::bessel_j(2.0 * N, arg);
    return std::pow(N, -1.0 / 6.0) / std::sqrt(2.0) * std::sqrt(arg) * j;
}

// --- Fuchs residuals ------------------------------------------------------

double fixed_fuchs_residual(double s, int k, const std::optional<KpzParams>& kpz) {
    const double h = 1e-3;
    QuadGrid grid = kpz ? kpz_flow_grid(*kpz) : airy_flow_grid();
    auto lo = eigen_point(grid, s - h, kpz, k);
    auto mid = eigen_point(grid, s, kpz, k);
    auto hi = eigen_point(grid, s + h, kpz, k);
    double fd = (hi.lambda[k - 1] - lo.lambda[k - 1]) / (2.0 * h);
    double ov = kpz ? mid.kpz_overlap[k - 1] : mid.overlap[k - 1];
    return std::fabs(fd + ov * ov) / std::max(std::fabs(fd), 1e-300);
}

double varying_fuchs_residual(double s, int k) {
    const double h = 1e-3;
    QuadGrid grid = airy_flow_grid();
    auto lo = eigen_point(grid, s - h, std::nullopt, k);
    auto mid = eigen_point(grid, s, std::nullopt, k);
    auto hi = eigen_point(grid, s + h, std::nullopt, k);
    double fd = (hi.lambda[k - 1] - lo.lambda[k - 1]) / (2.0 * h);
    double rhs = -mid.lambda[k - 1] * mid.boundary[k - 1] * mid.boundary[k - 1];
    return std::fabs(fd - rhs) / std::max(std::fabs(fd), 1e-300);
}

namespace {

// translated KPZ kernel on L2([s, s+L]): Ktilde(x, y; s) =
// int_{R+} Ai(x+u) Ai(y+u) f_t(u-s)^2 du, and its s-derivative.
struct TranslatedKpz {
    QuadGrid xg;          // grid on [s0, s0+L], reused for nearby s
    Eigen::MatrixXd a;    // Ai(x_i + u_j)
    QuadGrid ug;

    TranslatedKpz(double s0, const KpzParams&) {
        double L = 26.0;
        xg = composite_gauss_legendre(s0, s0 + L, 0.8, 12);
        ug = composite_gauss_legendre(0.0, 40.0 + std::max(0.0, -s0), 0.8, 12);
        a.resize(xg.size(), ug.size());
        for (int i = 0; i < xg.size(); ++i)
            for (int j = 0; j < ug.size(); ++j)
                a(i, j) = airy_ai(xg.nodes[i] + ug.nodes[j]).value;
    }

    Eigen::MatrixXd kernel(double s, const KpzParams& p) const {
        Eigen::VectorXd w(ug.size());
        for (int j = 0; j < ug.size(); ++j) {
            double f = p.fermi(ug.nodes[j] - s);
            w(j) = ug.weights[j] * f * f;
        }
        return a * w.asDiagonal() * a.transpose();
    }

    Eigen::MatrixXd kernel_sderiv(double s, const KpzParams& p) const {
        Eigen::VectorXd w(ug.size());
        for (int j = 0; j < ug.size(); ++j) {
            double v = ug.nodes[j] - s;
            double e = std::exp(-p.gamma * v);
            // d/ds f^2(u - s) = -gamma e^{-gamma v} / (1 + e^{-gamma v})^2
            w(j) = -ug.weights[j] * p.gamma * e / std::pow(1.0 + e, 2);
        }
        return a * w.asDiagonal() * a.transpose();
    }
};

}  // namespace

double mixed_fuchs_residual(double s, const KpzParams& params, int k) {
    const double h = 1e-3;
    TranslatedKpz tk(s, params);
    const int n = tk.xg.size();
    Eigen::VectorXd sw(n);
    for (int i = 0; i < n; ++i) sw(i) = std::sqrt(tk.xg.weights[i]);

    // both the kernel and the interval [ss, ss+L] move with ss
    auto eigs = [&](double ss) {
        TranslatedKpz local(ss, params);
        Eigen::MatrixXd kv = local.kernel(ss, params);
        Eigen::VectorXd lw(n);
        for (int i = 0; i < n; ++i) lw(i) = std::sqrt(local.xg.weights[i]);
        Eigen::MatrixXd m = lw.asDiagonal() * kv * lw.asDiagonal();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
        return es;
    };
    auto lo = eigs(s - h);
    auto mid = eigs(s);
    auto hi = eigs(s + h);
    double lam = mid.eigenvalues()(n - k);
    double fd = (hi.eigenvalues()(n - k) - lo.eigenvalues()(n - k)) / (2.0 * h);
    Eigen::VectorXd v = mid.eigenvectors().col(n - k);
    // g(s) by Nystrom interpolation at the left edge: the kernel row at
    // x = s is K(s, x_j) = int Ai(s+u) Ai(x_j+u) f_t(u-s)^2 du
    Eigen::VectorXd ai_s(tk.ug.size());
    for (int j = 0; j < tk.ug.size(); ++j) ai_s(j) = airy_ai(s + tk.ug.nodes[j]).value;
    double gs = 0.0;
    for (int j = 0; j < n; ++j) {
        double row = 0.0;
        for (int u = 0; u < tk.ug.size(); ++u) {
            double f = params.fermi(tk.ug.nodes[u] - s);
            row += tk.ug.weights[u] * f * f * ai_s(u) * tk.a(j, u);
        }
        gs += std::sqrt(tk.xg.weights[j]) * row * v(j);
    }
    gs /= lam;
    Eigen::MatrixXd dk = tk.kernel_sderiv(s, params);
    Eigen::MatrixXd dm = sw.asDiagonal() * dk * sw.asDiagonal();
    double corr = v.dot(dm * v);
    double rhs = -lam * gs * gs + corr;
    return std::fabs(fd - rhs) / std::max(std::fabs(fd), 1e-300);
}

}  // namespace maxindep::airy_flow
