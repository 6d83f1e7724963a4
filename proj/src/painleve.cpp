#include "maxindep/painleve.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <stdexcept>

#include "maxindep/quadrature.hpp"
#include "maxindep/tabulated_law.hpp"
#include "maxindep/specfun.hpp"

namespace maxindep::painleve {

namespace {

std::vector<double> cheb_nodes(double a, double b, int n) {
    std::vector<double> x(n + 1);
    double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (int j = 0; j <= n; ++j) x[j] = mid - half * std::cos(M_PI * j / n);
    x.front() = a;
    x.back() = b;
    return x;
}

std::vector<double> bary_weights(int n) {
    std::vector<double> w(n + 1);
    for (int j = 0; j <= n; ++j) {
        w[j] = (j % 2 == 0) ? 1.0 : -1.0;
        if (j == 0 || j == n) w[j] *= 0.5;
    }
    return w;
}

Eigen::MatrixXd diff_matrix(const std::vector<double>& x) {
    const int m = static_cast<int>(x.size());
    auto w = bary_weights(m - 1);
    Eigen::MatrixXd d(m, m);
    for (int i = 0; i < m; ++i) {
        double row = 0.0;
        for (int j = 0; j < m; ++j) {
            if (i == j) continue;
            d(i, j) = (w[j] / w[i]) / (x[i] - x[j]);
            row += d(i, j);
        }
        d(i, i) = -row;
    }
    return d;
}

double bary_eval(const std::vector<double>& x, const std::vector<double>& f, double t) {
    const int m = static_cast<int>(x.size());
    auto w = bary_weights(m - 1);
    double num = 0.0, den = 0.0;
    for (int j = 0; j < m; ++j) {
        double diff = t - x[j];
        if (diff == 0.0) return f[j];
        double c = w[j] / diff;
        num += c * f[j];
        den += c;
    }
    return num / den;
}

struct Panels {
    std::vector<double> breaks;
    std::vector<std::vector<double>> nodes;
    std::vector<Eigen::MatrixXd> D, D2;
    int n = 0;  // degree

    int count() const { return static_cast<int>(nodes.size()); }
};

Panels make_panels(double a, double b, double width, int degree) {
    Panels p;
    p.n = degree;
    int K = std::max(1, static_cast<int>(std::ceil((b - a) / width)));
    double w = (b - a) / K;
    p.breaks.resize(K + 1);
    for (int k = 0; k <= K; ++k) p.breaks[k] = a + k * w;
    p.breaks.back() = b;
    for (int k = 0; k < K; ++k) {
        p.nodes.push_back(cheb_nodes(p.breaks[k], p.breaks[k + 1], degree));
        p.D.push_back(diff_matrix(p.nodes.back()));
        p.D2.push_back(p.D.back() * p.D.back());
    }
    return p;
}

PiecewiseChebFn make_fn(const Panels& p, const std::vector<std::vector<double>>& vals) {
    PiecewiseChebFn f;
    f.breaks = p.breaks;
    f.nodes = p.nodes;
    f.values = vals;
    return f;
}

// Damped Newton on a generic residual/Jacobian pair.  Converges to `tol`,
// but accepts a rounding-floor stall below `stall_tol` (spectral
// differentiation rows bottom out around ||D^2|| * eps * ||z||).
void newton_solve(Eigen::VectorXd& z,
                  const std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&, Eigen::MatrixXd&)>& sys,
                  double tol, int max_iter, const char* what, double stall_tol = 1e-6) {
    const int m = static_cast<int>(z.size());
    Eigen::VectorXd r(m), dz(m);
    Eigen::MatrixXd j(m, m);
    sys(z, r, j);
    double rn = r.norm();
    Eigen::VectorXd z_best = z;
    double best_inf = r.lpNorm<Eigen::Infinity>();
    for (int it = 0; it < max_iter; ++it) {
        if (r.lpNorm<Eigen::Infinity>() < tol) return;
        dz = j.partialPivLu().solve(-r);
        double step = 1.0;
        bool improved = false;
        for (int back = 0; back < 50; ++back) {
            Eigen::VectorXd zt = z + step * dz;
            Eigen::VectorXd rt(m);
            Eigen::MatrixXd jt(m, m);
            sys(zt, rt, jt);
            double rtn = rt.norm();
            if (rtn < rn * (1.0 - 1e-4 * step) || rt.lpNorm<Eigen::Infinity>() < tol) {
                z = zt;
                r = rt;
                j = jt;
                rn = rtn;
                improved = true;
                if (r.lpNorm<Eigen::Infinity>() < best_inf) {
                    best_inf = r.lpNorm<Eigen::Infinity>();
                    z_best = z;
                }
                break;
            }
            step *= 0.5;
        }
        if (!improved) break;
    }
    // polish near the floor: a few undamped steps, keeping the best iterate
    for (int it = 0; it < 6; ++it) {
        z = z_best;
        sys(z, r, j);
        dz = j.partialPivLu().solve(-r);
        z += dz;
        Eigen::VectorXd rt(m);
        Eigen::MatrixXd jt(m, m);
        sys(z, rt, jt);
        double inf = rt.lpNorm<Eigen::Infinity>();
        if (inf < best_inf) {
            best_inf = inf;
            z_best = z;
        } else {
            break;
        }
    }
    z = z_best;
    if (std::getenv("MAXINDEP_NEWTON_TRACE"))
        std::fprintf(stderr, "newton %s: final residual %.3e\n", what, best_inf);
    if (best_inf >= stall_tol)
        throw std::runtime_error(std::string(what) + ": Newton did not converge, residual " +
                                 std::to_string(best_inf));
}

// Third-order problems written as y' = u, u'' = f(t, y, u), with boundary
// rows: u(L-) = uL, first-integral F(L-) = 0, y(L+) = yR.  Imposing the
// first integral at a single node pins it globally (it is conserved by the
// differentiated equation), which keeps the algebraic residual at
// collocation level regardless of truncation error in the asymptotic
// boundary values.
struct ThirdOrderProblem {
    std::function<double(double, double, double)> f, fy, fu;
    // Extra scalar row G(t, y, u, u') = 0 evaluated at one node: either the
    // conserved first integral at the left end, or a layer-annihilating
    // combination at the right end.
    std::function<double(double, double, double, double)> F, Fy, Fu, Fup;
    bool extra_row_at_left = true;
    double uL = 0.0, yR = 0.0;
};

struct SystemSolution {
    std::vector<std::vector<double>> y, u, up, upp;
};

SystemSolution solve_third_order(const Panels& p, const ThirdOrderProblem& pr,
                                 const std::vector<std::vector<double>>& y0,
                                 const std::vector<std::vector<double>>& u0, double tol, int max_iter,
                                 const char* what) {
    const int K = p.count();
    const int m = p.n + 1;
    const int nv = K * m;
    auto iy = [&](int k, int j) { return k * m + j; };
    auto iu = [&](int k, int j) { return nv + k * m + j; };

    Eigen::VectorXd z(2 * nv);
    for (int k = 0; k < K; ++k)
        for (int j = 0; j < m; ++j) {
            z(iy(k, j)) = y0[k][j];
            z(iu(k, j)) = u0[k][j];
        }

    auto sys = [&](const Eigen::VectorXd& zz, Eigen::VectorXd& r, Eigen::MatrixXd& jac) {
        r.setZero(2 * nv);
        jac.setZero(2 * nv, 2 * nv);
        int row = 0;
        // y-rows: Dy - u = 0 at nodes 1..n of each panel
        for (int k = 0; k < K; ++k) {
            for (int j = 1; j < m; ++j) {
                double acc = 0.0;
                for (int l = 0; l < m; ++l) {
                    acc += p.D[k](j, l) * zz(iy(k, l));
                    jac(row, iy(k, l)) = p.D[k](j, l);
                }
                r(row) = acc - zz(iu(k, j));
                jac(row, iu(k, j)) -= 1.0;
                ++row;
            }
        }
        // y continuity
        for (int k = 0; k + 1 < K; ++k) {
            r(row) = zz(iy(k, m - 1)) - zz(iy(k + 1, 0));
            jac(row, iy(k, m - 1)) = 1.0;
            jac(row, iy(k + 1, 0)) = -1.0;
            ++row;
        }
        // extra scalar row at the left or right end node
        {
            int pk = pr.extra_row_at_left ? 0 : K - 1;
            int pj = pr.extra_row_at_left ? 0 : m - 1;
            double t0 = p.nodes[pk][pj];
            double yv = zz(iy(pk, pj)), uv = zz(iu(pk, pj));
            double upv = 0.0;
            for (int l = 0; l < m; ++l) upv += p.D[pk](pj, l) * zz(iu(pk, l));
            r(row) = pr.F(t0, yv, uv, upv);
            jac(row, iy(pk, pj)) += pr.Fy(t0, yv, uv, upv);
            jac(row, iu(pk, pj)) += pr.Fu(t0, yv, uv, upv);
            double fup = pr.Fup(t0, yv, uv, upv);
            for (int l = 0; l < m; ++l) jac(row, iu(pk, l)) += fup * p.D[pk](pj, l);
            ++row;
        }
        // u-rows: D2 u - f = 0 at interior nodes
        for (int k = 0; k < K; ++k) {
            for (int j = 1; j < m - 1; ++j) {
                double acc = 0.0;
                for (int l = 0; l < m; ++l) {
                    acc += p.D2[k](j, l) * zz(iu(k, l));
                    jac(row, iu(k, l)) = p.D2[k](j, l);
                }
                double t = p.nodes[k][j];
                double yv = zz(iy(k, j)), uv = zz(iu(k, j));
                r(row) = acc - pr.f(t, yv, uv);
                jac(row, iy(k, j)) -= pr.fy(t, yv, uv);
                jac(row, iu(k, j)) -= pr.fu(t, yv, uv);
                ++row;
            }
        }
        // u continuity and u' continuity
        for (int k = 0; k + 1 < K; ++k) {
            r(row) = zz(iu(k, m - 1)) - zz(iu(k + 1, 0));
            jac(row, iu(k, m - 1)) = 1.0;
            jac(row, iu(k + 1, 0)) = -1.0;
            ++row;
            double acc = 0.0;
            for (int l = 0; l < m; ++l) {
                acc += p.D[k](m - 1, l) * zz(iu(k, l));
                jac(row, iu(k, l)) += p.D[k](m - 1, l);
                acc -= p.D[k + 1](0, l) * zz(iu(k + 1, l));
                jac(row, iu(k + 1, l)) -= p.D[k + 1](0, l);
            }
            r(row) = acc;
            ++row;
        }
        // u(L-) and y(L+)
        r(row) = zz(iu(0, 0)) - pr.uL;
        jac(row, iu(0, 0)) = 1.0;
        ++row;
        r(row) = zz(iy(K - 1, m - 1)) - pr.yR;
        jac(row, iy(K - 1, m - 1)) = 1.0;
        ++row;
        if (row != 2 * nv) throw std::logic_error("solve_third_order: row count mismatch");
    };

    newton_solve(z, sys, tol, max_iter, what);

    SystemSolution out;
    out.y.resize(K);
    out.u.resize(K);
    out.up.resize(K);
    out.upp.resize(K);
    for (int k = 0; k < K; ++k) {
        out.y[k].resize(m);
        out.u[k].resize(m);
        for (int j = 0; j < m; ++j) {
            out.y[k][j] = z(iy(k, j));
            out.u[k][j] = z(iu(k, j));
        }
        Eigen::Map<const Eigen::VectorXd> uv(out.u[k].data(), m);
        Eigen::VectorXd d1 = p.D[k] * uv;
        Eigen::VectorXd d2 = p.D2[k] * uv;
        out.up[k].assign(d1.data(), d1.data() + m);
        out.upp[k].assign(d2.data(), d2.data() + m);
    }
    return out;
}

double sigma_pii_algebraic(double a, double t, double y, double u, double up) {
    (void)t;
    return up * up + 4.0 * u * (u * u - t * u + y) - a * a;
}

}  // namespace

double PiecewiseChebFn::operator()(double t) const {
    if (breaks.empty()) throw std::runtime_error("PiecewiseChebFn: empty");
    int k = static_cast<int>(std::upper_bound(breaks.begin(), breaks.end(), t) - breaks.begin()) - 1;
    k = std::clamp(k, 0, static_cast<int>(values.size()) - 1);
    return bary_eval(nodes[k], values[k], t);
}

PainleveSolution solve_sigma_pii(double a, const BvpOptions& opt) {
    if (a < 0.0) throw std::domain_error("solve_sigma_pii: a must be nonnegative");
    if (opt.L_minus > -8.0 || opt.L_plus < 6.0)
        throw std::domain_error("solve_sigma_pii: window must cover [-8, 6]");
    Panels p = make_panels(opt.L_minus, opt.L_plus, opt.panel_width, opt.degree);
    const int K = p.count();
    const int m = p.n + 1;

    // Hastings-McLeod supplies both the initial guess and, for a = 0, the
    // right boundary value sigma_0(L+) = int_{L+}^inf q^2.
    HmOptions hmo;
    hmo.L_minus = opt.L_minus;
    hmo.L_plus = std::min(opt.L_plus, 12.0);
    HastingsMcleod hm = hastings_mcleod(hmo);

    ThirdOrderProblem pr;
    pr.f = [](double t, double y, double u) { return -6.0 * u * u + 4.0 * t * u - 2.0 * y; };
    pr.fy = [](double, double, double) { return -2.0; };
    pr.fu = [](double t, double, double u) { return -12.0 * u + 4.0 * t; };
    if (a > 0.0) {
        // first integral at the left end; detects drift along the a-family
        // at first order since dF/da = -2a != 0
        pr.extra_row_at_left = true;
        pr.F = [a](double t, double y, double u, double up) { return sigma_pii_algebraic(a, t, y, u, up); };
        pr.Fy = [](double, double, double u, double) { return 4.0 * u; };
        pr.Fu = [](double t, double y, double u, double) { return 4.0 * (3.0 * u * u - 2.0 * t * u + y); };
        pr.Fup = [](double, double, double, double up) { return 2.0 * up; };
    } else {
        // At a = 0 the first integral is quadratic in the family drift and
        // cannot see it at the Newton floor; instead forbid the fast
        // boundary layer at the right end, u' + 2 sqrt(t) u = 0, so that the
        // y(L+) anchor pins the sqrt(t)-shaped soft mode directly.
        pr.extra_row_at_left = false;
        pr.F = [](double t, double, double u, double up) { return up + 2.0 * std::sqrt(t) * u; };
        pr.Fy = [](double, double, double, double) { return 0.0; };
        pr.Fu = [](double t, double, double, double) { return 2.0 * std::sqrt(t); };
        pr.Fup = [](double, double, double, double) { return 1.0; };
    }

    const double c1 = (4.0 * a * a - 1.0) / 8.0;
    const double Lm = opt.L_minus, Lp = opt.L_plus;
    pr.uL = 0.5 * Lm - c1 / (Lm * Lm);
    if (a > 0.0) {
        // y ~ -a sqrt(t) - a^2/(4t) + (a/32 + a^3/8) t^{-5/2} (matched to the
        // equation; the a = 1 case reproduces the Ai log-derivative series)
        pr.yR = -a * std::sqrt(Lp) - a * a / (4.0 * Lp) + (a / 32.0 + a * a * a / 8.0) * std::pow(Lp, -2.5);
    } else {
        pr.yR = specfun::airy_square_tail(Lp);
    }

    // initial guess from the Hastings-McLeod identities sigma_0 = q'^2 - q^4 - t q^2
    // and sigma_1 - sigma_0 = q'/q (initialization only; the converged
    // solution is pinned by the sigma-PII equation and its own boundary data)
    std::vector<std::vector<double>> y0(K), u0(K);
    for (int k = 0; k < K; ++k) {
        y0[k].resize(m);
        u0[k].resize(m);
        for (int j = 0; j < m; ++j) {
            double t = p.nodes[k][j];
            double q, qd;
            if (t <= hm.L_plus) {
                q = hm.at(t);
                qd = hm.deriv_at(t);
            } else {
                auto ai = specfun::airy_ai(t);
                q = ai.value;
                qd = ai.derivative;
            }
            double s0 = qd * qd - q * q * q * q - t * q * q;
            double s0d = -q * q;
            double logd = (q > 1e-280) ? qd / q : -std::sqrt(std::max(t, 1.0));
            double logdd = (q > 1e-280) ? (t + 2.0 * q * q - logd * logd) : 0.0;
            y0[k][j] = s0 + a * logd;
            u0[k][j] = s0d + a * logdd;
        }
    }

    auto sol = solve_third_order(p, pr, y0, u0, opt.newton_tol, opt.max_iter, "solve_sigma_pii");

    PainleveSolution out;
    out.a = a;
    out.L_minus = Lm;
    out.L_plus = Lp;
    out.sigma = make_fn(p, sol.y);
    out.sigma_d = make_fn(p, sol.u);
    out.sigma_dd = make_fn(p, sol.up);
    double res = 0.0;
    for (int k = 0; k < K; ++k)
        for (int j = 1; j < m - 1; ++j)
            res = std::max(res, std::fabs(sigma_pii_algebraic(a, p.nodes[k][j], sol.y[k][j], sol.u[k][j],
                                                              sol.up[k][j])));
    out.ode_residual = res;
    out.left_boundary_residual = std::fabs(sol.y[0][0] - (Lm * Lm / 4.0 + c1 / Lm));
    return out;
}

HastingsMcleod hastings_mcleod(const HmOptions& opt) {
    if (opt.L_minus > -8.0 || opt.L_plus < 6.0)
        throw std::domain_error("hastings_mcleod: window must cover [-8, 6]");
    Panels p = make_panels(opt.L_minus, opt.L_plus, opt.panel_width, opt.degree);
    const int K = p.count();
    const int m = p.n + 1;
    const int nv = K * m;
    auto iq = [&](int k, int j) { return k * m + j; };

    Eigen::VectorXd z(nv);
    for (int k = 0; k < K; ++k)
        for (int j = 0; j < m; ++j) {
            double t = p.nodes[k][j];
            // positive, with the right growth on the left and decay on the right
            z(iq(k, j)) = std::sqrt(0.25 * (std::sqrt(t * t + 4.0) - t));
        }

    const double qL = std::sqrt(-opt.L_minus / 2.0) * (1.0 + 0.125 * std::pow(opt.L_minus, -3.0));
    const double qR = specfun::airy_ai(opt.L_plus).value;

    auto sys = [&](const Eigen::VectorXd& zz, Eigen::VectorXd& r, Eigen::MatrixXd& jac) {
        r.setZero(nv);
        jac.setZero(nv, nv);
        int row = 0;
        for (int k = 0; k < K; ++k) {
            for (int j = 1; j < m - 1; ++j) {
                double acc = 0.0;
                for (int l = 0; l < m; ++l) {
                    acc += p.D2[k](j, l) * zz(iq(k, l));
                    jac(row, iq(k, l)) = p.D2[k](j, l);
                }
                double t = p.nodes[k][j], q = zz(iq(k, j));
                r(row) = acc - t * q - 2.0 * q * q * q;
                jac(row, iq(k, j)) -= t + 6.0 * q * q;
                ++row;
            }
        }
        for (int k = 0; k + 1 < K; ++k) {
            r(row) = zz(iq(k, m - 1)) - zz(iq(k + 1, 0));
            jac(row, iq(k, m - 1)) = 1.0;
            jac(row, iq(k + 1, 0)) = -1.0;
            ++row;
            double acc = 0.0;
            for (int l = 0; l < m; ++l) {
                acc += p.D[k](m - 1, l) * zz(iq(k, l));
                jac(row, iq(k, l)) += p.D[k](m - 1, l);
                acc -= p.D[k + 1](0, l) * zz(iq(k + 1, l));
                jac(row, iq(k + 1, l)) -= p.D[k + 1](0, l);
            }
            r(row) = acc;
            ++row;
        }
        r(row) = zz(iq(0, 0)) - qL;
        jac(row, iq(0, 0)) = 1.0;
        ++row;
        r(row) = zz(iq(K - 1, m - 1)) - qR;
        jac(row, iq(K - 1, m - 1)) = 1.0;
        ++row;
        if (row != nv) throw std::logic_error("hastings_mcleod: row count mismatch");
    };

    newton_solve(z, sys, opt.newton_tol, opt.max_iter, "hastings_mcleod");

    HastingsMcleod out;
    out.L_minus = opt.L_minus;
    out.L_plus = opt.L_plus;
    std::vector<std::vector<double>> q(K), qd(K);
    double res = 0.0;
    for (int k = 0; k < K; ++k) {
        q[k].resize(m);
        for (int j = 0; j < m; ++j) q[k][j] = z(iq(k, j));
        Eigen::Map<const Eigen::VectorXd> qv(q[k].data(), m);
        Eigen::VectorXd d1 = p.D[k] * qv;
        Eigen::VectorXd d2 = p.D2[k] * qv;
        qd[k].assign(d1.data(), d1.data() + m);
        for (int j = 1; j < m - 1; ++j) {
            double t = p.nodes[k][j];
            res = std::max(res, std::fabs(d2(j) - t * q[k][j] - 2.0 * std::pow(q[k][j], 3)));
        }
    }
    out.q = make_fn(p, q);
    out.q_d = make_fn(p, qd);
    out.ode_residual = res;
    return out;
}

double HastingsMcleod::integral_tail(double s) const {
    if (s >= L_plus) return specfun::airy_integral_tail(s);
    auto g = composite_gauss_legendre(s, L_plus, 0.5, 12);
    double acc = g.integrate([&](double x) { return at(x); });
    return acc + specfun::airy_integral_tail(L_plus);
}

namespace {

// int_c^inf (x - s) Ai(x)^2 dx for c >= s
double airy_weighted_square_tail(double c, double s) {
    auto g = composite_gauss_legendre(c, c + 30.0, 1.0, 16);
    return g.integrate([&](double x) {
        double a = specfun::airy_ai(x).value;
        return (x - s) * a * a;
    });
}

}  // namespace

double HastingsMcleod::convolution_tail(double s) const {
    double acc = 0.0;
    if (s < L_plus) {
        auto g = composite_gauss_legendre(s, L_plus, 0.5, 12);
        acc = g.integrate([&](double x) {
            double q = at(x);
            return (x - s) * q * q;
        });
    }
    return acc + airy_weighted_square_tail(std::max(s, L_plus), s);
}

QFunction q_from_delta_sigma(const PainleveSolution& sigma0, const PainleveSolution& sigma1) {
    QFunction out;
    out.L_minus = std::max(sigma0.L_minus, sigma1.L_minus) + 0.25;
    out.L_plus = std::min(sigma0.L_plus, sigma1.L_plus) - 1.0;
    auto dsigma = [&](double t) { return sigma1.at(t) - sigma0.at(t); };
    // log Q(x) = log Ai(x0) - int_x^{x0} dsigma, anchored at x0 = L_plus
    const double x0 = out.L_plus;
    out.anchor = std::log(specfun::airy_ai(x0).value);
    const double step = 0.125;
    int npan = static_cast<int>(std::round((x0 - out.L_minus) / step));
    std::vector<double> xs(npan + 1), logq(npan + 1);
    for (int i = 0; i <= npan; ++i) xs[i] = out.L_minus + (x0 - out.L_minus) * i / npan;
    logq[npan] = out.anchor;
    for (int i = npan; i-- > 0;) {
        auto g = gauss_legendre(xs[i], xs[i + 1], 12);
        logq[i] = logq[i + 1] - g.integrate(dsigma);
    }
    out.grid = std::move(xs);
    out.log_values = std::move(logq);
    out.values.resize(out.log_values.size());
    for (size_t i = 0; i < out.log_values.size(); ++i) out.values[i] = std::exp(out.log_values[i]);
    return out;
}

double QFunction::at(double x) const {
    if (x < grid.front() || x > grid.back()) throw std::domain_error("QFunction: outside solved window");
    // interpolate in log space (Q > 0)
    return std::exp(pchip_eval(grid, log_values, x));
}

double QFunction::convolution_tail(double s) const {
    double acc = 0.0;
    double hi = grid.back();
    if (s < hi) {
        auto g = composite_gauss_legendre(s, hi, 0.25, 12);
        acc = g.integrate([&](double x) {
            double q = at(x);
            return (x - s) * q * q;
        });
    }
    return acc + airy_weighted_square_tail(std::max(s, hi), s);
}

double tw2_cdf_classical(const HastingsMcleod& q, double s) { return std::exp(-q.convolution_tail(s)); }

double tw2_cdf_new(const QFunction& q, double s) { return std::exp(-q.convolution_tail(s)); }

SigmaPIVSolution solve_sigma_piv(int n, double a, int degree) {
    if (n < 1 || n > 30) throw std::domain_error("solve_sigma_piv: n must be in [1, 30]");
    if (a < 0.0) throw std::domain_error("solve_sigma_piv: a must be nonnegative");
    const double edge = std::sqrt(2.0 * n);
    BvpOptions opt;
    opt.L_minus = -(3.0 * edge + 14.0);
    opt.L_plus = edge + 10.0;
    opt.degree = degree;
    opt.panel_width = 4.0;

    Panels p = make_panels(opt.L_minus, opt.L_plus, opt.panel_width, opt.degree);
    const int K = p.count();
    const int m = p.n + 1;

    const double Lm = opt.L_minus, Lp = opt.L_plus;
    auto make_problem = [&](double nn, double aa) {
        ThirdOrderProblem pr;
        pr.f = [nn, aa](double t, double y, double u) {
            return 4.0 * t * t * u - 4.0 * t * y - 6.0 * u * u - 8.0 * (nn - aa) * u + 8.0 * aa * nn;
        };
        pr.fy = [](double t, double, double) { return -4.0 * t; };
        pr.fu = [nn, aa](double t, double, double u) { return 4.0 * t * t - 12.0 * u - 8.0 * (nn - aa); };
        pr.F = [nn, aa](double t, double y, double u, double up) {
            double w = t * u - y;
            return up * up - 4.0 * w * w + 4.0 * u * (u - 2.0 * aa) * (u + 2.0 * nn);
        };
        pr.Fy = [](double t, double y, double u, double) { return 8.0 * (t * u - y); };
        pr.Fu = [nn, aa](double t, double y, double u, double) {
            return -8.0 * t * (t * u - y) + 12.0 * u * u + 16.0 * (nn - aa) * u - 16.0 * aa * nn;
        };
        pr.Fup = [](double, double, double, double up) { return 2.0 * up; };
        // matched expansion at -inf: y = -2nt - m1/t + d3/t^3 + d5/t^5 (odd powers)
        const double m1 = nn * (aa + nn);
        const double d3 = m1 * (2.0 * nn + aa) / 2.0;
        const double d5 = -m1 * (2.0 * std::pow(2.0 * nn + aa, 2) + 1.0 + m1) / 4.0;
        pr.uL = -2.0 * nn + m1 / (Lm * Lm) - 3.0 * d3 * std::pow(Lm, -4) - 5.0 * d5 * std::pow(Lm, -6);
        // matched expansion at +inf: y = n a/t + C3/t^3 + C5/t^5
        const double C3 = nn * aa * (nn - aa) / 2.0;
        const double C5 = nn * aa * (2.0 * std::pow(nn - aa, 2) + 1.0 - nn * aa) / 4.0;
        pr.yR = nn * aa / Lp + C3 * std::pow(Lp, -3) + C5 * std::pow(Lp, -5);
        return pr;
    };

    // Seed with the closed form for n = 1, a = 0:
    // U_1(t; 0) = e^{-t^2}/sqrt(pi) / int_{-inf}^t e^{-s^2}/sqrt(pi) ds,
    // switching to its -inf asymptote where the mass underflows.
    auto seed = [](double t) {
        if (t < -3.5) return -2.0 * t - 1.0 / t;
        return std::exp(-t * t) / std::sqrt(M_PI) / specfun::gaussian_cdf(std::sqrt(2.0) * t);
    };
    std::vector<std::vector<double>> y0(K), u0(K);
    for (int k = 0; k < K; ++k) {
        y0[k].resize(m);
        u0[k].resize(m);
        for (int j = 0; j < m; ++j) {
            double t = p.nodes[k][j];
            double h = seed(t);
            y0[k][j] = h;
            u0[k][j] = (t < -3.5) ? (-2.0 + 1.0 / (t * t)) : (-2.0 * t * h - h * h);
        }
    }

    // continuation from (n, a) = (1, 0): ramp a first, then the size parameter
    struct Leg {
        double nn, aa;
    };
    // The a = 0 face of the parameter plane sits next to the degenerate
    // trivial branch y = 0 (the first-integral row loses its gradient
    // there), so the size ramp runs along a = 1 and a is adjusted last.
    std::vector<Leg> path{{1.0, 0.0}};
    double ramp_a = std::max(a, 1.0);
    double aa = 0.0;
    while (aa < ramp_a) {
        aa = std::min(ramp_a, aa + 0.25);
        path.push_back({1.0, aa});
    }
    double nn = 1.0;
    while (nn < n) {
        nn = std::min(nn + 0.1 * std::sqrt(nn), static_cast<double>(n));
        path.push_back({nn, ramp_a});
    }
    while (aa != a) {
        aa = (aa > a) ? std::max(a, aa - 0.25) : std::min(a, aa + 0.25);
        path.push_back({static_cast<double>(n), aa});
    }

    SystemSolution sol;
    for (const Leg& leg : path) {
        if (std::getenv("MAXINDEP_PIV_TRACE")) std::fprintf(stderr, "piv leg nn=%g aa=%g\n", leg.nn, leg.aa);
        sol = solve_third_order(p, make_problem(leg.nn, leg.aa), y0, u0, 1e-9, 80, "solve_sigma_piv");
        y0 = sol.y;
        u0 = sol.u;
    }
    auto pr = make_problem(n, a);

    SigmaPIVSolution out;
    out.n = n;
    out.a = a;
    out.L_minus = Lm;
    out.L_plus = Lp;
    out.sigma = make_fn(p, sol.y);
    out.sigma_d = make_fn(p, sol.u);
    out.sigma_dd = make_fn(p, sol.up);
    double res = 0.0;
    for (int k = 0; k < K; ++k)
        for (int j = 1; j < m - 1; ++j)
            res = std::max(res,
                           std::fabs(pr.F(p.nodes[k][j], sol.y[k][j], sol.u[k][j], sol.up[k][j])));
    out.ode_residual = res;
    out.left_boundary_residual = std::fabs(sol.y[0][0] - (-2.0 * n * Lm - n * (a + n) / Lm));
    return out;
}

HamiltonianReconstruction hamiltonian_reconstruction(const PainleveSolution& sigma,
                                                     const std::vector<double>& t_grid) {
    HamiltonianReconstruction out;
    out.t = t_grid;
    const double a = sigma.a;
    for (double t : t_grid) {
        double sd = sigma.deriv_at(t);
        double sdd = sigma.deriv2_at(t);
        double y = sigma.at(t);
        double p = -2.0 * sd;
        double pd = -2.0 * sdd;
        // p'' from the differentiated equation u'' = -6u^2 + 4tu - 2y
        double pdd = -2.0 * (-6.0 * sd * sd + 4.0 * t * sd - 2.0 * y);
        bool sing = std::fabs(sd) < 1e-8;
        double qv = sing ? 0.0 : (4.0 * sdd + 2.0 * a) / (8.0 * sd);
        double res = p * pdd - (0.5 * pd * pd + 2.0 * p * p * p + 2.0 * t * p * p - 2.0 * a * a);
        out.p.push_back(p);
        out.q.push_back(qv);
        out.p34_residual.push_back(res);
        out.singular.push_back(sing);
    }
    return out;
}

}  // namespace maxindep::painleve
