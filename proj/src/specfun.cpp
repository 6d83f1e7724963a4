#include "maxindep/specfun.hpp"

#include <boost/math/special_functions/airy.hpp>
#include <boost/math/special_functions/bessel.hpp>

#include <cmath>
#include <stdexcept>

namespace maxindep::specfun {

AiryPair airy_ai(double x) {
    if (!std::isfinite(x)) throw std::domain_error("airy_ai: non-finite argument");
    // Beyond x ~ 106 both Ai and Ai' underflow to 0 in double precision;
    // boost raises an underflow error there, so short-circuit.
    if (x > 105.0) return {0.0, 0.0};
    return {boost::math::airy_ai(x), boost::math::airy_ai_prime(x)};
}

double bessel_j(double nu, double x) {
    if (!std::isfinite(nu) || !std::isfinite(x)) throw std::domain_error("bessel_j: non-finite argument");
    if (nu < 0.0 || x < 0.0) throw std::domain_error("bessel_j: order and argument must be nonnegative");
    return boost::math::cyl_bessel_j(nu, x);
}

double bessel_j_order_derivative(double nu, double x) {
    const double h = 1e-5;
    if (nu >= h) return (bessel_j(nu + h, x) - bessel_j(nu - h, x)) / (2.0 * h);
    // One-sided at the left edge of the admissible order range.
    return (bessel_j(nu + h, x) - bessel_j(nu, x)) / h;
}

double modified_bessel_coeff(long long k, double s) {
    if (!std::isfinite(s)) throw std::domain_error("modified_bessel_coeff: non-finite argument");
    if (s < 0.0) throw std::domain_error("modified_bessel_coeff: s must be nonnegative");
    const auto a = static_cast<double>(k < 0 ? -k : k);
    return boost::math::cyl_bessel_i(a, 2.0 * s);
}

double gaussian_pdf(double x) {
    static const double inv_sqrt_2pi = 0.3989422804014326779;
    return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

double gaussian_cdf(double x) {
    static const double inv_sqrt2 = 0.7071067811865475244;
    return 0.5 * std::erfc(-x * inv_sqrt2);
}

double truncated_gaussian_moment(int j, double t) {
    if (j < 0) throw std::domain_error("truncated_gaussian_moment: j must be nonnegative");
    const double phi = gaussian_pdf(t);
    double m0 = gaussian_cdf(t);
    if (j == 0) return m0;
    double m1 = -phi;
    if (j == 1) return m1;
    double tp = t;  // t^{j-1} running power
    double prev2 = m0, prev1 = m1;
    for (int n = 2; n <= j; ++n) {
        double cur = (n - 1) * prev2 - tp * phi;
        prev2 = prev1;
        prev1 = cur;
        tp *= t;
    }
    return prev1;
}

namespace {

// 40-point Gauss-Legendre rule on [0,1] (nodes/weights generated on first use
// by Newton iteration on the Legendre polynomial; adequate for the smooth
// decaying tail integrands below).
struct Gl40 {
    double node[40];
    double weight[40];
    Gl40() {
        const int n = 40;
        for (int i = 0; i < n; ++i) {
            double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = x;
                for (int k = 2; k <= n; ++k) {
                    double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                double dp = n * (x * p1 - p0) / (x * x - 1.0);
                double dx = p1 / dp;
                x -= dx;
                if (std::fabs(dx) < 1e-15) break;
            }
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            double dp = n * (x * p1 - p0) / (x * x - 1.0);
            node[i] = 0.5 * (1.0 + x);
            weight[i] = 1.0 / ((1.0 - x * x) * dp * dp);
        }
    }
};

template <class F>
double integrate_tail(F f, double x, double span) {
    static const Gl40 gl;
    // Composite panels of width 2 out to x + span; the integrands decay
    // like Ai or Ai^2, so the remainder past the span is below 1e-16.
    double total = 0.0;
    double a = x;
    const double width = 2.0;
    int panels = static_cast<int>(std::ceil(span / width));
    for (int p = 0; p < panels; ++p) {
        double b = a + width;
        double acc = 0.0;
        for (int i = 0; i < 40; ++i) acc += gl.weight[i] * f(a + (b - a) * gl.node[i]);
        total += acc * (b - a);
        a = b;
    }
    return total;
}

}  // namespace

double airy_integral_tail(double x) {
    return integrate_tail([](double u) { return airy_ai(u).value; }, x, 40.0);
}

double airy_square_tail(double x) {
    return integrate_tail([](double u) { double a = airy_ai(u).value; return a * a; }, x, 40.0);
}

}  // namespace maxindep::specfun
