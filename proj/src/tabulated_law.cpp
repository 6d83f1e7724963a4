#include "maxindep/tabulated_law.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace maxindep {

namespace {

// Fritsch-Carlson slope at index i, computed from the neighbouring secants.
double pchip_slope(const std::vector<double>& x, const std::vector<double>& y, size_t i) {
    const size_t n = x.size();
    auto secant = [&](size_t j) { return (y[j + 1] - y[j]) / (x[j + 1] - x[j]); };
    if (i == 0) return secant(0);
    if (i == n - 1) return secant(n - 2);
    double d0 = secant(i - 1), d1 = secant(i);
    if (d0 * d1 <= 0.0) return 0.0;
    double h0 = x[i] - x[i - 1], h1 = x[i + 1] - x[i];
    double w1 = 2.0 * h1 + h0, w2 = h1 + 2.0 * h0;
    return (w1 + w2) / (w1 / d0 + w2 / d1);
}

}  // namespace

double pchip_eval(const std::vector<double>& x, const std::vector<double>& y, double s) {
    if (x.empty()) throw std::runtime_error("pchip_eval: empty grid");
    if (s <= x.front()) return y.front();
    if (s >= x.back()) return y.back();
    size_t i = std::upper_bound(x.begin(), x.end(), s) - x.begin() - 1;
    double di = pchip_slope(x, y, i);
    double dj = pchip_slope(x, y, i + 1);
    double h = x[i + 1] - x[i];
    double t = (s - x[i]) / h;
    double t2 = t * t, t3 = t2 * t;
    double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t;
    double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
    return h00 * y[i] + h10 * h * di + h01 * y[i + 1] + h11 * h * dj;
}

std::vector<double> cumulative_integral(const std::vector<double>& x, const std::vector<double>& y,
                                        double initial) {
    const size_t n = x.size();
    std::vector<double> out(n, initial);
    if (n < 2) return out;
    // Per-interval integral from the local parabola through three points
    // (falls back to trapezoid at panel ends when needed).
    for (size_t i = 0; i + 1 < n; ++i) {
        double h = x[i + 1] - x[i];
        double seg;
        if (i + 2 < n) {
            double h2 = x[i + 2] - x[i + 1];
            // integral over [x_i, x_{i+1}] of the quadratic through i, i+1, i+2
            double a = y[i], b = y[i + 1], c = y[i + 2];
            double s1 = h, s2 = h + h2;
            // Newton form: f(t) = a + (b-a)/s1 * t + ((c-b)/h2 - (b-a)/s1)/s2 * t(t-s1)
            double d1 = (b - a) / s1;
            double d2 = ((c - b) / h2 - d1) / s2;
            seg = a * h + d1 * h * h / 2.0 + d2 * (h * h * h / 3.0 - s1 * h * h / 2.0);
        } else if (i > 0) {
            double h0 = x[i] - x[i - 1];
            double a = y[i - 1], b = y[i], c = y[i + 1];
            double s1 = h0, s2 = h0 + h;
            double d1 = (b - a) / s1;
            double d2 = ((c - b) / h - d1) / s2;
            // integrate the same quadratic over [s1, s2] in local coordinates
            auto F = [&](double t) {
                return a * t + d1 * t * t / 2.0 + d2 * (t * t * t / 3.0 - s1 * t * t / 2.0);
            };
            seg = F(s2) - F(s1);
        } else {
            seg = 0.5 * (y[i] + y[i + 1]) * h;
        }
        out[i + 1] = out[i] + seg;
    }
    return out;
}

double TabulatedLaw::cdf_at(double s) const { return pchip_eval(grid, cdf, s); }

void TabulatedLaw::validate(double end_tol, double pdf_tol) const {
    if (grid.size() != cdf.size() || grid.size() < 2) throw std::runtime_error("TabulatedLaw: bad sizes");
    for (size_t i = 1; i < grid.size(); ++i) {
        if (cdf[i] < cdf[i - 1] - 1e-12) throw std::runtime_error("TabulatedLaw: cdf not nondecreasing");
    }
    if (cdf.front() > end_tol) throw std::runtime_error("TabulatedLaw: cdf does not start near 0");
    if (std::fabs(cdf.back() - 1.0) > end_tol) throw std::runtime_error("TabulatedLaw: cdf does not end near 1");
    if (!pdf.empty()) {
        if (pdf.size() != grid.size()) throw std::runtime_error("TabulatedLaw: pdf size mismatch");
        for (double v : pdf)
            if (v < -1e-12) throw std::runtime_error("TabulatedLaw: negative pdf");
        auto cum = cumulative_integral(grid, pdf, cdf.front());
        for (size_t i = 0; i < grid.size(); ++i) {
            if (std::fabs(cum[i] - cdf[i]) > pdf_tol)
                throw std::runtime_error("TabulatedLaw: pdf inconsistent with cdf");
        }
    }
}

}  // namespace maxindep
