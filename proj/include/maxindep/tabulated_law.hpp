#pragma once

#include <string>
#include <vector>

namespace maxindep {

// Gridded CDF (and optionally PDF) of a scalar law, interpolated by a
// monotone cubic (Fritsch-Carlson).  mass_below_window records probability
// mass that sits to the left of grid.front() when the law extends past the
// tabulation window.
struct TabulatedLaw {
    std::vector<double> grid;
    std::vector<double> cdf;
    std::vector<double> pdf;  // may be empty
    double mass_below_window = 0.0;
    double total_mass = 0.0;  // measured: mass_below_window + integral of pdf + right tail if known

    double cdf_at(double s) const;
    double survival_at(double s) const { return 1.0 - cdf_at(s); }

    // Checks the TabulatedLaw invariants; throws std::runtime_error naming
    // the violated one.
    void validate(double end_tol = 1e-6, double pdf_tol = 1e-6) const;
};

// Monotone cubic interpolation of (x, y) at point s (clamped to the ends).
double pchip_eval(const std::vector<double>& x, const std::vector<double>& y, double s);

// Cumulative integral of samples y on grid x by Simpson-like composite rule
// (uniform or non-uniform spacing); out[0] = initial.
std::vector<double> cumulative_integral(const std::vector<double>& x, const std::vector<double>& y,
                                        double initial = 0.0);

}  // namespace maxindep
