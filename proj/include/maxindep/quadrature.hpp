#pragma once

#include <vector>

namespace maxindep {

// Quadrature nodes/weights for a finite interval [lower, upper]; half-lines
// are represented by truncation at a cutoff chosen by the caller.
struct QuadGrid {
    std::vector<double> nodes;    // strictly increasing
    std::vector<double> weights;  // positive
    double lower = 0.0;
    double upper = 0.0;

    int size() const { return static_cast<int>(nodes.size()); }

    // Checks strict monotonicity, weight positivity and total weight.
    void validate() const;

    template <class F>
    double integrate(F f) const {
        double acc = 0.0;
        for (int i = 0; i < size(); ++i) acc += weights[i] * f(nodes[i]);
        return acc;
    }
};

// n-point Gauss-Legendre rule on [a, b].
QuadGrid gauss_legendre(double a, double b, int n);

// Composite Gauss-Legendre: panels of width <= panel_width, nodes_per_panel each.
QuadGrid composite_gauss_legendre(double a, double b, double panel_width, int nodes_per_panel);

// Nodes/weights of the n-point rule on [-1, 1].
void gauss_legendre_reference(int n, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace maxindep
