#include "maxindep/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace maxindep {

void QuadGrid::validate() const {
    if (nodes.size() != weights.size()) throw std::invalid_argument("QuadGrid: size mismatch");
    double total = 0.0;
    for (size_t i = 0; i < nodes.size(); ++i) {
        if (weights[i] <= 0.0) throw std::invalid_argument("QuadGrid: nonpositive weight");
        if (i > 0 && nodes[i] <= nodes[i - 1]) throw std::invalid_argument("QuadGrid: nodes not increasing");
        total += weights[i];
    }
    double len = upper - lower;
    if (std::fabs(total - len) > 1e-10 * std::max(1.0, std::fabs(len)))
        throw std::invalid_argument("QuadGrid: weights do not sum to interval length");
}

void gauss_legendre_reference(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    if (n < 1) throw std::invalid_argument("gauss_legendre_reference: n must be positive");
    static std::map<int, std::pair<std::vector<double>, std::vector<double>>> cache;
    static std::mutex mtx;
    {
        std::lock_guard<std::mutex> lock(mtx);
        auto it = cache.find(n);
        if (it != cache.end()) {
            nodes = it->second.first;
            weights = it->second.second;
            return;
        }
    }
    nodes.assign(n, 0.0);
    weights.assign(n, 0.0);
    for (int i = 0; i < n; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::fabs(dx) < 1e-15) {
                p0 = 1.0;
                p1 = x;
                for (int k = 2; k <= n; ++k) {
                    double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n * (x * p1 - p0) / (x * x - 1.0);
                break;
            }
        }
        nodes[n - 1 - i] = x;  // cos ordering is decreasing; store increasing
        weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    std::lock_guard<std::mutex> lock(mtx);
    cache[n] = {nodes, weights};
}

QuadGrid gauss_legendre(double a, double b, int n) {
    std::vector<double> xs, ws;
    gauss_legendre_reference(n, xs, ws);
    QuadGrid g;
    g.lower = a;
    g.upper = b;
    g.nodes.resize(n);
    g.weights.resize(n);
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (int i = 0; i < n; ++i) {
        g.nodes[i] = mid + half * xs[i];
        g.weights[i] = half * ws[i];
    }
    return g;
}

QuadGrid composite_gauss_legendre(double a, double b, double panel_width, int nodes_per_panel) {
    if (b <= a) throw std::invalid_argument("composite_gauss_legendre: empty interval");
    int panels = std::max(1, static_cast<int>(std::ceil((b - a) / panel_width)));
    double w = (b - a) / panels;
    QuadGrid g;
    g.lower = a;
    g.upper = b;
    g.nodes.reserve(static_cast<size_t>(panels) * nodes_per_panel);
    g.weights.reserve(static_cast<size_t>(panels) * nodes_per_panel);
    for (int p = 0; p < panels; ++p) {
        QuadGrid panel = gauss_legendre(a + p * w, a + (p + 1) * w, nodes_per_panel);
        g.nodes.insert(g.nodes.end(), panel.nodes.begin(), panel.nodes.end());
        g.weights.insert(g.weights.end(), panel.weights.begin(), panel.weights.end());
    }
    return g;
}

}  // namespace maxindep
