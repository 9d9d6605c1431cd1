#include "soler/grid.hpp"

#include <stdexcept>

namespace soler {

RadialGrid RadialGrid::make_uniform(int n_intervals, double r_max) {
    if (n_intervals < 2 || r_max <= 0) throw std::invalid_argument("bad grid parameters");
    RadialGrid g;
    g.nodes = Eigen::VectorXd::LinSpaced(n_intervals + 1, 0.0, r_max);
    g.uniform = true;
    return g;
}

Eigen::VectorXd RadialGrid::weights_flat() const {
    const int n = size();
    Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
    for (int i = 0; i + 1 < n; ++i) {
        double dh = nodes[i + 1] - nodes[i];
        w[i] += 0.5 * dh;
        w[i + 1] += 0.5 * dh;
    }
    return w;
}

Eigen::VectorXd RadialGrid::weights_r2() const {
    Eigen::VectorXd w = weights_flat();
    for (int i = 0; i < size(); ++i) w[i] *= nodes[i] * nodes[i];
    return w;
}

bool RadialGrid::same_as(const RadialGrid& other) const {
    return nodes.size() == other.nodes.size() && (nodes - other.nodes).cwiseAbs().maxCoeff() == 0.0;
}

Eigen::VectorXcd fd_derivative(const RadialGrid& g, const Eigen::VectorXcd& f) {
    const int n = g.size();
    if (f.size() != n) throw std::invalid_argument("fd_derivative size mismatch");
    Eigen::VectorXcd d(n);
    for (int i = 1; i + 1 < n; ++i) d[i] = (f[i + 1] - f[i - 1]) / (g.nodes[i + 1] - g.nodes[i - 1]);
    // second-order one-sided closures (uniform spacing assumed at the ends)
    double h = g.nodes[1] - g.nodes[0];
    d[0] = (-1.5 * f[0] + 2.0 * f[1] - 0.5 * f[2]) / h;
    double he = g.nodes[n - 1] - g.nodes[n - 2];
    d[n - 1] = (1.5 * f[n - 1] - 2.0 * f[n - 2] + 0.5 * f[n - 3]) / he;
    return d;
}

}  // namespace soler
