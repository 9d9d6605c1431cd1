#pragma once
#include <Eigen/Dense>
#include <vector>

namespace soler {

// Radial grid on [0, R_max], node 0 included (regularity conditions live there).
struct RadialGrid {
    Eigen::VectorXd nodes;  // strictly increasing, nodes[0] = 0
    bool uniform = true;

    static RadialGrid make_uniform(int n_intervals, double r_max);

    int size() const { return static_cast<int>(nodes.size()); }
    double r_max() const { return nodes[nodes.size() - 1]; }
    double h() const { return nodes[1] - nodes[0]; }

    // composite trapezoid weights for \int f(rho) rho^2 drho
    Eigen::VectorXd weights_r2() const;
    // plain trapezoid weights for \int f(rho) drho
    Eigen::VectorXd weights_flat() const;

    bool same_as(const RadialGrid& other) const;
};

// centered second-order first derivative with one-sided closures
Eigen::VectorXcd fd_derivative(const RadialGrid& g, const Eigen::VectorXcd& f);

}  // namespace soler
