#pragma once
#include "soler/field.hpp"

#include <optional>
#include <string>
#include <vector>

namespace soler {

enum class TailSign { overshoot, undershoot, decayed };

// dense trajectory of the radial shooting problem plus the matched
// analytic exponential tail  a = A e^{-kappa rho}/rho
struct DenseProfile {
    Eigen::VectorXd rho, a, b, da, db;  // uniform nodes, values, derivatives
    double rho_match = 0;               // tail matched beyond this radius
    double tail_amp = 0;                // A
    double kappa_exact = 0;             // sqrt(m^2 - omega^2)
    double m_plus_omega = 0;

    // cubic Hermite inside, analytic tail outside; returns (a, b, a', b')
    Eigen::Vector4d eval(double r) const;
};

struct RadialProfile {
    double omega = 0;
    RadialGrid grid;
    Eigen::VectorXd a, b;   // grid samples
    double a0 = 0;          // shooting parameter a(0)
    double kappa = 0;       // fitted decay rate
    double residual = 0;    // sup-norm radial residual
    bool positivity_ok = true;  // a^2 - b^2 >= 0 on the grid
    DenseProfile dense;

    BlockSpinor as_block() const;                 // real profile as a block field
    DoubledField as_doubled() const;              // Phi = (phi, phi*)
};

struct ShootResult {
    std::vector<double> rho, a, b;
    TailSign tail_sign = TailSign::undershoot;
};

struct ProfileFamily {
    std::vector<double> omegas;
    std::vector<RadialProfile> profiles;
    std::vector<double> q;        // q(omega_i) = ||phi||^2
    std::vector<double> qprime;   // centered differences (empty for singletons)
    bool h3_holds = false;        // min |q'| above threshold, no sign change flags
    double min_abs_qprime = 0;
    bool below_third_flagged = false;  // some omega <= m/3
    std::string note;

    // centered-difference d/domega Phi at family index i (doubled field)
    DoubledField dPhi_domega(int i) const;
};

ShootResult shoot(const SolerModel& model, double omega, double a0_start,
                  double r_end = 60.0);

// coarse scan for a bisection bracket over a0 in (lo, hi)
std::optional<std::pair<double, double>> find_bracket(const SolerModel& model, double omega,
                                                      double lo = 1e-3, double hi = 3.0,
                                                      int n_scan = 60);

RadialProfile solve_profile(const SolerModel& model, double omega,
                            std::pair<double, double> bracket, const RadialGrid& grid);

ProfileFamily continue_family(const SolerModel& model, const std::vector<double>& omega_grid,
                              const RadialGrid& grid, double qprime_threshold = 1e-3);

struct ResidualReport {
    double radial;
    double cartesian;
};
ResidualReport profile_residual(const RadialProfile& profile, const SolerModel& model,
                                int n_points = 120, unsigned seed = 7);

// 3D evaluation from the dense representation (high accuracy)
Vec4 reconstruct_profile(const RadialProfile& profile, const Eigen::Vector3d& x);

}  // namespace soler
