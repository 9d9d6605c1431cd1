#pragma once
#include "soler/linop.hpp"

namespace soler {

struct ResolventQuery {
    double lambda = 0;
    int side = +1;  // boundary value from above (+1) or below (-1)
    std::vector<double> epsilon_sequence;  // decreasing, >= 3 members
    double tau = 1.5;                      // weight exponent

    static ResolventQuery boundary(double lambda, int side, double gap, double tau = 1.5);
};

// sqrt(m^2 - Lambda^2) on the principal branch, with the side-dependent
// boundary value -i*side*sign(Lambda)*sqrt(Lambda^2-m^2) on the cuts |Lambda|>m
cplx resolvent_kappa(cplx Lambda, double m, int side);

// free Dirac resolvent kernel R_{D_m}(x-y, Lambda), 4x4
Mat4 free_resolvent_kernel(cplx Lambda, const Eigen::Vector3d& x, const Eigen::Vector3d& y,
                           double m, int side = +1);

// R_{D_m}(Lambda) restricted to the invariant angular block, applied by the
// analytic radial Green function (regular x decaying homogeneous solutions
// over their Wronskian)
void free_dirac_resolvent_radial(cplx Lambda, double m, int side, const RadialGrid& grid,
                                 const Eigen::VectorXcd& p, const Eigen::VectorXcd& q,
                                 Eigen::VectorXcd& out_p, Eigen::VectorXcd& out_q);

// resolvent of the free doubled operator diag(D - omega, -(D - omega)) at
// lambda (+ i side 0): first slot R_D(lambda + omega) same side, second slot
// -R_D(omega - lambda) with the side flipped
DoubledField free_resolvent_apply_radial(double m, double omega, cplx lambda, int side,
                                         const DoubledField& v);

// Birman-Schwinger operator A R0(lambda) B^* with A = <x>^{-tau},
// B^* = V <x>^{tau}; returns eigenvalues sorted by |1 + mu| ascending
struct BirmanSchwingerResult {
    std::vector<cplx> eigenvalues;  // sorted by |1+mu|
    double min_dist = 0;            // min |1 + mu|
    Eigen::VectorXcd near_null;     // eigenvector for mu closest to -1
};
BirmanSchwingerResult birman_schwinger_eigen(const LinearizedOperator& L, double lambda, int side,
                                             double tau = 0.75);

struct ThresholdReport {
    double threshold;       // lambda value
    double min_dist_plus;   // min |1+mu| from above
    double min_dist_minus;  // from below
    bool resonance_free;    // both above the resonance threshold
    double l2_fraction;     // ||u||_{L2-tail} character of the near-nullvector
    std::string character;  // "none" / "eigenvalue-like" / "resonance-like"
};
std::vector<ThresholdReport> threshold_resonance_scan(const LinearizedOperator& L,
                                                      double resonance_threshold = 0.05,
                                                      double tau = 0.75);

// limiting-absorption application of (H - lambda -/+ i0)^{-1} by shifted
// solves and Richardson extrapolation in the epsilon sequence
struct ResolventApplication {
    DoubledField value;
    double error_bar = 0;     // extrapolation increment
    double inverse_check = 0; // weighted residual of (H - lambda) value - v
};
ResolventApplication resolvent_apply(const LinearizedOperator& L, const ResolventQuery& q,
                                     const DoubledField& v);

struct LapScanResult {
    std::vector<double> lambdas;
    std::vector<double> norms;  // ||<x>^{-tau} R+ P_c <x>^{-tau}|| estimates
    double sup_norm = 0;
    double argmax_lambda = 0;
};
// eps_scale rescales the shifted-solve epsilon ladder (refinement studies)
LapScanResult lap_bound_scan(const LinearizedOperator& L, const std::vector<double>& lambda_grid,
                             double tau = 1.5, const SpectralProjection* proj = nullptr,
                             double eps_scale = 1.0);

// free propagator e^{-i t H0} by eigendecomposition of the (symmetric)
// discretized blocks; exactly unitary in the discrete L^2
struct FreePropagator {
    double omega = 0;
    RadialGrid grid;
    int n = 0;
    Eigen::VectorXd evals;   // of the one-sector block D - omega
    Eigen::MatrixXd evecs;
    Eigen::VectorXd rho;

    DoubledField apply(const DoubledField& psi, double t) const;
};
FreePropagator make_free_propagator(const SolerModel& model, double omega, const RadialGrid& grid);

struct DecayFit {
    double slope = 0;          // d log(weighted norm) / d log<t>
    double t_reflect = 0;      // domain-reflection time bound
    bool truncated = false;    // fit window hit the reflection time
    std::vector<double> times, norms;
};
DecayFit decay_fit(const FreePropagator& prop, const DoubledField& psi0, double tau,
                   const std::vector<double>& t_grid);

// wave operator lim e^{+i t H} e^{-i t H0} (direction +1) evaluated at t = T,
// with the Cauchy increment between T/2 and T as the convergence estimate;
// direction -1 gives the inverse composition e^{+i t H0} e^{-i t H}
struct WaveOperatorResult {
    DoubledField value;
    double cauchy_increment = 0;
};
WaveOperatorResult wave_operator(const LinearizedOperator& L, const DoubledField& v, double T,
                                 int direction, double dt = 0.02);

}  // namespace soler
