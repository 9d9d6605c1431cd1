#pragma once
#include "soler/profile.hpp"

namespace soler {

// Linearization about a solitary wave on the doubled field (r, r*), stored in
// weighted amplitudes ptil = rho p, qtil = rho q.  In these coordinates the
// radial measure is flat and the matrix obeys the pairing symmetry (Sigma3 H
// symmetric) and the conjugation antisymmetry (Sigma1 H Sigma1 = -H) exactly,
// not just up to discretization error.
//
// Both weighted amplitudes live on the interior integer nodes i h
// (i = 1..N-1); the Dirichlet values ptil(0) = qtil(0) = 0 are exact since
// both carry a factor rho.  The centered first derivative alone would admit
// lattice doubler modes (its symbol vanishes at k h = pi) that leak spurious
// eigenvalues into the spectral gap wherever the potential is strong; a
// Wilson-type regularizer c_W h^2 beta (-Lap_h) lifts that band by an O(1)
// amount while perturbing smooth modes only at O(h^2), so second-order
// convergence and both exact matrix symmetries survive.
//
// Layout: x = (ptil_1, qtil_1, ptil_2, qtil_2), each length n.
struct LinearizedOperator {
    SolerModel model;
    double omega = 0;
    RadialGrid grid;
    int n = 0;             // interior nodes
    Eigen::VectorXd rho;   // interior node positions
    Eigen::VectorXd a, b;  // profile samples there
    double wilson = 0;     // doubler-lift coefficient c_W
    Eigen::MatrixXd H;     // 4n square, real

    int sector() const { return 2 * n; }

    Eigen::VectorXcd to_coords(const DoubledField& X) const;
    DoubledField from_coords(const Eigen::VectorXcd& x) const;
    DoubledField apply(const DoubledField& X) const;

    // stored coordinates of Sigma3 Phi (exact profile data); its image under
    // H serves as the per-grid discretization error scale
    Eigen::VectorXd stored_null_vector() const;
    double kernel_residual_scale() const;
};

LinearizedOperator assemble_linearized(const SolerModel& model, const RadialProfile& profile);

struct SymmetryReport {
    double sigma3_pairing;  // max |Sigma3 H - (Sigma3 H)^T|
    double conjugation;     // max |H + Sigma1 H Sigma1|
};
SymmetryReport symmetry_check(const LinearizedOperator& op);

struct Mode {
    cplx lambda;
    Eigen::VectorXcd vec;   // stored coordinates, unit norm
    int krein = 0;          // sign of <v, Sigma3 v> (0 when indefinite/null)
    double crosscheck = 0;  // |lambda - shift-invert refinement|
};

struct SpectrumResult {
    std::vector<Mode> gap_modes;     // discrete eigenvalues away from 0
    std::vector<cplx> zero_cluster;  // eigenvalues identified with 0
    double disc_error = 0;           // clustering scale (10 x kernel residual)
    double gap = 0;                  // m - omega
};
SpectrumResult discrete_spectrum(const LinearizedOperator& op, double delta_edge_frac = 1e-3);

struct KernelReport {
    double kernel_residual;  // ||H (Sigma3 Phi)|| / ||Sigma3 Phi||
    double jordan_residual;  // ||H dPhi/domega - Sigma3 Phi|| / ||Sigma3 Phi||
    int zero_cluster_dim;
};
KernelReport generalized_kernel_check(const LinearizedOperator& op, const DoubledField& dPhi,
                                      const SpectrumResult& spec);

// The eigenvector at -2*omega embedded in the essential spectrum, built
// pointwise from the profile; all residuals are sup norms over random sample
// points.
struct EmbeddedReport {
    double eigen_residual;   // |(D_m - omega - g(s0) beta + 2 omega) Y1|
    double scalar_residual;  // |linearized scalar invariant along Y| (identically 0)
    double parity_residual;  // |Y1(-x) + beta Y1(x)|
};
EmbeddedReport embedded_eigencheck(const RadialProfile& profile, const SolerModel& model,
                                   int n_points = 60, unsigned seed = 3);

// Projection onto the discrete subspace (zero cluster + gap modes) along the
// invariant bilinear pairing <x, Sigma3 y>, and its complement.
struct SpectralProjection {
    std::vector<Eigen::VectorXcd> directions;  // stored coordinates
    Eigen::MatrixXcd gram;
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu;
    double gram_condition = 0;

    Eigen::VectorXcd project_discrete(const Eigen::VectorXcd& x) const;
    Eigen::VectorXcd project_continuous(const Eigen::VectorXcd& x) const;
};
SpectralProjection spectral_projection(const LinearizedOperator& op, const SpectrumResult& spec,
                                       const DoubledField& dPhi);

}  // namespace soler
