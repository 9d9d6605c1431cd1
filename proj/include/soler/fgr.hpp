#pragma once
#include "soler/resolvent.hpp"

namespace soler {

// Coupling vectors of the cubic term of the expanded energy: two discrete-mode
// insertions against one continuous field.  Indexed by multi-index pairs
// (mu, nu) over the positive internal eigenvalues, |mu + nu| = 2.  The vectors
// are the Riesz representers with respect to the bilinear map implemented by
// omega_pair, projected onto the continuous spectral subspace.
struct CouplingSet {
    std::vector<double> lambda;  // positive internal eigenvalues, ascending
    std::vector<std::pair<std::vector<int>, std::vector<int>>> indices;
    std::vector<DoubledField> vectors;
    std::vector<double> frequencies;  // lambda . (mu - nu) per entry
    double symmetry_residual = 0;     // max | K_mn + conj_swap(K_nm) | / scale
    double oracle_residual = 0;       // max relative mismatch vs the FD oracle
};

// Finite-difference directional derivative of the constrained energy
// K(u) = E(u) - omega Q(u), the functional whose critical point is the
// standing-wave profile in the e^{-i omega t} phase convention, at u = phi
// along the physical parts of dirs
// (order mixed partials, 5-point stencils per direction, one step Richardson).
// If accuracy is given it receives the Richardson increment.
double energy_directional_derivative(const RadialProfile& profile, const SolerModel& model,
                                     const std::vector<DoubledField>& dirs, int order,
                                     double* accuracy = nullptr);

// Assembles all K_{mu nu}, validates the trilinear form against the FD oracle
// on eigenvector pairs contracted with a localized test field (throws if the
// mismatch exceeds tol_oracle) and checks the conjugation symmetry
// K_{mu nu} = -C Sigma1 K_{nu mu}.
CouplingSet coupling_vectors(const RadialProfile& profile, const SolerModel& model,
                             const LinearizedOperator& L, const SpectrumResult& spec,
                             const SpectralProjection& proj, double tol_oracle = 1e-6);

struct FgrValue {
    double value = 0;
    double error_bar = 0;
};
// Gamma(r, G) = Im <R+(r) G, Sigma3 G> via the limiting-absorption
// application; refuses r within delta_edge of a branch point of the
// essential spectrum
FgrValue fgr_quadratic_form(const LinearizedOperator& L, double r, const DoubledField& G,
                            double delta_edge_frac = 0.02);

struct FgrReport {
    std::vector<double> lambda;
    std::vector<int> N;  // integer parts: N_j lam_j < m - omega < (N_j+1) lam_j
    bool h9_ok = false;
    bool h10_ok = false;
    bool h11_ok = false;
    std::vector<std::vector<int>> h10_violations, h11_violations;
    int n_used = 0;      // eigenvalue count after the combinatorial cap
    bool capped = false; // n was capped at 6
    std::vector<double> resonances;      // distinct r = lambda . alpha values
    bool window_ok = false;              // every resonant r < m + omega
    std::vector<double> gamma_diagonal;  // r * Gamma on each basis coupling
    double min_quotient = 0;             // minimal Rayleigh quotient found
    double eigen_bound = 0;              // smallest eigenvalue of the assembled form
    double error_bar = 0;
    int zeta_samples = 0;
    std::string verdict;  // "positive (leading order)" / "nonnegative-degenerate" / "violated"
};
// Evaluates the positivity hypothesis on the resonant set at leading order:
// quadratic form sum_r r * Gamma(r, H_r(zeta)) against sum |zeta^alpha|^2
FgrReport fgr_check(const RadialProfile& profile, const SolerModel& model,
                    const LinearizedOperator& L, const SpectrumResult& spec,
                    const CouplingSet& C, int zeta_samples = 200, unsigned seed = 1);

struct ScalarMonomial {
    std::vector<int> mu, nu;
    cplx k = 0;
};
struct HomologicalSolution {
    std::vector<ScalarMonomial> chi_scalars;  // k holds the chi coefficient
    std::vector<std::pair<std::vector<int>, std::vector<int>>> vec_indices;
    std::vector<DoubledField> chi_vectors;
    std::vector<double> vec_frequencies;
    std::vector<double> inverse_residuals;  // per vector, weighted
    std::vector<double> error_bars;
};
// One round of the homological equation: scalar monomial coefficients are
// divided by i lambda.(mu - nu); vector coefficients pass through the
// boundary-value resolvent at lambda.(mu - nu).  Terms with |mu + nu| > M0
// are ignored.  Throws on normal-form input and on small divisors
// (|lambda.(mu - nu)| below half the smallest eigenvalue, or within it of
// the discrete spectrum for vectors).
HomologicalSolution solve_homological(const LinearizedOperator& L, const SpectrumResult& spec,
                                      const std::vector<ScalarMonomial>& k_coeffs,
                                      const CouplingSet& K_vecs, int M0);

}  // namespace soler
