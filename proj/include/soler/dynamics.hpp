#pragma once
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <memory>

#include "soler/resolvent.hpp"

namespace soler {

struct EvolveOptions {
    double dt = 1e-3;
    int order = 2;              // 2 = Strang, 4 = triple-jump composition
    bool absorbing = false;     // complex absorbing layer on the outer part
    double cap_frac = 0.2;      // fraction of the domain covered by the layer
    double cap_strength = 5.0;  // peak damping rate
    int stride = 100;           // steps between recorded samples
    double wilson = -1;         // doubler-lift coefficient; < 0 = derive from data
};

// Doubler-lift coefficient 0.5 max |g(s0)|, the same rule the linearization
// assembly uses.  The value matters beyond accuracy: a mismatched (notably a
// much larger) coefficient makes the split standing-wave orbit weakly
// Floquet-unstable through an origin-localized lattice mode, which shows up
// only on multi-thousand-period horizons.
double doubler_lift(const SolerModel& model, const RadialProfile& profile);
double doubler_lift(const SolerModel& model, const BlockSpinor& u);

// Nonlinear evolution in the invariant block: i u_t = D u - g(u ubar) beta u.
// Strang splitting; the nonlinear substep is exact (it conserves
// s = |p|^2 - |q|^2 pointwise, so it is a pure position-dependent phase), the
// linear substep is Crank-Nicolson on the weighted-amplitude discretization
// and is exactly norm preserving without the absorbing layer.  opt.wilson
// must be set (evolve() fills it in from the initial state when left < 0).
class Stepper {
  public:
    Stepper(const SolerModel& model, const RadialGrid& grid, double dt,
            const EvolveOptions& opt = {});

    void step(Eigen::VectorXcd& x) const;       // one dt on tilde coordinates
    void step_back(Eigen::VectorXcd& x) const;  // exact inverse of step

    Eigen::VectorXcd to_coords(const BlockSpinor& u) const;
    BlockSpinor from_coords(const Eigen::VectorXcd& x) const;

    const Eigen::SparseMatrix<double>& sector_matrix() const { return S_; }
    int interior() const { return n_; }
    double dt() const { return dt_; }
    const RadialGrid& grid() const { return grid_; }
    const SolerModel& model() const { return model_; }
    const Eigen::VectorXd& rho() const { return rho_; }

  private:
    // one symmetric Strang stage with its Crank-Nicolson factorizations;
    // a 4th-order step is the triple-jump composition of three stages
    struct Stage {
        double tau;
        Eigen::SparseLU<Eigen::SparseMatrix<cplx>> lu_f, lu_b;
        Eigen::SparseMatrix<cplx> B_f, B_b;
    };

    SolerModel model_;
    RadialGrid grid_;
    int n_;
    double dt_;
    Eigen::VectorXd rho_;
    double wilson_;
    Eigen::VectorXd cap_;             // absorbing rate W(rho) >= 0
    Eigen::SparseMatrix<double> S_;   // one-sector linear operator, symmetric
    std::vector<std::unique_ptr<Stage>> stages_;

    void substep_nonlinear(Eigen::VectorXcd& x, double tau) const;
};

// Newton refinement of the sampled profile to the stationary state of the
// discretized equation, S x - g(s) beta x = omega x; makes the standing wave
// an exact orbit of the semi-discrete flow
BlockSpinor discrete_stationary(const SolerModel& model, const RadialProfile& profile,
                                const RadialGrid& grid, double tol = 1e-12);

struct ModulationResult {
    double omega = 0, theta = 0;
    DoubledField R;        // e^{-i Sigma3 theta} U - Phi_omega
    double ortho_phi = 0;  // |Re<R, Phi*>| constraint residual
    double ortho_dphi = 0; // |Im<R, dPhi*>| constraint residual
    int iterations = 0;
    bool converged = false;
};
// fit (omega, theta) so the remainder is orthogonal to the generalized
// kernel; Newton on the two real constraint functions.  The reference states
// are the stationary points of the discretized flow (Newton-refined), so an
// exact numerical orbit leaves a remainder at rounding level
ModulationResult modulate(const SolerModel& model, const BlockSpinor& u, double omega_guess,
                          double theta_guess, const RadialGrid& grid, int max_iter = 25,
                          double tol = 1e-13);

struct ModeAmplitudes {
    std::vector<cplx> z;  // discrete-mode coefficients
    DoubledField f;       // continuous part
};
ModeAmplitudes extract_modes(const LinearizedOperator& L, const SpectralProjection& proj,
                             const SpectrumResult& spec, const DoubledField& R);

struct ModulationTrack {
    std::vector<double> times;
    std::vector<double> omega, theta;
    std::vector<std::vector<double>> zabs;  // |z_j| per sample
    std::vector<double> fnorm;              // weighted norm of the continuous part
    std::vector<double> Q, E;
    std::vector<char> valid;                // modulation converged at this sample
};

struct EvolveResult {
    BlockSpinor final;
    double t_final = 0;
    ModulationTrack track;
};

// context enabling per-sample modulation and mode extraction during a run
struct ModulationContext {
    const LinearizedOperator* L = nullptr;
    const SpectralProjection* proj = nullptr;
    const SpectrumResult* spec = nullptr;
    double omega0 = 0;
    double tau = 1.5;  // weight for fnorm
};

EvolveResult evolve(const SolerModel& model, const BlockSpinor& u0, double T,
                    const EvolveOptions& opt, const ModulationContext* ctx = nullptr);

enum class StabilityVerdict { consistent, inconclusive, inconsistent };

struct TrendReport {
    double z_slope = 0;      // log|z| trend over the second half-window
    double f_slope = 0;      // log fnorm trend
    double omega_band = 0;   // spread of omega over the second half
    double omega_final = 0;
    double f_final = 0;
    StabilityVerdict verdict = StabilityVerdict::inconclusive;
};
// trend classification of a finished track; standalone so synthetic tracks
// can be fed through the same verdict logic
TrendReport classify_track(const ModulationTrack& track);

struct StabilityReport {
    TrendReport trend;
    ModulationTrack track;
};
StabilityReport stability_experiment(const SolerModel& model, const RadialProfile& profile,
                                     const LinearizedOperator& L, const SpectrumResult& spec,
                                     const SpectralProjection& proj, int mode_index,
                                     double amplitude, double T, const EvolveOptions& opt);

struct ConservationReport {
    double q_drift = 0;  // max relative drift
    double e_drift = 0;
    bool q_monotone_decreasing = false;  // relevant for absorbing runs
};
ConservationReport conservation_report(const ModulationTrack& track);

}  // namespace soler
