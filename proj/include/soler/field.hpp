#pragma once
#include "soler/algebra.hpp"
#include "soler/grid.hpp"
#include "soler/model.hpp"

namespace soler {

// Field in the invariant angular block:
//   u(x) = ( p(rho) chi, i q(rho) (sigma.xhat) chi ),  chi = (1,0)^T.
// q(0) = 0 for regularity of the sigma.xhat factor.
struct BlockSpinor {
    RadialGrid grid;
    Eigen::VectorXcd p, q;

    static BlockSpinor zero(const RadialGrid& g);
    BlockSpinor conjugate() const;
    double norm() const;  // sqrt(charge)
};

// Field in the conjugate angular sector:
//   w(x) = ( i up(rho) (sigma.xhat) chi2, low(rho) chi2 ),  chi2 = (0,1)^T.
struct PartnerSpinor {
    RadialGrid grid;
    Eigen::VectorXcd up, low;
};

// Doubled field: first slot holds r, second slot holds the block amplitudes of
// r^* (equivalently r^c after the constant unitary i beta alpha2).  A field is
// "physical" when second = conj(first).
struct DoubledField {
    BlockSpinor first, second;

    static DoubledField zero(const RadialGrid& g);
    static DoubledField physical(const BlockSpinor& u);  // (u, u*)
    double norm() const;
};

// ---- pointwise / algebraic maps ----

// charge conjugation C u = i beta alpha2 u*, mapping between the two sectors
PartnerSpinor charge_conjugate(const BlockSpinor& u);
BlockSpinor charge_conjugate(const PartnerSpinor& w);

// the conjugate slot viewed as a field of the partner sector (r^c of r when
// the slot holds r^*):  (p,q) -> Partner{up = -q, low = p}
PartnerSpinor partner_of_conjugate_slot(const BlockSpinor& slot);

DoubledField sigma3(const DoubledField& x);                     // (x1, -x2)
DoubledField sigma1(const DoubledField& x);                     // (x2, x1)
DoubledField conj_swap(const DoubledField& x);                  // C Sigma1 in stored coordinates
DoubledField phase_rotate(const DoubledField& x, double theta); // e^{i Sigma3 theta} x

DoubledField operator+(const DoubledField& a, const DoubledField& b);
DoubledField operator-(const DoubledField& a, const DoubledField& b);
DoubledField operator*(cplx s, const DoubledField& a);

// ---- pairings and invariants ----

// <X, Y*> = 4 pi  \int (X1 . conj(Y1) + X2 . conj(Y2)) rho^2 drho
cplx pair(const DoubledField& x, const DoubledField& y);
cplx pair(const BlockSpinor& x, const BlockSpinor& y);

// bilinear transcription of <K, i beta alpha2 Sigma3 Sigma1 W>:
//   4 pi \int (K1 . W2 - K2 . W1) rho^2 drho   (no conjugation)
cplx omega_pair(const DoubledField& k, const DoubledField& w);

double charge(const BlockSpinor& u);

struct EnergyValue {
    double total, kinetic, potential;
};
EnergyValue energy(const BlockSpinor& u, const SolerModel& model);

// ---- 3D reconstruction (used by the oracles and pointwise checks) ----

Vec4 reconstruct_spinor(const BlockSpinor& u, const Eigen::Vector3d& x);
Vec4 reconstruct_spinor(const PartnerSpinor& w, const Eigen::Vector3d& x);
// 8-component reconstruction (r, r^c) of a doubled field
Vec8 reconstruct_doubled(const DoubledField& X, const Eigen::Vector3d& x);

// radial interpolation helper (cubic Lagrange on the grid)
cplx interp_radial(const RadialGrid& g, const Eigen::VectorXcd& f, double rho);

}  // namespace soler
