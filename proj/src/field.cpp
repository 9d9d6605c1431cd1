#include "soler/field.hpp"

#include <cmath>
#include <stdexcept>

namespace soler {

BlockSpinor BlockSpinor::zero(const RadialGrid& g) {
    BlockSpinor u;
    u.grid = g;
    u.p = Eigen::VectorXcd::Zero(g.size());
    u.q = Eigen::VectorXcd::Zero(g.size());
    return u;
}

BlockSpinor BlockSpinor::conjugate() const {
    BlockSpinor u = *this;
    u.p = p.conjugate();
    u.q = q.conjugate();
    return u;
}

double BlockSpinor::norm() const { return std::sqrt(charge(*this)); }

DoubledField DoubledField::zero(const RadialGrid& g) { return {BlockSpinor::zero(g), BlockSpinor::zero(g)}; }

DoubledField DoubledField::physical(const BlockSpinor& u) { return {u, u.conjugate()}; }

double DoubledField::norm() const { return std::sqrt(std::abs(pair(*this, *this))); }

PartnerSpinor charge_conjugate(const BlockSpinor& u) {
    PartnerSpinor w;
    w.grid = u.grid;
    w.up = -u.q.conjugate();
    w.low = u.p.conjugate();
    return w;
}

BlockSpinor charge_conjugate(const PartnerSpinor& w) {
    BlockSpinor u;
    u.grid = w.grid;
    u.p = w.low.conjugate();
    u.q = -w.up.conjugate();
    return u;
}

PartnerSpinor partner_of_conjugate_slot(const BlockSpinor& slot) {
    PartnerSpinor w;
    w.grid = slot.grid;
    w.up = -slot.q;
    w.low = slot.p;
    return w;
}

DoubledField sigma3(const DoubledField& x) {
    DoubledField y = x;
    y.second.p = -y.second.p;
    y.second.q = -y.second.q;
    return y;
}

DoubledField sigma1(const DoubledField& x) { return {x.second, x.first}; }

DoubledField conj_swap(const DoubledField& x) { return {x.second.conjugate(), x.first.conjugate()}; }

DoubledField phase_rotate(const DoubledField& x, double theta) {
    DoubledField y = x;
    cplx e(std::cos(theta), std::sin(theta));
    y.first.p *= e;
    y.first.q *= e;
    y.second.p *= std::conj(e);
    y.second.q *= std::conj(e);
    return y;
}

DoubledField operator+(const DoubledField& a, const DoubledField& b) {
    DoubledField c = a;
    c.first.p += b.first.p;
    c.first.q += b.first.q;
    c.second.p += b.second.p;
    c.second.q += b.second.q;
    return c;
}

DoubledField operator-(const DoubledField& a, const DoubledField& b) {
    DoubledField c = a;
    c.first.p -= b.first.p;
    c.first.q -= b.first.q;
    c.second.p -= b.second.p;
    c.second.q -= b.second.q;
    return c;
}

DoubledField operator*(cplx s, const DoubledField& a) {
    DoubledField c = a;
    c.first.p *= s;
    c.first.q *= s;
    c.second.p *= s;
    c.second.q *= s;
    return c;
}

cplx pair(const BlockSpinor& x, const BlockSpinor& y) {
    if (!x.grid.same_as(y.grid)) throw std::invalid_argument("pair: grid mismatch");
    Eigen::VectorXd w = x.grid.weights_r2();
    cplx s = 0;
    for (int i = 0; i < x.grid.size(); ++i)
        s += w[i] * (x.p[i] * std::conj(y.p[i]) + x.q[i] * std::conj(y.q[i]));
    return 4.0 * M_PI * s;
}

cplx pair(const DoubledField& x, const DoubledField& y) {
    return pair(x.first, y.first) + pair(x.second, y.second);
}

cplx omega_pair(const DoubledField& k, const DoubledField& w) {
    if (!k.first.grid.same_as(w.first.grid)) throw std::invalid_argument("omega_pair: grid mismatch");
    Eigen::VectorXd wt = k.first.grid.weights_r2();
    cplx s = 0;
    for (int i = 0; i < k.first.grid.size(); ++i) {
        s += wt[i] * (k.first.p[i] * w.second.p[i] + k.first.q[i] * w.second.q[i]);
        s -= wt[i] * (k.second.p[i] * w.first.p[i] + k.second.q[i] * w.first.q[i]);
    }
    return 4.0 * M_PI * s;
}

double charge(const BlockSpinor& u) {
    Eigen::VectorXd w = u.grid.weights_r2();
    double s = 0;
    for (int i = 0; i < u.grid.size(); ++i) s += w[i] * (std::norm(u.p[i]) + std::norm(u.q[i]));
    return 4.0 * M_PI * s;
}

EnergyValue energy(const BlockSpinor& u, const SolerModel& model) {
    const RadialGrid& g = u.grid;
    Eigen::VectorXcd dp = fd_derivative(g, u.p);
    Eigen::VectorXcd dq = fd_derivative(g, u.q);
    Eigen::VectorXd w = g.weights_r2();
    double ek = 0, ep = 0;
    for (int i = 0; i < g.size(); ++i) {
        double rho = g.nodes[i];
        // (D_m u)_p = m p + q' + 2q/rho ,  (D_m u)_q = -p' - m q
        cplx two_q_over_rho = rho > 0 ? cplx(2.0 / rho) * u.q[i]
                                      : 2.0 * dq[i];  // q ~ q'(0) rho near 0
        cplx dmp = model.m * u.p[i] + dq[i] + two_q_over_rho;
        cplx dmq = -dp[i] - model.m * u.q[i];
        ek += w[i] * (dmp * std::conj(u.p[i]) + dmq * std::conj(u.q[i])).real();
        double s = std::norm(u.p[i]) - std::norm(u.q[i]);
        ep -= w[i] * nonlinearity_primitive(model, s);
    }
    ek *= 4.0 * M_PI;
    ep *= 4.0 * M_PI;
    return {ek + ep, ek, ep};
}

cplx interp_radial(const RadialGrid& g, const Eigen::VectorXcd& f, double rho) {
    const int n = g.size();
    if (rho < 0 || rho > g.r_max() + 1e-12) throw std::out_of_range("interp_radial: rho outside grid");
    // cubic Lagrange on the 4 nearest nodes
    int i = static_cast<int>(std::floor((rho - g.nodes[0]) / g.h()));
    i = std::max(0, std::min(i - 1, n - 4));
    cplx val = 0;
    for (int a = 0; a < 4; ++a) {
        double l = 1.0;
        for (int b = 0; b < 4; ++b) {
            if (a == b) continue;
            l *= (rho - g.nodes[i + b]) / (g.nodes[i + a] - g.nodes[i + b]);
        }
        val += l * f[i + a];
    }
    return val;
}

Vec4 reconstruct_spinor(const BlockSpinor& u, const Eigen::Vector3d& x) {
    double rho = x.norm();
    cplx pv = interp_radial(u.grid, u.p, rho);
    cplx qv = interp_radial(u.grid, u.q, rho);
    Eigen::Vector3d n = rho > 0 ? Eigen::Vector3d(x / rho) : Eigen::Vector3d(0, 0, 1);
    const cplx I(0, 1);
    Vec4 v;
    v[0] = pv;
    v[1] = 0;
    // (sigma.n) chi = (n3, n1 + i n2)^T
    v[2] = I * qv * n[2];
    v[3] = I * qv * cplx(n[0], n[1]);
    return v;
}

Vec4 reconstruct_spinor(const PartnerSpinor& w, const Eigen::Vector3d& x) {
    double rho = x.norm();
    cplx uv = interp_radial(w.grid, w.up, rho);
    cplx lv = interp_radial(w.grid, w.low, rho);
    Eigen::Vector3d n = rho > 0 ? Eigen::Vector3d(x / rho) : Eigen::Vector3d(0, 0, 1);
    const cplx I(0, 1);
    Vec4 v;
    // (sigma.n) chi2 = (n1 - i n2, -n3)^T
    v[0] = I * uv * cplx(n[0], -n[1]);
    v[1] = -I * uv * n[2];
    v[2] = 0;
    v[3] = lv;
    return v;
}

Vec8 reconstruct_doubled(const DoubledField& X, const Eigen::Vector3d& x) {
    Vec8 v;
    v.head<4>() = reconstruct_spinor(X.first, x);
    v.tail<4>() = reconstruct_spinor(partner_of_conjugate_slot(X.second), x);
    return v;
}

}  // namespace soler
