#include <doctest.h>

#include <cmath>
#include <random>

#include "soler/resolvent.hpp"

using namespace soler;

namespace {

struct Setup {
    SolerModel model = SolerModel::cubic(1.0);
    double omega = 0.9;
    RadialProfile prof;
    LinearizedOperator L;

    Setup() {
        RadialGrid g = RadialGrid::make_uniform(300, 30.0);
        auto br = find_bracket(model, omega);
        prof = solve_profile(model, omega, *br, g);
        L = assemble_linearized(model, prof);
    }
    static const Setup& get() {
        static Setup s;
        return s;
    }
};

// smaller operator for the dense Birman-Schwinger eigenproblems
struct SmallSetup {
    SolerModel model = SolerModel::cubic(1.0);
    double omega = 0.9;
    RadialProfile prof;
    LinearizedOperator L;

    SmallSetup() {
        RadialGrid g = RadialGrid::make_uniform(120, 24.0);
        auto br = find_bracket(model, omega);
        prof = solve_profile(model, omega, *br, g);
        L = assemble_linearized(model, prof);
    }
    static const SmallSetup& get() {
        static SmallSetup s;
        return s;
    }
};

// block action of D_m - Lambda on radial amplitudes, centered differences
void block_dirac_minus(const RadialGrid& g, double m, cplx Lambda, const Eigen::VectorXcd& p,
                       const Eigen::VectorXcd& q, Eigen::VectorXcd& rp, Eigen::VectorXcd& rq) {
    Eigen::VectorXcd dp = fd_derivative(g, p), dq = fd_derivative(g, q);
    int N = g.size();
    rp.resize(N);
    rq.resize(N);
    for (int i = 0; i < N; ++i) {
        double rho = g.nodes[i];
        cplx two_q_over_rho = rho > 0 ? 2.0 * q[i] / rho : 2.0 * dq[i];
        rp[i] = (m - Lambda) * p[i] + dq[i] + two_q_over_rho;
        rq[i] = -dp[i] - (m + Lambda) * q[i];
    }
}

}  // namespace

TEST_CASE("kappa branch: gap values real, boundary values match the epsilon limit") {
    double m = 1.0;
    CHECK(resolvent_kappa(cplx(0.3, 0), m, +1).real() == doctest::Approx(std::sqrt(1 - 0.09)));
    CHECK(std::abs(resolvent_kappa(cplx(0.3, 0), m, +1).imag()) < 1e-14);
    for (double lam : {1.5, -1.5, 2.8, -2.8}) {
        for (int side : {+1, -1}) {
            cplx bdry = resolvent_kappa(cplx(lam, 0), m, side);
            cplx lim = std::sqrt(m * m - std::pow(cplx(lam, side * 1e-9), 2));
            CHECK(std::abs(bdry - lim) < 1e-6);
            CHECK(bdry.real() == doctest::Approx(0.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("free kernel: closed form at Lambda=0 and homogeneity off the diagonal") {
    double m = 1.0;
    Eigen::Vector3d y(0, 0, 0), x(0, 0, 1);
    Mat4 K = free_resolvent_kernel(cplx(0, 0), x, y, m);
    // kappa = m = 1, r = 1
    double e = std::exp(-1.0) / (4.0 * M_PI);
    Mat4 ref = Mat4::Zero();
    ref.block<2, 2>(0, 0) = m * Mat2::Identity() * e;
    ref.block<2, 2>(2, 2) = -m * Mat2::Identity() * e;
    ref.block<2, 2>(0, 2) = cplx(0, 1) * pauli(3) * e;
    ref.block<2, 2>(2, 0) = cplx(0, 1) * pauli(3) * e;
    ref += cplx(0, 1) * alpha_mat(3) * e;  // 1/r^2 term, r = 1
    CHECK((K - ref).cwiseAbs().maxCoeff() < 1e-14);

    // away from the diagonal each column solves (D_m - Lambda) u = 0;
    // check with a 5-point finite difference in 3D
    cplx Lambda(0.4, 0);
    Eigen::Vector3d x0(0.7, -0.4, 1.1);
    double h = 1e-2;
    for (int col = 0; col < 4; ++col) {
        Vec4 Du = Vec4::Zero();
        for (int j = 0; j < 3; ++j) {
            Eigen::Vector3d e3 = Eigen::Vector3d::Zero();
            e3[j] = 1;
            auto u = [&](double s) -> Vec4 {
                return free_resolvent_kernel(Lambda, x0 + s * e3, y, m).col(col);
            };
            Vec4 d = (-u(2 * h) + 8.0 * u(h) - 8.0 * u(-h) + u(-2 * h)) / (12 * h);
            Du += cplx(0, -1) * alpha_mat(j + 1) * d;
        }
        Du += m * beta_mat() * free_resolvent_kernel(Lambda, x0, y, m).col(col);
        Du -= Lambda * free_resolvent_kernel(Lambda, x0, y, m).col(col);
        CHECK(Du.cwiseAbs().maxCoeff() < 1e-6);
    }
}

TEST_CASE("free kernel: holomorphy in the gap and adjoint symmetry") {
    double m = 1.0;
    Eigen::Vector3d y(0.1, 0.2, -0.3), x(1.0, -0.5, 0.7);
    cplx L0(0.2, 0.15);
    double h = 1e-5;
    // Cauchy-Riemann: dK/d(Re) = -i dK/d(Im)
    Mat4 dre = (free_resolvent_kernel(L0 + h, x, y, m) - free_resolvent_kernel(L0 - h, x, y, m)) /
               (2 * h);
    Mat4 dim = (free_resolvent_kernel(L0 + cplx(0, h), x, y, m) -
                free_resolvent_kernel(L0 - cplx(0, h), x, y, m)) /
               (2 * h);
    CHECK((dre - cplx(0, -1) * dim).cwiseAbs().maxCoeff() < 1e-6);

    // R(Lambda)^* = R(conj(Lambda)) with arguments swapped
    Mat4 K = free_resolvent_kernel(L0, x, y, m);
    Mat4 Kc = free_resolvent_kernel(std::conj(L0), y, x, m);
    CHECK((K.adjoint() - Kc).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("radial free resolvent inverts the block operator") {
    RadialGrid g = RadialGrid::make_uniform(400, 25.0);
    int N = g.size();
    Eigen::VectorXcd p(N), q(N);
    for (int i = 0; i < N; ++i) {
        double r = g.nodes[i];
        p[i] = std::exp(-r * r);
        q[i] = r * std::exp(-r * r);
    }
    double m = 1.0;
    // the 1/rho^2 Green factors amplify the first-cell quadrature error, so
    // the sup is taken away from the origin neighborhood; refinement of the
    // near-origin values is checked separately below
    int i0 = static_cast<int>(std::ceil(0.5 / g.h()));
    for (cplx Lambda : {cplx(0.3, 0), cplx(-0.85, 0), cplx(0.2, 0.4)}) {
        Eigen::VectorXcd rp, rq;
        free_dirac_resolvent_radial(Lambda, m, +1, g, p, q, rp, rq);
        Eigen::VectorXcd cp, cq;
        block_dirac_minus(g, m, Lambda, rp, rq, cp, cq);
        double err = 0;
        for (int i = i0; i < N - 2; ++i)
            err = std::max(err, std::abs(cp[i] - p[i]) + std::abs(cq[i] - q[i]));
        CHECK(err < 1e-2);  // second-order quadrature + differentiation at h = 1/16
        // and the composition the other way: R (D - Lambda) u = u
        block_dirac_minus(g, m, Lambda, p, q, cp, cq);
        free_dirac_resolvent_radial(Lambda, m, +1, g, cp, cq, rp, rq);
        err = 0;
        for (int i = i0; i < N - 2; ++i)
            err = std::max(err, std::abs(rp[i] - p[i]) + std::abs(rq[i] - q[i]));
        CHECK(err < 1e-2);
    }
    // near-origin values converge under refinement
    Eigen::VectorXcd rp1, rq1;
    free_dirac_resolvent_radial(cplx(0.3, 0), m, +1, g, p, q, rp1, rq1);
    RadialGrid g2 = RadialGrid::make_uniform(1600, 25.0);
    Eigen::VectorXcd p2(g2.size()), q2(g2.size()), rp2, rq2;
    for (int i = 0; i < g2.size(); ++i) {
        double r = g2.nodes[i];
        p2[i] = std::exp(-r * r);
        q2[i] = r * std::exp(-r * r);
    }
    free_dirac_resolvent_radial(cplx(0.3, 0), m, +1, g2, p2, q2, rp2, rq2);
    for (double z : {g.h(), 2 * g.h(), 4 * g.h()}) {
        CHECK(std::abs(interp_radial(g, rq1, z) - interp_radial(g2, rq2, z)) < 1e-2);
        CHECK(std::abs(interp_radial(g, rp1, z) - interp_radial(g2, rp2, z)) < 5e-3);
    }
}

TEST_CASE("radial free resolvent agrees with the 3D kernel quadrature") {
    // apply the radial Green function to a localized block field and compare
    // with direct 3D quadrature of the 4x4 kernel at sample points on the axis
    RadialGrid g = RadialGrid::make_uniform(200, 16.0);
    int N = g.size();
    Eigen::VectorXcd p(N), q(N);
    for (int i = 0; i < N; ++i) {
        double r = g.nodes[i];
        p[i] = std::exp(-r * r);
        q[i] = r * std::exp(-r * r);
    }
    double m = 1.0;
    cplx Lambda(0.35, 0);
    Eigen::VectorXcd rp, rq;
    free_dirac_resolvent_radial(Lambda, m, +1, g, p, q, rp, rq);

    BlockSpinor u = BlockSpinor::zero(g);
    u.p = p;
    u.q = q;
    // midpoint quadrature in spherical coordinates around y-support
    int nr = 160, nt = 48, nf = 24;
    double Rq = 8.0;
    for (double z : {0.8, 1.7, 3.1}) {
        Eigen::Vector3d x(0, 0, z);
        Vec4 acc = Vec4::Zero();
        for (int ir = 0; ir < nr; ++ir) {
            double r = (ir + 0.5) * Rq / nr;
            for (int it = 0; it < nt; ++it) {
                double th = (it + 0.5) * M_PI / nt;
                for (int ifi = 0; ifi < nf; ++ifi) {
                    double ph = (ifi + 0.5) * 2 * M_PI / nf;
                    Eigen::Vector3d y(r * std::sin(th) * std::cos(ph),
                                      r * std::sin(th) * std::sin(ph), r * std::cos(th));
                    double w = r * r * std::sin(th) * (Rq / nr) * (M_PI / nt) * (2 * M_PI / nf);
                    acc += w * free_resolvent_kernel(Lambda, x, y, m) * reconstruct_spinor(u, y);
                }
            }
        }
        cplx want_p = interp_radial(g, rp, z);
        cplx want_q = interp_radial(g, rq, z);
        // on the +z axis the block ansatz reads (p, 0, i q, 0)
        CHECK(std::abs(acc[0] - want_p) < 5e-3 * std::abs(want_p) + 2e-6);
        CHECK(std::abs(acc[2] - cplx(0, 1) * want_q) < 5e-3 * std::abs(want_q) + 2e-6);
        CHECK(std::abs(acc[1]) < 1e-6);
        CHECK(std::abs(acc[3]) < 1e-6);
    }
}

TEST_CASE("doubled free resolvent: slotwise inversion with the stored signs") {
    RadialGrid g = RadialGrid::make_uniform(400, 25.0);
    double m = 1.0, omega = 0.9;
    DoubledField v = DoubledField::zero(g);
    for (int i = 0; i < g.size(); ++i) {
        double r = g.nodes[i];
        v.first.p[i] = std::exp(-r * r);
        v.first.q[i] = r * std::exp(-r * r);
        v.second.p[i] = 0.5 * std::exp(-0.8 * r * r);
        v.second.q[i] = -r * std::exp(-0.8 * r * r);
    }
    cplx lambda(0.05, 0);
    DoubledField w = free_resolvent_apply_radial(m, omega, lambda, +1, v);
    // first slot solves (D - omega - lambda) w1 = v1
    Eigen::VectorXcd cp, cq;
    int i0 = static_cast<int>(std::ceil(0.5 / g.h()));
    block_dirac_minus(g, m, lambda + omega, w.first.p, w.first.q, cp, cq);
    double err = 0;
    for (int i = i0; i < g.size() - 2; ++i)
        err = std::max(err, std::abs(cp[i] - v.first.p[i]) + std::abs(cq[i] - v.first.q[i]));
    CHECK(err < 1e-2);
    // second slot solves (-(D - omega) - lambda) w2 = v2
    block_dirac_minus(g, m, omega - lambda, w.second.p, w.second.q, cp, cq);
    err = 0;
    for (int i = i0; i < g.size() - 2; ++i)
        err = std::max(err, std::abs(cp[i] + v.second.p[i]) + std::abs(cq[i] + v.second.q[i]));
    CHECK(err < 1e-2);
}

TEST_CASE("Birman-Schwinger eigenvalue passes through -1 at the gap eigenvalue") {
    const auto& S = SmallSetup::get();
    // the operator kernel at lambda = 0 pins an eigenvalue of R0 V at -1
    BirmanSchwingerResult zero = birman_schwinger_eigen(S.L, 0.0, +1);
    CHECK(zero.min_dist < 1e-2);
    // the discrete eigenvalue in the gap (matrix value on the fine grid:
    // lambda ~ 0.098) produces a sharp crossing; locate it by a local scan
    // and compare against the independently discretized matrix spectrum
    double lam0 = 0;
    {
        SpectrumResult spec = discrete_spectrum(Setup::get().L);
        for (const auto& md : spec.gap_modes)
            if (md.lambda.real() > 0) lam0 = md.lambda.real();
    }
    REQUIRE(lam0 > 0);
    double best = 1e9, best_lam = 0;
    for (double lam = lam0 - 0.006; lam <= lam0 + 0.0061; lam += 0.002) {
        BirmanSchwingerResult bs = birman_schwinger_eigen(S.L, lam, +1);
        if (bs.min_dist < best) {
            best = bs.min_dist;
            best_lam = lam;
        }
    }
    CHECK(best < 5e-3);
    CHECK(std::abs(best_lam - lam0) < 6e-3);
    // and well away from the spectrum the branch stays clear of -1
    BirmanSchwingerResult off = birman_schwinger_eigen(S.L, 0.7 * lam0, +1);
    CHECK(off.min_dist > 2.0 * best);
}

TEST_CASE("threshold scan reports all four endpoints with consistent verdicts") {
    const auto& S = SmallSetup::get();
    auto reps = threshold_resonance_scan(S.L);
    REQUIRE(reps.size() == 4);
    double gap = S.model.m - S.omega, top = S.model.m + S.omega;
    CHECK(reps[0].threshold == doctest::Approx(gap));
    CHECK(reps[1].threshold == doctest::Approx(-gap));
    CHECK(reps[2].threshold == doctest::Approx(top));
    CHECK(reps[3].threshold == doctest::Approx(-top));
    for (const auto& r : reps) {
        double mn = std::min(r.min_dist_plus, r.min_dist_minus);
        CHECK(r.resonance_free == (mn > 0.05));
        if (r.resonance_free) CHECK(r.character == "none");
        CHECK(r.l2_fraction >= 0.0);
        CHECK(r.l2_fraction <= 1.0);
    }
    // the upper thresholds +-(m+omega) should be clean for this model
    CHECK(reps[2].resonance_free);
    CHECK(reps[3].resonance_free);
}

TEST_CASE("limiting absorption application: extrapolation and inverse check") {
    const auto& S = Setup::get();
    DoubledField v = DoubledField::zero(S.L.grid);
    for (int i = 0; i < S.L.grid.size(); ++i) {
        double r = S.L.grid.nodes[i];
        v.first.p[i] = std::exp(-0.5 * r * r);
        v.first.q[i] = r * std::exp(-0.5 * r * r);
        v.second.p[i] = std::exp(-0.5 * r * r);
        v.second.q[i] = r * std::exp(-0.5 * r * r);
    }
    double gap = S.model.m - S.omega;
    ResolventQuery q = ResolventQuery::boundary(0.04, +1, gap);
    ResolventApplication ra = resolvent_apply(S.L, q, v);
    CHECK(ra.inverse_check < 1e-2);
    CHECK(ra.error_bar < 1e-2);
    // inside the gap, away from eigenvalues, the boundary values from both
    // sides agree with the direct real solve
    Eigen::VectorXcd rhs = S.L.to_coords(v);
    Eigen::MatrixXd A = S.L.H;
    A.diagonal().array() -= 0.04;
    Eigen::VectorXcd direct = A.partialPivLu().solve(rhs.real().eval()).cast<cplx>() +
                              cplx(0, 1) * A.partialPivLu().solve(rhs.imag().eval()).cast<cplx>();
    Eigen::VectorXcd got = S.L.to_coords(ra.value);
    CHECK((got - direct).norm() / direct.norm() < 5e-3);
}

TEST_CASE("weighted resolvent norm scan stays bounded along the essential spectrum") {
    const auto& S = SmallSetup::get();
    SpectrumResult spec = discrete_spectrum(S.L);
    const double dw = 1e-3;
    RadialProfile ph =
        solve_profile(S.model, S.omega + dw, {0.9 * S.prof.a0, 1.1 * S.prof.a0}, S.L.grid);
    RadialProfile pl =
        solve_profile(S.model, S.omega - dw, {0.9 * S.prof.a0, 1.1 * S.prof.a0}, S.L.grid);
    BlockSpinor d = BlockSpinor::zero(S.L.grid);
    d.p = ((ph.a - pl.a) / (2 * dw)).cast<cplx>();
    d.q = ((ph.b - pl.b) / (2 * dw)).cast<cplx>();
    SpectralProjection proj = spectral_projection(S.L, spec, DoubledField::physical(d));
    double gap = S.model.m - S.omega;
    std::vector<double> lams = {1.05 * gap, 1.3 * gap, 2.0 * gap, 4.0 * gap};
    LapScanResult scan = lap_bound_scan(S.L, lams, 1.5, &proj);
    REQUIRE(scan.norms.size() == lams.size());
    for (double nv : scan.norms) {
        CHECK(std::isfinite(nv));
        CHECK(nv > 0);
    }
    CHECK(scan.sup_norm < 1e4);
}

TEST_CASE("free propagator is exactly unitary and has the group property") {
    const auto& S = Setup::get();
    FreePropagator fp = make_free_propagator(S.model, S.omega, S.L.grid);
    DoubledField psi = DoubledField::zero(S.L.grid);
    for (int i = 0; i < S.L.grid.size(); ++i) {
        double r = S.L.grid.nodes[i];
        psi.first.p[i] = std::exp(-r * r) * cplx(1.0, 0.3);
        psi.first.q[i] = r * std::exp(-r * r);
        psi.second.p[i] = 0.7 * std::exp(-r * r);
        psi.second.q[i] = -0.2 * r * std::exp(-r * r);
    }
    double n0 = psi.norm();
    DoubledField a = fp.apply(psi, 2.7);
    CHECK(std::abs(a.norm() - n0) < 1e-11 * n0);
    DoubledField b = fp.apply(a, 1.4);
    DoubledField c = fp.apply(psi, 4.1);
    CHECK((b - c).norm() < 1e-10 * n0);
    DoubledField back = fp.apply(a, -2.7);
    CHECK((back - psi).norm() < 1e-10 * n0);
}

TEST_CASE("free dispersive decay in the weighted norm") {
    SolerModel model = SolerModel::cubic(1.0);
    RadialGrid g = RadialGrid::make_uniform(360, 36.0);
    FreePropagator fp = make_free_propagator(model, 0.9, g);
    DoubledField psi = DoubledField::zero(g);
    for (int i = 0; i < g.size(); ++i) {
        double r = g.nodes[i];
        psi.first.p[i] = std::exp(-r * r);
        psi.first.q[i] = r * std::exp(-r * r);
    }
    std::vector<double> ts;
    for (double t = 1.0; t <= 24.0; t += 1.0) ts.push_back(t);
    DecayFit fit = decay_fit(fp, psi, 1.5, ts);
    CHECK(fit.slope > -1.65);
    CHECK(fit.slope < -1.35);
}

TEST_CASE("wave operator: inverse composition returns the input") {
    const auto& S = Setup::get();
    DoubledField v = DoubledField::zero(S.L.grid);
    for (int i = 0; i < S.L.grid.size(); ++i) {
        double r = S.L.grid.nodes[i];
        v.first.p[i] = std::exp(-0.7 * r * r);
        v.first.q[i] = r * std::exp(-0.7 * r * r);
        v.second.p[i] = std::exp(-0.7 * r * r);
        v.second.q[i] = r * std::exp(-0.7 * r * r);
    }
    double T = 4.0;
    WaveOperatorResult w = wave_operator(S.L, v, T, +1);
    WaveOperatorResult z = wave_operator(S.L, w.value, T, -1);
    CHECK((z.value - v).norm() / v.norm() < 2e-2);
    CHECK(std::isfinite(w.cauchy_increment));
}
