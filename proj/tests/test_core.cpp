#include <doctest.h>

#include <cmath>
#include <random>

#include "soler/field.hpp"
#include "soler/model.hpp"

using namespace soler;

namespace {

// smooth decaying test amplitudes with analytic derivatives
double tp(double r) { return std::exp(-0.5 * r * r); }
double tdp(double r) { return -r * std::exp(-0.5 * r * r); }
double tq(double r) { return r * std::exp(-0.5 * r * r); }
double tdq(double r) { return (1.0 - r * r) * std::exp(-0.5 * r * r); }

BlockSpinor test_block(const RadialGrid& g) {
    BlockSpinor u = BlockSpinor::zero(g);
    for (int i = 0; i < g.size(); ++i) {
        u.p[i] = tp(g.nodes[i]);
        u.q[i] = tq(g.nodes[i]);
    }
    return u;
}

Eigen::Vector3d rand_dir(std::mt19937& rng) {
    std::normal_distribution<double> n;
    Eigen::Vector3d v(n(rng), n(rng), n(rng));
    return v / v.norm();
}

}  // namespace

TEST_CASE("Dirac matrix algebra") {
    Mat4 b = beta_mat();
    CHECK((b * b - Mat4::Identity()).norm() == doctest::Approx(0.0));
    for (int j = 1; j <= 3; ++j) {
        Mat4 aj = alpha_mat(j);
        CHECK((aj * b + b * aj).norm() == doctest::Approx(0.0));
        for (int k = 1; k <= 3; ++k) {
            Mat4 ak = alpha_mat(k);
            Mat4 anti = aj * ak + ak * aj;
            CHECK((anti - (j == k ? 2.0 : 0.0) * Mat4::Identity()).norm() ==
                  doctest::Approx(0.0).epsilon(1e-14));
        }
    }
}

TEST_CASE("charge conjugation on C^4") {
    std::mt19937 rng(11);
    std::normal_distribution<double> n;
    for (int t = 0; t < 20; ++t) {
        Vec4 v;
        for (int i = 0; i < 4; ++i) v[i] = cplx(n(rng), n(rng));
        Vec4 cv = charge_conjugate4(v);
        // involution
        CHECK((charge_conjugate4(cv) - v).norm() == doctest::Approx(0.0).epsilon(1e-14));
        // antilinearity
        Vec4 civ = charge_conjugate4(Vec4(cplx(0, 1) * v));
        CHECK((civ + cplx(0, 1) * cv).norm() == doctest::Approx(0.0).epsilon(1e-14));
        // anticommutes with beta, flips the scalar invariant
        CHECK((charge_conjugate4(Vec4(beta_mat() * v)) + beta_mat() * cv).norm() ==
              doctest::Approx(0.0).epsilon(1e-13));
        CHECK(lorentz_scalar(cv) == doctest::Approx(-lorentz_scalar(v)).epsilon(1e-12));
    }
}

TEST_CASE("doubled-space Sigma matrices") {
    Mat8 s1 = sigma_big(1), s2 = sigma_big(2), s3 = sigma_big(3);
    CHECK((s1 * s1 - Mat8::Identity()).norm() == doctest::Approx(0.0));
    CHECK((s2 * s2 - Mat8::Identity()).norm() == doctest::Approx(0.0));
    CHECK((s3 * s3 - Mat8::Identity()).norm() == doctest::Approx(0.0));
    CHECK((s1 * s2 - cplx(0, 1) * s3).norm() == doctest::Approx(0.0));
    CHECK((s1 * s3 + s3 * s1).norm() == doctest::Approx(0.0));
}

TEST_CASE("nonlinearity models") {
    SolerModel cub = SolerModel::cubic();
    auto v = nonlinearity_eval(cub, 0.7);
    CHECK(v.g == doctest::Approx(0.7));
    CHECK(v.g1 == doctest::Approx(1.0));
    CHECK(v.g2 == doctest::Approx(0.0));
    CHECK(nonlinearity_primitive(cub, 0.7) == doctest::Approx(0.5 * 0.49));

    SolerModel poly = SolerModel::polynomial(1.0, {1.0, -0.3, 0.05});
    auto w = nonlinearity_eval(poly, 0.4);
    double s = 0.4;
    CHECK(w.g == doctest::Approx(s - 0.3 * s * s + 0.05 * s * s * s));
    double h = 1e-5;
    double fd1 = (nonlinearity_eval(poly, s + h).g - nonlinearity_eval(poly, s - h).g) / (2 * h);
    CHECK(w.g1 == doctest::Approx(fd1).epsilon(1e-8));
    double fdP =
        (nonlinearity_primitive(poly, s + h) - nonlinearity_primitive(poly, s - h)) / (2 * h);
    CHECK(w.g == doctest::Approx(fdP).epsilon(1e-8));

    // tabulated model sampling the cubic should reproduce it closely
    SolerModel tab;
    tab.kind = NonlinearityKind::table;
    for (int i = 0; i <= 200; ++i) {
        double si = -1.0 + 3.0 * i / 200.0;
        tab.table_s.push_back(si);
        tab.table_g.push_back(si);
    }
    CHECK(nonlinearity_eval(tab, 0.37).g == doctest::Approx(0.37).epsilon(1e-8));
    CHECK(nonlinearity_eval(tab, 0.37).g1 == doctest::Approx(1.0).epsilon(1e-5));
    CHECK(nonlinearity_primitive(tab, 0.8) == doctest::Approx(0.32).epsilon(1e-6));
}

TEST_CASE("grid quadrature and differentiation") {
    RadialGrid g = RadialGrid::make_uniform(800, 20.0);
    Eigen::VectorXd w2 = g.weights_r2();
    double s = 0;
    for (int i = 0; i < g.size(); ++i) s += w2[i] * std::exp(-g.nodes[i]);
    CHECK(s == doctest::Approx(2.0).epsilon(1e-3));  // int_0^inf r^2 e^-r dr = 2
    Eigen::VectorXcd f(g.size());
    for (int i = 0; i < g.size(); ++i) f[i] = std::sin(g.nodes[i]);
    Eigen::VectorXcd df = fd_derivative(g, f);
    for (int i = 0; i < g.size(); i += 37)
        CHECK(df[i].real() == doctest::Approx(std::cos(g.nodes[i])).epsilon(1e-3));
}

TEST_CASE("pointwise reconstruction identities") {
    RadialGrid g = RadialGrid::make_uniform(600, 10.0);
    BlockSpinor u = test_block(g);
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> ur(0.1, 6.0);
    for (int t = 0; t < 30; ++t) {
        Eigen::Vector3d x = ur(rng) * rand_dir(rng);
        double r = x.norm();
        Vec4 v = reconstruct_spinor(u, x);
        // |u|^2 = p^2 + q^2 and u ubar = p^2 - q^2, independent of direction
        CHECK(v.squaredNorm() ==
              doctest::Approx(tp(r) * tp(r) + tq(r) * tq(r)).epsilon(1e-8));
        CHECK(lorentz_scalar(v) ==
              doctest::Approx(tp(r) * tp(r) - tq(r) * tq(r)).epsilon(1e-5));
        // sector reconstruction commutes with charge conjugation
        Vec4 cv = reconstruct_spinor(charge_conjugate(u), x);
        CHECK((cv - charge_conjugate4(v)).norm() == doctest::Approx(0.0).epsilon(1e-8));
    }
    // partner round trip
    BlockSpinor back = charge_conjugate(charge_conjugate(u));
    CHECK((back.p - u.p).norm() == doctest::Approx(0.0));
    CHECK((back.q - u.q).norm() == doctest::Approx(0.0));
}

TEST_CASE("block action of the free Dirac operator matches 3D finite differences") {
    RadialGrid g = RadialGrid::make_uniform(1200, 10.0);
    const double m = 1.3;
    BlockSpinor u = test_block(g);
    // analytic block image:  (D u)_p = m p + q' + 2q/rho,  (D u)_q = -p' - m q
    BlockSpinor du = BlockSpinor::zero(g);
    for (int i = 0; i < g.size(); ++i) {
        double r = g.nodes[i];
        double tq_over_r = r > 0 ? 2.0 * tq(r) / r : 2.0 * tdq(0.0);
        du.p[i] = m * tp(r) + tdq(r) + tq_over_r;
        du.q[i] = -tdp(r) - m * tq(r);
    }
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> ur(0.5, 5.0);
    Mat4 b = beta_mat();
    const double h = 1e-2;
    for (int t = 0; t < 12; ++t) {
        Eigen::Vector3d x = ur(rng) * rand_dir(rng);
        Vec4 dm = m * (b * reconstruct_spinor(u, x));
        for (int j = 0; j < 3; ++j) {
            Eigen::Vector3d e = Eigen::Vector3d::Zero();
            e[j] = h;
            Vec4 d5 = (-reconstruct_spinor(u, x + 2 * e) + 8.0 * reconstruct_spinor(u, x + e) -
                       8.0 * reconstruct_spinor(u, x - e) + reconstruct_spinor(u, x - 2 * e)) /
                      (12.0 * h);
            dm += cplx(0, -1) * (alpha_mat(j + 1) * d5);
        }
        Vec4 expect = reconstruct_spinor(du, x);
        CHECK((dm - expect).norm() == doctest::Approx(0.0).epsilon(1e-6));
    }
}

TEST_CASE("pairings") {
    RadialGrid g = RadialGrid::make_uniform(500, 9.0);
    std::mt19937 rng(23);
    std::normal_distribution<double> n;
    auto rnd_field = [&]() {
        DoubledField x = DoubledField::zero(g);
        for (int i = 0; i < g.size(); ++i) {
            double r = g.nodes[i], env = std::exp(-0.4 * r);
            x.first.p[i] = env * cplx(n(rng), n(rng));
            x.first.q[i] = env * cplx(n(rng), n(rng));
            x.second.p[i] = env * cplx(n(rng), n(rng));
            x.second.q[i] = env * cplx(n(rng), n(rng));
        }
        return x;
    };
    DoubledField X = rnd_field(), Y = rnd_field();
    CHECK(std::abs(pair(X, Y) - std::conj(pair(Y, X))) == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(std::abs(omega_pair(X, Y) + omega_pair(Y, X)) == doctest::Approx(0.0).epsilon(1e-10));
    // the symmetry/pairing maps square to the identity
    DoubledField Z = conj_swap(conj_swap(X));
    CHECK((Z.first.p - X.first.p).norm() == doctest::Approx(0.0));
    DoubledField W = sigma3(sigma3(X));
    CHECK((W.second.q - X.second.q).norm() == doctest::Approx(0.0));
    // phase rotation preserves the hermitian pairing
    DoubledField R = phase_rotate(X, 0.73);
    CHECK(std::abs(pair(R, R) - pair(X, X)) == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("charge and energy against 1D reference quadrature") {
    RadialGrid g = RadialGrid::make_uniform(1500, 12.0);
    BlockSpinor u = test_block(g);
    // closed forms: int r^2 e^{-r^2} = sqrt(pi)/4, int r^4 e^{-r^2} = 3 sqrt(pi)/8
    double q_exact = 4.0 * M_PI * (std::sqrt(M_PI) / 4.0 + 3.0 * std::sqrt(M_PI) / 8.0);
    CHECK(charge(u) == doctest::Approx(q_exact).epsilon(1e-6));

    SolerModel model = SolerModel::cubic(1.3);
    EnergyValue ev = energy(u, model);
    // fine reference quadrature with analytic derivatives
    const int nref = 200000;
    const double hr = 12.0 / nref;
    double ek = 0, ep = 0;
    for (int i = 1; i <= nref; ++i) {
        double r = i * hr;
        double dmp = model.m * tp(r) + tdq(r) + 2.0 * tq(r) / r;
        double dmq = -tdp(r) - model.m * tq(r);
        double w = (i == nref) ? 0.5 * hr : hr;
        ek += w * r * r * (dmp * tp(r) + dmq * tq(r));
        double s = tp(r) * tp(r) - tq(r) * tq(r);
        ep -= w * r * r * nonlinearity_primitive(model, s);
    }
    ek *= 4.0 * M_PI;
    ep *= 4.0 * M_PI;
    CHECK(ev.kinetic == doctest::Approx(ek).epsilon(1e-5));
    CHECK(ev.potential == doctest::Approx(ep).epsilon(1e-6));
    CHECK(ev.total == doctest::Approx(ek + ep).epsilon(1e-5));
}
