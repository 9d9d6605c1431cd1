#include "soler/profile.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace soler {

namespace {

struct Rhs {
    const SolerModel* model;
    double omega;

    // a' = (g(s) - m - omega) b
    // b' = (g(s) - m + omega) a - (2/rho) b
    Eigen::Vector2d operator()(double rho, const Eigen::Vector2d& y) const {
        double s = y[0] * y[0] - y[1] * y[1];
        double g = nonlinearity_eval(*model, s).g;
        double m = model->m;
        Eigen::Vector2d d;
        d[0] = (g - m - omega) * y[1];
        d[1] = (g - m + omega) * y[0] - 2.0 / rho * y[1];
        return d;
    }
};

// Cash-Karp embedded RK45, one adaptive step
template <typename F>
bool ck_step(const F& f, double& rho, Eigen::Vector2d& y, double& h, double tol) {
    static const double a2 = 1.0 / 5, a3 = 3.0 / 10, a4 = 3.0 / 5, a5 = 1.0, a6 = 7.0 / 8;
    static const double b21 = 1.0 / 5;
    static const double b31 = 3.0 / 40, b32 = 9.0 / 40;
    static const double b41 = 3.0 / 10, b42 = -9.0 / 10, b43 = 6.0 / 5;
    static const double b51 = -11.0 / 54, b52 = 5.0 / 2, b53 = -70.0 / 27, b54 = 35.0 / 27;
    static const double b61 = 1631.0 / 55296, b62 = 175.0 / 512, b63 = 575.0 / 13824,
                        b64 = 44275.0 / 110592, b65 = 253.0 / 4096;
    static const double c1 = 37.0 / 378, c3 = 250.0 / 621, c4 = 125.0 / 594, c6 = 512.0 / 1771;
    static const double d1 = c1 - 2825.0 / 27648, d3 = c3 - 18575.0 / 48384,
                        d4 = c4 - 13525.0 / 55296, d5 = -277.0 / 14336, d6 = c6 - 1.0 / 4;
    Eigen::Vector2d k1 = f(rho, y);
    Eigen::Vector2d k2 = f(rho + a2 * h, y + h * (b21 * k1));
    Eigen::Vector2d k3 = f(rho + a3 * h, y + h * (b31 * k1 + b32 * k2));
    Eigen::Vector2d k4 = f(rho + a4 * h, y + h * (b41 * k1 + b42 * k2 + b43 * k3));
    Eigen::Vector2d k5 = f(rho + a5 * h, y + h * (b51 * k1 + b52 * k2 + b53 * k3 + b54 * k4));
    Eigen::Vector2d k6 =
        f(rho + a6 * h, y + h * (b61 * k1 + b62 * k2 + b63 * k3 + b64 * k4 + b65 * k5));
    Eigen::Vector2d ynew = y + h * (c1 * k1 + c3 * k3 + c4 * k4 + c6 * k6);
    Eigen::Vector2d err = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6);
    double scale = tol * (1.0 + y.cwiseAbs().maxCoeff());
    double e = err.cwiseAbs().maxCoeff() / scale;
    if (e <= 1.0) {
        rho += h;
        y = ynew;
        h *= std::min(5.0, 0.9 * std::pow(std::max(e, 1e-16), -0.2));
        return true;
    }
    h *= std::max(0.1, 0.9 * std::pow(e, -0.25));
    if (h < 1e-14) throw std::runtime_error("shoot: step-size underflow");
    return false;
}

// series start near the regular singular point
void series_start(const SolerModel& model, double omega, double a0, double rho_s,
                  Eigen::Vector2d& y) {
    double g0 = nonlinearity_eval(model, a0 * a0).g;
    double b1 = (g0 - model.m + omega) * a0 / 3.0;
    double a2c = (g0 - model.m - omega) * b1 / 2.0;
    y[0] = a0 + a2c * rho_s * rho_s;
    y[1] = b1 * rho_s;
}

// integrate exactly to rho_target with adaptive internal steps
template <typename F>
void integrate_to(const F& f, double& rho, Eigen::Vector2d& y, double rho_target, double tol) {
    double h = std::min(1e-3, rho_target - rho);
    while (rho < rho_target - 1e-15) {
        if (rho + h > rho_target) h = rho_target - rho;
        double hs = h;
        if (!ck_step(f, rho, y, h, tol)) continue;
        (void)hs;
    }
}

}  // namespace

ShootResult shoot(const SolerModel& model, double omega, double a0_start, double r_end) {
    if (a0_start <= 0) throw std::invalid_argument("shoot: a0 must be positive");
    if (omega <= 0 || omega >= model.m) throw std::invalid_argument("shoot: omega outside (0, m)");
    Rhs f{&model, omega};
    const double rho_s = 1e-4, tol = 1e-12;
    double rho = rho_s;
    Eigen::Vector2d y;
    series_start(model, omega, a0_start, rho_s, y);
    ShootResult out;
    out.rho.push_back(rho);
    out.a.push_back(y[0]);
    out.b.push_back(y[1]);
    double h = 1e-4;
    const double blow = 20.0 * std::max(a0_start, 1.0);
    while (rho < r_end) {
        if (!ck_step(f, rho, y, h, tol)) continue;
        out.rho.push_back(rho);
        out.a.push_back(y[0]);
        out.b.push_back(y[1]);
        double mag = std::abs(y[0]) + std::abs(y[1]);
        if (y[0] * a0_start < 0) {
            out.tail_sign = TailSign::overshoot;
            return out;
        }
        if (mag > blow) {
            out.tail_sign = TailSign::undershoot;
            return out;
        }
        if (mag < 1e-9 * a0_start && rho > 5.0) {
            out.tail_sign = TailSign::decayed;
            return out;
        }
    }
    double mag = std::abs(y[0]) + std::abs(y[1]);
    out.tail_sign = mag < 1e-5 * a0_start ? TailSign::decayed : TailSign::undershoot;
    return out;
}

std::optional<std::pair<double, double>> find_bracket(const SolerModel& model, double omega,
                                                      double lo, double hi, int n_scan) {
    double prev_a0 = 0;
    TailSign prev = TailSign::decayed;
    for (int i = 0; i <= n_scan; ++i) {
        double a0 = lo + (hi - lo) * i / n_scan;
        if (a0 <= 0) continue;
        TailSign t = shoot(model, omega, a0).tail_sign;
        if (t == TailSign::decayed) return std::make_pair(a0 * (1 - 1e-6), a0 * (1 + 1e-6));
        if (i > 0 && prev != TailSign::decayed && t != prev) return std::make_pair(prev_a0, a0);
        prev_a0 = a0;
        prev = t;
    }
    return std::nullopt;
}

Eigen::Vector4d DenseProfile::eval(double r) const {
    const double k = kappa_exact;
    if (r >= rho_match) {
        double e = std::exp(-k * r);
        double av = tail_amp * e / r;
        double dav = -tail_amp * e * (k * r + 1.0) / (r * r);
        double bv = tail_amp * (1.0 + k * r) * e / (m_plus_omega * r * r);
        double dbv = -tail_amp * e * (k * k / r + 2.0 * (1.0 + k * r) / (r * r * r)) / m_plus_omega;
        return {av, bv, dav, dbv};
    }
    const double hd = rho[1] - rho[0];
    int i = std::min(static_cast<int>(std::floor(r / hd)), static_cast<int>(rho.size()) - 2);
    double t = (r - rho[i]) / hd;
    double h00 = (1 + 2 * t) * (1 - t) * (1 - t), h10 = t * (1 - t) * (1 - t);
    double h01 = t * t * (3 - 2 * t), h11 = t * t * (t - 1);
    double g00 = 6 * t * (t - 1), g10 = (1 - t) * (1 - 3 * t);
    double g01 = -g00, g11 = t * (3 * t - 2);
    Eigen::Vector4d v;
    v[0] = h00 * a[i] + h10 * hd * da[i] + h01 * a[i + 1] + h11 * hd * da[i + 1];
    v[1] = h00 * b[i] + h10 * hd * db[i] + h01 * b[i + 1] + h11 * hd * db[i + 1];
    v[2] = (g00 * a[i] / hd + g10 * da[i] + g01 * a[i + 1] / hd + g11 * da[i + 1]);
    v[3] = (g00 * b[i] / hd + g10 * db[i] + g01 * b[i + 1] / hd + g11 * db[i + 1]);
    return v;
}

BlockSpinor RadialProfile::as_block() const {
    BlockSpinor u;
    u.grid = grid;
    u.p = a.cast<cplx>();
    u.q = b.cast<cplx>();
    return u;
}

DoubledField RadialProfile::as_doubled() const { return DoubledField::physical(as_block()); }

RadialProfile solve_profile(const SolerModel& model, double omega,
                            std::pair<double, double> bracket, const RadialGrid& grid) {
    auto classify = [&](double a0) { return shoot(model, omega, a0).tail_sign; };
    TailSign tlo = classify(bracket.first), thi = classify(bracket.second);
    if (tlo == thi && tlo != TailSign::decayed)
        throw std::invalid_argument("solve_profile: bracket endpoints classify identically");
    double lo = bracket.first, hi = bracket.second;
    for (int it = 0; it < 80 && (hi - lo) > 1e-16 * std::max(1.0, hi); ++it) {
        double mid = 0.5 * (lo + hi);
        TailSign t = classify(mid);
        if (t == TailSign::decayed) {
            lo = hi = mid;
            break;
        }
        if (t == tlo)
            lo = mid;
        else
            hi = mid;
    }
    double a0 = 0.5 * (lo + hi);

    const double kappa = std::sqrt(model.m * model.m - omega * omega);
    const double r_stop = std::log(1e9) / kappa + 5.0;

    // dense pass
    Rhs f{&model, omega};
    const double hd = 2e-3, rho_s = 1e-4, tol = 1e-12;
    RadialProfile prof;
    prof.omega = omega;
    prof.grid = grid;
    prof.a0 = a0;
    DenseProfile& dp = prof.dense;
    dp.kappa_exact = kappa;
    dp.m_plus_omega = model.m + omega;
    int n_max = static_cast<int>(r_stop / hd) + 2;
    std::vector<double> va, vb, vda, vdb, vr;
    va.reserve(n_max);
    // node 0 analytically
    double g0 = nonlinearity_eval(model, a0 * a0).g;
    double b1 = (g0 - model.m + omega) * a0 / 3.0;
    vr.push_back(0.0);
    va.push_back(a0);
    vb.push_back(0.0);
    vda.push_back(0.0);
    vdb.push_back(b1);
    double rho = rho_s;
    Eigen::Vector2d y;
    series_start(model, omega, a0, rho_s, y);
    double rho_match = -1;
    for (int i = 1; i < n_max; ++i) {
        double target = i * hd;
        integrate_to(f, rho, y, target, tol);
        Eigen::Vector2d d = f(rho, y);
        vr.push_back(rho);
        va.push_back(y[0]);
        vb.push_back(y[1]);
        vda.push_back(d[0]);
        vdb.push_back(d[1]);
        if (std::abs(y[0]) + std::abs(y[1]) < 1e-6 * a0) {
            rho_match = rho;
            break;
        }
        if (std::abs(y[0]) + std::abs(y[1]) > 20.0 * std::max(a0, 1.0)) break;  // diverged
    }
    if (rho_match < 0) rho_match = vr.back();
    const int nd = static_cast<int>(vr.size());
    dp.rho = Eigen::Map<Eigen::VectorXd>(vr.data(), nd);
    dp.a = Eigen::Map<Eigen::VectorXd>(va.data(), nd);
    dp.b = Eigen::Map<Eigen::VectorXd>(vb.data(), nd);
    dp.da = Eigen::Map<Eigen::VectorXd>(vda.data(), nd);
    dp.db = Eigen::Map<Eigen::VectorXd>(vdb.data(), nd);
    dp.rho_match = rho_match;
    dp.tail_amp = va.back() * rho_match * std::exp(kappa * rho_match);

    // fitted decay rate from the window  1e-3 a0 > |a|+|b| > 1e-5 a0
    {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        int n = 0;
        for (int i = 0; i < nd; ++i) {
            double mag = std::abs(va[i]) + std::abs(vb[i]);
            if (mag < 1e-3 * a0 && mag > 1e-5 * a0 && va[i] > 0) {
                double xx = vr[i], yy = std::log(va[i] * vr[i]);
                sx += xx;
                sy += yy;
                sxx += xx * xx;
                sxy += xx * yy;
                ++n;
            }
        }
        prof.kappa = n > 4 ? -(n * sxy - sx * sy) / (n * sxx - sx * sx) : kappa;
    }

    // nodeless / positivity checks
    int nodes = 0;
    bool pos_ok = true;
    for (int i = 1; i < nd; ++i) {
        if (va[i] * va[i - 1] < 0) ++nodes;
        if (va[i] * va[i] - vb[i] * vb[i] < -1e-10 * a0 * a0) pos_ok = false;
    }
    prof.positivity_ok = pos_ok;
    if (nodes > 0) prof.residual = 1e9;  // excited state; flagged via residual below too

    // grid samples (tail formula beyond the matching radius)
    prof.a.resize(grid.size());
    prof.b.resize(grid.size());
    for (int i = 0; i < grid.size(); ++i) {
        Eigen::Vector4d v = dp.eval(std::max(grid.nodes[i], 1e-12));
        prof.a[i] = v[0];
        prof.b[i] = v[1];
    }
    prof.b[0] = 0.0;
    prof.a[0] = a0;

    // sup-norm radial residual at dense midpoints and tail samples
    double res = 0;
    for (int i = 1; i + 1 < nd; ++i) {
        double r = dp.rho[i] + 0.5 * hd;
        Eigen::Vector4d v = dp.eval(r);
        Eigen::Vector2d d = f(r, Eigen::Vector2d(v[0], v[1]));
        res = std::max(res, std::abs(v[2] - d[0]));
        res = std::max(res, std::abs(v[3] - d[1]));
    }
    for (double r = rho_match; r < grid.r_max(); r += 1.0) {
        Eigen::Vector4d v = dp.eval(r);
        Eigen::Vector2d d = f(r, Eigen::Vector2d(v[0], v[1]));
        res = std::max(res, std::abs(v[2] - d[0]));
        res = std::max(res, std::abs(v[3] - d[1]));
    }
    if (nodes > 0) res = std::max(res, 1.0);  // never silently accept an excited state
    prof.residual = res;
    return prof;
}

ProfileFamily continue_family(const SolerModel& model, const std::vector<double>& omega_grid,
                              const RadialGrid& grid, double qprime_threshold) {
    ProfileFamily fam;
    std::pair<double, double> br{0, 0};
    bool have_br = false;
    for (double om : omega_grid) {
        std::optional<std::pair<double, double>> b;
        if (have_br) {
            // warm start around the previous a0
            double c = 0.5 * (br.first + br.second);
            b = find_bracket(model, om, std::max(1e-3, 0.5 * c), 2.0 * c + 0.5, 40);
        }
        if (!b) b = find_bracket(model, om);
        if (!b) {
            fam.note += "continuation breakdown at omega=" + std::to_string(om) + "; ";
            break;
        }
        RadialProfile p = solve_profile(model, om, *b, grid);
        br = {0.9 * p.a0, 1.1 * p.a0};
        have_br = true;
        fam.omegas.push_back(om);
        fam.q.push_back(charge(p.as_block()));
        fam.profiles.push_back(std::move(p));
        if (om <= model.m / 3.0) fam.below_third_flagged = true;
    }
    const int n = static_cast<int>(fam.omegas.size());
    if (n >= 2) {
        fam.qprime.resize(n);
        for (int i = 0; i < n; ++i) {
            int lo = std::max(0, i - 1), hi = std::min(n - 1, i + 1);
            fam.qprime[i] = (fam.q[hi] - fam.q[lo]) / (fam.omegas[hi] - fam.omegas[lo]);
        }
        double mn = 1e300;
        bool sign_change = false;
        for (int i = 0; i < n; ++i) {
            mn = std::min(mn, std::abs(fam.qprime[i]));
            if (i > 0 && fam.qprime[i] * fam.qprime[i - 1] < 0) sign_change = true;
        }
        fam.min_abs_qprime = mn;
        fam.h3_holds = mn > qprime_threshold && !sign_change;
    }
    return fam;
}

DoubledField ProfileFamily::dPhi_domega(int i) const {
    const int n = static_cast<int>(omegas.size());
    if (n < 2) throw std::runtime_error("dPhi_domega needs family neighbors");
    int lo = std::max(0, i - 1), hi = std::min(n - 1, i + 1);
    double dw = omegas[hi] - omegas[lo];
    BlockSpinor d;
    d.grid = profiles[i].grid;
    d.p = ((profiles[hi].a - profiles[lo].a) / dw).cast<cplx>();
    d.q = ((profiles[hi].b - profiles[lo].b) / dw).cast<cplx>();
    return DoubledField::physical(d);
}

Vec4 reconstruct_profile(const RadialProfile& profile, const Eigen::Vector3d& x) {
    double rho = std::max(x.norm(), 1e-12);
    Eigen::Vector4d v = profile.dense.eval(rho);
    Eigen::Vector3d n = x.norm() > 0 ? Eigen::Vector3d(x / x.norm()) : Eigen::Vector3d(0, 0, 1);
    const cplx I(0, 1);
    Vec4 u;
    u[0] = v[0];
    u[1] = 0;
    u[2] = I * v[1] * n[2];
    u[3] = I * v[1] * cplx(n[0], n[1]);
    return u;
}

ResidualReport profile_residual(const RadialProfile& profile, const SolerModel& model,
                                int n_points, unsigned seed) {
    // radial part recomputed from the dense data
    Rhs f{&model, profile.omega};
    const DenseProfile& dp = profile.dense;
    double rres = 0;
    const int nd = static_cast<int>(dp.rho.size());
    double hd = nd > 1 ? dp.rho[1] - dp.rho[0] : 0.0;
    for (int i = 1; i + 1 < nd; ++i) {
        double r = dp.rho[i] + 0.5 * hd;
        Eigen::Vector4d v = dp.eval(r);
        Eigen::Vector2d d = f(r, Eigen::Vector2d(v[0], v[1]));
        rres = std::max(rres, std::max(std::abs(v[2] - d[0]), std::abs(v[3] - d[1])));
    }

    // Cartesian stationary-equation residual with 5-point finite differences
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    double cres = 0;
    const double hfd = 1e-2;
    Mat4 beta = beta_mat();
    Mat4 al[3] = {alpha_mat(1), alpha_mat(2), alpha_mat(3)};
    for (int k = 0; k < n_points; ++k) {
        double rho = 0.2 + 0.7 * dp.rho_match * uni(rng);
        double ct = 2.0 * uni(rng) - 1.0, ph = 2.0 * M_PI * uni(rng);
        double st = std::sqrt(1 - ct * ct);
        Eigen::Vector3d x(rho * st * std::cos(ph), rho * st * std::sin(ph), rho * ct);
        Vec4 u = reconstruct_profile(profile, x);
        Vec4 dm = model.m * (beta * u);
        for (int j = 0; j < 3; ++j) {
            Eigen::Vector3d e = Eigen::Vector3d::Zero();
            e[j] = hfd;
            Vec4 du = (-reconstruct_profile(profile, x + 2 * e) + 8.0 * reconstruct_profile(profile, x + e) -
                       8.0 * reconstruct_profile(profile, x - e) + reconstruct_profile(profile, x - 2 * e)) /
                      (12.0 * hfd);
            dm += cplx(0, -1) * (al[j] * du);
        }
        double s = lorentz_scalar(u);
        Vec4 res = dm - profile.omega * u - nonlinearity_eval(model, s).g * (beta * u);
        cres = std::max(cres, res.cwiseAbs().maxCoeff());
    }
    return {rres, cres};
}

}  // namespace soler
