#include "soler/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace soler {

namespace {

// one-sector linear block operator on weighted amplitudes, symmetric; the
// same centered-difference + doubler-lift discretization as the linearization
void sector_triplets(const SolerModel& model, const RadialGrid& grid,
                     std::vector<Eigen::Triplet<double>>& trip, int& n_out,
                     Eigen::VectorXd& rho_out, double wilson) {
    const int N = grid.size() - 1;
    const int n = N - 1;
    const double h = grid.h();
    rho_out.resize(n);
    for (int i = 0; i < n; ++i) rho_out[i] = (i + 1) * h;
    for (int i = 0; i < n; ++i) {
        trip.emplace_back(i, i, model.m + 2 * wilson);
        trip.emplace_back(n + i, n + i, -(model.m + 2 * wilson));
        trip.emplace_back(i, n + i, 1.0 / rho_out[i]);
        trip.emplace_back(n + i, i, 1.0 / rho_out[i]);
        if (i + 1 < n) {
            trip.emplace_back(i, i + 1, -wilson);
            trip.emplace_back(i + 1, i, -wilson);
            trip.emplace_back(n + i, n + i + 1, wilson);
            trip.emplace_back(n + i + 1, n + i, wilson);
            trip.emplace_back(i, n + i + 1, 1.0 / (2 * h));
            trip.emplace_back(n + i + 1, i, 1.0 / (2 * h));
            trip.emplace_back(n + i, i + 1, -1.0 / (2 * h));
            trip.emplace_back(i + 1, n + i, -1.0 / (2 * h));
        }
    }
    n_out = n;
}

}  // namespace

double doubler_lift(const SolerModel& model, const RadialProfile& profile) {
    double gmax = 0;
    const int N = profile.grid.size() - 1;
    const double h = profile.grid.h();
    for (int i = 1; i < N; ++i) {
        Eigen::Vector4d v = profile.dense.eval(i * h);
        gmax = std::max(gmax, std::abs(nonlinearity_eval(model, v[0] * v[0] - v[1] * v[1]).g));
    }
    return 0.5 * gmax;
}

double doubler_lift(const SolerModel& model, const BlockSpinor& u) {
    double gmax = 0;
    for (int i = 0; i < u.grid.size(); ++i) {
        double s = std::norm(u.p[i]) - std::norm(u.q[i]);
        gmax = std::max(gmax, std::abs(nonlinearity_eval(model, s).g));
    }
    return 0.5 * gmax;
}

Stepper::Stepper(const SolerModel& model, const RadialGrid& grid, double dt,
                 const EvolveOptions& opt)
    : model_(model), grid_(grid), dt_(dt) {
    if (!grid.uniform) throw std::invalid_argument("stepper needs a uniform grid");
    if (opt.wilson < 0)
        throw std::invalid_argument("stepper: opt.wilson must be set (see doubler_lift)");
    wilson_ = opt.wilson;
    std::vector<Eigen::Triplet<double>> trip;
    sector_triplets(model, grid, trip, n_, rho_, wilson_);
    S_.resize(2 * n_, 2 * n_);
    S_.setFromTriplets(trip.begin(), trip.end());

    cap_ = Eigen::VectorXd::Zero(2 * n_);
    if (opt.absorbing) {
        double r0 = grid.r_max() * (1.0 - opt.cap_frac);
        for (int i = 0; i < n_; ++i) {
            if (rho_[i] > r0) {
                double s = (rho_[i] - r0) / (grid.r_max() - r0);
                cap_[i] = cap_[n_ + i] = opt.cap_strength * s * s * s;
            }
        }
    }

    // Crank-Nicolson factors for the linear substep, (1 + i tau/2 (S - iW)) x'
    // = (1 - i tau/2 (S - iW)) x; the inverse stage reuses the same matrices
    Eigen::SparseMatrix<cplx> Sc = S_.cast<cplx>();
    Eigen::SparseMatrix<cplx> Id(2 * n_, 2 * n_);
    Id.setIdentity();
    Eigen::SparseMatrix<cplx> Wd(2 * n_, 2 * n_);
    {
        std::vector<Eigen::Triplet<cplx>> wt;
        for (int i = 0; i < 2 * n_; ++i)
            if (cap_[i] != 0) wt.emplace_back(i, i, cplx(cap_[i], 0));
        Wd.setFromTriplets(wt.begin(), wt.end());
    }
    std::vector<double> taus;
    if (opt.order == 4) {
        double w1 = 1.0 / (2.0 - std::cbrt(2.0));
        taus = {w1 * dt_, (1.0 - 2.0 * w1) * dt_, w1 * dt_};
    } else {
        taus = {dt_};
    }
    for (double tau : taus) {
        auto st = std::make_unique<Stage>();
        st->tau = tau;
        Eigen::SparseMatrix<cplx> A = Id + cplx(0, 0.5 * tau) * Sc + 0.5 * tau * Wd;
        st->B_f = Id - cplx(0, 0.5 * tau) * Sc - 0.5 * tau * Wd;
        st->lu_f.compute(A);
        st->lu_b.compute(st->B_f);
        st->B_b = A;
        if (st->lu_f.info() != Eigen::Success || st->lu_b.info() != Eigen::Success)
            throw std::runtime_error("stepper: linear factorization failed");
        stages_.push_back(std::move(st));
    }
}

void Stepper::substep_nonlinear(Eigen::VectorXcd& x, double tau) const {
    for (int i = 0; i < n_; ++i) {
        double r2 = rho_[i] * rho_[i];
        double s = (std::norm(x[i]) - std::norm(x[n_ + i])) / r2;
        double g = nonlinearity_eval(model_, s).g;
        cplx ph = std::exp(cplx(0, g * tau));
        x[i] *= ph;
        x[n_ + i] *= std::conj(ph);
    }
}

void Stepper::step(Eigen::VectorXcd& x) const {
    for (const auto& st : stages_) {
        substep_nonlinear(x, 0.5 * st->tau);
        x = st->lu_f.solve(st->B_f * x);
        substep_nonlinear(x, 0.5 * st->tau);
    }
}

void Stepper::step_back(Eigen::VectorXcd& x) const {
    for (auto it = stages_.rbegin(); it != stages_.rend(); ++it) {
        const auto& st = *it;
        substep_nonlinear(x, -0.5 * st->tau);
        x = st->lu_b.solve(st->B_b * x);
        substep_nonlinear(x, -0.5 * st->tau);
    }
}

Eigen::VectorXcd Stepper::to_coords(const BlockSpinor& u) const {
    if (!u.grid.same_as(grid_)) throw std::invalid_argument("stepper: grid mismatch");
    Eigen::VectorXcd x(2 * n_);
    for (int i = 0; i < n_; ++i) {
        x[i] = rho_[i] * u.p[i + 1];
        x[n_ + i] = rho_[i] * u.q[i + 1];
    }
    return x;
}

BlockSpinor Stepper::from_coords(const Eigen::VectorXcd& x) const {
    BlockSpinor u = BlockSpinor::zero(grid_);
    for (int i = 0; i < n_; ++i) {
        u.p[i + 1] = x[i] / rho_[i];
        u.q[i + 1] = x[n_ + i] / rho_[i];
    }
    u.p[0] = 3.0 * u.p[1] - 3.0 * u.p[2] + u.p[3];
    return u;
}

BlockSpinor discrete_stationary(const SolerModel& model, const RadialProfile& profile,
                                const RadialGrid& grid, double tol) {
    std::vector<Eigen::Triplet<double>> trip;
    int n;
    Eigen::VectorXd rho;
    sector_triplets(model, grid, trip, n, rho, doubler_lift(model, profile));
    Eigen::SparseMatrix<double> S(2 * n, 2 * n);
    S.setFromTriplets(trip.begin(), trip.end());
    Eigen::MatrixXd Sd = Eigen::MatrixXd(S);
    const double omega = profile.omega;

    Eigen::VectorXd y(2 * n);
    for (int i = 0; i < n; ++i) {
        Eigen::Vector4d v = profile.dense.eval(rho[i]);
        y[i] = rho[i] * v[0];
        y[n + i] = rho[i] * v[1];
    }
    double scale = y.norm();
    for (int iter = 0; iter < 50; ++iter) {
        Eigen::VectorXd F = Sd * y - omega * y;
        Eigen::MatrixXd J = Sd;
        J.diagonal().array() -= omega;
        for (int i = 0; i < n; ++i) {
            double r2 = rho[i] * rho[i];
            double at = y[i], bt = y[n + i];
            double s = (at * at - bt * bt) / r2;
            auto nv = nonlinearity_eval(model, s);
            F[i] -= nv.g * at;
            F[n + i] += nv.g * bt;
            J(i, i) += -nv.g - nv.g1 * 2 * at * at / r2;
            J(i, n + i) += nv.g1 * 2 * at * bt / r2;
            J(n + i, i) += nv.g1 * 2 * at * bt / r2;
            J(n + i, n + i) += nv.g - nv.g1 * 2 * bt * bt / r2;
        }
        if (F.norm() < tol * scale) break;
        y -= J.partialPivLu().solve(F);
    }
    BlockSpinor out = BlockSpinor::zero(grid);
    for (int i = 0; i < n; ++i) {
        out.p[i + 1] = y[i] / rho[i];
        out.q[i + 1] = y[n + i] / rho[i];
    }
    out.p[0] = 3.0 * out.p[1] - 3.0 * out.p[2] + out.p[3];
    return out;
}

namespace {

cplx block_pair(const BlockSpinor& x, const BlockSpinor& y) { return pair(x, y); }

}  // namespace

ModulationResult modulate(const SolerModel& model, const BlockSpinor& u, double omega_guess,
                          double theta_guess, const RadialGrid& grid, int max_iter, double tol) {
    ModulationResult res;
    double omega = omega_guess, theta = theta_guess;
    double a0_hint = 0;
    const double dw = 1e-4;
    double fscale = 0;
    // best iterate so far, as a fallback when the iteration stalls at the
    // round-off floor of the finite-difference Jacobian
    double best_res = std::numeric_limits<double>::infinity();
    double best_omega = 0, best_theta = 0, best_f1 = 0, best_f2 = 0;
    BlockSpinor best_v = BlockSpinor::zero(u.grid);

    for (int iter = 0; iter < max_iter; ++iter) {
        std::pair<double, double> br;
        if (a0_hint > 0) {
            br = {0.8 * a0_hint, 1.25 * a0_hint};
        } else {
            auto found = find_bracket(model, omega);
            if (!found) {
                res.converged = false;
                return res;
            }
            br = *found;
        }
        RadialProfile pc = solve_profile(model, omega, br, grid);
        RadialProfile pp = solve_profile(model, omega + dw, {0.9 * pc.a0, 1.1 * pc.a0}, grid);
        RadialProfile pm = solve_profile(model, omega - dw, {0.9 * pc.a0, 1.1 * pc.a0}, grid);
        a0_hint = pc.a0;
        // compare against the stationary states of the discretized flow, not
        // the raw profile samples; otherwise the remainder carries an O(h^2)
        // grid mismatch that never decays and masks the mode amplitudes
        BlockSpinor phi = discrete_stationary(model, pc, grid);
        BlockSpinor php = discrete_stationary(model, pp, grid);
        BlockSpinor phm = discrete_stationary(model, pm, grid);
        BlockSpinor dphi = BlockSpinor::zero(grid);
        dphi.p = (php.p - phm.p) / (2 * dw);
        dphi.q = (php.q - phm.q) / (2 * dw);

        cplx e = std::exp(cplx(0, -theta));
        BlockSpinor w = BlockSpinor::zero(grid);
        w.p = e * u.p;
        w.q = e * u.q;
        BlockSpinor v = w;
        v.p -= phi.p;
        v.q -= phi.q;

        double F1 = block_pair(v, phi).real();
        double F2 = block_pair(v, dphi).imag();
        if (fscale == 0) fscale = std::abs(block_pair(phi, phi).real());

        res.iterations = iter + 1;
        double resid = std::max(std::abs(F1), std::abs(F2));
        if (resid < best_res) {
            best_res = resid;
            best_omega = omega;
            best_theta = theta;
            best_f1 = std::abs(F1);
            best_f2 = std::abs(F2);
            best_v = v;
        }
        if (std::abs(F1) < tol * fscale && std::abs(F2) < tol * fscale) {
            res.omega = omega;
            res.theta = theta;
            res.R = DoubledField::physical(v);
            res.ortho_phi = std::abs(F1);
            res.ortho_dphi = std::abs(F2);
            res.converged = true;
            return res;
        }

        // omega derivatives by the already-computed neighbor profiles,
        // theta derivatives analytic
        auto Fat = [&](const BlockSpinor& ph) {
            BlockSpinor dv = w;
            dv.p -= ph.p;
            dv.q -= ph.q;
            // dphi at the shifted omega is approximated by the central one
            return std::pair<double, double>(block_pair(dv, ph).real(),
                                             block_pair(dv, dphi).imag());
        };
        auto [F1p, F2p] = Fat(php);
        auto [F1m, F2m] = Fat(phm);
        double J11 = (F1p - F1m) / (2 * dw);
        double J21 = (F2p - F2m) / (2 * dw);
        double J12 = block_pair(w, phi).imag();
        double J22 = -block_pair(w, dphi).real();
        double det = J11 * J22 - J12 * J21;
        if (std::abs(det) < 1e-14 * (std::abs(J11 * J22) + std::abs(J12 * J21)) || det == 0) {
            res.converged = false;
            return res;
        }
        double domega = (J22 * F1 - J12 * F2) / det;
        double dtheta = (-J21 * F1 + J11 * F2) / det;
        // trust region: stay in the modulation tube
        double cap = 0.2 * (model.m - omega);
        if (std::abs(domega) > cap) domega *= cap / std::abs(domega);
        if (std::abs(dtheta) > 0.5) dtheta *= 0.5 / std::abs(dtheta);
        omega -= domega;
        theta -= dtheta;
    }
    // out of iterations: accept the best iterate if it sits well inside the
    // tube (orders above the target, orders below any genuine departure)
    if (fscale > 0 && best_res < 1e-9 * fscale) {
        res.omega = best_omega;
        res.theta = best_theta;
        res.R = DoubledField::physical(best_v);
        res.ortho_phi = best_f1;
        res.ortho_dphi = best_f2;
        res.converged = true;
        return res;
    }
    res.converged = false;
    return res;
}

ModeAmplitudes extract_modes(const LinearizedOperator& L, const SpectralProjection& proj,
                             const SpectrumResult& spec, const DoubledField& R) {
    ModeAmplitudes out;
    Eigen::VectorXcd x = L.to_coords(R);
    const int k = static_cast<int>(proj.directions.size());
    const int s = static_cast<int>(x.size()) / 2;
    Eigen::VectorXcd rhs(k);
    for (int i = 0; i < k; ++i) {
        cplx acc = 0;
        for (int j = 0; j < s; ++j) acc += proj.directions[i][j] * x[j];
        for (int j = s; j < 2 * s; ++j) acc -= proj.directions[i][j] * x[j];
        rhs[i] = acc;
    }
    Eigen::VectorXcd c = proj.lu.solve(rhs);
    // directions 0, 1 span the generalized kernel; the rest are the gap modes
    for (size_t j = 0; j < spec.gap_modes.size(); ++j) out.z.push_back(c[2 + j]);
    out.f = L.from_coords(proj.project_continuous(x));
    return out;
}

EvolveResult evolve(const SolerModel& model, const BlockSpinor& u0, double T,
                    const EvolveOptions& opt_in, const ModulationContext* ctx) {
    EvolveOptions opt = opt_in;
    if (opt.wilson < 0) opt.wilson = doubler_lift(model, u0);
    Stepper st(model, u0.grid, opt.dt, opt);
    Eigen::VectorXcd x = st.to_coords(u0);
    long nsteps = std::lround(T / opt.dt);
    EvolveResult out;
    double omega_w = ctx ? ctx->omega0 : 0;
    double theta_w = 0;
    bool mod_alive = ctx != nullptr;
    int mod_failures = 0;  // consecutive; three in a row means we left the tube
    Eigen::VectorXd wts = u0.grid.weights_r2();

    auto record = [&](double t) {
        BlockSpinor u = st.from_coords(x);
        out.track.times.push_back(t);
        out.track.Q.push_back(charge(u));
        out.track.E.push_back(energy(u, model).total);
        if (ctx && mod_alive) {
            ModulationResult mr = modulate(model, u, omega_w, theta_w, u0.grid);
            if (!mr.converged) {
                // one nudge either way before declaring the sample lost
                for (double dth : {0.2, -0.2}) {
                    mr = modulate(model, u, omega_w, theta_w + dth, u0.grid);
                    if (mr.converged) break;
                }
            }
            if (mr.converged) {
                mod_failures = 0;
                omega_w = mr.omega;
                theta_w = mr.theta;
                out.track.omega.push_back(mr.omega);
                out.track.theta.push_back(mr.theta);
                ModeAmplitudes ma = extract_modes(*ctx->L, *ctx->proj, *ctx->spec, mr.R);
                std::vector<double> za;
                for (cplx z : ma.z) za.push_back(std::abs(z));
                out.track.zabs.push_back(za);
                double fn = 0;
                for (int i = 0; i < u0.grid.size(); ++i) {
                    double w = std::pow(1.0 + u0.grid.nodes[i] * u0.grid.nodes[i], -ctx->tau);
                    fn += wts[i] * w *
                          (std::norm(ma.f.first.p[i]) + std::norm(ma.f.first.q[i]) +
                           std::norm(ma.f.second.p[i]) + std::norm(ma.f.second.q[i]));
                }
                out.track.fnorm.push_back(std::sqrt(fn));
                out.track.valid.push_back(1);
            } else if (++mod_failures >= 3) {
                mod_alive = false;  // left the modulation tube; keep evolving
            }
        }
        if (!ctx || !mod_alive || mod_failures > 0) {
            out.track.omega.push_back(omega_w);
            out.track.theta.push_back(theta_w);
            out.track.zabs.push_back({});
            out.track.fnorm.push_back(0);
            out.track.valid.push_back(0);
        }
    };

    record(0.0);
    for (long k = 0; k < nsteps; ++k) {
        st.step(x);
        if ((k + 1) % opt.stride == 0 || k + 1 == nsteps) {
            double t = (k + 1) * opt.dt;
            // warm phase guess: theta advances at rate -omega
            theta_w -= omega_w * opt.dt * opt.stride;
            record(t);
            theta_w = out.track.theta.back();
        }
    }
    out.final = st.from_coords(x);
    out.t_final = nsteps * opt.dt;
    return out;
}

namespace {

double half_window_slope(const std::vector<double>& t, const std::vector<double>& y) {
    // least-squares slope of log(y) over the second half, log-time abscissa
    size_t nsz = t.size();
    size_t start = nsz / 2;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int np = 0;
    for (size_t i = start; i < nsz; ++i) {
        if (y[i] <= 0) continue;
        double xv = std::log(1.0 + t[i]);
        double yv = std::log(y[i]);
        sx += xv;
        sy += yv;
        sxx += xv * xv;
        sxy += xv * yv;
        ++np;
    }
    if (np < 3) return 0;
    double den = np * sxx - sx * sx;
    return den > 0 ? (np * sxy - sx * sy) / den : 0;
}

}  // namespace

TrendReport classify_track(const ModulationTrack& track) {
    TrendReport rep;
    size_t nsz = track.times.size();
    if (nsz < 6) return rep;
    // use only the samples where modulation held
    std::vector<double> t, zmax, fn, om;
    for (size_t i = 0; i < nsz; ++i) {
        if (!track.valid[i]) continue;
        t.push_back(track.times[i]);
        double zm = 0;
        for (double za : track.zabs[i]) zm = std::max(zm, za);
        zmax.push_back(zm);
        fn.push_back(track.fnorm[i]);
        om.push_back(track.omega[i]);
    }
    if (t.size() < 6) return rep;  // inconclusive: modulation lost too early
    rep.z_slope = half_window_slope(t, zmax);
    rep.f_slope = half_window_slope(t, fn);
    double omin = om[om.size() / 2], omax = omin;
    for (size_t i = om.size() / 2; i < om.size(); ++i) {
        omin = std::min(omin, om[i]);
        omax = std::max(omax, om[i]);
    }
    rep.omega_band = omax - omin;
    rep.omega_final = om.back();
    rep.f_final = fn.back();
    bool z_active = false;
    for (double z : zmax)
        if (z > 1e-10) z_active = true;
    bool z_down = !z_active || rep.z_slope < -0.05;
    bool f_down = rep.f_slope < -0.05 || fn.back() < 1e-10;
    bool z_up = z_active && rep.z_slope > 0.05;
    bool f_up = rep.f_slope > 0.05 && fn.back() > 1e-10;
    double band_tol = 5.0 * rep.f_final * rep.f_final + 1e-12;
    if (z_down && f_down && rep.omega_band < std::max(band_tol, 1e-6))
        rep.verdict = StabilityVerdict::consistent;
    else if (z_up || f_up)
        rep.verdict = StabilityVerdict::inconsistent;
    else
        rep.verdict = StabilityVerdict::inconclusive;
    return rep;
}

StabilityReport stability_experiment(const SolerModel& model, const RadialProfile& profile,
                                     const LinearizedOperator& L, const SpectrumResult& spec,
                                     const SpectralProjection& proj, int mode_index,
                                     double amplitude, double T, const EvolveOptions& opt) {
    BlockSpinor u0 = discrete_stationary(model, profile, profile.grid);
    if (mode_index >= 0 && mode_index < static_cast<int>(spec.gap_modes.size())) {
        DoubledField xi = L.from_coords(spec.gap_modes[mode_index].vec);
        u0.p += amplitude * xi.first.p;
        u0.q += amplitude * xi.first.q;
    } else if (mode_index == -1) {
        // radiation-only bump
        for (int i = 0; i < profile.grid.size(); ++i) {
            double r = profile.grid.nodes[i];
            u0.p[i] += amplitude * std::exp(-r * r);
            u0.q[i] += amplitude * r * std::exp(-r * r);
        }
    }
    ModulationContext ctx;
    ctx.L = &L;
    ctx.proj = &proj;
    ctx.spec = &spec;
    ctx.omega0 = profile.omega;
    StabilityReport rep;
    EvolveResult ev = evolve(model, u0, T, opt, &ctx);
    rep.track = std::move(ev.track);
    rep.trend = classify_track(rep.track);
    return rep;
}

ConservationReport conservation_report(const ModulationTrack& track) {
    ConservationReport rep;
    if (track.Q.empty()) return rep;
    double q0 = track.Q.front(), e0 = track.E.front();
    rep.q_monotone_decreasing = true;
    for (size_t i = 0; i < track.Q.size(); ++i) {
        rep.q_drift = std::max(rep.q_drift, std::abs(track.Q[i] - q0) / std::abs(q0));
        rep.e_drift = std::max(rep.e_drift, std::abs(track.E[i] - e0) /
                                                std::max(std::abs(e0), 1e-300));
        if (i > 0 && track.Q[i] > track.Q[i - 1] + 1e-12 * std::abs(q0))
            rep.q_monotone_decreasing = false;
    }
    return rep;
}

}  // namespace soler
