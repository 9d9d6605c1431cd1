#include "soler/fgr.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <stdexcept>

namespace soler {

namespace {

// pointwise profile and nonlinearity-derivative tables on the full grid
struct CubicTables {
    Eigen::VectorXd a, b, gp, gpp;
};

CubicTables cubic_tables(const RadialProfile& profile, const SolerModel& model) {
    const int N = profile.grid.size();
    CubicTables t;
    t.a.resize(N);
    t.b.resize(N);
    t.gp.resize(N);
    t.gpp.resize(N);
    for (int i = 0; i < N; ++i) {
        t.a[i] = profile.a[i];
        t.b[i] = profile.b[i];
        double s0 = t.a[i] * t.a[i] - t.b[i] * t.b[i];
        auto nv = nonlinearity_eval(model, s0);
        t.gp[i] = nv.g1;
        t.gpp[i] = nv.g2;
    }
    return t;
}

// first variation of the scalar invariant s = u ubar at phi, extended
// complex-linearly to the doubled field
cplx ds_at(const CubicTables& t, const DoubledField& X, int i) {
    return t.a[i] * (X.first.p[i] + X.second.p[i]) - t.b[i] * (X.first.q[i] + X.second.q[i]);
}

// symmetrized second variation of s along two doubled fields
cplx s2_at(const DoubledField& A, const DoubledField& B, int i) {
    return 0.5 * (A.first.p[i] * B.second.p[i] + A.second.p[i] * B.first.p[i] -
                  A.first.q[i] * B.second.q[i] - A.second.q[i] * B.first.q[i]);
}

// symmetric trilinear form: third variation of the energy along three doubled
// fields, using the same quadrature as energy()
cplx trilinear(const CubicTables& t, const RadialGrid& grid, const DoubledField& A,
               const DoubledField& B, const DoubledField& F) {
    Eigen::VectorXd w = grid.weights_r2();
    cplx acc = 0;
    for (int i = 0; i < grid.size(); ++i) {
        cplx dA = ds_at(t, A, i), dB = ds_at(t, B, i), dF = ds_at(t, F, i);
        cplx cubic = 2.0 * t.gp[i] * (dA * s2_at(B, F, i) + dB * s2_at(A, F, i) +
                                      dF * s2_at(A, B, i)) +
                     t.gpp[i] * dA * dB * dF;
        acc -= w[i] * cubic;
    }
    return 4.0 * M_PI * acc;
}

// Riesz representer K of F -> trilinear(A, B, F) with respect to omega_pair,
// times mult:  omega_pair(K, F) = mult * trilinear(A, B, F) for all F
DoubledField coupling_field(const CubicTables& t, const RadialGrid& grid, const DoubledField& A,
                            const DoubledField& B, double mult) {
    DoubledField K = DoubledField::zero(grid);
    for (int i = 0; i < grid.size(); ++i) {
        cplx dA = ds_at(t, A, i), dB = ds_at(t, B, i);
        cplx sAB = s2_at(A, B, i);
        double gp = t.gp[i], gpp = t.gpp[i], a = t.a[i], b = t.b[i];
        cplx c1p = -(gp * (dA * B.second.p[i] + dB * A.second.p[i]) + 2.0 * gp * a * sAB +
                     gpp * dA * dB * a);
        cplx c2p = -(gp * (dA * B.first.p[i] + dB * A.first.p[i]) + 2.0 * gp * a * sAB +
                     gpp * dA * dB * a);
        cplx c1q = gp * (dA * B.second.q[i] + dB * A.second.q[i]) + 2.0 * gp * b * sAB +
                   gpp * dA * dB * b;
        cplx c2q = gp * (dA * B.first.q[i] + dB * A.first.q[i]) + 2.0 * gp * b * sAB +
                   gpp * dA * dB * b;
        K.first.p[i] = mult * c2p;
        K.first.q[i] = mult * c2q;
        K.second.p[i] = -mult * c1p;
        K.second.q[i] = -mult * c1q;
    }
    return K;
}

double field_norm(const DoubledField& x) { return x.norm(); }

}  // namespace

double energy_directional_derivative(const RadialProfile& profile, const SolerModel& model,
                                     const std::vector<DoubledField>& dirs, int order,
                                     double* accuracy) {
    if (order < 1 || order > 3 || static_cast<int>(dirs.size()) != order)
        throw std::invalid_argument("energy derivative: order must be 1..3 and match dirs");
    BlockSpinor phi = profile.as_block();
    const double omega = profile.omega;
    std::vector<BlockSpinor> u;
    double rescale = 1.0;
    for (const DoubledField& d : dirs) {
        BlockSpinor b = d.first;
        double s = b.norm();
        if (s == 0) {
            if (accuracy) *accuracy = 0;
            return 0;
        }
        b.p /= s;
        b.q /= s;
        rescale *= s;
        u.push_back(std::move(b));
    }

    auto K = [&](const double* tv) {
        BlockSpinor w = phi;
        for (int i = 0; i < order; ++i) {
            w.p += tv[i] * u[i].p;
            w.q += tv[i] * u[i].q;
        }
        return energy(w, model).total - omega * charge(w);
    };

    static const int off[4] = {-2, -1, 1, 2};
    static const double cf[4] = {1.0, -8.0, 8.0, -1.0};
    auto stencil = [&](double h) {
        double acc = 0;
        int combos = 1;
        for (int i = 0; i < order; ++i) combos *= 4;
        for (int c = 0; c < combos; ++c) {
            double tv[3] = {0, 0, 0};
            double coef = 1;
            int cc = c;
            for (int i = 0; i < order; ++i) {
                int k = cc % 4;
                cc /= 4;
                tv[i] = off[k] * h;
                coef *= cf[k];
            }
            acc += coef * K(tv);
        }
        return acc / std::pow(12.0 * h, order);
    };

    double h = 0.1;
    double a1 = stencil(h), a2 = stencil(0.5 * h);
    if (accuracy) *accuracy = std::abs(a2 - a1) * rescale;
    return (16.0 * a2 - a1) / 15.0 * rescale;
}

CouplingSet coupling_vectors(const RadialProfile& profile, const SolerModel& model,
                             const LinearizedOperator& L, const SpectrumResult& spec,
                             const SpectralProjection& proj, double tol_oracle) {
    CouplingSet out;
    const RadialGrid& grid = profile.grid;
    CubicTables tab = cubic_tables(profile, model);

    // positive internal eigenvalues with their eigenvector fields
    std::vector<DoubledField> xi;
    {
        std::vector<std::pair<double, DoubledField>> pos;
        for (const Mode& md : spec.gap_modes) {
            if (md.lambda.real() > 1e-12 && std::abs(md.lambda.imag()) < 1e-8)
                pos.emplace_back(md.lambda.real(), L.from_coords(md.vec));
        }
        std::sort(pos.begin(), pos.end(),
                  [](const auto& x, const auto& y) { return x.first < y.first; });
        for (auto& pr : pos) {
            out.lambda.push_back(pr.first);
            xi.push_back(std::move(pr.second));
        }
    }
    const int n = static_cast<int>(out.lambda.size());
    if (n == 0) return out;

    std::vector<DoubledField> xic;
    for (const DoubledField& x : xi) xic.push_back(conj_swap(x));

    // FD-oracle validation of the trilinear form on all insertion pairs drawn
    // from {xi_j, xi_j^c}, contracted with a localized physical test field
    {
        BlockSpinor w = BlockSpinor::zero(grid);
        for (int i = 0; i < grid.size(); ++i) {
            double r = grid.nodes[i];
            w.p[i] = (1.0 + r) * std::exp(-r);
            w.q[i] = r * std::exp(-r);
        }
        DoubledField W = DoubledField::physical(w);

        auto split = [&](const DoubledField& X, BlockSpinor& re, BlockSpinor& im) {
            re = BlockSpinor::zero(grid);
            im = BlockSpinor::zero(grid);
            re.p = 0.5 * (X.first.p + X.second.p.conjugate());
            re.q = 0.5 * (X.first.q + X.second.q.conjugate());
            im.p = (X.first.p - X.second.p.conjugate()) / cplx(0, 2);
            im.q = (X.first.q - X.second.q.conjugate()) / cplx(0, 2);
        };
        auto fd_trilinear = [&](const DoubledField& A, const DoubledField& B) {
            BlockSpinor ar, ai, br, bi;
            split(A, ar, ai);
            split(B, br, bi);
            const BlockSpinor* as[2] = {&ar, &ai};
            const BlockSpinor* bs[2] = {&br, &bi};
            cplx acc = 0;
            for (int r = 0; r < 2; ++r)
                for (int s = 0; s < 2; ++s) {
                    cplx factor = (r ? cplx(0, 1) : cplx(1)) * (s ? cplx(0, 1) : cplx(1));
                    std::vector<DoubledField> dirs = {DoubledField::physical(*as[r]),
                                                      DoubledField::physical(*bs[s]), W};
                    acc += factor * energy_directional_derivative(profile, model, dirs, 3);
                }
            return acc;
        };

        std::vector<const DoubledField*> ins;
        for (int j = 0; j < n; ++j) {
            ins.push_back(&xi[j]);
            ins.push_back(&xic[j]);
        }
        double scale = 0;
        std::vector<cplx> ana, fdv;
        for (size_t a = 0; a < ins.size(); ++a)
            for (size_t b = a; b < ins.size(); ++b) {
                cplx va = trilinear(tab, grid, *ins[a], *ins[b], W);
                cplx vf = fd_trilinear(*ins[a], *ins[b]);
                ana.push_back(va);
                fdv.push_back(vf);
                scale = std::max({scale, std::abs(va), std::abs(vf)});
            }
        for (size_t k = 0; k < ana.size(); ++k)
            out.oracle_residual =
                std::max(out.oracle_residual, std::abs(ana[k] - fdv[k]) / std::max(scale, 1e-300));
        if (out.oracle_residual > tol_oracle)
            throw std::runtime_error("coupling vectors: trilinear form rejected by the FD oracle");
    }

    auto push = [&](std::vector<int> mu, std::vector<int> nu, const DoubledField& A,
                    const DoubledField& B, double mult) {
        DoubledField K = coupling_field(tab, grid, A, B, mult);
        Eigen::VectorXcd x = L.to_coords(K);
        K = L.from_coords(proj.project_continuous(x));
        double fr = 0;
        for (int j = 0; j < n; ++j) fr += out.lambda[j] * (mu[j] - nu[j]);
        out.indices.emplace_back(std::move(mu), std::move(nu));
        out.vectors.push_back(std::move(K));
        out.frequencies.push_back(fr);
    };

    std::vector<int> z(n, 0);
    for (int j = 0; j < n; ++j) {
        std::vector<int> mu = z;
        mu[j] = 2;
        push(mu, z, xi[j], xi[j], 0.5);
        push(z, mu, xic[j], xic[j], 0.5);
    }
    for (int j = 0; j < n; ++j)
        for (int k = j + 1; k < n; ++k) {
            std::vector<int> mu = z;
            mu[j] = mu[k] = 1;
            push(mu, z, xi[j], xi[k], 1.0);
            push(z, mu, xic[j], xic[k], 1.0);
        }
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
            std::vector<int> mu = z, nu = z;
            mu[j] += 1;
            nu[k] += 1;
            push(mu, nu, xi[j], xic[k], 1.0);
        }

    // conjugation pairing between (mu, nu) and (nu, mu)
    double scale = 0;
    for (const DoubledField& K : out.vectors) scale = std::max(scale, field_norm(K));
    for (size_t i = 0; i < out.indices.size(); ++i)
        for (size_t j = 0; j < out.indices.size(); ++j) {
            if (out.indices[i].first != out.indices[j].second ||
                out.indices[i].second != out.indices[j].first)
                continue;
            DoubledField d = out.vectors[i] + conj_swap(out.vectors[j]);
            out.symmetry_residual =
                std::max(out.symmetry_residual, field_norm(d) / std::max(scale, 1e-300));
        }
    return out;
}

namespace {

// epsilon floor for the shifted solves: on a radial box of size r_max the
// essential spectrum is resolved into levels spaced by about pi/r_max times
// the group velocity k/E of the open channel; epsilon must sit above that
// spacing for the boundary value to see a spectral density instead of
// isolated poles
double epsilon_scale(const LinearizedOperator& L, double r) {
    const double m = L.model.m, om = L.omega;
    double s = 1e-2 * (m - om);
    for (double Lam : {r + om, om - r}) {
        if (std::abs(Lam) > m) {
            double k = std::sqrt(Lam * Lam - m * m);
            s = std::max(s, M_PI / L.grid.r_max() * k / std::abs(Lam));
        }
    }
    return s;
}

// (H - r - i side eps)^{-1} x for the three-member epsilon ladder
std::array<Eigen::VectorXcd, 3> shifted_solves(const LinearizedOperator& L, double r, int side,
                                               const Eigen::VectorXcd& x, double eps_base) {
    std::array<Eigen::VectorXcd, 3> out;
    const double mult[3] = {3.0, 2.0, 1.0};
    for (int j = 0; j < 3; ++j) {
        Eigen::MatrixXcd A = L.H.cast<cplx>();
        A.diagonal().array() -= cplx(r, side * mult[j] * eps_base);
        out[j] = A.partialPivLu().solve(x);
    }
    return out;
}

void check_edge(const LinearizedOperator& L, double r, double delta_edge_frac) {
    const double gap = L.model.m - L.omega;
    const double edge = delta_edge_frac * gap;
    for (double thr : {gap, -gap, L.model.m + L.omega, -(L.model.m + L.omega)})
        if (std::abs(r - thr) < edge)
            throw std::domain_error("fgr form: r too close to a spectral threshold");
}

}  // namespace

FgrValue fgr_quadratic_form(const LinearizedOperator& L, double r, const DoubledField& G,
                            double delta_edge_frac) {
    check_edge(L, r, delta_edge_frac);
    auto sols = shifted_solves(L, r, +1, L.to_coords(G), epsilon_scale(L, r));
    double g1 = pair(L.from_coords(sols[0]), sigma3(G)).imag();
    double g2 = pair(L.from_coords(sols[1]), sigma3(G)).imag();
    double g3 = pair(L.from_coords(sols[2]), sigma3(G)).imag();
    FgrValue out;
    out.value = 2.0 * g3 - g2;  // scalar Richardson in epsilon
    out.error_bar = std::abs((2.0 * g3 - g2) - (2.0 * g2 - g1));
    return out;
}

namespace {

// all mu in Z^n with |mu_1| + ... + |mu_n| <= budget
void enumerate_l1(int n, int budget, std::vector<int>& cur,
                  const std::function<void(const std::vector<int>&)>& emit) {
    if (static_cast<int>(cur.size()) == n) {
        emit(cur);
        return;
    }
    for (int v = -budget; v <= budget; ++v) {
        cur.push_back(v);
        enumerate_l1(n, budget - std::abs(v), cur, emit);
        cur.pop_back();
    }
}

}  // namespace

FgrReport fgr_check(const RadialProfile& profile, const SolerModel& model,
                    const LinearizedOperator& L, const SpectrumResult& spec,
                    const CouplingSet& C, int zeta_samples, unsigned seed) {
    (void)profile;
    FgrReport rep;
    rep.zeta_samples = zeta_samples;
    const double gap = model.m - L.omega;

    rep.lambda = C.lambda;
    if (static_cast<int>(rep.lambda.size()) > 6) {
        rep.capped = true;
        rep.lambda.resize(6);
    }
    const int n = static_cast<int>(rep.lambda.size());
    rep.n_used = n;
    if (n == 0) {
        rep.verdict = "no internal modes";
        return rep;
    }

    rep.h9_ok = true;
    for (double lam : rep.lambda) {
        int N = static_cast<int>(std::floor(gap / lam));
        rep.N.push_back(N);
        if (!(N >= 1 && N * lam < gap && gap < (N + 1) * lam)) rep.h9_ok = false;
    }

    // arithmetic nondegeneracy over |mu| <= 2 N_1 + 3 (N_1 from the smallest
    // eigenvalue)
    const int budget = 2 * rep.N.front() + 3;
    const double atol = 1e-9;
    rep.h10_ok = rep.h11_ok = true;
    {
        std::vector<int> cur;
        enumerate_l1(n, budget, cur, [&](const std::vector<int>& mu) {
            double dot = 0;
            bool zero = true;
            for (int j = 0; j < n; ++j) {
                dot += mu[j] * rep.lambda[j];
                if (mu[j] != 0) zero = false;
            }
            if (zero) return;
            if (std::abs(dot - (model.m - L.omega)) < atol ||
                std::abs(dot - (model.m + L.omega)) < atol) {
                rep.h10_ok = false;
                rep.h10_violations.push_back(mu);
            }
            if (std::abs(dot) < atol) {
                rep.h11_ok = false;
                rep.h11_violations.push_back(mu);
            }
        });
    }

    // resonant multi-indices at leading order: |alpha| = 2, lambda.alpha above
    // the gap edge, and lambda.alpha - lambda_k below it for every active k
    struct ResGroup {
        double r;
        std::vector<std::vector<int>> alphas;
        std::vector<int> which;  // index into C.vectors
    };
    std::vector<ResGroup> groups;
    auto consider = [&](std::vector<int> alpha) {
        double r = 0;
        for (int j = 0; j < n; ++j) r += alpha[j] * rep.lambda[j];
        if (r <= gap) return;
        for (int k = 0; k < n; ++k)
            if (alpha[k] != 0 && r - rep.lambda[k] >= gap) return;
        int which = -1;
        for (size_t i = 0; i < C.indices.size(); ++i) {
            bool nuzero = true;
            for (int v : C.indices[i].second) nuzero &= (v == 0);
            if (nuzero && C.indices[i].first == alpha) which = static_cast<int>(i);
        }
        if (which < 0) return;
        for (ResGroup& g : groups)
            if (std::abs(g.r - r) < 1e-9) {
                g.alphas.push_back(std::move(alpha));
                g.which.push_back(which);
                return;
            }
        groups.push_back({r, {std::move(alpha)}, {which}});
    };
    {
        std::vector<int> z(n, 0);
        for (int j = 0; j < n; ++j) {
            std::vector<int> a = z;
            a[j] = 2;
            consider(a);
        }
        for (int j = 0; j < n; ++j)
            for (int k = j + 1; k < n; ++k) {
                std::vector<int> a = z;
                a[j] = a[k] = 1;
                consider(a);
            }
    }
    rep.window_ok = true;
    for (const ResGroup& g : groups) {
        rep.resonances.push_back(g.r);
        if (g.r >= model.m + L.omega) rep.window_ok = false;
    }
    if (groups.empty()) {
        rep.verdict = "no resonant indices";
        return rep;
    }

    // Hermitian form per resonant frequency: Q_ab from the boundary-value
    // resolvent applied to each coupling vector
    struct FormBlock {
        double r;
        std::vector<std::vector<int>> alphas;
        Eigen::MatrixXcd Q;
        double err;
    };
    std::vector<FormBlock> blocks;
    double eig_min = std::numeric_limits<double>::infinity();
    for (const ResGroup& g : groups) {
        const int k = static_cast<int>(g.alphas.size());
        std::vector<std::array<Eigen::VectorXcd, 3>> sols;
        for (int a = 0; a < k; ++a)
            sols.push_back(shifted_solves(L, g.r, +1, L.to_coords(C.vectors[g.which[a]]),
                                          epsilon_scale(L, g.r)));
        std::array<Eigen::MatrixXcd, 3> S;
        for (int j = 0; j < 3; ++j) {
            S[j].resize(k, k);
            for (int a = 0; a < k; ++a) {
                DoubledField RK = L.from_coords(sols[a][j]);
                for (int b = 0; b < k; ++b) S[j](a, b) = pair(RK, sigma3(C.vectors[g.which[b]]));
            }
        }
        // entrywise scalar Richardson on the epsilon ladder; the increment
        // between consecutive extrapolants is the error estimate
        Eigen::MatrixXcd S_ext = 2.0 * S[2] - S[1];
        Eigen::MatrixXcd S_prev = 2.0 * S[1] - S[0];
        auto herm = [](const Eigen::MatrixXcd& M) {
            return Eigen::MatrixXcd((M - M.adjoint()) / cplx(0, 2));
        };
        Eigen::MatrixXcd Q = herm(S_ext);
        double err = (Q - herm(S_prev)).cwiseAbs().sum();
        for (int a = 0; a < k; ++a) rep.gamma_diagonal.push_back(g.r * Q(a, a).real());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(Q);
        eig_min = std::min(eig_min, g.r * es.eigenvalues().minCoeff());
        rep.error_bar += g.r * err;
        blocks.push_back({g.r, g.alphas, std::move(Q), err});
    }
    rep.eigen_bound = eig_min;

    // minimal Rayleigh quotient over random zeta, the exact bound for
    // independent monomials coming from the blockwise eigen-solve
    std::mt19937 gen(seed);
    std::normal_distribution<double> nd;
    double sample_min = std::numeric_limits<double>::infinity();
    for (int s = 0; s < zeta_samples; ++s) {
        Eigen::VectorXcd zeta(n);
        for (int j = 0; j < n; ++j) zeta[j] = cplx(nd(gen), nd(gen));
        zeta.normalize();
        double num = 0, den = 0;
        for (const FormBlock& bl : blocks) {
            const int k = static_cast<int>(bl.alphas.size());
            Eigen::VectorXcd w(k);
            for (int a = 0; a < k; ++a) {
                cplx mono = 1;
                for (int j = 0; j < n; ++j)
                    for (int c = 0; c < bl.alphas[a][j]; ++c) mono *= zeta[j];
                w[a] = mono;
            }
            num += bl.r * (w.adjoint() * bl.Q * w)(0).real();
            den += w.squaredNorm();
        }
        if (den > 1e-300) sample_min = std::min(sample_min, num / den);
    }
    rep.min_quotient = std::min(sample_min, rep.eigen_bound);

    if (rep.min_quotient > 3.0 * rep.error_bar)
        rep.verdict = "positive (leading order)";
    else if (rep.min_quotient >= -3.0 * rep.error_bar)
        rep.verdict = "nonnegative-degenerate (leading order)";
    else
        rep.verdict = "violated (leading order)";
    return rep;
}

HomologicalSolution solve_homological(const LinearizedOperator& L, const SpectrumResult& spec,
                                      const std::vector<ScalarMonomial>& k_coeffs,
                                      const CouplingSet& K_vecs, int M0) {
    HomologicalSolution out;
    const double gap = L.model.m - L.omega;
    double c = std::numeric_limits<double>::infinity();
    for (double lam : K_vecs.lambda) c = std::min(c, lam);
    if (!std::isfinite(c))
        for (const Mode& md : spec.gap_modes)
            if (md.lambda.real() > 1e-12) c = std::min(c, md.lambda.real());
    if (!std::isfinite(c)) throw std::invalid_argument("homological: no eigenvalue scale");

    auto freq_of = [&](const std::vector<int>& mu, const std::vector<int>& nu,
                       const std::vector<double>& lam) {
        double f = 0;
        for (size_t j = 0; j < lam.size(); ++j) f += lam[j] * (mu[j] - nu[j]);
        return f;
    };
    auto degree = [](const std::vector<int>& mu, const std::vector<int>& nu) {
        int d = 0;
        for (int v : mu) d += std::abs(v);
        for (int v : nu) d += std::abs(v);
        return d;
    };

    for (const ScalarMonomial& mn : k_coeffs) {
        if (degree(mn.mu, mn.nu) > M0) continue;
        double f = freq_of(mn.mu, mn.nu, K_vecs.lambda);
        if (f == 0) throw std::invalid_argument("homological: normal-form scalar input");
        if (std::abs(f) < 0.5 * c) throw std::domain_error("homological: small divisor (scalar)");
        ScalarMonomial chi = mn;
        chi.k = mn.k / cplx(0, f);
        out.chi_scalars.push_back(std::move(chi));
    }

    for (size_t i = 0; i < K_vecs.indices.size(); ++i) {
        if (degree(K_vecs.indices[i].first, K_vecs.indices[i].second) > M0) continue;
        double f = K_vecs.frequencies[i];
        if (std::abs(f) < 0.5 * c) throw std::domain_error("homological: small divisor (vector)");
        for (const Mode& md : spec.gap_modes)
            if (std::abs(f - md.lambda.real()) < 0.5 * c)
                throw std::domain_error("homological: small divisor at the discrete spectrum");
        ResolventApplication app =
            resolvent_apply(L, ResolventQuery::boundary(f, +1, gap), K_vecs.vectors[i]);
        // chi = (1/i) (f - H)^{-1} K = i (H - f)^{-1} K
        out.vec_indices.push_back(K_vecs.indices[i]);
        out.chi_vectors.push_back(cplx(0, 1) * app.value);
        out.vec_frequencies.push_back(f);
        out.inverse_residuals.push_back(app.inverse_check);
        out.error_bars.push_back(app.error_bar);
    }
    return out;
}

}  // namespace soler
