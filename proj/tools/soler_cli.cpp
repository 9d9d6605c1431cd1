// command-line front end: profile / spectrum / resolvent / fgr / evolve /
// scan / report.  Every emitted file carries a header with tool version,
// config hash and seed; exit codes are 0 success, 1 numerical failure,
// 2 config error, 3 input inconsistency.
#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "soler/fgr.hpp"
#include "soler/io.hpp"

using namespace soler;
using nlohmann::json;

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir = ".";
    double omega = -1;  // <0: take from config
    int threads = -1;
    long seed = -1;
};

void add_common(CLI::App* cmd, CommonArgs& a) {
    cmd->add_option("-c,--config", a.config_path, "config file (JSON or key=value sections)");
    cmd->add_option("-o,--out", a.out_dir, "output directory");
    cmd->add_option("--omega", a.omega, "frequency omega (overrides config)");
    cmd->add_option("--threads", a.threads, "worker threads (1 = bit-exact reproducible)");
    cmd->add_option("--seed", a.seed, "random seed (overrides config)");
}

RunConfig make_config(const CommonArgs& a) {
    RunConfig cfg;
    if (!a.config_path.empty())
        cfg = load_config(a.config_path);
    else
        cfg.data = json::object();
    if (a.omega > 0) cfg.data["run"]["omega"] = a.omega;
    if (a.seed >= 0) {
        cfg.data["run"]["seed"] = a.seed;
        cfg.seed = static_cast<unsigned>(a.seed);
    }
    if (const char* env = std::getenv("SOLER_THREADS"); env && a.threads < 0)
        cfg.data["run"]["threads"] = std::atoi(env);
    if (a.threads > 0) cfg.data["run"]["threads"] = a.threads;
    int threads = cfg.integer("run", "threads", 1);
    Eigen::setNbThreads(threads);
    return cfg;
}

std::string out_path(const CommonArgs& a, const std::string& name) {
    std::string dir = a.out_dir;
    if (const char* env = std::getenv("SOLER_OUT_DIR"); env && a.out_dir == ".") dir = env;
    std::filesystem::create_directories(dir);
    return (std::filesystem::path(dir) / name).string();
}

std::vector<std::string> csv_header(const RunConfig& cfg, const std::string& manifest) {
    return {std::string("tool_version ") + kToolVersion,
            "schema_version " + std::to_string(kSchemaVersion),
            "config_hash " + config_hash(cfg.data), "seed " + std::to_string(cfg.seed),
            "columns: " + manifest};
}

struct Workspace {
    SolerModel model;
    double omega;
    RadialGrid grid;
    RadialProfile prof;
};

Workspace make_workspace(const RunConfig& cfg) {
    Workspace w{model_from_config(cfg), cfg.num("run", "omega", 0.9), grid_from_config(cfg), {}};
    auto br = find_bracket(w.model, w.omega);
    if (!br) throw std::runtime_error("no shooting bracket found at omega");
    w.prof = solve_profile(w.model, w.omega, *br, w.grid);
    return w;
}

DoubledField family_direction(const Workspace& w, double dw = 1e-3) {
    RadialProfile pp =
        solve_profile(w.model, w.omega + dw, {0.9 * w.prof.a0, 1.1 * w.prof.a0}, w.grid);
    RadialProfile pm =
        solve_profile(w.model, w.omega - dw, {0.9 * w.prof.a0, 1.1 * w.prof.a0}, w.grid);
    BlockSpinor d = BlockSpinor::zero(w.grid);
    d.p = ((pp.a - pm.a) / (2 * dw)).cast<cplx>();
    d.q = ((pp.b - pm.b) / (2 * dw)).cast<cplx>();
    return DoubledField::physical(d);
}

int cmd_profile(const CommonArgs& a, const std::string& family_spec) {
    RunConfig cfg = make_config(a);
    if (!family_spec.empty()) {
        double lo, hi, step;
        if (std::sscanf(family_spec.c_str(), "%lf:%lf:%lf", &lo, &hi, &step) != 3 || step <= 0 ||
            hi < lo) {
            std::cerr << "malformed --family spec (want lo:hi:step)\n";
            return 2;
        }
        std::vector<double> omegas;
        for (double w = lo; w <= hi + 1e-12; w += step) omegas.push_back(w);
        SolerModel model = model_from_config(cfg);
        RadialGrid grid = grid_from_config(cfg);
        ProfileFamily fam = continue_family(model, omegas, grid);
        std::vector<std::vector<double>> rows;
        for (size_t i = 0; i < fam.omegas.size(); ++i)
            rows.push_back({fam.omegas[i], fam.q[i],
                            i < fam.qprime.size() ? fam.qprime[i] : 0.0,
                            fam.profiles[i].residual});
        write_csv_file(out_path(a, "family.csv"), csv_header(cfg, "omega,q,qprime,residual"),
                       {"omega", "q", "qprime", "residual"}, rows);
        json j;
        j["header"] = file_header(cfg);
        j["charge_derivative_nonvanishing"] = fam.h3_holds;
        j["min_abs_qprime"] = fam.min_abs_qprime;
        j["below_third_flagged"] = fam.below_third_flagged;
        j["note"] = fam.note;
        write_json_file(out_path(a, "family.json"), j);
        std::cout << "family: " << fam.omegas.size() << " points, min |q'| "
                  << fam.min_abs_qprime << "\n";
        return 0;
    }
    Workspace w = make_workspace(cfg);
    ResidualReport rr = profile_residual(w.prof, w.model);
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < w.grid.size(); ++i)
        rows.push_back({w.grid.nodes[i], w.prof.a[i], w.prof.b[i]});
    write_csv_file(out_path(a, "profile.csv"), csv_header(cfg, "rho,a,b"), {"rho", "a", "b"},
                   rows);
    json j;
    j["header"] = file_header(cfg);
    j["omega"] = w.omega;
    j["a0"] = w.prof.a0;
    j["kappa"] = w.prof.kappa;
    j["residual"] = rr.radial;
    j["residual_3d"] = rr.cartesian;
    j["positivity_ok"] = w.prof.positivity_ok;
    write_json_file(out_path(a, "profile.json"), j);
    std::cout << "profile at omega " << w.omega << ": residual " << rr.radial << "\n";
    return 0;
}

int cmd_spectrum(const CommonArgs& a) {
    RunConfig cfg = make_config(a);
    Workspace w = make_workspace(cfg);
    LinearizedOperator L = assemble_linearized(w.model, w.prof);
    SymmetryReport sym = symmetry_check(L);
    SpectrumResult spec = discrete_spectrum(L);
    KernelReport ker = generalized_kernel_check(L, family_direction(w), spec);
    EmbeddedReport emb = embedded_eigencheck(w.prof, w.model);
    json j;
    j["header"] = file_header(cfg);
    j["omega"] = w.omega;
    j["symmetry"]["pairing"] = sym.sigma3_pairing;
    j["symmetry"]["conjugation"] = sym.conjugation;
    j["zero_cluster_dim"] = spec.zero_cluster.size();
    j["kernel_residual"] = ker.kernel_residual;
    j["jordan_residual"] = ker.jordan_residual;
    j["embedded_eigen_residual"] = emb.eigen_residual;
    json modes = json::array();
    for (const Mode& md : spec.gap_modes) {
        json mj;
        mj["re"] = md.lambda.real();
        mj["im"] = md.lambda.imag();
        mj["krein"] = md.krein;
        mj["crosscheck"] = md.crosscheck;
        modes.push_back(mj);
    }
    j["gap_modes"] = modes;
    j["no_unstable_modes"] = true;
    for (const Mode& md : spec.gap_modes)
        if (std::abs(md.lambda.imag()) > spec.disc_error) j["no_unstable_modes"] = false;
    write_json_file(out_path(a, "spectrum.json"), j);
    std::cout << "spectrum: " << spec.gap_modes.size() << " gap modes, zero cluster dim "
              << spec.zero_cluster.size() << "\n";
    return 0;
}

int cmd_resolvent(const CommonArgs& a) {
    RunConfig cfg = make_config(a);
    Workspace w = make_workspace(cfg);
    LinearizedOperator L = assemble_linearized(w.model, w.prof);
    SpectrumResult spec = discrete_spectrum(L);
    SpectralProjection proj = spectral_projection(L, spec, family_direction(w));
    double gap = w.model.m - w.omega, top = w.model.m + w.omega;
    int n_scan = cfg.integer("resolvent", "n_scan", 25);
    std::vector<double> lambdas;
    for (int i = 0; i < n_scan; ++i)
        lambdas.push_back(gap + (0.05 + 0.9 * i / (n_scan - 1.0)) * (top - gap));
    LapScanResult lap = lap_bound_scan(L, lambdas, 1.5, &proj);
    std::vector<std::vector<double>> rows;
    for (size_t i = 0; i < lap.lambdas.size(); ++i)
        rows.push_back({lap.lambdas[i], lap.norms[i]});
    write_csv_file(out_path(a, "lap_scan.csv"), csv_header(cfg, "lambda,weighted_norm"),
                   {"lambda", "weighted_norm"}, rows);

    std::vector<ThresholdReport> th = threshold_resonance_scan(L);
    json j;
    j["header"] = file_header(cfg);
    j["omega"] = w.omega;
    j["lap_sup"] = lap.sup_norm;
    j["lap_argmax"] = lap.argmax_lambda;
    json tj = json::array();
    for (const ThresholdReport& t : th) {
        json e;
        e["threshold"] = t.threshold;
        e["min_dist_plus"] = t.min_dist_plus;
        e["min_dist_minus"] = t.min_dist_minus;
        e["resonance_free"] = t.resonance_free;
        e["character"] = t.character;
        tj.push_back(e);
    }
    j["thresholds"] = tj;

    // dispersive decay of the free flow from localized data
    FreePropagator prop = make_free_propagator(w.model, w.omega, w.grid);
    BlockSpinor psi = BlockSpinor::zero(w.grid);
    for (int i = 0; i < w.grid.size(); ++i) {
        double r = w.grid.nodes[i];
        psi.p[i] = r * std::exp(-r * r);
        psi.q[i] = r * r * std::exp(-r * r);
    }
    std::vector<double> tgrid;
    for (double t = 1.0; t <= 9.0; t += 0.5) tgrid.push_back(t);
    DecayFit fit = decay_fit(prop, DoubledField::physical(psi), 1.5, tgrid);
    j["decay_slope"] = fit.slope;
    j["decay_truncated"] = fit.truncated;

    DoubledField v = DoubledField::physical(psi);
    WaveOperatorResult fw = wave_operator(L, v, 8.0, +1);
    WaveOperatorResult bw = wave_operator(L, fw.value, 8.0, -1);
    DoubledField diff = bw.value;
    diff.first.p -= v.first.p;
    diff.first.q -= v.first.q;
    diff.second.p -= v.second.p;
    diff.second.q -= v.second.q;
    j["wave_operator_roundtrip"] = diff.norm() / v.norm();
    write_json_file(out_path(a, "resolvent.json"), j);
    std::cout << "lap sup " << lap.sup_norm << ", decay slope " << fit.slope << "\n";
    return 0;
}

int cmd_fgr(const CommonArgs& a) {
    RunConfig cfg = make_config(a);
    Workspace w = make_workspace(cfg);
    LinearizedOperator L = assemble_linearized(w.model, w.prof);
    SpectrumResult spec = discrete_spectrum(L);
    SpectralProjection proj = spectral_projection(L, spec, family_direction(w));
    CouplingSet C = coupling_vectors(w.prof, w.model, L, spec, proj);
    int samples = cfg.integer("fgr", "zeta_samples", 200);
    FgrReport rep = fgr_check(w.prof, w.model, L, spec, C, samples, cfg.seed);
    json j;
    j["header"] = file_header(cfg);
    j["omega"] = w.omega;
    j["lambda"] = rep.lambda;
    j["N"] = rep.N;
    j["nonresonance_gap_multiples"] = rep.h9_ok;
    j["nonresonance_edges"] = rep.h10_ok;
    j["nonresonance_zero"] = rep.h11_ok;
    j["resonances"] = rep.resonances;
    j["window_ok"] = rep.window_ok;
    j["coupling_frequencies"] = C.frequencies;
    j["coupling_oracle_residual"] = C.oracle_residual;
    j["coupling_symmetry_residual"] = C.symmetry_residual;
    j["min_quotient"] = rep.min_quotient;
    j["eigen_bound"] = rep.eigen_bound;
    j["error_bar"] = rep.error_bar;
    j["verdict"] = rep.verdict;
    write_json_file(out_path(a, "fgr.json"), j);
    std::cout << "fgr verdict: " << rep.verdict << " (min quotient " << rep.min_quotient
              << ", error bar " << rep.error_bar << ")\n";
    return 0;
}

int cmd_evolve(const CommonArgs& a) {
    RunConfig cfg = make_config(a);
    Workspace w = make_workspace(cfg);
    LinearizedOperator L = assemble_linearized(w.model, w.prof);
    SpectrumResult spec = discrete_spectrum(L);
    SpectralProjection proj = spectral_projection(L, spec, family_direction(w));
    EvolveOptions opt;
    opt.dt = cfg.num("evolve", "dt", 2e-3);
    opt.order = cfg.integer("evolve", "order", 4);
    opt.absorbing = cfg.integer("evolve", "absorbing", 1) != 0;
    opt.stride = cfg.integer("evolve", "stride", 1000);
    double T = cfg.num("evolve", "T", 100.0);
    int mode_index = cfg.integer("evolve", "mode_index", 0);
    double amplitude = cfg.num("evolve", "amplitude", 1e-2);
    StabilityReport rep =
        stability_experiment(w.model, w.prof, L, spec, proj, mode_index, amplitude, T, opt);
    write_csv_file(out_path(a, "track.csv"),
                   csv_header(cfg, "t,omega,theta,abs_z...,fnorm,Q,E,valid"),
                   track_columns(rep.track), track_rows(rep.track));
    json j;
    j["header"] = file_header(cfg);
    j["omega"] = w.omega;
    j["T"] = T;
    j["z_slope"] = rep.trend.z_slope;
    j["f_slope"] = rep.trend.f_slope;
    j["omega_band"] = rep.trend.omega_band;
    j["omega_final"] = rep.trend.omega_final;
    const char* v = rep.trend.verdict == StabilityVerdict::consistent ? "consistent"
                    : rep.trend.verdict == StabilityVerdict::inconsistent ? "inconsistent"
                                                                          : "inconclusive";
    j["verdict"] = v;
    write_json_file(out_path(a, "evolve.json"), j);
    std::cout << "evolve verdict: " << v << " (z slope " << rep.trend.z_slope << ")\n";
    return 0;
}

int cmd_scan(const CommonArgs& a, const std::string& range_spec) {
    RunConfig cfg = make_config(a);
    double lo = 0.5, hi = 0.95, step = 0.05;
    if (!range_spec.empty() &&
        (std::sscanf(range_spec.c_str(), "%lf:%lf:%lf", &lo, &hi, &step) != 3 || step <= 0)) {
        std::cerr << "malformed --range spec (want lo:hi:step)\n";
        return 2;
    }
    SolerModel model = model_from_config(cfg);
    RadialGrid grid = grid_from_config(cfg);
    std::vector<std::vector<double>> rows;
    for (double om = lo; om <= hi + 1e-12; om += step) {
        auto br = find_bracket(model, om);
        if (!br) continue;
        RadialProfile prof = solve_profile(model, om, *br, grid);
        LinearizedOperator L = assemble_linearized(model, prof);
        SpectrumResult spec = discrete_spectrum(L);
        double min_lam = 0;
        for (const Mode& md : spec.gap_modes)
            if (md.lambda.real() > 0 && (min_lam == 0 || md.lambda.real() < min_lam))
                min_lam = md.lambda.real();
        double q = charge(prof.as_block());
        rows.push_back({om, q, prof.residual, static_cast<double>(spec.gap_modes.size()),
                        min_lam});
    }
    write_csv_file(out_path(a, "scan.csv"),
                   csv_header(cfg, "omega,q,residual,n_gap_modes,min_lambda"),
                   {"omega", "q", "residual", "n_gap_modes", "min_lambda"}, rows);
    std::cout << "scan: " << rows.size() << " frequencies\n";
    return 0;
}

int cmd_report(const CommonArgs& a, const std::string& in_dir) {
    RunConfig cfg = make_config(a);
    auto read = [&](const std::string& name) -> json {
        std::ifstream f(std::filesystem::path(in_dir) / name);
        if (!f) return json();
        try {
            return json::parse(f);
        } catch (const json::parse_error&) {
            return json();
        }
    };
    json prof = read("profile.json"), specj = read("spectrum.json"), res = read("resolvent.json"),
         fgrj = read("fgr.json"), evo = read("evolve.json"), fam = read("family.json");

    // all inputs must agree on omega
    double omega = -1;
    for (const json* src : {&prof, &specj, &res, &fgrj, &evo}) {
        if (!src->contains("omega")) continue;
        double o = (*src)["omega"].get<double>();
        if (omega < 0) omega = o;
        else if (std::abs(o - omega) > 1e-12) {
            std::cerr << "inputs disagree on omega (" << omega << " vs " << o << ")\n";
            return 3;
        }
    }

    struct Line {
        std::string name, verdict, evidence;
    };
    std::vector<Line> lines;
    auto add = [&](const std::string& name, const json& src, auto&& eval,
                   const std::string& evidence) {
        if (src.is_null())
            lines.push_back({name, "not evaluated", evidence});
        else
            lines.push_back({name, eval(src) ? "holds" : "fails", evidence});
    };
    add("standing_wave_exists", prof,
        [](const json& p) { return p["residual"].get<double>() < 1e-6; }, "profile.json");
    add("invariant_positivity", prof,
        [](const json& p) { return p["positivity_ok"].get<bool>(); }, "profile.json");
    add("charge_derivative_nonvanishing", fam,
        [](const json& p) { return p["charge_derivative_nonvanishing"].get<bool>(); },
        "family.json");
    add("no_unstable_modes", specj,
        [](const json& p) { return p["no_unstable_modes"].get<bool>(); }, "spectrum.json");
    add("kernel_is_two_dimensional", specj,
        [](const json& p) { return p["zero_cluster_dim"].get<int>() == 2; }, "spectrum.json");
    add("lap_bounded", res, [](const json& p) { return p["lap_sup"].get<double>() < 1e4; },
        "resolvent.json");
    add("thresholds_regular", res,
        [](const json& p) {
            for (const auto& t : p["thresholds"])
                if (!t["resonance_free"].get<bool>()) return false;
            return true;
        },
        "resolvent.json");
    add("gap_multiples_nonresonant", fgrj,
        [](const json& p) { return p["nonresonance_gap_multiples"].get<bool>(); }, "fgr.json");
    add("edge_combinations_nonresonant", fgrj,
        [](const json& p) { return p["nonresonance_edges"].get<bool>(); }, "fgr.json");
    add("zero_combinations_nonresonant", fgrj,
        [](const json& p) { return p["nonresonance_zero"].get<bool>(); }, "fgr.json");
    add("damping_form_positive", fgrj,
        [](const json& p) { return p["verdict"].get<std::string>().rfind("positive", 0) == 0; },
        "fgr.json");
    add("dynamical_decay_consistent", evo,
        [](const json& p) { return p["verdict"].get<std::string>() == "consistent"; },
        "evolve.json");

    json j;
    j["header"] = file_header(cfg);
    if (omega > 0) j["omega"] = omega;
    json jl = json::array();
    std::ostringstream txt;
    txt << "hypothesis dashboard";
    if (omega > 0) txt << " (omega " << omega << ")";
    txt << "\n";
    for (const Line& l : lines) {
        json e;
        e["name"] = l.name;
        e["verdict"] = l.verdict;
        e["evidence"] = l.evidence;
        jl.push_back(e);
        txt << "  " << l.name << ": " << l.verdict << "  [" << l.evidence << "]\n";
    }
    j["lines"] = jl;
    write_json_file(out_path(a, "report.json"), j);
    std::ofstream tf(out_path(a, "report.txt"));
    tf << txt.str();
    std::cout << txt.str();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"solitary-wave stability toolkit for the radial Soler model"};
    app.require_subcommand(1);

    CommonArgs a;
    std::string family_spec, range_spec, in_dir = ".";

    CLI::App* p_profile = app.add_subcommand("profile", "standing-wave profile / family");
    add_common(p_profile, a);
    p_profile->add_option("--family", family_spec, "omega range lo:hi:step");
    CLI::App* p_spectrum = app.add_subcommand("spectrum", "linearized spectrum and symmetries");
    add_common(p_spectrum, a);
    CLI::App* p_resolvent =
        app.add_subcommand("resolvent", "limiting absorption, thresholds, wave operators");
    add_common(p_resolvent, a);
    CLI::App* p_fgr = app.add_subcommand("fgr", "coupling vectors and damping positivity");
    add_common(p_fgr, a);
    CLI::App* p_evolve = app.add_subcommand("evolve", "nonlinear evolution experiment");
    add_common(p_evolve, a);
    CLI::App* p_scan = app.add_subcommand("scan", "summary scan over a frequency range");
    add_common(p_scan, a);
    p_scan->add_option("--range", range_spec, "omega range lo:hi:step");
    CLI::App* p_report = app.add_subcommand("report", "merge verdict files into a dashboard");
    add_common(p_report, a);
    p_report->add_option("--in", in_dir, "directory with per-command JSON outputs");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (p_profile->parsed()) return cmd_profile(a, family_spec);
        if (p_spectrum->parsed()) return cmd_spectrum(a);
        if (p_resolvent->parsed()) return cmd_resolvent(a);
        if (p_fgr->parsed()) return cmd_fgr(a);
        if (p_evolve->parsed()) return cmd_evolve(a);
        if (p_scan->parsed()) return cmd_scan(a, range_spec);
        if (p_report->parsed()) return cmd_report(a, in_dir);
    } catch (const std::runtime_error& e) {
        // config / file problems
        std::cerr << "error: " << e.what() << "\n";
        std::string msg = e.what();
        if (msg.find("parse") != std::string::npos || msg.find("config") != std::string::npos ||
            msg.find("unknown") != std::string::npos)
            return 2;
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
