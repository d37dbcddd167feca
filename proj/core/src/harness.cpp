#include "hallab/harness.hpp"

#include "hallab/diagnostics.hpp"
#include "hallab/io.hpp"
#include "hallab/nenciu.hpp"
#include "hallab/spectral.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

namespace hallab {

using nlohmann::json;

// ------------------------------ configuration ------------------------------

namespace {

void reject_unknown_keys(const json& j, const std::set<std::string>& allowed,
                         const std::string& where) {
    if (!j.is_object()) throw ConfigError("config: " + where + " must be an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!allowed.count(it.key())) {
            throw ConfigError("config: unknown key '" + where + "." + it.key() + "'");
        }
    }
}

template <typename T>
T get_or(const json& j, const std::string& key, T fallback) {
    if (!j.contains(key) || j.at(key).is_null()) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError("config: bad value for '" + key + "': " + e.what());
    }
}

}  // namespace

RunConfig RunConfig::from_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot read " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: parse failure: ") + e.what());
    }

    reject_unknown_keys(j, {"schema_version", "model", "switches", "fermi", "drive",
                            "evolution", "expansion", "window", "lambda_grid",
                            "outputs", "threads", "seed", "cache_dir"},
                        "root");
    RunConfig cfg;
    cfg.schema_version = get_or<int>(j, "schema_version", 1);
    if (cfg.schema_version != 1) {
        throw ConfigError("config: unsupported schema_version");
    }

    if (j.contains("model")) {
        const json& m = j.at("model");
        reject_unknown_keys(m, {"backend", "boundary", "L", "p", "q", "B", "lambda",
                                "potential", "landau"},
                            "model");
        cfg.model.backend = get_or<std::string>(m, "backend", "hofstadter");
        cfg.model.boundary = get_or<std::string>(m, "boundary", "open");
        cfg.model.L = get_or<int>(m, "L", 24);
        cfg.model.p = get_or<int>(m, "p", 1);
        cfg.model.q = get_or<int>(m, "q", 3);
        cfg.model.B = get_or<double>(m, "B", 0.0);
        cfg.model.lambda = get_or<double>(m, "lambda", 0.0);
        if (m.contains("potential")) {
            const json& pj = m.at("potential");
            reject_unknown_keys(pj, {"kind", "bumps", "sup_norm", "smoothness_order",
                                     "random_bumps"},
                                "model.potential");
            cfg.model.potential_kind = get_or<std::string>(pj, "kind", "zero");
            cfg.model.sup_norm = get_or<double>(pj, "sup_norm", 1.0);
            cfg.model.smoothness_order = get_or<int>(pj, "smoothness_order", 6);
            cfg.model.random_bumps = get_or<int>(pj, "random_bumps", 0);
            if (pj.contains("bumps")) {
                for (const json& bj : pj.at("bumps")) {
                    reject_unknown_keys(bj, {"x1", "x2", "width", "amplitude"},
                                        "model.potential.bumps[]");
                    GaussianBump b;
                    b.x1 = get_or<double>(bj, "x1", 0.0);
                    b.x2 = get_or<double>(bj, "x2", 0.0);
                    b.width = get_or<double>(bj, "width", 1.5);
                    b.amplitude = get_or<double>(bj, "amplitude", 1.0);
                    cfg.model.bumps.push_back(b);
                }
            }
        }
        if (m.contains("landau")) {
            const json& lj = m.at("landau");
            reject_unknown_keys(lj, {"B", "n_levels", "m_max"}, "model.landau");
            cfg.model.landau_B = get_or<double>(lj, "B", 1.0);
            cfg.model.n_levels = get_or<int>(lj, "n_levels", 3);
            cfg.model.m_max = get_or<int>(lj, "m_max", 40);
        }
    }
    if (j.contains("switches")) {
        const json& s = j.at("switches");
        reject_unknown_keys(s, {"half_width", "order", "center1", "center2"},
                            "switches");
        cfg.switches.half_width = get_or<double>(s, "half_width", 3.0);
        cfg.switches.order = get_or<int>(s, "order", 3);
        cfg.switches.center1 = get_or<double>(s, "center1", 0.0);
        cfg.switches.center2 = get_or<double>(s, "center2", 0.0);
    }
    if (j.contains("fermi")) {
        const json& f = j.at("fermi");
        reject_unknown_keys(f, {"band_count", "energy", "delta_min"}, "fermi");
        cfg.band_count = get_or<int>(f, "band_count", 1);
        if (f.contains("energy") && !f.at("energy").is_null()) {
            cfg.fermi_energy = f.at("energy").get<double>();
        }
        if (f.contains("delta_min") && !f.at("delta_min").is_null()) {
            cfg.delta_min = f.at("delta_min").get<double>();
        }
    }
    if (j.contains("drive")) {
        const json& dj = j.at("drive");
        reject_unknown_keys(dj, {"kind", "k"}, "drive");
        cfg.drive_kind = get_or<std::string>(dj, "kind", "ramp");
        cfg.drive_k = get_or<int>(dj, "k", 4);
    }
    if (j.contains("evolution")) {
        const json& e = j.at("evolution");
        reject_unknown_keys(e, {"tau_list", "n_steps_floor", "n_steps_factor",
                                "n_steps_boost", "s_samples", "s_probes", "certify"},
                            "evolution");
        cfg.tau_list = get_or<std::vector<double>>(e, "tau_list", cfg.tau_list);
        cfg.n_steps_floor = get_or<int>(e, "n_steps_floor", 4096);
        cfg.n_steps_factor = get_or<double>(e, "n_steps_factor", 8.0);
        cfg.n_steps_boost = get_or<std::string>(e, "n_steps_boost", "none");
        cfg.s_samples = get_or<int>(e, "s_samples", 33);
        cfg.s_probes = get_or<std::vector<double>>(e, "s_probes", cfg.s_probes);
        cfg.certify = get_or<bool>(e, "certify", true);
    }
    if (j.contains("expansion")) {
        const json& x = j.at("expansion");
        reject_unknown_keys(x, {"order", "fd_step", "s"}, "expansion");
        cfg.expansion_order = get_or<int>(x, "order", 3);
        cfg.fd_step = get_or<double>(x, "fd_step", 1e-3);
        cfg.expansion_s = get_or<double>(x, "s", 0.5);
    }
    if (j.contains("window")) {
        const json& w = j.at("window");
        reject_unknown_keys(w, {"margin"}, "window");
        if (w.contains("margin") && !w.at("margin").is_null()) {
            cfg.window_margin = w.at("margin").get<double>();
        }
    }
    if (j.contains("lambda_grid")) {
        cfg.lambda_grid = j.at("lambda_grid").get<std::vector<double>>();
    }
    if (j.contains("outputs")) {
        const json& o = j.at("outputs");
        reject_unknown_keys(o, {"dir", "csv", "json", "svg"}, "outputs");
        cfg.out_dir = get_or<std::string>(o, "dir", "out");
        cfg.write_csv = get_or<bool>(o, "csv", true);
        cfg.write_json = get_or<bool>(o, "json", true);
        cfg.write_svg = get_or<bool>(o, "svg", false);
    }
    cfg.threads = get_or<int>(j, "threads", 1);
    cfg.seed = get_or<std::uint64_t>(j, "seed", 0);
    if (j.contains("cache_dir") && !j.at("cache_dir").is_null()) {
        cfg.cache_dir = std::filesystem::path(j.at("cache_dir").get<std::string>());
    }
    return cfg;
}

std::string RunConfig::to_json() const {
    json j;
    j["schema_version"] = schema_version;
    json m;
    m["backend"] = model.backend;
    m["boundary"] = model.boundary;
    m["L"] = model.L;
    m["p"] = model.p;
    m["q"] = model.q;
    m["B"] = model.B;
    m["lambda"] = model.lambda;
    json pj;
    pj["kind"] = model.potential_kind;
    pj["sup_norm"] = model.sup_norm;
    pj["smoothness_order"] = model.smoothness_order;
    pj["random_bumps"] = model.random_bumps;
    json bl = json::array();
    for (const auto& b : model.bumps) {
        bl.push_back({{"x1", b.x1}, {"x2", b.x2}, {"width", b.width},
                      {"amplitude", b.amplitude}});
    }
    pj["bumps"] = bl;
    m["potential"] = pj;
    m["landau"] = {{"B", model.landau_B}, {"n_levels", model.n_levels},
                   {"m_max", model.m_max}};
    j["model"] = m;
    j["switches"] = {{"half_width", switches.half_width}, {"order", switches.order},
                     {"center1", switches.center1}, {"center2", switches.center2}};
    json f;
    f["band_count"] = band_count;
    if (fermi_energy) f["energy"] = *fermi_energy;
    if (delta_min) f["delta_min"] = *delta_min;
    j["fermi"] = f;
    j["drive"] = {{"kind", drive_kind}, {"k", drive_k}};
    j["evolution"] = {{"tau_list", tau_list}, {"n_steps_floor", n_steps_floor},
                      {"n_steps_factor", n_steps_factor},
                      {"n_steps_boost", n_steps_boost}, {"s_samples", s_samples},
                      {"s_probes", s_probes}, {"certify", certify}};
    j["expansion"] = {{"order", expansion_order}, {"fd_step", fd_step},
                      {"s", expansion_s}};
    if (window_margin) j["window"] = {{"margin", *window_margin}};
    j["lambda_grid"] = lambda_grid;
    j["outputs"] = {{"dir", out_dir.string()}, {"csv", write_csv},
                    {"json", write_json}, {"svg", write_svg}};
    j["threads"] = threads;
    j["seed"] = seed;
    if (cache_dir) j["cache_dir"] = cache_dir->string();
    return j.dump(2);
}

// --------------------------------- assembly --------------------------------

namespace {

PotentialSpec potential_from_config(const RunConfig& cfg) {
    const auto& mc = cfg.model;
    if (mc.potential_kind == "zero") return PotentialSpec::zero_potential();
    if (mc.potential_kind == "gaussian_bumps") {
        std::vector<GaussianBump> bumps = mc.bumps;
        if (mc.random_bumps > 0) {
            std::mt19937_64 rng(cfg.seed);
            std::uniform_real_distribution<double> pos(-0.25 * mc.L, 0.25 * mc.L);
            std::uniform_real_distribution<double> width(1.5, 3.0);
            for (int i = 0; i < mc.random_bumps; ++i) {
                bumps.push_back({pos(rng), pos(rng), width(rng), 1.0});
            }
        }
        if (bumps.empty()) bumps.push_back({0.8, -0.6, 2.0, 1.0});
        return PotentialSpec::normalized_bumps(std::move(bumps), mc.sup_norm);
    }
    throw ConfigError("config: unsupported potential kind '" + mc.potential_kind + "'");
}

MagneticModel model_from_config(const RunConfig& cfg, double lambda_override = -1.0) {
    const auto& mc = cfg.model;
    const double lambda = lambda_override >= 0.0 ? lambda_override : mc.lambda;
    const PotentialSpec pot =
        lambda > 0.0 ? potential_from_config(cfg) : PotentialSpec::zero_potential();
    if (mc.backend == "hofstadter") {
        LatticeSpec spec;
        spec.width = mc.L;
        spec.flux_p = mc.p;
        spec.flux_q = mc.q;
        spec.boundary = mc.boundary == "torus" ? Boundary::torus : Boundary::open;
        return build_hofstadter(spec, pot, lambda, mc.B);
    }
    if (mc.backend == "landau_basis") {
        return build_landau_truncated(mc.landau_B, mc.n_levels, mc.m_max, pot, lambda);
    }
    throw ConfigError("config: unsupported backend '" + mc.backend + "'");
}

// Fermi energy at the center of the bulk gap above `bands` filled magnetic
// bands. Open samples take the value from their torus companion so edge
// modes cannot skew the placement.
double fermi_for_band(const RunConfig& cfg, const MagneticModel& model,
                      const EigenSystem& eig, int bands, const EigenCache& cache) {
    if (model.backend == ModelBackend::landau_basis) {
        const int per_level = model.basis->m_max() + 1;
        return midgap_energy(eig, bands * per_level);
    }
    const int q = model.lattice.flux_q;
    if (model.lattice.boundary == Boundary::torus || model.lattice.flux_p == 0) {
        return midgap_energy(eig, bands * model.dim() / std::max(q, 1));
    }
    RunConfig companion = cfg;
    companion.model.boundary = "torus";
    companion.model.L = ((cfg.model.L + q - 1) / q) * q;
    const MagneticModel torus = model_from_config(companion);
    const EigenSystem torus_eig = diagonalize_cached(torus, cache);
    return midgap_energy(torus_eig, bands * torus.dim() / q);
}

}  // namespace

RunSetup prepare_run(const RunConfig& cfg) {
    RunSetup setup;
    setup.model = model_from_config(cfg);
    const EigenCache cache = cfg.cache_dir ? EigenCache(cfg.cache_dir)
                                           : EigenCache::from_environment();
    setup.eig = diagonalize_cached(setup.model, cache);
    const int bands = std::max(1, cfg.band_count);
    setup.fermi_energy = cfg.fermi_energy
                             ? *cfg.fermi_energy
                             : fermi_for_band(cfg, setup.model, setup.eig, bands, cache);
    setup.lambda1 = make_switch(Axis::x1, cfg.switches.half_width, cfg.switches.order,
                                setup.model, cfg.switches.center1);
    setup.lambda2 = make_switch(Axis::x2, cfg.switches.half_width, cfg.switches.order,
                                setup.model, cfg.switches.center2);
    setup.margin = cfg.window_margin ? *cfg.window_margin : cfg.model.L / 4.0;
    setup.window = setup.model.backend == ModelBackend::hofstadter
                       ? TraceWindow::bulk_margin(setup.model, setup.margin)
                       : TraceWindow::all();
    setup.profile = driving_profile(
        cfg.drive_kind == "pulse" ? ProfileKind::pulse : ProfileKind::ramp,
        cfg.drive_k);
    return setup;
}

StepRule step_rule_from_config(const RunConfig& cfg, double spectral_radius) {
    const int floor_steps = cfg.n_steps_floor;
    const double factor = cfg.n_steps_factor;
    const bool sqrt_boost = cfg.n_steps_boost == "sqrt";
    return [floor_steps, factor, spectral_radius, sqrt_boost](double tau) {
        double wanted = factor * spectral_radius * tau;
        if (sqrt_boost) wanted *= std::max(1.0, std::sqrt(tau / 32.0));
        int n = std::max(floor_steps, static_cast<int>(std::ceil(wanted)));
        n = ((n + 31) / 32) * 32;
        return n;
    };
}

// ------------------------------- pipelines ---------------------------------

namespace {

struct OutputBundle {
    std::vector<std::pair<std::filesystem::path, std::string>> texts;
    std::vector<std::pair<std::filesystem::path, CsvTable>> tables;

    void add_json(const std::filesystem::path& p, const json& j) {
        texts.emplace_back(p, j.dump(2) + "\n");
    }
    void flush(const std::filesystem::path& dir) const {
        std::filesystem::create_directories(dir);
        for (const auto& [path, text] : texts) {
            std::ofstream out(dir / path);
            if (!out) throw std::runtime_error("io: cannot open " + path.string());
            out << text;
        }
        for (const auto& [path, table] : tables) {
            write_csv(table, dir / path);
        }
    }
};

json manifest_for(const RunConfig& cfg, const std::string& pipeline,
                  const MagneticModel& model) {
    json j;
    j["schema_version"] = 1;
    j["pipeline"] = pipeline;
    j["model_hash"] = model.content_hash();
    j["config"] = json::parse(cfg.to_json());
    return j;
}

json conductance_json(const ConductanceResult& k) {
    json j;
    j["raw_re"] = k.raw_trace.real();
    j["raw_im"] = k.raw_trace.imag();
    j["full_re"] = k.full_trace.real();
    j["full_im"] = k.full_trace.imag();
    j["cyclic_re"] = k.cyclic_trace.real();
    j["cyclic_im"] = k.cyclic_trace.imag();
    j["imag_purity"] = k.imag_purity;
    j["switches_commute"] = k.switches_commute;
    return j;
}

// Conductance plus oracle calibration for the configured model.
struct KuboOutcome {
    ConductanceResult result;
    int oracle{0};
    cxd constant{0.0, 0.0};
    double normalized{0.0};
};

KuboOutcome run_kubo(const RunConfig& cfg, const RunSetup& setup) {
    const FermiProjector proj =
        fermi_projector(setup.eig, setup.fermi_energy,
                        cfg.delta_min ? *cfg.delta_min : -1.0);
    proj.require_certified();
    KuboOutcome out;
    out.result = kubo_streda_trace(proj, setup.lambda1, setup.lambda2, setup.window);
    if (setup.model.backend == ModelBackend::hofstadter &&
        setup.model.lattice.flux_p > 0) {
        LatticeSpec torus = setup.model.lattice;
        torus.boundary = Boundary::torus;
        torus.width = ((torus.width + torus.flux_q - 1) / torus.flux_q) * torus.flux_q;
        out.oracle = chern_fhs(torus, std::max(1, cfg.band_count)).chern;
    } else {
        out.oracle = 1;  // Landau backend: one filled level per band index
        if (cfg.band_count > 1) out.oracle = cfg.band_count;
    }
    if (out.oracle != 0 && std::abs(out.result.raw_trace) > 0.0) {
        out.constant = calibrate_convention(out.result, out.oracle);
        out.normalized = normalized_value(out.result.raw_trace, out.constant);
    }
    return out;
}

int pipeline_build(const RunConfig& cfg) {
    const RunSetup setup = prepare_run(cfg);
    OutputBundle bundle;
    json summary;
    summary["dimension"] = setup.model.dim();
    summary["content_hash"] = setup.model.content_hash();
    summary["fermi_energy"] = setup.fermi_energy;
    summary["energy_min"] = setup.eig.energies(0);
    summary["energy_max"] = setup.eig.energies(setup.eig.dim() - 1);
    summary["eigen_residual"] = setup.eig.residual;
    bundle.add_json("build_summary.json", summary);

    CsvTable spectrum;
    spectrum.columns = {"index", "energy"};
    for (int i = 0; i < setup.eig.dim(); ++i) {
        spectrum.rows.push_back({static_cast<double>(i), setup.eig.energies(i)});
    }
    if (cfg.write_csv) bundle.tables.emplace_back("spectrum.csv", spectrum);
    bundle.add_json("manifest_build.json", manifest_for(cfg, "build", setup.model));
    bundle.flush(cfg.out_dir);
    save_model_json(setup.model, cfg.out_dir / "model.json");
    save_model_binary(setup.model, cfg.out_dir / "model.bin");
    return kExitOk;
}

int pipeline_kubo(const RunConfig& cfg) {
    const RunSetup setup = prepare_run(cfg);
    const KuboOutcome out = run_kubo(cfg, setup);

    OutputBundle bundle;
    json j = conductance_json(out.result);
    j["schema_version"] = 1;
    j["oracle"] = out.oracle;
    j["convention_constant_re"] = out.constant.real();
    j["convention_constant_im"] = out.constant.imag();
    j["normalized"] = out.normalized;
    j["window_margin"] = setup.margin;
    bundle.add_json("kubo_summary.json", j);
    bundle.add_json("manifest_kubo.json", manifest_for(cfg, "kubo", setup.model));
    bundle.flush(cfg.out_dir);
    return kExitOk;
}

int pipeline_evolve(const RunConfig& cfg) {
    const RunSetup setup = prepare_run(cfg);
    const KuboOutcome kubo = run_kubo(cfg, setup);
    const DriveContext ctx =
        make_drive_context(setup.model, setup.fermi_energy, setup.profile,
                           setup.lambda1, setup.lambda2, setup.window,
                           cfg.delta_min ? *cfg.delta_min : -1.0);
    const double tau = cfg.tau_list.front();
    const StepRule rule = step_rule_from_config(cfg, ctx.eig->spectral_radius());

    std::vector<double> samples(cfg.s_samples);
    for (int i = 0; i < cfg.s_samples; ++i) {
        samples[i] = static_cast<double>(i) / (cfg.s_samples - 1);
    }
    for (double p : cfg.s_probes) samples.push_back(p);
    const Trajectory traj = evolve(ctx, tau, rule(tau), samples);

    CsvTable table;
    table.columns = {"s", "re_j", "im_j", "prediction", "residual",
                     "unitarity_defect"};
    for (const auto& st : traj.samples) {
        const CurrentSample cur = instantaneous_current(ctx, st, kubo.result.raw_trace);
        table.rows.push_back({cur.s, cur.current.real(), cur.current.imag(),
                              cur.kubo_prediction.real(), cur.residual,
                              cur.unitarity_defect});
    }

    OutputBundle bundle;
    if (cfg.write_csv) bundle.tables.emplace_back("trajectory.csv", table);
    json j;
    j["schema_version"] = 1;
    j["tau"] = tau;
    j["n_steps"] = traj.n_steps;
    j["k_raw_re"] = kubo.result.raw_trace.real();
    j["k_raw_im"] = kubo.result.raw_trace.imag();
    bundle.add_json("evolve_summary.json", j);
    bundle.add_json("manifest_evolve.json", manifest_for(cfg, "evolve", setup.model));
    bundle.flush(cfg.out_dir);
    return kExitOk;
}

int pipeline_sweep_tau(const RunConfig& cfg) {
    const RunSetup setup = prepare_run(cfg);
    const KuboOutcome kubo = run_kubo(cfg, setup);
    const DriveContext ctx =
        make_drive_context(setup.model, setup.fermi_energy, setup.profile,
                           setup.lambda1, setup.lambda2, setup.window,
                           cfg.delta_min ? *cfg.delta_min : -1.0);
    const StepRule rule = step_rule_from_config(cfg, ctx.eig->spectral_radius());
    const double probe = cfg.s_probes.empty() ? 1.0 : cfg.s_probes.front();
    const TauSweepReport report =
        tau_sweep(ctx, cfg.tau_list, probe, kubo.result.raw_trace, rule,
                  cfg.threads, cfg.certify);

    CsvTable table;
    table.columns = {"tau", "residual", "running_slope"};
    for (std::size_t i = 0; i < report.rows.size(); ++i) {
        double running = 0.0;
        if (i >= 1) {
            running = std::log(report.rows[i].residual /
                               std::max(report.rows[i - 1].residual, 1e-300)) /
                      std::log(report.rows[i].tau / report.rows[i - 1].tau);
        }
        table.rows.push_back({report.rows[i].tau, report.rows[i].residual, running});
    }

    OutputBundle bundle;
    if (cfg.write_csv) bundle.tables.emplace_back("tau_sweep.csv", table);
    json j;
    j["schema_version"] = 1;
    j["s_probe"] = report.s_probe;
    j["slope"] = report.fit.slope;
    j["r_squared"] = report.fit.r_squared;
    j["k_raw_re"] = kubo.result.raw_trace.real();
    j["k_raw_im"] = kubo.result.raw_trace.imag();
    bundle.add_json("tau_sweep_summary.json", j);
    bundle.add_json("manifest_sweep_tau.json",
                    manifest_for(cfg, "sweep-tau", setup.model));
    if (cfg.write_svg) {
        SvgSeries series;
        series.label = "residual";
        for (const auto& row : report.rows) {
            series.xs.push_back(row.tau);
            series.ys.push_back(std::max(row.residual, 1e-300));
        }
        std::filesystem::create_directories(cfg.out_dir);
        write_svg_plot({series}, true, "current residual vs tau",
                       cfg.out_dir / "tau_sweep.svg");
    }
    bundle.flush(cfg.out_dir);
    return kExitOk;
}

int pipeline_sweep_lambda(const RunConfig& cfg) {
    const RunSetup setup = prepare_run(cfg);
    const KuboOutcome reference = run_kubo(cfg, setup);
    if (std::abs(reference.constant) == 0.0) {
        throw NoGapError("sweep-lambda: reference calibration failed");
    }
    const int q = std::max(1, cfg.model.q);
    const int occupied = std::max(1, cfg.band_count) * setup.model.dim() / q;
    const StabilityReport report = lambda_stability_sweep(
        [&cfg](double lambda) { return model_from_config(cfg, lambda); },
        cfg.lambda_grid, occupied, cfg.switches, reference.constant,
        setup.margin, cfg.threads, cfg.delta_min ? *cfg.delta_min : -1.0);

    CsvTable table;
    table.columns = {"lambda", "gap_margin", "raw_re", "raw_im", "normalized"};
    for (const auto& pt : report.points) {
        table.rows.push_back({pt.lambda, pt.gap_margin, pt.raw.real(),
                              pt.raw.imag(), pt.normalized});
    }

    OutputBundle bundle;
    if (cfg.write_csv) bundle.tables.emplace_back("lambda_sweep.csv", table);
    json j;
    j["schema_version"] = 1;
    j["convention_constant_re"] = reference.constant.real();
    j["convention_constant_im"] = reference.constant.imag();
    j["oracle"] = reference.oracle;
    j["max_deviation"] = report.max_deviation;
    json dropped = json::array();
    for (const auto& [lambda, reason] : report.dropped) {
        dropped.push_back({{"lambda", lambda}, {"reason", reason}});
    }
    j["dropped"] = dropped;
    bundle.add_json("lambda_sweep_summary.json", j);
    bundle.add_json("manifest_sweep_lambda.json",
                    manifest_for(cfg, "sweep-lambda", setup.model));
    bundle.flush(cfg.out_dir);
    return kExitOk;
}

int pipeline_expansion(const RunConfig& cfg) {
    const RunSetup setup = prepare_run(cfg);
    const DriveContext ctx =
        make_drive_context(setup.model, setup.fermi_energy, setup.profile,
                           setup.lambda1, setup.lambda2, setup.window,
                           cfg.delta_min ? *cfg.delta_min : -1.0);
    const KappaCalibration cal = calibrate_kappa(ctx, cfg.expansion_s);
    const ExpansionTerms terms = expansion_terms(ctx, cfg.expansion_s,
                                                 cfg.expansion_order, cfg.fd_step,
                                                 cal.kappa);
    const StepRule rule = step_rule_from_config(cfg, ctx.eig->spectral_radius());
    const RemainderReport remainder =
        truncation_remainder(ctx, cfg.tau_list, cfg.expansion_s,
                             std::min(cfg.expansion_order, 1), rule, cfg.threads,
                             cfg.certify, cfg.fd_step);

    OutputBundle bundle;
    json j;
    j["schema_version"] = 1;
    j["s"] = terms.s;
    j["order"] = terms.order;
    j["fd_step"] = terms.fd_step;
    j["kappa_re"] = cal.kappa.real();
    j["kappa_im"] = cal.kappa.imag();
    j["kappa_residual"] = cal.residual;
    json cand = json::array();
    for (const auto& [kappa, res] : cal.candidates) {
        cand.push_back({{"re", kappa.real()}, {"im", kappa.imag()},
                        {"residual", res}});
    }
    j["kappa_candidates"] = cand;
    std::vector<double> norms;
    for (const auto& b : terms.terms) norms.push_back(operator_norm(b));
    j["term_norms"] = norms;
    j["residual_ode"] = terms.residual_ode;
    j["residual_alg"] = terms.residual_alg;
    bundle.add_json("expansion_report.json", j);

    CsvTable table;
    table.columns = {"tau", "remainder", "fitted_slope"};
    for (const auto& row : remainder.rows) {
        table.rows.push_back({row.tau, row.remainder, remainder.fit.slope});
    }
    if (cfg.write_csv) bundle.tables.emplace_back("remainder_sweep.csv", table);
    bundle.add_json("manifest_expansion.json",
                    manifest_for(cfg, "expansion", setup.model));
    bundle.flush(cfg.out_dir);
    return kExitOk;
}

int pipeline_diagnostics(const RunConfig& cfg) {
    const RunSetup setup = prepare_run(cfg);
    const DriveContext ctx =
        make_drive_context(setup.model, setup.fermi_energy, setup.profile,
                           setup.lambda1, setup.lambda2, setup.window,
                           cfg.delta_min ? *cfg.delta_min : -1.0);
    const FermiProjector& proj = *ctx.projector;

    const Mat commutator_p_l1 =
        setup.lambda1.is_diagonal
            ? commutator_with_diagonal(proj.matrix, setup.lambda1.diag)
            : commutator(proj.matrix, setup.lambda1.dense);
    const DecayProfile decay = kernel_decay(commutator_p_l1, setup.model, Axis::x1,
                                            setup.lambda1.half_width);

    const double tau = cfg.tau_list.front();
    const StepRule rule = step_rule_from_config(cfg, ctx.eig->spectral_radius());
    const Vec packet = filtered_packet(ctx, setup.model, 2.0,
                                       setup.fermi_energy + proj.gap_width);
    const LightconeReport cone =
        lightcone_check(ctx, setup.model, tau, packet, rule(tau), cfg.s_samples);

    const std::vector<double> s_grid = {0.0, 0.25, 0.5, 0.75, 1.0};
    const double bound_m2 = energy_bound_check(ctx, tau, 2, rule(tau), s_grid);

    OutputBundle bundle;
    CsvTable dtab;
    dtab.columns = {"distance", "value", "fit"};
    for (std::size_t i = 0; i < decay.distances.size(); ++i) {
        dtab.rows.push_back({decay.distances[i], decay.norms[i], decay.fit_exponent});
    }
    CsvTable ctab;
    ctab.columns = {"time", "value", "fit"};
    for (std::size_t i = 0; i < cone.times.size(); ++i) {
        ctab.rows.push_back({cone.times[i], cone.spreads[i], cone.growth_exponent});
    }
    if (cfg.write_csv) {
        bundle.tables.emplace_back("kernel_decay.csv", dtab);
        bundle.tables.emplace_back("lightcone.csv", ctab);
    }
    json j;
    j["schema_version"] = 1;
    j["decay_exponent"] = decay.fit_exponent;
    j["lightcone_exponent"] = cone.growth_exponent;
    j["lightcone_reflected"] = cone.boundary_reflection;
    j["energy_bound_m2"] = bound_m2;
    j["pass_lightcone"] = cone.growth_exponent <= 1.2;
    j["pass_decay"] = decay.fit_exponent < 0.0;
    bundle.add_json("diagnostics_summary.json", j);
    bundle.add_json("manifest_diagnostics.json",
                    manifest_for(cfg, "diagnostics", setup.model));
    bundle.flush(cfg.out_dir);
    return kExitOk;
}

int pipeline_report(const RunConfig& cfg) {
    json merged;
    merged["schema_version"] = 1;
    std::vector<std::filesystem::path> inputs;
    if (std::filesystem::exists(cfg.out_dir)) {
        for (const auto& entry : std::filesystem::directory_iterator(cfg.out_dir)) {
            if (entry.path().extension() == ".json" &&
                entry.path().filename() != "report.json") {
                inputs.push_back(entry.path());
            }
        }
    }
    std::sort(inputs.begin(), inputs.end());
    for (const auto& path : inputs) {
        std::ifstream in(path);
        try {
            merged[path.filename().string()] = json::parse(in);
        } catch (const json::exception&) {
            merged[path.filename().string()] = nullptr;
        }
    }
    std::filesystem::create_directories(cfg.out_dir);
    std::ofstream out(cfg.out_dir / "report.json");
    out << merged.dump(2) << "\n";
    return kExitOk;
}

}  // namespace

std::optional<Pipeline> pipeline_from_name(const std::string& name) {
    if (name == "build") return Pipeline::build;
    if (name == "kubo") return Pipeline::kubo;
    if (name == "evolve") return Pipeline::evolve;
    if (name == "sweep-tau") return Pipeline::sweep_tau;
    if (name == "sweep-lambda") return Pipeline::sweep_lambda;
    if (name == "expansion") return Pipeline::expansion;
    if (name == "diagnostics") return Pipeline::diagnostics;
    if (name == "report") return Pipeline::report;
    return std::nullopt;
}

int run_pipeline(Pipeline which, const RunConfig& cfg) {
    try {
        switch (which) {
            case Pipeline::build: return pipeline_build(cfg);
            case Pipeline::kubo: return pipeline_kubo(cfg);
            case Pipeline::evolve: return pipeline_evolve(cfg);
            case Pipeline::sweep_tau: return pipeline_sweep_tau(cfg);
            case Pipeline::sweep_lambda: return pipeline_sweep_lambda(cfg);
            case Pipeline::expansion: return pipeline_expansion(cfg);
            case Pipeline::diagnostics: return pipeline_diagnostics(cfg);
            case Pipeline::report: return pipeline_report(cfg);
        }
        return kExitFailure;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const NoGapError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNoGap;
    } catch (const IntegratorDominatedError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitCertification;
    } catch (const QuadratureError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitCertification;
    } catch (const FdUnstableError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitCertification;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
}

}  // namespace hallab
