// Command-line front end. Kept in a header so the tests can drive dispatch() in-process.
#pragma once

#include "rdlab/rdlab.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace rdlab::cli {

namespace fs = std::filesystem;

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

inline nlohmann::json read_json_file(const fs::path& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path.string());
    try {
        return nlohmann::json::parse(is);
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError(path.string() + ": " + e.what(), e.byte);
    }
}

inline void write_json_file(const nlohmann::json& j, const fs::path& path) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    os << j.dump(2) << '\n';
}

inline RadarConfig load_radar_config(const std::string& path) {
    RadarConfig cfg;
    if (!path.empty()) cfg = read_json_file(path).get<RadarConfig>();
    cfg.validate();
    return cfg;
}

/// Level from RDLAB_LOG (trace, debug, info, warn, error, critical, off); warn by default.
inline void configure_logging(std::ostream& err) {
    auto logger = spdlog::get("rdlab");
    if (!logger) logger = spdlog::stderr_color_mt("rdlab");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("[%l] %v");
    spdlog::set_level(spdlog::level::warn);
    if (const char* env = std::getenv("RDLAB_LOG"); env && *env) {
        const auto level = spdlog::level::from_str(env);
        if (level == spdlog::level::off && std::string(env) != "off")
            err << "warning: ignoring unknown RDLAB_LOG level '" << env << "'\n";
        else
            spdlog::set_level(level);
    }
}

struct CommonFlags {
    std::uint64_t seed = 1;
    std::string config;
    std::string out;
};

inline void add_common(CLI::App* cmd, CommonFlags& f, const std::string& out_help, bool out_required) {
    cmd->add_option("--seed", f.seed, "Seed for every random draw of this command")->capture_default_str();
    cmd->add_option("--config", f.config, "Radar configuration JSON (defaults to the 77 GHz reference radar)")
        ->check(CLI::ExistingFile);
    auto* o = cmd->add_option("--out", f.out, out_help);
    if (out_required) o->required();
}

// ---- simulate ----------------------------------------------------------------

struct SimulateArgs {
    CommonFlags common;
    std::string targets;
    std::optional<int> scenario;
    std::string interferer;
    std::optional<double> sinr;
    bool no_noise = false;
};

inline int run_simulate(const SimulateArgs& a) {
    RadarConfig cfg = load_radar_config(a.common.config);
    std::vector<Target> targets = {Target{30.0, 10.0, 10.0}};
    if (!a.targets.empty()) targets = read_json_file(a.targets).get<std::vector<Target>>();

    std::vector<InterfererConfig> interferers;
    if (a.scenario) {
        const ScenarioPreset preset = scenario_preset(*a.scenario, cfg);
        interferers.push_back(preset.interferer);
    }
    if (!a.interferer.empty()) {
        const auto j = read_json_file(a.interferer);
        if (j.is_array())
            for (const auto& e : j) interferers.push_back(e.get<InterfererConfig>());
        else
            interferers.push_back(j.get<InterfererConfig>());
    }
    if (a.sinr && interferers.empty()) throw DomainError("--sinr needs --scenario or --interferer");

    const BeatFrame clean = synthesize_clean_beat(cfg, targets, a.common.seed, !a.no_noise);
    BeatFrame total = BeatFrame::zeros(cfg, Provenance::interference_only);
    for (auto c : interferers) {
        if (a.sinr) {
            c.amplitude_scale.reset();
            c.target_sinr_db = *a.sinr;
        }
        total = BeatFrame(cfg, total.samples() + synthesize_interference(cfg, c).samples(), Provenance::interference_only);
    }
    double scale = 1.0;
    if (a.sinr) {
        const RdMap clean_rd = range_doppler_map(clean);
        const auto cells = object_noise_cells(clean_rd, reference_cfar_params());
        scale = scale_to_sinr(clean_rd, total, *a.sinr, cells, kLevelSinrDefinition);
        spdlog::info("interference scale {:.6g} for {} dB", scale, *a.sinr);
    }
    const BeatFrame out = interferers.empty() ? clean : superimpose(clean, total, scale);
    write_rd_cube(cube_from_frame(out), a.common.out);
    spdlog::info("wrote {} ({} x {} complex, {} interferer(s))", a.common.out, cfg.samples_per_chirp,
                 cfg.chirps_per_frame, interferers.size());
    return kExitOk;
}

// ---- synthesize-dataset --------------------------------------------------------

struct SynthesizeArgs {
    CommonFlags common;
    std::string scene;
    std::string out_dir;
    unsigned jobs = 1;
    bool seed_given = false;
};

inline int run_synthesize(const SynthesizeArgs& a, std::ostream& out) {
    SceneSpec scene;
    if (!a.scene.empty()) scene = read_json_file(a.scene).get<SceneSpec>();
    if (!a.common.config.empty()) scene.radar = load_radar_config(a.common.config);
    if (a.seed_given) scene.master_seed = a.common.seed;
    const std::string dir = !a.out_dir.empty() ? a.out_dir : a.common.out;
    if (dir.empty()) throw DomainError("synthesize-dataset needs --out-dir (or --out)");
    SynthesisOptions opts;
    opts.jobs = std::max(1u, a.jobs);
    opts.progress = [](std::uint32_t done, std::uint32_t total) { spdlog::info("sequence {}/{} done", done, total); };
    const DatasetManifest m = synthesize_dataset(scene, dir, opts);
    spdlog::info("{} samples (train {}, val {}, test {}), {} skipped (frame, level) pairs", m.counts.samples,
                 m.counts.train, m.counts.val, m.counts.test, m.skips.size());
    out << "samples " << m.counts.samples << " train " << m.counts.train << " val " << m.counts.val << " test "
              << m.counts.test << " skips " << m.skips.size() << '\n';
    return kExitOk;
}

// ---- mitigate ------------------------------------------------------------------

struct MitigateArgs {
    CommonFlags common;
    std::string in;
    std::string method = "imat";
    double k_sigma = kDefaultKSigma;
    int iters = kDefaultImatIterations;
    double decay = kDefaultImatDecay;
};

inline int run_mitigate(const MitigateArgs& a) {
    const RadarConfig cfg = load_radar_config(a.common.config);
    const Method method = method_from_string(a.method);
    if (method != Method::zeroing && method != Method::imat) throw DomainError("--method must be zeroing or imat");
    ImatParams params{a.iters, a.decay};
    params.validate();
    const auto frames = ingest_adc_cube(a.in, cfg);
    std::vector<BeatFrame> out;
    nlohmann::json flagged = nlohmann::json::array();
    for (const auto& f : frames) {
        const InterferenceMask mask = detect_interfered_samples(f, a.k_sigma);
        flagged.push_back(mask.count());
        out.push_back(method == Method::zeroing ? zeroing(f, mask) : imat(f, mask, params));
    }
    write_rd_cube(cube_from_frames(out), a.common.out);
    nlohmann::json meta = {{"input", a.in},
                           {"method", a.method},
                           {"k_sigma", a.k_sigma},
                           {"granularity", "per fast-time column"},
                           {"flagged_samples", flagged}};
    if (method == Method::imat) meta["imat"] = {{"iterations", a.iters}, {"decay", a.decay}};
    write_json_file(meta, a.common.out + ".json");
    spdlog::info("mitigated {} frame(s) with {}", frames.size(), a.method);
    return kExitOk;
}

// ---- evaluate --------------------------------------------------------------------

struct EvaluateArgs {
    CommonFlags common;
    std::string dataset;
    std::string method = "corrupted";
    std::string denoised_dir;
    std::string report;
    std::string log;
    std::string split;
    std::string export_maps;
    unsigned jobs = 1;
    double k_sigma = kDefaultKSigma;
    int iters = kDefaultImatIterations;
    double decay = kDefaultImatDecay;
};

inline int run_evaluate(const EvaluateArgs& a, std::ostream& out) {
    EvalOptions opts;
    opts.method = method_from_string(a.method);
    if (!a.denoised_dir.empty()) opts.denoised_dir = a.denoised_dir;
    if (opts.method == Method::denoised && !opts.denoised_dir) throw DomainError("--method denoised needs --denoised-dir");
    if (!a.split.empty()) opts.split = split_from_string(a.split);
    opts.k_sigma = a.k_sigma;
    opts.imat = {a.iters, a.decay};
    opts.imat.validate();
    opts.jobs = std::max(1u, a.jobs);
    if (!a.common.config.empty()) {
        const auto m = read_manifest(fs::path(a.dataset) / "manifest.jsonl");
        if (!(load_radar_config(a.common.config) == m.scene.radar))
            throw DomainError("--config does not match the dataset's radar configuration");
    }
    const std::string report = !a.report.empty() ? a.report : a.common.out;
    if (report.empty()) throw DomainError("evaluate needs --report (or --out)");

    const auto records = evaluate_dataset(a.dataset, opts);
    {
        std::ofstream os(report, std::ios::trunc);
        if (!os) throw std::runtime_error("cannot write " + report);
        write_metric_csv(os, records);
    }
    if (!a.log.empty()) {
        std::ofstream os(a.log, std::ios::trunc);
        if (!os) throw std::runtime_error("cannot write " + a.log);
        write_metric_jsonl(os, records);
    }
    if (!a.export_maps.empty()) {
        if (opts.method != Method::corrupted && opts.method != Method::zeroing && opts.method != Method::imat)
            throw DomainError("--export-maps works with corrupted, zeroing or imat");
        export_method_maps(a.dataset, a.export_maps, opts);
    }
    char line[256];
    std::snprintf(line, sizeof line, "%s: %zu samples, median SINR %.3f dB, median EVM %.4f, median AP %.2f %%\n",
                  a.method.c_str(), records.size(), median_metric(records, &MetricRecord::sinr_db),
                  median_metric(records, &MetricRecord::evm), median_metric(records, &MetricRecord::ap_percent));
    out << line;
    return kExitOk;
}

// ---- export-map --------------------------------------------------------------------

struct ExportArgs {
    CommonFlags common;
    std::string in;
    std::uint32_t frame = 0;
    std::string out_pgm;
    std::string out_axes;
};

inline int run_export(const ExportArgs& a) {
    const RadarConfig cfg = load_radar_config(a.common.config);
    const RdCube cube = read_rd_cube(a.in);
    if (a.frame >= cube.frames) throw DomainError("--frame out of range");
    RealGrid db;
    if (cube.kind == RdcKind::complex) {
        // Complex cubes hold beat frames: transform, then dB.
        const auto frames = frames_from_cube(cube, cfg);
        db = to_db(range_doppler_map(frames[a.frame])).real_values();
    } else {
        db = map_from_cube(cube, a.frame);  // magnitude cubes are stored dB maps
    }
    const std::string pgm = !a.out_pgm.empty() ? a.out_pgm : a.common.out;
    if (pgm.empty()) throw DomainError("export-map needs --out-pgm (or --out)");
    const PgmScaling scaling = write_pgm16(db, pgm);
    if (!a.out_axes.empty()) {
        RadarConfig axes_cfg = cfg;
        axes_cfg.range_fft_points = static_cast<std::uint32_t>(db.rows());
        axes_cfg.doppler_fft_points = static_cast<std::uint32_t>(db.cols());
        write_axes_csv(axes_cfg, scaling, a.out_axes);
    }
    spdlog::info("exported frame {} of {} ({} x {})", a.frame, a.in, db.rows(), db.cols());
    return kExitOk;
}

// ---- dispatch ------------------------------------------------------------------------

/// Parses argv and runs one subcommand. 0 on success, 2 on bad usage, 1 on runtime failure.
inline int dispatch(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    configure_logging(err);
    CLI::App app{"rdlab: FMCW radar interference laboratory"};
    app.require_subcommand(1, 1);
    app.set_version_flag("--version", "rdlab 1.0.0");

    SimulateArgs sim;
    auto* c_sim = app.add_subcommand("simulate", "Simulate one corrupted beat frame and write it as an RDC1 complex cube");
    add_common(c_sim, sim.common, "Output RDC1 file", true);
    c_sim->add_option("--targets", sim.targets, "JSON array of targets {range_m, radial_velocity_mps, rcs_m2}")
        ->check(CLI::ExistingFile);
    c_sim->add_option("--scenario", sim.scenario, "Canonical aggressor pairing 1..7")->check(CLI::Range(1, 7));
    c_sim->add_option("--interferer", sim.interferer, "JSON interferer object or array")->check(CLI::ExistingFile);
    c_sim->add_option("--sinr", sim.sinr, "Rescale the interference to this SINR level [dB]");
    c_sim->add_flag("--no-noise", sim.no_noise, "Omit receiver noise");

    SynthesizeArgs syn;
    auto* c_syn = app.add_subcommand("synthesize-dataset", "Generate the triplet dataset");
    add_common(c_syn, syn.common, "Same as --out-dir", false);
    c_syn->add_option("--scene", syn.scene, "Scene specification JSON")->check(CLI::ExistingFile);
    c_syn->add_option("--out-dir", syn.out_dir, "Dataset directory");
    c_syn->add_option("--jobs", syn.jobs, "Worker threads")->check(CLI::Range(1u, 1024u))->capture_default_str();

    MitigateArgs mit;
    auto* c_mit = app.add_subcommand("mitigate", "Zeroing or IMAT on an RDC1 complex beat cube");
    add_common(c_mit, mit.common, "Output RDC1 file (a JSON sidecar is written next to it)", true);
    c_mit->add_option("--in", mit.in, "Input RDC1 complex cube (N x M x frames)")->required()->check(CLI::ExistingFile);
    c_mit->add_option("--method", mit.method, "zeroing or imat")
        ->check(CLI::IsMember({"zeroing", "imat"}))
        ->capture_default_str();
    c_mit->add_option("--k-sigma", mit.k_sigma, "Detection threshold in robust sigmas")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    c_mit->add_option("--iters", mit.iters, "IMAT iterations")->check(CLI::Range(1, 100000))->capture_default_str();
    c_mit->add_option("--decay", mit.decay, "IMAT threshold decay in (0, 1)")->capture_default_str();

    EvaluateArgs ev;
    auto* c_ev = app.add_subcommand("evaluate", "Score a dataset with SINR / EVM / AP");
    add_common(c_ev, ev.common, "Same as --report", false);
    c_ev->add_option("--dataset", ev.dataset, "Dataset directory")->required()->check(CLI::ExistingDirectory);
    c_ev->add_option("--method", ev.method, "reference, corrupted, zeroing, imat or denoised")
        ->check(CLI::IsMember({"reference", "corrupted", "zeroing", "imat", "denoised"}))
        ->capture_default_str();
    c_ev->add_option("--denoised-dir", ev.denoised_dir, "Directory of sample_XXXXXX.rdc normalized dB maps")
        ->check(CLI::ExistingDirectory);
    c_ev->add_option("--report", ev.report, "CSV report path");
    c_ev->add_option("--log", ev.log, "Line-delimited JSON log path");
    c_ev->add_option("--split", ev.split, "Restrict to train, val or test")->check(CLI::IsMember({"train", "val", "test"}));
    c_ev->add_option("--export-maps", ev.export_maps, "Also write the method's normalized dB maps for --denoised-dir");
    c_ev->add_option("--jobs", ev.jobs, "Worker threads")->check(CLI::Range(1u, 1024u))->capture_default_str();
    c_ev->add_option("--k-sigma", ev.k_sigma, "Detection threshold in robust sigmas")->check(CLI::PositiveNumber);
    c_ev->add_option("--iters", ev.iters, "IMAT iterations")->check(CLI::Range(1, 100000));
    c_ev->add_option("--decay", ev.decay, "IMAT threshold decay in (0, 1)");

    ExportArgs ex;
    auto* c_ex = app.add_subcommand("export-map", "Write an RD map as 16-bit PGM plus axis CSV");
    add_common(c_ex, ex.common, "Same as --out-pgm", false);
    c_ex->add_option("--in", ex.in, "RDC1 file (complex beat cube or dB magnitude maps)")
        ->required()
        ->check(CLI::ExistingFile);
    c_ex->add_option("--frame", ex.frame, "Frame index")->capture_default_str();
    c_ex->add_option("--out-pgm", ex.out_pgm, "PGM output path");
    c_ex->add_option("--out-axes", ex.out_axes, "CSV of range / velocity axis values");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::CallForVersion&) {
        out << app.version() << '\n';
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        const CLI::App* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
        err << sub->help();
        return kExitUsage;
    }

    try {
        if (c_sim->parsed()) return run_simulate(sim);
        if (c_syn->parsed()) {
            syn.seed_given = c_syn->count("--seed") > 0;
            return run_synthesize(syn, out);
        }
        if (c_mit->parsed()) return run_mitigate(mit);
        if (c_ev->parsed()) return run_evaluate(ev, out);
        if (c_ex->parsed()) return run_export(ex);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitUsage;
}

}  // namespace rdlab::cli
