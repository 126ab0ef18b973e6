/**
 * @file dataset.hpp
 * @brief Triplet dataset synthesis: persistent target scenes, Monte-Carlo
 *        interferers at seven SINR levels, clutter filtering, splits and storage.
 *
 * Directory layout written by synthesize_dataset:
 *   manifest.jsonl                 header record, then one record per sample
 *   maps/seqSSS_lvlL_fFFFFF.rdc    normalized dB map of a corrupted frame
 *   refs/seqSSS_fFFFFF.rdc         normalized dB map of the clean reference
 *   beat/seqSSS_lvlL_fFFFFF.rdc    corrupted beat frame (complex), frame t only
 *   clean_beat/seqSSS_fFFFFF.rdc   clean beat frame (complex), frame t only
 */
#pragma once

#include "rdlab/core.hpp"
#include "rdlab/detection_metrics.hpp"
#include "rdlab/mitigation.hpp"
#include "rdlab/rd_pipeline.hpp"
#include "rdlab/rdc_format.hpp"
#include "rdlab/rng.hpp"
#include "rdlab/signal_model.hpp"
#include "rdlab/sinr_scaling.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace rdlab {

inline constexpr int kManifestFormatVersion = 1;
inline constexpr std::array<double, 7> kSinrLevelsDb = {-5.0, 0.0, 5.0, 10.0, 15.0, 20.0, 25.0};
inline constexpr std::array<double, 5> kInterfererCarriersHz = {76.8e9, 76.9e9, 77.0e9, 77.1e9, 77.2e9};
// Redraws after the first infeasible interferer before a (frame, level) is skipped.
inline constexpr int kMaxInterfererRedraws = 8;
// Draws that never enter the victim's sampled band are discarded without counting as redraws.
inline constexpr int kMaxSilentDraws = 256;
// SINR measure that defines the dataset levels.
inline constexpr SinrDefinition kLevelSinrDefinition = SinrDefinition::reference_signal;
// Detector used to find object/noise cells on clean references.
inline constexpr double kReferenceCfarPfa = 1e-6;

inline CfarParams reference_cfar_params() {
    CfarParams p;
    p.probability_false_alarm = kReferenceCfarPfa;
    return p;
}

// ---- scene -----------------------------------------------------------------

struct SceneSpec {
    std::uint32_t sequences = 1;
    std::uint32_t frames_per_sequence = 100;
    std::uint32_t min_targets = 1;
    std::uint32_t max_targets = 3;
    double range_min_m = 10.0;
    double range_max_m = 60.0;
    // Speeds are drawn from [min, max] and given a random sign, keeping targets
    // out of the zero-Doppler clutter band.
    double speed_min_mps = 1.0;
    double speed_max_mps = 15.0;
    double rcs_min_m2 = 5.0;
    double rcs_max_m2 = 30.0;
    std::uint64_t master_seed = 1;
    double frame_interval_s = 1.0 / 30.0;
    std::uint32_t interferers_per_frame = 1;
    bool noise_free_reference = false;
    RadarConfig radar;

    void validate() const {
        radar.validate();
        if (sequences < 1 || frames_per_sequence < 1) throw DomainError("SceneSpec: counts must be >= 1");
        if (min_targets < 1 || max_targets < min_targets) throw DomainError("SceneSpec: need 1 <= min_targets <= max_targets");
        if (interferers_per_frame < 1) throw DomainError("SceneSpec: interferers_per_frame must be >= 1");
        if (!(range_min_m > 0.0 && range_max_m > range_min_m)) throw DomainError("SceneSpec: bad range interval");
        const double max_range = radar.sampling_freq_hz * kSpeedOfLight / (2.0 * radar.chirp_rate());
        if (!(range_max_m < max_range)) throw DomainError("SceneSpec: range_max_m beyond the sampled beat band");
        if (!(speed_min_mps >= 0.0 && speed_max_mps >= speed_min_mps)) throw DomainError("SceneSpec: bad speed interval");
        if (!(speed_max_mps < radar.max_unambiguous_velocity()))
            throw DomainError("SceneSpec: speed_max_mps beyond the unambiguous velocity");
        if (!(rcs_min_m2 > 0.0 && rcs_max_m2 >= rcs_min_m2)) throw DomainError("SceneSpec: bad RCS interval");
        if (!(frame_interval_s > 0.0)) throw DomainError("SceneSpec: frame_interval_s must be > 0");
    }

    bool operator==(const SceneSpec&) const = default;
};

inline void to_json(nlohmann::json& j, const SceneSpec& s) {
    j = nlohmann::json{{"sequences", s.sequences},
                       {"frames_per_sequence", s.frames_per_sequence},
                       {"min_targets", s.min_targets},
                       {"max_targets", s.max_targets},
                       {"range_min_m", s.range_min_m},
                       {"range_max_m", s.range_max_m},
                       {"speed_min_mps", s.speed_min_mps},
                       {"speed_max_mps", s.speed_max_mps},
                       {"rcs_min_m2", s.rcs_min_m2},
                       {"rcs_max_m2", s.rcs_max_m2},
                       {"master_seed", s.master_seed},
                       {"frame_interval_s", s.frame_interval_s},
                       {"interferers_per_frame", s.interferers_per_frame},
                       {"noise_free_reference", s.noise_free_reference},
                       {"radar", s.radar}};
}

inline void from_json(const nlohmann::json& j, SceneSpec& s) {
    detail::reject_unknown_keys(j,
                                {"sequences", "frames_per_sequence", "min_targets", "max_targets", "range_min_m",
                                 "range_max_m", "speed_min_mps", "speed_max_mps", "rcs_min_m2", "rcs_max_m2",
                                 "master_seed", "frame_interval_s", "interferers_per_frame", "noise_free_reference",
                                 "radar"},
                                "SceneSpec");
    detail::read_field(j, "sequences", s.sequences);
    detail::read_field(j, "frames_per_sequence", s.frames_per_sequence);
    detail::read_field(j, "min_targets", s.min_targets);
    detail::read_field(j, "max_targets", s.max_targets);
    detail::read_field(j, "range_min_m", s.range_min_m);
    detail::read_field(j, "range_max_m", s.range_max_m);
    detail::read_field(j, "speed_min_mps", s.speed_min_mps);
    detail::read_field(j, "speed_max_mps", s.speed_max_mps);
    detail::read_field(j, "rcs_min_m2", s.rcs_min_m2);
    detail::read_field(j, "rcs_max_m2", s.rcs_max_m2);
    detail::read_field(j, "master_seed", s.master_seed);
    detail::read_field(j, "frame_interval_s", s.frame_interval_s);
    detail::read_field(j, "interferers_per_frame", s.interferers_per_frame);
    detail::read_field(j, "noise_free_reference", s.noise_free_reference);
    detail::read_field(j, "radar", s.radar);
}

// Stream tags for the counter-based substreams.
namespace stream {
inline constexpr std::uint64_t scene = 1;
inline constexpr std::uint64_t noise = 2;
inline constexpr std::uint64_t interferer = 3;
inline constexpr std::uint64_t split = 4;
}  // namespace stream

/// Targets of `sequence` at frame 0. Drawn once; kinematics carry them forward.
inline std::vector<Target> initial_targets(const SceneSpec& scene, std::uint32_t sequence) {
    Rng rng({scene.master_seed, stream::scene, sequence});
    const auto count = scene.min_targets + static_cast<std::uint32_t>(rng.below(scene.max_targets - scene.min_targets + 1));
    std::vector<Target> targets(count);
    for (auto& t : targets) {
        t.range_m = rng.uniform(scene.range_min_m, scene.range_max_m);
        const double speed = rng.uniform(scene.speed_min_mps, scene.speed_max_mps);
        t.radial_velocity_mps = rng.uniform() < 0.5 ? -speed : speed;
        t.rcs_m2 = rng.uniform(scene.rcs_min_m2, scene.rcs_max_m2);
    }
    return targets;
}

/// Targets at `frame`: r + v * frame * interval, wrapped into [range_min, range_max).
inline std::vector<Target> targets_at_frame(const SceneSpec& scene, std::span<const Target> initial, std::uint32_t frame) {
    const double span = scene.range_max_m - scene.range_min_m;
    std::vector<Target> out(initial.begin(), initial.end());
    for (auto& t : out) {
        const double moved = t.range_m - scene.range_min_m + t.radial_velocity_mps * frame * scene.frame_interval_s;
        t.range_m = scene.range_min_m + (moved - span * std::floor(moved / span));
    }
    return out;
}

// ---- interferer draws --------------------------------------------------------

/// Monte-Carlo aggressor: carrier on the 0.1 GHz grid 76.8..77.2 GHz, B in
/// [120, 400] MHz, T_c in [4, 30] us, distance in [2, 63] m, velocity in
/// [-23.05, 0] m/s, time offset uniform over one aggressor ramp, and a SINR
/// level from the seven-value grid.
inline InterfererConfig sample_interferer(Rng& rng) {
    InterfererConfig c;
    c.carrier_freq_hz = kInterfererCarriersHz[rng.below(kInterfererCarriersHz.size())];
    c.sweep_bandwidth_hz = rng.uniform(120e6, 400e6);
    c.sweep_duration_s = rng.uniform(4e-6, 30e-6);
    c.distance_m = rng.uniform(2.0, 63.0);
    c.radial_velocity_mps = rng.uniform(-23.05, 0.0);
    c.time_offset_s = rng.uniform(0.0, c.sweep_duration_s);
    c.target_sinr_db = kSinrLevelsDb[rng.below(kSinrLevelsDb.size())];
    return c;
}

// ---- clutter -----------------------------------------------------------------

/// Cross-shaped clutter region: range rows [0, range_bins) over all Doppler
/// bins, plus Doppler columns Q/2 - doppler_half_width .. Q/2 + doppler_half_width
/// over all ranges. Cells inside it that exceed the map median are set to the median.
inline RdMap clutter_filter(const RdMap& map, int range_bins = 2, int doppler_half_width = 1) {
    if (map.kind() != ValueKind::magnitude) throw DomainError("clutter_filter: map must be real-valued");
    if (map.normalization()) throw DomainError("clutter_filter: denormalize first");
    const Eigen::Index P = map.range_bins();
    const Eigen::Index Q = map.doppler_bins();
    if (range_bins < 0 || range_bins > P || doppler_half_width < 0 || 2 * doppler_half_width + 1 > Q)
        throw DomainError("clutter_filter: mask outside the map");
    RealGrid v = map.real_values();
    const auto& src = map.real_values();
    std::vector<double> all(src.data(), src.data() + src.size());
    const double median = detail::median_of(std::move(all));
    auto clamp_cell = [&](Eigen::Index p, Eigen::Index q) {
        if (v(p, q) > median) v(p, q) = median;
    };
    for (Eigen::Index p = 0; p < range_bins; ++p)
        for (Eigen::Index q = 0; q < Q; ++q) clamp_cell(p, q);
    for (Eigen::Index q = Q / 2 - doppler_half_width; q <= Q / 2 + doppler_half_width; ++q)
        for (Eigen::Index p = range_bins; p < P; ++p) clamp_cell(p, q);
    return RdMap::from_real(map.config(), std::move(v), map.scale());
}

/// dB conversion followed by clutter filtering: the map fed to storage and scoring.
inline RdMap processed_db_map(const RdMap& linear_or_complex) { return clutter_filter(to_db(linear_or_complex)); }

/// Unique expected bins of the targets, sorted by (p, q).
inline PeakList reference_peaks(const RadarConfig& cfg, std::span<const Target> targets) {
    PeakList out;
    for (const auto& t : targets) {
        const RdBin b = expected_peak_bin(cfg, t);
        if (std::none_of(out.peaks.begin(), out.peaks.end(), [&](const Peak& pk) { return pk.p == b.p && pk.q == b.q; }))
            out.peaks.push_back({b.p, b.q, 0.0});
    }
    std::sort(out.peaks.begin(), out.peaks.end(),
              [](const Peak& a, const Peak& b) { return std::tie(a.p, a.q) < std::tie(b.p, b.q); });
    return out;
}

// ---- manifest ----------------------------------------------------------------

enum class Split { train, val, test };

inline std::string_view to_string(Split s) {
    switch (s) {
        case Split::train: return "train";
        case Split::val: return "val";
        case Split::test: return "test";
    }
    return "train";
}

inline Split split_from_string(std::string_view s) {
    if (s == "train") return Split::train;
    if (s == "val") return Split::val;
    if (s == "test") return Split::test;
    throw DomainError("unknown split '" + std::string(s) + "'");
}

struct SampleFiles {
    std::string t, t1, t2, ref, beat, ref_beat;  // relative to the dataset directory
};

struct SampleRecord {
    std::int64_t sample_id = 0;
    Split split = Split::train;
    std::uint32_t sequence = 0;
    std::uint32_t frame_t = 0;
    int level_index = 0;
    double sinr_db = 0.0;           // requested level
    double measured_sinr_db = 0.0;       // level definition, complex RD map of frame t
    double corrupted_map_sinr_db = 0.0;  // both powers read from the corrupted map
    double interference_scale = 0.0;
    int attempts = 1;
    InterfererConfig interferer;              // draw used at frame t
    std::vector<InterfererConfig> context;    // draws at t-1 and t-2
    SampleFiles files;
    std::vector<RdBin> reference_peaks;
};

struct SkipRecord {
    std::uint32_t sequence = 0;
    std::uint32_t frame = 0;
    int level_index = 0;
    std::string reason;
};

struct DatasetCounts {
    std::uint64_t frames = 0;            // clean frames
    std::uint64_t augmented_frames = 0;  // frames x levels
    std::uint64_t samples = 0;
    std::uint64_t train = 0, val = 0, test = 0;
    std::uint64_t dropped_samples = 0;   // triplets lost to skipped (frame, level) pairs
};

struct DatasetManifest {
    int format_version = kManifestFormatVersion;
    NormStats norm;
    std::string config_hash;
    SceneSpec scene;
    DatasetCounts counts;
    std::vector<SkipRecord> skips;
    std::vector<SampleRecord> samples;

    std::vector<const SampleRecord*> split_samples(std::optional<Split> which) const {
        std::vector<const SampleRecord*> out;
        for (const auto& s : samples)
            if (!which || s.split == *which) out.push_back(&s);
        return out;
    }
};

/// Augmented frame total for a frame count and the seven-level grid.
constexpr std::uint64_t augmented_frame_count(std::uint64_t frames) { return frames * kSinrLevelsDb.size(); }

/// Non-overlapping triplets over sequences of the given lengths, for all seven levels.
inline std::uint64_t expected_sample_count(std::span<const std::uint32_t> frames_per_sequence) {
    std::uint64_t n = 0;
    for (auto f : frames_per_sequence) n += static_cast<std::uint64_t>(f / 3) * kSinrLevelsDb.size();
    return n;
}

/// Validation and test sizes are floor(0.2 n); training takes the rest.
inline std::array<std::uint64_t, 3> split_sizes(std::uint64_t n) {
    const std::uint64_t val = n / 5;
    return {n - 2 * val, val, val};
}

/// 64-bit FNV-1a over `text`, as 16 lowercase hex digits.
inline std::string fnv1a_hex(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline std::string scene_config_hash(const SceneSpec& scene) { return fnv1a_hex(nlohmann::json(scene).dump()); }

inline nlohmann::json manifest_header_json(const DatasetManifest& m) {
    nlohmann::json splits = {{"train", nlohmann::json::array()}, {"val", nlohmann::json::array()}, {"test", nlohmann::json::array()}};
    for (const auto& s : m.samples) splits[std::string(to_string(s.split))].push_back(s.sample_id);
    nlohmann::json skips = nlohmann::json::array();
    for (const auto& s : m.skips)
        skips.push_back({{"sequence", s.sequence}, {"frame", s.frame}, {"level_index", s.level_index}, {"reason", s.reason}});
    return {{"record", "header"},
            {"format_version", m.format_version},
            {"norm_stats", {{"mean", m.norm.mean}, {"std", m.norm.std}, {"min", m.norm.min}, {"max", m.norm.max}}},
            {"config_hash", m.config_hash},
            {"scene", m.scene},
            {"sinr_levels_db", kSinrLevelsDb},
            {"counts",
             {{"frames", m.counts.frames},
              {"augmented_frames", m.counts.augmented_frames},
              {"samples", m.counts.samples},
              {"train", m.counts.train},
              {"val", m.counts.val},
              {"test", m.counts.test},
              {"dropped_samples", m.counts.dropped_samples}}},
            {"splits", splits},
            {"skips", skips},
            {"definitions",
             {{"sinr", "mean clean power over object cells / mean corrupted power over noise cells, complex range-Doppler map of frame t, at synthesis"},
              {"sinr_definition", to_string(kLevelSinrDefinition)},
              {"corrupted_map_sinr", "both powers from the corrupted map"},
              {"object_noise_cells", "CA-CFAR on the clean reference, Pfa 1e-6, objects dilated by 1, noise outside a further 1-cell guard"},
              {"maps", "20 log10 magnitude, clutter filtered, normalized with training-split statistics"},
              {"normalization", "standardize with mean/std then min-max to [0, 1] with clamping"},
              {"interferer_draw", "independent per frame and per level"},
              {"triplets", "non-overlapping frames (3k, 3k+1, 3k+2), frame t = 3k+2"},
              {"mitigation", "per fast-time column"}}}};
}

inline nlohmann::json sample_json(const SampleRecord& s) {
    nlohmann::json peaks = nlohmann::json::array();
    for (const auto& b : s.reference_peaks) peaks.push_back({b.p, b.q});
    return {{"record", "sample"},
            {"sample_id", s.sample_id},
            {"split", to_string(s.split)},
            {"sequence", s.sequence},
            {"frame_t", s.frame_t},
            {"level_index", s.level_index},
            {"sinr_db", s.sinr_db},
            {"measured_sinr_db", s.measured_sinr_db},
            {"corrupted_map_sinr_db", s.corrupted_map_sinr_db},
            {"interference_scale", s.interference_scale},
            {"attempts", s.attempts},
            {"interferer", s.interferer},
            {"context_interferers", s.context},
            {"files",
             {{"t", s.files.t}, {"t1", s.files.t1}, {"t2", s.files.t2}, {"ref", s.files.ref}, {"beat", s.files.beat},
              {"ref_beat", s.files.ref_beat}}},
            {"reference_peaks", peaks}};
}

inline void write_manifest(const DatasetManifest& m, const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    os << manifest_header_json(m).dump() << '\n';
    for (const auto& s : m.samples) os << sample_json(s).dump() << '\n';
    if (!os) throw std::runtime_error("write failed: " + path.string());
}

inline DatasetManifest read_manifest(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path.string());
    DatasetManifest m;
    std::string line;
    bool have_header = false;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw FormatError("manifest line " + std::to_string(line_no) + ": " + e.what(), e.byte);
        }
        const std::string kind = j.value("record", "");
        if (kind == "header") {
            m.format_version = j.at("format_version").get<int>();
            if (m.format_version != kManifestFormatVersion)
                throw DomainError("manifest: unsupported format_version " + std::to_string(m.format_version));
            const auto& ns = j.at("norm_stats");
            m.norm = {ns.at("mean").get<double>(), ns.at("std").get<double>(), ns.at("min").get<double>(),
                      ns.at("max").get<double>()};
            m.config_hash = j.at("config_hash").get<std::string>();
            m.scene = j.at("scene").get<SceneSpec>();
            const auto& c = j.at("counts");
            m.counts = {c.at("frames").get<std::uint64_t>(),  c.at("augmented_frames").get<std::uint64_t>(),
                        c.at("samples").get<std::uint64_t>(), c.at("train").get<std::uint64_t>(),
                        c.at("val").get<std::uint64_t>(),     c.at("test").get<std::uint64_t>(),
                        c.at("dropped_samples").get<std::uint64_t>()};
            for (const auto& s : j.at("skips"))
                m.skips.push_back({s.at("sequence").get<std::uint32_t>(), s.at("frame").get<std::uint32_t>(),
                                   s.at("level_index").get<int>(), s.at("reason").get<std::string>()});
            have_header = true;
        } else if (kind == "sample") {
            SampleRecord s;
            s.sample_id = j.at("sample_id").get<std::int64_t>();
            s.split = split_from_string(j.at("split").get<std::string>());
            s.sequence = j.at("sequence").get<std::uint32_t>();
            s.frame_t = j.at("frame_t").get<std::uint32_t>();
            s.level_index = j.at("level_index").get<int>();
            s.sinr_db = j.at("sinr_db").get<double>();
            s.measured_sinr_db = j.at("measured_sinr_db").get<double>();
            s.corrupted_map_sinr_db = j.at("corrupted_map_sinr_db").get<double>();
            s.interference_scale = j.at("interference_scale").get<double>();
            s.attempts = j.at("attempts").get<int>();
            s.interferer = j.at("interferer").get<InterfererConfig>();
            s.context = j.at("context_interferers").get<std::vector<InterfererConfig>>();
            const auto& f = j.at("files");
            s.files = {f.at("t").get<std::string>(),    f.at("t1").get<std::string>(),
                       f.at("t2").get<std::string>(),   f.at("ref").get<std::string>(),
                       f.at("beat").get<std::string>(), f.at("ref_beat").get<std::string>()};
            for (const auto& b : j.at("reference_peaks")) s.reference_peaks.push_back({b.at(0).get<Eigen::Index>(), b.at(1).get<Eigen::Index>()});
            m.samples.push_back(std::move(s));
        } else {
            throw FormatError("manifest line " + std::to_string(line_no) + ": unknown record type", 0);
        }
    }
    if (!have_header) throw FormatError("manifest: missing header record", 0);
    return m;
}

// ---- synthesis ---------------------------------------------------------------

namespace detail {

inline std::string frame_tag(std::uint32_t seq, std::uint32_t frame) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "seq%03u_f%05u", seq, frame);
    return buf;
}

inline std::string level_frame_tag(std::uint32_t seq, int level, std::uint32_t frame) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "seq%03u_lvl%d_f%05u", seq, level, frame);
    return buf;
}

/// Runs fn(i) for i in [0, n) on up to `jobs` threads. The first exception is rethrown.
inline void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& fn) {
    jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
    if (jobs == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < jobs; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                    next = n;
                }
            }
        });
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

/// True when the aggressor is audible anywhere in the frame.
inline bool has_energy(const BeatFrame& f) { return f.samples().cwiseAbs2().sum() > 0.0; }

struct CleanFrame {
    std::vector<Target> targets;
    std::optional<BeatFrame> beat;  // with noise: the signal the interference is added to
    std::optional<RdMap> reference_rd;
    std::pair<CellSet, CellSet> cells;
    bool has_cells = false;  // false when the reference shows no object peak
    RealGrid reference_db;  // clutter-filtered dB map of the reference
};

struct CorruptedFrame {
    bool skipped = false;
    std::string skip_reason;
    InterfererConfig interferer;
    double scale = 0.0;
    double measured_sinr_db = 0.0;
    double corrupted_map_sinr_db = 0.0;
    int attempts = 0;
    RealGrid map_db;
    std::optional<BeatFrame> beat;
};

inline CleanFrame make_clean_frame(const SceneSpec& scene, std::span<const Target> initial, std::uint32_t seq,
                                   std::uint32_t frame) {
    CleanFrame out;
    out.targets = targets_at_frame(scene, initial, frame);
    const std::uint64_t noise_seed = stream_key({scene.master_seed, stream::noise, seq, frame});
    out.beat = synthesize_clean_beat(scene.radar, out.targets, noise_seed, true);
    const BeatFrame ref_beat =
        scene.noise_free_reference ? synthesize_clean_beat(scene.radar, out.targets, noise_seed, false) : *out.beat;
    out.reference_rd = range_doppler_map(*out.beat);
    try {
        out.cells = object_noise_cells(*out.reference_rd, reference_cfar_params());
        out.has_cells = true;
    } catch (const UndefinedSinrError&) {
        out.has_cells = false;
    }
    out.reference_db = processed_db_map(range_doppler_map(ref_beat)).real_values();
    return out;
}

/// One interferer sum at unit scale: `count` independent audible draws.
inline std::optional<std::pair<BeatFrame, InterfererConfig>> draw_interference(const RadarConfig& cfg, Rng& rng,
                                                                               std::uint32_t count) {
    BeatFrame total = BeatFrame::zeros(cfg, Provenance::interference_only);
    InterfererConfig first;
    for (std::uint32_t k = 0; k < count; ++k) {
        bool found = false;
        for (int silent = 0; silent < kMaxSilentDraws && !found; ++silent) {
            InterfererConfig c = sample_interferer(rng);
            c.target_sinr_db.reset();
            BeatFrame f = synthesize_interference(cfg, c);
            if (!has_energy(f)) continue;
            total = BeatFrame(cfg, total.samples() + f.samples(), Provenance::interference_only);
            if (k == 0) first = c;
            found = true;
        }
        if (!found) return std::nullopt;
    }
    return std::make_pair(std::move(total), first);
}

inline CorruptedFrame make_corrupted_frame(const SceneSpec& scene, const CleanFrame& clean, std::uint32_t seq,
                                           std::uint32_t frame, int level, bool keep_beat) {
    CorruptedFrame out;
    const double target = kSinrLevelsDb[static_cast<std::size_t>(level)];
    if (!clean.has_cells) {
        out.skipped = true;
        out.skip_reason = "reference has no object cells";
        return out;
    }
    for (int attempt = 0; attempt <= kMaxInterfererRedraws; ++attempt) {
        out.attempts = attempt + 1;
        Rng rng({scene.master_seed, stream::interferer, seq, frame, static_cast<std::uint64_t>(level),
                 static_cast<std::uint64_t>(attempt)});
        auto drawn = draw_interference(scene.radar, rng, scene.interferers_per_frame);
        if (!drawn) {
            out.skip_reason = "no audible interferer";
            continue;
        }
        double s = 0.0;
        try {
            s = scale_to_sinr(*clean.reference_rd, drawn->first, target, clean.cells, kLevelSinrDefinition);
        } catch (const InfeasibleError& e) {
            out.skip_reason = e.what();
            continue;
        }
        const BeatFrame corrupted = superimpose(*clean.beat, drawn->first, s);
        const RdMap rd = range_doppler_map(corrupted);
        out.interferer = drawn->second;
        out.interferer.target_sinr_db = target;
        out.scale = s;
        out.measured_sinr_db = measured_sinr_db(*clean.reference_rd, rd, clean.cells, kLevelSinrDefinition);
        out.corrupted_map_sinr_db = sinr_db(rd, clean.cells.first, clean.cells.second);
        out.map_db = processed_db_map(rd).real_values();
        if (keep_beat) out.beat = corrupted;
        out.skip_reason.clear();
        return out;
    }
    out.skipped = true;
    return out;
}

}  // namespace detail

struct SynthesisOptions {
    unsigned jobs = 1;
    bool write_files = true;
    // Called after each sequence with (sequences done, total).
    std::function<void(std::uint32_t, std::uint32_t)> progress;
};

/// Generates the full dataset into `out_dir` (created if missing) and returns
/// its manifest. Output bytes depend only on `scene`, never on `jobs`.
inline DatasetManifest synthesize_dataset(const SceneSpec& scene, const std::filesystem::path& out_dir,
                                          const SynthesisOptions& options = {}) {
    scene.validate();
    namespace fs = std::filesystem;
    const std::uint32_t F = scene.frames_per_sequence;
    const int L = static_cast<int>(kSinrLevelsDb.size());

    struct PendingSample {
        SampleRecord record;
        std::array<RealGrid, 3> maps;  // t, t-1, t-2
        RealGrid reference;
        BeatFrame beat;
        BeatFrame clean_beat;
    };
    std::vector<PendingSample> pending;
    DatasetManifest manifest;
    manifest.scene = scene;
    manifest.config_hash = scene_config_hash(scene);
    manifest.counts.frames = std::uint64_t{scene.sequences} * F;
    manifest.counts.augmented_frames = augmented_frame_count(manifest.counts.frames);

    for (std::uint32_t seq = 0; seq < scene.sequences; ++seq) {
        const auto initial = initial_targets(scene, seq);
        std::vector<detail::CleanFrame> clean(F);
        detail::parallel_for(F, options.jobs, [&](std::size_t f) {
            clean[f] = detail::make_clean_frame(scene, initial, seq, static_cast<std::uint32_t>(f));
        });

        // One job per level; frames inside a job run sequentially.
        std::vector<std::vector<detail::CorruptedFrame>> corrupted(static_cast<std::size_t>(L));
        detail::parallel_for(static_cast<std::size_t>(L), options.jobs, [&](std::size_t lvl) {
            auto& row = corrupted[lvl];
            row.resize(F);
            for (std::uint32_t f = 0; f < F; ++f)
                row[f] = detail::make_corrupted_frame(scene, clean[f], seq, f, static_cast<int>(lvl), f % 3 == 2);
        });

        for (int lvl = 0; lvl < L; ++lvl) {
            for (std::uint32_t f = 0; f < F; ++f) {
                const auto& c = corrupted[static_cast<std::size_t>(lvl)][f];
                if (c.skipped) manifest.skips.push_back({seq, f, lvl, c.skip_reason});
            }
            for (std::uint32_t k = 0; 3 * k + 2 < F; ++k) {
                const std::uint32_t t = 3 * k + 2;
                const auto& row = corrupted[static_cast<std::size_t>(lvl)];
                if (row[t].skipped || row[t - 1].skipped || row[t - 2].skipped) {
                    ++manifest.counts.dropped_samples;
                    continue;
                }
                SampleRecord r;
                r.sequence = seq;
                r.frame_t = t;
                r.level_index = lvl;
                r.sinr_db = kSinrLevelsDb[static_cast<std::size_t>(lvl)];
                r.measured_sinr_db = row[t].measured_sinr_db;
                r.corrupted_map_sinr_db = row[t].corrupted_map_sinr_db;
                r.interference_scale = row[t].scale;
                r.attempts = row[t].attempts;
                r.interferer = row[t].interferer;
                r.context = {row[t - 1].interferer, row[t - 2].interferer};
                r.files = {"maps/" + detail::level_frame_tag(seq, lvl, t) + ".rdc",
                           "maps/" + detail::level_frame_tag(seq, lvl, t - 1) + ".rdc",
                           "maps/" + detail::level_frame_tag(seq, lvl, t - 2) + ".rdc",
                           "refs/" + detail::frame_tag(seq, t) + ".rdc",
                           "beat/" + detail::level_frame_tag(seq, lvl, t) + ".rdc",
                           "clean_beat/" + detail::frame_tag(seq, t) + ".rdc"};
                for (const auto& pk : reference_peaks(scene.radar, clean[t].targets).peaks)
                    r.reference_peaks.push_back({pk.p, pk.q});
                pending.push_back({std::move(r),
                                   {row[t].map_db, row[t - 1].map_db, row[t - 2].map_db},
                                   clean[t].reference_db,
                                   *row[t].beat,
                                   *clean[t].beat});
            }
        }
        if (options.progress) options.progress(seq + 1, scene.sequences);
    }

    // Ids in generation order, then a seeded shuffle decides the split.
    const std::size_t n = pending.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) {
        pending[i].record.sample_id = static_cast<std::int64_t>(i);
        order[i] = i;
    }
    Rng split_rng({scene.master_seed, stream::split});
    deterministic_shuffle(order, split_rng);
    const auto [n_train, n_val, n_test] = split_sizes(n);
    for (std::size_t k = 0; k < n; ++k) {
        pending[order[k]].record.split = k < n_val ? Split::val : (k < n_val + n_test ? Split::test : Split::train);
    }
    manifest.counts.samples = n;
    manifest.counts.train = n_train;
    manifest.counts.val = n_val;
    manifest.counts.test = n_test;

    // Normalization statistics over every map a training sample touches.
    std::vector<RealGrid> train_maps;
    for (const auto& p : pending)
        if (p.record.split == Split::train) {
            for (const auto& m : p.maps) train_maps.push_back(m);
            train_maps.push_back(p.reference);
        }
    if (train_maps.empty())
        for (const auto& p : pending) {
            for (const auto& m : p.maps) train_maps.push_back(m);
            train_maps.push_back(p.reference);
        }
    manifest.norm = train_maps.empty() ? NormStats{} : compute_norm_stats(train_maps);
    train_maps.clear();

    for (auto& p : pending) manifest.samples.push_back(p.record);

    if (options.write_files) {
        fs::create_directories(out_dir / "maps");
        fs::create_directories(out_dir / "refs");
        fs::create_directories(out_dir / "beat");
        fs::create_directories(out_dir / "clean_beat");
        const auto& cfg = scene.radar;
        auto normalized = [&](const RealGrid& db) {
            return normalize(RdMap::from_real(cfg, db, Scale::db), manifest.norm).real_values();
        };
        detail::parallel_for(n, options.jobs, [&](std::size_t i) {
            const auto& p = pending[i];
            const auto& f = p.record.files;
            const std::array<const std::string*, 3> names = {&f.t, &f.t1, &f.t2};
            for (int k = 0; k < 3; ++k) write_rd_cube(cube_from_map(normalized(p.maps[k])), out_dir / *names[k]);
            write_rd_cube(cube_from_map(normalized(p.reference)), out_dir / f.ref);
            write_rd_cube(cube_from_frame(p.beat), out_dir / f.beat);
            write_rd_cube(cube_from_frame(p.clean_beat), out_dir / f.ref_beat);
        });
        write_manifest(manifest, out_dir / "manifest.jsonl");
    }
    return manifest;
}

// ---- loading -----------------------------------------------------------------

/// A dB map stored in the dataset, denormalized with the manifest statistics.
inline RdMap load_dataset_map(const std::filesystem::path& dir, const std::string& rel, const DatasetManifest& m) {
    const RdCube cube = read_rd_cube(dir / rel);
    if (cube.kind != RdcKind::magnitude || cube.frames != 1) throw DomainError("dataset map must be one magnitude frame");
    RdMap stored = RdMap::from_real(m.scene.radar, map_from_cube(cube), Scale::db);
    return denormalize(attach_normalization(std::move(stored), m.norm));
}

inline BeatFrame load_dataset_beat(const std::filesystem::path& dir, const std::string& rel, const DatasetManifest& m,
                                   Provenance provenance) {
    auto frames = frames_from_cube(read_rd_cube(dir / rel), m.scene.radar, provenance);
    if (frames.size() != 1) throw DomainError("dataset beat file must hold one frame");
    return std::move(frames.front());
}

}  // namespace rdlab
