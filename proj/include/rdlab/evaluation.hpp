/**
 * @file evaluation.hpp
 * @brief Scoring dataset samples with SINR / EVM / AP for one mitigation method.
 *
 * Every method's output goes through the same chain as the stored maps (dB,
 * clutter filter) and is scored as a linear magnitude map. Object and noise
 * cells come from the clean reference of each sample.
 */
#pragma once

#include "rdlab/dataset.hpp"
#include "rdlab/detection_metrics.hpp"
#include "rdlab/mitigation.hpp"

#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace rdlab {

enum class Method { reference, corrupted, zeroing, imat, denoised };

inline std::string_view to_string(Method m) {
    switch (m) {
        case Method::reference: return "reference";
        case Method::corrupted: return "corrupted";
        case Method::zeroing: return "zeroing";
        case Method::imat: return "imat";
        case Method::denoised: return "denoised";
    }
    return "unknown";
}

inline Method method_from_string(std::string_view s) {
    for (Method m : {Method::reference, Method::corrupted, Method::zeroing, Method::imat, Method::denoised})
        if (to_string(m) == s) return m;
    throw DomainError("unknown method '" + std::string(s) + "'");
}

struct EvalOptions {
    Method method = Method::corrupted;
    std::optional<std::filesystem::path> denoised_dir;  // required for Method::denoised
    std::optional<Split> split;                         // all samples when empty
    double k_sigma = kDefaultKSigma;
    ImatParams imat;
    CfarParams detector;  // AP detector, Pfa 1e-3 by default
    int ap_tolerance_bins = 1;
    unsigned jobs = 1;
};

/// File name of an externally produced map for `sample_id`.
inline std::string denoised_file_name(std::int64_t sample_id) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "sample_%06lld.rdc", static_cast<long long>(sample_id));
    return buf;
}

/// dB map -> clutter filter -> linear magnitude (from a complex RD map).
inline RdMap scoring_map(const RdMap& rd) { return RdMap::from_real(rd.config(), processed_db_map(rd).linear_magnitude(), Scale::linear); }

/// dB map already clutter filtered (as stored) -> linear magnitude.
inline RdMap scoring_map_from_db(const RdMap& db) {
    return RdMap::from_real(db.config(), db.linear_magnitude(), Scale::linear);
}

/// Frame-t beat after the requested mitigation (the corrupted beat for `corrupted`).
inline BeatFrame mitigated_beat(const BeatFrame& corrupted, Method method, double k_sigma, const ImatParams& imat_params) {
    switch (method) {
        case Method::corrupted: return corrupted;
        case Method::zeroing: return zeroing(corrupted, detect_interfered_samples(corrupted, k_sigma));
        case Method::imat: return imat(corrupted, detect_interfered_samples(corrupted, k_sigma), imat_params);
        default: throw DomainError("mitigated_beat: method has no time-domain form");
    }
}

/// Scores of `test` against `reference` on the given cells and reference peaks.
inline MetricRecord score_map(std::int64_t sample_id, std::string method, const RdMap& reference, const RdMap& test,
                              const std::pair<CellSet, CellSet>& cells, const PeakList& ref_peaks,
                              const CfarParams& detector, int tolerance_bins) {
    MetricRecord r;
    r.sample_id = sample_id;
    r.method = std::move(method);
    r.sinr_db = sinr_db(test, cells.first, cells.second);
    r.evm = evm(reference, test, cells.first);
    const PeakList detected = cluster_peaks(ca_cfar(test, detector));
    r.ap_percent = average_precision(ref_peaks, detected, tolerance_bins);
    return r;
}

inline MetricRecord evaluate_sample(const std::filesystem::path& dir, const DatasetManifest& manifest,
                                    const SampleRecord& sample, const EvalOptions& options) {
    const BeatFrame clean = load_dataset_beat(dir, sample.files.ref_beat, manifest, Provenance::clean);
    const RdMap clean_rd = range_doppler_map(clean);
    const auto cells = object_noise_cells(clean_rd, reference_cfar_params());
    const RdMap reference = scoring_map(clean_rd);
    PeakList ref_peaks;
    for (const auto& b : sample.reference_peaks) ref_peaks.peaks.push_back({b.p, b.q, 0.0});

    std::optional<RdMap> test;
    switch (options.method) {
        case Method::reference: test = reference; break;
        case Method::denoised: {
            if (!options.denoised_dir) throw DomainError("evaluate: method 'denoised' needs a denoised directory");
            test = scoring_map_from_db(
                load_dataset_map(*options.denoised_dir, denoised_file_name(sample.sample_id), manifest));
            break;
        }
        default: {
            const BeatFrame corrupted = load_dataset_beat(dir, sample.files.beat, manifest, Provenance::corrupted);
            test = scoring_map(range_doppler_map(mitigated_beat(corrupted, options.method, options.k_sigma, options.imat)));
        }
    }
    return score_map(sample.sample_id, std::string(to_string(options.method)), reference, *test, cells, ref_peaks,
                     options.detector, options.ap_tolerance_bins);
}

/// Scores every selected sample, ordered by sample id.
inline std::vector<MetricRecord> evaluate_dataset(const std::filesystem::path& dir, const EvalOptions& options) {
    const DatasetManifest manifest = read_manifest(dir / "manifest.jsonl");
    auto selected = manifest.split_samples(options.split);
    std::sort(selected.begin(), selected.end(),
              [](const SampleRecord* a, const SampleRecord* b) { return a->sample_id < b->sample_id; });
    std::vector<MetricRecord> out(selected.size());
    detail::parallel_for(selected.size(), options.jobs,
                         [&](std::size_t i) { out[i] = evaluate_sample(dir, manifest, *selected[i], options); });
    return out;
}

/// Writes the normalized dB map of a method's output for every selected sample
/// in the layout `evaluate --denoised-dir` reads.
inline void export_method_maps(const std::filesystem::path& dir, const std::filesystem::path& out_dir,
                               const EvalOptions& options) {
    const DatasetManifest manifest = read_manifest(dir / "manifest.jsonl");
    std::filesystem::create_directories(out_dir);
    const auto selected = manifest.split_samples(options.split);
    detail::parallel_for(selected.size(), options.jobs, [&](std::size_t i) {
        const SampleRecord& s = *selected[i];
        const BeatFrame corrupted = load_dataset_beat(dir, s.files.beat, manifest, Provenance::corrupted);
        const RdMap db = processed_db_map(range_doppler_map(mitigated_beat(corrupted, options.method, options.k_sigma, options.imat)));
        write_rd_cube(cube_from_map(normalize(db, manifest.norm).real_values()), out_dir / denoised_file_name(s.sample_id));
    });
}

/// Median of a metric column, ignoring NaNs.
inline double median_metric(const std::vector<MetricRecord>& records, double MetricRecord::*field) {
    std::vector<double> v;
    for (const auto& r : records)
        if (std::isfinite(r.*field)) v.push_back(r.*field);
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    return detail::median_of(std::move(v));
}

}  // namespace rdlab
