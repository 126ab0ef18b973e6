/**
 * @file detection_metrics.hpp
 * @brief CA-CFAR peak detection, DBSCAN peak clustering and the SINR / EVM / AP metrics.
 */
#pragma once

#include "rdlab/core.hpp"
#include "rdlab/rd_pipeline.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdio>
#include <functional>
#include <limits>
#include <ostream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace rdlab {

enum class CellKind { object, noise };

/// Set of RD cells, kept sorted by (p, q) without duplicates.
struct CellSet {
    CellKind kind = CellKind::object;
    Eigen::Index range_bins = 0;
    Eigen::Index doppler_bins = 0;
    std::vector<RdBin> cells;

    std::size_t size() const noexcept { return cells.size(); }
    bool empty() const noexcept { return cells.empty(); }

    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> mask() const {
        Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> m =
            Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>::Constant(range_bins, doppler_bins,
                                                                                          false);
        for (const auto& c : cells) m(c.p, c.q) = true;
        return m;
    }

    bool contains(const RdBin& b) const {
        return std::binary_search(cells.begin(), cells.end(), b, [](const RdBin& x, const RdBin& y) {
            return std::tie(x.p, x.q) < std::tie(y.p, y.q);
        });
    }

    template <typename Mask>
    static CellSet from_mask(const Mask& m, CellKind kind) {
        CellSet s;
        s.kind = kind;
        s.range_bins = m.rows();
        s.doppler_bins = m.cols();
        for (Eigen::Index p = 0; p < m.rows(); ++p)
            for (Eigen::Index q = 0; q < m.cols(); ++q)
                if (m(p, q)) s.cells.push_back({p, q});
        return s;
    }
};

struct CfarParams {
    int guard_range = 2;
    int guard_doppler = 2;
    int train_range = 8;  // per side
    int train_doppler = 8;
    double probability_false_alarm = 1e-3;

    int training_cells() const { return 2 * train_range + 2 * train_doppler; }

    void validate() const {
        if (guard_range < 1 || guard_doppler < 1 || train_range < 1 || train_doppler < 1)
            throw DomainError("CfarParams: guard and training counts must be >= 1");
        if (!(probability_false_alarm > 0.0 && probability_false_alarm < 1.0))
            throw DomainError("CfarParams: probability_false_alarm must be in (0, 1)");
    }
};

struct Peak {
    Eigen::Index p = 0;
    Eigen::Index q = 0;
    double magnitude = 0.0;
};

struct PeakList {
    std::vector<Peak> peaks;
    CfarParams detector;

    std::size_t size() const noexcept { return peaks.size(); }
    bool empty() const noexcept { return peaks.empty(); }
};

/// CA threshold factor for exponentially distributed power: N (Pfa^(-1/N) - 1).
inline double cfar_alpha(int training_cells, double pfa) {
    if (training_cells < 1) throw DomainError("cfar_alpha: need at least one training cell");
    const double n = training_cells;
    return n * (std::pow(pfa, -1.0 / n) - 1.0);
}

/// 2D cross-window CA-CFAR on a linear (complex or magnitude) map. Cell power
/// |x|^2 is compared with alpha times the mean power of the training cells that
/// lie beyond the guard cells along the range and Doppler axes. Edges wrap.
inline PeakList ca_cfar(const RdMap& map, const CfarParams& params = {}) {
    params.validate();
    if (map.scale() != Scale::linear) throw DomainError("ca_cfar: map must be linear (complex or magnitude)");
    const Eigen::Index P = map.range_bins();
    const Eigen::Index Q = map.doppler_bins();
    if (2 * (params.guard_range + params.train_range) + 1 > P ||
        2 * (params.guard_doppler + params.train_doppler) + 1 > Q)
        throw DomainError("ca_cfar: window larger than the map");

    const RealGrid power = map.power();
    const int n_train = params.training_cells();
    const double alpha = cfar_alpha(n_train, params.probability_false_alarm);

    PeakList out;
    out.detector = params;
    for (Eigen::Index p = 0; p < P; ++p) {
        for (Eigen::Index q = 0; q < Q; ++q) {
            double sum = 0.0;
            for (int k = params.guard_range + 1; k <= params.guard_range + params.train_range; ++k) {
                sum += power((p + k) % P, q);
                sum += power((p - k % P + P) % P, q);
            }
            for (int k = params.guard_doppler + 1; k <= params.guard_doppler + params.train_doppler; ++k) {
                sum += power(p, (q + k) % Q);
                sum += power(p, (q - k % Q + Q) % Q);
            }
            const double cell = power(p, q);
            if (cell > alpha * (sum / n_train)) out.peaks.push_back({p, q, std::sqrt(cell)});
        }
    }
    return out;
}

/// DBSCAN in (p, q) bin space with Euclidean distance. Each cluster becomes one
/// peak at its magnitude-weighted centroid (rounded to the nearest bin) carrying
/// the largest member magnitude. Points that belong to no cluster survive only
/// when min_pts == 1, where every point is its own core.
inline PeakList cluster_peaks(const PeakList& peaks, double eps = 1.5, int min_pts = 1) {
    if (!(eps > 0.0)) throw DomainError("cluster_peaks: eps must be > 0");
    if (min_pts < 1) throw DomainError("cluster_peaks: min_pts must be >= 1");
    const auto& pts = peaks.peaks;
    const std::size_t n = pts.size();
    const double eps2 = eps * eps;

    auto neighbours = [&](std::size_t i) {
        std::vector<std::size_t> out;
        for (std::size_t j = 0; j < n; ++j) {
            const double dp = static_cast<double>(pts[i].p - pts[j].p);
            const double dq = static_cast<double>(pts[i].q - pts[j].q);
            if (dp * dp + dq * dq <= eps2) out.push_back(j);
        }
        return out;
    };

    constexpr int kUnvisited = -2;
    constexpr int kNoise = -1;
    std::vector<int> label(n, kUnvisited);
    int clusters = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (label[i] != kUnvisited) continue;
        auto seeds = neighbours(i);
        if (static_cast<int>(seeds.size()) < min_pts) {
            label[i] = kNoise;
            continue;
        }
        const int id = clusters++;
        label[i] = id;
        for (std::size_t k = 0; k < seeds.size(); ++k) {
            const std::size_t j = seeds[k];
            if (label[j] == kNoise) label[j] = id;
            if (label[j] != kUnvisited) continue;
            label[j] = id;
            auto more = neighbours(j);
            if (static_cast<int>(more.size()) >= min_pts) seeds.insert(seeds.end(), more.begin(), more.end());
        }
    }

    struct Acc {
        double wp = 0, wq = 0, w = 0, peak = 0;
    };
    std::vector<Acc> acc(static_cast<std::size_t>(clusters));
    for (std::size_t i = 0; i < n; ++i) {
        if (label[i] < 0) continue;
        auto& a = acc[static_cast<std::size_t>(label[i])];
        const double w = pts[i].magnitude;
        a.wp += w * static_cast<double>(pts[i].p);
        a.wq += w * static_cast<double>(pts[i].q);
        a.w += w;
        a.peak = std::max(a.peak, w);
    }

    PeakList out;
    out.detector = peaks.detector;
    for (const auto& a : acc) {
        if (a.w <= 0.0) continue;
        Peak c{static_cast<Eigen::Index>(std::lround(a.wp / a.w)), static_cast<Eigen::Index>(std::lround(a.wq / a.w)),
               a.peak};
        auto same = std::find_if(out.peaks.begin(), out.peaks.end(),
                                 [&](const Peak& o) { return o.p == c.p && o.q == c.q; });
        if (same == out.peaks.end())
            out.peaks.push_back(c);
        else
            same->magnitude = std::max(same->magnitude, c.magnitude);
    }
    std::sort(out.peaks.begin(), out.peaks.end(),
              [](const Peak& a, const Peak& b) { return std::tie(a.p, a.q) < std::tie(b.p, b.q); });
    return out;
}

namespace detail {

using BoolGrid = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Chebyshev dilation with wrap-around on both axes.
inline BoolGrid dilate(const BoolGrid& in, int radius) {
    if (radius <= 0) return in;
    const Eigen::Index P = in.rows();
    const Eigen::Index Q = in.cols();
    BoolGrid out = BoolGrid::Constant(P, Q, false);
    for (Eigen::Index p = 0; p < P; ++p)
        for (Eigen::Index q = 0; q < Q; ++q)
            if (in(p, q))
                for (int dp = -radius; dp <= radius; ++dp)
                    for (int dq = -radius; dq <= radius; ++dq) out(((p + dp) % P + P) % P, ((q + dq) % Q + Q) % Q) = true;
    return out;
}

}  // namespace detail

/// Object cells O: CFAR detections on the clean reference dilated by
/// `guard_margin`. Noise cells N: everything outside O dilated once more.
/// Throws UndefinedSinrError when the reference has no detections.
inline std::pair<CellSet, CellSet> object_noise_cells(const RdMap& reference, const CfarParams& cfar = {},
                                                      int guard_margin = 1) {
    if (guard_margin < 0) throw DomainError("object_noise_cells: guard_margin must be >= 0");
    const PeakList det = ca_cfar(reference, cfar);
    if (det.empty()) throw UndefinedSinrError("object_noise_cells: reference map has no object peaks");
    detail::BoolGrid hits = detail::BoolGrid::Constant(reference.range_bins(), reference.doppler_bins(), false);
    for (const auto& pk : det.peaks) hits(pk.p, pk.q) = true;
    const detail::BoolGrid objects = detail::dilate(hits, guard_margin);
    const detail::BoolGrid excluded = detail::dilate(objects, guard_margin);
    const detail::BoolGrid noise = excluded.unaryExpr([](bool b) { return !b; });
    return {CellSet::from_mask(objects, CellKind::object), CellSet::from_mask(noise, CellKind::noise)};
}

namespace detail {

inline void check_cells(const RdMap& map, const CellSet& cells, const char* what) {
    if (cells.empty()) throw DomainError(std::string(what) + ": empty cell set");
    for (const auto& c : cells.cells)
        if (c.p < 0 || c.q < 0 || c.p >= map.range_bins() || c.q >= map.doppler_bins())
            throw DomainError(std::string(what) + ": cell outside the map");
}

}  // namespace detail

/// 10 log10 of mean object-cell power over mean noise-cell power.
inline double sinr_db(const RdMap& map, const CellSet& objects, const CellSet& noise) {
    detail::check_cells(map, objects, "sinr_db");
    detail::check_cells(map, noise, "sinr_db");
    const RealGrid power = map.power();
    double po = 0.0;
    for (const auto& c : objects.cells) po += power(c.p, c.q);
    double pn = 0.0;
    for (const auto& c : noise.cells) {
        if (objects.contains(c)) throw DomainError("sinr_db: object and noise cells overlap");
        pn += power(c.p, c.q);
    }
    po /= static_cast<double>(objects.size());
    pn /= static_cast<double>(noise.size());
    return 10.0 * std::log10(po / pn);
}

/// Mean relative error magnitude at the object cells. Complex maps are compared
/// as complex values; otherwise linear magnitudes are compared.
inline double evm(const RdMap& clean, const RdMap& test, const CellSet& objects) {
    if (clean.range_bins() != test.range_bins() || clean.doppler_bins() != test.doppler_bins())
        throw ShapeError("evm: maps differ in shape");
    detail::check_cells(clean, objects, "evm");
    const bool complex_pair = clean.kind() == ValueKind::complex && test.kind() == ValueKind::complex;
    double total = 0.0;
    if (complex_pair) {
        const auto& c = clean.complex_values();
        const auto& t = test.complex_values();
        for (const auto& cell : objects.cells) {
            const double ref = std::abs(c(cell.p, cell.q));
            if (ref == 0.0) throw DomainError("evm: zero reference value at an object cell");
            total += std::abs(c(cell.p, cell.q) - t(cell.p, cell.q)) / ref;
        }
    } else {
        const RealGrid c = clean.linear_magnitude();
        const RealGrid t = test.linear_magnitude();
        for (const auto& cell : objects.cells) {
            const double ref = c(cell.p, cell.q);
            if (ref == 0.0) throw DomainError("evm: zero reference value at an object cell");
            total += std::abs(ref - t(cell.p, cell.q)) / ref;
        }
    }
    return total / static_cast<double>(objects.size());
}

/// Percentage of reference peaks matched one-to-one by a detected peak within
/// Chebyshev distance `tolerance_bins`. Uses a maximum-cardinality matching,
/// so no peak is counted twice and the score never drops as tolerance grows.
inline double average_precision(const PeakList& reference, const PeakList& detected, int tolerance_bins = 1) {
    if (reference.empty()) throw DomainError("average_precision: empty reference peak list");
    if (tolerance_bins < 0) throw DomainError("average_precision: tolerance must be >= 0");
    const auto& ref = reference.peaks;
    const auto& det = detected.peaks;
    std::vector<std::vector<std::size_t>> adj(det.size());
    for (std::size_t d = 0; d < det.size(); ++d)
        for (std::size_t r = 0; r < ref.size(); ++r)
            if (std::max(std::abs(det[d].p - ref[r].p), std::abs(det[d].q - ref[r].q)) <= tolerance_bins)
                adj[d].push_back(r);

    constexpr std::size_t kFree = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> owner(ref.size(), kFree);
    std::vector<char> seen;
    std::function<bool(std::size_t)> augment = [&](std::size_t d) {
        for (std::size_t r : adj[d]) {
            if (seen[r]) continue;
            seen[r] = 1;
            if (owner[r] == kFree || augment(owner[r])) {
                owner[r] = d;
                return true;
            }
        }
        return false;
    };
    std::size_t matched = 0;
    for (std::size_t d = 0; d < det.size(); ++d) {
        seen.assign(ref.size(), 0);
        if (augment(d)) ++matched;
    }
    return 100.0 * static_cast<double>(matched) / static_cast<double>(ref.size());
}

/// One row of an evaluation report.
struct MetricRecord {
    std::int64_t sample_id = 0;
    std::string method;
    double sinr_db = std::numeric_limits<double>::quiet_NaN();
    double evm = std::numeric_limits<double>::quiet_NaN();
    double ap_percent = std::numeric_limits<double>::quiet_NaN();
};

inline constexpr const char* kMetricCsvHeader = "sample_id,method,sinr_db,evm,ap_percent";

inline std::string metric_csv_row(const MetricRecord& r) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%lld,%s,%.6f,%.6f,%.4f", static_cast<long long>(r.sample_id), r.method.c_str(),
                  r.sinr_db, r.evm, r.ap_percent);
    return buf;
}

inline void write_metric_csv(std::ostream& os, const std::vector<MetricRecord>& records) {
    os << kMetricCsvHeader << '\n';
    for (const auto& r : records) os << metric_csv_row(r) << '\n';
}

inline nlohmann::json to_json(const MetricRecord& r) {
    auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
    return {{"sample_id", r.sample_id},
            {"method", r.method},
            {"sinr_db", num(r.sinr_db)},
            {"evm", num(r.evm)},
            {"ap_percent", num(r.ap_percent)}};
}

inline void write_metric_jsonl(std::ostream& os, const std::vector<MetricRecord>& records) {
    for (const auto& r : records) os << to_json(r).dump() << '\n';
}

}  // namespace rdlab
