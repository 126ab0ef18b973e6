/**
 * @file rd_pipeline.hpp
 * @brief Range-Doppler transform, dB conversion and dataset normalization.
 */
#pragma once

#include "rdlab/core.hpp"
#include "rdlab/fft.hpp"
#include "rdlab/radar_config.hpp"
#include "rdlab/signal_model.hpp"

#include <algorithm>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace rdlab {

enum class ValueKind { complex, magnitude };
enum class Scale { linear, db };
enum class Window { rectangular, hann };

/// Standardize-then-min-max parameters. min/max refer to the standardized values.
struct NormStats {
    double mean = 0.0;
    double std = 1.0;
    double min = 0.0;
    double max = 1.0;

    bool operator==(const NormStats&) const = default;
};

struct NormalizationRecord {
    NormStats stats;
    bool degenerate = false;  // zero spread; the map was set to 0.5
};

/// P x Q range-Doppler map. Rows are range bins p, columns Doppler bins q with
/// zero Doppler at column Q/2.
class RdMap {
public:
    static RdMap from_complex(RadarConfig config, ComplexGrid values) {
        RdMap m(std::move(config), ValueKind::complex, Scale::linear);
        m.check_shape(values.rows(), values.cols());
        m.complex_ = std::move(values);
        return m;
    }

    static RdMap from_real(RadarConfig config, RealGrid values, Scale scale) {
        RdMap m(std::move(config), ValueKind::magnitude, scale);
        m.check_shape(values.rows(), values.cols());
        m.real_ = std::move(values);
        return m;
    }

    const RadarConfig& config() const noexcept { return config_; }
    ValueKind kind() const noexcept { return kind_; }
    Scale scale() const noexcept { return scale_; }
    Eigen::Index range_bins() const noexcept { return config_.range_fft_points; }
    Eigen::Index doppler_bins() const noexcept { return config_.doppler_fft_points; }
    bool doppler_centered() const noexcept { return true; }

    const ComplexGrid& complex_values() const {
        if (kind_ != ValueKind::complex) throw DomainError("RdMap: map is not complex");
        return complex_;
    }
    const RealGrid& real_values() const {
        if (kind_ != ValueKind::magnitude) throw DomainError("RdMap: map is not real-valued");
        return real_;
    }

    const std::optional<NormalizationRecord>& normalization() const noexcept { return norm_; }
    void set_normalization(std::optional<NormalizationRecord> rec) { norm_ = std::move(rec); }

    /// |value| in linear units for any kind/scale (dB maps are 20 log10 magnitudes).
    RealGrid linear_magnitude() const {
        if (norm_) throw DomainError("RdMap: denormalize before taking linear magnitudes");
        if (kind_ == ValueKind::complex) return complex_.cwiseAbs();
        if (scale_ == Scale::linear) return real_.cwiseAbs();
        return real_.unaryExpr([](double db) { return std::pow(10.0, db / 20.0); });
    }

    RealGrid power() const { return linear_magnitude().cwiseAbs2(); }

private:
    RdMap(RadarConfig config, ValueKind kind, Scale scale) : config_(std::move(config)), kind_(kind), scale_(scale) {}

    void check_shape(Eigen::Index rows, Eigen::Index cols) const {
        if (rows != static_cast<Eigen::Index>(config_.range_fft_points) ||
            cols != static_cast<Eigen::Index>(config_.doppler_fft_points))
            throw ShapeError("RdMap: values must be range_fft_points x doppler_fft_points");
    }

    RadarConfig config_;
    ValueKind kind_;
    Scale scale_;
    ComplexGrid complex_;
    RealGrid real_;
    std::optional<NormalizationRecord> norm_;
};

namespace detail {

inline std::vector<double> window_coefficients(Window w, Eigen::Index length) {
    std::vector<double> c(static_cast<std::size_t>(length), 1.0);
    if (w == Window::hann && length > 1) {
        for (Eigen::Index i = 0; i < length; ++i)
            c[i] = 0.5 - 0.5 * std::cos(kTwoPi * static_cast<double>(i) / static_cast<double>(length - 1));
    }
    return c;
}

}  // namespace detail

/// Fast-time transform only: P-point DFT of every chirp, P x M output.
inline ComplexGrid range_profiles(const BeatFrame& frame, Window window = Window::rectangular) {
    const auto& cfg = frame.config();
    const Eigen::Index n_fast = frame.fast_time_samples();
    const Eigen::Index n_slow = frame.chirps();
    const Eigen::Index P = cfg.range_fft_points;
    const auto w = detail::window_coefficients(window, n_fast);

    ComplexGrid y(P, n_slow);
    std::vector<cplx> column(static_cast<std::size_t>(P));
    for (Eigen::Index m = 0; m < n_slow; ++m) {
        std::fill(column.begin(), column.end(), cplx{});
        for (Eigen::Index n = 0; n < n_fast; ++n) column[n] = frame.samples()(n, m) * w[n];
        dft_inplace(column);
        for (Eigen::Index p = 0; p < P; ++p) y(p, m) = column[p];
    }
    return y;
}

/// Column-wise P-point DFT over fast time, then row-wise Q-point DFT over slow
/// time, then a circular shift placing zero Doppler at column Q/2. Pure DFT
/// sums: no normalization factor, rectangular window unless asked otherwise.
inline RdMap range_doppler_map(const BeatFrame& frame, Window window = Window::rectangular) {
    const auto& cfg = frame.config();
    const Eigen::Index P = cfg.range_fft_points;
    const Eigen::Index Q = cfg.doppler_fft_points;
    const Eigen::Index n_slow = frame.chirps();
    const ComplexGrid y = range_profiles(frame, window);
    const auto w = detail::window_coefficients(window, n_slow);

    ComplexGrid rd(P, Q);
    std::vector<cplx> row(static_cast<std::size_t>(Q));
    const Eigen::Index shift = Q / 2;
    for (Eigen::Index p = 0; p < P; ++p) {
        std::fill(row.begin(), row.end(), cplx{});
        for (Eigen::Index m = 0; m < n_slow; ++m) row[m] = y(p, m) * w[m];
        dft_inplace(row);
        for (Eigen::Index q = 0; q < Q; ++q) rd(p, (q + shift) % Q) = row[q];
    }
    return RdMap::from_complex(cfg, std::move(rd));
}

inline constexpr double kDbEpsilon = 1e-12;

/// 20 log10(|v| + 1e-12) of a complex or linear-magnitude map.
inline RdMap to_db(const RdMap& map) {
    if (map.scale() == Scale::db) throw DomainError("to_db: map is already in dB");
    RealGrid mag = map.linear_magnitude();
    RealGrid db = mag.unaryExpr([](double a) { return 20.0 * std::log10(a + kDbEpsilon); });
    return RdMap::from_real(map.config(), std::move(db), Scale::db);
}

/// Mean/std of all cells, then min/max of the standardized cells, over a set of dB maps.
inline NormStats compute_norm_stats(std::span<const RealGrid> maps) {
    double sum = 0.0;
    double count = 0.0;
    for (const auto& m : maps) {
        sum += m.sum();
        count += static_cast<double>(m.size());
    }
    if (count == 0.0) throw DomainError("compute_norm_stats: no cells");
    NormStats s;
    s.mean = sum / count;
    double sq = 0.0;
    for (const auto& m : maps) sq += (m.array() - s.mean).square().sum();
    s.std = std::sqrt(sq / count);
    if (s.std == 0.0) {
        s.min = s.max = 0.0;
        return s;
    }
    s.min = std::numeric_limits<double>::infinity();
    s.max = -std::numeric_limits<double>::infinity();
    for (const auto& m : maps) {
        s.min = std::min(s.min, (m.minCoeff() - s.mean) / s.std);
        s.max = std::max(s.max, (m.maxCoeff() - s.mean) / s.std);
    }
    return s;
}

inline RdMap denormalize(const RdMap& map);

/// z = (x - mean) / std, then (z - min) / (max - min), clamped to [0, 1].
/// Without `stats` the map's own statistics are used (single-frame mode). A
/// map that is already normalized is first mapped back, so applying the same
/// stats twice is a no-op.
inline RdMap normalize(const RdMap& map, std::optional<NormStats> stats = std::nullopt) {
    if (map.normalization()) return normalize(denormalize(map), stats);
    if (map.kind() != ValueKind::magnitude || map.scale() != Scale::db)
        throw DomainError("normalize: map must be dB magnitude");
    const RealGrid& x = map.real_values();
    const NormStats s = stats ? *stats : compute_norm_stats(std::span<const RealGrid>(&x, 1));

    NormalizationRecord rec{s, false};
    RealGrid out;
    if (!(s.std > 0.0) || !(s.max > s.min)) {
        rec.degenerate = true;
        out = RealGrid::Constant(x.rows(), x.cols(), 0.5);
    } else {
        const double span = s.max - s.min;
        out = x.unaryExpr([&](double v) { return std::clamp(((v - s.mean) / s.std - s.min) / span, 0.0, 1.0); });
    }
    RdMap result = RdMap::from_real(map.config(), std::move(out), Scale::db);
    result.set_normalization(rec);
    return result;
}

/// Inverse of normalize for unclamped cells; degenerate maps come back at the recorded mean.
inline RdMap denormalize(const RdMap& map) {
    if (!map.normalization()) throw DomainError("denormalize: map carries no normalization record");
    const auto& rec = *map.normalization();
    const auto& s = rec.stats;
    RealGrid out;
    if (rec.degenerate) {
        out = RealGrid::Constant(map.range_bins(), map.doppler_bins(), s.mean);
    } else {
        const double span = s.max - s.min;
        out = map.real_values().unaryExpr([&](double y) { return (y * span + s.min) * s.std + s.mean; });
    }
    return RdMap::from_real(map.config(), std::move(out), Scale::db);
}

/// Wraps `stored` (values as read back from disk) with a normalization record.
inline RdMap attach_normalization(RdMap stored, const NormStats& stats) {
    stored.set_normalization(NormalizationRecord{stats, !(stats.std > 0.0) || !(stats.max > stats.min)});
    return stored;
}

struct RdBin {
    Eigen::Index p = 0;
    Eigen::Index q = 0;
    bool operator==(const RdBin&) const = default;
};

/// Closed-form bin of a point target: beat 2 B D / (c T_c) over f_s / P, and
/// Doppler 2 f_c v / c over 1 / (Q T_r), offset by Q/2.
inline RdBin expected_peak_bin(const RadarConfig& cfg, const Target& target) {
    if (!(target.range_m >= 0.0)) throw DomainError("expected_peak_bin: negative range");
    if (!(std::abs(target.radial_velocity_mps) < cfg.max_unambiguous_velocity()))
        throw DomainError("expected_peak_bin: velocity outside the unambiguous interval");
    const double beat_hz = 2.0 * cfg.sweep_bandwidth_hz * target.range_m / (kSpeedOfLight * cfg.sweep_duration_s);
    if (!(beat_hz < cfg.sampling_freq_hz)) throw DomainError("expected_peak_bin: range beyond the sampled beat band");
    const double doppler_hz = 2.0 * cfg.carrier_freq_hz * target.radial_velocity_mps / kSpeedOfLight;
    const auto P = static_cast<Eigen::Index>(cfg.range_fft_points);
    const auto Q = static_cast<Eigen::Index>(cfg.doppler_fft_points);
    const auto p = static_cast<Eigen::Index>(std::lround(beat_hz / (cfg.sampling_freq_hz / P)));
    const auto dq = static_cast<Eigen::Index>(std::lround(doppler_hz * Q * cfg.chirp_repetition_s));
    return {p % P, ((Q / 2 + dq) % Q + Q) % Q};
}

/// Range in metres at the centre of bin p.
inline double range_of_bin(const RadarConfig& cfg, Eigen::Index p) { return static_cast<double>(p) * cfg.range_bin_m(); }

/// Radial velocity at the centre of Doppler bin q (zero at Q/2).
inline double velocity_of_bin(const RadarConfig& cfg, Eigen::Index q) {
    return static_cast<double>(q - static_cast<Eigen::Index>(cfg.doppler_fft_points) / 2) * cfg.velocity_bin_mps();
}

}  // namespace rdlab
