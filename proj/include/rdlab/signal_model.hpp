/**
 * @file signal_model.hpp
 * @brief Victim echoes, receiver noise and FMCW aggressor interference at the ADC output.
 *
 * Time base: victim chirp m starts at m * T_r and is sampled at n * T_s from
 * the start of its ramp, so ADC sample (n, m) sits at t = m T_r + n T_s.
 * Frames are N x M with fast time n along rows and slow time m along columns.
 */
#pragma once

#include "rdlab/core.hpp"
#include "rdlab/link_budget.hpp"
#include "rdlab/radar_config.hpp"
#include "rdlab/rng.hpp"

#include <span>
#include <string_view>
#include <vector>

namespace rdlab {

enum class Provenance { clean, interference_only, corrupted };

inline std::string_view to_string(Provenance p) {
    switch (p) {
        case Provenance::clean: return "clean";
        case Provenance::interference_only: return "interference-only";
        case Provenance::corrupted: return "corrupted";
    }
    return "unknown";
}

/// N x M complex baseband samples of one radar frame.
class BeatFrame {
public:
    BeatFrame(RadarConfig config, ComplexGrid samples, Provenance provenance)
        : config_(std::move(config)), samples_(std::move(samples)), provenance_(provenance) {
        if (samples_.rows() != static_cast<Eigen::Index>(config_.samples_per_chirp) ||
            samples_.cols() != static_cast<Eigen::Index>(config_.chirps_per_frame))
            throw ShapeError("BeatFrame: samples must be samples_per_chirp x chirps_per_frame");
        if (!samples_.allFinite()) throw DomainError("BeatFrame: non-finite sample");
    }

    static BeatFrame zeros(const RadarConfig& config, Provenance provenance) {
        return {config, ComplexGrid::Zero(config.samples_per_chirp, config.chirps_per_frame), provenance};
    }

    const RadarConfig& config() const noexcept { return config_; }
    const ComplexGrid& samples() const noexcept { return samples_; }
    Provenance provenance() const noexcept { return provenance_; }
    Eigen::Index fast_time_samples() const noexcept { return samples_.rows(); }
    Eigen::Index chirps() const noexcept { return samples_.cols(); }

    bool same_shape(const BeatFrame& other) const {
        return samples_.rows() == other.samples_.rows() && samples_.cols() == other.samples_.cols() &&
               config_ == other.config_;
    }

private:
    RadarConfig config_;
    ComplexGrid samples_;
    Provenance provenance_;
};

/// Instantaneous victim ramp frequency, f_c + (B_SW / T_c) t for t in [0, T_c).
inline double chirp_frequency(const RadarConfig& cfg, double t_s) {
    if (!(t_s >= 0.0 && t_s < cfg.sweep_duration_s)) throw DomainError("chirp_frequency: t outside [0, T_c)");
    return cfg.carrier_freq_hz + cfg.chirp_rate() * t_s;
}

namespace detail {

/// Fractional part in [0, 1); keeps phase arguments small before they are summed.
inline double frac(double cycles) { return cycles - std::floor(cycles); }

}  // namespace detail

/// Sum of point-target beat tones plus optional circular Gaussian receiver noise.
/// Intra-chirp range migration is neglected; Doppler advances with T_r per chirp.
inline BeatFrame synthesize_clean_beat(const RadarConfig& cfg, std::span<const Target> targets,
                                       std::uint64_t noise_seed, bool include_noise) {
    cfg.validate();
    const Eigen::Index n_fast = cfg.samples_per_chirp;
    const Eigen::Index n_slow = cfg.chirps_per_frame;
    ComplexGrid s = ComplexGrid::Zero(n_fast, n_slow);

    std::vector<cplx> range_phasor(static_cast<std::size_t>(n_fast));
    std::vector<cplx> doppler_phasor(static_cast<std::size_t>(n_slow));
    for (const auto& target : targets) {
        target.validate(cfg);
        const double amplitude = dbm_to_amplitude(echo_power_dbm(cfg, target.range_m, target.rcs_m2));
        const double delay = 2.0 * target.range_m / kSpeedOfLight;
        const double beat_hz = cfg.chirp_rate() * delay;
        const double doppler_hz = cfg.carrier_freq_hz * 2.0 * target.radial_velocity_mps / kSpeedOfLight;
        const cplx carrier = std::polar(amplitude, kTwoPi * detail::frac(cfg.carrier_freq_hz * delay));
        for (Eigen::Index n = 0; n < n_fast; ++n)
            range_phasor[n] = std::polar(1.0, kTwoPi * detail::frac(beat_hz * n * cfg.sample_period()));
        for (Eigen::Index m = 0; m < n_slow; ++m)
            doppler_phasor[m] = std::polar(1.0, kTwoPi * detail::frac(doppler_hz * m * cfg.chirp_repetition_s));
        for (Eigen::Index n = 0; n < n_fast; ++n)
            for (Eigen::Index m = 0; m < n_slow; ++m) s(n, m) += carrier * range_phasor[n] * doppler_phasor[m];
    }

    if (include_noise) {
        const double variance = 2.0 * dbm_to_watts(thermal_noise_power_dbm(cfg));
        Rng rng(noise_seed);
        for (Eigen::Index n = 0; n < n_fast; ++n)
            for (Eigen::Index m = 0; m < n_slow; ++m) s(n, m) += rng.complex_normal(variance);
    }
    return {cfg, std::move(s), Provenance::clean};
}

/// One ADC sample of the dechirped aggressor signal before the anti-alias mask.
struct InterferenceSample {
    cplx value;                // unmasked sample, amplitude included
    double freq_difference_hz;  // f_victim(t) - f_aggressor(t - delay)
};

/// Evaluates the mixer output x_T(t) * conj(x_Int(t - delay)) at ADC sample (n, m).
///
/// Both radars follow sawtooth frequency laws and their phases are the exact
/// integrals of those laws from t = 0: the victim ramps for T_c then rests at
/// f_c until T_r, the aggressor ramps back to back with period equal to its
/// sweep duration. Delay = time_offset + (distance + velocity t) / c.
inline InterferenceSample interference_sample(const RadarConfig& victim, const InterfererConfig& aggressor,
                                              Eigen::Index n, Eigen::Index m, double amplitude) {
    const double u = static_cast<double>(n) * victim.sample_period();
    const double t = static_cast<double>(m) * victim.chirp_repetition_s + u;
    const double delay =
        aggressor.time_offset_s + (aggressor.distance_m + aggressor.radial_velocity_mps * t) / kSpeedOfLight;
    const double t_agg = t - delay;
    const double agg_rate = aggressor.sweep_bandwidth_hz / aggressor.sweep_duration_s;
    const double ramp_index = std::floor(t_agg / aggressor.sweep_duration_s);
    const double u_agg = t_agg - ramp_index * aggressor.sweep_duration_s;

    const double victim_ramp_cycles = victim.sweep_bandwidth_hz * victim.sweep_duration_s / 2.0;
    const double agg_ramp_cycles = aggressor.sweep_bandwidth_hz * aggressor.sweep_duration_s / 2.0;

    using detail::frac;
    // Phase difference in cycles, each product reduced modulo one before summing.
    const double cycles = frac((victim.carrier_freq_hz - aggressor.carrier_freq_hz) * t) +
                          frac(aggressor.carrier_freq_hz * delay) + frac(static_cast<double>(m) * victim_ramp_cycles) -
                          frac(ramp_index * agg_ramp_cycles) + frac(0.5 * victim.chirp_rate() * u * u) -
                          frac(0.5 * agg_rate * u_agg * u_agg) + victim.initial_phase_rad / kTwoPi;

    InterferenceSample out;
    out.value = std::polar(amplitude, kTwoPi * frac(cycles));
    out.freq_difference_hz =
        (victim.carrier_freq_hz + victim.chirp_rate() * u) - (aggressor.carrier_freq_hz + agg_rate * u_agg);
    return out;
}

/// Free-space amplitude of the aggressor at the victim ADC, times its effective scale.
inline double interference_amplitude(const RadarConfig& victim, const InterfererConfig& aggressor) {
    return aggressor.effective_scale() * dbm_to_amplitude(interference_power_dbm(victim, aggressor.distance_m));
}

/// Aggressor contribution after an ideal anti-alias filter: samples whose
/// instantaneous frequency difference exceeds f_s / 2 are exactly zero.
inline BeatFrame synthesize_interference(const RadarConfig& victim, const InterfererConfig& aggressor) {
    victim.validate();
    aggressor.validate();
    const double amplitude = interference_amplitude(victim, aggressor);
    ComplexGrid s = ComplexGrid::Zero(victim.samples_per_chirp, victim.chirps_per_frame);
    if (amplitude == 0.0) return {victim, std::move(s), Provenance::interference_only};
    const double half_band = victim.sampling_freq_hz / 2.0;
    for (Eigen::Index n = 0; n < s.rows(); ++n) {
        for (Eigen::Index m = 0; m < s.cols(); ++m) {
            const auto sample = interference_sample(victim, aggressor, n, m, amplitude);
            if (std::abs(sample.freq_difference_hz) <= half_band) s(n, m) = sample.value;
        }
    }
    return {victim, std::move(s), Provenance::interference_only};
}

/// Element-wise sum of a frame and any number of interference frames.
inline BeatFrame superimpose(const BeatFrame& base, std::span<const BeatFrame> interferences) {
    ComplexGrid s = base.samples();
    for (const auto& f : interferences) {
        if (!base.same_shape(f)) throw ShapeError("superimpose: frames differ in shape or configuration");
        s += f.samples();
    }
    return {base.config(), std::move(s), Provenance::corrupted};
}

inline BeatFrame superimpose(const BeatFrame& base, const BeatFrame& interference, double scale = 1.0) {
    if (!base.same_shape(interference)) throw ShapeError("superimpose: frames differ in shape or configuration");
    ComplexGrid s = base.samples() + scale * interference.samples();
    return {base.config(), std::move(s), Provenance::corrupted};
}

/// One of the seven canonical victim/aggressor pairings.
struct ScenarioPreset {
    int id = 1;
    double bandwidth_ratio = 1.0;  // B_SW,int / B_SW,vic
    double duration_ratio = 1.0;   // T_c,int / T_c,vic
    double carrier_offset_hz = 0.0;
    RadarConfig victim;
    InterfererConfig interferer;
};

/// Range bin at which the aggressor of a commensurate scenario lands as a ghost.
inline constexpr int kScenarioGhostRangeBin = 20;
inline constexpr double kScenarioInterfererDistanceM = 10.0;

/// Victim `base` (defaults to the standard victim) with an aggressor whose ramp
/// ratios and carrier offset follow scenario `id` (1..7). The aggressor sits at
/// 10 m, static, at free-space power, with a delay that puts a commensurate
/// ghost at range bin 20.
inline ScenarioPreset scenario_preset(int id, const RadarConfig& base = RadarConfig{}) {
    struct Row {
        double bw, dur, offset_hz;
    };
    static constexpr Row rows[7] = {{1, 1, 0}, {1, 1.1, 0}, {1, 2, 0}, {2, 1, 0}, {1, 1, -20e6}, {2, 1.1, 0}, {2, 2, 0}};
    if (id < 1 || id > 7) throw DomainError("scenario_preset: id must be in 1..7");
    const Row& row = rows[id - 1];
    base.validate();

    ScenarioPreset preset;
    preset.id = id;
    preset.bandwidth_ratio = row.bw;
    preset.duration_ratio = row.dur;
    preset.carrier_offset_hz = row.offset_hz;
    preset.victim = base;
    auto& agg = preset.interferer;
    agg.carrier_freq_hz = base.carrier_freq_hz + row.offset_hz;
    agg.sweep_bandwidth_hz = base.sweep_bandwidth_hz * row.bw;
    agg.sweep_duration_s = base.sweep_duration_s * row.dur;
    agg.distance_m = kScenarioInterfererDistanceM;
    agg.radial_velocity_mps = 0.0;
    const double ghost_delay =
        kScenarioGhostRangeBin * (base.sampling_freq_hz / base.range_fft_points) / base.chirp_rate();
    agg.time_offset_s = ghost_delay - agg.distance_m / kSpeedOfLight;
    agg.amplitude_scale = 1.0;
    return preset;
}

}  // namespace rdlab
