/**
 * @file radar_config.hpp
 * @brief Victim radar, target and aggressor descriptions, with JSON mapping.
 *
 * Defaults reproduce the AWR1843-class victim used throughout: a 77 GHz,
 * 153.6 MHz, 21.12 us ramp sampled at 12.5 MHz (64 samples x 128 chirps),
 * 5 dBm transmit power, 36 + 42 dB antenna gains and a 4.5 dB noise figure.
 */
#pragma once

#include "rdlab/core.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace rdlab {

struct RadarConfig {
    double carrier_freq_hz = 77.0e9;      // f_c
    double sweep_bandwidth_hz = 153.6e6;  // B_SW
    double sweep_duration_s = 21.12e-6;   // T_c
    // Chirp repetition interval. 42.24 us makes lambda / (4 T_r) = 23.04 m/s, the
    // advertised maximum velocity (23.06 m/s) of this configuration up to rounding.
    double chirp_repetition_s = 42.24e-6;
    double sampling_freq_hz = 12.5e6;
    std::uint32_t samples_per_chirp = 64;    // N
    std::uint32_t chirps_per_frame = 128;    // M
    std::uint32_t range_fft_points = 64;     // P
    std::uint32_t doppler_fft_points = 128;  // Q
    double transmit_power_dbm = 5.0;
    double tx_gain_db = 36.0;
    double rx_gain_db = 42.0;
    double noise_figure_db = 4.5;
    double initial_phase_rad = 0.0;

    double chirp_rate() const { return sweep_bandwidth_hz / sweep_duration_s; }
    double sample_period() const { return 1.0 / sampling_freq_hz; }
    double wavelength() const { return kSpeedOfLight / carrier_freq_hz; }
    double combined_gain_db() const { return tx_gain_db + rx_gain_db; }
    double max_unambiguous_velocity() const { return wavelength() / (4.0 * chirp_repetition_s); }
    /// Range covered by one range bin, (f_s / P) converted through the chirp rate.
    double range_bin_m() const {
        return sampling_freq_hz / range_fft_points * kSpeedOfLight / (2.0 * chirp_rate());
    }
    /// Radial velocity covered by one Doppler bin.
    double velocity_bin_mps() const {
        return wavelength() / (2.0 * doppler_fft_points * chirp_repetition_s);
    }

    /// Throws DomainError when an invariant is violated.
    void validate() const {
        auto positive = [](double v, const char* name) {
            if (!(v > 0.0) || !std::isfinite(v)) throw DomainError(std::string("RadarConfig: ") + name + " must be > 0");
        };
        positive(carrier_freq_hz, "carrier_freq_hz");
        positive(sweep_bandwidth_hz, "sweep_bandwidth_hz");
        positive(sweep_duration_s, "sweep_duration_s");
        positive(chirp_repetition_s, "chirp_repetition_s");
        positive(sampling_freq_hz, "sampling_freq_hz");
        if (samples_per_chirp == 0 || chirps_per_frame == 0 || range_fft_points == 0 || doppler_fft_points == 0)
            throw DomainError("RadarConfig: sample and FFT counts must be > 0");
        if (range_fft_points < samples_per_chirp) throw DomainError("RadarConfig: range_fft_points < samples_per_chirp");
        if (doppler_fft_points < chirps_per_frame) throw DomainError("RadarConfig: doppler_fft_points < chirps_per_frame");
        const double adc_window = samples_per_chirp / sampling_freq_hz;
        // Relative slack so that 64 / 12.5 MHz == 5.12 us style equalities survive rounding.
        if (adc_window > sweep_duration_s * (1.0 + 1e-12))
            throw DomainError("RadarConfig: ADC window exceeds sweep duration");
        if (sweep_duration_s > chirp_repetition_s * (1.0 + 1e-12))
            throw DomainError("RadarConfig: sweep duration exceeds chirp repetition interval");
        if (!std::isfinite(transmit_power_dbm) || !std::isfinite(tx_gain_db) || !std::isfinite(rx_gain_db) ||
            !std::isfinite(noise_figure_db) || !std::isfinite(initial_phase_rad))
            throw DomainError("RadarConfig: non-finite power or phase parameter");
    }

    bool operator==(const RadarConfig&) const = default;
};

struct Target {
    double range_m = 30.0;
    double radial_velocity_mps = 0.0;
    double rcs_m2 = 10.0;

    void validate(const RadarConfig& cfg) const {
        if (!(range_m > 0.0)) throw DomainError("Target: range_m must be > 0");
        if (!(rcs_m2 > 0.0)) throw DomainError("Target: rcs_m2 must be > 0");
        if (!(std::abs(radial_velocity_mps) < cfg.max_unambiguous_velocity()))
            throw DomainError("Target: |radial_velocity_mps| must be below the unambiguous velocity");
    }

    bool operator==(const Target&) const = default;
};

struct InterfererConfig {
    double carrier_freq_hz = 77.0e9;
    double sweep_bandwidth_hz = 153.6e6;
    double sweep_duration_s = 21.12e-6;
    double distance_m = 10.0;
    double radial_velocity_mps = 0.0;
    double time_offset_s = 0.0;
    // At most one of these is set; with neither, the unscaled free-space amplitude is used.
    std::optional<double> amplitude_scale;
    std::optional<double> target_sinr_db;

    /// Linear factor on the free-space amplitude. A SINR-driven interferer is
    /// synthesized at unit scale and rescaled afterwards by scale_to_sinr.
    double effective_scale() const { return target_sinr_db ? 1.0 : amplitude_scale.value_or(1.0); }

    void validate() const {
        if (!(distance_m > 0.0)) throw DomainError("InterfererConfig: distance_m must be > 0");
        if (!(carrier_freq_hz > 0.0) || !(sweep_bandwidth_hz > 0.0) || !(sweep_duration_s > 0.0))
            throw DomainError("InterfererConfig: sweep parameters must be > 0");
        if (amplitude_scale && target_sinr_db)
            throw DomainError("InterfererConfig: set amplitude_scale or target_sinr_db, not both");
        if (amplitude_scale && !(*amplitude_scale >= 0.0)) throw DomainError("InterfererConfig: amplitude_scale must be >= 0");
        if (!std::isfinite(time_offset_s) || !std::isfinite(radial_velocity_mps))
            throw DomainError("InterfererConfig: non-finite timing");
    }

    bool operator==(const InterfererConfig&) const = default;
};

// ---------------------------------------------------------------------------
// JSON. Missing keys keep their defaults; unknown keys are rejected.

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& j, const std::set<std::string>& known, const char* type) {
    if (!j.is_object()) throw DomainError(std::string(type) + ": expected a JSON object");
    for (const auto& [key, value] : j.items()) {
        if (!known.contains(key)) throw DomainError(std::string(type) + ": unknown field '" + key + "'");
    }
}

template <typename T>
void read_field(const nlohmann::json& j, const char* key, T& out) {
    if (auto it = j.find(key); it != j.end()) out = it->template get<T>();
}

template <typename T>
void read_field(const nlohmann::json& j, const char* key, std::optional<T>& out) {
    if (auto it = j.find(key); it != j.end() && !it->is_null()) out = it->template get<T>();
}

}  // namespace detail

inline void to_json(nlohmann::json& j, const RadarConfig& c) {
    j = nlohmann::json{{"carrier_freq_hz", c.carrier_freq_hz},
                       {"sweep_bandwidth_hz", c.sweep_bandwidth_hz},
                       {"sweep_duration_s", c.sweep_duration_s},
                       {"chirp_repetition_s", c.chirp_repetition_s},
                       {"sampling_freq_hz", c.sampling_freq_hz},
                       {"samples_per_chirp", c.samples_per_chirp},
                       {"chirps_per_frame", c.chirps_per_frame},
                       {"range_fft_points", c.range_fft_points},
                       {"doppler_fft_points", c.doppler_fft_points},
                       {"transmit_power_dbm", c.transmit_power_dbm},
                       {"tx_gain_db", c.tx_gain_db},
                       {"rx_gain_db", c.rx_gain_db},
                       {"noise_figure_db", c.noise_figure_db},
                       {"initial_phase_rad", c.initial_phase_rad}};
}

inline void from_json(const nlohmann::json& j, RadarConfig& c) {
    detail::reject_unknown_keys(j,
                                {"carrier_freq_hz", "sweep_bandwidth_hz", "sweep_duration_s", "chirp_repetition_s",
                                 "sampling_freq_hz", "samples_per_chirp", "chirps_per_frame", "range_fft_points",
                                 "doppler_fft_points", "transmit_power_dbm", "tx_gain_db", "rx_gain_db",
                                 "noise_figure_db", "initial_phase_rad"},
                                "RadarConfig");
    detail::read_field(j, "carrier_freq_hz", c.carrier_freq_hz);
    detail::read_field(j, "sweep_bandwidth_hz", c.sweep_bandwidth_hz);
    detail::read_field(j, "sweep_duration_s", c.sweep_duration_s);
    detail::read_field(j, "chirp_repetition_s", c.chirp_repetition_s);
    detail::read_field(j, "sampling_freq_hz", c.sampling_freq_hz);
    detail::read_field(j, "samples_per_chirp", c.samples_per_chirp);
    detail::read_field(j, "chirps_per_frame", c.chirps_per_frame);
    detail::read_field(j, "range_fft_points", c.range_fft_points);
    detail::read_field(j, "doppler_fft_points", c.doppler_fft_points);
    detail::read_field(j, "transmit_power_dbm", c.transmit_power_dbm);
    detail::read_field(j, "tx_gain_db", c.tx_gain_db);
    detail::read_field(j, "rx_gain_db", c.rx_gain_db);
    detail::read_field(j, "noise_figure_db", c.noise_figure_db);
    detail::read_field(j, "initial_phase_rad", c.initial_phase_rad);
}

inline void to_json(nlohmann::json& j, const Target& t) {
    j = nlohmann::json{{"range_m", t.range_m}, {"radial_velocity_mps", t.radial_velocity_mps}, {"rcs_m2", t.rcs_m2}};
}

inline void from_json(const nlohmann::json& j, Target& t) {
    detail::reject_unknown_keys(j, {"range_m", "radial_velocity_mps", "rcs_m2"}, "Target");
    detail::read_field(j, "range_m", t.range_m);
    detail::read_field(j, "radial_velocity_mps", t.radial_velocity_mps);
    detail::read_field(j, "rcs_m2", t.rcs_m2);
}

inline void to_json(nlohmann::json& j, const InterfererConfig& c) {
    j = nlohmann::json{{"carrier_freq_hz", c.carrier_freq_hz},
                       {"sweep_bandwidth_hz", c.sweep_bandwidth_hz},
                       {"sweep_duration_s", c.sweep_duration_s},
                       {"distance_m", c.distance_m},
                       {"radial_velocity_mps", c.radial_velocity_mps},
                       {"time_offset_s", c.time_offset_s}};
    if (c.amplitude_scale) j["amplitude_scale"] = *c.amplitude_scale;
    if (c.target_sinr_db) j["target_sinr_db"] = *c.target_sinr_db;
}

inline void from_json(const nlohmann::json& j, InterfererConfig& c) {
    detail::reject_unknown_keys(j,
                                {"carrier_freq_hz", "sweep_bandwidth_hz", "sweep_duration_s", "distance_m",
                                 "radial_velocity_mps", "time_offset_s", "amplitude_scale", "target_sinr_db"},
                                "InterfererConfig");
    detail::read_field(j, "carrier_freq_hz", c.carrier_freq_hz);
    detail::read_field(j, "sweep_bandwidth_hz", c.sweep_bandwidth_hz);
    detail::read_field(j, "sweep_duration_s", c.sweep_duration_s);
    detail::read_field(j, "distance_m", c.distance_m);
    detail::read_field(j, "radial_velocity_mps", c.radial_velocity_mps);
    detail::read_field(j, "time_offset_s", c.time_offset_s);
    detail::read_field(j, "amplitude_scale", c.amplitude_scale);
    detail::read_field(j, "target_sinr_db", c.target_sinr_db);
}

}  // namespace rdlab
