/**
 * @file link_budget.hpp
 * @brief One-way (Friis) interference power, two-way echo power, receiver noise.
 *
 * All results are in dBm. G_trx is the sum of the configured transmit and
 * receive antenna gains.
 */
#pragma once

#include "rdlab/radar_config.hpp"

namespace rdlab {

/// Friis free-space power received from an aggressor at distance r.
inline double interference_power_dbm(const RadarConfig& cfg, double r_m) {
    if (!(r_m > 0.0)) throw DomainError("interference_power_dbm: distance must be > 0");
    const double path = cfg.wavelength() / (4.0 * kPi * r_m);
    return cfg.transmit_power_dbm + cfg.combined_gain_db() + 20.0 * std::log10(path);
}

/// Radar-equation echo power from a point target of RCS sigma at distance d.
inline double echo_power_dbm(const RadarConfig& cfg, double d_m, double rcs_m2) {
    if (!(d_m > 0.0)) throw DomainError("echo_power_dbm: distance must be > 0");
    if (!(rcs_m2 > 0.0)) throw DomainError("echo_power_dbm: rcs must be > 0");
    const double lambda = cfg.wavelength();
    const double ratio = rcs_m2 * lambda * lambda / (std::pow(4.0 * kPi, 3) * std::pow(d_m, 4));
    return cfg.transmit_power_dbm + cfg.combined_gain_db() + 10.0 * std::log10(ratio);
}

/// kTB noise over the complex sampling bandwidth plus the receiver noise figure.
inline double thermal_noise_power_dbm(const RadarConfig& cfg) {
    return kThermalNoiseDensityDbmHz + 10.0 * std::log10(cfg.sampling_freq_hz) + cfg.noise_figure_db;
}

struct PowerBudget {
    double interference_power_dbm;
    double echo_power_dbm;
    double margin_db;  // interference - echo
};

inline PowerBudget power_budget(const RadarConfig& cfg, double interferer_distance_m, double target_distance_m,
                                double rcs_m2) {
    PowerBudget b{};
    b.interference_power_dbm = interference_power_dbm(cfg, interferer_distance_m);
    b.echo_power_dbm = echo_power_dbm(cfg, target_distance_m, rcs_m2);
    b.margin_db = b.interference_power_dbm - b.echo_power_dbm;
    return b;
}

}  // namespace rdlab
