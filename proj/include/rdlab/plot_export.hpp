/**
 * @file plot_export.hpp
 * @brief Plot data for RD maps: 16-bit binary PGM of a dB map and a CSV of axis values.
 */
#pragma once

#include "rdlab/rd_pipeline.hpp"

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

namespace rdlab {

struct PgmScaling {
    double db_min = 0.0;  // maps to 0
    double db_max = 0.0;  // maps to 65535
};

/// P5 image with maxval 65535 (big-endian samples). Rows are range bins, so
/// the image is P pixels high and Q wide. The dB range spans the map's own
/// min..max; a flat map becomes all zeros.
inline PgmScaling write_pgm16(const RealGrid& db, const std::filesystem::path& path) {
    PgmScaling s{db.minCoeff(), db.maxCoeff()};
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    os << "P5\n" << db.cols() << ' ' << db.rows() << "\n65535\n";
    const double span = s.db_max - s.db_min;
    for (Eigen::Index p = 0; p < db.rows(); ++p)
        for (Eigen::Index q = 0; q < db.cols(); ++q) {
            const double u = span > 0.0 ? (db(p, q) - s.db_min) / span : 0.0;
            const auto v = static_cast<std::uint16_t>(std::lround(std::clamp(u, 0.0, 1.0) * 65535.0));
            const char bytes[2] = {static_cast<char>(v >> 8), static_cast<char>(v & 0xFF)};
            os.write(bytes, 2);
        }
    if (!os) throw std::runtime_error("write failed: " + path.string());
    return s;
}

/// CSV `axis,index,value`: one row per range bin (metres) and Doppler bin
/// (m/s), plus the dB values at pixel 0 and 65535.
inline void write_axes_csv(const RadarConfig& cfg, const PgmScaling& scaling, const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    char buf[96];
    os << "axis,index,value\n";
    for (std::uint32_t p = 0; p < cfg.range_fft_points; ++p) {
        std::snprintf(buf, sizeof buf, "range_m,%u,%.6f\n", p, range_of_bin(cfg, p));
        os << buf;
    }
    for (std::uint32_t q = 0; q < cfg.doppler_fft_points; ++q) {
        std::snprintf(buf, sizeof buf, "velocity_mps,%u,%.6f\n", q, velocity_of_bin(cfg, q));
        os << buf;
    }
    std::snprintf(buf, sizeof buf, "db_at_0,0,%.6f\ndb_at_65535,0,%.6f\n", scaling.db_min, scaling.db_max);
    os << buf;
}

}  // namespace rdlab
