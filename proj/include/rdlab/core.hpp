/**
 * @file core.hpp
 * @brief Shared numeric types, physical constants and error classes.
 */
#pragma once

#include <Eigen/Core>

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>

namespace rdlab {

using cplx = std::complex<double>;

// Row-major so that row r of a grid is contiguous, matching the RDC1 payload order.
using ComplexGrid = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RealGrid = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr double kSpeedOfLight = 299'792'458.0;  // m/s
inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kThermalNoiseDensityDbmHz = -174.0;

/// Input outside the domain of an operation (bad time, out-of-range id, nonpositive distance...).
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Mismatched dimensions between frames, maps or masks.
class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A requested SINR cannot be reached by scaling the interference.
class InfeasibleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The reference map holds no object cells, so SINR is undefined.
class UndefinedSinrError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or truncated RDC1 file; carries the byte offset where parsing failed.
class FormatError : public std::runtime_error {
public:
    FormatError(const std::string& what, std::uint64_t offset)
        : std::runtime_error(what + " (at byte offset " + std::to_string(offset) + ")"), offset_(offset) {}

    std::uint64_t offset() const noexcept { return offset_; }

private:
    std::uint64_t offset_;
};

inline double db_to_linear_power(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_power_to_db(double p) { return 10.0 * std::log10(p); }

/// Watts from dBm.
inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

/// Peak amplitude of a tone carrying `dbm` into a 1 ohm reference: sqrt(2 P).
/// The power of a complex baseband sample x is therefore |x|^2 / 2 throughout.
inline double dbm_to_amplitude(double dbm) { return std::sqrt(2.0 * dbm_to_watts(dbm)); }

}  // namespace rdlab
