/**
 * @file rdc_format.hpp
 * @brief RDC1 cube files: a 24-byte little-endian header and a float32 payload.
 *
 * Layout: "RDC1", u32 version (1), u32 kind (0 complex interleaved, 1 magnitude),
 * u32 dim0, u32 dim1, u32 frame_count, then frames one after another, each
 * stored row-major.
 */
#pragma once

#include "rdlab/core.hpp"
#include "rdlab/radar_config.hpp"
#include "rdlab/rd_pipeline.hpp"
#include "rdlab/signal_model.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <string>
#include <vector>

namespace rdlab {

inline constexpr std::array<char, 4> kRdcMagic = {'R', 'D', 'C', '1'};
inline constexpr std::uint32_t kRdcVersion = 1;
inline constexpr std::size_t kRdcHeaderBytes = 24;

enum class RdcKind : std::uint32_t { complex = 0, magnitude = 1 };

/// In-memory cube. `data` holds dim0*dim1*frames values for magnitude cubes and
/// twice that (re, im interleaved) for complex cubes.
struct RdCube {
    RdcKind kind = RdcKind::magnitude;
    std::uint32_t dim0 = 0;
    std::uint32_t dim1 = 0;
    std::uint32_t frames = 0;
    std::vector<float> data;

    std::size_t values_per_cell() const { return kind == RdcKind::complex ? 2 : 1; }
    std::size_t frame_values() const { return std::size_t{dim0} * dim1 * values_per_cell(); }
    std::size_t expected_values() const { return frame_values() * frames; }
    bool operator==(const RdCube&) const = default;
};

namespace detail {

static_assert(std::numeric_limits<float>::is_iec559 && sizeof(float) == 4, "RDC1 needs IEEE-754 binary32");

inline void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xFFu));
}

inline std::uint32_t get_u32(const unsigned char* p) {
    return std::uint32_t{p[0]} | (std::uint32_t{p[1]} << 8) | (std::uint32_t{p[2]} << 16) | (std::uint32_t{p[3]} << 24);
}

}  // namespace detail

/// Serialized bytes of a cube. Shapes are validated first.
inline std::vector<unsigned char> encode_rd_cube(const RdCube& cube) {
    if (cube.kind != RdcKind::complex && cube.kind != RdcKind::magnitude) throw DomainError("RDC1: unknown kind");
    if (cube.data.size() != cube.expected_values()) throw ShapeError("RDC1: payload size does not match dims");
    std::vector<unsigned char> out;
    out.reserve(kRdcHeaderBytes + 4 * cube.data.size());
    out.insert(out.end(), kRdcMagic.begin(), kRdcMagic.end());
    detail::put_u32(out, kRdcVersion);
    detail::put_u32(out, static_cast<std::uint32_t>(cube.kind));
    detail::put_u32(out, cube.dim0);
    detail::put_u32(out, cube.dim1);
    detail::put_u32(out, cube.frames);
    for (float f : cube.data) detail::put_u32(out, std::bit_cast<std::uint32_t>(f));
    return out;
}

/// Parses RDC1 bytes; every failure reports the byte offset where it was found.
inline RdCube decode_rd_cube(const std::vector<unsigned char>& bytes) {
    if (bytes.size() < 4) throw FormatError("RDC1: truncated magic", bytes.size());
    if (!std::equal(kRdcMagic.begin(), kRdcMagic.end(), bytes.begin())) throw FormatError("RDC1: bad magic", 0);
    if (bytes.size() < kRdcHeaderBytes) throw FormatError("RDC1: truncated header", bytes.size());
    const unsigned char* p = bytes.data();
    if (detail::get_u32(p + 4) != kRdcVersion) throw FormatError("RDC1: unsupported version", 4);
    const std::uint32_t kind = detail::get_u32(p + 8);
    if (kind > 1) throw FormatError("RDC1: unknown kind", 8);

    RdCube cube;
    cube.kind = static_cast<RdcKind>(kind);
    cube.dim0 = detail::get_u32(p + 12);
    cube.dim1 = detail::get_u32(p + 16);
    cube.frames = detail::get_u32(p + 20);
    if (cube.dim0 == 0 || cube.dim1 == 0) throw FormatError("RDC1: zero dimension", cube.dim0 == 0 ? 12 : 16);

    // Payload byte count, refusing products that would wrap around.
    const std::uint64_t cells = std::uint64_t{cube.dim0} * cube.dim1;  // < 2^64
    const std::uint64_t bytes_per_frame_cell = cube.values_per_cell() * 4u;
    const std::uint64_t limit = std::numeric_limits<std::size_t>::max() / 2;
    if (cube.frames != 0 && cells > limit / bytes_per_frame_cell / cube.frames)
        throw FormatError("RDC1: dimensions overflow the addressable size", 12);
    const auto need = static_cast<std::size_t>(cells * bytes_per_frame_cell * cube.frames);
    const std::size_t available = bytes.size() - kRdcHeaderBytes;
    if (available < need) {
        // Offset of the first missing byte, rounded down to the value it belongs to.
        throw FormatError("RDC1: truncated payload", kRdcHeaderBytes + available - available % 4);
    }
    if (available > need) throw FormatError("RDC1: trailing bytes after payload", kRdcHeaderBytes + need);

    cube.data.resize(need / 4);
    for (std::size_t i = 0; i < cube.data.size(); ++i)
        cube.data[i] = std::bit_cast<float>(detail::get_u32(p + kRdcHeaderBytes + 4 * i));
    return cube;
}

inline void write_rd_cube(const RdCube& cube, const std::filesystem::path& path) {
    const auto bytes = encode_rd_cube(cube);
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
    os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!os) throw std::runtime_error("write failed: " + path.string());
}

inline RdCube read_rd_cube(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path.string());
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    return decode_rd_cube(bytes);
}

// ---- conversions -----------------------------------------------------------

/// Complex cube of beat frames, dims (N, M, frames).
inline RdCube cube_from_frames(std::span<const BeatFrame> frames) {
    if (frames.empty()) throw DomainError("cube_from_frames: no frames");
    RdCube cube;
    cube.kind = RdcKind::complex;
    cube.dim0 = static_cast<std::uint32_t>(frames.front().fast_time_samples());
    cube.dim1 = static_cast<std::uint32_t>(frames.front().chirps());
    cube.frames = static_cast<std::uint32_t>(frames.size());
    cube.data.reserve(cube.expected_values());
    for (const auto& f : frames) {
        if (!f.same_shape(frames.front())) throw ShapeError("cube_from_frames: frames differ in shape");
        for (Eigen::Index n = 0; n < f.fast_time_samples(); ++n)
            for (Eigen::Index m = 0; m < f.chirps(); ++m) {
                cube.data.push_back(static_cast<float>(f.samples()(n, m).real()));
                cube.data.push_back(static_cast<float>(f.samples()(n, m).imag()));
            }
    }
    return cube;
}

inline RdCube cube_from_frame(const BeatFrame& frame) { return cube_from_frames(std::span<const BeatFrame>(&frame, 1)); }

/// Frames of a complex cube with `cfg` attached. The dims must equal (N, M).
inline std::vector<BeatFrame> frames_from_cube(const RdCube& cube, const RadarConfig& cfg,
                                               Provenance provenance = Provenance::corrupted) {
    cfg.validate();
    if (cube.kind != RdcKind::complex) throw DomainError("frames_from_cube: cube is not complex");
    if (cube.dim0 != cfg.samples_per_chirp || cube.dim1 != cfg.chirps_per_frame)
        throw ShapeError("frames_from_cube: cube dims " + std::to_string(cube.dim0) + "x" + std::to_string(cube.dim1) +
                         " do not match the configuration " + std::to_string(cfg.samples_per_chirp) + "x" +
                         std::to_string(cfg.chirps_per_frame));
    std::vector<BeatFrame> out;
    out.reserve(cube.frames);
    std::size_t k = 0;
    for (std::uint32_t f = 0; f < cube.frames; ++f) {
        ComplexGrid s(cube.dim0, cube.dim1);
        for (Eigen::Index n = 0; n < s.rows(); ++n)
            for (Eigen::Index m = 0; m < s.cols(); ++m, k += 2) s(n, m) = cplx(cube.data[k], cube.data[k + 1]);
        out.emplace_back(cfg, std::move(s), provenance);
    }
    return out;
}

/// Externally recorded ADC data: RDC1 complex cube of dims (N, M, frames).
inline std::vector<BeatFrame> ingest_adc_cube(const std::filesystem::path& path, const RadarConfig& cfg) {
    return frames_from_cube(read_rd_cube(path), cfg, Provenance::corrupted);
}

/// Magnitude cube of real-valued maps (P x Q each), e.g. normalized dB maps.
inline RdCube cube_from_maps(std::span<const RealGrid> maps) {
    if (maps.empty()) throw DomainError("cube_from_maps: no maps");
    RdCube cube;
    cube.kind = RdcKind::magnitude;
    cube.dim0 = static_cast<std::uint32_t>(maps.front().rows());
    cube.dim1 = static_cast<std::uint32_t>(maps.front().cols());
    cube.frames = static_cast<std::uint32_t>(maps.size());
    cube.data.reserve(cube.expected_values());
    for (const auto& m : maps) {
        if (m.rows() != maps.front().rows() || m.cols() != maps.front().cols())
            throw ShapeError("cube_from_maps: maps differ in shape");
        for (Eigen::Index p = 0; p < m.rows(); ++p)
            for (Eigen::Index q = 0; q < m.cols(); ++q) cube.data.push_back(static_cast<float>(m(p, q)));
    }
    return cube;
}

inline RdCube cube_from_map(const RealGrid& map) { return cube_from_maps(std::span<const RealGrid>(&map, 1)); }

/// Real-valued frame `index` of a magnitude cube, or |value| of a complex one.
inline RealGrid map_from_cube(const RdCube& cube, std::uint32_t index = 0) {
    if (index >= cube.frames) throw DomainError("map_from_cube: frame index out of range");
    RealGrid out(cube.dim0, cube.dim1);
    std::size_t k = index * cube.frame_values();
    for (Eigen::Index p = 0; p < out.rows(); ++p)
        for (Eigen::Index q = 0; q < out.cols(); ++q) {
            if (cube.kind == RdcKind::complex) {
                out(p, q) = std::abs(cplx(cube.data[k], cube.data[k + 1]));
                k += 2;
            } else {
                out(p, q) = cube.data[k++];
            }
        }
    return out;
}

}  // namespace rdlab
