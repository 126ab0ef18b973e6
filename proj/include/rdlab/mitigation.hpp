/**
 * @file mitigation.hpp
 * @brief Time-domain interference localization, Zeroing and IMAT reconstruction.
 *
 * Both mitigations work per fast-time column (one chirp at a time) and leave
 * unflagged samples bit-identical.
 */
#pragma once

#include "rdlab/core.hpp"
#include "rdlab/fft.hpp"
#include "rdlab/signal_model.hpp"

#include <algorithm>
#include <memory>
#include <span>
#include <vector>

namespace rdlab {

using BoolGrid = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr double kDefaultKSigma = 4.0;
inline constexpr int kDefaultImatIterations = 10;
inline constexpr double kDefaultImatDecay = 0.7;
// Consistency factor turning a median absolute deviation into a Gaussian sigma.
inline constexpr double kMadToSigma = 1.4826;

struct InterferenceMask {
    BoolGrid flags;  // true = corrupted sample, N x M
    double k_sigma = kDefaultKSigma;
    double median_magnitude = 0.0;
    double scaled_mad = 0.0;

    std::size_t count() const { return static_cast<std::size_t>(flags.count()); }
    bool empty() const { return count() == 0; }

    static InterferenceMask none(Eigen::Index rows, Eigen::Index cols) {
        return {BoolGrid::Constant(rows, cols, false)};
    }
    static InterferenceMask all(Eigen::Index rows, Eigen::Index cols) { return {BoolGrid::Constant(rows, cols, true)}; }
};

namespace detail {

inline double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    double m = *mid;
    if (v.size() % 2 == 0) m = 0.5 * (m + *std::max_element(v.begin(), mid));
    return m;
}

inline void check_mask(const BeatFrame& frame, const InterferenceMask& mask) {
    if (mask.flags.rows() != frame.fast_time_samples() || mask.flags.cols() != frame.chirps())
        throw ShapeError("interference mask does not match the frame");
}

}  // namespace detail

/// Flags |s| > median(|s|) + k_sigma * 1.4826 * MAD(|s|), over the whole frame.
inline InterferenceMask detect_interfered_samples(const BeatFrame& frame, double k_sigma = kDefaultKSigma) {
    if (!(k_sigma > 0.0)) throw DomainError("detect_interfered_samples: k_sigma must be > 0");
    const ComplexGrid& s = frame.samples();
    std::vector<double> mag(static_cast<std::size_t>(s.size()));
    for (Eigen::Index i = 0; i < s.size(); ++i) mag[static_cast<std::size_t>(i)] = std::abs(s.data()[i]);
    const double med = detail::median_of(mag);
    std::vector<double> dev(mag.size());
    for (std::size_t i = 0; i < mag.size(); ++i) dev[i] = std::abs(mag[i] - med);
    const double mad = kMadToSigma * detail::median_of(std::move(dev));
    const double threshold = med + k_sigma * mad;

    InterferenceMask mask;
    mask.k_sigma = k_sigma;
    mask.median_magnitude = med;
    mask.scaled_mad = mad;
    mask.flags = BoolGrid(s.rows(), s.cols());
    for (Eigen::Index n = 0; n < s.rows(); ++n)
        for (Eigen::Index m = 0; m < s.cols(); ++m) mask.flags(n, m) = std::abs(s(n, m)) > threshold;
    return mask;
}

/// Flagged samples set to 0 + 0j.
inline BeatFrame zeroing(const BeatFrame& frame, const InterferenceMask& mask) {
    detail::check_mask(frame, mask);
    ComplexGrid s = frame.samples();
    for (Eigen::Index n = 0; n < s.rows(); ++n)
        for (Eigen::Index m = 0; m < s.cols(); ++m)
            if (mask.flags(n, m)) s(n, m) = cplx{};
    return {frame.config(), std::move(s), frame.provenance()};
}

struct ImatParams {
    int iterations = kDefaultImatIterations;
    double decay = kDefaultImatDecay;

    void validate() const {
        if (iterations < 1) throw DomainError("imat: iterations must be >= 1");
        if (!(decay > 0.0 && decay < 1.0)) throw DomainError("imat: decay must be in (0, 1)");
    }
};

/// Iterative method with adaptive thresholding on one chirp. `flags` marks the
/// samples to reconstruct; others are restored to `original` after every step.
inline std::vector<cplx> imat_column(std::span<const cplx> original, std::span<const bool> flags,
                                     const ImatParams& params = {}) {
    params.validate();
    const std::size_t n = original.size();
    std::vector<cplx> x(original.begin(), original.end());
    for (std::size_t i = 0; i < n; ++i)
        if (flags[i]) x[i] = cplx{};
    std::vector<cplx> spectrum(n);
    double threshold_scale = 1.0;
    for (int k = 0; k < params.iterations; ++k) {
        std::copy(x.begin(), x.end(), spectrum.begin());
        dft_inplace(spectrum);
        double peak = 0.0;
        for (const auto& c : spectrum) peak = std::max(peak, std::abs(c));
        const double threshold = peak * threshold_scale;
        for (auto& c : spectrum)
            if (!(std::abs(c) > threshold)) c = cplx{};
        idft_inplace(spectrum);
        for (std::size_t i = 0; i < n; ++i)
            if (flags[i]) x[i] = spectrum[i];
        threshold_scale *= params.decay;
    }
    return x;
}

/// IMAT applied to every chirp that has at least one flagged sample.
inline BeatFrame imat(const BeatFrame& frame, const InterferenceMask& mask, const ImatParams& params = {}) {
    params.validate();
    detail::check_mask(frame, mask);
    ComplexGrid s = frame.samples();
    const Eigen::Index n_fast = s.rows();
    std::vector<cplx> column(static_cast<std::size_t>(n_fast));
    const auto flag_store = std::make_unique<bool[]>(static_cast<std::size_t>(n_fast));
    const std::span<const bool> flags(flag_store.get(), static_cast<std::size_t>(n_fast));
    for (Eigen::Index m = 0; m < s.cols(); ++m) {
        bool any = false;
        for (Eigen::Index n = 0; n < n_fast; ++n) {
            column[n] = s(n, m);
            flag_store[n] = mask.flags(n, m);
            any = any || mask.flags(n, m);
        }
        if (!any) continue;
        const auto rebuilt = imat_column(column, flags, params);
        for (Eigen::Index n = 0; n < n_fast; ++n)
            if (mask.flags(n, m)) s(n, m) = rebuilt[n];
    }
    return {frame.config(), std::move(s), frame.provenance()};
}

}  // namespace rdlab
