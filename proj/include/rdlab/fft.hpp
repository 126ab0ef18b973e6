/**
 * @file fft.hpp
 * @brief Unnormalized in-place DFT backed by FFTW.
 *
 * Plans are created once per (length, direction) under a mutex, because FFTW
 * planning is not thread-safe; executing a plan on new arrays is. Plans are
 * made with FFTW_ESTIMATE | FFTW_UNALIGNED so results do not depend on buffer
 * alignment or timing measurements.
 */
#pragma once

#include "rdlab/core.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <span>
#include <utility>
#include <vector>

namespace rdlab {

enum class FftDirection : int { forward = FFTW_FORWARD, inverse = FFTW_BACKWARD };

namespace detail {

class FftPlanCache {
public:
    static FftPlanCache& instance() {
        static FftPlanCache cache;
        return cache;
    }

    fftw_plan plan(int n, FftDirection dir) {
        std::lock_guard lock(mutex_);
        const auto key = std::make_pair(n, static_cast<int>(dir));
        if (auto it = plans_.find(key); it != plans_.end()) return it->second;
        std::vector<cplx> scratch(static_cast<std::size_t>(n));
        auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
        fftw_plan p = fftw_plan_dft_1d(n, buf, buf, static_cast<int>(dir), FFTW_ESTIMATE | FFTW_UNALIGNED);
        plans_.emplace(key, p);
        return p;
    }

    FftPlanCache(const FftPlanCache&) = delete;
    FftPlanCache& operator=(const FftPlanCache&) = delete;

private:
    FftPlanCache() = default;
    ~FftPlanCache() {
        for (auto& [key, p] : plans_) fftw_destroy_plan(p);
    }

    std::mutex mutex_;
    std::map<std::pair<int, int>, fftw_plan> plans_;
};

}  // namespace detail

/// X[k] = sum_n x[n] exp(-/+ j 2 pi n k / L), no scaling in either direction.
inline void dft_inplace(std::span<cplx> data, FftDirection dir = FftDirection::forward) {
    if (data.empty()) return;
    fftw_plan p = detail::FftPlanCache::instance().plan(static_cast<int>(data.size()), dir);
    auto* buf = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(p, buf, buf);
}

/// Inverse DFT including the 1/L factor.
inline void idft_inplace(std::span<cplx> data) {
    dft_inplace(data, FftDirection::inverse);
    const double scale = 1.0 / static_cast<double>(data.size());
    for (auto& v : data) v *= scale;
}

}  // namespace rdlab
