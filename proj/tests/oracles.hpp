// Independent reference implementations used only by the tests. They share no
// code with the library beyond the basic types.
#pragma once

#include "rdlab/core.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

namespace oracle {

using rdlab::cplx;

/// O(n^2) DFT with the e^{-j 2 pi k n / L} kernel, angles reduced before use.
inline std::vector<cplx> naive_dft(const std::vector<cplx>& x) {
    const std::size_t n = x.size();
    std::vector<cplx> y(n);
    for (std::size_t k = 0; k < n; ++k) {
        cplx acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t r = (k * i) % n;
            acc += x[i] * std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(r) / static_cast<double>(n));
        }
        y[k] = acc;
    }
    return y;
}

/// Direct 2-D sum for the RD map: zero-padded to P x Q, zero Doppler moved to Q/2.
inline rdlab::ComplexGrid naive_rd(const rdlab::ComplexGrid& s, Eigen::Index P, Eigen::Index Q) {
    rdlab::ComplexGrid out = rdlab::ComplexGrid::Zero(P, Q);
    const double pi2 = 2.0 * std::numbers::pi;
    for (Eigen::Index p = 0; p < P; ++p)
        for (Eigen::Index k = 0; k < Q; ++k) {
            cplx acc = 0.0;
            for (Eigen::Index n = 0; n < s.rows(); ++n)
                for (Eigen::Index m = 0; m < s.cols(); ++m) {
                    const double a = static_cast<double>((p * n) % P) / P + static_cast<double>((k * m) % Q) / Q;
                    acc += s(n, m) * std::polar(1.0, -pi2 * a);
                }
            out(p, (k + Q / 2) % Q) = acc;
        }
    return out;
}

struct Cell {
    long p, q;
};

/// SINR by plain re-summation over |value|^2.
inline double sinr_db(const rdlab::RealGrid& mag, const std::vector<Cell>& o, const std::vector<Cell>& n) {
    long double so = 0, sn = 0;
    for (const auto& c : o) so += static_cast<long double>(mag(c.p, c.q)) * mag(c.p, c.q);
    for (const auto& c : n) sn += static_cast<long double>(mag(c.p, c.q)) * mag(c.p, c.q);
    return static_cast<double>(10.0L * std::log10((so / o.size()) / (sn / n.size())));
}

inline double evm(const rdlab::RealGrid& clean, const rdlab::RealGrid& test, const std::vector<Cell>& o) {
    long double acc = 0;
    for (const auto& c : o) acc += std::fabs(static_cast<long double>(clean(c.p, c.q)) - test(c.p, c.q)) / clean(c.p, c.q);
    return static_cast<double>(acc / o.size());
}

/// Exhaustive best one-to-one matching by DP over subsets of reference peaks.
/// Works for up to ~16 reference peaks.
inline int max_matching(const std::vector<Cell>& ref, const std::vector<Cell>& det, int tol) {
    const std::size_t R = ref.size();
    std::vector<int> best(std::size_t{1} << R, -1);
    best[0] = 0;
    for (const auto& d : det) {
        std::vector<int> next = best;
        for (std::size_t mask = 0; mask < best.size(); ++mask) {
            if (best[mask] < 0) continue;
            for (std::size_t r = 0; r < R; ++r) {
                if (mask & (std::size_t{1} << r)) continue;
                if (std::max(std::labs(d.p - ref[r].p), std::labs(d.q - ref[r].q)) > tol) continue;
                auto& slot = next[mask | (std::size_t{1} << r)];
                slot = std::max(slot, best[mask] + 1);
            }
        }
        best = std::move(next);
    }
    return *std::max_element(best.begin(), best.end());
}

}  // namespace oracle
