/**
 * @file sinr_scaling.hpp
 * @brief Scaling an interference frame so the corrupted RD map hits a SINR level.
 *
 * The SINR of RD(clean + s * interference) is measured on the cell sets derived
 * from the clean reference, either exactly as sinr_db does or with the object
 * power taken from the clean map (see SinrDefinition). Because the RD transform
 * is linear, RD(clean + s I) = RD(clean) + s RD(I), so both maps are transformed
 * once and only the cell sums are recomputed per trial scale.
 */
#pragma once

#include "rdlab/detection_metrics.hpp"
#include "rdlab/rd_pipeline.hpp"
#include "rdlab/signal_model.hpp"

#include <array>
#include <cmath>
#include <string_view>
#include <utility>
#include <vector>

namespace rdlab {

inline constexpr double kSinrScalingToleranceDb = 0.5;

/// How the SINR of a corrupted map is measured when scaling interference.
///  corrupted_map:    object and noise powers both read from RD(clean + s I).
///                    Broadband interference enters the object cells as well,
///                    so this value levels off near 0 dB for large s.
///  reference_signal: object power read from the clean map, noise-floor power
///                    from RD(clean + s I). Decreases without bound in s, so
///                    every level below the clean SINR is reachable.
enum class SinrDefinition { corrupted_map, reference_signal };

inline std::string_view to_string(SinrDefinition d) {
    return d == SinrDefinition::corrupted_map ? "corrupted_map" : "reference_signal";
}

namespace detail {

/// Object/noise cell values of RD(clean) and RD(interference), for fast SINR(s).
class SinrOfScale {
public:
    SinrOfScale(const ComplexGrid& clean, const ComplexGrid& interference, const CellSet& objects,
                const CellSet& noise, SinrDefinition definition = SinrDefinition::corrupted_map)
        : definition_(definition) {
        auto gather = [&](const CellSet& set, std::vector<cplx>& c, std::vector<cplx>& i) {
            for (const auto& cell : set.cells) {
                c.push_back(clean(cell.p, cell.q));
                i.push_back(interference(cell.p, cell.q));
            }
        };
        gather(objects, obj_clean_, obj_int_);
        gather(noise, noise_clean_, noise_int_);
    }

    double operator()(double s) const {
        const double object_scale = definition_ == SinrDefinition::corrupted_map ? s : 0.0;
        return 10.0 * std::log10(mean_power(obj_clean_, obj_int_, object_scale) /
                                 mean_power(noise_clean_, noise_int_, s));
    }

    /// Mean powers of the clean and interference parts alone, {object_clean, object_int, noise_clean, noise_int}.
    std::array<double, 4> component_powers() const {
        return {mean_power(obj_clean_, obj_int_, 0.0), mean_power(obj_int_, obj_clean_, 0.0),
                mean_power(noise_clean_, noise_int_, 0.0), mean_power(noise_int_, noise_clean_, 0.0)};
    }

private:
    static double mean_power(const std::vector<cplx>& a, const std::vector<cplx>& b, double s) {
        double acc = 0.0;
        for (std::size_t k = 0; k < a.size(); ++k) acc += std::norm(a[k] + s * b[k]);
        return acc / static_cast<double>(a.size());
    }

    SinrDefinition definition_;
    std::vector<cplx> obj_clean_, obj_int_, noise_clean_, noise_int_;
};

}  // namespace detail

/// Returns s >= 0 such that the SINR of RD(clean_beat + s * interference),
/// measured per `definition`, is within 0.5 dB of `target_sinr_db` (in
/// practice within a few millidecibels).
///
/// The closed-form start point neglects clean/interference cross terms:
/// (a + s^2 b) / (c + s^2 d) = R with a, c the clean and b, d the interference
/// mean powers over O and N (b is dropped for reference_signal). A bisection
/// on log(s) then absorbs the cross terms. Throws InfeasibleError when the
/// target is not below the clean SINR or the interference cannot pull the
/// SINR down to the target.
inline double scale_to_sinr(const RdMap& clean, const BeatFrame& interference, double target_sinr_db,
                            const std::pair<CellSet, CellSet>& cells,
                            SinrDefinition definition = SinrDefinition::corrupted_map) {
    const auto& [objects, noise] = cells;
    if (objects.empty() || noise.empty()) throw DomainError("scale_to_sinr: object and noise cells must be nonempty");
    if (!(clean.config() == interference.config())) throw ShapeError("scale_to_sinr: configuration mismatch");
    const RdMap rd_int = range_doppler_map(interference);
    const detail::SinrOfScale sinr_of(clean.complex_values(), rd_int.complex_values(), objects, noise, definition);

    const double clean_sinr = sinr_of(0.0);
    if (!(target_sinr_db < clean_sinr))
        throw InfeasibleError("scale_to_sinr: target SINR is not below the clean SINR");
    auto [a, b, c, d] = sinr_of.component_powers();
    if (definition == SinrDefinition::reference_signal) b = 0.0;
    if (b == 0.0 && d == 0.0) throw InfeasibleError("scale_to_sinr: interference frame has no energy in O or N");

    const double ratio = db_to_linear_power(target_sinr_db);
    // Asymptotic SINR as s -> infinity is b / d; targets at or below it cannot be reached.
    if (d == 0.0 || !(ratio * d > b)) throw InfeasibleError("scale_to_sinr: target below the interference-only SINR");

    double s0 = std::sqrt(std::max((a - ratio * c) / (ratio * d - b), 0.0));
    if (!(s0 > 0.0) || !std::isfinite(s0)) s0 = std::sqrt(a / d) * 1e-3;

    // Bracket in log-scale: lo gives SINR above target, hi below.
    double lo = std::log(s0);
    double hi = lo;
    for (int k = 0; k < 200 && sinr_of(std::exp(lo)) <= target_sinr_db; ++k) lo -= 1.0;
    for (int k = 0; k < 200 && sinr_of(std::exp(hi)) > target_sinr_db; ++k) hi += 1.0;
    if (sinr_of(std::exp(lo)) <= target_sinr_db || sinr_of(std::exp(hi)) > target_sinr_db)
        throw InfeasibleError("scale_to_sinr: could not bracket the target SINR");

    for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double v = sinr_of(std::exp(mid));
        if (std::abs(v - target_sinr_db) < 1e-6) {
            lo = hi = mid;
            break;
        }
        if (v > target_sinr_db)
            lo = mid;
        else
            hi = mid;
    }
    const double s = std::exp(0.5 * (lo + hi));
    if (std::abs(sinr_of(s) - target_sinr_db) > kSinrScalingToleranceDb)
        throw InfeasibleError("scale_to_sinr: SINR is not monotone enough to reach the target");
    return s;
}

/// SINR of `corrupted` under `definition`; `clean` supplies the object power
/// for reference_signal. Both maps are linear (complex or magnitude).
inline double measured_sinr_db(const RdMap& clean, const RdMap& corrupted, const std::pair<CellSet, CellSet>& cells,
                               SinrDefinition definition) {
    if (definition == SinrDefinition::corrupted_map) return sinr_db(corrupted, cells.first, cells.second);
    detail::check_cells(clean, cells.first, "measured_sinr_db");
    detail::check_cells(corrupted, cells.second, "measured_sinr_db");
    const RealGrid pc = clean.power();
    const RealGrid px = corrupted.power();
    double po = 0.0;
    for (const auto& c : cells.first.cells) po += pc(c.p, c.q);
    double pn = 0.0;
    for (const auto& c : cells.second.cells) pn += px(c.p, c.q);
    po /= static_cast<double>(cells.first.size());
    pn /= static_cast<double>(cells.second.size());
    return 10.0 * std::log10(po / pn);
}

/// Measured SINR of RD(clean) + s * RD(interference) without re-running the transform.
inline double sinr_at_scale(const RdMap& clean, const RdMap& interference_rd, double s,
                            const std::pair<CellSet, CellSet>& cells,
                            SinrDefinition definition = SinrDefinition::corrupted_map) {
    const detail::SinrOfScale sinr_of(clean.complex_values(), interference_rd.complex_values(), cells.first,
                                      cells.second, definition);
    return sinr_of(s);
}

}  // namespace rdlab
