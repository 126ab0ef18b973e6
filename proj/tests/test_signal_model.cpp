#include "oracles.hpp"
#include "scenario_checks.hpp"

#include <gtest/gtest.h>

using namespace rdlab;

namespace {

RdBin argmax(const RdMap& m) {
    const RealGrid mag = m.linear_magnitude();
    Eigen::Index p = 0, q = 0;
    mag.maxCoeff(&p, &q);
    return {p, q};
}

BeatFrame one_target(double d, double v, bool noise = false, std::uint64_t seed = 1) {
    const Target t{d, v, 10.0};
    return synthesize_clean_beat(RadarConfig{}, std::span<const Target>(&t, 1), seed, noise);
}

}  // namespace

TEST(ChirpFrequency, LinearRampOnHalfOpenInterval) {
    RadarConfig cfg;
    EXPECT_DOUBLE_EQ(chirp_frequency(cfg, 0.0), 77.0e9);
    EXPECT_NEAR(chirp_frequency(cfg, 10.56e-6), 77.0768e9, 1.0);
    EXPECT_THROW(chirp_frequency(cfg, cfg.sweep_duration_s), DomainError);
    EXPECT_THROW(chirp_frequency(cfg, -1e-9), DomainError);
}

TEST(CleanBeat, EmptySceneWithoutNoiseIsZero) {
    const auto f = synthesize_clean_beat(RadarConfig{}, {}, 3, false);
    EXPECT_EQ(f.samples().cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(f.provenance(), Provenance::clean);
    EXPECT_EQ(f.fast_time_samples(), 64);
    EXPECT_EQ(f.chirps(), 128);
}

TEST(CleanBeat, NoiseVarianceMatchesThermalPower) {
    RadarConfig cfg;
    const auto f = synthesize_clean_beat(cfg, {}, 12345, true);
    // Power of a complex sample is |x|^2 / 2 under the sqrt(2 P) amplitude convention.
    const double measured = f.samples().cwiseAbs2().mean() / 2.0;
    const double expected = dbm_to_watts(thermal_noise_power_dbm(cfg));
    EXPECT_NEAR(measured / expected, 1.0, 0.05);
}

TEST(CleanBeat, DeterministicPerSeed) {
    const auto a = one_target(30, 10, true, 99);
    const auto b = one_target(30, 10, true, 99);
    const auto c = one_target(30, 10, true, 100);
    EXPECT_TRUE(a.samples() == b.samples());
    EXPECT_FALSE(a.samples() == c.samples());
}

TEST(CleanBeat, SingleTargetPeakAtClosedFormBin) {
    EXPECT_EQ(argmax(range_doppler_map(one_target(30, 10))), (RdBin{7, 92}));
    EXPECT_EQ(argmax(range_doppler_map(one_target(30, -10))), (RdBin{7, 36}));
}

TEST(CleanBeat, AmplitudeFollowsEchoPower) {
    RadarConfig cfg;
    const auto f = one_target(30, 10);
    EXPECT_NEAR(std::abs(f.samples()(5, 9)), dbm_to_amplitude(echo_power_dbm(cfg, 30, 10)), 1e-15);
}

TEST(CleanBeat, LinearInTargetSets) {
    RadarConfig cfg;
    const std::vector<Target> t1{{20, 3, 5}, {41, -7, 2}};
    const std::vector<Target> t2{{55, 12, 8}};
    std::vector<Target> all = t1;
    all.insert(all.end(), t2.begin(), t2.end());
    const auto a = synthesize_clean_beat(cfg, t1, 0, false);
    const auto b = synthesize_clean_beat(cfg, t2, 0, false);
    const auto ab = synthesize_clean_beat(cfg, all, 0, false);
    const auto sum = superimpose(a, b);
    EXPECT_LE((ab.samples() - sum.samples()).norm(), 1e-12 * ab.samples().norm());
}

TEST(CleanBeat, PeakPlacementOverRandomTargets) {
    RadarConfig cfg;
    Rng rng(2024);
    const double vmax = cfg.max_unambiguous_velocity();
    for (int i = 0; i < 100; ++i) {
        // Ranges up to 95% of the sampled beat band, velocities inside the unambiguous interval.
        const double dmax = 0.95 * cfg.sampling_freq_hz * kSpeedOfLight / (2.0 * cfg.chirp_rate());
        const Target t{rng.uniform(0.5, dmax), rng.uniform(-0.98 * vmax, 0.98 * vmax), rng.uniform(0.1, 100.0)};
        const auto f = synthesize_clean_beat(cfg, std::span<const Target>(&t, 1), 0, false);
        const RdBin got = argmax(range_doppler_map(f));
        const RdBin want = expected_peak_bin(cfg, t);
        const auto P = static_cast<Eigen::Index>(cfg.range_fft_points);
        const auto Q = static_cast<Eigen::Index>(cfg.doppler_fft_points);
        const auto dp = std::min((got.p - want.p + P) % P, (want.p - got.p + P) % P);
        const auto dq = std::min((got.q - want.q + Q) % Q, (want.q - got.q + Q) % Q);
        EXPECT_LE(dp, 1) << "target " << t.range_m << " m " << t.radial_velocity_mps << " m/s";
        EXPECT_LE(dq, 1) << "target " << t.range_m << " m " << t.radial_velocity_mps << " m/s";
    }
}

TEST(BeatFrame, RejectsBadShapesAndValues) {
    RadarConfig cfg;
    EXPECT_THROW(BeatFrame(cfg, ComplexGrid::Zero(32, 128), Provenance::clean), ShapeError);
    ComplexGrid g = ComplexGrid::Zero(64, 128);
    g(0, 0) = cplx(std::nan(""), 0.0);
    EXPECT_THROW(BeatFrame(cfg, g, Provenance::clean), DomainError);
}

TEST(Superimpose, IdentityCommutativityAndShape) {
    const auto x = one_target(20, 4, true, 1);
    const auto y = one_target(40, -4, true, 2);
    EXPECT_TRUE(superimpose(x, std::span<const BeatFrame>{}).samples() == x.samples());
    const auto zero = BeatFrame::zeros(RadarConfig{}, Provenance::clean);
    EXPECT_TRUE(superimpose(zero, std::span<const BeatFrame>(&x, 1)).samples() == x.samples());
    EXPECT_TRUE(superimpose(x, y).samples() == superimpose(y, x).samples());
    EXPECT_EQ(superimpose(x, y).provenance(), Provenance::corrupted);
    RadarConfig other;
    other.chirps_per_frame = 64;
    other.doppler_fft_points = 64;
    EXPECT_THROW(superimpose(x, BeatFrame::zeros(other, Provenance::clean)), ShapeError);
}

TEST(Interference, ZeroAmplitudeGivesZeroFrame) {
    InterfererConfig c;
    c.amplitude_scale = 0.0;
    const auto f = synthesize_interference(RadarConfig{}, c);
    EXPECT_EQ(f.samples().cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(f.provenance(), Provenance::interference_only);
}

TEST(Interference, BandLimitHoldsOnEveryNonzeroSample) {
    RadarConfig cfg;
    Rng rng(77);
    for (int trial = 0; trial < 20; ++trial) {
        InterfererConfig c;
        c.carrier_freq_hz = 77.0e9 + rng.uniform(-50e6, 50e6);
        c.sweep_bandwidth_hz = rng.uniform(120e6, 400e6);
        c.sweep_duration_s = rng.uniform(4e-6, 30e-6);
        c.distance_m = rng.uniform(2, 63);
        c.radial_velocity_mps = rng.uniform(-20, 0);
        c.time_offset_s = rng.uniform(0, c.sweep_duration_s);
        const auto f = synthesize_interference(cfg, c);
        const double amp = interference_amplitude(cfg, c);
        for (Eigen::Index n = 0; n < f.fast_time_samples(); ++n)
            for (Eigen::Index m = 0; m < f.chirps(); ++m) {
                const auto s = interference_sample(cfg, c, n, m, amp);
                if (f.samples()(n, m) != cplx{}) {
                    ASSERT_LE(std::abs(s.freq_difference_hz), cfg.sampling_freq_hz / 2);
                    ASSERT_NEAR(std::abs(f.samples()(n, m)), amp, 1e-12 * amp);
                } else {
                    ASSERT_GT(std::abs(s.freq_difference_hz), cfg.sampling_freq_hz / 2);
                }
            }
    }
}

TEST(Interference, AmplitudeScalesLinearly) {
    const auto preset = scenario_preset(2);
    auto c = preset.interferer;
    const auto a = synthesize_interference(preset.victim, c);
    c.amplitude_scale = 0.5;
    const auto b = synthesize_interference(preset.victim, c);
    EXPECT_LE((0.5 * a.samples() - b.samples()).norm(), 1e-12 * b.samples().norm());
}

TEST(Interference, MatchedAggressorShowsSingleGhostPeak) {
    const auto preset = scenario_preset(1);
    InterfererConfig c = preset.interferer;
    const auto rd = range_doppler_map(synthesize_interference(preset.victim, c));
    const RealGrid mag = rd.linear_magnitude();
    Eigen::Index p = 0, q = 0;
    const double peak = mag.maxCoeff(&p, &q);
    EXPECT_EQ(p, kScenarioGhostRangeBin);
    // Dominant: every other cell at least 10 dB below the peak.
    RealGrid rest = mag;
    rest(p, q) = 0.0;
    EXPECT_LT(rest.maxCoeff(), peak / std::sqrt(10.0));
}

TEST(ScenarioPreset, RatiosAndOffsetsPerTable) {
    struct Row {
        int id;
        double bw, dur, off;
    };
    for (const Row r : {Row{1, 1, 1, 0}, Row{2, 1, 1.1, 0}, Row{3, 1, 2, 0}, Row{4, 2, 1, 0}, Row{5, 1, 1, -20e6},
                        Row{6, 2, 1.1, 0}, Row{7, 2, 2, 0}}) {
        const auto p = scenario_preset(r.id);
        EXPECT_DOUBLE_EQ(p.bandwidth_ratio, r.bw);
        EXPECT_DOUBLE_EQ(p.duration_ratio, r.dur);
        EXPECT_DOUBLE_EQ(p.carrier_offset_hz, r.off);
        EXPECT_NEAR(p.interferer.sweep_bandwidth_hz / p.victim.sweep_bandwidth_hz, r.bw, 1e-12);
        EXPECT_NEAR(p.interferer.sweep_duration_s / p.victim.sweep_duration_s, r.dur, 1e-12);
        EXPECT_NEAR(p.interferer.carrier_freq_hz - p.victim.carrier_freq_hz, r.off, 1e-3);
        EXPECT_EQ(p.victim, RadarConfig{});
    }
    EXPECT_THROW(scenario_preset(0), DomainError);
    EXPECT_THROW(scenario_preset(8), DomainError);
}

// Qualitative phenomena, two seeds each here; the acceptance runner uses ten.
TEST(ScenarioPhenomena, GhostNoiseFloorRidgeAndMasking) {
    for (std::uint64_t seed : {1u, 2u}) {
        EXPECT_GE(checks::ghost_detections(checks::run_scenario(1, seed)), 1u);
        EXPECT_GE(checks::noise_floor_rise_db(checks::run_scenario(2, seed)), 3.0);
        EXPECT_GE(checks::noise_floor_rise_db(checks::run_scenario(6, seed)), 3.0);
        EXPECT_GE(checks::ridge_row_cells(checks::run_scenario(3, seed)), 64);
        EXPECT_LE(checks::sinr_degradation_db(checks::run_scenario(5, seed)), 1.0);
    }
}
