#include "oracles.hpp"
#include "rdlab/rd_pipeline.hpp"

#include <gtest/gtest.h>

using namespace rdlab;

namespace {

BeatFrame random_frame(const RadarConfig& cfg, std::uint64_t seed) {
    Rng r(seed);
    ComplexGrid s(cfg.samples_per_chirp, cfg.chirps_per_frame);
    for (Eigen::Index i = 0; i < s.size(); ++i) s.data()[i] = r.complex_normal(1.0);
    return {cfg, s, Provenance::corrupted};
}

RadarConfig small_config() {
    RadarConfig cfg;
    cfg.samples_per_chirp = 8;
    cfg.chirps_per_frame = 6;
    cfg.range_fft_points = 10;  // zero padded
    cfg.doppler_fft_points = 8;
    return cfg;
}

}  // namespace

TEST(RangeDoppler, MatchesNaiveTwoDimensionalSum) {
    const RadarConfig cfg = small_config();
    const auto f = random_frame(cfg, 4);
    const RdMap rd = range_doppler_map(f);
    const ComplexGrid ref = oracle::naive_rd(f.samples(), cfg.range_fft_points, cfg.doppler_fft_points);
    EXPECT_LE((rd.complex_values() - ref).norm(), 1e-9 * ref.norm());
}

TEST(RangeDoppler, ZeroFrameGivesZeroMap) {
    const RdMap rd = range_doppler_map(BeatFrame::zeros(RadarConfig{}, Provenance::clean));
    EXPECT_EQ(rd.complex_values().cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(rd.range_bins(), 64);
    EXPECT_EQ(rd.doppler_bins(), 128);
}

TEST(RangeDoppler, Parseval) {
    const RadarConfig cfg;
    const auto f = random_frame(cfg, 8);
    const RdMap rd = range_doppler_map(f);
    const double e_rd = rd.complex_values().cwiseAbs2().sum();
    const double e_s = f.samples().cwiseAbs2().sum();
    EXPECT_NEAR(e_rd, 64.0 * 128.0 * e_s, 1e-9 * e_rd);
}

TEST(RangeDoppler, FastTimeShiftIsAPhaseRamp) {
    // A circular one-sample shift in fast time multiplies range bin p by exp(-j 2 pi p / P).
    RadarConfig cfg;
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const auto f = random_frame(cfg, seed);
        ComplexGrid shifted(f.samples().rows(), f.samples().cols());
        const Eigen::Index N = shifted.rows();
        for (Eigen::Index n = 0; n < N; ++n) shifted.row((n + 1) % N) = f.samples().row(n);
        const ComplexGrid y0 = range_profiles(f);
        const ComplexGrid y1 = range_profiles(BeatFrame(cfg, shifted, Provenance::corrupted));
        for (Eigen::Index p = 0; p < y0.rows(); ++p) {
            const cplx ramp = std::polar(1.0, -kTwoPi * static_cast<double>(p) / static_cast<double>(y0.rows()));
            EXPECT_LE((y1.row(p) - ramp * y0.row(p)).norm(), 1e-9 * (1.0 + y0.row(p).norm()));
        }
    }
}

TEST(RangeDoppler, Linearity) {
    const RadarConfig cfg;
    const auto a = random_frame(cfg, 1);
    const auto b = random_frame(cfg, 2);
    const cplx k(0.3, -1.2);
    const BeatFrame mix(cfg, a.samples() + k * b.samples(), Provenance::corrupted);
    const ComplexGrid lhs = range_doppler_map(mix).complex_values();
    const ComplexGrid rhs = range_doppler_map(a).complex_values() + k * range_doppler_map(b).complex_values();
    EXPECT_LE((lhs - rhs).norm(), 1e-9 * lhs.norm());
}

TEST(RangeDoppler, HannWindowSuppressesFarSidelobes) {
    const Target t{31.3, 5.17, 10.0};
    const auto f = synthesize_clean_beat(RadarConfig{}, std::span<const Target>(&t, 1), 0, false);
    const RealGrid rect = range_doppler_map(f).linear_magnitude();
    const RealGrid hann = range_doppler_map(f, Window::hann).linear_magnitude();
    const RdBin b = expected_peak_bin(RadarConfig{}, t);
    const Eigen::Index far_q = (b.q + 40) % 128;
    EXPECT_LT(hann(b.p, far_q) / hann.maxCoeff(), rect(b.p, far_q) / rect.maxCoeff());
}

TEST(ToDb, KnownValuesAndMonotonicity) {
    RadarConfig cfg;
    RealGrid m = RealGrid::Zero(64, 128);
    m(0, 0) = 1.0;
    m(0, 1) = 10.0;
    const RealGrid db = to_db(RdMap::from_real(cfg, m, Scale::linear)).real_values();
    EXPECT_NEAR(db(0, 0), 0.0, 1e-9);
    EXPECT_NEAR(db(0, 1), 20.0, 1e-9);
    EXPECT_NEAR(db(0, 2), -240.0, 1e-9);
    Rng r(5);
    for (int i = 0; i < 1000; ++i) {
        const double a = r.uniform(0, 5), b = a + r.uniform(1e-9, 5);
        RealGrid g = RealGrid::Zero(64, 128);
        g(0, 0) = a;
        g(0, 1) = b;
        const RealGrid d = to_db(RdMap::from_real(cfg, g, Scale::linear)).real_values();
        ASSERT_LT(d(0, 0), d(0, 1));
    }
    EXPECT_THROW(to_db(RdMap::from_real(cfg, db, Scale::db)), DomainError);
}

TEST(Normalize, EndpointsRoundTripAndIdempotence) {
    RadarConfig cfg;
    RealGrid x(64, 128);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = static_cast<double>(i % 97) - 30.0;
    const RdMap db = RdMap::from_real(cfg, x, Scale::db);
    const RdMap n = normalize(db);
    EXPECT_DOUBLE_EQ(n.real_values().minCoeff(), 0.0);
    EXPECT_NEAR(n.real_values().maxCoeff(), 1.0, 1e-12);
    ASSERT_TRUE(n.normalization().has_value());
    EXPECT_FALSE(n.normalization()->degenerate);
    const RealGrid back = denormalize(n).real_values();
    EXPECT_LE((back - x).cwiseAbs().maxCoeff(), 1e-9 * x.cwiseAbs().maxCoeff());
    // Fixed stats applied twice are a no-op.
    const NormStats s = n.normalization()->stats;
    const RdMap twice = normalize(normalize(db, s), s);
    EXPECT_LE((twice.real_values() - n.real_values()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Normalize, OrderPreservingAndClamped) {
    RadarConfig cfg;
    Rng r(3);
    RealGrid x(64, 128);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = r.uniform(-80, 20);
    const NormStats s{-30.0, 20.0, -1.0, 1.0};  // narrower than the data: forces clamping
    const RealGrid y = normalize(RdMap::from_real(cfg, x, Scale::db), s).real_values();
    EXPECT_GE(y.minCoeff(), 0.0);
    EXPECT_LE(y.maxCoeff(), 1.0);
    for (Eigen::Index i = 0; i + 1 < x.size(); ++i)
        if (x.data()[i] < x.data()[i + 1]) {
            ASSERT_LE(y.data()[i], y.data()[i + 1]);
        }
}

TEST(Normalize, ConstantMapIsDegenerate) {
    RadarConfig cfg;
    const RdMap n = normalize(RdMap::from_real(cfg, RealGrid::Constant(64, 128, -42.0), Scale::db));
    EXPECT_TRUE(n.normalization()->degenerate);
    EXPECT_EQ(n.real_values().minCoeff(), 0.5);
    EXPECT_EQ(n.real_values().maxCoeff(), 0.5);
    EXPECT_THROW(normalize(RdMap::from_real(cfg, RealGrid::Zero(64, 128), Scale::linear)), DomainError);
}

TEST(NormStats, GlobalOverSeveralMaps) {
    RealGrid a = RealGrid::Constant(2, 2, 1.0), b = RealGrid::Constant(2, 2, 3.0);
    const std::vector<RealGrid> maps{a, b};
    const NormStats s = compute_norm_stats(maps);
    EXPECT_DOUBLE_EQ(s.mean, 2.0);
    EXPECT_DOUBLE_EQ(s.std, 1.0);
    EXPECT_DOUBLE_EQ(s.min, -1.0);
    EXPECT_DOUBLE_EQ(s.max, 1.0);
}

TEST(ExpectedPeakBin, ClosedFormExamples) {
    RadarConfig cfg;
    EXPECT_EQ(expected_peak_bin(cfg, {1e-6, 0.0, 1.0}), (RdBin{0, 64}));
    EXPECT_EQ(expected_peak_bin(cfg, {30, 10, 1}), (RdBin{7, 92}));
    EXPECT_EQ(expected_peak_bin(cfg, {30, -10, 1}), (RdBin{7, 36}));
    EXPECT_THROW(expected_peak_bin(cfg, {30, 40, 1}), DomainError);
    EXPECT_THROW(expected_peak_bin(cfg, {500, 0, 1}), DomainError);
    EXPECT_THROW(expected_peak_bin(cfg, {-1, 0, 1}), DomainError);
}

TEST(Axes, BinCentres) {
    RadarConfig cfg;
    EXPECT_DOUBLE_EQ(range_of_bin(cfg, 0), 0.0);
    EXPECT_NEAR(range_of_bin(cfg, 7), 7 * cfg.range_bin_m(), 1e-12);
    EXPECT_DOUBLE_EQ(velocity_of_bin(cfg, 64), 0.0);
    EXPECT_NEAR(velocity_of_bin(cfg, 92), 28 * cfg.velocity_bin_mps(), 1e-12);
}
