#include "mitigation_checks.hpp"
#include "rdlab/detection_metrics.hpp"
#include "rdlab/rd_pipeline.hpp"

#include <gtest/gtest.h>

using namespace rdlab;

namespace {

BeatFrame noise_frame(std::uint64_t seed, double variance = 1.0) {
    RadarConfig cfg;
    Rng r(seed);
    ComplexGrid s(cfg.samples_per_chirp, cfg.chirps_per_frame);
    for (Eigen::Index i = 0; i < s.size(); ++i) s.data()[i] = r.complex_normal(variance);
    return {cfg, s, Provenance::corrupted};
}

InterferenceMask random_mask(std::uint64_t seed, double density) {
    Rng r(seed);
    InterferenceMask m = InterferenceMask::none(64, 128);
    for (Eigen::Index i = 0; i < m.flags.size(); ++i) m.flags.data()[i] = r.uniform() < density;
    return m;
}

}  // namespace

TEST(Detection, AllZeroFrameGivesEmptyMask) {
    const auto m = detect_interfered_samples(BeatFrame::zeros(RadarConfig{}, Provenance::clean));
    EXPECT_TRUE(m.empty());
    EXPECT_EQ(m.flags.rows(), 64);
    EXPECT_EQ(m.flags.cols(), 128);
}

TEST(Detection, FewFlagsOnPureNoise) {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const auto m = detect_interfered_samples(noise_frame(seed));
        EXPECT_LE(static_cast<double>(m.count()) / (64.0 * 128.0), 0.005);
    }
}

TEST(Detection, StrongBurstIsFullyFlagged) {
    BeatFrame f = noise_frame(4);
    ComplexGrid s = f.samples();
    for (int n = 20; n < 30; ++n) s(n, 50) = cplx(20.0, 0.0) * std::polar(1.0, 0.3 * n);
    const auto m = detect_interfered_samples(BeatFrame(f.config(), s, Provenance::corrupted));
    for (int n = 20; n < 30; ++n) EXPECT_TRUE(m.flags(n, 50)) << n;
    EXPECT_THROW(detect_interfered_samples(f, 0.0), DomainError);
}

TEST(Zeroing, IdentityAnnihilationIdempotence) {
    const BeatFrame f = noise_frame(5);
    EXPECT_TRUE(zeroing(f, InterferenceMask::none(64, 128)).samples() == f.samples());
    EXPECT_EQ(zeroing(f, InterferenceMask::all(64, 128)).samples().cwiseAbs().maxCoeff(), 0.0);
    const auto m = random_mask(6, 0.1);
    const BeatFrame once = zeroing(f, m);
    EXPECT_TRUE(zeroing(once, m).samples() == once.samples());
    for (Eigen::Index i = 0; i < m.flags.size(); ++i) {
        if (m.flags.data()[i])
            ASSERT_EQ(once.samples().data()[i], cplx{});
        else
            ASSERT_EQ(once.samples().data()[i], f.samples().data()[i]);  // bit-identical
    }
    EXPECT_THROW(zeroing(f, InterferenceMask::none(32, 128)), ShapeError);
}

TEST(Zeroing, ReducesInterferenceOnlyEnergy) {
    // Zeroing removes samples; on an interference-only frame the RD energy can only drop.
    for (int id : {2, 3, 6}) {
        const auto p = scenario_preset(id);
        const BeatFrame i = synthesize_interference(p.victim, p.interferer);
        const BeatFrame z = zeroing(i, detect_interfered_samples(i));
        EXPECT_LE(range_doppler_map(z).power().sum(), range_doppler_map(i).power().sum());
    }
}

TEST(Imat, EmptyMaskIsIdentity) {
    const BeatFrame f = noise_frame(7);
    EXPECT_TRUE(imat(f, InterferenceMask::none(64, 128)).samples() == f.samples());
}

TEST(Imat, UnmaskedSamplesAreUntouched) {
    const BeatFrame f = noise_frame(8);
    const auto m = random_mask(9, 0.05);
    const BeatFrame r = imat(f, m);
    for (Eigen::Index i = 0; i < m.flags.size(); ++i)
        if (!m.flags.data()[i]) {
            ASSERT_EQ(r.samples().data()[i], f.samples().data()[i]);
        }
}

TEST(Imat, RecoversMaskedSinusoid) {
    EXPECT_LE(checks::imat_worst_sinusoid_error_db(200, 10), -20.0);
}

TEST(Imat, TwoTonePeaksPreserved) {
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const int b1 = static_cast<int>(rng.below(64));
        int b2 = static_cast<int>(rng.below(64));
        if (b2 == b1) b2 = (b1 + 7) % 64;
        auto x = checks::tone(b1, 1.0, rng.uniform(0, kTwoPi));
        const auto x2 = checks::tone(b2, rng.uniform(0.3, 1.0), rng.uniform(0, kTwoPi));
        for (std::size_t i = 0; i < 64; ++i) x[i] += x2[i];
        const auto flags = checks::eight_of_64(rng, trial % 2 == 0);
        auto y = imat_column(x, std::span<const bool>(flags.get(), 64));
        auto X = x;
        dft_inplace(X);
        dft_inplace(y);
        for (int b : {b1, b2}) {
            const double d = 20.0 * std::log10(std::abs(y[b]) / std::abs(X[b]));
            ASSERT_LE(std::abs(d), 1.0) << "bin " << b;
        }
    }
}

TEST(Imat, RejectsInvalidParameters) {
    const BeatFrame f = noise_frame(12);
    const auto m = random_mask(13, 0.05);
    EXPECT_THROW(imat(f, m, ImatParams{0, 0.7}), DomainError);
    EXPECT_THROW(imat(f, m, ImatParams{10, 1.0}), DomainError);
    EXPECT_THROW(imat(f, m, ImatParams{10, 0.0}), DomainError);
}

TEST(Mitigation, ImprovesScenarioSinr) {
    const auto p = scenario_preset(2);
    const Target t{25.0, 6.0, 10.0};
    const BeatFrame clean = synthesize_clean_beat(p.victim, std::span<const Target>(&t, 1), 3, true);
    const BeatFrame corr = superimpose(clean, synthesize_interference(p.victim, p.interferer));
    const auto cells = object_noise_cells(range_doppler_map(clean), CfarParams{2, 2, 8, 8, 1e-6});
    const auto mask = detect_interfered_samples(corr);
    const double s_corr = sinr_db(range_doppler_map(corr), cells.first, cells.second);
    const double s_zero = sinr_db(range_doppler_map(zeroing(corr, mask)), cells.first, cells.second);
    EXPECT_GT(s_zero, s_corr + 10.0);
}
