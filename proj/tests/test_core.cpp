#include "oracles.hpp"
#include "rdlab/fft.hpp"
#include "rdlab/rng.hpp"

#include <gtest/gtest.h>

#include <numeric>
#include <set>
#include <thread>

using namespace rdlab;

TEST(Rng, SameKeySameStream) {
    Rng a({7, 1, 2}), b({7, 1, 2}), c({7, 2, 1});
    std::vector<double> xa, xb, xc;
    for (int i = 0; i < 64; ++i) {
        xa.push_back(a.uniform());
        xb.push_back(b.uniform());
        xc.push_back(c.uniform());
    }
    EXPECT_EQ(xa, xb);
    EXPECT_NE(xa, xc);
}

TEST(Rng, StreamKeysAreDistinctForNearbyTuples) {
    std::set<std::uint64_t> keys;
    for (std::uint64_t s = 0; s < 4; ++s)
        for (std::uint64_t f = 0; f < 50; ++f)
            for (std::uint64_t l = 0; l < 7; ++l) keys.insert(stream_key({1, s, f, l}));
    EXPECT_EQ(keys.size(), 4u * 50u * 7u);
}

TEST(Rng, UniformAndBelowStayInRange) {
    Rng r(3);
    for (int i = 0; i < 100000; ++i) {
        const double u = r.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        ASSERT_LT(r.below(7), 7u);
    }
    EXPECT_THROW(r.below(0), DomainError);
}

TEST(Rng, ComplexNormalHasRequestedVariance) {
    Rng r(11);
    double acc = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) acc += std::norm(r.complex_normal(3.0));
    EXPECT_NEAR(acc / n, 3.0, 0.05);
}

TEST(Rng, ShuffleIsAPermutationAndDeterministic) {
    std::vector<int> v(100), w;
    std::iota(v.begin(), v.end(), 0);
    w = v;
    Rng a(5), b(5);
    deterministic_shuffle(v, a);
    deterministic_shuffle(w, b);
    EXPECT_EQ(v, w);
    std::vector<int> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < 100; ++i) EXPECT_EQ(sorted[i], i);
}

TEST(Fft, MatchesNaiveDftOnRandomInputs) {
    Rng r(1);
    for (std::size_t n : {1u, 2u, 7u, 64u, 100u, 128u}) {
        std::vector<cplx> x(n);
        for (auto& v : x) v = r.complex_normal(1.0);
        auto y = x;
        dft_inplace(y);
        const auto ref = oracle::naive_dft(x);
        for (std::size_t k = 0; k < n; ++k) EXPECT_NEAR(std::abs(y[k] - ref[k]), 0.0, 1e-9 * (1.0 + std::abs(ref[k])));
    }
}

TEST(Fft, InverseRoundTripAndParseval) {
    Rng r(2);
    std::vector<cplx> x(64);
    for (auto& v : x) v = r.complex_normal(2.0);
    auto y = x;
    dft_inplace(y);
    double ex = 0.0, ey = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        ex += std::norm(x[i]);
        ey += std::norm(y[i]);
    }
    EXPECT_NEAR(ey, 64.0 * ex, 1e-9 * ey);
    idft_inplace(y);
    for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(std::abs(y[i] - x[i]), 0.0, 1e-12);
}

TEST(Fft, ConcurrentUseIsSafe) {
    std::vector<std::thread> pool;
    std::atomic<int> bad{0};
    for (int t = 0; t < 8; ++t)
        pool.emplace_back([&, t] {
            Rng r(static_cast<std::uint64_t>(t));
            for (int it = 0; it < 50; ++it) {
                std::vector<cplx> x(32 + 8 * (it % 5));
                for (auto& v : x) v = r.complex_normal(1.0);
                auto y = x;
                dft_inplace(y);
                idft_inplace(y);
                for (std::size_t i = 0; i < x.size(); ++i)
                    if (std::abs(y[i] - x[i]) > 1e-10) ++bad;
            }
        });
    for (auto& th : pool) th.join();
    EXPECT_EQ(bad.load(), 0);
}

TEST(Core, PowerConversions) {
    EXPECT_DOUBLE_EQ(dbm_to_watts(30.0), 1.0);
    EXPECT_NEAR(dbm_to_amplitude(30.0), std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(linear_power_to_db(db_to_linear_power(-17.5)), -17.5, 1e-12);
}
