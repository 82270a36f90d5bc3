#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "lorarake/complexity.hpp"
#include "lorarake/fast_sim.hpp"
#include "oracles.hpp"

using namespace lorarake;

TEST(OpCount, TableValuesAtSf7) {
    const LoRaParams p(7);
    EXPECT_EQ(op_count(DetectorKind::mf, p, 3), (OpCount{82304, 49024}));
    EXPECT_EQ(op_count(DetectorKind::rake, p, 3), (OpCount{1216, 1152}));
}

TEST(OpCount, CandidateFormulas) {
    const LoRaParams p(7);
    // Nc(2M + KM + K), Nc(MK - 1) and (M/2)log2M + 2K Nc, M log2M + (K-1)Nc
    EXPECT_EQ(op_count(DetectorKind::cand_mf, p, 3, 5), (OpCount{5 * 643, 5 * 383}));
    EXPECT_EQ(op_count(DetectorKind::cand_rake, p, 3, 5), (OpCount{448 + 30, 896 + 10}));
    EXPECT_EQ(op_count(DetectorKind::cand_mf, p, 3, 128), op_count(DetectorKind::mf, p, 3));
    EXPECT_EQ(op_count(DetectorKind::cand_rake, p, 3, 128), op_count(DetectorKind::rake, p, 3));
    EXPECT_THROW(op_count(DetectorKind::rake, p, 0), std::invalid_argument);
}

TEST(OpCount, RatioAtSf12ExceedsThousand) {
    const LoRaParams p(12);
    const double r = complexity_ratio(op_count(DetectorKind::mf, p, 3), op_count(DetectorKind::rake, p, 3));
    EXPECT_NEAR(r, 134225920.0 / 106496.0, 1e-9);
    EXPECT_GT(r, 1e3);
    EXPECT_DOUBLE_EQ(complexity_ratio({3, 4}, {4, 3}), 1.0);
    EXPECT_THROW(complexity_ratio({1, 1}, {0, 0}), std::invalid_argument);
}

TEST(OpCount, RatioGrowsWithSpreadingFactor) {
    double prev = 0.0;
    for (int sf = 7; sf <= 12; ++sf) {
        const LoRaParams p(sf);
        const double r =
            std::log10(complexity_ratio(op_count(DetectorKind::mf, p, 3), op_count(DetectorKind::rake, p, 3)));
        EXPECT_GT(r, prev);
        prev = r;
    }
}

TEST(OpCount, CandidateRatioNearlyFlatAcrossSf) {
    for (std::uint64_t n_c : {5u, 10u, 20u}) {
        double lo = 1e300, hi = 0.0;
        for (int sf = 7; sf <= 12; ++sf) {
            const LoRaParams p(sf);
            const double r = complexity_ratio(op_count(DetectorKind::cand_mf, p, 3, n_c),
                                              op_count(DetectorKind::cand_rake, p, 3, n_c));
            lo = std::min(lo, r);
            hi = std::max(hi, r);
        }
        EXPECT_LT(hi / lo, 2.0) << n_c;
    }
}

TEST(FastSim, DiagonalIsChannelEnergy) {
    const LoRaParams p(7);
    const FastSimModel model(p, dechirped_gain(p, MultipathChannel::c1()));
    for (Symbol a = 0; a < p.m(); ++a) {
        EXPECT_NEAR(model.z(a, a).real(), 128 * 1.89, 1e-9);
        EXPECT_NEAR(model.z(a, a).imag(), 0.0, 1e-9);
    }
}

TEST(FastSim, RowMatchesIsiFreeStatistics) {
    const LoRaParams p(7);
    const auto ch = MultipathChannel::c1();
    const auto g = dechirped_gain(p, ch);
    const FastSimModel model(p, g);
    for (Symbol a : {0u, 1u, 2u, 64u, 126u, 127u}) {
        const std::vector<Symbol> data{a, a};
        const auto rx = apply_channel(build_frame(p, 0, data), ch, p);
        const auto spec = demodulate(p, symbol_window(rx, 1, p));
        for (Symbol b = 0; b < p.m(); ++b)
            EXPECT_LT(std::abs(model.z(a, b) - rake_statistic(spec, g, b, p)), 1e-9) << a << ' ' << b;
    }
}

TEST(FastSim, PeakPatternAroundDiagonal) {
    const LoRaParams p(7);
    const auto g = dechirped_gain(p, MultipathChannel::c1());
    const FastSimModel model(p, g);
    const Symbol a = 1;  // lags wrap across index 0
    for (Symbol b = 0; b < p.m(); ++b) {
        const auto l = static_cast<std::int64_t>(a) - static_cast<std::int64_t>(b);
        const std::int64_t wrapped = l < -64 ? l + 128 : l;
        if (std::abs(wrapped) <= 3)
            EXPECT_GT(std::abs(model.z(a, b)), 1.0) << b;
        else
            EXPECT_EQ(model.z(a, b), cplx{}) << b;
    }
}

TEST(FastSim, RejectsLongChannel) {
    const LoRaParams p(4);
    EXPECT_THROW(FastSimModel(p, DechirpedGains({{0, 1.0}, {8, 0.5}})), std::invalid_argument);
}

TEST(FastSim, SingleCandidateVariance) {
    const LoRaParams p(7);
    const FastSimModel model(p, dechirped_gain(p, MultipathChannel::c2()));
    const auto c = model.covariance({17}, 2.0);
    ASSERT_EQ(c.size(), 1u);
    EXPECT_NEAR(c[0].real(), 2.0 * 1.64, 1e-12);
    EXPECT_NEAR(c[0].imag(), 0.0, 1e-12);
}

TEST(FastSim, CovarianceVanishesBeyondSupport) {
    const LoRaParams p(7);
    const FastSimModel model(p, dechirped_gain(p, MultipathChannel::c1()));
    const auto c = model.covariance({10, 14, 13, 100}, 1.0);
    EXPECT_EQ(c[0 * 4 + 1], cplx{});
    EXPECT_EQ(c[0 * 4 + 3], cplx{});
    EXPECT_GT(std::abs(c[1 * 4 + 2]), 0.1);
    EXPECT_GT(std::abs(c[0 * 4 + 2]), 0.1);
}

TEST(FastSim, CovarianceIsHermitianPsd) {
    const LoRaParams p(7);
    Rng rng(4);
    for (int t = 0; t < 20; ++t) {
        std::vector<Path> taps{{0, rng.complex_normal()}};
        for (std::size_t d = 1; d <= 9; ++d)
            if (rng.uniform01() < 0.4) taps.push_back({d, rng.complex_normal()});
        const FastSimModel model(p, DechirpedGains(taps));
        std::vector<Symbol> cands;
        for (Symbol b = 0; b < 20; ++b) cands.push_back((b * 3) % p.m());
        EXPECT_TRUE(cholesky_psd(model.covariance(cands, 1.0), cands.size()).has_value());
    }
}

TEST(FastSim, SampledNoiseHasTargetCovariance) {
    const LoRaParams p(7);
    const FastSimModel model(p, dechirped_gain(p, MultipathChannel::c1()));
    CandidateSet cand;
    cand.indices = {20, 21, 22, 23, 25, 60};
    cand.mode = SelectionMode::fixed;
    const double sigma_w2 = 128 * 0.3;
    const auto target = model.covariance(cand.indices, sigma_w2);
    const std::size_t n = cand.size();
    std::vector<cplx> acc(n * n);
    Rng rng(77);
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) {
        const auto w = sample_correlated_noise(model, cand, sigma_w2, rng);
        for (std::size_t u = 0; u < n; ++u)
            for (std::size_t v = 0; v < n; ++v) acc[u * n + v] += w[u] * std::conj(w[v]);
    }
    double scale = 0.0;
    for (std::size_t u = 0; u < n; ++u) scale = std::max(scale, target[u * n + u].real());
    for (std::size_t i = 0; i < n * n; ++i)
        EXPECT_LT(std::abs(acc[i] / static_cast<double>(draws) - target[i]), 0.02 * scale) << i;
}

TEST(FastSim, NoiseFreeDetectionIsCorrect) {
    const LoRaParams p(7);
    const FastSimModel model(p, dechirped_gain(p, MultipathChannel::c1()));
    const std::vector<cplx> zero(p.m());
    for (Symbol a = 0; a < p.m(); ++a) EXPECT_EQ(fast_sim_detect(model, a, zero), a);
}

TEST(Cholesky, FactorsAndRejects) {
    // [[4, 2i], [-2i, 2]] = L L^H with L = [[2, 0], [-i, 1]]
    const std::vector<cplx> a{4.0, cplx(0, 2), cplx(0, -2), 2.0};
    const auto l = cholesky_psd(a, 2);
    ASSERT_TRUE(l);
    EXPECT_LT(std::abs((*l)[0] - 2.0), 1e-12);
    EXPECT_LT(std::abs((*l)[2] - cplx(0, -1)), 1e-12);
    EXPECT_LT(std::abs((*l)[3] - 1.0), 1e-12);
    EXPECT_FALSE(cholesky_psd({1.0, 2.0, 0.0, 1.0}, 2));      // not Hermitian
    EXPECT_FALSE(cholesky_psd({1.0, 2.0, 2.0, 1.0}, 2));      // indefinite
    EXPECT_TRUE(cholesky_psd({1.0, 1.0, 1.0, 1.0}, 2));       // rank one
}
