#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "lorarake/channel.hpp"
#include "lorarake/detectors.hpp"
#include "lorarake/estimator.hpp"
#include "oracles.hpp"

using namespace lorarake;

namespace {

/// Dechirped window of symbol a when the previous symbol is also a, so the
/// delayed paths carry no inter-symbol interference.
SampleBuffer clean_dechirped(const LoRaParams& p, const MultipathChannel& ch, Symbol a) {
    const std::vector<Symbol> data{a, a};
    const auto f = build_frame(p, 0, data);
    const auto rx = apply_channel(f, ch, p);
    return dechirp(p, symbol_window(rx, 1, p));
}

MultipathChannel random_channel(Rng& rng, std::size_t max_taps, std::size_t max_delay) {
    const std::size_t n = 1 + rng.uniform_index(max_taps);
    std::vector<std::size_t> delays{0};
    while (delays.size() < n) {
        const std::size_t d = 1 + rng.uniform_index(max_delay);
        if (std::find(delays.begin(), delays.end(), d) == delays.end()) delays.push_back(d);
    }
    std::sort(delays.begin(), delays.end());
    std::vector<Path> taps;
    for (auto d : delays) taps.push_back({d, rng.complex_normal()});
    return MultipathChannel(taps);
}

std::int64_t wrapped_lag(Symbol a, Symbol b, std::size_t m) {
    const auto mm = static_cast<std::int64_t>(m);
    std::int64_t l = (static_cast<std::int64_t>(a) - static_cast<std::int64_t>(b)) % mm;
    if (l < -mm / 2) l += mm;
    if (l >= mm / 2) l -= mm;
    return l;
}

}  // namespace

TEST(IdealMf, PeakIsChannelEnergy) {
    const LoRaParams p(7);
    const auto ch = MultipathChannel::c1();
    const auto g = dechirped_gain(p, ch);
    for (Symbol a : {0u, 17u, 64u, 127u}) {
        const auto z = ideal_mf_spectrum(clean_dechirped(p, ch, a), g, a, p);
        EXPECT_NEAR(z[a].real(), 128 * 1.89, 1e-9);
        EXPECT_NEAR(z[a].imag(), 0.0, 1e-9);
        EXPECT_EQ(ideal_mf_detect(clean_dechirped(p, ch, a), g, a, p), a);
    }
}

TEST(IdealMf, ParasiticPeaksAtTapDifferences) {
    const LoRaParams p(7);
    const auto ch = MultipathChannel::c1();
    const auto g = dechirped_gain(p, ch);
    const Symbol a = 50;
    const auto z = ideal_mf_spectrum(clean_dechirped(p, ch, a), g, a, p);
    const auto lags = parasitic_lags(g);
    for (std::size_t n = 0; n < p.m(); ++n) {
        const auto l = static_cast<std::int64_t>(a) - static_cast<std::int64_t>(n);
        const bool expect_peak = n == a || std::find(lags.begin(), lags.end(), l) != lags.end();
        if (expect_peak)
            EXPECT_GT(std::abs(z[n]), 1.0) << n;
        else
            EXPECT_LT(std::abs(z[n]), 1e-9) << n;
    }
}

TEST(IdealMf, IdentityChannelIsLegacyCoherent) {
    const LoRaParams p(7);
    const auto g = dechirped_gain(p, MultipathChannel::identity());
    Rng rng(5);
    for (int i = 0; i < 200; ++i) {
        const Symbol a = rng.uniform_index(p.m());
        SampleBuffer r = gen_chirp(p, a);
        add_awgn(r.span(), 20.0, rng);
        const auto d = dechirp(p, r);
        EXPECT_EQ(ideal_mf_detect(d, g, a, p), detect_legacy(dft(d), LegacyMode::coherent));
    }
}

TEST(IdealMf, RakeFormGivesSameScores) {
    const LoRaParams p(7);
    Rng rng(8);
    const auto g = dechirped_gain(p, MultipathChannel::c1());
    SampleBuffer r = gen_chirp(p, 9);
    add_awgn(r.span(), 3.0, rng);
    const auto d = dechirp(p, r);
    const auto spec = dft(d);
    const auto z = ideal_mf_spectrum(d, g, 9, p);
    for (Symbol n = 0; n < p.m(); ++n) EXPECT_LT(std::abs(z[n] - ideal_mf_rake_statistic(spec, g, 9, n, p)), 1e-9);
}

TEST(Correlation, C1SupportIsMinusThreeToThree) {
    const LoRaParams p(7);
    const auto g = dechirped_gain(p, MultipathChannel::c1());
    for (Symbol a : {0u, 3u, 64u, 127u}) {
        const auto t = auto_cross_correlation(g, a, a, p);
        for (std::int64_t l = -6; l <= 6; ++l) {
            if (std::abs(l) <= 3)
                EXPECT_GT(std::abs(t.at(l)), 0.1);
            else
                EXPECT_EQ(t.at(l), cplx{});
        }
        EXPECT_NEAR(t.at(0).real(), 1.89, 1e-12);
        EXPECT_NEAR(t.at(0).imag(), 0.0, 1e-12);
    }
}

TEST(Correlation, MatchesPaddedConvolution) {
    Rng rng(21);
    for (int trial = 0; trial < 200; ++trial) {
        const LoRaParams p(trial % 2 ? 7 : 9);
        const auto g = dechirped_gain(p, random_channel(rng, 5, 12));
        const Symbol a = rng.uniform_index(p.m()), b = rng.uniform_index(p.m());
        const auto t = auto_cross_correlation(g, a, b, p);
        const auto lm = static_cast<std::int64_t>(g.max_delay());
        for (std::int64_t l = -lm - 2; l <= lm + 2; ++l)
            EXPECT_LT(std::abs(t.at(l) - oracle::gamma_direct(g, a, b, l, p.m())), 1e-12);
    }
}

TEST(Statistics, SingleTapRakeIsSpectrumBin) {
    const LoRaParams p(7);
    Rng rng(2);
    SampleBuffer r(p.m());
    add_awgn(r.span(), 1.0, rng);
    const auto spec = demodulate(p, r);
    const DechirpedGains g({{0, 1.0}});
    for (Symbol b : {0u, 5u, 127u}) {
        EXPECT_LT(std::abs(rake_statistic(spec, g, b, p) - spec[b]), 1e-12);
        EXPECT_LT(std::abs(mf_statistic(dechirp(p, r), g, b, p) - spec[b]), 1e-9);
    }
}

TEST(Statistics, TrueSymbolGivesChannelEnergy) {
    const LoRaParams p(7);
    for (const auto& ch : {MultipathChannel::c1(), MultipathChannel::c2()}) {
        const auto g = dechirped_gain(p, ch);
        for (Symbol a : {0u, 40u, 127u}) {
            const auto d = clean_dechirped(p, ch, a);
            const cplx zr = rake_statistic(dft(d), g, a, p);
            const cplx zm = mf_statistic(d, g, a, p);
            EXPECT_NEAR(zr.real(), 128 * ch.energy(), 1e-9);
            EXPECT_NEAR(zr.imag(), 0.0, 1e-9);
            EXPECT_LT(std::abs(zm - zr), 1e-9);
        }
    }
}

TEST(Statistics, OffHypothesisFollowsCorrelationUnderIsi) {
    const LoRaParams p(7);
    const auto ch = MultipathChannel::c1();
    const auto g = dechirped_gain(p, ch);
    double abs_sum = 0.0;
    for (const auto& t : ch.taps()) abs_sum += std::abs(t.gain);
    const double bound = 2.0 * static_cast<double>(ch.max_delay()) * abs_sum;
    Rng rng(4);
    for (int trial = 0; trial < 20; ++trial) {
        const std::vector<Symbol> data{rng.uniform_index(p.m()), rng.uniform_index(p.m())};
        const auto f = build_frame(p, 0, data);
        const auto rx = apply_channel(f, ch, p);
        const auto spec = demodulate(p, symbol_window(rx, 1, p));
        const Symbol a = data[1];
        for (Symbol b = 0; b < p.m(); ++b) {
            const auto l = wrapped_lag(a, b, p.m());
            const cplx model = 128.0 * auto_cross_correlation(g, a, b, p).at(l);
            EXPECT_LE(std::abs(rake_statistic(spec, g, b, p) - model), bound) << a << ' ' << b;
        }
    }
}

TEST(Statistics, MfEqualsRakeOnRandomInputs) {
    Rng rng(1234);
    for (int trial = 0; trial < 300; ++trial) {
        const LoRaParams p(trial % 2 ? 7 : 8);
        const auto ch = random_channel(rng, 4, 9);
        const auto g = dechirped_gain(p, ch);
        const std::vector<Symbol> data{rng.uniform_index(p.m()), rng.uniform_index(p.m())};
        auto rx = apply_channel(build_frame(p, 0, data), ch, p);
        add_awgn(rx, 0.5, rng);
        const auto d = dechirp(p, symbol_window(rx, 1, p));
        const auto spec = dft(d);
        const Symbol b = rng.uniform_index(p.m());
        const double tol = 1e-9 * static_cast<double>(p.m()) * ch.energy();
        EXPECT_LE(std::abs(mf_statistic(d, g, b, p) - rake_statistic(spec, g, b, p)), tol);
    }
}

TEST(Detect, FullRakeAndFullMfMakeIdenticalDecisions) {
    const LoRaParams p(7);
    const auto ch = MultipathChannel::c1();
    const auto g = dechirped_gain(p, ch);
    Rng rng(99);
    const std::size_t n = 10000;
    std::vector<Symbol> data(n);
    for (auto& a : data) a = rng.uniform_index(p.m());
    auto rx = apply_channel(build_frame(p, 0, data), ch, p);
    add_awgn(rx, noise_variance_from_snr(snr_from_ebn0_db(p, -2.0)), rng);
    const auto full = CandidateSet::full(p.m());
    std::size_t disagreements = 0, errors = 0;
    for (std::size_t s = 0; s < n; ++s) {
        const auto d = dechirp(p, symbol_window(rx, s, p));
        const auto r = detect_rake(dft(d), g, full, p).winner;
        const auto m = detect_mf(d, g, full, p).winner;
        disagreements += r != m;
        errors += r != data[s];
    }
    EXPECT_EQ(disagreements, 0u);
    EXPECT_GT(errors, 0u);  // the comparison ran in a regime with decision errors
}

TEST(Detect, IdentityRakeIsLegacyCoherent) {
    const LoRaParams p(7);
    const auto g = dechirped_gain(p, MultipathChannel::identity());
    Rng rng(6);
    for (int i = 0; i < 500; ++i) {
        SampleBuffer r = gen_chirp(p, rng.uniform_index(p.m()));
        add_awgn(r.span(), 10.0, rng);
        const auto spec = demodulate(p, r);
        EXPECT_EQ(detect_rake(spec, g, CandidateSet::full(p.m()), p).winner,
                  detect_legacy(spec, LegacyMode::coherent));
    }
}

TEST(Detect, NoiseFreeC1EveryDetectorIsCorrect) {
    const LoRaParams p(7);
    const auto ch = MultipathChannel::c1();
    const auto g = dechirped_gain(p, ch);
    std::vector<Symbol> data(p.m());
    for (Symbol a = 0; a < p.m(); ++a) data[a] = (a * 37 + 11) % p.m();
    const auto f = build_frame(p, 4, data);
    const auto rx = apply_channel(f, ch, p);
    std::vector<SpectrumBuffer> pilots;
    for (std::size_t q = 1; q < 4; ++q) pilots.push_back(demodulate(p, symbol_window(rx, q, p)));
    const TdelReference tdel(average_pilot_dft(pilots), 0.2);
    for (std::size_t s = 4; s < f.n_f(); ++s) {
        const Symbol a = f.symbols[s];
        const auto d = dechirp(p, symbol_window(rx, s, p));
        const auto spec = dft(d);
        const auto full = CandidateSet::full(p.m());
        EXPECT_EQ(detect_rake(spec, g, full, p).winner, a);
        EXPECT_EQ(detect_mf(d, g, full, p).winner, a);
        EXPECT_EQ(ideal_mf_detect(d, g, a, p), a);
        EXPECT_EQ(detect_rake(spec, g, select_candidates_threshold(spec, 0.3), p).winner, a);
        EXPECT_EQ(detect_legacy(spec, LegacyMode::coherent), a);
        EXPECT_EQ(detect_legacy(spec, LegacyMode::noncoherent), a);
        EXPECT_EQ(tdel.detect(spec), a);
    }
}

TEST(Candidates, FixedTopThreeOnC1) {
    const LoRaParams p(7);
    const auto spec = dft(clean_dechirped(p, MultipathChannel::c1(), 64));
    const auto c = select_candidates_fixed(spec, 3);
    EXPECT_EQ(c.indices, (std::vector<Symbol>{64, 62, 61}));
    EXPECT_EQ(c.mode, SelectionMode::fixed);
    EXPECT_FALSE(c.degenerate);
}

TEST(Candidates, FixedFullAndSingle) {
    const LoRaParams p(7);
    Rng rng(3);
    SampleBuffer r(p.m());
    add_awgn(r.span(), 1.0, rng);
    const auto spec = demodulate(p, r);
    const auto all = select_candidates_fixed(spec, p.m());
    EXPECT_EQ(all.size(), p.m());
    EXPECT_EQ(all.mode, SelectionMode::full);
    auto sorted = all.indices;
    std::sort(sorted.begin(), sorted.end());
    EXPECT_EQ(sorted, CandidateSet::full(p.m()).indices);
    const auto one = select_candidates_fixed(spec, 1);
    ASSERT_EQ(one.size(), 1u);
    EXPECT_EQ(one.indices[0], detect_legacy(spec, LegacyMode::noncoherent));
}

TEST(Candidates, ThresholdCountsOnC1) {
    const LoRaParams p(7);
    const auto spec = dft(clean_dechirped(p, MultipathChannel::c1(), 64));
    EXPECT_EQ(select_candidates_threshold(spec, 0.3).size(), 3u);
    EXPECT_EQ(select_candidates_threshold(spec, 0.6).indices, (std::vector<Symbol>{62, 64}));
}

TEST(Candidates, ZeroThresholdKeepsNonzeroBins) {
    SpectrumBuffer s(std::vector<cplx>{0.0, 1.0, 0.0, cplx(0, 1e-3), 0.0, -2.0, 0.0, 0.0});
    EXPECT_EQ(select_candidates_threshold(s, 0.0).indices, (std::vector<Symbol>{1, 3, 5}));
    EXPECT_THROW(select_candidates_threshold(s, 1.0), std::invalid_argument);
}

TEST(Candidates, ArgmaxIsAlwaysCovered) {
    const LoRaParams p(7);
    Rng rng(10);
    for (int i = 0; i < 200; ++i) {
        SampleBuffer r(p.m());
        add_awgn(r.span(), 1.0, rng);
        const auto spec = demodulate(p, r);
        const Symbol top = detect_legacy(spec, LegacyMode::noncoherent);
        for (const auto& c : {select_candidates_threshold(spec, 0.5), select_candidates_fixed(spec, 4)})
            EXPECT_NE(std::find(c.indices.begin(), c.indices.end(), top), c.indices.end());
    }
}

TEST(Candidates, AllZeroSpectrumIsDegenerate) {
    const LoRaParams p(7);
    const SpectrumBuffer zero(p.m());
    const auto g = dechirped_gain(p, MultipathChannel::c1());
    for (const auto& c : {select_candidates_threshold(zero, 0.3), select_candidates_fixed(zero, 3)}) {
        EXPECT_TRUE(c.degenerate);
        const auto d = detect_rake(zero, g, c, p);
        EXPECT_EQ(d.winner, 0u);
        EXPECT_TRUE(d.degenerate);
    }
    EXPECT_EQ(select_candidates_threshold(zero, 0.3).indices, std::vector<Symbol>{0});
    EXPECT_EQ(detect_mf(SampleBuffer(p.m()), g, CandidateSet::full(p.m()), p).winner, 0u);
}

TEST(Candidates, FullSetCandRakeMatchesRake) {
    const LoRaParams p(7);
    const auto ch = MultipathChannel::c2();
    const auto g = dechirped_gain(p, ch);
    Rng rng(12);
    for (int i = 0; i < 300; ++i) {
        SampleBuffer r = gen_chirp(p, rng.uniform_index(p.m()));
        add_awgn(r.span(), 8.0, rng);
        const auto spec = demodulate(p, r);
        EXPECT_EQ(detect_rake(spec, g, select_candidates_fixed(spec, p.m()), p).winner,
                  detect_rake(spec, g, CandidateSet::full(p.m()), p).winner);
    }
}

TEST(Delta, NoncoherentIsConstantOnC1) {
    const LoRaParams p(7);
    const auto g = dechirped_gain(p, MultipathChannel::c1());
    for (Symbol a = 0; a < p.m(); ++a) EXPECT_NEAR(delta_indicator(g, a, DeltaVariant::noncoh, p), 0.8, 1e-12);
}

TEST(Delta, CoherentOverIdealMfMaximaIsChannelEnergy) {
    const LoRaParams p(7);
    const auto g = dechirped_gain(p, MultipathChannel::c1());
    double mc = -1, mi = -1;
    for (Symbol a = 0; a < p.m(); ++a) {
        mc = std::max(mc, delta_indicator(g, a, DeltaVariant::coh, p));
        mi = std::max(mi, delta_indicator(g, a, DeltaVariant::ideal_mf, p));
    }
    EXPECT_NEAR(mc / mi, 1.89, 1e-9);
}

TEST(Delta, IdentityChannelHasNoParasiticPeak) {
    const LoRaParams p(7);
    const auto g = dechirped_gain(p, MultipathChannel::identity());
    for (auto v : {DeltaVariant::coh, DeltaVariant::noncoh, DeltaVariant::ideal_mf, DeltaVariant::mf})
        EXPECT_EQ(delta_indicator(g, 10, v, p), 0.0);
}

TEST(Delta, MfPeaksAreShiftedIdealMfPeaks) {
    const LoRaParams p(7);
    const auto g = dechirped_gain(p, MultipathChannel::c1());
    const auto m = static_cast<std::int64_t>(p.m());
    for (auto l : parasitic_lags(g)) {
        std::vector<double> ideal, mf;
        for (Symbol a = 0; a < p.m(); ++a) {
            ideal.push_back(auto_cross_correlation(g, a, a, p).at(l).real());
            const auto b = static_cast<Symbol>(((static_cast<std::int64_t>(a) - l) % m + m) % m);
            mf.push_back(auto_cross_correlation(g, a, b, p).at(l).real());
        }
        std::sort(ideal.begin(), ideal.end());
        std::sort(mf.begin(), mf.end());
        for (std::size_t i = 0; i < ideal.size(); ++i) EXPECT_NEAR(ideal[i], mf[i], 1e-12) << l;
    }
    double mi = -1, mm = -1;
    for (Symbol a = 0; a < p.m(); ++a) {
        mi = std::max(mi, delta_indicator(g, a, DeltaVariant::ideal_mf, p));
        mm = std::max(mm, delta_indicator(g, a, DeltaVariant::mf, p));
    }
    EXPECT_NEAR(mi, mm, 1e-12);
}

TEST(Tdel, CorrelationMatchesDirectSum) {
    const LoRaParams p(7);
    Rng rng(17);
    SpectrumBuffer pilot(p.m()), data(p.m());
    for (auto& v : pilot) v = rng.complex_normal();
    for (auto& v : data) v = rng.complex_normal();
    const TdelReference ref(pilot, 0.2);
    const auto fast = ref.correlation(data);
    const auto direct = oracle::tdel_direct(ref.reference_magnitude(), data.vec());
    for (std::size_t d = 0; d < p.m(); ++d) EXPECT_NEAR(fast[d], direct[d], 1e-9);
    for (std::size_t n = 0; n < p.m(); ++n) {
        const double v = std::abs(pilot[n]);
        const double lambda = 0.2 * std::abs(pilot[detect_legacy(pilot, LegacyMode::noncoherent)]);
        EXPECT_EQ(ref.reference_magnitude()[n], v < lambda ? 0.0 : v);
    }
}

TEST(Tdel, NoiseFreeIdentityAndC2) {
    const LoRaParams p(7);
    for (const auto& ch : {MultipathChannel::identity(), MultipathChannel::c2()}) {
        const auto pilot = dft(clean_dechirped(p, ch, 0));
        for (Symbol a : {0u, 1u, 63u, 127u})
            EXPECT_EQ(tdel_detect(pilot, dft(clean_dechirped(p, ch, a)), 0.2), a);
    }
}

TEST(Tdel, GlobalPhaseDoesNotChangeDecision) {
    const LoRaParams p(7);
    Rng rng(31);
    const auto ch = MultipathChannel::c2();
    const TdelReference ref(dft(clean_dechirped(p, ch, 0)), 0.2);
    for (int i = 0; i < 100; ++i) {
        SampleBuffer r = gen_chirp(p, rng.uniform_index(p.m()));
        add_awgn(r.span(), 30.0, rng);
        auto spec = demodulate(p, r);
        const Symbol d0 = ref.detect(spec);
        const cplx rot = oracle::expj(rng.uniform01() * 2 * std::numbers::pi);
        for (auto& v : spec) v *= rot;
        EXPECT_EQ(ref.detect(spec), d0);
    }
}

TEST(Tdel, AllZeroPilotKeepsSingleBin) {
    const LoRaParams p(7);
    const TdelReference ref(SpectrumBuffer(p.m()), 0.2);
    EXPECT_TRUE(ref.degenerate());
    const auto spec = demodulate(p, gen_chirp(p, 42));
    EXPECT_EQ(ref.detect(spec), 42u);
}
