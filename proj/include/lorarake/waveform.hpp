#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <mutex>
#include <numbers>
#include <vector>

#include "lorarake/fft.hpp"
#include "lorarake/types.hpp"

namespace lorarake {

/// Sample k of the chirp for symbol a, extended to any integer k.
///
/// The phase 2*pi*k*(a/M - 1/2 + k/(2M)) equals pi*k*(2a - M + k)/M, so it is
/// reduced exactly in integers modulo 2M before the trig call.
inline cplx chirp_sample(std::size_t m, Symbol a, std::int64_t k) {
    const auto mm = static_cast<std::int64_t>(m);
    const std::int64_t two_m = 2 * mm;
    // k*(2a - M + k) mod 2M, computed without overflow for |k| < 2^24.
    std::int64_t kr = k % two_m;
    std::int64_t q = (2 * static_cast<std::int64_t>(a) - mm + k) % two_m;
    std::int64_t num = (kr * q) % two_m;
    if (num < 0) num += two_m;
    const double ang = std::numbers::pi * static_cast<double>(num) / static_cast<double>(mm);
    return {std::cos(ang), std::sin(ang)};
}

namespace detail {

/// Base up-chirp x_0[k], built once per M and shared read-only.
inline const std::vector<cplx>& base_upchirp(std::size_t m) {
    constexpr std::size_t kMaxLog2 = 24;
    static std::array<std::once_flag, kMaxLog2 + 1> once;
    static std::array<std::unique_ptr<std::vector<cplx>>, kMaxLog2 + 1> tables;
    std::size_t lg = 0;
    while ((std::size_t{1} << lg) < m) ++lg;
    std::call_once(once[lg], [&] {
        auto v = std::make_unique<std::vector<cplx>>(m);
        for (std::size_t k = 0; k < m; ++k) (*v)[k] = chirp_sample(m, 0, static_cast<std::int64_t>(k));
        tables[lg] = std::move(v);
    });
    return *tables[lg];
}

template <class T>
std::size_t argmax_lowest(const std::vector<T>& v) {
    return static_cast<std::size_t>(std::distance(v.begin(), std::max_element(v.begin(), v.end())));
}

}  // namespace detail

/// x_a[k] for k = 0..M-1. Unit modulus everywhere.
inline SampleBuffer gen_chirp(const LoRaParams& p, Symbol a) {
    p.check_symbol(a);
    SampleBuffer out(p.m());
    for (std::size_t k = 0; k < p.m(); ++k) out[k] = chirp_sample(p.m(), a, static_cast<std::int64_t>(k));
    return out;
}

/// Discrete-time instantaneous frequency f_a[k] = (a+k)/M - 1/2 + 1/(2M),
/// normalized to the chip rate. With wrap, values are folded into [-1/2, 1/2).
inline std::vector<double> instantaneous_frequency(const LoRaParams& p, Symbol a, bool wrap = false) {
    p.check_symbol(a);
    const double m = static_cast<double>(p.m());
    std::vector<double> f(p.m());
    for (std::size_t k = 0; k < p.m(); ++k) {
        double v = static_cast<double>(a + k) / m - 0.5 + 0.5 / m;
        if (wrap) {
            v -= std::floor(v + 0.5);
            if (v >= 0.5) v -= 1.0;
        }
        f[k] = v;
    }
    return f;
}

/// Multiply by the conjugate base up-chirp.
inline SampleBuffer dechirp(const LoRaParams& p, const SampleBuffer& r) {
    if (r.size() != p.m()) throw std::invalid_argument("dechirp: buffer length != M");
    const auto& x0 = detail::base_upchirp(p.m());
    SampleBuffer out(p.m());
    for (std::size_t k = 0; k < p.m(); ++k) out[k] = r[k] * std::conj(x0[k]);
    return out;
}

/// Unnormalized forward DFT.
inline SpectrumBuffer dft(const SampleBuffer& buf) {
    SpectrumBuffer out(buf.span());
    fft_plan(buf.size()).forward(out.span());
    return out;
}

/// Exact inverse of dft().
inline SampleBuffer idft(const SpectrumBuffer& spec) {
    SampleBuffer out(spec.span());
    fft_plan(spec.size()).inverse(out.span());
    return out;
}

/// Dechirp followed by DFT: the legacy demodulator front end.
inline SpectrumBuffer demodulate(const LoRaParams& p, const SampleBuffer& r) { return dft(dechirp(p, r)); }

enum class LegacyMode { coherent, noncoherent };

/// Legacy detector: argmax of |bins| (non-coherent) or Re{bins} (coherent).
/// Ties go to the lowest index.
inline Symbol detect_legacy(const SpectrumBuffer& spec, LegacyMode mode) {
    std::vector<double> score(spec.size());
    for (std::size_t n = 0; n < spec.size(); ++n)
        score[n] = mode == LegacyMode::coherent ? spec[n].real() : std::abs(spec[n]);
    return detail::argmax_lowest(score);
}

inline double ebn0_from_snr_db(const LoRaParams& p, double snr_db) {
    return snr_db + 10.0 * std::log10(static_cast<double>(p.m()) / p.sf());
}

inline double snr_from_ebn0_db(const LoRaParams& p, double ebn0_db) {
    return ebn0_db - 10.0 * std::log10(static_cast<double>(p.m()) / p.sf());
}

/// Per-sample complex noise variance for unit-power samples.
inline double noise_variance_from_snr(double snr_db) { return std::pow(10.0, -snr_db / 10.0); }

}  // namespace lorarake
