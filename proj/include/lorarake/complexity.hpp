#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "lorarake/types.hpp"

namespace lorarake {

/// Complex multiplication / addition counts for one detected symbol.
struct OpCount {
    std::uint64_t cmult = 0;
    std::uint64_t cadd = 0;

    std::uint64_t total() const noexcept { return cmult + cadd; }

    OpCount& operator+=(const OpCount& o) noexcept {
        cmult += o.cmult;
        cadd += o.cadd;
        return *this;
    }
    friend bool operator==(const OpCount&, const OpCount&) = default;
};

enum class DetectorKind { mf, cand_mf, rake, cand_rake, legacy, tdel, ideal_mf };

inline std::string to_string(DetectorKind k) {
    switch (k) {
        case DetectorKind::mf: return "mf";
        case DetectorKind::cand_mf: return "cand_mf";
        case DetectorKind::rake: return "rake";
        case DetectorKind::cand_rake: return "cand_rake";
        case DetectorKind::legacy: return "legacy";
        case DetectorKind::tdel: return "tdel";
        case DetectorKind::ideal_mf: return "ideal_mf";
    }
    return "?";
}

/// Closed-form operation counts.
///
///   MF         cmult M(2M + KM + K)          cadd M(MK - 1)
///   cand-MF    cmult Nc(2M + KM + K)         cadd Nc(MK - 1)
///   RAKE       cmult (M/2)log2 M + 2KM       cadd M log2 M + (K-1)M
///   cand-RAKE  cmult (M/2)log2 M + 2K Nc     cadd M log2 M + (K-1)Nc
///
/// Legacy is the radix-2 FFT alone. TDEL is the FFT plus the direct cyclic
/// correlation (M^2 cmult, M(M-1) cadd). Ideal-MF is alpha~_a (K), C_a
/// (KM cmult, (K-1)M cadd), the product (M) and one FFT.
/// n_c is ignored by the non-candidate detectors.
inline OpCount op_count(DetectorKind kind, const LoRaParams& p, std::uint64_t k, std::uint64_t n_c = 0) {
    if (k < 1) throw std::invalid_argument("op_count: K must be >= 1");
    const std::uint64_t m = p.m();
    const std::uint64_t lg = static_cast<std::uint64_t>(p.sf());
    const OpCount fft{m / 2 * lg, m * lg};
    switch (kind) {
        case DetectorKind::mf: return {m * (2 * m + k * m + k), m * (m * k - 1)};
        case DetectorKind::cand_mf: return {n_c * (2 * m + k * m + k), n_c * (m * k - 1)};
        case DetectorKind::rake: return {fft.cmult + 2 * k * m, fft.cadd + (k - 1) * m};
        case DetectorKind::cand_rake: return {fft.cmult + 2 * k * n_c, fft.cadd + (k - 1) * n_c};
        case DetectorKind::legacy: return fft;
        case DetectorKind::tdel: return {fft.cmult + m * m, fft.cadd + m * (m - 1)};
        case DetectorKind::ideal_mf: return {k + k * m + m + fft.cmult, (k - 1) * m + fft.cadd};
    }
    return {};
}

/// (cadd + cmult) of a over (cadd + cmult) of b.
inline double complexity_ratio(const OpCount& a, const OpCount& b) {
    if (b.total() == 0) throw std::invalid_argument("complexity_ratio: zero denominator");
    return static_cast<double>(a.total()) / static_cast<double>(b.total());
}

}  // namespace lorarake
