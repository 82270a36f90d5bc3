#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <set>
#include <stdexcept>
#include <vector>

#include "lorarake/channel.hpp"
#include "lorarake/fft.hpp"
#include "lorarake/types.hpp"
#include "lorarake/waveform.hpp"

namespace lorarake {

// ---------------------------------------------------------------------------
// Candidate sets
// ---------------------------------------------------------------------------

enum class SelectionMode { full, fixed, threshold };

/// Symbol hypotheses evaluated by the MF/RAKE detectors. Never empty: when the
/// spectrum is all zeros the set degenerates to {0} and `degenerate` is set.
struct CandidateSet {
    std::vector<Symbol> indices;
    SelectionMode mode = SelectionMode::full;
    bool degenerate = false;

    std::size_t size() const noexcept { return indices.size(); }

    static CandidateSet full(std::size_t m) {
        CandidateSet c;
        c.indices.resize(m);
        std::iota(c.indices.begin(), c.indices.end(), Symbol{0});
        return c;
    }
};

/// The n_c bins of largest magnitude, by descending magnitude (lower index
/// first among equal magnitudes).
inline CandidateSet select_candidates_fixed(const SpectrumBuffer& spec, std::size_t n_c) {
    const std::size_t m = spec.size();
    n_c = std::clamp<std::size_t>(n_c, 1, m);
    std::vector<double> mag(m);
    for (std::size_t n = 0; n < m; ++n) mag[n] = std::abs(spec[n]);
    std::vector<Symbol> idx(m);
    std::iota(idx.begin(), idx.end(), Symbol{0});
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_c), idx.end(),
                      [&](Symbol x, Symbol y) { return mag[x] > mag[y] || (mag[x] == mag[y] && x < y); });
    idx.resize(n_c);
    CandidateSet c;
    c.indices = std::move(idx);
    c.mode = n_c == m ? SelectionMode::full : SelectionMode::fixed;
    c.degenerate = mag[c.indices.front()] == 0.0;
    return c;
}

/// All bins with |R[n]| strictly above rho_c * max |R|, in index order.
inline CandidateSet select_candidates_threshold(const SpectrumBuffer& spec, double rho_c) {
    if (!(rho_c >= 0.0 && rho_c < 1.0)) throw std::invalid_argument("rho_c must be in [0, 1)");
    const std::size_t m = spec.size();
    std::vector<double> mag(m);
    double peak = 0.0;
    for (std::size_t n = 0; n < m; ++n) {
        mag[n] = std::abs(spec[n]);
        peak = std::max(peak, mag[n]);
    }
    CandidateSet c;
    c.mode = SelectionMode::threshold;
    if (peak == 0.0) {
        c.indices = {0};
        c.degenerate = true;
        return c;
    }
    const double lambda = rho_c * peak;
    for (std::size_t n = 0; n < m; ++n)
        if (mag[n] > lambda) c.indices.push_back(n);
    return c;
}

// ---------------------------------------------------------------------------
// MF / RAKE statistics
// ---------------------------------------------------------------------------

/// Z_{a,b}[b] via the RAKE form: sum_i conj(alpha~_b(i)) R[(b - k_i) mod M].
inline cplx rake_statistic(const SpectrumBuffer& spec, const DechirpedGains& g, Symbol b, const LoRaParams& p) {
    const auto& plan = fft_plan(p.m());
    const std::size_t mask = p.m() - 1;
    cplx acc{};
    for (const auto& t : g.paths()) {
        const cplx w = t.gain * plan.twiddle(t.delay * b);
        acc += std::conj(w) * spec[(b - t.delay) & mask];
    }
    return acc;
}

/// Z_{a,b}[b] via the MF form: filter the dechirped buffer with conj(C_b[k])
/// and evaluate the DFT at bin b only.
inline cplx mf_statistic(const SampleBuffer& r_dechirped, const DechirpedGains& g, Symbol b, const LoRaParams& p) {
    const auto c = channel_coefficient(g, b, p);
    const auto& plan = fft_plan(p.m());
    cplx acc{};
    for (std::size_t k = 0; k < p.m(); ++k) acc += std::conj(c[k]) * r_dechirped[k] * plan.twiddle(b * k);
    return acc;
}

/// Per-candidate statistics and the decision.
struct DetectionStatistic {
    Symbol winner = 0;
    std::vector<Symbol> candidates;
    std::vector<cplx> statistics;
    bool degenerate = false;

    /// Re{Z} of candidate u.
    double score(std::size_t u) const { return statistics[u].real(); }
};

namespace detail {

/// argmax of Re over candidates; equal scores go to the lower symbol index.
inline void pick_winner(DetectionStatistic& d) {
    std::size_t best = 0;
    for (std::size_t u = 1; u < d.statistics.size(); ++u) {
        const double s = d.statistics[u].real();
        const double sb = d.statistics[best].real();
        if (s > sb || (s == sb && d.candidates[u] < d.candidates[best])) best = u;
    }
    d.winner = d.candidates[best];
}

}  // namespace detail

/// cand-RAKE (or full RAKE when `cand` is the full set). One spectrum is
/// shared by every candidate.
inline DetectionStatistic detect_rake(const SpectrumBuffer& spec, const DechirpedGains& g, const CandidateSet& cand,
                                      const LoRaParams& p) {
    if (cand.indices.empty()) throw std::invalid_argument("detect_rake: empty candidate set");
    DetectionStatistic d;
    d.candidates = cand.indices;
    d.degenerate = cand.degenerate;
    d.statistics.reserve(cand.size());
    for (Symbol b : cand.indices) d.statistics.push_back(rake_statistic(spec, g, b, p));
    detail::pick_winner(d);
    return d;
}

/// cand-MF (or full MF). Each candidate needs its own C_b and a single DFT bin.
inline DetectionStatistic detect_mf(const SampleBuffer& r_dechirped, const DechirpedGains& g,
                                    const CandidateSet& cand, const LoRaParams& p) {
    if (cand.indices.empty()) throw std::invalid_argument("detect_mf: empty candidate set");
    DetectionStatistic d;
    d.candidates = cand.indices;
    d.degenerate = cand.degenerate;
    d.statistics.reserve(cand.size());
    for (Symbol b : cand.indices) d.statistics.push_back(mf_statistic(r_dechirped, g, b, p));
    detail::pick_winner(d);
    return d;
}

/// Genie-aided MF using the true symbol's channel coefficient: full DFT of
/// conj(C_a[k]) r~[k], argmax of the real part over all bins.
inline SpectrumBuffer ideal_mf_spectrum(const SampleBuffer& r_dechirped, const DechirpedGains& g, Symbol true_a,
                                        const LoRaParams& p) {
    const auto c = channel_coefficient(g, true_a, p);
    SampleBuffer z(p.m());
    for (std::size_t k = 0; k < p.m(); ++k) z[k] = std::conj(c[k]) * r_dechirped[k];
    return dft(z);
}

inline Symbol ideal_mf_detect(const SampleBuffer& r_dechirped, const DechirpedGains& g, Symbol true_a,
                              const LoRaParams& p) {
    return detect_legacy(ideal_mf_spectrum(r_dechirped, g, true_a, p), LegacyMode::coherent);
}

/// Ideal-MF output bin n written as a RAKE: sum_i conj(alpha~_a(i)) R[n - k_i].
inline cplx ideal_mf_rake_statistic(const SpectrumBuffer& spec, const DechirpedGains& g, Symbol true_a, Symbol n,
                                    const LoRaParams& p) {
    const auto& plan = fft_plan(p.m());
    const std::size_t mask = p.m() - 1;
    cplx acc{};
    for (const auto& t : g.paths())
        acc += std::conj(t.gain * plan.twiddle(t.delay * true_a)) * spec[(n - t.delay) & mask];
    return acc;
}

// ---------------------------------------------------------------------------
// Correlation of rotated gains
// ---------------------------------------------------------------------------

/// Gamma_{a,b}[l] for l in [-l_max, l_max]; zero outside.
class CorrelationTable {
public:
    CorrelationTable(std::size_t l_max, std::vector<cplx> values) : l_max_(l_max), values_(std::move(values)) {}

    std::int64_t l_max() const noexcept { return static_cast<std::int64_t>(l_max_); }

    cplx at(std::int64_t l) const noexcept {
        if (l < -l_max() || l > l_max()) return {};
        return values_[static_cast<std::size_t>(l + l_max())];
    }

private:
    std::size_t l_max_;
    std::vector<cplx> values_;
};

/// Gamma_{a,b}[l] = sum_m aa_a[m] conj(aa_b[m - l]) where aa_x is the
/// zero-padded rotated gain vector. Only tap pairs with k_i - k_j = l
/// contribute, so the sum runs over pairs instead of padded samples.
inline CorrelationTable auto_cross_correlation(const DechirpedGains& g, Symbol a, Symbol b, const LoRaParams& p) {
    const auto ga = rotate_gains(g, a, p);
    const auto gb = rotate_gains(g, b, p);
    const std::size_t l_max = g.max_delay();
    std::vector<cplx> v(2 * l_max + 1);
    for (const auto& ti : ga.paths())
        for (const auto& tj : gb.paths()) {
            const auto l = static_cast<std::int64_t>(ti.delay) - static_cast<std::int64_t>(tj.delay);
            v[static_cast<std::size_t>(l + static_cast<std::int64_t>(l_max))] += ti.gain * std::conj(tj.gain);
        }
    return CorrelationTable(l_max, std::move(v));
}

/// Nonzero pairwise delay differences k_m - k_n, ascending.
inline std::vector<std::int64_t> parasitic_lags(const DechirpedGains& g) {
    std::set<std::int64_t> s;
    for (const auto& ti : g.paths())
        for (const auto& tj : g.paths())
            if (ti.delay != tj.delay)
                s.insert(static_cast<std::int64_t>(ti.delay) - static_cast<std::int64_t>(tj.delay));
    return {s.begin(), s.end()};
}

// ---------------------------------------------------------------------------
// Parasitic-to-main peak indicators
// ---------------------------------------------------------------------------

enum class DeltaVariant { coh, noncoh, ideal_mf, mf };

/// Ratio of the largest parasitic peak to the peak of interest for symbol a.
/// Zero for a single-path channel (no parasitic peak exists).
inline double delta_indicator(const DechirpedGains& g, Symbol a, DeltaVariant variant, const LoRaParams& p) {
    p.check_symbol(a);
    if (g.size() < 2) return 0.0;
    const cplx first = g[0].gain;
    const double first_mag = std::abs(first);
    switch (variant) {
        case DeltaVariant::coh:
        case DeltaVariant::noncoh: {
            // The coherent legacy receiver is assumed phase-compensated on the
            // first path, so Re{} is taken after removing arg(alpha(0)).
            const cplx derot = first_mag > 0 ? std::conj(first) / first_mag : cplx{1.0, 0.0};
            const auto rot = rotate_gains(g, a, p);
            double best = -std::numeric_limits<double>::infinity();
            for (std::size_t i = 1; i < rot.size(); ++i) {
                const double v = variant == DeltaVariant::coh ? (rot[i].gain * derot).real() : std::abs(rot[i].gain);
                best = std::max(best, v);
            }
            return best / first_mag;
        }
        case DeltaVariant::ideal_mf: {
            const auto gam = auto_cross_correlation(g, a, a, p);
            double best = -std::numeric_limits<double>::infinity();
            for (auto l : parasitic_lags(g)) best = std::max(best, gam.at(l).real());
            return best / gam.at(0).real();
        }
        case DeltaVariant::mf: {
            const auto m = static_cast<std::int64_t>(p.m());
            const double peak = auto_cross_correlation(g, a, a, p).at(0).real();
            double best = -std::numeric_limits<double>::infinity();
            for (auto l : parasitic_lags(g)) {
                const auto b = static_cast<Symbol>(((static_cast<std::int64_t>(a) - l) % m + m) % m);
                best = std::max(best, auto_cross_correlation(g, a, b, p).at(l).real());
            }
            return best / peak;
        }
    }
    return 0.0;
}

// ---------------------------------------------------------------------------
// TDEL baseline
// ---------------------------------------------------------------------------

/// Non-coherent baseline: cyclic correlation of the thresholded averaged-pilot
/// magnitude spectrum with each data symbol's magnitude spectrum.
class TdelReference {
public:
    TdelReference(const SpectrumBuffer& avg_pilot, double rho_tdel) : m_(avg_pilot.size()), ref_(avg_pilot.size()) {
        if (!(rho_tdel >= 0.0 && rho_tdel < 1.0)) throw std::invalid_argument("rho_tdel must be in [0, 1)");
        double peak = 0.0;
        std::size_t peak_bin = 0;
        for (std::size_t n = 0; n < m_; ++n) {
            const double v = std::abs(avg_pilot[n]);
            if (v > peak) {
                peak = v;
                peak_bin = n;
            }
        }
        const double lambda = rho_tdel * peak;
        std::size_t kept = 0;
        for (std::size_t n = 0; n < m_; ++n) {
            const double v = std::abs(avg_pilot[n]);
            magnitude_.push_back(v < lambda ? 0.0 : v);
            if (v >= lambda && v > 0.0) ++kept;
        }
        if (kept == 0) {
            // All-zero pilot spectrum: fall back to the single maximum bin.
            degenerate_ = true;
            magnitude_.assign(m_, 0.0);
            magnitude_[peak_bin] = 1.0;
        }
        for (std::size_t n = 0; n < m_; ++n) ref_[n] = magnitude_[n];
        fft_plan(m_).forward(ref_);
        for (auto& v : ref_) v = std::conj(v);
    }

    /// Gamma[d] = sum_n P'[n] |R[(n + d) mod M]| for all d, via FFT.
    std::vector<double> correlation(const SpectrumBuffer& data) const {
        if (data.size() != m_) throw std::invalid_argument("TDEL: spectrum length mismatch");
        std::vector<cplx> q(m_);
        for (std::size_t n = 0; n < m_; ++n) q[n] = std::abs(data[n]);
        const auto& plan = fft_plan(m_);
        plan.forward(q);
        for (std::size_t n = 0; n < m_; ++n) q[n] *= ref_[n];
        plan.inverse(q);
        std::vector<double> out(m_);
        for (std::size_t d = 0; d < m_; ++d) out[d] = q[d].real();
        return out;
    }

    Symbol detect(const SpectrumBuffer& data) const { return detail::argmax_lowest(correlation(data)); }

    /// Thresholded pilot magnitudes P'[n].
    const std::vector<double>& reference_magnitude() const noexcept { return magnitude_; }
    bool degenerate() const noexcept { return degenerate_; }

private:
    std::size_t m_;
    std::vector<double> magnitude_;
    std::vector<cplx> ref_;
    bool degenerate_ = false;
};

inline Symbol tdel_detect(const SpectrumBuffer& avg_pilot, const SpectrumBuffer& data, double rho_tdel = 0.2) {
    return TdelReference(avg_pilot, rho_tdel).detect(data);
}

}  // namespace lorarake
