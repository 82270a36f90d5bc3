#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "lorarake/channel.hpp"
#include "lorarake/types.hpp"

namespace lorarake {

struct EstimatorConfig {
    std::size_t n_p = 6;
    double rho_p = 0.4;
    std::size_t k_max = 10;
    /// When set, take the known_k - 1 strongest bins in the search range
    /// instead of thresholding.
    std::optional<std::size_t> known_k;

    void validate(const LoRaParams& p) const {
        if (n_p < 1) throw std::invalid_argument("n_p must be >= 1");
        if (!(rho_p > 0.0 && rho_p < 1.0)) throw std::invalid_argument("rho_p must be in (0, 1)");
        if (k_max < 1 || k_max >= p.m())
            throw std::invalid_argument("k_max must be in [1, M), got " + std::to_string(k_max));
        if (known_k && (*known_k < 1 || *known_k > k_max + 1))
            throw std::invalid_argument("known_k must be in [1, k_max + 1]");
    }
};

/// Element-wise mean of the pilot spectra.
inline SpectrumBuffer average_pilot_dft(std::span<const SpectrumBuffer> pilots) {
    if (pilots.empty()) throw std::invalid_argument("average_pilot_dft: no pilots");
    const std::size_t m = pilots.front().size();
    SpectrumBuffer avg(m);
    for (const auto& s : pilots) {
        if (s.size() != m) throw std::invalid_argument("average_pilot_dft: length mismatch");
        for (std::size_t n = 0; n < m; ++n) avg[n] += s[n];
    }
    const double inv = 1.0 / static_cast<double>(pilots.size());
    for (auto& v : avg) v *= inv;
    return avg;
}

/// Path delays and dechirped gains from the averaged pilot spectrum.
///
/// A path at delay k shows up in bin M - k of the pilot spectrum with value
/// M * alpha~(k). Bin 0 is the synchronized first path and is always kept.
/// Echo bins M - k_max .. M - 1 are kept when their magnitude exceeds
/// rho_p * |avg[0]|. Gains are divided by M so they match dechirped_gain().
inline DechirpedGains detect_paths(const SpectrumBuffer& avg, const EstimatorConfig& cfg) {
    const std::size_t m = avg.size();
    if (cfg.k_max < 1 || cfg.k_max >= m) throw std::invalid_argument("k_max must be in [1, M)");
    const double scale = 1.0 / static_cast<double>(m);
    std::vector<Path> paths{{0, avg[0] * scale}};

    std::vector<std::size_t> delays;
    if (cfg.known_k) {
        std::vector<std::size_t> range(cfg.k_max);
        for (std::size_t k = 1; k <= cfg.k_max; ++k) range[k - 1] = k;
        const std::size_t take = std::min(*cfg.known_k - 1, range.size());
        std::partial_sort(range.begin(), range.begin() + static_cast<std::ptrdiff_t>(take), range.end(),
                          [&](std::size_t x, std::size_t y) {
                              const double mx = std::abs(avg[m - x]), my = std::abs(avg[m - y]);
                              return mx > my || (mx == my && x < y);
                          });
        delays.assign(range.begin(), range.begin() + static_cast<std::ptrdiff_t>(take));
    } else {
        const double lambda = cfg.rho_p * std::abs(avg[0]);
        for (std::size_t k = 1; k <= cfg.k_max; ++k)
            if (std::abs(avg[m - k]) > lambda) delays.push_back(k);
    }
    std::sort(delays.begin(), delays.end());
    for (auto k : delays) paths.push_back({k, avg[m - k] * scale});
    return DechirpedGains(std::move(paths));
}

/// Gains read at a forced list of delays (must start with 0), used to study
/// over-, under- and miss-estimation of the path set.
inline DechirpedGains gains_at_delays(const SpectrumBuffer& avg, std::span<const std::size_t> delays) {
    const std::size_t m = avg.size();
    const double scale = 1.0 / static_cast<double>(m);
    std::vector<Path> paths;
    for (auto k : delays) {
        if (k >= m) throw std::invalid_argument("forced delay >= M");
        paths.push_back({k, avg[(m - k) & (m - 1)] * scale});
    }
    return DechirpedGains(std::move(paths));
}

/// Delays of true paths the estimator cannot see because they exceed k_max.
inline std::vector<std::size_t> unreachable_paths(const MultipathChannel& ch, std::size_t k_max) {
    std::vector<std::size_t> out;
    for (const auto& t : ch.taps())
        if (t.delay > k_max) out.push_back(t.delay);
    return out;
}

}  // namespace lorarake
