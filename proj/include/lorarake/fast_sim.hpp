#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "lorarake/channel.hpp"
#include "lorarake/detectors.hpp"
#include "lorarake/rng.hpp"
#include "lorarake/types.hpp"

namespace lorarake {

/// Equivalent DFT-domain model of the MF/RAKE receiver under the ISI-free
/// approximation. The noise-free statistic Z_{a,b}[b] is tabulated once for
/// every (transmitted a, candidate b); a simulation then only adds correlated
/// Gaussian noise to row a.
class FastSimModel {
public:
    FastSimModel(const LoRaParams& p, DechirpedGains g) : params_(p), gains_(std::move(g)), z_(p.m() * p.m()) {
        const std::size_t m = p.m();
        if (gains_.max_delay() >= m / 2) throw std::invalid_argument("FastSimModel: max delay must be < M/2");
        const auto mm = static_cast<std::int64_t>(m);
        const auto l_max = static_cast<std::int64_t>(gains_.max_delay());
        for (std::size_t a = 0; a < m; ++a) {
            for (std::size_t b = 0; b < m; ++b) {
                // signed lag a - b folded into [-M/2, M/2)
                std::int64_t l = (static_cast<std::int64_t>(a) - static_cast<std::int64_t>(b)) % mm;
                if (l < -mm / 2) l += mm;
                if (l >= mm / 2) l -= mm;
                if (l < -l_max || l > l_max) continue;
                z_[a * m + b] = static_cast<double>(m) * auto_cross_correlation(gains_, a, b, p).at(l);
            }
        }
    }

    const LoRaParams& params() const noexcept { return params_; }
    const DechirpedGains& gains() const noexcept { return gains_; }

    /// Noise-free Z_{a,b}[b].
    cplx z(Symbol a, Symbol b) const { return z_[a * params_.m() + b]; }

    /// Noise covariance E[W_bu W_bv^*] between candidates, in units of the
    /// per-bin DFT noise variance sigma_w^2 = M sigma^2. Built from
    /// Gamma_{bv,bu} at the wrapped lag bv - bu.
    std::vector<cplx> covariance(const std::vector<Symbol>& cands, double sigma_w2) const {
        const std::size_t n = cands.size();
        const auto mm = static_cast<std::int64_t>(params_.m());
        std::vector<cplx> c(n * n);
        for (std::size_t u = 0; u < n; ++u)
            for (std::size_t v = 0; v < n; ++v) {
                std::int64_t l = (static_cast<std::int64_t>(cands[v]) - static_cast<std::int64_t>(cands[u])) % mm;
                if (l < -mm / 2) l += mm;
                if (l >= mm / 2) l -= mm;
                c[u * n + v] = sigma_w2 * auto_cross_correlation(gains_, cands[v], cands[u], params_).at(l);
            }
        return c;
    }

    /// Applies the RAKE combiner to white DFT-domain noise. The combiner is a
    /// square-root factor of covariance(): W_b = sum_i conj(alpha~_b(i)) W[b - k_i].
    cplx combine(const std::vector<cplx>& white, Symbol b) const {
        const auto& plan = fft_plan(params_.m());
        const std::size_t mask = params_.m() - 1;
        cplx acc{};
        for (const auto& t : gains_.paths())
            acc += std::conj(t.gain * plan.twiddle(t.delay * b)) * white[(b - t.delay) & mask];
        return acc;
    }

private:
    LoRaParams params_;
    DechirpedGains gains_;
    std::vector<cplx> z_;
};

inline FastSimModel build_fast_sim(const DechirpedGains& g, const LoRaParams& p) { return FastSimModel(p, g); }

/// Jointly Gaussian DFT-domain noise for each candidate, with covariance
/// model.covariance(cand.indices, sigma_w2).
inline std::vector<cplx> sample_correlated_noise(const FastSimModel& model, const CandidateSet& cand,
                                                 double sigma_w2, Rng& rng) {
    const std::size_t m = model.params().m();
    std::vector<cplx> white(m);
    for (auto& w : white) w = rng.complex_normal(sigma_w2);
    std::vector<cplx> out;
    out.reserve(cand.size());
    for (Symbol b : cand.indices) out.push_back(model.combine(white, b));
    return out;
}

/// Full-RAKE decision for transmitted symbol a in the equivalent model, given
/// one realization of white DFT-domain noise (variance sigma_w^2 per bin).
inline Symbol fast_sim_detect(const FastSimModel& model, Symbol a, const std::vector<cplx>& white) {
    const std::size_t m = model.params().m();
    Symbol best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (Symbol b = 0; b < m; ++b) {
        const double s = (model.z(a, b) + model.combine(white, b)).real();
        if (s > best_score) {
            best_score = s;
            best = b;
        }
    }
    return best;
}

inline Symbol fast_sim_detect(const FastSimModel& model, Symbol a, double sigma_w2, Rng& rng) {
    std::vector<cplx> white(model.params().m());
    for (auto& w : white) w = rng.complex_normal(sigma_w2);
    return fast_sim_detect(model, a, white);
}

/// Lower Cholesky factor of a Hermitian matrix (row-major n x n). Returns
/// nullopt when the matrix is not positive semidefinite. A zero pivot caused
/// by exact rank deficiency is regularized with +1e-12 on the diagonal.
inline std::optional<std::vector<cplx>> cholesky_psd(const std::vector<cplx>& a, std::size_t n) {
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) scale = std::max(scale, std::abs(a[i * n + i]));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (std::abs(a[i * n + j] - std::conj(a[j * n + i])) > 1e-9 * std::max(1.0, scale)) return std::nullopt;
    std::vector<cplx> l(n * n);
    const double tol = 1e-9 * std::max(1.0, scale);
    for (std::size_t j = 0; j < n; ++j) {
        double d = a[j * n + j].real();
        for (std::size_t k = 0; k < j; ++k) d -= std::norm(l[j * n + k]);
        if (d < -tol) return std::nullopt;
        if (d <= tol) d += 1e-12 * std::max(1.0, scale);
        const double ljj = std::sqrt(std::max(d, 0.0));
        l[j * n + j] = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            cplx s = a[i * n + j];
            for (std::size_t k = 0; k < j; ++k) s -= l[i * n + k] * std::conj(l[j * n + k]);
            l[i * n + j] = ljj > 0 ? s / ljj : cplx{};
        }
    }
    return l;
}

}  // namespace lorarake
