#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "lorarake/types.hpp"

namespace lorarake {

/// Iterative radix-2 decimation-in-time FFT with precomputed bit-reversal
/// and twiddle tables. Forward transform is unnormalized.
class FftPlan {
public:
    explicit FftPlan(std::size_t n) : n_(n), rev_(n), twiddle_(n) {
        if (n == 0 || (n & (n - 1)) != 0)
            throw std::invalid_argument("FFT size must be a power of two");
        while ((std::size_t{1} << log2n_) < n) ++log2n_;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t r = 0;
            for (unsigned b = 0; b < log2n_; ++b)
                if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (log2n_ - 1 - b);
            rev_[i] = r;
        }
        // exp(-2j*pi*t/n), evaluated from the reduced angle so that all
        // entries are correctly rounded rather than accumulated.
        for (std::size_t t = 0; t < n; ++t) {
            const double ang = -2.0 * std::numbers::pi * static_cast<double>(t) / static_cast<double>(n);
            twiddle_[t] = cplx(std::cos(ang), std::sin(ang));
        }
    }

    std::size_t size() const noexcept { return n_; }
    unsigned log2_size() const noexcept { return log2n_; }

    /// exp(-2j*pi*t/n) for any integer t (reduced modulo n).
    cplx twiddle(std::size_t t) const noexcept { return twiddle_[t & (n_ - 1)]; }

    void forward(std::span<cplx> x) const { transform(x, false); }

    /// Inverse transform including the 1/n factor.
    void inverse(std::span<cplx> x) const {
        transform(x, true);
        const double s = 1.0 / static_cast<double>(n_);
        for (auto& v : x) v *= s;
    }

private:
    void transform(std::span<cplx> x, bool inv) const {
        if (x.size() != n_) throw std::invalid_argument("FFT input length mismatch");
        for (std::size_t i = 0; i < n_; ++i)
            if (rev_[i] > i) std::swap(x[i], x[rev_[i]]);
        for (std::size_t len = 2; len <= n_; len <<= 1) {
            const std::size_t half = len >> 1;
            const std::size_t step = n_ / len;
            for (std::size_t start = 0; start < n_; start += len) {
                for (std::size_t j = 0; j < half; ++j) {
                    cplx w = twiddle_[j * step];
                    if (inv) w = std::conj(w);
                    const cplx u = x[start + j];
                    const cplx v = x[start + j + half] * w;
                    x[start + j] = u + v;
                    x[start + j + half] = u - v;
                }
            }
        }
    }

    std::size_t n_;
    unsigned log2n_ = 0;
    std::vector<std::size_t> rev_;
    std::vector<cplx> twiddle_;
};

/// Shared read-only plan for size n, built once on first use.
inline const FftPlan& fft_plan(std::size_t n) {
    constexpr std::size_t kMaxLog2 = 24;
    static std::array<std::once_flag, kMaxLog2 + 1> once;
    static std::array<std::unique_ptr<FftPlan>, kMaxLog2 + 1> plans;
    if (n == 0 || (n & (n - 1)) != 0) throw std::invalid_argument("FFT size must be a power of two");
    std::size_t lg = 0;
    while ((std::size_t{1} << lg) < n) ++lg;
    if (lg > kMaxLog2) throw std::invalid_argument("FFT size too large");
    std::call_once(once[lg], [&] { plans[lg] = std::make_unique<FftPlan>(n); });
    return *plans[lg];
}

}  // namespace lorarake
