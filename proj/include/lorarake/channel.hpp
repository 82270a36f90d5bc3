#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "lorarake/fft.hpp"
#include "lorarake/rng.hpp"
#include "lorarake/types.hpp"
#include "lorarake/waveform.hpp"

namespace lorarake {

/// One resolvable path: integer delay in samples and a complex gain.
struct Path {
    std::size_t delay = 0;
    cplx gain{1.0, 0.0};

    friend bool operator==(const Path&, const Path&) = default;
};

namespace detail {

inline void validate_paths(const std::vector<Path>& paths, const char* what) {
    if (paths.empty()) throw std::invalid_argument(std::string(what) + ": at least one path required");
    if (paths.front().delay != 0)
        throw std::invalid_argument(std::string(what) + ": first path must have delay 0");
    for (std::size_t i = 1; i < paths.size(); ++i)
        if (paths[i].delay <= paths[i - 1].delay)
            throw std::invalid_argument(std::string(what) + ": delays must be strictly increasing");
}

}  // namespace detail

/// Tapped delay line c[k] = sum_i alpha(i) delta[k - k_i], synchronized on the
/// first path. Gains are stored exactly as given (no power normalization).
class MultipathChannel {
public:
    MultipathChannel() : taps_{Path{0, {1.0, 0.0}}} {}

    explicit MultipathChannel(std::vector<Path> taps) : taps_(std::move(taps)) {
        detail::validate_paths(taps_, "MultipathChannel");
    }

    static MultipathChannel identity() { return {}; }
    static MultipathChannel flat(cplx gain) { return MultipathChannel({Path{0, gain}}); }
    /// delta[k] + 0.8 delta[k-2] + 0.5 delta[k-3]
    static MultipathChannel c1() { return MultipathChannel({{0, 1.0}, {2, 0.8}, {3, 0.5}}); }
    /// delta[k] + 0.8 delta[k-5]
    static MultipathChannel c2() { return MultipathChannel({{0, 1.0}, {5, 0.8}}); }

    const std::vector<Path>& taps() const noexcept { return taps_; }
    std::size_t size() const noexcept { return taps_.size(); }
    std::size_t max_delay() const noexcept { return taps_.back().delay; }

    void check_fits(const LoRaParams& p) const {
        if (max_delay() >= p.m())
            throw std::invalid_argument("channel delay " + std::to_string(max_delay()) + " >= M = " +
                                        std::to_string(p.m()));
    }

    /// sum_i |alpha(i)|^2
    double energy() const noexcept {
        double e = 0.0;
        for (const auto& t : taps_) e += std::norm(t.gain);
        return e;
    }

private:
    std::vector<Path> taps_;
};

inline double channel_energy(const MultipathChannel& ch) { return ch.energy(); }

/// Paths as they appear after dechirping: same delays, gains rotated by
/// x_b[-k_i]. With b = 0 these are the receiver's channel parameters; the
/// channel estimator produces the same type.
class DechirpedGains {
public:
    DechirpedGains() = default;
    explicit DechirpedGains(std::vector<Path> paths) : paths_(std::move(paths)) {
        detail::validate_paths(paths_, "DechirpedGains");
    }

    const std::vector<Path>& paths() const noexcept { return paths_; }
    std::size_t size() const noexcept { return paths_.size(); }
    std::size_t max_delay() const noexcept { return paths_.empty() ? 0 : paths_.back().delay; }
    const Path& operator[](std::size_t i) const { return paths_[i]; }

    double energy() const noexcept {
        double e = 0.0;
        for (const auto& t : paths_) e += std::norm(t.gain);
        return e;
    }

private:
    std::vector<Path> paths_;
};

/// alpha~(i) = alpha(i) x_0[-k_i]
inline DechirpedGains dechirped_gain(const LoRaParams& p, const MultipathChannel& ch) {
    ch.check_fits(p);
    std::vector<Path> out;
    out.reserve(ch.size());
    for (const auto& t : ch.taps())
        out.push_back({t.delay, t.gain * chirp_sample(p.m(), 0, -static_cast<std::int64_t>(t.delay))});
    return DechirpedGains(std::move(out));
}

/// alpha~_b(i) = alpha~(i) exp(-2j*pi*k_i*b/M)
inline DechirpedGains rotate_gains(const DechirpedGains& g, Symbol b, const LoRaParams& p) {
    p.check_symbol(b);
    const auto& plan = fft_plan(p.m());
    std::vector<Path> out;
    out.reserve(g.size());
    for (const auto& t : g.paths()) out.push_back({t.delay, t.gain * plan.twiddle(t.delay * b)});
    return DechirpedGains(std::move(out));
}

/// C_b[k] = sum_i alpha~_b(i) exp(-2j*pi*k*k_i/M), evaluated tap by tap.
inline SampleBuffer channel_coefficient(const DechirpedGains& g, Symbol b, const LoRaParams& p) {
    const auto rot = rotate_gains(g, b, p);
    const auto& plan = fft_plan(p.m());
    SampleBuffer c(p.m());
    for (std::size_t k = 0; k < p.m(); ++k) {
        cplx acc{};
        for (const auto& t : rot.paths()) acc += t.gain * plan.twiddle(k * t.delay);
        c[k] = acc;
    }
    return c;
}

/// Transmit burst: n_p pilot symbols (a = 0) followed by the data symbols.
struct Frame {
    std::size_t n_p = 0;
    std::vector<Symbol> symbols;
    std::vector<cplx> samples;

    std::size_t n_d() const noexcept { return symbols.size() - n_p; }
    std::size_t n_f() const noexcept { return symbols.size(); }
};

inline Frame build_frame(const LoRaParams& p, std::size_t pilots, std::span<const Symbol> data) {
    Frame f;
    f.n_p = pilots;
    f.symbols.assign(pilots, 0);
    f.symbols.insert(f.symbols.end(), data.begin(), data.end());
    f.samples.resize(f.symbols.size() * p.m());
    const auto& x0 = detail::base_upchirp(p.m());
    const auto& plan = fft_plan(p.m());
    for (std::size_t s = 0; s < f.symbols.size(); ++s) {
        const Symbol a = f.symbols[s];
        p.check_symbol(a);
        // x_a[k] = x_0[k] exp(2j*pi*a*k/M)
        for (std::size_t k = 0; k < p.m(); ++k)
            f.samples[s * p.m() + k] = x0[k] * std::conj(plan.twiddle(a * k));
    }
    return f;
}

/// Exact linear convolution with the tapped delay line, truncated to the input
/// length. Samples before the burst are silence.
inline std::vector<cplx> apply_channel(std::span<const cplx> samples, const MultipathChannel& ch) {
    std::vector<cplx> out(samples.size());
    for (const auto& t : ch.taps()) {
        if (t.delay >= samples.size()) continue;
        for (std::size_t k = t.delay; k < samples.size(); ++k) out[k] += t.gain * samples[k - t.delay];
    }
    return out;
}

inline std::vector<cplx> apply_channel(const Frame& f, const MultipathChannel& ch, const LoRaParams& p) {
    ch.check_fits(p);
    return apply_channel(f.samples, ch);
}

/// Adds circular complex Gaussian noise of total variance sigma2 per sample.
inline void add_awgn(std::span<cplx> samples, double sigma2, Rng& rng) {
    if (sigma2 < 0.0) throw std::invalid_argument("add_awgn: negative variance");
    if (sigma2 == 0.0) return;
    for (auto& s : samples) s += rng.complex_normal(sigma2);
}

/// Symbol window s of a received stream.
inline SampleBuffer symbol_window(std::span<const cplx> rx, std::size_t s, const LoRaParams& p) {
    if ((s + 1) * p.m() > rx.size()) throw std::out_of_range("symbol_window: past end of stream");
    return SampleBuffer(rx.subspan(s * p.m(), p.m()));
}

}  // namespace lorarake
