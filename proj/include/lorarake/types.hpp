#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace lorarake {

using cplx = std::complex<double>;

/// Index of a LoRa symbol (also used for DFT bins and candidate hypotheses).
/// Always in [0, M).
using Symbol = std::size_t;

/// Modulation constants. Everything downstream works in chip-rate discrete
/// time, so bandwidth and symbol period never appear explicitly.
class LoRaParams {
public:
    LoRaParams() = default;

    explicit LoRaParams(int sf) : sf_(sf) {
        if (sf < 2 || sf > 20)
            throw std::invalid_argument("sf must be in [2, 20], got " + std::to_string(sf));
        m_ = std::size_t{1} << sf;
    }

    int sf() const noexcept { return sf_; }
    std::size_t m() const noexcept { return m_; }

    void check_symbol(Symbol a) const {
        if (a >= m_)
            throw std::out_of_range("symbol " + std::to_string(a) + " outside [0, " +
                                    std::to_string(m_) + ")");
    }

    friend bool operator==(const LoRaParams&, const LoRaParams&) = default;

private:
    int sf_ = 7;
    std::size_t m_ = 128;
};

namespace detail {

/// Length-M complex vector. The tag keeps time-domain and DFT-domain
/// buffers from being passed to each other's APIs.
template <class Tag>
class ComplexBuffer {
public:
    ComplexBuffer() = default;
    explicit ComplexBuffer(std::size_t m) : data_(m) {}
    explicit ComplexBuffer(std::vector<cplx> v) : data_(std::move(v)) {}
    ComplexBuffer(std::span<const cplx> s) : data_(s.begin(), s.end()) {}

    std::size_t size() const noexcept { return data_.size(); }
    cplx& operator[](std::size_t i) { return data_[i]; }
    const cplx& operator[](std::size_t i) const { return data_[i]; }

    auto begin() noexcept { return data_.begin(); }
    auto end() noexcept { return data_.end(); }
    auto begin() const noexcept { return data_.begin(); }
    auto end() const noexcept { return data_.end(); }

    cplx* data() noexcept { return data_.data(); }
    const cplx* data() const noexcept { return data_.data(); }

    std::span<cplx> span() noexcept { return data_; }
    std::span<const cplx> span() const noexcept { return data_; }
    const std::vector<cplx>& vec() const noexcept { return data_; }

private:
    std::vector<cplx> data_;
};

struct TimeTag {};
struct FreqTag {};

}  // namespace detail

/// Time-domain symbol window, one sample per chip.
using SampleBuffer = detail::ComplexBuffer<detail::TimeTag>;
/// Unnormalized M-point DFT of a SampleBuffer; bin arithmetic is modulo M.
using SpectrumBuffer = detail::ComplexBuffer<detail::FreqTag>;

}  // namespace lorarake
