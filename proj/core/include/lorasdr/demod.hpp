#pragma once

#include <utility>

#include "lorasdr/core.hpp"

namespace lorasdr {

struct DftSpectrum {
    std::vector<cplx> bins;
    std::size_t peak_index = 0;
    double peak_magnitude = 0.0;

    [[nodiscard]] std::size_t size() const noexcept { return bins.size(); }
    /// Bin k with the index taken mod N (negative allowed).
    [[nodiscard]] cplx at_wrapped(std::int64_t k) const noexcept {
        return bins[static_cast<std::size_t>(positive_mod(k, static_cast<std::int64_t>(bins.size())))];
    }
};

/// Pointwise product of a window and a reference chirp.
std::vector<cplx> dechirp(std::span<const cplx> window, std::span<const cplx> reference);

/// Unnormalized N-point DFT plus argmax (lowest index wins ties).
DftSpectrum dft_spectrum(std::span<const cplx> dechirped);

/// Recomputes peak fields of an existing spectrum.
void update_peak(DftSpectrum& spectrum) noexcept;

/// Two symbols of samples addressed modulo 2N.
class CircularWindow {
public:
    explicit CircularWindow(std::size_t n_samples) : backing_(2 * n_samples), n_(n_samples) {}

    [[nodiscard]] std::size_t n_samples() const noexcept { return n_; }
    [[nodiscard]] std::size_t capacity() const noexcept { return backing_.size(); }
    [[nodiscard]] const std::vector<cplx>& backing() const noexcept { return backing_; }

    /// Writes N samples at position (slot * N) mod 2N.
    void write_symbol(std::size_t slot, std::span<const cplx> samples);
    /// Raw write of one sample at position pos mod 2N.
    void write(std::size_t pos, cplx v) noexcept { backing_[pos % backing_.size()] = v; }
    /// Copies N samples starting at start, wrapping modulo 2N.
    void read(std::size_t start, std::span<cplx> out) const noexcept;

private:
    std::vector<cplx> backing_;
    std::size_t n_;
};

struct SymbolDecision {
    SymbolValue symbol;
    DftSpectrum spectrum;
};

/// Reads N samples at start (wrapping), dechirps against reference and decides.
SymbolDecision demod_symbol(const CircularWindow& window, std::size_t start, std::span<const cplx> reference);

/// Demodulates one aligned window against reference.
SymbolDecision demod_window(std::span<const cplx> window, std::span<const cplx> reference);

}  // namespace lorasdr
