#include "lorasdr/demod.hpp"

#include <cmath>

#include "lorasdr/fft.hpp"

namespace lorasdr {

std::vector<cplx> dechirp(std::span<const cplx> window, std::span<const cplx> reference) {
    if (window.size() != reference.size()) {
        throw Error(Errc::length_mismatch, "window and reference differ in length");
    }
    std::vector<cplx> out(window.size());
    for (std::size_t n = 0; n < window.size(); ++n) out[n] = window[n] * reference[n];
    return out;
}

void update_peak(DftSpectrum& spectrum) noexcept {
    double best = -1.0;
    std::size_t idx = 0;
    for (std::size_t k = 0; k < spectrum.bins.size(); ++k) {
        const double p = std::norm(spectrum.bins[k]);
        if (p > best) {
            best = p;
            idx = k;
        }
    }
    spectrum.peak_index = idx;
    spectrum.peak_magnitude = spectrum.bins.empty() ? 0.0 : std::abs(spectrum.bins[idx]);
}

DftSpectrum dft_spectrum(std::span<const cplx> dechirped) {
    const std::size_t n = dechirped.size();
    if (!is_power_of_two(n) || n < 128 || n > 4096) {
        throw Error(Errc::not_power_of_two, "spectrum length must be a power of two in [128, 4096]");
    }
    DftSpectrum s;
    s.bins.assign(dechirped.begin(), dechirped.end());
    fft_inplace(s.bins);
    update_peak(s);
    return s;
}

void CircularWindow::write_symbol(std::size_t slot, std::span<const cplx> samples) {
    if (samples.size() != n_) throw Error(Errc::length_mismatch, "circular buffer takes whole symbols");
    const std::size_t base = (slot % 2) * n_;
    std::copy(samples.begin(), samples.end(), backing_.begin() + static_cast<std::ptrdiff_t>(base));
}

void CircularWindow::read(std::size_t start, std::span<cplx> out) const noexcept {
    const std::size_t cap = backing_.size();
    std::size_t pos = start % cap;
    for (cplx& v : out) {
        v = backing_[pos];
        if (++pos == cap) pos = 0;
    }
}

SymbolDecision demod_window(std::span<const cplx> window, std::span<const cplx> reference) {
    DftSpectrum spectrum = dft_spectrum(dechirp(window, reference));
    const auto value = static_cast<std::uint32_t>(spectrum.peak_index);
    return {SymbolValue::unchecked(value), std::move(spectrum)};
}

SymbolDecision demod_symbol(const CircularWindow& window, std::size_t start, std::span<const cplx> reference) {
    std::vector<cplx> buf(window.n_samples());
    window.read(start, buf);
    return demod_window(buf, reference);
}

}  // namespace lorasdr
