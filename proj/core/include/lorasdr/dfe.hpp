#pragma once

#include <deque>
#include <filesystem>
#include <optional>

#include "lorasdr/core.hpp"

namespace lorasdr::dfe {

/// Hamming-windowed sinc, cutoff at half the baseband rate, unity DC gain.
/// Length 8R + 1; R = 1 gives the single tap [1].
std::vector<double> default_taps(int osf);

/// Delay of a symmetric filter in input samples, (T - 1) / 2.
double group_delay(std::span<const double> taps);

/// |H(f)|^2 at f cycles per input sample.
double power_response(std::span<const double> taps, double f);

/// Factor that makes add_awgn's SNR hold at the decimator output for a
/// full-band chirp filtered by these taps.
double noise_calibration(std::span<const double> taps, int osf);

struct DfeConfig {
    std::vector<double> fir_taps;
    int osf = 1;
    std::size_t window_len = 128;
    int active_phase = 0;
    bool quantize = false;
    /// RMS level, relative to full scale, that the gain stage ahead of the
    /// quantizer aims for. The gain never exceeds 1 and is divided back out
    /// after quantization. 0 disables it.
    double agc_target = 0.25;

    /// Default taps for R and windows of N samples.
    static DfeConfig make_default(int osf, std::size_t window_len, bool quantize = false);
};

struct FilterOutput {
    SampleBuffer samples;
    double group_delay = 0.0;
};

/// Causal convolution truncated to the input length.
FilterOutput fir_filter(const SampleBuffer& oversampled, std::span<const double> taps);

/// output[m] = filtered[m R + phase].
SampleBuffer decimate(const SampleBuffer& filtered, int osf, int phase);

/// Rounds each component to the 12-bit grid (full scale 2047) and rescales.
cplx quantize_sample(cplx v) noexcept;

/// Splits into consecutive windows of L samples; a trailing partial window is withheld.
std::vector<std::vector<cplx>> deliver_windows(const SampleBuffer& baseband, std::size_t window_len, bool quantize);

/// One coefficient per line. Blank lines and lines starting with '#' are skipped.
std::vector<double> load_taps(const std::filesystem::path& path);

/// Streaming front end: filters only at the decimated instants and delivers
/// windows of L samples. A phase change applies from the next window on.
class Dfe {
public:
    explicit Dfe(DfeConfig config);

    void push(std::span<const cplx> oversampled);
    /// Next complete window, computed with the phase active now.
    std::optional<std::vector<cplx>> pop_window();

    void set_phase(int phase);
    [[nodiscard]] int phase() const noexcept { return phase_; }
    [[nodiscard]] const DfeConfig& config() const noexcept { return config_; }
    /// Filter-output index of the first sample of the next window.
    [[nodiscard]] std::uint64_t next_window_tick() const noexcept;
    [[nodiscard]] std::uint64_t windows_delivered() const noexcept { return next_sample_ / config_.window_len; }

private:
    DfeConfig config_;
    std::vector<double> rev_taps_;
    std::vector<cplx> history_;  // input samples [base_, base_ + size)
    std::uint64_t base_ = 0;
    std::uint64_t next_sample_ = 0;  // next baseband output index
    int phase_ = 0;
    double agc_power_ = -1.0;  // smoothed window power, < 0 before the first window
};

}  // namespace lorasdr::dfe
