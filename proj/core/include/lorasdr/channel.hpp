#pragma once

#include <limits>
#include <random>

#include "lorasdr/core.hpp"

namespace lorasdr::channel {

/// True impairments. Offsets follow OffsetEstimate: a positive STO advances
/// the signal relative to the receiver's sample grid.
struct ChannelConfig {
    double snr_db = std::numeric_limits<double>::infinity();
    int l_cfo = 0;
    double lambda_cfo = 0.0;
    int l_sto = 0;
    double lambda_sto = 0.0;
    int osf = 1;
    std::uint64_t seed = 0;
    /// Whole symbols of silence before and after the frame.
    int lead_in_symbols = 0;
    int tail_symbols = 0;
    /// Scales the noise variance; see dfe::noise_calibration.
    double noise_calibration = 1.0;

    [[nodiscard]] double cfo_bins() const noexcept { return l_cfo + lambda_cfo; }
    /// STO in oversampled samples, rounded onto the 1/R grid.
    [[nodiscard]] std::int64_t sto_ticks() const noexcept;
};

/// Half-length, in input samples, of the interpolation kernel.
inline constexpr int kInterpHalfLength = 8;

/// Windowed-sinc interpolation by R. output[m R] equals input[m].
SampleBuffer upsample_tx(const SampleBuffer& baseband, int osf);

/// Shifts by -round(tau R) oversampled samples (dropping or zero-filling at the
/// front), surrounds with the configured silence, then rotates by the CFO.
SampleBuffer apply_offsets(const SampleBuffer& oversampled, const ChannelConfig& cfg, const ModemParams& params);

/// Adds complex Gaussian noise of variance R 10^(-snr/10) c.
SampleBuffer add_awgn(const SampleBuffer& signal, double snr_db, int osf, std::uint64_t seed,
                      double noise_calibration = 1.0);

/// Oversampled-sample index at which the frame starts in the output of
/// apply_offsets / ChannelStream (may be negative when the head was dropped).
std::int64_t frame_start_sample(const ChannelConfig& cfg, const ModemParams& params);

/// Draws offsets per the realistic distribution: L_CFO uniform in [-25, 25],
/// L_STO uniform in [0, N), fractions uniform (STO on the 1/R grid).
void draw_realistic_offsets(ChannelConfig& cfg, const ModemParams& params, std::mt19937_64& rng);

/// Offsets with integers uniform in [-limit, limit] and both fractions on the 1/R grid.
void draw_grid_offsets(ChannelConfig& cfg, int limit, std::mt19937_64& rng);

/// Chunked equivalent of upsample_tx -> apply_offsets -> add_awgn.
class ChannelStream {
public:
    ChannelStream(const SampleBuffer& baseband_frame, const ChannelConfig& cfg, const ModemParams& params);

    [[nodiscard]] std::uint64_t total_samples() const noexcept { return total_; }
    [[nodiscard]] std::uint64_t position() const noexcept { return pos_; }
    [[nodiscard]] bool done() const noexcept { return pos_ >= total_; }

    /// Fills up to out.size() samples; returns how many were written.
    std::size_t read(std::span<cplx> out);

private:
    std::vector<cplx> frame_;
    std::vector<double> kernel_;
    ChannelConfig cfg_;
    std::size_t n_samples_;
    std::int64_t start_ = 0;
    std::uint64_t total_ = 0;
    std::uint64_t pos_ = 0;
    double noise_std_ = 0.0;
    std::mt19937_64 rng_;
    std::normal_distribution<double> gauss_;
};

}  // namespace lorasdr::channel
