#include "lorasdr/channel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace lorasdr::channel {

namespace {

constexpr double kKaiserBeta = 5.0;
constexpr std::size_t kRotationBlock = 1024;

/// Polyphase kernel: row r holds the 2K+1 weights for output phase r / R,
/// applied to x[m + K], ..., x[m - K].
std::vector<double> interpolation_kernel(int osf) {
    const int taps = 2 * kInterpHalfLength + 1;
    std::vector<double> kernel(static_cast<std::size_t>(osf * taps));
    const double support = kInterpHalfLength + 1.0;
    const double norm = std::cyl_bessel_i(0.0, kKaiserBeta);
    for (int r = 0; r < osf; ++r) {
        for (int d = -kInterpHalfLength; d <= kInterpHalfLength; ++d) {
            const double t = d + static_cast<double>(r) / osf;
            const double sinc = t == 0.0 ? 1.0 : std::sin(std::numbers::pi * t) / (std::numbers::pi * t);
            const double u = t / support;
            const double window = std::cyl_bessel_i(0.0, kKaiserBeta * std::sqrt(std::max(0.0, 1.0 - u * u))) / norm;
            // d = 0 column for r = 0 must be exactly 1 and the others exactly 0.
            const double w = r == 0 ? (d == 0 ? 1.0 : 0.0) : sinc * window;
            kernel[static_cast<std::size_t>(r * taps + (d + kInterpHalfLength))] = w;
        }
    }
    return kernel;
}

cplx interpolate_at(std::span<const cplx> x, std::span<const double> kernel, int osf, std::int64_t q) {
    const int taps = 2 * kInterpHalfLength + 1;
    const std::int64_t m = q >= 0 ? q / osf : -((-q + osf - 1) / osf);
    const auto r = static_cast<int>(q - m * osf);
    const double* row = kernel.data() + r * taps;
    const auto len = static_cast<std::int64_t>(x.size());
    double re = 0.0, im = 0.0;
    for (int d = -kInterpHalfLength; d <= kInterpHalfLength; ++d) {
        const std::int64_t j = m - d;
        if (j < 0 || j >= len) continue;
        const double w = row[d + kInterpHalfLength];
        re += w * x[static_cast<std::size_t>(j)].real();
        im += w * x[static_cast<std::size_t>(j)].imag();
    }
    return {re, im};
}

/// Multiplies samples with absolute indices m0.. by exp(j2pi cfo m / (R N)).
void rotate(std::span<cplx> samples, std::uint64_t m0, double cfo_bins, double period) {
    if (cfo_bins == 0.0) return;
    auto phasor = [&](std::uint64_t m) {
        double cycles = cfo_bins * static_cast<double>(m) / period;
        cycles -= std::floor(cycles);
        return std::polar(1.0, 2.0 * std::numbers::pi * cycles);
    };
    const cplx step = std::polar(1.0, 2.0 * std::numbers::pi * cfo_bins / period);
    cplx ph = phasor(m0);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const std::uint64_t m = m0 + i;
        if (i != 0 && m % kRotationBlock == 0) ph = phasor(m);
        samples[i] *= ph;
        ph *= step;
    }
}

}  // namespace

std::int64_t ChannelConfig::sto_ticks() const noexcept {
    return static_cast<std::int64_t>(l_sto) * osf + std::llround(lambda_sto * osf);
}

SampleBuffer upsample_tx(const SampleBuffer& baseband, int osf) {
    if (osf < 1) throw Error(Errc::invalid_osf, "oversampling factor must be >= 1");
    SampleBuffer out;
    out.rate = osf == 1 ? baseband.rate : RateTag::oversampled;
    if (osf == 1) {
        out.samples = baseband.samples;
        return out;
    }
    const std::vector<double> kernel = interpolation_kernel(osf);
    const auto total = static_cast<std::int64_t>(baseband.size()) * osf;
    out.samples.resize(static_cast<std::size_t>(total));
    for (std::int64_t q = 0; q < total; ++q) {
        out.samples[static_cast<std::size_t>(q)] = interpolate_at(baseband.samples, kernel, osf, q);
    }
    return out;
}

std::int64_t frame_start_sample(const ChannelConfig& cfg, const ModemParams& params) {
    const auto symbol = static_cast<std::int64_t>(params.n_samples()) * cfg.osf;
    return cfg.lead_in_symbols * symbol - cfg.sto_ticks();
}

SampleBuffer apply_offsets(const SampleBuffer& oversampled, const ChannelConfig& cfg, const ModemParams& params) {
    const std::int64_t start = frame_start_sample(cfg, params);
    const auto symbol = static_cast<std::int64_t>(params.n_samples()) * cfg.osf;
    const auto len = static_cast<std::int64_t>(oversampled.size());
    const std::int64_t total = std::max<std::int64_t>(0, start + len + cfg.tail_symbols * symbol);
    SampleBuffer out;
    out.rate = oversampled.rate;
    out.samples.assign(static_cast<std::size_t>(total), cplx{});
    for (std::int64_t m = std::max<std::int64_t>(0, start); m < std::min(total, start + len); ++m) {
        out.samples[static_cast<std::size_t>(m)] = oversampled.samples[static_cast<std::size_t>(m - start)];
    }
    rotate(out.samples, 0, cfg.cfo_bins(), static_cast<double>(symbol));
    return out;
}

SampleBuffer add_awgn(const SampleBuffer& signal, double snr_db, int osf, std::uint64_t seed, double noise_calibration) {
    SampleBuffer out = signal;
    if (std::isinf(snr_db) && snr_db > 0) return out;
    const double variance = osf * std::pow(10.0, -snr_db / 10.0) * noise_calibration;
    const double sd = std::sqrt(variance / 2.0);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    for (cplx& v : out.samples) {
        const double re = gauss(rng);
        const double im = gauss(rng);
        v += cplx{sd * re, sd * im};
    }
    return out;
}

void draw_realistic_offsets(ChannelConfig& cfg, const ModemParams& params, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> l_cfo(-25, 25);
    std::uniform_real_distribution<double> frac(-0.5, 0.5);
    std::uniform_int_distribution<int> l_sto(0, static_cast<int>(params.n_samples()) - 1);
    std::uniform_int_distribution<int> grid(-(cfg.osf - 1) / 2, cfg.osf / 2);
    cfg.l_cfo = l_cfo(rng);
    cfg.lambda_cfo = frac(rng);
    if (cfg.lambda_cfo == -0.5) cfg.lambda_cfo = 0.5;
    cfg.l_sto = l_sto(rng);
    cfg.lambda_sto = static_cast<double>(grid(rng)) / cfg.osf;
}

void draw_grid_offsets(ChannelConfig& cfg, int limit, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> integer(-limit, limit);
    std::uniform_int_distribution<int> grid(-(cfg.osf - 1) / 2, cfg.osf / 2);
    cfg.l_cfo = integer(rng);
    cfg.lambda_cfo = static_cast<double>(grid(rng)) / cfg.osf;
    cfg.l_sto = integer(rng);
    cfg.lambda_sto = static_cast<double>(grid(rng)) / cfg.osf;
}

ChannelStream::ChannelStream(const SampleBuffer& baseband_frame, const ChannelConfig& cfg, const ModemParams& params)
    : frame_(baseband_frame.samples), cfg_(cfg), n_samples_(params.n_samples()), rng_(cfg.seed) {
    if (cfg.osf < 1) throw Error(Errc::invalid_osf, "oversampling factor must be >= 1");
    start_ = frame_start_sample(cfg, params);
    const auto symbol = static_cast<std::int64_t>(n_samples_) * cfg.osf;
    const auto len = static_cast<std::int64_t>(frame_.size()) * cfg.osf;
    total_ = static_cast<std::uint64_t>(std::max<std::int64_t>(0, start_ + len + cfg.tail_symbols * symbol));
    if (!(std::isinf(cfg.snr_db) && cfg.snr_db > 0)) {
        noise_std_ = std::sqrt(cfg.osf * std::pow(10.0, -cfg.snr_db / 10.0) * cfg.noise_calibration / 2.0);
    }
    kernel_ = interpolation_kernel(cfg.osf);
}

std::size_t ChannelStream::read(std::span<cplx> out) {
    const std::size_t count = static_cast<std::size_t>(std::min<std::uint64_t>(out.size(), total_ - pos_));
    const auto len = static_cast<std::int64_t>(frame_.size()) * cfg_.osf;
    for (std::size_t i = 0; i < count; ++i) {
        const std::int64_t q = static_cast<std::int64_t>(pos_ + i) - start_;
        if (q < 0 || q >= len) {
            out[i] = cplx{};
        } else if (cfg_.osf == 1) {
            out[i] = frame_[static_cast<std::size_t>(q)];
        } else {
            out[i] = interpolate_at(frame_, kernel_, cfg_.osf, q);
        }
    }
    rotate(out.first(count), pos_, cfg_.cfo_bins(), static_cast<double>(n_samples_ * static_cast<std::size_t>(cfg_.osf)));
    if (noise_std_ > 0.0) {
        for (std::size_t i = 0; i < count; ++i) {
            const double re = gauss_(rng_);
            const double im = gauss_(rng_);
            out[i] += cplx{noise_std_ * re, noise_std_ * im};
        }
    }
    pos_ += count;
    return count;
}

}  // namespace lorasdr::channel
