#include "lorasdr/dfe.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace lorasdr::dfe {

std::vector<double> default_taps(int osf) {
    if (osf < 1) throw Error(Errc::invalid_osf, "oversampling factor must be >= 1");
    if (osf == 1) return {1.0};
    const int length = 8 * osf + 1;
    const double centre = (length - 1) / 2.0;
    const double fc = 0.5 / osf;
    std::vector<double> taps(static_cast<std::size_t>(length));
    double sum = 0.0;
    for (int n = 0; n < length; ++n) {
        const double t = n - centre;
        const double x = 2.0 * fc * t;
        const double sinc = t == 0.0 ? 1.0 : std::sin(std::numbers::pi * x) / (std::numbers::pi * x);
        const double window = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * n / (length - 1));
        taps[static_cast<std::size_t>(n)] = 2.0 * fc * sinc * window;
        sum += taps[static_cast<std::size_t>(n)];
    }
    for (double& h : taps) h /= sum;
    return taps;
}

double group_delay(std::span<const double> taps) { return (static_cast<double>(taps.size()) - 1.0) / 2.0; }

double power_response(std::span<const double> taps, double f) {
    cplx acc{};
    for (std::size_t k = 0; k < taps.size(); ++k) {
        acc += taps[k] * std::polar(1.0, -2.0 * std::numbers::pi * f * static_cast<double>(k));
    }
    return std::norm(acc);
}

double noise_calibration(std::span<const double> taps, int osf) {
    // Average passband power gain seen by a chirp spanning [-fs/2, fs/2).
    constexpr int kPoints = 2048;
    const double fc = 0.5 / osf;
    double gain = 0.0;
    for (int i = 0; i < kPoints; ++i) {
        const double f = -fc + (i + 0.5) * 2.0 * fc / kPoints;
        gain += power_response(taps, f);
    }
    gain /= kPoints;
    double energy = 0.0;
    for (double h : taps) energy += h * h;
    return gain / (osf * energy);
}

DfeConfig DfeConfig::make_default(int osf, std::size_t window_len, bool quantize) {
    return {default_taps(osf), osf, window_len, 0, quantize};
}

FilterOutput fir_filter(const SampleBuffer& oversampled, std::span<const double> taps) {
    if (taps.empty()) throw Error(Errc::invalid_argument, "filter needs at least one tap");
    FilterOutput out;
    out.samples.rate = oversampled.rate;
    out.group_delay = group_delay(taps);
    const auto& x = oversampled.samples;
    out.samples.samples.assign(x.size(), cplx{});
    for (std::size_t n = 0; n < x.size(); ++n) {
        cplx acc{};
        const std::size_t kmax = std::min(taps.size() - 1, n);
        for (std::size_t k = 0; k <= kmax; ++k) acc += taps[k] * x[n - k];
        out.samples.samples[n] = acc;
    }
    return out;
}

SampleBuffer decimate(const SampleBuffer& filtered, int osf, int phase) {
    if (osf < 1) throw Error(Errc::invalid_osf, "oversampling factor must be >= 1");
    if (phase < 0 || phase >= osf) throw Error(Errc::phase_out_of_range, "phase must lie in [0, R)");
    SampleBuffer out;
    out.rate = RateTag::baseband;
    for (std::size_t i = static_cast<std::size_t>(phase); i < filtered.size(); i += static_cast<std::size_t>(osf)) {
        out.samples.push_back(filtered.samples[i]);
    }
    return out;
}

cplx quantize_sample(cplx v) noexcept {
    auto q = [](double x) {
        const double level = std::clamp(std::round(x * 2047.0), -2048.0, 2047.0);
        return level / 2047.0;
    };
    return {q(v.real()), q(v.imag())};
}

std::vector<std::vector<cplx>> deliver_windows(const SampleBuffer& baseband, std::size_t window_len, bool quantize) {
    if (window_len == 0) throw Error(Errc::invalid_argument, "window length must be positive");
    std::vector<std::vector<cplx>> windows;
    for (std::size_t start = 0; start + window_len <= baseband.size(); start += window_len) {
        auto first = baseband.samples.begin() + static_cast<std::ptrdiff_t>(start);
        std::vector<cplx> w(first, first + static_cast<std::ptrdiff_t>(window_len));
        if (quantize) {
            for (cplx& v : w) v = quantize_sample(v);
        }
        windows.push_back(std::move(w));
    }
    return windows;
}

std::vector<double> load_taps(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::io_error, "cannot open " + path.string());
    std::vector<double> taps;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        std::istringstream ls(line);
        double v = 0.0;
        std::string rest;
        if (!(ls >> v) || (ls >> rest)) {
            throw Error(Errc::malformed_file, path.string() + ":" + std::to_string(lineno) + ": expected one number");
        }
        taps.push_back(v);
    }
    if (taps.empty()) throw Error(Errc::malformed_file, path.string() + ": no coefficients");
    return taps;
}

Dfe::Dfe(DfeConfig config) : config_(std::move(config)) {
    if (config_.fir_taps.empty()) throw Error(Errc::invalid_argument, "filter needs at least one tap");
    if (config_.osf < 1) throw Error(Errc::invalid_osf, "oversampling factor must be >= 1");
    if (config_.window_len == 0) throw Error(Errc::invalid_argument, "window length must be positive");
    set_phase(config_.active_phase);
    rev_taps_.assign(config_.fir_taps.rbegin(), config_.fir_taps.rend());
}

void Dfe::set_phase(int phase) {
    if (phase < 0 || phase >= config_.osf) throw Error(Errc::phase_out_of_range, "phase must lie in [0, R)");
    phase_ = phase;
    config_.active_phase = phase;
}

std::uint64_t Dfe::next_window_tick() const noexcept {
    return next_sample_ * static_cast<std::uint64_t>(config_.osf) + static_cast<std::uint64_t>(phase_);
}

void Dfe::push(std::span<const cplx> oversampled) {
    // Drop history no future output can reach.
    const std::uint64_t ntaps = rev_taps_.size();
    const std::uint64_t next_tick = next_sample_ * static_cast<std::uint64_t>(config_.osf);
    const std::uint64_t keep_from = next_tick + 1 > ntaps ? next_tick + 1 - ntaps : 0;
    if (keep_from > base_ && keep_from - base_ > history_.size() / 2 && keep_from - base_ >= 4096) {
        const std::uint64_t drop = std::min<std::uint64_t>(keep_from - base_, history_.size());
        history_.erase(history_.begin(), history_.begin() + static_cast<std::ptrdiff_t>(drop));
        base_ += drop;
    }
    history_.insert(history_.end(), oversampled.begin(), oversampled.end());
}

std::optional<std::vector<cplx>> Dfe::pop_window() {
    const auto osf = static_cast<std::uint64_t>(config_.osf);
    const std::uint64_t len = config_.window_len;
    const std::uint64_t last_tick = (next_sample_ + len - 1) * osf + static_cast<std::uint64_t>(phase_);
    if (last_tick >= base_ + history_.size()) return std::nullopt;

    const std::size_t ntaps = rev_taps_.size();
    std::vector<cplx> out(len);
    for (std::uint64_t i = 0; i < len; ++i) {
        const std::uint64_t tick = (next_sample_ + i) * osf + static_cast<std::uint64_t>(phase_);
        // Inputs tick-ntaps+1 .. tick, against taps in reverse order.
        const std::int64_t first = static_cast<std::int64_t>(tick) - static_cast<std::int64_t>(ntaps) + 1;
        std::size_t k0 = 0;
        std::int64_t start = first;
        if (start < static_cast<std::int64_t>(base_)) {
            k0 = static_cast<std::size_t>(static_cast<std::int64_t>(base_) - start);
            start = static_cast<std::int64_t>(base_);
        }
        const cplx* x = history_.data() + (start - static_cast<std::int64_t>(base_));
        double re = 0.0, im = 0.0;
        for (std::size_t k = k0; k < ntaps; ++k, ++x) {
            re += rev_taps_[k] * x->real();
            im += rev_taps_[k] * x->imag();
        }
        out[i] = {re, im};
    }
    if (config_.quantize) {
        double power = 0.0;
        for (const cplx& v : out) power += std::norm(v);
        power /= static_cast<double>(len);
        agc_power_ = agc_power_ < 0.0 ? power : 0.75 * agc_power_ + 0.25 * power;
        double gain = 1.0;
        if (config_.agc_target > 0.0 && agc_power_ > 0.0) gain = std::min(1.0, config_.agc_target / std::sqrt(agc_power_));
        for (cplx& v : out) v = quantize_sample(v * gain) / gain;
    }
    next_sample_ += len;
    return out;
}

}  // namespace lorasdr::dfe
