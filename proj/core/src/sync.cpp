#include "lorasdr/sync.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace lorasdr::sync {

namespace {

std::int64_t circular_distance(std::int64_t a, std::int64_t b, std::int64_t n) {
    const std::int64_t d = positive_mod(a - b, n);
    return std::min(d, n - d);
}

}  // namespace

bool detect_preamble(std::span<const std::uint32_t> recent_decisions, std::size_t n_samples) {
    if (recent_decisions.size() < 3) return false;
    const auto n = static_cast<std::int64_t>(n_samples);
    const auto last = recent_decisions.last(3);
    for (std::uint32_t d : last) {
        for (std::int64_t dv = -1; dv <= 1; ++dv) {
            const std::int64_t v = static_cast<std::int64_t>(d) + dv;
            bool all = true;
            for (std::uint32_t e : last) {
                if (circular_distance(static_cast<std::int64_t>(e), v, n) > 1) {
                    all = false;
                    break;
                }
            }
            if (all) return true;
        }
    }
    return false;
}

double estimate_frac_cfo(const DftSpectrum& y1, const DftSpectrum& y2) {
    if (y1.size() != y2.size() || y1.size() == 0) throw Error(Errc::length_mismatch, "spectra differ in length");
    const auto s = static_cast<std::int64_t>(y2.peak_index);
    cplx acc{};
    for (std::int64_t i = -2; i <= 2; ++i) acc += y2.at_wrapped(s + i) * std::conj(y1.at_wrapped(s + i));
    if (std::abs(acc) < 1e-12) throw Error(Errc::degenerate_spectrum, "no energy around the peak");
    double lambda = std::arg(acc) / (2.0 * std::numbers::pi);
    if (lambda <= -0.5) lambda += 1.0;
    return lambda;
}

double estimate_frac_sto_at(const DftSpectrum& y, std::size_t bin, int l_sto_hat, std::size_t n_samples) {
    const auto i = static_cast<std::int64_t>(bin);
    const double theta = 2.0 * std::numbers::pi * static_cast<double>(l_sto_hat) / static_cast<double>(n_samples);
    const cplx up = std::polar(1.0, -theta) * y.at_wrapped(i + 1);
    const cplx down = std::polar(1.0, theta) * y.at_wrapped(i - 1);
    const cplx den = 2.0 * y.at_wrapped(i) - up - down;
    if (std::abs(den) < 1e-12) throw Error(Errc::degenerate_spectrum, "estimator denominator vanishes");
    const double lambda = -((up - down) / den).real();
    return std::clamp(lambda, -0.5, 0.5);
}

double estimate_frac_sto(const DftSpectrum& y, int l_sto_hat, std::size_t n_samples) {
    return estimate_frac_sto_at(y, y.peak_index, l_sto_hat, n_samples);
}

IntegerOffsets resolve_integer_offsets(std::uint32_t s_up, std::uint32_t s_down, std::size_t n_samples) {
    const auto n = static_cast<std::int64_t>(n_samples);
    // Modular form of round((s_up + s_down) / 2): valid for any STO in [0, N).
    const int two_cfo = signed_residue(static_cast<std::int64_t>(s_up) + s_down, n);
    IntegerOffsets r;
    r.l_cfo = two_cfo / 2;
    r.half_residue = 0.5 * two_cfo - r.l_cfo;
    r.l_sto = signed_residue(static_cast<std::int64_t>(s_up) - r.l_cfo, n);
    return r;
}

std::vector<cplx> apply_cfo_to_reference(std::span<const cplx> reference, double lambda_cfo, std::size_t n_samples) {
    std::vector<cplx> out(reference.size());
    const double step = -2.0 * std::numbers::pi * lambda_cfo / static_cast<double>(n_samples);
    for (std::size_t n = 0; n < reference.size(); ++n) out[n] = reference[n] * std::polar(1.0, step * static_cast<double>(n));
    return out;
}

int select_decimation_phase(double lambda_sto, int osf) {
    if (osf < 1) throw Error(Errc::invalid_osf, "oversampling factor must be >= 1");
    const long p = std::lround(static_cast<double>(osf) * lambda_sto);
    return static_cast<int>(positive_mod(p, osf));
}

}  // namespace lorasdr::sync
