#include "lorasdr/chirp.hpp"

#include <array>
#include <cmath>
#include <mutex>
#include <numbers>

namespace lorasdr {

namespace {

std::vector<cplx> make_upchirp(int sf) {
    const std::size_t n_samples = std::size_t{1} << sf;
    const double two_n = 2.0 * static_cast<double>(n_samples);
    std::vector<cplx> out(n_samples);
    for (std::size_t n = 0; n < n_samples; ++n) {
        // n^2/(2N) - n/2, reduced mod 1 exactly before scaling by 2*pi.
        const auto nn = static_cast<std::uint64_t>(n);
        const std::uint64_t num = (nn * nn) % (2 * n_samples);
        double phase = static_cast<double>(num) / two_n - 0.5 * static_cast<double>(nn % 2);
        phase -= std::floor(phase);
        out[n] = std::polar(1.0, 2.0 * std::numbers::pi * phase);
    }
    return out;
}

struct ChirpCache {
    std::array<std::once_flag, kMaxSf + 1> once;
    std::array<std::vector<cplx>, kMaxSf + 1> chirps;
};

ChirpCache& cache() {
    static ChirpCache c;
    return c;
}

}  // namespace

const std::vector<cplx>& cached_upchirp(int sf) {
    if (sf < kMinSf || sf > kMaxSf) throw Error(Errc::invalid_sf, "no chirp for this spreading factor");
    ChirpCache& c = cache();
    std::call_once(c.once[static_cast<std::size_t>(sf)],
                   [&] { c.chirps[static_cast<std::size_t>(sf)] = make_upchirp(sf); });
    return c.chirps[static_cast<std::size_t>(sf)];
}

SampleBuffer base_upchirp(const ModemParams& params) {
    return {cached_upchirp(params.sf()), RateTag::baseband};
}

SampleBuffer base_downchirp(const ModemParams& params) {
    SampleBuffer out = base_upchirp(params);
    for (cplx& v : out.samples) v = std::conj(v);
    return out;
}

void append_symbol(std::vector<cplx>& out, std::uint32_t s, const ModemParams& params) {
    const std::vector<cplx>& x0 = cached_upchirp(params.sf());
    const std::size_t n_samples = x0.size();
    if (s >= n_samples) throw Error(Errc::invalid_symbol, "symbol >= N");
    // x_0 is N-periodic, and x_s[n] = x_0[n + s] * conj(x_0[s]).
    const cplx rot = std::conj(x0[s]);
    for (std::size_t n = 0; n < n_samples; ++n) {
        out.push_back(x0[(n + s) & (n_samples - 1)] * rot);
    }
}

SampleBuffer modulate_symbol(SymbolValue s, const ModemParams& params) {
    SampleBuffer out;
    out.samples.reserve(params.n_samples());
    append_symbol(out.samples, s.value(), params);
    return out;
}

}  // namespace lorasdr
