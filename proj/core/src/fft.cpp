#include "lorasdr/fft.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

namespace lorasdr {

namespace {

struct Plan {
    std::vector<std::uint32_t> bitrev;
    std::vector<cplx> twiddle;  // exp(-j2pi k/N), k < N/2
};

std::shared_ptr<const Plan> make_plan(std::size_t n) {
    auto plan = std::make_shared<Plan>();
    unsigned bits = 0;
    while ((std::size_t{1} << bits) < n) ++bits;
    plan->bitrev.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::uint32_t r = 0;
        for (unsigned b = 0; b < bits; ++b) {
            if (i & (std::size_t{1} << b)) r |= 1u << (bits - 1 - b);
        }
        plan->bitrev[i] = r;
    }
    plan->twiddle.resize(n / 2);
    for (std::size_t k = 0; k < n / 2; ++k) {
        plan->twiddle[k] = std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n));
    }
    return plan;
}

const Plan& plan_for(std::size_t n) {
    static std::mutex mu;
    static std::map<std::size_t, std::shared_ptr<const Plan>> plans;
    std::lock_guard lock(mu);
    auto& slot = plans[n];
    if (!slot) slot = make_plan(n);
    return *slot;
}

void transform(std::span<cplx> data, bool inverse) {
    const std::size_t n = data.size();
    if (!is_power_of_two(n)) throw Error(Errc::not_power_of_two, "FFT length " + std::to_string(n));
    if (n == 1) return;
    const Plan& plan = plan_for(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = plan.bitrev[i];
        if (i < j) std::swap(data[i], data[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const std::size_t half = len / 2;
        const std::size_t step = n / len;
        for (std::size_t start = 0; start < n; start += len) {
            for (std::size_t k = 0; k < half; ++k) {
                cplx w = plan.twiddle[k * step];
                if (inverse) w = std::conj(w);
                const cplx a = data[start + k];
                const cplx b = data[start + k + half] * w;
                data[start + k] = a + b;
                data[start + k + half] = a - b;
            }
        }
    }
    if (inverse) {
        const double scale = 1.0 / static_cast<double>(n);
        for (cplx& v : data) v *= scale;
    }
}

}  // namespace

void fft_inplace(std::span<cplx> data) { transform(data, false); }

void ifft_inplace(std::span<cplx> data) { transform(data, true); }

std::vector<cplx> naive_dft(std::span<const cplx> data) {
    const std::size_t n = data.size();
    std::vector<cplx> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        cplx acc{};
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t idx = (k * i) % n;
            acc += data[i] * std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(idx) / static_cast<double>(n));
        }
        out[k] = acc;
    }
    return out;
}

}  // namespace lorasdr
