#include <cmath>

#include "doctest.h"
#include "lorasdr/chirp.hpp"
#include "lorasdr/demod.hpp"
#include "lorasdr/fft.hpp"
#include "support/oracles.hpp"
#include "support/property.hpp"

using namespace lorasdr;

namespace {

std::vector<cplx> random_vector(prop::Gen& g, std::size_t n) {
    std::vector<cplx> v(n);
    for (auto& x : v) x = {g.gauss(), g.gauss()};
    return v;
}

double relative_l2(std::span<const cplx> a, std::span<const cplx> b) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += std::norm(a[i] - b[i]);
        den += std::norm(b[i]);
    }
    return std::sqrt(num / den);
}

// Received samples [k0, k0 + N) of repeated copies of symbol s under integer offsets.
std::vector<cplx> shifted_window(std::uint32_t s, std::uint32_t n, int l_sto, int l_cfo) {
    const std::vector<oracle::Segment> segs(4, oracle::Segment{s, false, static_cast<double>(n)});
    std::vector<cplx> w(n);
    for (std::uint32_t k = 0; k < n; ++k) w[k] = oracle::received_sample(segs, n, n + k, 0, l_sto, l_cfo);
    return w;
}

}  // namespace

TEST_CASE("FFT matches the naive DFT") {
    for (std::size_t n : {128u, 256u, 512u}) {
        prop::Gen g(n);
        for (int rep = 0; rep < 5; ++rep) {
            const auto x = random_vector(g, n);
            std::vector<cplx> fast = x;
            fft_inplace(fast);
            CHECK(relative_l2(fast, oracle::naive_dft(x)) < 1e-6);
            CHECK(relative_l2(lorasdr::naive_dft(x), oracle::naive_dft(x)) < 1e-9);
            ifft_inplace(fast);
            CHECK(relative_l2(fast, x) < 1e-12);
        }
    }
}

TEST_CASE("Parseval with the unnormalized convention") {
    prop::for_all(20, 41, [](prop::Gen& g) {
        const std::size_t n = std::size_t{1} << g.integer(7, 12);
        const auto x = random_vector(g, n);
        const DftSpectrum s = dft_spectrum(x);
        double time = 0.0, freq = 0.0;
        for (const cplx& v : x) time += std::norm(v);
        for (const cplx& v : s.bins) freq += std::norm(v);
        CHECK(freq == doctest::Approx(static_cast<double>(n) * time).epsilon(1e-6));
    });
}

TEST_CASE("dechirp") {
    const ModemParams p = make_params(7, 125000, 8, 1);
    const auto up = base_upchirp(p).samples;
    const auto down = base_downchirp(p).samples;
    for (const cplx& v : dechirp(up, down)) CHECK(std::abs(v - cplx(1.0, 0.0)) < 1e-12);

    const auto x37 = modulate_symbol(SymbolValue(37, p), p).samples;
    const auto tone = dechirp(x37, down);
    // Pure tone of frequency 37/128, up to the constant phase of the shift.
    const cplx c = tone[0];
    for (std::size_t n = 0; n < 128; ++n) {
        CHECK(std::abs(tone[n] - c * std::polar(1.0, 2.0 * std::numbers::pi * 37.0 * static_cast<double>(n) / 128.0)) <
              1e-9);
    }
    CHECK(dft_spectrum(tone).peak_index == 37);

    const std::vector<cplx> zeros(128);
    for (const cplx& v : dechirp(zeros, down)) CHECK(v == cplx{});
    CHECK_THROWS_AS(dechirp(std::span(up).first(64), down), Error);
}

TEST_CASE("dft_spectrum guards its length") {
    CHECK_THROWS_AS(dft_spectrum(std::vector<cplx>(100)), Error);
    CHECK_THROWS_AS(dft_spectrum(std::vector<cplx>(64)), Error);
    CHECK_THROWS_AS(dft_spectrum(std::vector<cplx>(8192)), Error);
    const DftSpectrum z = dft_spectrum(std::vector<cplx>(256));
    CHECK(z.peak_magnitude == 0.0);
    CHECK(z.peak_index == 0);
    for (const cplx& v : z.bins) CHECK(v == cplx{});
}

TEST_CASE("noiseless demodulation is exact at SF7") {
    const ModemParams p = make_params(7, 125000, 8, 1);
    const auto down = base_downchirp(p).samples;
    for (std::uint32_t s = 0; s < 128; ++s) {
        const SymbolDecision d = demod_window(modulate_symbol(SymbolValue(s, p), p).samples, down);
        CHECK(d.symbol.value() == s);
        CHECK(d.spectrum.peak_magnitude == doctest::Approx(128.0).epsilon(1e-9));
        for (std::size_t k = 0; k < 128; ++k) {
            if (k != s) CHECK(std::abs(d.spectrum.bins[k]) < 1e-6 * 128);
        }
    }
}

TEST_CASE("noiseless demodulation, sampled symbols at high SF") {
    prop::for_all(40, 42, [](prop::Gen& g) {
        const ModemParams p = make_params(g.integer(10, 12), 125000, 8, 1);
        const std::uint32_t s = g.below(static_cast<std::uint32_t>(p.n_samples()));
        const SymbolDecision d = demod_window(modulate_symbol(SymbolValue(s, p), p).samples, base_downchirp(p).samples);
        CHECK(d.symbol.value() == s);
    });
}

TEST_CASE("integer offsets move the peak to s + L_STO + L_CFO") {
    const ModemParams p = make_params(7, 125000, 8, 1);
    const auto down = base_downchirp(p).samples;
    prop::for_all(300, 43, [&](prop::Gen& g) {
        const std::uint32_t s = g.below(128);
        const int l_sto = g.integer(-10, 10);
        const int l_cfo = g.integer(-10, 10);
        const SymbolDecision d = demod_window(shifted_window(s, 128, l_sto, l_cfo), down);
        CHECK(d.symbol.value() == static_cast<std::uint32_t>(positive_mod(s + l_sto + l_cfo, 128)));
        CHECK(d.spectrum.peak_magnitude == doctest::Approx(128.0).epsilon(1e-6));
    });
}

TEST_CASE("ties go to the lowest bin") {
    DftSpectrum s;
    s.bins.assign(128, cplx{});
    s.bins[9] = {0, 2};
    s.bins[4] = {2, 0};
    s.bins[100] = {-2, 0};
    update_peak(s);
    CHECK(s.peak_index == 4);
    CHECK(s.peak_magnitude == 2.0);
}

TEST_CASE("downchirp dechirped with the upchirp gives one peak") {
    const ModemParams p = make_params(8, 125000, 8, 1);
    const DftSpectrum s = dft_spectrum(dechirp(base_downchirp(p).samples, base_upchirp(p).samples));
    CHECK(s.peak_magnitude == doctest::Approx(256.0).epsilon(1e-9));
    int above = 0;
    for (const cplx& v : s.bins) above += std::abs(v) > 1e-6 * 256;
    CHECK(above == 1);
}

TEST_CASE("circular window demodulation") {
    const ModemParams p = make_params(7, 125000, 8, 1);
    const auto down = base_downchirp(p).samples;
    const auto xa = modulate_symbol(SymbolValue(11, p), p).samples;
    const auto xb = modulate_symbol(SymbolValue(90, p), p).samples;

    CircularWindow w(128);
    CHECK(w.capacity() == 256);
    w.write_symbol(0, xa);
    w.write_symbol(1, xb);
    CHECK(demod_symbol(w, 0, down).symbol.value() == 11);
    CHECK(demod_symbol(w, 128, down).symbol.value() == demod_window(xb, down).symbol.value());
    // Writing slot 2 overwrites slot 0; a read from 200 wraps through two
    // copies of x_b and sees it cyclically shifted by 72.
    w.write_symbol(2, xb);
    CHECK(demod_symbol(w, 200, down).symbol.value() == (90 + 72) % 128);
    CHECK_THROWS_AS(w.write_symbol(0, std::span(xa).first(10)), Error);
}

TEST_CASE("misaligned read from the circular window recovers the symbol") {
    // Buffer holds [tail of x_a | x_b | head of x_c], x_b starting at index L.
    const ModemParams p = make_params(7, 125000, 8, 1);
    const auto down = base_downchirp(p).samples;
    prop::for_all(100, 44, [&](prop::Gen& g) {
        const std::uint32_t a = g.below(128), b = g.below(128), c = g.below(128);
        const int l = g.integer(0, 127);
        const std::vector<oracle::Segment> segs{{a, false, 128}, {b, false, 128}, {c, false, 128}};
        CircularWindow w(128);
        for (std::size_t slot = 0; slot < 2; ++slot) {
            std::vector<cplx> win(128);
            for (std::size_t k = 0; k < 128; ++k) {
                win[k] = oracle::received_sample(segs, 128, static_cast<long double>(128 * slot + k), 0, 128 - l, 0);
            }
            w.write_symbol(slot, win);
        }
        CHECK(demod_symbol(w, static_cast<std::size_t>(l), down).symbol.value() == b);
    });
}
