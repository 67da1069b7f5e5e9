#include <cmath>
#include <random>

#include "doctest.h"
#include "lorasdr/channel.hpp"
#include "lorasdr/chirp.hpp"
#include "lorasdr/frame.hpp"
#include "lorasdr/link_sim.hpp"
#include "lorasdr/sync.hpp"
#include "support/property.hpp"

using namespace lorasdr;

namespace {

std::span<const cplx> window_at(const SampleBuffer& b, std::size_t index, std::size_t n) {
    return b.view().subspan(index * n, n);
}

// Baseband frame with silence around it, as a capture at R = 1.
std::vector<cplx> padded(const SampleBuffer& frame, std::size_t before, std::size_t after) {
    std::vector<cplx> out(before, cplx{});
    out.insert(out.end(), frame.samples.begin(), frame.samples.end());
    out.resize(out.size() + after);
    return out;
}

}  // namespace

TEST_CASE("preamble layout at SF7") {
    const ModemParams p = make_params(7, 125000, 8, 1);
    const Preamble pre = build_preamble(p);
    CHECK(pre.samples.size() == 1568);
    CHECK(pre.up_symbols == std::vector<std::uint32_t>{0, 0, 0, 0, 0, 0, 0, 0, 8, 16});
    CHECK(pre.downchirps == 2.25);

    const auto up = base_upchirp(p).samples;
    const auto down = base_downchirp(p).samples;
    for (std::size_t w = 0; w < 8; ++w) CHECK(demod_window(window_at(pre.samples, w, 128), down).symbol.value() == 0);
    CHECK(demod_window(window_at(pre.samples, 8, 128), down).symbol.value() == 8);
    CHECK(demod_window(window_at(pre.samples, 9, 128), down).symbol.value() == 16);
    for (std::size_t w = 10; w < 12; ++w) {
        const SymbolDecision d = demod_window(window_at(pre.samples, w, 128), up);
        CHECK(d.symbol.value() == 0);
        CHECK(d.spectrum.peak_magnitude == doctest::Approx(128.0).epsilon(1e-9));
    }
}

TEST_CASE("custom network ids and their range") {
    const ModemParams p = make_params(8, 125000, 6, 1);
    const Preamble pre = build_preamble(p, {3, 200});
    CHECK(pre.up_symbols[8] == 3);
    CHECK(pre.up_symbols[9] == 200);
    CHECK(pre.samples.size() == 49 * 256 / 4);
    try {
        build_preamble(p, {256, 16});
        FAIL("expected invalid_symbol");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::invalid_symbol);
    }
}

TEST_CASE("frame duration is preamble plus header plus payload symbols") {
    prop::for_all(60, 61, [](prop::Gen& g) {
        const int sf = g.integer(7, 12);
        const int cr = g.integer(6, 8);
        const bool crc = g.coin();
        const std::size_t len = static_cast<std::size_t>(g.integer(1, 255));
        const ModemParams p = make_params(sf, 125000, cr, 1);
        const SampleBuffer tx = transmit_frame(g.bytes(len), p, {crc, {}});
        const std::size_t n = p.n_samples();
        const std::size_t k = codec::payload_symbol_count(len, cr, crc, sf);
        CHECK(tx.size() == frame_sample_count(len, p, crc));
        CHECK(static_cast<double>(tx.size()) == doctest::Approx((12.25 + 8.0 + static_cast<double>(k)) * n));
        CHECK(tx.rate == RateTag::baseband);
        CHECK(is_valid(tx));
    });
}

TEST_CASE("transmit_frame rejects an empty payload") {
    const ModemParams p = make_params(7, 125000, 8, 1);
    try {
        transmit_frame({}, p);
        FAIL("expected invalid_payload_length");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::invalid_payload_length);
    }
}

TEST_CASE("raw data rate") {
    const ModemParams p7 = make_params(7, 125000, 8, 1);
    const ModemParams p8 = make_params(8, 125000, 8, 1);
    // 4 data bits per SF-bit codeword spread over 8 symbols.
    CHECK(raw_data_rate(11, p7) == doctest::Approx(7.0 * 4.0 / 8.0 / p7.t_sym()));
    CHECK(raw_data_rate(11, p8) == doctest::Approx(8.0 * 4.0 / 8.0 / p8.t_sym()));
    CHECK(raw_data_rate(11, make_params(7, 125000, 6, 1)) > raw_data_rate(11, p7));
}

TEST_CASE("loopback at R = 1 without impairments") {
    prop::for_all(24, 62, [](prop::Gen& g) {
        const int sf = g.integer(7, 9);
        const int cr = g.integer(6, 8);
        const ModemParams p = make_params(sf, 125000, cr, 1);
        const auto payload = g.bytes(static_cast<std::size_t>(g.integer(1, 40)));
        const SampleBuffer tx = transmit_frame(payload, p);
        const std::size_t n = p.n_samples();
        const auto capture = padded(tx, 2 * n, n);
        const auto r = receive_capture(capture, p);
        REQUIRE(r.has_value());
        CHECK(r->status == RxStatus::ok);
        CHECK(r->payload == payload);
        CHECK(r->header.cr_denominator == cr);
        CHECK(r->header.payload_len == static_cast<int>(payload.size()));
        CHECK(r->offsets.l_cfo == 0);
        CHECK(std::abs(r->offsets.lambda_cfo) < 1e-6);
        CHECK(signed_residue(r->offsets.l_sto, static_cast<std::int64_t>(n)) == 0);
        CHECK(r->frame_start_tick == static_cast<std::int64_t>(2 * n));
    });
}

TEST_CASE("known offsets through the channel and front end are recovered") {
    const ModemParams p = make_params(7, 125000, 8, 16);
    const std::vector<std::uint8_t> payload{'h', 'e', 'l', 'l', 'o', ' ', 'w', 'o', 'r', 'l', 'd'};
    channel::ChannelConfig ch;
    ch.osf = 16;
    ch.l_cfo = 3;
    ch.lambda_cfo = 0.25;
    ch.l_sto = 5;
    ch.lambda_sto = -0.1875;
    ch.lead_in_symbols = 1;
    ch.tail_symbols = 2;
    channel::ChannelStream stream(transmit_frame(payload, p), ch, p);
    std::vector<cplx> capture(stream.total_samples());
    stream.read(capture);

    const auto r = receive_capture(capture, p);
    REQUIRE(r.has_value());
    CHECK(r->status == RxStatus::ok);
    CHECK(r->payload == payload);
    CHECK(r->offsets.l_cfo == 3);
    CHECK(std::abs(r->offsets.lambda_cfo - 0.25) < 1.0 / 32.0);
    CHECK(signed_residue(r->offsets.l_sto - 5, 128) == 0);
    CHECK(std::abs(r->offsets.lambda_sto + 0.1875) < 1.0 / 32.0);
    // The frame start seen by the receiver is the channel's, delayed by the
    // 64-tick filter.
    CHECK(r->frame_start_tick == channel::frame_start_sample(ch, p) + 64);
}

TEST_CASE("offset grid at R = 16 through the full link") {
    LinkConfig cfg;
    cfg.osf = 16;
    cfg.offsets = OffsetModel::grid;
    cfg.grid_limit = 10;
    for (std::uint64_t t = 0; t < 12; ++t) {
        const TrialOutcome o = run_trial(cfg, 63, t);
        INFO("trial " << t << " truth cfo " << o.truth.cfo_bins() << " sto " << o.truth.l_sto + o.truth.lambda_sto);
        CHECK(o.success);
        const double cfo_err = o.estimate.cfo_bins() - o.truth.cfo_bins();
        const double sto_err =
            std::remainder(o.estimate.tau_samples() - (o.truth.l_sto + o.truth.lambda_sto), 128.0);
        CHECK(std::abs(cfo_err) < 1.0 / 32.0);
        CHECK(std::abs(sto_err) < 1.0 / 32.0 + 1e-9);
    }
}

TEST_CASE("pure noise yields no packet") {
    const ModemParams p = make_params(7, 125000, 8, 1);
    Receiver rx(p);
    std::mt19937_64 rng(64);
    std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
    constexpr int kWindows = 10000;
    int packets = 0;
    std::vector<cplx> w(128);
    for (int i = 0; i < kWindows; ++i) {
        for (auto& v : w) v = {gauss(rng), gauss(rng)};
        const RxStep step = rx.push_window(w);
        if (step.result && step.result->status == RxStatus::ok) ++packets;
    }
    CHECK(packets == 0);
    CHECK(rx.windows_seen() == kWindows);
    // Three decisions within +-1 of a common value: 19 / N^2 per window.
    const double rate = static_cast<double>(rx.detections()) / kWindows;
    const double expected = 19.0 / (128.0 * 128.0);
    MESSAGE("detections per window " << rate << ", analytic " << expected);
    CHECK(rate < 3.0 * expected);
}

TEST_CASE("a capture that ends inside the frame") {
    const ModemParams p = make_params(7, 125000, 8, 1);
    const SampleBuffer tx = transmit_frame(std::vector<std::uint8_t>(30, 0x5A), p);
    const auto full = padded(tx, 128, 0);
    const auto cut = std::span(full).first(128 + 1568 + 4 * 128);
    const auto r = receive_capture(cut, p);
    REQUIRE(r.has_value());
    CHECK(r->status != RxStatus::ok);

    const std::vector<cplx> silence(4096);
    CHECK_FALSE(receive_capture(silence, p).has_value());
}

TEST_CASE("status names") {
    CHECK(to_string(RxStatus::ok) == "ok");
    CHECK(to_string(RxStatus::crc_mismatch) == "crc_mismatch");
    CHECK(to_string(RxStatus::false_alarm) == "no_preamble");
    CHECK(to_string(RxStatus::sync_failed) == "sync_failed");
    CHECK(to_string(RxStatus::bad_header) == "bad_header");
}
