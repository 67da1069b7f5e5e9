#include "lorasdr/link_sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <thread>

#include "lorasdr/dfe.hpp"

namespace lorasdr {

std::uint64_t derive_seed(std::initializer_list<std::uint64_t> keys) {
    std::vector<std::uint32_t> words;
    for (std::uint64_t k : keys) {
        words.push_back(static_cast<std::uint32_t>(k));
        words.push_back(static_cast<std::uint32_t>(k >> 32));
    }
    std::seed_seq seq(words.begin(), words.end());
    std::array<std::uint32_t, 2> out{};
    seq.generate(out.begin(), out.end());
    return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

namespace {

std::uint64_t snr_key(double snr_db) {
    if (std::isinf(snr_db)) return 0xFFFFFFFFull;
    return static_cast<std::uint64_t>(std::llround(snr_db * 1000.0) + (1ll << 40));
}

}  // namespace

TrialOutcome run_trial(const LinkConfig& cfg, std::uint64_t seed, std::uint64_t trial) {
    const ModemParams params = make_params(cfg.sf, cfg.bw, cfg.cr_denominator, cfg.osf);
    const auto sf = static_cast<std::uint64_t>(cfg.sf);
    std::mt19937_64 rng(derive_seed({seed, sf, trial, 1}));

    TrialOutcome out;
    std::size_t len = cfg.payload_len;
    if (cfg.random_length) len = std::uniform_int_distribution<std::size_t>(1, 255)(rng);
    out.sent.resize(len);
    std::uniform_int_distribution<int> byte(0, 255);
    for (auto& b : out.sent) b = static_cast<std::uint8_t>(byte(rng));

    const std::vector<double> taps = cfg.taps.empty() ? dfe::default_taps(cfg.osf) : cfg.taps;
    channel::ChannelConfig& ch = out.truth;
    ch.osf = cfg.osf;
    ch.snr_db = cfg.snr_db;
    ch.lead_in_symbols = cfg.lead_in_symbols;
    ch.tail_symbols = cfg.tail_symbols;
    ch.noise_calibration = dfe::noise_calibration(taps, cfg.osf);
    ch.seed = derive_seed({seed, sf, trial, 2, snr_key(cfg.snr_db)});
    if (cfg.offsets == OffsetModel::realistic) {
        channel::draw_realistic_offsets(ch, params, rng);
    } else if (cfg.offsets == OffsetModel::grid) {
        channel::draw_grid_offsets(ch, cfg.grid_limit, rng);
    }

    const SampleBuffer frame = transmit_frame(out.sent, params, {true, cfg.netids});
    channel::ChannelStream stream(frame, ch, params);

    const std::size_t n = params.n_samples();
    dfe::Dfe front(dfe::DfeConfig{taps, cfg.osf, n, 0, cfg.quantize});
    RxConfig rx_cfg;
    rx_cfg.netids = cfg.netids;
    rx_cfg.front_end_delay_ticks = std::llround(dfe::group_delay(taps));
    Receiver rx(params, rx_cfg);
    rx.set_current_phase(0);

    if (cfg.perfect_sync) {
        const std::int64_t start_tick = channel::frame_start_sample(ch, params) + rx_cfg.front_end_delay_ticks;
        front.set_phase(rx.arm(start_tick, ch.cfo_bins()));
    }

    std::vector<cplx> chunk(n * static_cast<std::size_t>(cfg.osf));
    while (!stream.done() && !out.success) {
        const std::size_t got = stream.read(chunk);
        front.push(std::span(chunk).first(got));
        while (auto window = front.pop_window()) {
            const RxStep step = rx.push_window(*window);
            if (step.set_phase) front.set_phase(*step.set_phase);
            if (step.result && step.result->status != RxStatus::false_alarm) {
                out.status = step.result->status;
                out.estimate = step.result->offsets;
                if (step.result->status == RxStatus::ok && step.result->payload == out.sent) {
                    out.success = true;
                    break;
                }
            }
        }
    }
    out.detections = rx.detections();
    return out;
}

std::optional<RxResult> receive_capture(std::span<const cplx> oversampled, const ModemParams& params,
                                        const CaptureOptions& options) {
    const int osf = params.osf();
    const std::vector<double> taps = options.taps.empty() ? dfe::default_taps(osf) : options.taps;
    const std::size_t n = params.n_samples();
    dfe::Dfe front(dfe::DfeConfig{taps, osf, n, 0, options.quantize});
    RxConfig rx_cfg;
    rx_cfg.netids = options.netids;
    rx_cfg.front_end_delay_ticks = std::llround(dfe::group_delay(taps));
    Receiver rx(params, rx_cfg);
    rx.set_current_phase(0);

    const std::vector<cplx> silence(2 * n * static_cast<std::size_t>(osf));
    const std::size_t chunk = n * static_cast<std::size_t>(osf);
    for (int part = 0; part < 2; ++part) {
        const std::span<const cplx> src = part == 0 ? oversampled : std::span<const cplx>(silence);
        for (std::size_t pos = 0; pos < src.size(); pos += chunk) {
            front.push(src.subspan(pos, std::min(chunk, src.size() - pos)));
            while (auto window = front.pop_window()) {
                RxStep step = rx.push_window(*window);
                if (step.set_phase) front.set_phase(*step.set_phase);
                if (step.result && step.result->status != RxStatus::false_alarm) return std::move(step.result);
            }
        }
    }
    if (rx.phase() == RxPhase::detect) return std::nullopt;
    RxResult cut;
    cut.status = rx.phase() == RxPhase::sync ? RxStatus::sync_failed : RxStatus::bad_header;
    cut.detail = "capture ended inside the frame";
    return cut;
}

void parallel_for(std::uint64_t count, unsigned threads, const std::function<void(std::uint64_t)>& fn) {
    if (threads <= 1 || count < 2) {
        for (std::uint64_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::uint64_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (std::uint64_t i = next++; i < count; i = next++) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

io::PerRow run_per_point(const LinkConfig& cfg, std::uint64_t seed, std::uint64_t trials, unsigned threads) {
    std::atomic<std::uint64_t> errors{0};
    parallel_for(trials, threads, [&](std::uint64_t i) {
        if (!run_trial(cfg, seed, i).success) ++errors;
    });
    io::PerRow row;
    row.snr_db = cfg.snr_db;
    row.packets = trials;
    row.errors = errors.load();
    row.per = trials ? static_cast<double>(row.errors) / static_cast<double>(trials) : 0.0;
    return row;
}

}  // namespace lorasdr
