#include <benchmark/benchmark.h>

#include <random>

#include "lorasdr/chirp.hpp"
#include "lorasdr/codec.hpp"
#include "lorasdr/demod.hpp"
#include "lorasdr/dfe.hpp"
#include "lorasdr/fft.hpp"
#include "lorasdr/frame.hpp"
#include "lorasdr/link_sim.hpp"

using namespace lorasdr;

namespace {

std::vector<cplx> noise(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    std::vector<cplx> v(n);
    for (auto& x : v) x = {g(rng), g(rng)};
    return v;
}

}  // namespace

static void Fft(benchmark::State& state) {
    const auto input = noise(static_cast<std::size_t>(state.range(0)), 1);
    std::vector<cplx> work;
    for (auto _ : state) {
        work = input;
        fft_inplace(work);
        benchmark::DoNotOptimize(work.data());
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(Fft)->RangeMultiplier(2)->Range(128, 4096)->Complexity(benchmark::oNLogN);

static void DemodSymbol(benchmark::State& state) {
    const ModemParams p = make_params(static_cast<int>(state.range(0)), 125000, 8, 1);
    const auto down = base_downchirp(p).samples;
    const auto window = modulate_symbol(SymbolValue(5, p), p).samples;
    for (auto _ : state) {
        auto d = demod_window(window, down);
        benchmark::DoNotOptimize(d.symbol);
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(DemodSymbol)->DenseRange(7, 12);

static void EncodeFrame(benchmark::State& state) {
    const ModemParams p = make_params(7, 125000, 8, 1);
    std::vector<std::uint8_t> payload(static_cast<std::size_t>(state.range(0)), 0xA5);
    for (auto _ : state) {
        auto s = codec::encode_frame(payload, p);
        benchmark::DoNotOptimize(s.data());
    }
    state.SetBytesProcessed(state.iterations() * state.range(0));
}
BENCHMARK(EncodeFrame)->Arg(11)->Arg(255);

static void DecodeFrame(benchmark::State& state) {
    const ModemParams p = make_params(7, 125000, 8, 1);
    std::vector<std::uint8_t> payload(static_cast<std::size_t>(state.range(0)), 0xA5);
    const auto symbols = codec::encode_frame(payload, p);
    for (auto _ : state) {
        auto d = codec::decode_frame(symbols, p);
        benchmark::DoNotOptimize(d.payload.data());
    }
    state.SetBytesProcessed(state.iterations() * state.range(0));
}
BENCHMARK(DecodeFrame)->Arg(11)->Arg(255);

// One SF7 window's worth of oversampled input through filter and decimator.
static void DfeWindow(benchmark::State& state) {
    const int osf = static_cast<int>(state.range(0));
    dfe::Dfe front(dfe::DfeConfig::make_default(osf, 128, true));
    const auto input = noise(128 * static_cast<std::size_t>(osf), 2);
    for (auto _ : state) {
        front.push(input);
        auto w = front.pop_window();
        benchmark::DoNotOptimize(w);
    }
    state.SetItemsProcessed(state.iterations() * 128);
}
BENCHMARK(DfeWindow)->Arg(1)->Arg(4)->Arg(16);

static void ReceiverWindow(benchmark::State& state) {
    const ModemParams p = make_params(7, 125000, 8, 1);
    const auto windows = noise(128 * 64, 3);
    Receiver rx(p);
    std::size_t i = 0;
    for (auto _ : state) {
        auto step = rx.push_window(std::span(windows).subspan((i++ % 64) * 128, 128));
        benchmark::DoNotOptimize(step);
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(ReceiverWindow);

static void LinkTrial(benchmark::State& state) {
    LinkConfig cfg;
    cfg.sf = static_cast<int>(state.range(0));
    cfg.snr_db = -5.0;
    std::uint64_t t = 0;
    for (auto _ : state) {
        auto o = run_trial(cfg, 4, t++);
        benchmark::DoNotOptimize(o.success);
    }
}
BENCHMARK(LinkTrial)->Arg(7)->Arg(8)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
