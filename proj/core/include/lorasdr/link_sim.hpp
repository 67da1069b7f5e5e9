#pragma once

#include <functional>
#include <initializer_list>

#include "lorasdr/channel.hpp"
#include "lorasdr/frame.hpp"
#include "lorasdr/iq_io.hpp"

namespace lorasdr {

/// Mixes the values through std::seed_seq into one 64-bit seed.
std::uint64_t derive_seed(std::initializer_list<std::uint64_t> keys);

enum class OffsetModel { none, realistic, grid };

struct LinkConfig {
    int sf = 7;
    std::int64_t bw = 125000;
    int cr_denominator = 8;
    int osf = 16;
    std::size_t payload_len = 11;
    /// Draw the length uniformly from [1, 255] instead.
    bool random_length = false;
    double snr_db = std::numeric_limits<double>::infinity();
    OffsetModel offsets = OffsetModel::realistic;
    int grid_limit = 10;
    bool perfect_sync = false;
    bool quantize = false;
    int lead_in_symbols = 1;
    int tail_symbols = 2;
    /// Empty selects dfe::default_taps.
    std::vector<double> taps;
    PreambleConfig netids;
};

struct TrialOutcome {
    bool success = false;
    std::optional<RxStatus> status;
    codec::Bytes sent;
    channel::ChannelConfig truth;
    OffsetEstimate estimate;
    std::uint64_t detections = 0;
};

/// One packet through channel, DFE and receiver. Deterministic in (seed, trial).
TrialOutcome run_trial(const LinkConfig& cfg, std::uint64_t seed, std::uint64_t trial);

/// Runs trials packets and counts failures. Result independent of threads.
io::PerRow run_per_point(const LinkConfig& cfg, std::uint64_t seed, std::uint64_t trials, unsigned threads = 1);

struct CaptureOptions {
    bool quantize = false;
    /// Empty selects dfe::default_taps.
    std::vector<double> taps;
    PreambleConfig netids;
};

/// Runs a recorded capture at params.osf() through the DFE and receiver and
/// returns the first packet verdict. Two symbols of silence are appended so
/// the filter flushes. nullopt when no preamble was found; a capture cut
/// short inside a frame reports sync_failed or bad_header.
std::optional<RxResult> receive_capture(std::span<const cplx> oversampled, const ModemParams& params,
                                        const CaptureOptions& options = {});

/// Calls fn(i) for i in [0, count) on up to threads workers.
void parallel_for(std::uint64_t count, unsigned threads, const std::function<void(std::uint64_t)>& fn);

}  // namespace lorasdr
