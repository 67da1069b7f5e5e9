#pragma once

#include <array>
#include <deque>
#include <optional>

#include "lorasdr/codec.hpp"
#include "lorasdr/demod.hpp"

namespace lorasdr {

struct PreambleConfig {
    std::uint32_t netid0 = 8;
    std::uint32_t netid1 = 16;
};

inline constexpr int kPreambleUpchirps = 8;

/// Preamble length in quarter symbols: 8 up, 2 netid, 2.25 down.
inline constexpr std::size_t kPreambleQuarters = 49;

struct Preamble {
    /// Symbol values of the upchirp part (8 zeros, then the two netids).
    std::vector<std::uint32_t> up_symbols;
    /// Full downchirps, then a quarter.
    double downchirps = 2.25;
    SampleBuffer samples;
};

Preamble build_preamble(const ModemParams& params, const PreambleConfig& netids = {});

struct TxOptions {
    bool has_crc = true;
    PreambleConfig netids;
};

/// Preamble followed by the modulated frame symbols, baseband at f_S.
SampleBuffer transmit_frame(std::span<const std::uint8_t> payload, const ModemParams& params,
                            const TxOptions& options = {});

/// Sample count of transmit_frame's output.
std::size_t frame_sample_count(std::size_t payload_len, const ModemParams& params, bool has_crc = true);

/// Data bits (4 per codeword) carried per second over the payload section,
/// i.e. the symbols after the header, as generated.
double raw_data_rate(std::size_t payload_len, const ModemParams& params, bool has_crc = true);

enum class RxPhase { detect, sync, header, payload, done };

enum class RxStatus { ok, crc_mismatch, bad_header, sync_failed, false_alarm };

std::string_view to_string(RxStatus status) noexcept;

struct RxConfig {
    PreambleConfig netids;
    /// Delay of the front end in oversampled ticks; used only to report STO
    /// relative to the channel input.
    std::int64_t front_end_delay_ticks = 0;
    /// Windows after detection before giving up on alignment.
    int sync_timeout_windows = 14;
};

struct RxResult {
    RxStatus status = RxStatus::false_alarm;
    codec::Bytes payload;
    codec::FrameHeader header;
    OffsetEstimate offsets;
    /// Oversampled tick of the first preamble sample at the DFE output.
    std::int64_t frame_start_tick = 0;
    std::string detail;
};

struct RxStep {
    /// DFE decimation phase to use from the next window on.
    std::optional<int> set_phase;
    std::optional<RxResult> result;
};

/// Streaming receiver. Consumes one N-sample window per call and keeps only a
/// two-symbol circular buffer of samples.
class Receiver {
public:
    explicit Receiver(const ModemParams& params, RxConfig config = {});

    RxStep push_window(std::span<const cplx> window);

    /// Skips detection and synchronization using known offsets. Returns the
    /// decimation phase the DFE must use from the first window on.
    int arm(std::int64_t frame_start_tick, double cfo_bins);

    /// Phase the DFE is running at when the next window is produced.
    void set_current_phase(int phase);

    [[nodiscard]] RxPhase phase() const noexcept { return state_; }
    [[nodiscard]] std::uint64_t windows_seen() const noexcept { return windows_; }
    [[nodiscard]] std::uint64_t detections() const noexcept { return detections_; }

private:
    struct Stored {
        std::int64_t window;
        std::vector<double> up_mag;
        DftSpectrum up;
        DftSpectrum down;
    };
    struct Alignment {
        double llr = -1e300;
        std::int64_t d0 = 0;
        std::uint32_t s_down = 0;
        int l_cfo = 0;
        int l_rx = 0;
        double half = 0.0;
    };

    void reset();
    RxResult abort(RxStatus status, std::string detail);
    void step_detect(std::span<const cplx> window, RxStep& step);
    void step_sync(std::span<const cplx> window, RxStep& step);
    void read_symbols(RxStep& step);
    Alignment best_alignment() const;
    double hypothesis_llr(std::int64_t d0, std::uint32_t s_down, bool netid_only) const;
    void refine_alignment(Alignment& a);
    void finish_sync(Alignment a, RxStep& step);
    void command_phase(int phase, RxStep& step);

    ModemParams params_;
    RxConfig cfg_;
    std::size_t n_;
    int osf_;
    std::vector<cplx> ref_detect_;
    CircularWindow circ_;

    RxPhase state_ = RxPhase::detect;
    std::uint64_t windows_ = 0;
    std::uint64_t detections_ = 0;
    std::int64_t w_ = -1;
    int phase_prev_ = 0;
    int phase_cur_ = 0;
    int phase_next_ = 0;

    std::deque<std::uint32_t> decisions_;
    std::deque<DftSpectrum> spectra_;

    // sync
    std::int64_t w_det_ = 0;
    std::int64_t w_corr_ = 0;
    std::uint32_t v_ = 0;
    double lambda_cfo_ = 0.0;
    std::vector<cplx> ref_up_;
    std::vector<cplx> ref_down_;
    int sync_phase_ = 0;
    std::uint32_t s_up_ = 0;
    double sigma2_ = 1.0;
    double amp_ = 1.0;
    std::vector<Stored> stored_;

    // header / payload
    std::int64_t header_tick_ = 0;
    int l_cfo_ = 0;
    OffsetEstimate offsets_;
    std::vector<std::uint32_t> symbols_;
    std::size_t symbols_expected_ = 0;
    codec::FrameHeader header_;
};

}  // namespace lorasdr
