#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace lorasdr {

using cplx = std::complex<double>;

/// Every failure the library reports carries one of these codes.
enum class Errc {
    invalid_sf,
    invalid_cr,
    invalid_osf,
    invalid_bandwidth,
    invalid_symbol,
    invalid_argument,
    length_mismatch,
    not_power_of_two,
    degenerate_spectrum,
    invalid_payload_length,
    bad_header_checksum,
    invalid_cr_field,
    crc_mismatch,
    truncated_symbol_stream,
    uncorrectable_codeword,
    wrong_block_shape,
    phase_out_of_range,
    malformed_file,
    sample_out_of_range,
    io_error,
};

std::string_view to_string(Errc code) noexcept;

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what);
    explicit Error(Errc code);

    [[nodiscard]] Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

/// Validated modem configuration. Construct through make_params().
class ModemParams {
public:
    [[nodiscard]] int sf() const noexcept { return sf_; }
    [[nodiscard]] std::uint32_t bw() const noexcept { return bw_; }
    [[nodiscard]] int cr_denominator() const noexcept { return cr_; }
    [[nodiscard]] int osf() const noexcept { return osf_; }

    /// Samples (and symbol values) per symbol, 2^sf.
    [[nodiscard]] std::size_t n_samples() const noexcept { return std::size_t{1} << sf_; }
    /// Baseband (Nyquist) sample rate in Hz.
    [[nodiscard]] double f_s() const noexcept { return static_cast<double>(bw_); }
    /// Symbol duration in seconds.
    [[nodiscard]] double t_sym() const noexcept {
        return static_cast<double>(n_samples()) / static_cast<double>(bw_);
    }

    friend bool operator==(const ModemParams&, const ModemParams&) = default;

private:
    friend ModemParams make_params(int, std::int64_t, int, int);
    ModemParams(int sf, std::uint32_t bw, int cr, int osf) : sf_(sf), bw_(bw), cr_(cr), osf_(osf) {}

    int sf_;
    std::uint32_t bw_;
    int cr_;
    int osf_;
};

inline constexpr int kMinSf = 7;
inline constexpr int kMaxSf = 12;

/// Throws Error with invalid_sf / invalid_cr / invalid_osf / invalid_bandwidth.
ModemParams make_params(int sf, std::int64_t bw_hz, int cr_denominator, int osf);

/// A symbol value in [0, N).
class SymbolValue {
public:
    SymbolValue(std::uint32_t value, const ModemParams& params);
    static SymbolValue unchecked(std::uint32_t value) noexcept { return SymbolValue(value); }

    [[nodiscard]] std::uint32_t value() const noexcept { return value_; }
    friend bool operator==(SymbolValue, SymbolValue) = default;

private:
    explicit SymbolValue(std::uint32_t value) noexcept : value_(value) {}
    std::uint32_t value_;
};

enum class RateTag { baseband, oversampled };

struct SampleBuffer {
    std::vector<cplx> samples;
    RateTag rate = RateTag::baseband;

    [[nodiscard]] std::size_t size() const noexcept { return samples.size(); }
    [[nodiscard]] std::span<const cplx> view() const noexcept { return samples; }
};

/// True when the buffer is non-empty and every component is finite.
bool is_valid(const SampleBuffer& buffer) noexcept;

/// Integer plus fractional decomposition of the carrier and timing offsets.
/// CFO is in bins (units of bw/N), STO in baseband samples. A positive STO
/// means the receiver window boundary lags the symbol boundary.
struct OffsetEstimate {
    int l_cfo = 0;
    double lambda_cfo = 0.0;
    int l_sto = 0;
    double lambda_sto = 0.0;

    [[nodiscard]] double cfo_bins() const noexcept { return l_cfo + lambda_cfo; }
    [[nodiscard]] double tau_samples() const noexcept { return l_sto + lambda_sto; }
    [[nodiscard]] double delta_fc_hz(const ModemParams& params) const noexcept {
        return static_cast<double>(params.bw()) / static_cast<double>(params.n_samples()) * cfo_bins();
    }

    /// Splits totals so that both fractional parts lie in (-0.5, 0.5].
    static OffsetEstimate from_totals(double cfo_bins, double tau_samples) noexcept;
};

/// Splits x into an integer and a fraction in (-0.5, 0.5].
std::pair<int, double> split_integer_fraction(double x) noexcept;

/// Maps x mod n onto the signed range [-n/2, n/2).
int signed_residue(std::int64_t x, std::int64_t n) noexcept;

/// Non-negative x mod n.
inline std::int64_t positive_mod(std::int64_t x, std::int64_t n) noexcept {
    const std::int64_t r = x % n;
    return r < 0 ? r + n : r;
}

}  // namespace lorasdr
