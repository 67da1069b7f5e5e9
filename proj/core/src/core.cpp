#include "lorasdr/core.hpp"

#include <cmath>
#include <limits>
#include <tuple>

namespace lorasdr {

std::string_view to_string(Errc code) noexcept {
    switch (code) {
        case Errc::invalid_sf: return "invalid_sf";
        case Errc::invalid_cr: return "invalid_cr";
        case Errc::invalid_osf: return "invalid_osf";
        case Errc::invalid_bandwidth: return "invalid_bandwidth";
        case Errc::invalid_symbol: return "invalid_symbol";
        case Errc::invalid_argument: return "invalid_argument";
        case Errc::length_mismatch: return "length_mismatch";
        case Errc::not_power_of_two: return "not_power_of_two";
        case Errc::degenerate_spectrum: return "degenerate_spectrum";
        case Errc::invalid_payload_length: return "invalid_payload_length";
        case Errc::bad_header_checksum: return "bad_header_checksum";
        case Errc::invalid_cr_field: return "invalid_cr_field";
        case Errc::crc_mismatch: return "crc_mismatch";
        case Errc::truncated_symbol_stream: return "truncated_symbol_stream";
        case Errc::uncorrectable_codeword: return "uncorrectable_codeword";
        case Errc::wrong_block_shape: return "wrong_block_shape";
        case Errc::phase_out_of_range: return "phase_out_of_range";
        case Errc::malformed_file: return "malformed_file";
        case Errc::sample_out_of_range: return "sample_out_of_range";
        case Errc::io_error: return "io_error";
    }
    return "unknown";
}

Error::Error(Errc code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

Error::Error(Errc code) : std::runtime_error(std::string(to_string(code))), code_(code) {}

ModemParams make_params(int sf, std::int64_t bw_hz, int cr_denominator, int osf) {
    if (sf < kMinSf || sf > kMaxSf) {
        throw Error(Errc::invalid_sf, "spreading factor " + std::to_string(sf) + " outside [7, 12]");
    }
    if (cr_denominator < 6 || cr_denominator > 8) {
        throw Error(Errc::invalid_cr, "coding rate 4/" + std::to_string(cr_denominator) + " not in {4/6, 4/7, 4/8}");
    }
    if (osf < 1) {
        throw Error(Errc::invalid_osf, "oversampling factor must be >= 1");
    }
    if (bw_hz <= 0 || bw_hz > std::numeric_limits<std::uint32_t>::max()) {
        throw Error(Errc::invalid_bandwidth, "bandwidth must be a positive integer number of Hz");
    }
    return ModemParams(sf, static_cast<std::uint32_t>(bw_hz), cr_denominator, osf);
}

SymbolValue::SymbolValue(std::uint32_t value, const ModemParams& params) : value_(value) {
    if (value >= params.n_samples()) {
        throw Error(Errc::invalid_symbol, "symbol " + std::to_string(value) + " >= N");
    }
}

bool is_valid(const SampleBuffer& buffer) noexcept {
    if (buffer.samples.empty()) return false;
    for (const cplx& s : buffer.samples) {
        if (!std::isfinite(s.real()) || !std::isfinite(s.imag())) return false;
    }
    return true;
}

std::pair<int, double> split_integer_fraction(double x) noexcept {
    // Round half down so that the fraction lands in (-0.5, 0.5].
    const double integer = std::ceil(x - 0.5);
    return {static_cast<int>(integer), x - integer};
}

OffsetEstimate OffsetEstimate::from_totals(double cfo_bins, double tau_samples) noexcept {
    OffsetEstimate est;
    std::tie(est.l_cfo, est.lambda_cfo) = split_integer_fraction(cfo_bins);
    std::tie(est.l_sto, est.lambda_sto) = split_integer_fraction(tau_samples);
    return est;
}

int signed_residue(std::int64_t x, std::int64_t n) noexcept {
    std::int64_t r = positive_mod(x, n);
    if (r >= n / 2) r -= n;
    return static_cast<int>(r);
}

}  // namespace lorasdr
