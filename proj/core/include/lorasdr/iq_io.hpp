#pragma once

#include <filesystem>
#include <string>

#include "lorasdr/core.hpp"

namespace lorasdr::io {

/// cf32: little-endian float32 I, Q. cs16: little-endian int16 I, Q at scale 32767.
enum class IqFormat { cf32, cs16 };

IqFormat parse_format(std::string_view name);
std::string_view to_string(IqFormat format) noexcept;
std::size_t bytes_per_sample(IqFormat format) noexcept;

std::vector<std::uint8_t> encode_iq(std::span<const cplx> samples, IqFormat format);
std::vector<cplx> decode_iq(std::span<const std::uint8_t> bytes, IqFormat format);

void write_iq(const std::filesystem::path& path, const SampleBuffer& buffer, IqFormat format);
SampleBuffer read_iq(const std::filesystem::path& path, IqFormat format, RateTag rate = RateTag::baseband);

struct PerRow {
    double snr_db = 0.0;
    std::uint64_t packets = 0;
    std::uint64_t errors = 0;
    double per = 0.0;
};

/// Header `snr_db,packets,errors,per`, rows by descending SNR.
std::string write_per_csv(std::vector<PerRow> rows);

}  // namespace lorasdr::io
