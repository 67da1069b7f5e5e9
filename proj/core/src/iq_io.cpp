#include "lorasdr/iq_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

namespace lorasdr::io {

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xFF));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

std::uint32_t get_u32(const std::uint8_t* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::int16_t get_i16(const std::uint8_t* p) {
    return static_cast<std::int16_t>(static_cast<std::uint16_t>(p[0] | (p[1] << 8)));
}

std::int16_t to_cs16(double v) {
    if (!std::isfinite(v) || std::abs(v) > 1.0) {
        throw Error(Errc::sample_out_of_range, "cs16 components must lie in [-1, 1]");
    }
    return static_cast<std::int16_t>(std::lround(v * 32767.0));
}

}  // namespace

IqFormat parse_format(std::string_view name) {
    if (name == "cf32") return IqFormat::cf32;
    if (name == "cs16") return IqFormat::cs16;
    throw Error(Errc::invalid_argument, "unknown IQ format '" + std::string(name) + "'");
}

std::string_view to_string(IqFormat format) noexcept { return format == IqFormat::cf32 ? "cf32" : "cs16"; }

std::size_t bytes_per_sample(IqFormat format) noexcept { return format == IqFormat::cf32 ? 8 : 4; }

std::vector<std::uint8_t> encode_iq(std::span<const cplx> samples, IqFormat format) {
    std::vector<std::uint8_t> out;
    out.reserve(samples.size() * bytes_per_sample(format));
    for (const cplx& s : samples) {
        if (format == IqFormat::cf32) {
            if (!std::isfinite(s.real()) || !std::isfinite(s.imag())) {
                throw Error(Errc::sample_out_of_range, "non-finite sample");
            }
            put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(s.real())));
            put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(s.imag())));
        } else {
            put_u16(out, static_cast<std::uint16_t>(to_cs16(s.real())));
            put_u16(out, static_cast<std::uint16_t>(to_cs16(s.imag())));
        }
    }
    return out;
}

std::vector<cplx> decode_iq(std::span<const std::uint8_t> bytes, IqFormat format) {
    const std::size_t size = bytes_per_sample(format);
    if (bytes.size() % size != 0) {
        throw Error(Errc::malformed_file, std::to_string(bytes.size()) + " bytes is not a whole number of " +
                                              std::string(to_string(format)) + " samples");
    }
    std::vector<cplx> out(bytes.size() / size);
    const std::uint8_t* p = bytes.data();
    for (cplx& s : out) {
        if (format == IqFormat::cf32) {
            s = {std::bit_cast<float>(get_u32(p)), std::bit_cast<float>(get_u32(p + 4))};
        } else {
            s = {get_i16(p) / 32767.0, get_i16(p + 2) / 32767.0};
        }
        p += size;
    }
    return out;
}

void write_iq(const std::filesystem::path& path, const SampleBuffer& buffer, IqFormat format) {
    const std::vector<std::uint8_t> bytes = encode_iq(buffer.samples, format);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::io_error, "cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(Errc::io_error, "short write to " + path.string());
}

SampleBuffer read_iq(const std::filesystem::path& path, IqFormat format, RateTag rate) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::io_error, "cannot read " + path.string());
    const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return {decode_iq(bytes, format), rate};
}

std::string write_per_csv(std::vector<PerRow> rows) {
    std::stable_sort(rows.begin(), rows.end(), [](const PerRow& a, const PerRow& b) { return a.snr_db > b.snr_db; });
    std::ostringstream out;
    out << "snr_db,packets,errors,per\n";
    out.precision(6);
    for (const PerRow& r : rows) {
        out << r.snr_db << ',' << r.packets << ',' << r.errors << ',' << r.per << '\n';
    }
    return out.str();
}

}  // namespace lorasdr::io
