#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "lorasdr/core.hpp"

namespace lorasdr::codec {

using Bytes = std::vector<std::uint8_t>;

/// First n bytes of the whitening sequence (LFSR x^8+x^6+x^5+x^4+1, seed 0xFF).
Bytes whitening_sequence(std::size_t n);

/// XOR with the whitening sequence. Self-inverse.
Bytes whiten(std::span<const std::uint8_t> bytes);

struct Codeword {
    std::uint8_t bits = 0;
    int width = 8;
    friend bool operator==(const Codeword&, const Codeword&) = default;
};

/// Bit order [d0 d1 d2 d3 p0 p1 p2 p3], d0 = nibble LSB, truncated to n bits.
Codeword hamming_encode(std::uint8_t nibble, int cr_denominator);

enum class HammingStatus { clean, corrected, detected, uncorrectable };

struct HammingResult {
    std::uint8_t nibble = 0;
    HammingStatus status = HammingStatus::clean;
    [[nodiscard]] bool corrected() const noexcept { return status == HammingStatus::corrected; }
};

/// Minimum-distance decoding that never throws. Uncorrectable and
/// detected-only words return their data bits unchanged.
HammingResult hamming_check(Codeword cw, int cr_denominator);

/// As hamming_check, but a double error at n=8 throws uncorrectable_codeword.
HammingResult hamming_decode(Codeword cw, int cr_denominator);

/// SF codewords of n bits -> n symbols of SF bits.
/// out[j] bit i = codeword[(i + j) mod SF] bit j.
std::vector<std::uint16_t> interleave(std::span<const std::uint16_t> codewords, int sf, int cr_denominator);

/// n symbols of SF bits -> SF codewords of n bits.
std::vector<std::uint16_t> deinterleave(std::span<const std::uint16_t> symbols, int sf, int cr_denominator);

/// Binary-reflected Gray code applied to a demodulated symbol.
inline std::uint32_t gray_map_rx(std::uint32_t s) noexcept { return s ^ (s >> 1); }

/// Inverse of gray_map_rx: interleaver bits -> symbol value.
inline std::uint32_t gray_demap_tx(std::uint32_t bits) noexcept {
    std::uint32_t s = bits;
    for (std::uint32_t shift = 1; shift < 32; shift <<= 1) s ^= s >> shift;
    return s;
}

/// CRC-16, poly 0x1021, init 0, unreflected, no final XOR.
std::uint16_t crc16(std::span<const std::uint8_t> bytes);

/// CRC-8, poly 0x07, init 0.
std::uint8_t crc8(std::span<const std::uint8_t> bytes);

struct FrameHeader {
    int payload_len = 0;
    int cr_denominator = 8;
    bool has_crc = true;
    std::uint8_t checksum = 0;
    friend bool operator==(const FrameHeader&, const FrameHeader&) = default;
};

inline constexpr int kHeaderNibbles = 5;
inline constexpr int kHeaderSymbols = 8;

struct HeaderBlock {
    FrameHeader header;
    std::array<std::uint8_t, kHeaderNibbles> nibbles{};
};

/// Packs len(8) | cr-4 (3) | has_crc(1) | checksum(8) into five nibbles, MSB first.
HeaderBlock build_header(int payload_len, int cr_denominator, bool has_crc);

/// Inverse of build_header. The checksum is verified before field ranges.
FrameHeader parse_header(std::span<const std::uint8_t> nibbles);

struct FrameOptions {
    bool has_crc = true;
};

/// Payload symbols (excluding the 8 header symbols) for a frame.
std::size_t payload_symbol_count(std::size_t payload_len, int cr_denominator, bool has_crc, int sf);

/// Header symbols followed by payload symbols.
std::vector<std::uint32_t> encode_frame(std::span<const std::uint8_t> payload, const ModemParams& params,
                                        FrameOptions options = {});

/// Decodes the 8 header symbols alone.
FrameHeader decode_header_symbols(std::span<const std::uint32_t> symbols, int sf);

struct DecodedFrame {
    FrameHeader header;
    Bytes payload;
    int corrected_codewords = 0;
};

/// Inverts encode_frame; the coding rate comes from the header.
DecodedFrame decode_frame(std::span<const std::uint32_t> symbols, const ModemParams& params);

}  // namespace lorasdr::codec
