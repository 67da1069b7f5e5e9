#include "lorasdr/codec.hpp"

#include <bit>

namespace lorasdr::codec {

namespace {

void check_cr(int cr_denominator) {
    if (cr_denominator < 6 || cr_denominator > 8) {
        throw Error(Errc::invalid_cr, "codeword width must be 6, 7 or 8");
    }
}

std::uint8_t lfsr_step(std::uint8_t state) {
    const unsigned fb = ((state >> 7) ^ (state >> 5) ^ (state >> 4) ^ (state >> 3)) & 1u;
    return static_cast<std::uint8_t>((state << 1) | fb);
}

std::uint8_t encode8(std::uint8_t nibble) {
    const unsigned d0 = nibble & 1u, d1 = (nibble >> 1) & 1u, d2 = (nibble >> 2) & 1u, d3 = (nibble >> 3) & 1u;
    const unsigned p0 = d0 ^ d1 ^ d2;
    const unsigned p1 = d1 ^ d2 ^ d3;
    const unsigned p2 = d0 ^ d1 ^ d3;
    const unsigned p3 = d0 ^ d2 ^ d3;
    return static_cast<std::uint8_t>((nibble & 0xFu) | (p0 << 4) | (p1 << 5) | (p2 << 6) | (p3 << 7));
}

}  // namespace

Bytes whitening_sequence(std::size_t n) {
    Bytes out(n);
    std::uint8_t state = 0xFF;
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = state;
        for (int k = 0; k < 8; ++k) state = lfsr_step(state);
    }
    return out;
}

Bytes whiten(std::span<const std::uint8_t> bytes) {
    Bytes out(bytes.begin(), bytes.end());
    const Bytes seq = whitening_sequence(bytes.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] ^= seq[i];
    return out;
}

Codeword hamming_encode(std::uint8_t nibble, int cr_denominator) {
    check_cr(cr_denominator);
    if (nibble > 0xF) throw Error(Errc::invalid_argument, "nibble out of range");
    const std::uint8_t mask = static_cast<std::uint8_t>((1u << cr_denominator) - 1u);
    return {static_cast<std::uint8_t>(encode8(nibble) & mask), cr_denominator};
}

HammingResult hamming_check(Codeword cw, int cr_denominator) {
    check_cr(cr_denominator);
    if (cw.width != cr_denominator) throw Error(Errc::wrong_block_shape, "codeword width differs from coding rate");
    const unsigned mask = (1u << cr_denominator) - 1u;
    const unsigned received = cw.bits & mask;
    const auto raw = static_cast<std::uint8_t>(received & 0xFu);

    int best = 99;
    int best_count = 0;
    std::uint8_t best_nibble = raw;
    for (std::uint8_t d = 0; d < 16; ++d) {
        const int dist = std::popcount((encode8(d) & mask) ^ received);
        if (dist < best) {
            best = dist;
            best_count = 1;
            best_nibble = d;
        } else if (dist == best) {
            ++best_count;
        }
    }
    if (best == 0) return {raw, HammingStatus::clean};
    if (cr_denominator == 6) return {raw, HammingStatus::detected};
    if (best == 1 && best_count == 1) return {best_nibble, HammingStatus::corrected};
    return {raw, HammingStatus::uncorrectable};
}

HammingResult hamming_decode(Codeword cw, int cr_denominator) {
    const HammingResult r = hamming_check(cw, cr_denominator);
    if (r.status == HammingStatus::uncorrectable) {
        throw Error(Errc::uncorrectable_codeword, "more than one bit error in codeword");
    }
    return r;
}

std::vector<std::uint16_t> interleave(std::span<const std::uint16_t> codewords, int sf, int cr_denominator) {
    check_cr(cr_denominator);
    if (static_cast<int>(codewords.size()) != sf) throw Error(Errc::wrong_block_shape, "block needs SF codewords");
    for (std::uint16_t cw : codewords) {
        if (cw >> cr_denominator) throw Error(Errc::wrong_block_shape, "codeword wider than n bits");
    }
    std::vector<std::uint16_t> out(static_cast<std::size_t>(cr_denominator), 0);
    for (int j = 0; j < cr_denominator; ++j) {
        unsigned sym = 0;
        for (int i = 0; i < sf; ++i) {
            sym |= ((codewords[static_cast<std::size_t>((i + j) % sf)] >> j) & 1u) << i;
        }
        out[static_cast<std::size_t>(j)] = static_cast<std::uint16_t>(sym);
    }
    return out;
}

std::vector<std::uint16_t> deinterleave(std::span<const std::uint16_t> symbols, int sf, int cr_denominator) {
    check_cr(cr_denominator);
    if (static_cast<int>(symbols.size()) != cr_denominator) {
        throw Error(Errc::wrong_block_shape, "block needs n symbols");
    }
    for (std::uint16_t s : symbols) {
        if (s >> sf) throw Error(Errc::wrong_block_shape, "symbol wider than SF bits");
    }
    std::vector<std::uint16_t> out(static_cast<std::size_t>(sf), 0);
    for (int j = 0; j < cr_denominator; ++j) {
        for (int i = 0; i < sf; ++i) {
            const unsigned bit = (symbols[static_cast<std::size_t>(j)] >> i) & 1u;
            out[static_cast<std::size_t>((i + j) % sf)] |= static_cast<std::uint16_t>(bit << j);
        }
    }
    return out;
}

std::uint16_t crc16(std::span<const std::uint8_t> bytes) {
    std::uint16_t crc = 0;
    for (std::uint8_t b : bytes) {
        crc ^= static_cast<std::uint16_t>(b << 8);
        for (int k = 0; k < 8; ++k) {
            crc = (crc & 0x8000u) ? static_cast<std::uint16_t>((crc << 1) ^ 0x1021u) : static_cast<std::uint16_t>(crc << 1);
        }
    }
    return crc;
}

std::uint8_t crc8(std::span<const std::uint8_t> bytes) {
    std::uint8_t crc = 0;
    for (std::uint8_t b : bytes) {
        crc ^= b;
        for (int k = 0; k < 8; ++k) {
            crc = (crc & 0x80u) ? static_cast<std::uint8_t>((crc << 1) ^ 0x07u) : static_cast<std::uint8_t>(crc << 1);
        }
    }
    return crc;
}

namespace {

std::uint8_t header_checksum(unsigned fields12) {
    const std::array<std::uint8_t, 2> b{static_cast<std::uint8_t>(fields12 >> 8), static_cast<std::uint8_t>(fields12 & 0xFF)};
    return crc8(b);
}

}  // namespace

HeaderBlock build_header(int payload_len, int cr_denominator, bool has_crc) {
    if (payload_len < 1 || payload_len > 255) throw Error(Errc::invalid_payload_length, "payload must be 1..255 bytes");
    check_cr(cr_denominator);
    const unsigned fields = (static_cast<unsigned>(payload_len) << 4) |
                            (static_cast<unsigned>(cr_denominator - 4) << 1) | (has_crc ? 1u : 0u);
    HeaderBlock block;
    block.header = {payload_len, cr_denominator, has_crc, header_checksum(fields)};
    const unsigned packed = (fields << 8) | block.header.checksum;
    for (int i = 0; i < kHeaderNibbles; ++i) {
        block.nibbles[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>((packed >> (16 - 4 * i)) & 0xFu);
    }
    return block;
}

FrameHeader parse_header(std::span<const std::uint8_t> nibbles) {
    if (nibbles.size() != kHeaderNibbles) throw Error(Errc::wrong_block_shape, "header has five nibbles");
    unsigned packed = 0;
    for (std::uint8_t n : nibbles) packed = (packed << 4) | (n & 0xFu);
    const unsigned fields = packed >> 8;
    const auto checksum = static_cast<std::uint8_t>(packed & 0xFF);
    if (header_checksum(fields) != checksum) throw Error(Errc::bad_header_checksum, "header checksum mismatch");
    const int len = static_cast<int>(fields >> 4);
    const int cr_field = static_cast<int>((fields >> 1) & 0x7u);
    if (cr_field < 2 || cr_field > 4) throw Error(Errc::invalid_cr_field, "coding-rate field " + std::to_string(cr_field));
    if (len < 1) throw Error(Errc::invalid_payload_length, "zero-length payload in header");
    return {len, cr_field + 4, (fields & 1u) != 0, checksum};
}

std::size_t payload_symbol_count(std::size_t payload_len, int cr_denominator, bool has_crc, int sf) {
    const std::size_t nibbles = 2 * (payload_len + (has_crc ? 2 : 0));
    const std::size_t blocks = (nibbles + static_cast<std::size_t>(sf) - 1) / static_cast<std::size_t>(sf);
    return blocks * static_cast<std::size_t>(cr_denominator);
}

namespace {

void append_block(std::vector<std::uint32_t>& out, std::span<const std::uint8_t> nibbles, int sf, int cr) {
    std::vector<std::uint16_t> cws(static_cast<std::size_t>(sf), 0);
    for (std::size_t i = 0; i < nibbles.size(); ++i) cws[i] = hamming_encode(nibbles[i], cr).bits;
    for (std::uint16_t bits : interleave(cws, sf, cr)) out.push_back(gray_demap_tx(bits));
}

struct BlockResult {
    std::vector<std::uint8_t> nibbles;
    int corrected = 0;
};

BlockResult decode_block(std::span<const std::uint32_t> symbols, int sf, int cr) {
    std::vector<std::uint16_t> bits(symbols.size());
    const std::uint32_t mask = (1u << sf) - 1u;
    for (std::size_t i = 0; i < symbols.size(); ++i) {
        bits[i] = static_cast<std::uint16_t>(gray_map_rx(symbols[i] & mask));
    }
    BlockResult r;
    for (std::uint16_t cw : deinterleave(bits, sf, cr)) {
        const HammingResult h = hamming_check({static_cast<std::uint8_t>(cw), cr}, cr);
        if (h.corrected()) ++r.corrected;
        r.nibbles.push_back(h.nibble);
    }
    return r;
}

}  // namespace

std::vector<std::uint32_t> encode_frame(std::span<const std::uint8_t> payload, const ModemParams& params,
                                        FrameOptions options) {
    const int sf = params.sf();
    const int cr = params.cr_denominator();
    const HeaderBlock hdr = build_header(static_cast<int>(payload.size()), cr, options.has_crc);

    Bytes body(payload.begin(), payload.end());
    if (options.has_crc) {
        const std::uint16_t crc = crc16(payload);
        body.push_back(static_cast<std::uint8_t>(crc & 0xFF));
        body.push_back(static_cast<std::uint8_t>(crc >> 8));
    }
    body = whiten(body);

    std::vector<std::uint32_t> out;
    out.reserve(kHeaderSymbols + payload_symbol_count(payload.size(), cr, options.has_crc, sf));
    append_block(out, hdr.nibbles, sf, 8);

    std::vector<std::uint8_t> nibbles;
    nibbles.reserve(2 * body.size());
    for (std::uint8_t b : body) {
        nibbles.push_back(b & 0xF);
        nibbles.push_back(static_cast<std::uint8_t>(b >> 4));
    }
    for (std::size_t start = 0; start < nibbles.size(); start += static_cast<std::size_t>(sf)) {
        const std::size_t count = std::min(static_cast<std::size_t>(sf), nibbles.size() - start);
        append_block(out, std::span(nibbles).subspan(start, count), sf, cr);
    }
    return out;
}

FrameHeader decode_header_symbols(std::span<const std::uint32_t> symbols, int sf) {
    if (symbols.size() < kHeaderSymbols) throw Error(Errc::truncated_symbol_stream, "header needs 8 symbols");
    const BlockResult block = decode_block(symbols.first(kHeaderSymbols), sf, 8);
    return parse_header(std::span(block.nibbles).first(kHeaderNibbles));
}

DecodedFrame decode_frame(std::span<const std::uint32_t> symbols, const ModemParams& params) {
    const int sf = params.sf();
    DecodedFrame frame;
    frame.header = decode_header_symbols(symbols, sf);
    const int cr = frame.header.cr_denominator;
    const std::size_t len = static_cast<std::size_t>(frame.header.payload_len);
    const std::size_t needed = kHeaderSymbols + payload_symbol_count(len, cr, frame.header.has_crc, sf);
    if (symbols.size() < needed) {
        throw Error(Errc::truncated_symbol_stream,
                    "expected " + std::to_string(needed) + " symbols, got " + std::to_string(symbols.size()));
    }

    std::vector<std::uint8_t> nibbles;
    for (std::size_t pos = kHeaderSymbols; pos < needed; pos += static_cast<std::size_t>(cr)) {
        const BlockResult block = decode_block(symbols.subspan(pos, static_cast<std::size_t>(cr)), sf, cr);
        frame.corrected_codewords += block.corrected;
        nibbles.insert(nibbles.end(), block.nibbles.begin(), block.nibbles.end());
    }
    const std::size_t body_len = len + (frame.header.has_crc ? 2 : 0);
    Bytes body(body_len);
    for (std::size_t i = 0; i < body_len; ++i) {
        body[i] = static_cast<std::uint8_t>(nibbles[2 * i] | (nibbles[2 * i + 1] << 4));
    }
    body = whiten(body);
    frame.payload.assign(body.begin(), body.begin() + static_cast<std::ptrdiff_t>(len));
    if (frame.header.has_crc) {
        const auto received = static_cast<std::uint16_t>(body[len] | (body[len + 1] << 8));
        if (received != crc16(frame.payload)) throw Error(Errc::crc_mismatch, "payload CRC mismatch");
    }
    return frame;
}

}  // namespace lorasdr::codec
