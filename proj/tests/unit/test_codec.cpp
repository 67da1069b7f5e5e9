#include <bit>
#include <string_view>

#include "doctest.h"
#include "lorasdr/codec.hpp"
#include "support/oracles.hpp"
#include "support/property.hpp"

using namespace lorasdr;
using namespace lorasdr::codec;

namespace {

Errc error_code(auto&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return Errc::io_error;
}

}  // namespace

TEST_CASE("whitening sequence follows the LFSR recurrence") {
    const Bytes seq = whitening_sequence(300);
    CHECK(seq[0] == 0xFF);
    CHECK(seq[1] == 0x0B);
    CHECK(seq[2] == 0xC6);
    CHECK(seq == oracle::prbs(300));
}

TEST_CASE("whiten is an involution and whitens zeros into the sequence") {
    CHECK(whiten(Bytes(40, 0)) == whitening_sequence(40));
    prop::for_all(200, 31, [](prop::Gen& g) {
        const Bytes x = g.bytes(static_cast<std::size_t>(g.integer(1, 300)));
        CHECK(whiten(whiten(x)) == x);
    });
}

TEST_CASE("hamming_encode against the parity equations") {
    CHECK(hamming_encode(0x0, 8).bits == 0x00);
    CHECK(hamming_encode(0xF, 8).bits == 0xFF);
    CHECK(hamming_encode(0x5, 8).bits == 0x65);
    for (int n = 6; n <= 8; ++n) {
        for (unsigned d = 0; d < 16; ++d) {
            const Codeword cw = hamming_encode(static_cast<std::uint8_t>(d), n);
            CHECK(cw.width == n);
            CHECK(cw.bits == oracle::pack_bits(oracle::hamming_bits(d, n)));
            CHECK(cw.bits == (hamming_encode(static_cast<std::uint8_t>(d), 8).bits & ((1u << n) - 1)));
        }
    }
    CHECK(error_code([] { hamming_encode(16, 8); }) == Errc::invalid_argument);
    CHECK(error_code([] { hamming_encode(1, 5); }) == Errc::invalid_cr);
}

TEST_CASE("(8,4) code has minimum distance at least 3") {
    int min_distance = 99;
    for (unsigned a = 0; a < 16; ++a) {
        for (unsigned b = a + 1; b < 16; ++b) {
            const int d = std::popcount(static_cast<unsigned>(hamming_encode(static_cast<std::uint8_t>(a), 8).bits ^
                                                              hamming_encode(static_cast<std::uint8_t>(b), 8).bits));
            min_distance = std::min(min_distance, d);
        }
    }
    CHECK(min_distance >= 3);
    // These equations give an extended code: distance 4.
    CHECK(min_distance == 4);
}

TEST_CASE("clean codewords decode unchanged") {
    for (int n = 6; n <= 8; ++n) {
        for (unsigned d = 0; d < 16; ++d) {
            const HammingResult r = hamming_decode(hamming_encode(static_cast<std::uint8_t>(d), n), n);
            CHECK(r.nibble == d);
            CHECK(r.status == HammingStatus::clean);
        }
    }
}

TEST_CASE("exhaustive single-bit errors") {
    const Codeword c5 = hamming_encode(0x5, 8);
    const HammingResult r5 = hamming_decode({static_cast<std::uint8_t>(c5.bits ^ 0x04), 8}, 8);
    CHECK(r5.nibble == 0x5);
    CHECK(r5.corrected());

    for (int n = 7; n <= 8; ++n) {
        for (unsigned d = 0; d < 16; ++d) {
            for (int bit = 0; bit < n; ++bit) {
                const Codeword cw = hamming_encode(static_cast<std::uint8_t>(d), n);
                const HammingResult r = hamming_decode({static_cast<std::uint8_t>(cw.bits ^ (1u << bit)), n}, n);
                CHECK(r.nibble == d);
                CHECK(r.status == HammingStatus::corrected);
            }
        }
    }
    // n = 6 only detects: data bits come back as received.
    for (unsigned d = 0; d < 16; ++d) {
        for (int bit = 0; bit < 6; ++bit) {
            const Codeword cw = hamming_encode(static_cast<std::uint8_t>(d), 6);
            const auto bad = static_cast<std::uint8_t>(cw.bits ^ (1u << bit));
            const HammingResult r = hamming_decode({bad, 6}, 6);
            CHECK(r.status == HammingStatus::detected);
            CHECK(r.nibble == (bad & 0xF));
        }
    }
}

TEST_CASE("double-bit errors are characterized per width") {
    int n8_uncorrectable = 0, n8_total = 0, n7_miscorrected = 0, n7_total = 0;
    for (unsigned d = 0; d < 16; ++d) {
        for (int a = 0; a < 8; ++a) {
            for (int b = a + 1; b < 8; ++b) {
                const auto flip = static_cast<std::uint8_t>((1u << a) | (1u << b));
                const Codeword cw8 = hamming_encode(static_cast<std::uint8_t>(d), 8);
                ++n8_total;
                const HammingResult r8 = hamming_check({static_cast<std::uint8_t>(cw8.bits ^ flip), 8}, 8);
                if (r8.status == HammingStatus::uncorrectable) ++n8_uncorrectable;
                if (b < 7) {
                    const Codeword cw7 = hamming_encode(static_cast<std::uint8_t>(d), 7);
                    ++n7_total;
                    const HammingResult r7 = hamming_check({static_cast<std::uint8_t>(cw7.bits ^ flip), 7}, 7);
                    if (r7.status == HammingStatus::corrected && r7.nibble != d) ++n7_miscorrected;
                }
            }
        }
    }
    // Distance 4 at n=8: every double error is flagged, none miscorrected.
    CHECK(n8_uncorrectable == n8_total);
    // The (7,4) code is perfect: a double error always lands next to another codeword.
    CHECK(n7_miscorrected == n7_total);

    const Codeword cw = hamming_encode(0x9, 8);
    CHECK(error_code([&] { hamming_decode({static_cast<std::uint8_t>(cw.bits ^ 0x11), 8}, 8); }) ==
          Errc::uncorrectable_codeword);
    CHECK(error_code([] { hamming_decode({0, 7}, 8); }) == Errc::wrong_block_shape);
}

TEST_CASE("interleaver mapping and inverse") {
    for (int sf = 7; sf <= 12; ++sf) {
        for (int n = 6; n <= 8; ++n) {
            const std::vector<std::uint16_t> zeros(static_cast<std::size_t>(sf), 0);
            for (std::uint16_t s : interleave(zeros, sf, n)) CHECK(s == 0);
        }
    }
    std::vector<std::uint16_t> one(7, 0);
    one[0] = 1;
    const auto out = interleave(one, 7, 8);
    CHECK(out[0] == 1);
    for (std::size_t j = 1; j < out.size(); ++j) CHECK(out[j] == 0);

    prop::for_all(1000, 32, [](prop::Gen& g) {
        const int sf = g.integer(7, 12);
        const int n = g.integer(6, 8);
        std::vector<std::uint16_t> cws(static_cast<std::size_t>(sf));
        std::vector<unsigned> as_unsigned;
        for (auto& c : cws) {
            c = static_cast<std::uint16_t>(g.below(1u << n));
            as_unsigned.push_back(c);
        }
        const auto sym = interleave(cws, sf, n);
        const auto expect = oracle::interleave(as_unsigned, sf, n);
        REQUIRE(sym.size() == static_cast<std::size_t>(n));
        for (int j = 0; j < n; ++j) CHECK(sym[static_cast<std::size_t>(j)] == expect[static_cast<std::size_t>(j)]);
        CHECK(deinterleave(sym, sf, n) == cws);
    });
}

TEST_CASE("interleaver is diagonal: each symbol takes one bit from every codeword") {
    for (int sf = 7; sf <= 12; ++sf) {
        for (int n = 6; n <= 8; ++n) {
            for (int c = 0; c < sf; ++c) {
                std::vector<std::uint16_t> cws(static_cast<std::size_t>(sf), 0);
                cws[static_cast<std::size_t>(c)] = static_cast<std::uint16_t>((1u << n) - 1);
                for (std::uint16_t s : interleave(cws, sf, n)) CHECK(std::popcount(static_cast<unsigned>(s)) == 1);
            }
        }
    }
}

TEST_CASE("interleaver rejects wrong block shapes") {
    CHECK(error_code([] { interleave(std::vector<std::uint16_t>(6, 0), 7, 8); }) == Errc::wrong_block_shape);
    CHECK(error_code([] { interleave(std::vector<std::uint16_t>{0x100, 0, 0, 0, 0, 0, 0}, 7, 8); }) ==
          Errc::wrong_block_shape);
    CHECK(error_code([] { deinterleave(std::vector<std::uint16_t>(7, 0), 7, 8); }) == Errc::wrong_block_shape);
}

TEST_CASE("Gray mapping") {
    CHECK(gray_map_rx(0) == 0);
    CHECK(gray_map_rx(5) == 7);
    for (int sf = 7; sf <= 12; ++sf) {
        const std::uint32_t n = 1u << sf;
        const auto table = oracle::gray_table(sf);
        for (std::uint32_t s = 0; s < n; ++s) {
            CHECK(gray_map_rx(s) == table[s]);
            CHECK(gray_demap_tx(gray_map_rx(s)) == s);
            if (s + 1 < n) CHECK(std::popcount(gray_map_rx(s) ^ gray_map_rx(s + 1)) == 1);
        }
        // The wrap pair (N-1, 0) also differs in a single bit, the MSB.
        CHECK(gray_map_rx(n - 1) == n / 2);
        CHECK(std::popcount(gray_map_rx(n - 1) ^ gray_map_rx(0)) == 1);
    }
}

TEST_CASE("CRC values from the long-division oracle") {
    constexpr std::string_view digits = "123456789";
    const Bytes ascii(digits.begin(), digits.end());
    CHECK(crc16(ascii) == 0x31C3);
    CHECK(crc16(Bytes{0x00}) == 0x0000);
    CHECK(crc16(Bytes{0x01}) == 0x1021);
    CHECK(crc8(ascii) == 0xF4);
    CHECK(crc8(Bytes{0x01}) == 0x07);

    prop::for_all(300, 33, [](prop::Gen& g) {
        const Bytes x = g.bytes(static_cast<std::size_t>(g.integer(1, 64)));
        CHECK(crc16(x) == oracle::crc_long_division(x, 0x1021, 16));
        CHECK(crc8(x) == oracle::crc_long_division(x, 0x07, 8));
    });
}

TEST_CASE("CRC-16 changes under every single-bit flip") {
    prop::for_all(50, 34, [](prop::Gen& g) {
        Bytes x = g.bytes(static_cast<std::size_t>(g.integer(1, 32)));
        const std::uint16_t ref = crc16(x);
        for (std::size_t i = 0; i < x.size(); ++i) {
            for (int b = 0; b < 8; ++b) {
                x[i] ^= static_cast<std::uint8_t>(1u << b);
                CHECK(crc16(x) != ref);
                x[i] ^= static_cast<std::uint8_t>(1u << b);
            }
        }
    });
}

TEST_CASE("header round trip and layout") {
    const HeaderBlock h = build_header(11, 8, true);
    CHECK(h.header.checksum == 0x26);
    CHECK(h.nibbles == std::array<std::uint8_t, 5>{0x0, 0xB, 0x9, 0x2, 0x6});
    const FrameHeader back = parse_header(h.nibbles);
    CHECK(back == h.header);
    CHECK(back.payload_len == 11);
    CHECK(back.cr_denominator == 8);
    CHECK(back.has_crc);

    for (int len : {1, 2, 100, 255}) {
        for (int cr = 6; cr <= 8; ++cr) {
            for (bool crc : {false, true}) {
                const HeaderBlock b = build_header(len, cr, crc);
                CHECK(parse_header(b.nibbles) == b.header);
            }
        }
    }
    CHECK(error_code([] { build_header(0, 8, true); }) == Errc::invalid_payload_length);
    CHECK(error_code([] { build_header(256, 8, true); }) == Errc::invalid_payload_length);
}

TEST_CASE("every single-bit header corruption is caught by the checksum") {
    int caught = 0, total = 0;
    for (int len : {1, 11, 200, 255}) {
        for (int cr = 6; cr <= 8; ++cr) {
            const HeaderBlock h = build_header(len, cr, true);
            for (int bit = 0; bit < 20; ++bit) {
                auto nib = h.nibbles;
                nib[static_cast<std::size_t>(bit / 4)] ^= static_cast<std::uint8_t>(1u << (bit % 4));
                ++total;
                if (error_code([&] { parse_header(nib); }) == Errc::bad_header_checksum) ++caught;
            }
        }
    }
    CHECK(static_cast<double>(caught) / total >= 0.99);
    CHECK(caught == total);
}

TEST_CASE("coding-rate field outside 6..8 is reported after the checksum passes") {
    // fields: len 11, cr field 1 (4/5), crc on; checksum recomputed by the oracle.
    const unsigned fields = (11u << 4) | (1u << 1) | 1u;
    const std::uint8_t b[2] = {static_cast<std::uint8_t>(fields >> 8), static_cast<std::uint8_t>(fields & 0xFF)};
    const unsigned packed = (fields << 8) | oracle::crc_long_division(b, 0x07, 8);
    std::array<std::uint8_t, 5> nib{};
    for (int i = 0; i < 5; ++i) nib[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>((packed >> (16 - 4 * i)) & 0xF);
    CHECK(error_code([&] { parse_header(nib); }) == Errc::invalid_cr_field);
}

TEST_CASE("frame symbol count follows the block layout") {
    // 11 bytes + 2 CRC = 26 nibbles -> 4 blocks of 7 at SF7 -> 32 symbols at 4/8.
    CHECK(payload_symbol_count(11, 8, true, 7) == 32);
    CHECK(payload_symbol_count(11, 8, true, 8) == 32);
    CHECK(payload_symbol_count(11, 6, false, 12) == 12);
    const ModemParams p = make_params(7, 125000, 8, 1);
    CHECK(encode_frame(Bytes(11, 0x42), p).size() == 8 + 32);
}

TEST_CASE("frame loopback for every SF and coding rate") {
    for (int sf = 7; sf <= 12; ++sf) {
        for (int cr = 6; cr <= 8; ++cr) {
            const ModemParams p = make_params(sf, 125000, cr, 1);
            prop::for_all(200, static_cast<std::uint64_t>(100 * sf + cr), [&](prop::Gen& g) {
                const Bytes payload = g.bytes(static_cast<std::size_t>(g.integer(1, 255)));
                const bool crc = g.integer(0, 3) != 0;
                const auto symbols = encode_frame(payload, p, {crc});
                CHECK(symbols.size() == kHeaderSymbols + payload_symbol_count(payload.size(), cr, crc, sf));
                for (std::uint32_t s : symbols) CHECK(s < p.n_samples());
                const DecodedFrame f = decode_frame(symbols, p);
                CHECK(f.payload == payload);
                CHECK(f.header.has_crc == crc);
                CHECK(f.header.cr_denominator == cr);
                CHECK(f.corrected_codewords == 0);
            });
        }
    }
}

TEST_CASE("decode_frame error paths") {
    const ModemParams p = make_params(7, 125000, 6, 1);
    const Bytes payload{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11};
    auto symbols = encode_frame(payload, p);

    auto short_stream = symbols;
    short_stream.pop_back();
    CHECK(error_code([&] { decode_frame(short_stream, p); }) == Errc::truncated_symbol_stream);
    CHECK(error_code([&] { decode_frame(std::span(symbols).first(7), p); }) == Errc::truncated_symbol_stream);

    // Flip data bit d0 of the first payload codeword; 4/6 only detects it.
    auto flipped = symbols;
    flipped[8] = gray_demap_tx(gray_map_rx(flipped[8]) ^ 1u);
    CHECK(error_code([&] { decode_frame(flipped, p); }) == Errc::crc_mismatch);

    auto bad_header = symbols;
    bad_header[0] = gray_demap_tx(gray_map_rx(bad_header[0]) ^ 0x3u);
    bad_header[1] = gray_demap_tx(gray_map_rx(bad_header[1]) ^ 0x3u);
    CHECK(error_code([&] { decode_frame(bad_header, p); }) == Errc::bad_header_checksum);
}

TEST_CASE("off-by-one symbol errors are corrected at 4/7 and 4/8") {
    for (int cr = 7; cr <= 8; ++cr) {
        const ModemParams p = make_params(8, 125000, cr, 1);
        prop::for_all(200, static_cast<std::uint64_t>(35 + cr), [&](prop::Gen& g) {
            const Bytes payload = g.bytes(static_cast<std::size_t>(g.integer(1, 60)));
            auto symbols = encode_frame(payload, p);
            const std::size_t at = static_cast<std::size_t>(g.integer(0, static_cast<int>(symbols.size()) - 1));
            symbols[at] = (symbols[at] + (g.coin() ? 1u : 255u)) % 256u;
            const DecodedFrame f = decode_frame(symbols, p);
            CHECK(f.payload == payload);
            // Header corrections are not counted in corrected_codewords.
            CHECK(f.corrected_codewords == (at >= kHeaderSymbols ? 1 : 0));
        });
    }
}
