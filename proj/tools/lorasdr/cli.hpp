#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace lorasdr::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitEncode = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNoPacket = 3;

/// Entry point of the `lorasdr` tool: tx, rx and per subcommands.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Convenience for tests; args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Lower-case hex without separators.
std::string to_hex(const std::vector<std::uint8_t>& bytes);

/// Accepts upper or lower case and an optional 0x prefix. Throws on odd length or bad digits.
std::vector<std::uint8_t> from_hex(std::string_view text);

}  // namespace lorasdr::cli
