#pragma once

#include "lorasdr/core.hpp"

namespace lorasdr {

/// x_0[n] for n in [0, N). Cached per spreading factor.
SampleBuffer base_upchirp(const ModemParams& params);

/// Complex conjugate of the base upchirp.
SampleBuffer base_downchirp(const ModemParams& params);

/// Symbol s as a cyclic shift of the base upchirp.
SampleBuffer modulate_symbol(SymbolValue s, const ModemParams& params);

/// Appends symbol s to out without an intermediate buffer.
void append_symbol(std::vector<cplx>& out, std::uint32_t s, const ModemParams& params);

/// Shared read-only view of the cached upchirp for spreading factor sf.
const std::vector<cplx>& cached_upchirp(int sf);

}  // namespace lorasdr
