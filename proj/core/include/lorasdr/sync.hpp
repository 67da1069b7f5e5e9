#pragma once

#include "lorasdr/demod.hpp"

namespace lorasdr::sync {

/// True when the last three decisions all lie within +-1 (mod N) of a common value.
bool detect_preamble(std::span<const std::uint32_t> recent_decisions, std::size_t n_samples);

/// Fractional CFO from two consecutive preamble upchirp spectra, in (-0.5, 0.5].
double estimate_frac_cfo(const DftSpectrum& y1, const DftSpectrum& y2);

/// Fractional STO from the bins around the peak, rotated by the integer STO
/// estimate. Clamped to [-0.5, 0.5].
double estimate_frac_sto(const DftSpectrum& y, int l_sto_hat, std::size_t n_samples);

/// Same estimator centred on an explicit bin instead of the peak.
double estimate_frac_sto_at(const DftSpectrum& y, std::size_t bin, int l_sto_hat, std::size_t n_samples);

struct IntegerOffsets {
    int l_cfo = 0;
    int l_sto = 0;
    /// 0 or +-0.5 when s_up + s_down is odd; belongs to the fractional CFO.
    double half_residue = 0.0;
};

/// Integer CFO and STO from one upchirp and one downchirp decision.
IntegerOffsets resolve_integer_offsets(std::uint32_t s_up, std::uint32_t s_down, std::size_t n_samples);

/// reference[n] * exp(-j2pi lambda n / N).
std::vector<cplx> apply_cfo_to_reference(std::span<const cplx> reference, double lambda_cfo, std::size_t n_samples);

/// round(R * lambda) mod R.
int select_decimation_phase(double lambda_sto, int osf);

}  // namespace lorasdr::sync
