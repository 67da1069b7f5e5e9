#include "lorasdr/frame.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "lorasdr/chirp.hpp"
#include "lorasdr/sync.hpp"

namespace lorasdr {

Preamble build_preamble(const ModemParams& params, const PreambleConfig& netids) {
    const std::size_t n = params.n_samples();
    if (netids.netid0 >= n || netids.netid1 >= n) throw Error(Errc::invalid_symbol, "network id >= N");
    Preamble p;
    p.up_symbols.assign(kPreambleUpchirps, 0);
    p.up_symbols.push_back(netids.netid0);
    p.up_symbols.push_back(netids.netid1);
    p.samples.samples.reserve(kPreambleQuarters * n / 4);
    for (std::uint32_t s : p.up_symbols) append_symbol(p.samples.samples, s, params);
    const std::vector<cplx>& x0 = cached_upchirp(params.sf());
    for (int k = 0; k < 2; ++k) {
        for (const cplx& v : x0) p.samples.samples.push_back(std::conj(v));
    }
    for (std::size_t i = 0; i < n / 4; ++i) p.samples.samples.push_back(std::conj(x0[i]));
    return p;
}

SampleBuffer transmit_frame(std::span<const std::uint8_t> payload, const ModemParams& params,
                            const TxOptions& options) {
    const std::vector<std::uint32_t> symbols = codec::encode_frame(payload, params, {options.has_crc});
    SampleBuffer out = build_preamble(params, options.netids).samples;
    out.samples.reserve(out.size() + symbols.size() * params.n_samples());
    for (std::uint32_t s : symbols) append_symbol(out.samples, s, params);
    return out;
}

std::size_t frame_sample_count(std::size_t payload_len, const ModemParams& params, bool has_crc) {
    const std::size_t n = params.n_samples();
    const std::size_t symbols =
        codec::kHeaderSymbols + codec::payload_symbol_count(payload_len, params.cr_denominator(), has_crc, params.sf());
    return kPreambleQuarters * n / 4 + symbols * n;
}

double raw_data_rate(std::size_t payload_len, const ModemParams& params, bool has_crc) {
    const std::size_t n = params.n_samples();
    const std::size_t payload_samples =
        frame_sample_count(payload_len, params, has_crc) - kPreambleQuarters * n / 4 - codec::kHeaderSymbols * n;
    const std::size_t payload_symbols = payload_samples / n;
    const double data_bits = static_cast<double>(payload_symbols) * params.sf() * 4.0 / params.cr_denominator();
    return data_bits / (static_cast<double>(payload_samples) / params.f_s());
}

std::string_view to_string(RxStatus status) noexcept {
    switch (status) {
        case RxStatus::ok: return "ok";
        case RxStatus::crc_mismatch: return "crc_mismatch";
        case RxStatus::bad_header: return "bad_header";
        case RxStatus::sync_failed: return "sync_failed";
        case RxStatus::false_alarm: return "no_preamble";
    }
    return "unknown";
}

namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

std::int64_t overlap(std::int64_t a0, std::int64_t a1, std::int64_t b0, std::int64_t b1) {
    return std::max<std::int64_t>(0, std::min(a1, b1) - std::max(a0, b0));
}

double median(std::vector<double> v) {
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    return *mid;
}

}  // namespace

Receiver::Receiver(const ModemParams& params, RxConfig config)
    : params_(params),
      cfg_(config),
      n_(params.n_samples()),
      osf_(params.osf()),
      ref_detect_(base_downchirp(params).samples),
      circ_(params.n_samples()) {}

void Receiver::set_current_phase(int phase) {
    if (phase < 0 || phase >= osf_) throw Error(Errc::phase_out_of_range, "phase must lie in [0, R)");
    phase_cur_ = phase_next_ = phase;
}

void Receiver::command_phase(int phase, RxStep& step) {
    phase_next_ = phase;
    step.set_phase = phase;
}

void Receiver::reset() {
    state_ = RxPhase::detect;
    decisions_.clear();
    spectra_.clear();
    stored_.clear();
    symbols_.clear();
    symbols_expected_ = 0;
}

RxResult Receiver::abort(RxStatus status, std::string detail) {
    RxResult r;
    r.status = status;
    r.detail = std::move(detail);
    r.offsets = offsets_;
    r.header = header_;
    reset();
    return r;
}

int Receiver::arm(std::int64_t frame_start_tick, double cfo_bins) {
    reset();
    const auto [l_cfo, lambda] = split_integer_fraction(cfo_bins);
    lambda_cfo_ = lambda;
    l_cfo_ = l_cfo;
    ref_up_ = sync::apply_cfo_to_reference(ref_detect_, lambda_cfo_, n_);
    header_tick_ = frame_start_tick + static_cast<std::int64_t>(kPreambleQuarters * n_ / 4) * osf_;
    const auto nr = static_cast<std::int64_t>(n_) * osf_;
    const int tau_ticks = signed_residue(cfg_.front_end_delay_ticks - frame_start_tick, nr);
    offsets_ = OffsetEstimate::from_totals(cfo_bins, static_cast<double>(tau_ticks) / osf_);
    state_ = RxPhase::header;
    const int p = static_cast<int>(positive_mod(header_tick_, osf_));
    phase_next_ = p;
    if (w_ < 0) phase_cur_ = p;
    return p;
}

RxStep Receiver::push_window(std::span<const cplx> window) {
    if (window.size() != n_) throw Error(Errc::length_mismatch, "receiver takes windows of N samples");
    ++w_;
    ++windows_;
    phase_prev_ = phase_cur_;
    phase_cur_ = phase_next_;
    circ_.write_symbol(static_cast<std::size_t>(w_), window);

    RxStep step;
    switch (state_) {
        case RxPhase::detect: step_detect(window, step); break;
        case RxPhase::sync: step_sync(window, step); break;
        case RxPhase::header:
        case RxPhase::payload: read_symbols(step); break;
        case RxPhase::done: break;
    }
    return step;
}

void Receiver::step_detect(std::span<const cplx> window, RxStep&) {
    SymbolDecision d = demod_window(window, ref_detect_);
    decisions_.push_back(d.symbol.value());
    spectra_.push_back(std::move(d.spectrum));
    while (decisions_.size() > 3) decisions_.pop_front();
    while (spectra_.size() > 2) spectra_.pop_front();

    const std::vector<std::uint32_t> recent(decisions_.begin(), decisions_.end());
    if (!sync::detect_preamble(recent, n_)) return;
    try {
        lambda_cfo_ = sync::estimate_frac_cfo(spectra_[0], spectra_[1]);
    } catch (const Error&) {
        return;
    }
    ++detections_;
    v_ = decisions_.back();
    w_det_ = w_;
    ref_up_ = sync::apply_cfo_to_reference(ref_detect_, lambda_cfo_, n_);
    std::vector<cplx> x0(ref_detect_.size());
    for (std::size_t i = 0; i < x0.size(); ++i) x0[i] = std::conj(ref_detect_[i]);
    ref_down_ = sync::apply_cfo_to_reference(x0, lambda_cfo_, n_);
    stored_.clear();
    offsets_ = {};
    header_ = {};
    state_ = RxPhase::sync;
}

void Receiver::step_sync(std::span<const cplx> window, RxStep& step) {
    if (w_ == w_det_ + 1) {
        // First-pass fractional timing with the peak index standing in for the integer STO.
        const SymbolDecision up = demod_window(window, ref_up_);
        double lambda = 0.0;
        try {
            lambda = sync::estimate_frac_sto(up.spectrum, static_cast<int>(up.spectrum.peak_index), n_);
        } catch (const Error&) {
        }
        sync_phase_ = (phase_cur_ + sync::select_decimation_phase(-lambda, osf_)) % osf_;
        command_phase(sync_phase_, step);
        w_corr_ = w_ + 1;
        return;
    }

    if (w_ - w_det_ > cfg_.sync_timeout_windows) {
        step.result = abort(RxStatus::false_alarm, "no downchirp alignment");
        return;
    }

    Stored st;
    st.window = w_;
    st.up = dft_spectrum(dechirp(window, ref_up_));
    const DftSpectrum& up = st.up;
    st.up_mag.resize(n_);
    for (std::size_t k = 0; k < n_; ++k) st.up_mag[k] = std::abs(up.bins[k]);
    st.down = dft_spectrum(dechirp(window, ref_down_));

    if (w_ == w_corr_) {
        // The preamble value can only have moved by the phase correction.
        s_up_ = v_;
        for (std::int64_t d = -2; d <= 2; ++d) {
            const auto bin = static_cast<std::uint32_t>(positive_mod(static_cast<std::int64_t>(v_) + d, static_cast<std::int64_t>(n_)));
            if (st.up_mag[bin] > st.up_mag[s_up_]) s_up_ = bin;
        }
        std::vector<double> power(n_);
        for (std::size_t k = 0; k < n_; ++k) power[k] = st.up_mag[k] * st.up_mag[k];
        sigma2_ = std::max(median(power) / std::numbers::ln2, 1e-300);
        amp_ = std::sqrt(std::max(power[s_up_] - sigma2_, sigma2_));
    }
    stored_.push_back(std::move(st));

    const Alignment best = best_alignment();
    if (best.llr <= -1e299) return;
    const auto n = static_cast<std::int64_t>(n_);
    const std::int64_t header_start = best.d0 + 9 * n / 4;
    if (header_start > w_ * n + 2) return;
    if (header_start < (w_ - 1) * n + 2) {
        step.result = abort(RxStatus::false_alarm, "alignment found too late");
        return;
    }
    finish_sync(best, step);
}

double Receiver::hypothesis_llr(std::int64_t d0, std::uint32_t s_down, bool netid_only) const {
    const auto n = static_cast<std::int64_t>(n_);
    const double scale = 2.0 / sigma2_;
    const std::uint32_t bin_n0 = static_cast<std::uint32_t>((s_up_ + cfg_.netids.netid0) % n_);
    const std::uint32_t bin_n1 = static_cast<std::uint32_t>((s_up_ + cfg_.netids.netid1) % n_);
    auto term = [&](double x, std::int64_t ov) {
        if (ov <= 0) return 0.0;
        const double a = amp_ * static_cast<double>(ov) / static_cast<double>(n);
        return (x * a - 0.5 * a * a) * scale;
    };
    auto best_near = [&](const std::vector<double>& mag, std::uint32_t bin) {
        double m = 0.0;
        for (std::int64_t d = -2; d <= 2; ++d) {
            m = std::max(m, mag[static_cast<std::size_t>(positive_mod(static_cast<std::int64_t>(bin) + d, n))]);
        }
        return m;
    };

    double llr = 0.0;
    for (const Stored& st : stored_) {
        const std::int64_t a0 = st.window * n;
        const std::int64_t a1 = a0 + n;
        const std::int64_t ov_n0 = overlap(a0, a1, d0 - 2 * n, d0 - n);
        const std::int64_t ov_n1 = overlap(a0, a1, d0 - n, d0);
        if (netid_only) {
            llr += term(best_near(st.up_mag, bin_n0), ov_n0);
            llr += term(best_near(st.up_mag, bin_n1), ov_n1);
            continue;
        }
        llr += term(st.up_mag[s_up_], overlap(a0, a1, d0 - 10 * n, d0 - 2 * n));
        llr += term(st.up_mag[bin_n0], ov_n0);
        llr += term(st.up_mag[bin_n1], ov_n1);
        llr += term(std::abs(st.down.bins[s_down]), overlap(a0, a1, d0, d0 + 9 * n / 4));
    }
    return llr;
}

Receiver::Alignment Receiver::best_alignment() const {
    const auto n = static_cast<std::int64_t>(n_);
    std::vector<std::uint32_t> candidates;
    for (const Stored& st : stored_) {
        // Every window's downchirp peak is a candidate; the likelihood decides.
        const auto bin = static_cast<std::uint32_t>(st.down.peak_index);
        if (std::find(candidates.begin(), candidates.end(), bin) == candidates.end()) {
            candidates.push_back(bin);
        }
    }

    Alignment best;
    for (std::uint32_t s_down : candidates) {
        const sync::IntegerOffsets io = sync::resolve_integer_offsets(s_up_, s_down, n_);
        const std::int64_t a = positive_mod(-io.l_sto, n);
        for (std::int64_t j = w_det_ - 1; j <= w_det_ + 11; ++j) {
            const std::int64_t d0 = a + j * n;
            const double llr = hypothesis_llr(d0, s_down, false);
            if (llr > best.llr) best = {llr, d0, s_down, io.l_cfo, io.l_sto, io.half_residue};
        }
    }
    return best;
}

void Receiver::refine_alignment(Alignment& a) {
    const auto n = static_cast<std::int64_t>(n_);
    // Combine the energy of every window the alignment places wholly inside
    // the upchirps or the downchirps and re-pick both peaks within one bin.
    auto repick = [&](std::uint32_t centre, bool down) {
        std::uint32_t best = centre;
        double best_energy = -1.0;
        for (std::int64_t d = -1; d <= 1; ++d) {
            const auto bin = static_cast<std::size_t>(positive_mod(static_cast<std::int64_t>(centre) + d, n));
            double energy = 0.0;
            for (const Stored& st : stored_) {
                const std::int64_t start = st.window * n;
                const bool inside = down ? (start >= a.d0 && start + n <= a.d0 + 9 * n / 4)
                                         : (start >= a.d0 - 10 * n && start + n <= a.d0 - 2 * n);
                if (inside) energy += std::norm((down ? st.down : st.up).bins[bin]);
            }
            if (energy > best_energy) {
                best_energy = energy;
                best = static_cast<std::uint32_t>(bin);
            }
        }
        return best;
    };
    const std::uint32_t s_up = repick(s_up_, false);
    const std::uint32_t s_down = repick(a.s_down, true);
    if (s_up == s_up_ && s_down == a.s_down) return;

    const sync::IntegerOffsets io = sync::resolve_integer_offsets(s_up, s_down, n_);
    const std::int64_t shift = positive_mod(-io.l_sto, n) - positive_mod(a.d0, n);
    std::int64_t d0 = a.d0 + shift;
    if (d0 - a.d0 > n / 2) d0 -= n;
    if (a.d0 - d0 > n / 2) d0 += n;
    a = {a.llr, d0, s_down, io.l_cfo, io.l_sto, io.half_residue};
    s_up_ = s_up;
}

void Receiver::finish_sync(Alignment a, RxStep& step) {
    refine_alignment(a);
    if (hypothesis_llr(a.d0, a.s_down, true) <= 0.0) {
        step.result = abort(RxStatus::sync_failed, "network id mismatch");
        return;
    }
    const auto n = static_cast<std::int64_t>(n_);

    // Second pass over every window lying wholly inside the upchirps or the
    // downchirps. The two groups carry a residual CFO with opposite signs, so
    // their means are averaged with equal weight.
    double up_sum = 0.0, down_sum = 0.0;
    int up_count = 0, down_count = 0;
    for (const Stored& st : stored_) {
        const std::int64_t start = st.window * n;
        try {
            if (start >= a.d0 && start + n <= a.d0 + 9 * n / 4) {
                down_sum -= sync::estimate_frac_sto_at(st.down, a.s_down, a.l_rx, n_);
                ++down_count;
            } else if (start >= a.d0 - 10 * n && start + n <= a.d0 - 2 * n) {
                up_sum += sync::estimate_frac_sto_at(st.up, s_up_, a.l_rx, n_);
                ++up_count;
            }
        } catch (const Error&) {
        }
    }
    double lambda_res = 0.0;
    if (up_count > 0 && down_count > 0) {
        lambda_res = 0.5 * (up_sum / up_count + down_sum / down_count);
    } else if (down_count > 0) {
        lambda_res = down_sum / down_count;
    } else if (up_count > 0) {
        lambda_res = up_sum / up_count;
    }

    const std::int64_t down_tick = a.d0 * osf_ + sync_phase_ - std::llround(lambda_res * osf_);
    header_tick_ = down_tick + (9 * n / 4) * osf_;
    const std::int64_t frame_tick = down_tick - 10 * n * osf_;
    l_cfo_ = a.l_cfo;
    const int tau_ticks = signed_residue(cfg_.front_end_delay_ticks - frame_tick, n * osf_);
    offsets_ = OffsetEstimate::from_totals(lambda_cfo_ + a.half + a.l_cfo, static_cast<double>(tau_ticks) / osf_);

    command_phase(static_cast<int>(positive_mod(header_tick_, osf_)), step);
    stored_.clear();
    symbols_.clear();
    state_ = RxPhase::header;
    read_symbols(step);
}

void Receiver::read_symbols(RxStep& step) {
    const auto n = static_cast<std::int64_t>(n_);
    std::vector<cplx> buf(n_);
    while (state_ == RxPhase::header || state_ == RxPhase::payload) {
        const std::int64_t tick = header_tick_ + static_cast<std::int64_t>(symbols_.size()) * n * osf_;
        auto sample_at = [&](int phase) { return floor_div(tick - phase + osf_ / 2, osf_); };
        std::int64_t m = sample_at(phase_prev_);
        if (m < (w_ - 1) * n || m >= w_ * n) m = sample_at(phase_cur_);
        if (m + n > (w_ + 1) * n) return;
        if (m < (w_ - 1) * n) {
            step.result = abort(RxStatus::sync_failed, "symbol left the buffer");
            return;
        }
        circ_.read(static_cast<std::size_t>(positive_mod(m, 2 * n)), buf);
        const SymbolDecision d = demod_window(buf, ref_up_);
        symbols_.push_back(static_cast<std::uint32_t>(positive_mod(static_cast<std::int64_t>(d.symbol.value()) - l_cfo_, n)));

        if (state_ == RxPhase::header && symbols_.size() == codec::kHeaderSymbols) {
            try {
                header_ = codec::decode_header_symbols(symbols_, params_.sf());
            } catch (const Error& e) {
                step.result = abort(RxStatus::bad_header, e.what());
                return;
            }
            symbols_expected_ = codec::kHeaderSymbols +
                                codec::payload_symbol_count(static_cast<std::size_t>(header_.payload_len),
                                                            header_.cr_denominator, header_.has_crc, params_.sf());
            state_ = RxPhase::payload;
        }
        if (state_ == RxPhase::payload && symbols_.size() == symbols_expected_) {
            RxResult r;
            r.offsets = offsets_;
            r.header = header_;
            r.frame_start_tick = header_tick_ - static_cast<std::int64_t>(kPreambleQuarters * n_ / 4) * osf_;
            try {
                codec::DecodedFrame f = codec::decode_frame(symbols_, params_);
                r.status = RxStatus::ok;
                r.payload = std::move(f.payload);
            } catch (const Error& e) {
                r.status = e.code() == Errc::crc_mismatch ? RxStatus::crc_mismatch : RxStatus::bad_header;
                r.detail = e.what();
            }
            reset();
            step.result = std::move(r);
            return;
        }
    }
}

}  // namespace lorasdr
