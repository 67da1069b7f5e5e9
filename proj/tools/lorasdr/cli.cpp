#include "lorasdr/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "lorasdr/channel.hpp"
#include "lorasdr/dfe.hpp"
#include "lorasdr/frame.hpp"
#include "lorasdr/iq_io.hpp"
#include "lorasdr/link_sim.hpp"

namespace lorasdr::cli {

namespace fs = std::filesystem;

std::string to_hex(const std::vector<std::uint8_t>& bytes) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string s;
    s.reserve(bytes.size() * 2);
    for (std::uint8_t b : bytes) {
        s.push_back(digits[b >> 4]);
        s.push_back(digits[b & 0xF]);
    }
    return s;
}

std::vector<std::uint8_t> from_hex(std::string_view text) {
    if (text.starts_with("0x") || text.starts_with("0X")) text.remove_prefix(2);
    if (text.size() % 2 != 0) throw Error(Errc::invalid_argument, "hex payload has an odd number of digits");
    std::vector<std::uint8_t> out(text.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const char* first = text.data() + 2 * i;
        const auto [ptr, ec] = std::from_chars(first, first + 2, out[i], 16);
        if (ec != std::errc() || ptr != first + 2) {
            throw Error(Errc::invalid_argument, "bad hex digit near offset " + std::to_string(2 * i));
        }
    }
    return out;
}

namespace {

struct ModemArgs {
    int sf = 7;
    std::int64_t bw = 125000;
    int cr = 8;
    int osf = 1;
};

void add_modem_flags(CLI::App& cmd, ModemArgs& m) {
    cmd.add_option("--sf", m.sf, "Spreading factor, 7..12")->capture_default_str();
    cmd.add_option("--bw", m.bw, "Bandwidth in Hz")->capture_default_str();
    cmd.add_option("--cr", m.cr, "Coding rate denominator: 6, 7 or 8")->capture_default_str();
}

struct TxArgs {
    ModemArgs modem;
    std::string payload_hex;
    std::string payload_file;
    std::string out;
    std::string format = "cf32";
    bool no_crc = false;
};

struct RxArgs {
    ModemArgs modem;
    std::string in;
    std::string format = "cf32";
    std::string taps;
    bool quantize = false;
};

struct PerArgs {
    std::vector<int> sfs{7};
    std::int64_t bw = 125000;
    int cr = 8;
    std::size_t payload_len = 11;
    std::vector<double> snrs;
    std::uint64_t trials = 1000;
    std::uint64_t seed = 1;
    bool perfect_sync = false;
    bool quantize = false;
    int osf = 16;
    std::string offsets = "realistic";
    unsigned threads = std::max(1u, std::thread::hardware_concurrency());
    std::string out;
};

int cmd_tx(const TxArgs& a, std::ostream& out) {
    const ModemParams params = make_params(a.modem.sf, a.modem.bw, a.modem.cr, a.modem.osf);
    const io::IqFormat format = io::parse_format(a.format);
    std::vector<std::uint8_t> payload;
    if (!a.payload_file.empty()) {
        std::ifstream f(a.payload_file, std::ios::binary);
        if (!f) throw Error(Errc::io_error, "cannot open " + a.payload_file);
        payload.assign(std::istreambuf_iterator<char>(f), {});
    } else {
        payload = from_hex(a.payload_hex);
    }

    SampleBuffer frame = transmit_frame(payload, params, {!a.no_crc, {}});
    const std::size_t baseband_len = frame.size();
    if (params.osf() > 1) frame = channel::upsample_tx(frame, params.osf());
    if (format == io::IqFormat::cs16) {
        // Interpolation overshoots full scale slightly; back off to fit.
        double peak = 1.0;
        for (const cplx& v : frame.samples) peak = std::max({peak, std::abs(v.real()), std::abs(v.imag())});
        for (cplx& v : frame.samples) v /= peak;
    }
    io::write_iq(a.out, frame, format);

    const std::size_t k = codec::payload_symbol_count(payload.size(), params.cr_denominator(), !a.no_crc, params.sf());
    const double duration = static_cast<double>(baseband_len) / params.f_s();
    out << "symbols " << 12.25 + codec::kHeaderSymbols + static_cast<double>(k) << " (preamble 12.25, header "
        << codec::kHeaderSymbols << ", payload " << k << ")\n";
    out << "duration_ms " << std::setprecision(6) << duration * 1e3 << '\n';
    out << "samples " << frame.size() << '\n';
    return kExitOk;
}

int cmd_rx(const RxArgs& a, std::ostream& out, std::ostream& err) {
    const ModemParams params = make_params(a.modem.sf, a.modem.bw, a.modem.cr, a.modem.osf);
    const SampleBuffer capture = io::read_iq(a.in, io::parse_format(a.format),
                                             params.osf() > 1 ? RateTag::oversampled : RateTag::baseband);
    CaptureOptions opts;
    opts.quantize = a.quantize;
    if (!a.taps.empty()) opts.taps = dfe::load_taps(a.taps);

    const std::optional<RxResult> result = receive_capture(capture.samples, params, opts);
    if (!result) {
        err << "no packet: " << to_string(RxStatus::false_alarm) << '\n';
        return kExitNoPacket;
    }
    if (result->status != RxStatus::sync_failed) {
        const OffsetEstimate& o = result->offsets;
        out << "cfo " << o.l_cfo << ' ' << o.lambda_cfo << '\n';
        out << "sto " << o.l_sto << ' ' << o.lambda_sto << '\n';
    }
    if (result->status != RxStatus::ok) {
        err << "no packet: " << to_string(result->status);
        if (!result->detail.empty()) err << " (" << result->detail << ')';
        err << '\n';
        return kExitNoPacket;
    }
    out << "payload " << to_hex(result->payload) << '\n';
    out << "crc " << (result->header.has_crc ? "ok" : "absent") << '\n';
    return kExitOk;
}

fs::path per_output_path(const std::string& base, int sf, bool several) {
    fs::path p(base);
    if (!several) return p;
    return p.parent_path() / (p.stem().string() + "_sf" + std::to_string(sf) + p.extension().string());
}

int cmd_per(const PerArgs& a, std::ostream& out, std::ostream& err) {
    for (double s : a.snrs) {
        if (!std::isfinite(s)) {
            err << "invalid SNR grid: values must be finite\n";
            return kExitUsage;
        }
    }
    OffsetModel model = OffsetModel::realistic;
    if (a.offsets == "none") model = OffsetModel::none;
    if (a.offsets == "grid") model = OffsetModel::grid;

    for (int sf : a.sfs) {
        make_params(sf, a.bw, a.cr, a.osf);
        LinkConfig cfg;
        cfg.sf = sf;
        cfg.bw = a.bw;
        cfg.cr_denominator = a.cr;
        cfg.osf = a.osf;
        cfg.payload_len = a.payload_len;
        cfg.offsets = model;
        cfg.perfect_sync = a.perfect_sync;
        cfg.quantize = a.quantize;

        std::vector<io::PerRow> rows;
        for (double snr : a.snrs) {
            cfg.snr_db = snr;
            rows.push_back(run_per_point(cfg, a.seed, a.trials, a.threads));
            err << "sf " << sf << " snr " << snr << " per " << rows.back().per << " (" << rows.back().errors << '/'
                << rows.back().packets << ")\n";
        }
        const std::string csv = io::write_per_csv(rows);
        if (a.out.empty()) {
            if (a.sfs.size() > 1) out << "# sf " << sf << '\n';
            out << csv;
        } else {
            const fs::path path = per_output_path(a.out, sf, a.sfs.size() > 1);
            std::ofstream f(path, std::ios::binary);
            if (!f || !(f << csv)) throw Error(Errc::io_error, "cannot write " + path.string());
        }
    }
    return kExitOk;
}

bool is_usage_error(Errc code) {
    switch (code) {
        case Errc::invalid_sf:
        case Errc::invalid_cr:
        case Errc::invalid_osf:
        case Errc::invalid_bandwidth:
        case Errc::invalid_argument:
        case Errc::malformed_file:
            return true;
        default:
            return false;
    }
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

bool given(const std::vector<std::string>& args, const std::string& flag) {
    return std::any_of(args.begin(), args.end(),
                       [&](const std::string& a) { return a == flag || a.starts_with(flag + "="); });
}

// Splices `key=value` lines of a per --config file in as flags, skipping keys
// already on the command line.
std::vector<std::string> expand_config(std::vector<std::string> args) {
    if (args.empty() || args.front() != "per") return args;
    std::string path;
    for (std::size_t i = 1; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
        if (args[i].starts_with("--config=")) path = args[i].substr(9);
    }
    if (path.empty()) return args;

    std::ifstream f(path);
    if (!f) throw Error(Errc::io_error, "cannot open config " + path);
    std::vector<std::string> extra;
    std::string line;
    for (int lineno = 1; std::getline(f, line); ++lineno) {
        const std::string t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw Error(Errc::invalid_argument, path + ":" + std::to_string(lineno) + ": expected key=value");
        }
        const std::string flag = "--" + trim(std::string_view(t).substr(0, eq));
        const std::string value = trim(std::string_view(t).substr(eq + 1));
        if (flag == "--config" || given(args, flag)) continue;
        if (flag == "--perfect-sync" || flag == "--quantize") {
            if (value == "1" || value == "true" || value == "yes") extra.push_back(flag);
            continue;
        }
        extra.push_back(flag);
        extra.push_back(value);
    }
    args.insert(args.end(), extra.begin(), extra.end());
    return args;
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
    std::vector<std::string> args;
    try {
        args = expand_config(raw_args);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }

    CLI::App app{"Software LoRa modem: encode, decode and packet error rate sweeps", "lorasdr"};
    app.require_subcommand(1);
    const std::vector<std::string> formats{"cf32", "cs16"};

    TxArgs tx;
    CLI::App* tx_cmd = app.add_subcommand("tx", "Modulate a payload into an IQ file");
    add_modem_flags(*tx_cmd, tx.modem);
    tx_cmd->add_option("--osf", tx.modem.osf, "Oversampling factor of the written file")->capture_default_str();
    auto* hex_opt = tx_cmd->add_option("--payload", tx.payload_hex, "Payload bytes as hex");
    auto* file_opt = tx_cmd->add_option("--payload-file", tx.payload_file, "Payload bytes from a file")
                         ->check(CLI::ExistingFile);
    hex_opt->excludes(file_opt);
    tx_cmd->add_option("-o,--out", tx.out, "Output IQ file")->required();
    tx_cmd->add_option("--format", tx.format, "cf32 or cs16")->check(CLI::IsMember(formats))->capture_default_str();
    tx_cmd->add_flag("--no-crc", tx.no_crc, "Omit the payload CRC");

    RxArgs rx;
    CLI::App* rx_cmd = app.add_subcommand("rx", "Receive one packet from an IQ file");
    add_modem_flags(*rx_cmd, rx.modem);
    rx_cmd->add_option("--osf", rx.modem.osf, "Oversampling factor of the capture")->capture_default_str();
    rx_cmd->add_option("-i,--in", rx.in, "Input IQ file")->required()->check(CLI::ExistingFile);
    rx_cmd->add_option("--format", rx.format, "cf32 or cs16")->check(CLI::IsMember(formats))->capture_default_str();
    rx_cmd->add_option("--taps", rx.taps, "Decimation filter taps, one per line")->check(CLI::ExistingFile);
    rx_cmd->add_flag("--quantize", rx.quantize, "Quantize the front end output to 12 bits");

    PerArgs per;
    CLI::App* per_cmd = app.add_subcommand("per", "Monte-Carlo packet error rate sweep");
    std::string config_path;
    per_cmd->add_option("--config", config_path, "key=value file; flags given on the command line win");
    per_cmd->add_option("--sf", per.sfs, "Spreading factors")->delimiter(',')->capture_default_str();
    per_cmd->add_option("--bw", per.bw, "Bandwidth in Hz")->capture_default_str();
    per_cmd->add_option("--cr", per.cr, "Coding rate denominator")->capture_default_str();
    per_cmd->add_option("--payload-len", per.payload_len, "Payload bytes")->check(CLI::Range(1, 255))
        ->capture_default_str();
    per_cmd->add_option("--snr", per.snrs, "SNR grid in dB, comma separated")->delimiter(',')->required();
    per_cmd->add_option("--trials", per.trials, "Packets per SNR point")->check(CLI::PositiveNumber)
        ->capture_default_str();
    per_cmd->add_option("--seed", per.seed, "Base seed")->capture_default_str();
    per_cmd->add_flag("--perfect-sync", per.perfect_sync, "Feed true offsets instead of synchronizing");
    per_cmd->add_flag("--quantize", per.quantize, "12-bit front end");
    per_cmd->add_option("--osf", per.osf, "Oversampling factor of the channel")->capture_default_str();
    per_cmd->add_option("--offsets", per.offsets, "realistic, grid or none")
        ->check(CLI::IsMember({"realistic", "grid", "none"}))->capture_default_str();
    per_cmd->add_option("--threads", per.threads, "Worker threads")->check(CLI::PositiveNumber);
    per_cmd->add_option("-o,--out", per.out, "CSV path; several SFs get an _sfN suffix");

    try {
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*tx_cmd) {
            if (hex_opt->count() == 0 && file_opt->count() == 0) {
                err << "tx: one of --payload or --payload-file is required\n";
                return kExitUsage;
            }
            return cmd_tx(tx, out);
        }
        if (*rx_cmd) return cmd_rx(rx, out, err);
        return cmd_per(per, out, err);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return is_usage_error(e.code()) ? kExitUsage : kExitEncode;
    }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    return run(std::vector<std::string>(argv + std::min(argc, 1), argv + argc), out, err);
}

}  // namespace lorasdr::cli
