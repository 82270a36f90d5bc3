// Command-line driver for the Monte Carlo campaigns and analysis reports.
//
//   lorarake ser --sf 7 --channel c2 --detectors rake,coh,noncoh --ebn0 -4:1:4 --out ser.csv
//   lorarake delta --sf 7 --channel c1
//   lorarake complexity --sfs 7,8,9,10,11,12 --k 3 --nc 5,10
//   lorarake estimate-study --config study.json --out est.csv
//   lorarake cand-sweep --sf 10 --nc-norm 0.05,0.1,0.2,0.5,1 --ebn0 -8:2:0
//   lorarake demo --sf 7 --channel c1 --ebn0 0
//   lorarake bench --sf 9 --detectors rake,mf,cand_rake
//
// Exit status: 0 on success, 2 on a configuration or usage error, 1 otherwise.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lorarake/sim.hpp"

using namespace lorarake;
using nlohmann::json;

namespace {

std::vector<double> parse_ebn0(const std::string& text) {
    auto num = [&](const std::string& s) {
        try {
            std::size_t used = 0;
            const double v = std::stod(s, &used);
            if (used != s.size()) throw std::invalid_argument(s);
            return v;
        } catch (const std::exception&) {
            throw ConfigError("ebn0_db", "not a number: '" + s + "'");
        }
    };
    std::vector<double> out;
    if (text.find(':') != std::string::npos) {
        std::vector<std::string> parts;
        std::stringstream ss(text);
        for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
        if (parts.size() != 3) throw ConfigError("ebn0_db", "expected start:step:stop, got '" + text + "'");
        const double start = num(parts[0]), step = num(parts[1]), stop = num(parts[2]);
        if (!(step > 0.0) || stop < start) throw ConfigError("ebn0_db", "need step > 0 and stop >= start");
        const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
        if (n > 10000) throw ConfigError("ebn0_db", "too many points");
        for (std::size_t i = 0; i < n; ++i) out.push_back(start + static_cast<double>(i) * step);
    } else {
        std::stringstream ss(text);
        for (std::string p; std::getline(ss, p, ',');) out.push_back(num(p));
    }
    if (out.empty()) throw ConfigError("ebn0_db", "empty list");
    return out;
}

CsirMode parse_csir(const std::string& s) {
    if (s == "perfect") return CsirMode::perfect;
    if (s == "estimated") return CsirMode::estimated;
    if (s == "forced") return CsirMode::forced;
    throw ConfigError("csir", "expected perfect, estimated or forced, got '" + s + "'");
}

std::string csir_name(CsirMode m) {
    switch (m) {
        case CsirMode::perfect: return "perfect";
        case CsirMode::estimated: return "estimated";
        case CsirMode::forced: return "forced";
    }
    return "?";
}

template <class T>
T get_field(const json& j, const std::string& key) {
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(key, std::string("bad value: ") + e.what());
    }
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    for (std::string p; std::getline(ss, p, ',');)
        if (!p.empty()) out.push_back(p);
    return out;
}

/// Applies a JSON object onto `c`. Keys use SimConfig field names; `seed` is
/// accepted for master_seed. Unknown keys are rejected.
void apply_json(SimConfig& c, const json& j) {
    if (!j.is_object()) throw ConfigError("config", "top level must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string& k = it.key();
        if (k == "sf") c.sf = get_field<int>(j, k);
        else if (k == "channel") c.channel = get_field<std::string>(j, k);
        else if (k == "detectors")
            c.detectors = j[k].is_string() ? split_list(j[k].get<std::string>()) : get_field<std::vector<std::string>>(j, k);
        else if (k == "ebn0_db" || k == "ebn0")
            c.ebn0_db = j[k].is_string() ? parse_ebn0(j[k].get<std::string>())
                      : j[k].is_number() ? std::vector<double>{j[k].get<double>()}
                                         : get_field<std::vector<double>>(j, k);
        else if (k == "n_trials") c.n_trials = get_field<std::size_t>(j, k);
        else if (k == "n_d") c.n_d = get_field<std::size_t>(j, k);
        else if (k == "n_p") c.n_p = get_field<std::size_t>(j, k);
        else if (k == "rho_p") c.rho_p = get_field<double>(j, k);
        else if (k == "rho_c") c.rho_c = j[k].is_null() ? std::nullopt : std::optional<double>(get_field<double>(j, k));
        else if (k == "n_c") {
            c.n_c = j[k].is_null() ? std::nullopt : std::optional<std::size_t>(get_field<std::size_t>(j, k));
            if (c.n_c) c.rho_c.reset();
        }
        else if (k == "rho_tdel") c.rho_tdel = get_field<double>(j, k);
        else if (k == "k_max") c.k_max = get_field<std::size_t>(j, k);
        else if (k == "known_k")
            c.known_k = j[k].is_null() ? std::nullopt : std::optional<std::size_t>(get_field<std::size_t>(j, k));
        else if (k == "csir") c.csir = parse_csir(get_field<std::string>(j, k));
        else if (k == "forced_delays") c.forced_delays = get_field<std::vector<std::size_t>>(j, k);
        else if (k == "master_seed" || k == "seed") c.master_seed = get_field<std::uint64_t>(j, k);
        else if (k == "threads") c.threads = get_field<unsigned>(j, k);
        else throw ConfigError(k, "unknown configuration key");
    }
}

json to_json(const SimConfig& c) {
    json j;
    j["sf"] = c.sf;
    j["channel"] = c.channel;
    j["detectors"] = c.detectors;
    j["ebn0_db"] = c.ebn0_db;
    j["n_trials"] = c.n_trials;
    j["n_d"] = c.n_d;
    j["n_p"] = c.n_p;
    j["rho_p"] = c.rho_p;
    j["rho_c"] = c.rho_c ? json(*c.rho_c) : json(nullptr);
    j["n_c"] = c.n_c ? json(*c.n_c) : json(nullptr);
    j["rho_tdel"] = c.rho_tdel;
    j["k_max"] = c.k_max;
    j["known_k"] = c.known_k ? json(*c.known_k) : json(nullptr);
    j["csir"] = csir_name(c.csir);
    j["forced_delays"] = c.forced_delays;
    j["master_seed"] = c.master_seed;
    return j;  // threads is left out: it never changes results
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex12(std::uint64_t h) {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str().substr(0, 12);
}

/// Flags shared by every simulation subcommand. Each one overrides the value
/// loaded from --config.
struct SimFlags {
    std::string config_path;
    std::optional<int> sf;
    std::optional<std::string> channel;
    std::vector<std::string> detectors;
    std::optional<std::string> ebn0;
    std::optional<std::size_t> n_d, n_p, n_trials, n_c, k_max, known_k;
    std::optional<std::uint64_t> seed;
    std::optional<double> rho_p, rho_c, rho_tdel;
    std::optional<std::string> csir;
    std::vector<std::size_t> forced;
    std::optional<unsigned> threads;
    std::string out;

    void attach(CLI::App* app, bool with_detectors = true) {
        app->add_option("--config", config_path, "JSON configuration file");
        app->add_option("--sf", sf, "spreading factor");
        app->add_option("--channel", channel, "c1, c2, identity or a CSV file delay,gain_re,gain_im");
        if (with_detectors)
            app->add_option("--detectors", detectors, "comma list of detectors")->delimiter(',');
        app->add_option("--ebn0", ebn0, "Eb/N0 grid in dB: start:step:stop or a comma list");
        app->add_option("--nd", n_d, "data symbols per frame");
        app->add_option("--np", n_p, "pilot symbols per frame");
        app->add_option("--trials", n_trials, "frames per Eb/N0 point");
        app->add_option("--seed", seed, "master seed");
        app->add_option("--rho-p", rho_p, "path detection threshold");
        app->add_option("--rho-c", rho_c, "candidate threshold");
        app->add_option("--nc", n_c, "fixed candidate count (replaces --rho-c)");
        app->add_option("--rho-tdel", rho_tdel, "TDEL pilot threshold");
        app->add_option("--kmax", k_max, "largest delay searched by the estimator");
        app->add_option("--known-k", known_k, "number of paths when known to the estimator");
        app->add_option("--csir", csir, "perfect, estimated or forced");
        app->add_option("--forced-delays", forced, "comma list of delays for --csir forced")->delimiter(',');
        app->add_option("--threads", threads, "worker threads (0 = all cores)");
        app->add_option("--out", out, "output CSV (default: standard output)");
    }

    SimConfig resolve() const {
        SimConfig c;
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) throw ConfigError("config", "cannot open '" + config_path + "'");
            json j;
            try {
                j = json::parse(in);
            } catch (const json::parse_error& e) {
                throw ConfigError("config", std::string("malformed JSON: ") + e.what());
            }
            apply_json(c, j);
        }
        if (sf) c.sf = *sf;
        if (channel) c.channel = *channel;
        if (!detectors.empty()) c.detectors = detectors;
        if (ebn0) c.ebn0_db = parse_ebn0(*ebn0);
        if (n_d) c.n_d = *n_d;
        if (n_p) c.n_p = *n_p;
        if (n_trials) c.n_trials = *n_trials;
        if (seed) c.master_seed = *seed;
        if (rho_p) c.rho_p = *rho_p;
        if (rho_c) {
            c.rho_c = *rho_c;
            c.n_c.reset();
        }
        if (n_c) {
            c.n_c = *n_c;
            c.rho_c.reset();
        }
        if (rho_tdel) c.rho_tdel = *rho_tdel;
        if (k_max) c.k_max = *k_max;
        if (known_k) c.known_k = *known_k;
        if (csir) c.csir = parse_csir(*csir);
        if (!forced.empty()) c.forced_delays = forced;
        if (threads) c.threads = *threads;
        return c;
    }
};

class Output {
public:
    explicit Output(const std::string& path) {
        if (path.empty() || path == "-") return;
        file_.open(path);
        if (!file_) throw ConfigError("out", "cannot open '" + path + "' for writing");
    }
    std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

private:
    std::ofstream file_;
};

void summary(const std::string& cmd, const json& effective, std::uint64_t seed,
             std::chrono::steady_clock::time_point t0) {
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cerr << "lorarake " << cmd << ": seed=" << seed << " config=" << hex12(fnv1a(effective.dump()))
              << " wall=" << std::fixed << std::setprecision(3) << secs << "s\n";
}

void print_gains(std::ostream& os, const char* title, const DechirpedGains& g) {
    os << title << ":";
    for (const auto& t : g.paths())
        os << "  (" << t.delay << ", " << std::setprecision(4) << std::abs(t.gain) << "∠"
           << std::arg(t.gain) << ")";
    os << '\n';
}

/// One short burst through the pipeline, printing the decisions of each
/// receiver next to the transmitted symbols.
void run_demo(const SimConfig& cfg, std::ostream& os) {
    const auto p = cfg.params();
    const auto ch = resolve_channel(cfg.channel);
    const auto truth = dechirped_gain(p, ch);
    Rng rng = Rng::stream(cfg.master_seed, 0);
    std::vector<Symbol> data(std::min<std::size_t>(cfg.n_d, 8));
    for (auto& a : data) a = rng.uniform_index(p.m());
    const auto frame = build_frame(p, cfg.n_p, data);
    auto rx = apply_channel(frame, ch, p);
    const double ebn0 = cfg.ebn0_db.front();
    add_awgn(rx, noise_variance_from_snr(snr_from_ebn0_db(p, ebn0)), rng);

    std::vector<SpectrumBuffer> pilots;
    for (std::size_t q = 0; q < cfg.n_p; ++q) pilots.push_back(demodulate(p, symbol_window(rx, q, p)));
    const auto avg = average_pilot_dft(pilots);
    EstimatorConfig ec;
    ec.rho_p = cfg.rho_p;
    ec.k_max = cfg.k_max;
    ec.known_k = cfg.known_k;
    const auto est = detect_paths(avg, ec);
    const TdelReference tdel(avg, cfg.rho_tdel);

    os << "SF " << p.sf() << ", M = " << p.m() << ", Eb/N0 = " << ebn0 << " dB, channel " << cfg.channel
       << " (energy " << ch.energy() << ")\n";
    print_gains(os, "true dechirped gains", truth);
    print_gains(os, "estimated gains     ", est);
    os << "\n   a   coh  nonc  rake  rake^  cand^ (Nc)  tdel\n";
    for (std::size_t s = cfg.n_p; s < frame.n_f(); ++s) {
        const Symbol a = frame.symbols[s];
        const auto spec = demodulate(p, symbol_window(rx, s, p));
        const auto cand = cfg.n_c ? select_candidates_fixed(spec, *cfg.n_c)
                                  : select_candidates_threshold(spec, cfg.rho_c.value_or(0.3));
        SpectrumBuffer rot(spec);
        const cplx g0 = truth[0].gain;
        for (auto& v : rot) v *= std::conj(g0) / std::abs(g0);
        os << std::setw(4) << a << std::setw(6) << detect_legacy(rot, LegacyMode::coherent) << std::setw(6)
           << detect_legacy(spec, LegacyMode::noncoherent) << std::setw(6)
           << detect_rake(spec, truth, CandidateSet::full(p.m()), p).winner << std::setw(7)
           << detect_rake(spec, est, CandidateSet::full(p.m()), p).winner << std::setw(7)
           << detect_rake(spec, est, cand, p).winner << " (" << cand.size() << ")" << std::setw(6)
           << tdel.detect(spec) << '\n';
    }
    os << "(^ = estimated channel)\n";
}

volatile std::uint64_t g_sink = 0;  // keeps the timed work from being optimized away

/// Wall-clock cost per detected symbol for each detector, median over runs
/// after one warmup run.
void run_bench(const SimConfig& cfg, std::size_t runs, std::ostream& os) {
    const auto p = cfg.params();
    const auto ch = resolve_channel(cfg.channel);
    const auto g = dechirped_gain(p, ch);
    Rng rng = Rng::stream(cfg.master_seed, 0);
    const std::size_t n = cfg.n_d;
    std::vector<Symbol> data(n);
    for (auto& a : data) a = rng.uniform_index(p.m());
    auto rx = apply_channel(build_frame(p, 1, data), ch, p);
    add_awgn(rx, noise_variance_from_snr(snr_from_ebn0_db(p, cfg.ebn0_db.front())), rng);
    std::vector<SampleBuffer> dech;
    for (std::size_t s = 1; s <= n; ++s) dech.push_back(dechirp(p, symbol_window(rx, s, p)));
    const TdelReference tdel(demodulate(p, symbol_window(rx, 0, p)), cfg.rho_tdel);

    os << "detector,symbols,median_us_per_symbol,cmult,cadd\n";
    for (const auto& name : cfg.detectors) {
        const auto rcv = *parse_receiver(name);
        std::uint64_t sink = 0;
        double nc_total = 0.0;
        auto once = [&] {
            nc_total = 0.0;
            for (std::size_t s = 0; s < n; ++s) {
                const auto& d = dech[s];
                switch (rcv) {
                    case Receiver::mf: sink += detect_mf(d, g, CandidateSet::full(p.m()), p).winner; break;
                    case Receiver::ideal_mf: sink += ideal_mf_detect(d, g, data[s], p); break;
                    case Receiver::cand_mf:
                    case Receiver::cand_rake: {
                        const auto spec = dft(d);
                        const auto c = cfg.n_c ? select_candidates_fixed(spec, *cfg.n_c)
                                               : select_candidates_threshold(spec, cfg.rho_c.value_or(0.3));
                        nc_total += static_cast<double>(c.size());
                        sink += rcv == Receiver::cand_rake ? detect_rake(spec, g, c, p).winner
                                                           : detect_mf(d, g, c, p).winner;
                        break;
                    }
                    case Receiver::rake:
                    case Receiver::fast_rake: sink += detect_rake(dft(d), g, CandidateSet::full(p.m()), p).winner; break;
                    case Receiver::tdel: sink += tdel.detect(dft(d)); break;
                    default: sink += detect_legacy(dft(d), LegacyMode::noncoherent); break;
                }
            }
        };
        once();
        std::vector<double> times;
        for (std::size_t r = 0; r < runs; ++r) {
            const auto t0 = std::chrono::steady_clock::now();
            once();
            times.push_back(std::chrono::duration<double, std::micro>(std::chrono::steady_clock::now() - t0).count() /
                            static_cast<double>(n));
        }
        std::sort(times.begin(), times.end());
        const double med = times[times.size() / 2];
        const auto nc = static_cast<std::uint64_t>(std::llround(nc_total / static_cast<double>(n)));
        OpCount ops;
        switch (rcv) {
            case Receiver::mf: ops = op_count(DetectorKind::mf, p, g.size()); break;
            case Receiver::cand_mf: ops = op_count(DetectorKind::cand_mf, p, g.size(), nc); break;
            case Receiver::cand_rake: ops = op_count(DetectorKind::cand_rake, p, g.size(), nc); break;
            case Receiver::rake:
            case Receiver::fast_rake: ops = op_count(DetectorKind::rake, p, g.size()); break;
            case Receiver::ideal_mf: ops = op_count(DetectorKind::ideal_mf, p, g.size()); break;
            case Receiver::tdel: ops = op_count(DetectorKind::tdel, p, 1); break;
            default: ops = op_count(DetectorKind::legacy, p, 1); break;
        }
        os << name << ',' << n << ',' << csv_number(med) << ',' << ops.cmult << ',' << ops.cadd << '\n';
        g_sink = sink;
    }
}

int run(int argc, char** argv) {
    CLI::App app{"LoRa multipath receivers: SER campaigns and analysis reports"};
    app.require_subcommand(1);

    SimFlags ser_f, est_f, cand_f, demo_f, bench_f;
    auto* ser = app.add_subcommand("ser", "Monte Carlo SER sweep");
    ser_f.attach(ser);

    int delta_sf = 7;
    std::string delta_ch = "c1", delta_out;
    auto* delta = app.add_subcommand("delta", "parasitic-to-main peak indicators for every symbol");
    delta->add_option("--sf", delta_sf, "spreading factor");
    delta->add_option("--channel", delta_ch, "channel alias or file");
    delta->add_option("--out", delta_out, "output CSV");

    std::vector<int> cx_sfs{7, 8, 9, 10, 11, 12};
    std::uint64_t cx_k = 3;
    std::vector<std::uint64_t> cx_nc{5};
    std::string cx_out;
    auto* cx = app.add_subcommand("complexity", "operation counts and complexity ratios");
    cx->add_option("--sfs", cx_sfs, "spreading factors")->delimiter(',');
    cx->add_option("--k", cx_k, "number of paths");
    cx->add_option("--nc", cx_nc, "candidate counts")->delimiter(',');
    cx->add_option("--out", cx_out, "output CSV");

    std::vector<std::string> studies{"pilots", "thresholds", "forced"};
    auto* est = app.add_subcommand("estimate-study", "RAKE with estimated CSIR: N_p, rho_p and forced delays");
    est_f.attach(est, false);
    est->add_option("--studies", studies, "subset of pilots,thresholds,forced")->delimiter(',');

    std::vector<double> nc_norm{0.05, 0.1, 0.2, 0.25, 0.5, 1.0};
    auto* cand = app.add_subcommand("cand-sweep", "cand-RAKE SER against normalized candidate count");
    cand_f.attach(cand, false);
    cand->add_option("--nc-norm", nc_norm, "normalized candidate counts in (0, 1]")->delimiter(',');

    auto* demo = app.add_subcommand("demo", "push a short noisy burst through every receiver");
    demo_f.attach(demo);

    std::size_t bench_runs = 5;
    auto* bench = app.add_subcommand("bench", "wall-clock cost per symbol of each detector");
    bench_f.attach(bench);
    bench->add_option("--runs", bench_runs, "timed runs (median reported)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }

    const auto t0 = std::chrono::steady_clock::now();
    if (ser->parsed()) {
        const auto cfg = ser_f.resolve();
        cfg.validate();
        Output out(ser_f.out);
        const auto res = run_ser_sweep(cfg);
        write_ser_csv(out.stream(), res.points);
        if (res.failed_trials) std::cerr << "warning: " << res.failed_trials << " trial(s) failed\n";
        summary("ser", to_json(cfg), cfg.master_seed, t0);
    } else if (delta->parsed()) {
        MultipathChannel ch;
        try {
            ch = resolve_channel(delta_ch);
            ch.check_fits(LoRaParams(delta_sf));
        } catch (const std::invalid_argument& e) {
            throw ConfigError(delta_sf < 2 || delta_sf > 20 ? "sf" : "channel", e.what());
        }
        Output out(delta_out);
        write_delta_csv(out.stream(), run_delta_report(ch, delta_sf));
        summary("delta", json{{"sf", delta_sf}, {"channel", delta_ch}}, 0, t0);
    } else if (cx->parsed()) {
        for (int sf : cx_sfs)
            if (sf < 2 || sf > 20) throw ConfigError("sfs", "spreading factors must be in [2, 20]");
        if (cx_k < 1) throw ConfigError("k", "must be >= 1");
        Output out(cx_out);
        write_complexity_csv(out.stream(), run_complexity_report(cx_sfs, cx_k, cx_nc));
        summary("complexity", json{{"sfs", cx_sfs}, {"k", cx_k}, {"nc", cx_nc}}, 0, t0);
    } else if (est->parsed()) {
        EstimationStudyConfig sc;
        sc.base = est_f.resolve();
        sc.base.validate();
        sc.pilots = sc.thresholds = sc.forced = false;
        for (const auto& s : studies) {
            if (s == "pilots") sc.pilots = true;
            else if (s == "thresholds") sc.thresholds = true;
            else if (s == "forced") sc.forced = true;
            else throw ConfigError("studies", "unknown study '" + s + "'");
        }
        Output out(est_f.out);
        write_ser_csv(out.stream(), run_estimation_study(sc));
        auto j = to_json(sc.base);
        j["studies"] = studies;
        summary("estimate-study", j, sc.base.master_seed, t0);
    } else if (cand->parsed()) {
        const auto cfg = cand_f.resolve();
        cfg.validate();
        Output out(cand_f.out);
        write_ser_csv(out.stream(), run_candidate_sweep(cfg, nc_norm));
        auto j = to_json(cfg);
        j["nc_norm"] = nc_norm;
        summary("cand-sweep", j, cfg.master_seed, t0);
    } else if (demo->parsed()) {
        const auto cfg = demo_f.resolve();
        cfg.validate();
        Output out(demo_f.out);
        run_demo(cfg, out.stream());
        summary("demo", to_json(cfg), cfg.master_seed, t0);
    } else if (bench->parsed()) {
        auto cfg = bench_f.resolve();
        if (bench_f.detectors.empty()) cfg.detectors = {"noncoh", "rake", "cand_rake", "tdel", "mf"};
        cfg.validate();
        if (bench_runs < 1) throw ConfigError("runs", "must be >= 1");
        Output out(bench_f.out);
        run_bench(cfg, bench_runs, out.stream());
        summary("bench", to_json(cfg), cfg.master_seed, t0);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
