#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "lorarake/channel.hpp"
#include "lorarake/channel_io.hpp"
#include "lorarake/complexity.hpp"
#include "lorarake/detectors.hpp"
#include "lorarake/estimator.hpp"
#include "lorarake/fast_sim.hpp"
#include "lorarake/rng.hpp"
#include "lorarake/types.hpp"
#include "lorarake/waveform.hpp"

namespace lorarake {

/// Invalid configuration; `field` names the offending SimConfig key.
class ConfigError : public std::invalid_argument {
public:
    ConfigError(std::string field, const std::string& msg)
        : std::invalid_argument(field + ": " + msg), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

enum class CsirMode { perfect, estimated, forced };

/// How the receiver obtains (k_i, alpha~(i)).
struct CsirSpec {
    CsirMode mode = CsirMode::perfect;
    double rho_p = 0.4;
    std::size_t k_max = 10;
    std::optional<std::size_t> known_k;
    std::vector<std::size_t> forced_delays;
};

enum class Receiver { coh, noncoh, ideal_mf, mf, rake, cand_mf, cand_rake, tdel, coh_awgn, fast_rake };

inline std::optional<Receiver> parse_receiver(const std::string& s) {
    static const std::map<std::string, Receiver> names{
        {"coh", Receiver::coh},         {"noncoh", Receiver::noncoh},       {"ideal_mf", Receiver::ideal_mf},
        {"mf", Receiver::mf},           {"rake", Receiver::rake},           {"cand_mf", Receiver::cand_mf},
        {"cand_rake", Receiver::cand_rake}, {"tdel", Receiver::tdel},       {"coh_awgn", Receiver::coh_awgn},
        {"fast_rake", Receiver::fast_rake}};
    auto it = names.find(s);
    if (it == names.end()) return std::nullopt;
    return it->second;
}

/// One detector column of a sweep. Candidate and CSIR settings are optional
/// overrides of the sweep-wide values.
struct DetectorSpec {
    std::string label;
    Receiver receiver = Receiver::rake;
    std::optional<std::size_t> n_c;
    std::optional<double> rho_c;
    std::optional<CsirSpec> csir;
};

struct SimConfig {
    int sf = 7;
    std::string channel = "c2";
    std::vector<std::string> detectors{"rake", "coh", "noncoh"};
    std::vector<double> ebn0_db{0.0};
    std::size_t n_trials = 100;
    std::size_t n_d = 1000;
    std::size_t n_p = 6;
    double rho_p = 0.4;
    std::optional<double> rho_c = 0.3;
    std::optional<std::size_t> n_c;
    double rho_tdel = 0.2;
    std::size_t k_max = 10;
    std::optional<std::size_t> known_k;
    CsirMode csir = CsirMode::perfect;
    std::vector<std::size_t> forced_delays;
    std::uint64_t master_seed = 1;
    unsigned threads = 0;

    LoRaParams params() const {
        try {
            return LoRaParams(sf);
        } catch (const std::exception& e) {
            throw ConfigError("sf", e.what());
        }
    }

    CsirSpec csir_spec() const { return {csir, rho_p, k_max, known_k, forced_delays}; }

    void validate() const {
        const auto p = params();
        if (n_d < 1) throw ConfigError("n_d", "must be >= 1");
        if (n_p < 1) throw ConfigError("n_p", "must be >= 1");
        if (n_trials < 1) throw ConfigError("n_trials", "must be >= 1");
        if (ebn0_db.empty()) throw ConfigError("ebn0_db", "snr list must be nonempty");
        if (detectors.empty()) throw ConfigError("detectors", "at least one detector required");
        for (const auto& d : detectors)
            if (!parse_receiver(d)) throw ConfigError("detectors", "unknown detector '" + d + "'");
        if (!(rho_p > 0.0 && rho_p < 1.0)) throw ConfigError("rho_p", "must be in (0, 1)");
        if (rho_c && !(*rho_c >= 0.0 && *rho_c < 1.0)) throw ConfigError("rho_c", "must be in [0, 1)");
        if (n_c && (*n_c < 1 || *n_c > p.m())) throw ConfigError("n_c", "must be in [1, M]");
        if (!(rho_tdel >= 0.0 && rho_tdel < 1.0)) throw ConfigError("rho_tdel", "must be in [0, 1)");
        if (k_max < 1 || k_max >= p.m()) throw ConfigError("k_max", "must be in [1, M)");
        if (known_k && (*known_k < 1 || *known_k > k_max + 1)) throw ConfigError("known_k", "must be in [1, k_max+1]");
        if (csir == CsirMode::forced) {
            if (forced_delays.empty() || forced_delays.front() != 0)
                throw ConfigError("forced_delays", "must start with delay 0");
            for (std::size_t i = 0; i < forced_delays.size(); ++i) {
                if (forced_delays[i] >= p.m()) throw ConfigError("forced_delays", "entries must be < M");
                if (i > 0 && forced_delays[i] <= forced_delays[i - 1])
                    throw ConfigError("forced_delays", "must be strictly increasing");
            }
        }
        try {
            resolve_channel(channel).check_fits(p);
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            throw ConfigError("channel", e.what());
        }
    }

    std::vector<DetectorSpec> detector_specs() const {
        std::vector<DetectorSpec> out;
        for (const auto& d : detectors) {
            DetectorSpec s;
            s.label = d;
            s.receiver = *parse_receiver(d);
            out.push_back(s);
        }
        return out;
    }
};

/// One Monte Carlo result.
struct SerPoint {
    std::string detector;
    double ebn0_db = 0.0;
    std::uint64_t errors = 0;
    std::uint64_t symbols = 0;
    double nc_avg = 0.0;
    double cmult = 0.0;
    double cadd = 0.0;

    double ser() const noexcept { return symbols ? static_cast<double>(errors) / static_cast<double>(symbols) : 0.0; }
    double std_error() const noexcept {
        if (!symbols) return 0.0;
        const double p = ser();
        return std::sqrt(p * (1.0 - p) / static_cast<double>(symbols));
    }
    /// Half-width of the 95% normal-approximation binomial interval.
    double ci95() const noexcept { return 1.959963984540054 * std_error(); }
};

/// |ser(a) - ser(b)| in units of the combined standard error. Infinite when
/// both errors are zero but the rates differ; zero when identical.
inline double separation_sigmas(const SerPoint& a, const SerPoint& b) {
    const double d = std::abs(a.ser() - b.ser());
    const double s = std::hypot(a.std_error(), b.std_error());
    if (s == 0.0) return d == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return d / s;
}

struct SweepResult {
    std::vector<SerPoint> points;
    std::size_t failed_trials = 0;

    const SerPoint& at(const std::string& detector, double ebn0) const {
        for (const auto& p : points)
            if (p.detector == detector && std::abs(p.ebn0_db - ebn0) < 1e-9) return p;
        throw std::out_of_range("no SerPoint for " + detector);
    }
};

namespace detail {

struct Tally {
    std::uint64_t errors = 0;
    std::uint64_t symbols = 0;
    std::uint64_t candidates = 0;
    OpCount ops;

    Tally& operator+=(const Tally& o) {
        errors += o.errors;
        symbols += o.symbols;
        candidates += o.candidates;
        ops += o.ops;
        return *this;
    }
};


inline DechirpedGains gains_for(const CsirSpec& c, const DechirpedGains& truth, const SpectrumBuffer& avg) {
    switch (c.mode) {
        case CsirMode::perfect: return truth;
        case CsirMode::estimated: {
            EstimatorConfig e;
            e.rho_p = c.rho_p;
            e.k_max = c.k_max;
            e.known_k = c.known_k;
            return detect_paths(avg, e);
        }
        case CsirMode::forced: return gains_at_delays(avg, c.forced_delays);
    }
    return truth;
}

/// Runs fn(trial) for every trial index over `threads` workers. Results are
/// stored by index so the reduction order never depends on scheduling.
template <class Fn>
void parallel_trials(std::size_t n_trials, unsigned threads, Fn&& fn) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, n_trials));
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t t = next++; t < n_trials; t = next++) fn(t);
    };
    if (threads <= 1) {
        worker();
        return;
    }
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
}

}  // namespace detail

/// Monte Carlo SER sweep with explicit detector specs.
///
/// Every trial draws n_d uniform data symbols, builds a frame behind n_p
/// pilots, passes it through the exact channel and adds noise. The unit noise
/// realization is drawn once per trial and scaled for each Eb/N0 point, and
/// all detectors see the same received samples.
inline SweepResult run_ser_sweep(const SimConfig& cfg, const std::vector<DetectorSpec>& specs) {
    cfg.validate();
    if (specs.empty()) throw ConfigError("detectors", "at least one detector required");
    const LoRaParams p = cfg.params();
    const std::size_t m = p.m();
    const MultipathChannel ch = resolve_channel(cfg.channel);
    const DechirpedGains truth = dechirped_gain(p, ch);
    const MultipathChannel flat = MultipathChannel::flat(std::sqrt(ch.energy()));
    const std::size_t n_snr = cfg.ebn0_db.size();
    const std::size_t n_det = specs.size();

    std::vector<double> sigma(n_snr);
    for (std::size_t s = 0; s < n_snr; ++s)
        sigma[s] = std::sqrt(noise_variance_from_snr(snr_from_ebn0_db(p, cfg.ebn0_db[s])));

    bool need_fast = false, need_flat = false;
    for (const auto& d : specs) {
        need_fast |= d.receiver == Receiver::fast_rake;
        need_flat |= d.receiver == Receiver::coh_awgn;
    }
    std::optional<FastSimModel> fast;
    if (need_fast) fast.emplace(p, truth);

    std::vector<std::vector<detail::Tally>> per_trial(cfg.n_trials, std::vector<detail::Tally>(n_snr * n_det));
    std::vector<char> failed(cfg.n_trials, 0);

    auto run_trial = [&](std::size_t trial) {
        try {
            Rng rng = Rng::stream(cfg.master_seed, trial);
            std::vector<Symbol> data(cfg.n_d);
            for (auto& a : data) a = rng.uniform_index(m);
            const Frame frame = build_frame(p, cfg.n_p, data);
            const auto clean = apply_channel(frame, ch, p);
            // Pilot noise has its own stream so that data symbols and their
            // noise stay the same when only n_p changes.
            Rng pilot_rng = Rng::stream(cfg.master_seed ^ 0x9170'7A11'0000'0000ULL, trial);
            std::vector<cplx> unit_noise(clean.size());
            for (std::size_t k = 0; k < unit_noise.size(); ++k)
                unit_noise[k] = (k < cfg.n_p * m ? pilot_rng : rng).complex_normal(1.0);
            std::vector<cplx> clean_flat;
            if (need_flat) clean_flat = apply_channel(frame, flat, p);
            std::vector<cplx> fast_noise;
            if (need_fast) {
                Rng frng = Rng::stream(cfg.master_seed ^ 0xFA57'51A1'0000'0000ULL, trial);
                fast_noise.resize(cfg.n_d * m);
                for (auto& w : fast_noise) w = frng.complex_normal(static_cast<double>(m));
            }

            auto& tallies = per_trial[trial];
            std::vector<cplx> rx(clean.size());
            std::vector<cplx> rx_flat(clean_flat.size());
            std::vector<cplx> white(m);
            for (std::size_t s = 0; s < n_snr; ++s) {
                for (std::size_t k = 0; k < rx.size(); ++k) rx[k] = clean[k] + sigma[s] * unit_noise[k];
                for (std::size_t k = 0; k < rx_flat.size(); ++k) rx_flat[k] = clean_flat[k] + sigma[s] * unit_noise[k];

                std::vector<SpectrumBuffer> pilots;
                pilots.reserve(cfg.n_p);
                for (std::size_t q = 0; q < cfg.n_p; ++q) pilots.push_back(demodulate(p, symbol_window(rx, q, p)));
                const SpectrumBuffer avg = average_pilot_dft(pilots);

                std::vector<DechirpedGains> gains;
                gains.reserve(n_det);
                bool need_tdel = false;
                for (const auto& d : specs) {
                    gains.push_back(detail::gains_for(d.csir.value_or(cfg.csir_spec()), truth, avg));
                    need_tdel |= d.receiver == Receiver::tdel;
                }
                std::optional<TdelReference> tdel;
                if (need_tdel) tdel.emplace(avg, cfg.rho_tdel);

                for (std::size_t di = 0; di < cfg.n_d; ++di) {
                    const std::size_t slot = cfg.n_p + di;
                    const Symbol a = frame.symbols[slot];
                    const SampleBuffer dech = dechirp(p, symbol_window(rx, slot, p));
                    const SpectrumBuffer spec = dft(dech);
                    for (std::size_t j = 0; j < n_det; ++j) {
                        const auto& d = specs[j];
                        const auto& g = gains[j];
                        auto& t = tallies[s * n_det + j];
                        Symbol dec = 0;
                        std::uint64_t nc = m;
                        OpCount ops;
                        const std::uint64_t kk = g.size();
                        switch (d.receiver) {
                            case Receiver::coh: {
                                // phase-compensated on the first path
                                const cplx g0 = g[0].gain;
                                const double mag = std::abs(g0);
                                SpectrumBuffer rot(spec);
                                if (mag > 0) {
                                    const cplx derot = std::conj(g0) / mag;
                                    for (auto& v : rot) v *= derot;
                                }
                                dec = detect_legacy(rot, LegacyMode::coherent);
                                ops = op_count(DetectorKind::legacy, p, 1);
                                break;
                            }
                            case Receiver::noncoh:
                                dec = detect_legacy(spec, LegacyMode::noncoherent);
                                ops = op_count(DetectorKind::legacy, p, 1);
                                break;
                            case Receiver::coh_awgn:
                                dec = detect_legacy(demodulate(p, symbol_window(rx_flat, slot, p)), LegacyMode::coherent);
                                ops = op_count(DetectorKind::legacy, p, 1);
                                break;
                            case Receiver::ideal_mf:
                                dec = ideal_mf_detect(dech, g, a, p);
                                ops = op_count(DetectorKind::ideal_mf, p, kk);
                                break;
                            case Receiver::mf:
                                dec = detect_mf(dech, g, CandidateSet::full(m), p).winner;
                                ops = op_count(DetectorKind::mf, p, kk);
                                break;
                            case Receiver::rake:
                                dec = detect_rake(spec, g, CandidateSet::full(m), p).winner;
                                ops = op_count(DetectorKind::rake, p, kk);
                                break;
                            case Receiver::cand_mf:
                            case Receiver::cand_rake: {
                                const auto n_c = d.n_c ? d.n_c : (d.rho_c ? std::nullopt : cfg.n_c);
                                const auto rho_c = d.rho_c ? d.rho_c : cfg.rho_c;
                                const CandidateSet cand = n_c ? select_candidates_fixed(spec, *n_c)
                                                              : select_candidates_threshold(spec, rho_c.value_or(0.3));
                                nc = cand.size();
                                if (d.receiver == Receiver::cand_rake) {
                                    dec = detect_rake(spec, g, cand, p).winner;
                                    ops = op_count(DetectorKind::cand_rake, p, kk, nc);
                                } else {
                                    dec = detect_mf(dech, g, cand, p).winner;
                                    ops = op_count(DetectorKind::cand_mf, p, kk, nc);
                                }
                                break;
                            }
                            case Receiver::tdel:
                                dec = tdel->detect(spec);
                                ops = op_count(DetectorKind::tdel, p, 1);
                                break;
                            case Receiver::fast_rake: {
                                for (std::size_t k = 0; k < m; ++k) white[k] = sigma[s] * fast_noise[di * m + k];
                                dec = fast_sim_detect(*fast, a, white);
                                ops = op_count(DetectorKind::rake, p, truth.size());
                                break;
                            }
                        }
                        t.symbols += 1;
                        t.errors += dec != a ? 1 : 0;
                        t.candidates += nc;
                        t.ops += ops;
                    }
                }
            }
        } catch (const std::exception&) {
            failed[trial] = 1;
            per_trial[trial].assign(n_snr * n_det, detail::Tally{});
        }
    };
    detail::parallel_trials(cfg.n_trials, cfg.threads, run_trial);

    std::vector<detail::Tally> total(n_snr * n_det);
    SweepResult res;
    for (std::size_t t = 0; t < cfg.n_trials; ++t) {
        res.failed_trials += failed[t] ? 1 : 0;
        for (std::size_t i = 0; i < total.size(); ++i) total[i] += per_trial[t][i];
    }
    for (std::size_t j = 0; j < n_det; ++j)
        for (std::size_t s = 0; s < n_snr; ++s) {
            const auto& t = total[s * n_det + j];
            SerPoint pt;
            pt.detector = specs[j].label;
            pt.ebn0_db = cfg.ebn0_db[s];
            pt.errors = t.errors;
            pt.symbols = t.symbols;
            if (t.symbols) {
                const double n = static_cast<double>(t.symbols);
                pt.nc_avg = static_cast<double>(t.candidates) / n;
                pt.cmult = static_cast<double>(t.ops.cmult) / n;
                pt.cadd = static_cast<double>(t.ops.cadd) / n;
            }
            res.points.push_back(pt);
        }
    return res;
}

inline SweepResult run_ser_sweep(const SimConfig& cfg) {
    cfg.validate();
    return run_ser_sweep(cfg, cfg.detector_specs());
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

struct DeltaRow {
    Symbol a = 0;
    double coh = 0, noncoh = 0, ideal_mf = 0, mf = 0;
};

struct DeltaReport {
    std::vector<DeltaRow> rows;
    DeltaRow max;                     // column-wise maxima over a
    double coh_over_ideal_mf = 0.0;   // max coh / max ideal-mf
};

inline DeltaReport run_delta_report(const MultipathChannel& ch, int sf) {
    const LoRaParams p(sf);
    const auto g = dechirped_gain(p, ch);
    DeltaReport r;
    r.max.coh = r.max.noncoh = r.max.ideal_mf = r.max.mf = -std::numeric_limits<double>::infinity();
    for (Symbol a = 0; a < p.m(); ++a) {
        DeltaRow row{a, delta_indicator(g, a, DeltaVariant::coh, p), delta_indicator(g, a, DeltaVariant::noncoh, p),
                     delta_indicator(g, a, DeltaVariant::ideal_mf, p), delta_indicator(g, a, DeltaVariant::mf, p)};
        r.max.coh = std::max(r.max.coh, row.coh);
        r.max.noncoh = std::max(r.max.noncoh, row.noncoh);
        r.max.ideal_mf = std::max(r.max.ideal_mf, row.ideal_mf);
        r.max.mf = std::max(r.max.mf, row.mf);
        r.rows.push_back(row);
    }
    r.coh_over_ideal_mf = r.max.ideal_mf != 0.0 ? r.max.coh / r.max.ideal_mf : 0.0;
    return r;
}

struct ComplexityRow {
    int sf = 7;
    std::uint64_t k = 3;
    std::uint64_t n_c = 0;
    OpCount mf, rake, cand_mf, cand_rake;
    double mf_over_rake = 0.0;
    double cand_mf_over_cand_rake = 0.0;
};

inline std::vector<ComplexityRow> run_complexity_report(const std::vector<int>& sfs, std::uint64_t k,
                                                        const std::vector<std::uint64_t>& n_cs) {
    std::vector<ComplexityRow> out;
    for (int sf : sfs) {
        const LoRaParams p(sf);
        for (auto n_c : n_cs) {
            ComplexityRow r;
            r.sf = sf;
            r.k = k;
            r.n_c = n_c;
            r.mf = op_count(DetectorKind::mf, p, k);
            r.rake = op_count(DetectorKind::rake, p, k);
            r.cand_mf = op_count(DetectorKind::cand_mf, p, k, n_c);
            r.cand_rake = op_count(DetectorKind::cand_rake, p, k, n_c);
            r.mf_over_rake = complexity_ratio(r.mf, r.rake);
            r.cand_mf_over_cand_rake = complexity_ratio(r.cand_mf, r.cand_rake);
            out.push_back(r);
        }
    }
    return out;
}

/// Pilot-count, threshold and forced-delay studies for the RAKE receiver,
/// each with a perfect-CSIR reference. Rows are labelled `rake[...]`.
struct EstimationStudyConfig {
    SimConfig base;
    std::vector<std::size_t> n_p_values{1, 2, 3, 4, 6, 8};
    std::vector<double> rho_p_values{0.2, 0.4, 0.6, 0.8};
    std::vector<std::vector<std::size_t>> forced_sets{{0}, {0, 2}, {0, 2, 4}, {0, 2, 3}, {0, 2, 3, 5}, {0, 2, 3, 5, 9}};
    bool pilots = true;
    bool thresholds = true;
    bool forced = true;
};

inline std::string join_delays(const std::vector<std::size_t>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + std::to_string(v[i]);
    return s;
}

inline std::vector<SerPoint> run_estimation_study(const EstimationStudyConfig& sc) {
    std::vector<SerPoint> out;
    auto append = [&](const SweepResult& r) { out.insert(out.end(), r.points.begin(), r.points.end()); };
    const auto base_ch = resolve_channel(sc.base.channel);

    if (sc.pilots) {
        // The number of paths is known here; only N_p varies.
        for (auto np : sc.n_p_values) {
            SimConfig c = sc.base;
            c.n_p = np;
            CsirSpec est{CsirMode::estimated, c.rho_p, c.k_max, base_ch.size(), {}};
            std::vector<DetectorSpec> specs{{"rake[np=" + std::to_string(np) + "]", Receiver::rake, {}, {}, est}};
            if (np == sc.n_p_values.front())
                specs.insert(specs.begin(), DetectorSpec{"rake[perfect]", Receiver::rake, {}, {}, CsirSpec{}});
            append(run_ser_sweep(c, specs));
        }
    }
    if (sc.thresholds) {
        SimConfig c = sc.base;
        std::vector<DetectorSpec> specs{
            {"rake[perfect]", Receiver::rake, {}, {}, CsirSpec{}},
            {"rake[k_known]", Receiver::rake, {}, {}, CsirSpec{CsirMode::estimated, c.rho_p, c.k_max, base_ch.size(), {}}}};
        for (double rho : sc.rho_p_values) {
            std::ostringstream label;
            label << "rake[rho_p=" << rho << "]";
            specs.push_back({label.str(), Receiver::rake, {}, {}, CsirSpec{CsirMode::estimated, rho, c.k_max, {}, {}}});
        }
        append(run_ser_sweep(c, specs));
    }
    if (sc.forced) {
        SimConfig c = sc.base;
        c.channel = "c1";
        std::vector<DetectorSpec> specs{{"rake[perfect]", Receiver::rake, {}, {}, CsirSpec{}},
                                        {"coh", Receiver::coh, {}, {}, CsirSpec{}}};
        for (const auto& ks : sc.forced_sets)
            specs.push_back({"rake[k=" + join_delays(ks) + "]", Receiver::rake, {}, {},
                             CsirSpec{CsirMode::forced, c.rho_p, c.k_max, {}, ks}});
        // Keep the forced-study labels distinct from the other studies' rows.
        for (auto& s : specs) s.label = "c1:" + s.label;
        append(run_ser_sweep(c, specs));
    }
    return out;
}

/// SER of cand-RAKE with a fixed candidate count N_c = round(norm * M) for
/// each normalized count, alongside full RAKE, on common random numbers.
inline std::vector<SerPoint> run_candidate_sweep(const SimConfig& base, const std::vector<double>& nc_norm) {
    const auto p = base.params();
    std::vector<DetectorSpec> specs{{"rake", Receiver::rake, {}, {}, {}}};
    for (double v : nc_norm) {
        if (!(v > 0.0 && v <= 1.0)) throw ConfigError("nc_norm", "values must be in (0, 1]");
        const auto n_c = std::clamp<std::size_t>(
            static_cast<std::size_t>(std::llround(v * static_cast<double>(p.m()))), 1, p.m());
        std::ostringstream label;
        label << "cand_rake[nc_norm=" << v << "]";
        specs.push_back({label.str(), Receiver::cand_rake, n_c, {}, {}});
    }
    return run_ser_sweep(base, specs).points;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

inline constexpr const char* kSerCsvHeader = "detector,ebn0_db,errors,symbols,ser,ci95,nc_avg,cmult,cadd";

inline std::string csv_number(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

inline void write_ser_csv(std::ostream& os, const std::vector<SerPoint>& pts) {
    os << kSerCsvHeader << '\n';
    for (const auto& p : pts)
        os << p.detector << ',' << csv_number(p.ebn0_db) << ',' << p.errors << ',' << p.symbols << ','
           << csv_number(p.ser()) << ',' << csv_number(p.ci95()) << ',' << csv_number(p.nc_avg) << ','
           << csv_number(p.cmult) << ',' << csv_number(p.cadd) << '\n';
}

inline void write_delta_csv(std::ostream& os, const DeltaReport& r) {
    os << "a,delta_coh,delta_noncoh,delta_ideal_mf,delta_mf,coh_over_ideal_mf\n";
    for (const auto& row : r.rows)
        os << row.a << ',' << csv_number(row.coh) << ',' << csv_number(row.noncoh) << ','
           << csv_number(row.ideal_mf) << ',' << csv_number(row.mf) << ",\n";
    os << "max," << csv_number(r.max.coh) << ',' << csv_number(r.max.noncoh) << ',' << csv_number(r.max.ideal_mf)
       << ',' << csv_number(r.max.mf) << ',' << csv_number(r.coh_over_ideal_mf) << '\n';
}

inline void write_complexity_csv(std::ostream& os, const std::vector<ComplexityRow>& rows) {
    os << "sf,k,n_c,mf_cmult,mf_cadd,rake_cmult,rake_cadd,cand_mf_cmult,cand_mf_cadd,cand_rake_cmult,"
          "cand_rake_cadd,mf_over_rake,cand_mf_over_cand_rake\n";
    for (const auto& r : rows)
        os << r.sf << ',' << r.k << ',' << r.n_c << ',' << r.mf.cmult << ',' << r.mf.cadd << ',' << r.rake.cmult
           << ',' << r.rake.cadd << ',' << r.cand_mf.cmult << ',' << r.cand_mf.cadd << ',' << r.cand_rake.cmult << ','
           << r.cand_rake.cadd << ',' << csv_number(r.mf_over_rake) << ',' << csv_number(r.cand_mf_over_cand_rake)
           << '\n';
}

}  // namespace lorarake
