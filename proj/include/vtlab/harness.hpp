#pragma once

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <thread>

#include "vtlab/asb.hpp"
#include "vtlab/calibration.hpp"
#include "vtlab/hlda.hpp"

namespace vtlab {

struct ExperimentConfig {
    // topology: generated random-regular unless a fixed edge list is given
    int nodes = 100;
    int degree = 4;
    int wavelengths = 16;
    uint64_t topology_seed = 1;
    std::string topology_file;
    int tx = 16;
    int rx = 16;
    // traffic
    double sigma = 1.0;
    double load = 0.3;
    int change_interval = 0;  // regenerate every R rounds; 0 = fixed traffic
    // controller
    std::string controller = "asb";  // "asb" | "hlda"
    AsbConfig asb;
    HldaConfig hlda;
    // execution
    int rounds = 400;
    int repetitions = 10;
    uint64_t base_seed = 42;
    std::string output_dir = "out";
    int snapshot_interval = 0;
    int jobs = 1;
};

struct RoundRecord {
    int round = 0;
    double u_max = 0.0;
    double v_g = 0.0;
    int established = 0;
    int removed = 0;
    int total_lightpaths = 0;
    double unroutable_fraction = 0.0;
    double mu_mean = 0.0;
};

struct RunSummary {
    double mean_u_max = 0.0;
    double max_u_max = 0.0;
    double mean_v_g = 0.0;
    double mean_changes = 0.0;
    double mean_total_lightpaths = 0.0;
    double mean_unroutable = 0.0;
    double efficiency = 0.0;  // mean_v_g / mean_changes
    double mu_mean = 0.0;
    double mu_std = 0.0;
    uint64_t mu_samples = 0;
    std::map<int, uint64_t> mu_histogram;
    uint64_t rounds_total = 0;
};

namespace detail {

inline std::string fmt6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

// Snap a value through its 6-decimal CSV representation so summaries
// computed in memory match summaries recomputed from emitted files exactly.
inline double round6(double v) { return std::atof(fmt6(v).c_str()); }

inline bool parse_bool(const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw std::invalid_argument("expected a boolean, got \"" + v + "\"");
}

}  // namespace detail

inline const char* kRoundCsvHeader =
    "round,u_max,v_g,established,removed,total_lightpaths,unroutable_fraction,mu_mean";

inline void emit_round_csv(const std::vector<RoundRecord>& records, std::ostream& out) {
    out << kRoundCsvHeader << '\n';
    for (const RoundRecord& r : records) {
        out << r.round << ',' << detail::fmt6(r.u_max) << ',' << detail::fmt6(r.v_g) << ','
            << r.established << ',' << r.removed << ',' << r.total_lightpaths << ','
            << detail::fmt6(r.unroutable_fraction) << ',' << detail::fmt6(r.mu_mean) << '\n';
    }
}

inline std::vector<RoundRecord> parse_round_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kRoundCsvHeader)
        throw std::invalid_argument("parse_round_csv: bad header");
    std::vector<RoundRecord> records;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        RoundRecord r;
        std::stringstream ss(line);
        std::string cell;
        auto next = [&]() {
            if (!std::getline(ss, cell, ',')) throw std::invalid_argument("parse_round_csv: short row");
            return cell;
        };
        r.round = std::stoi(next());
        r.u_max = std::stod(next());
        r.v_g = std::stod(next());
        r.established = std::stoi(next());
        r.removed = std::stoi(next());
        r.total_lightpaths = std::stoi(next());
        r.unroutable_fraction = std::stod(next());
        r.mu_mean = std::stod(next());
        records.push_back(r);
    }
    return records;
}

// -------- configuration --------

inline void apply_config_entry(ExperimentConfig& cfg, const std::string& key,
                               const std::string& value) {
    using detail::parse_bool;
    try {
        if (key == "topology.nodes") cfg.nodes = std::stoi(value);
        else if (key == "topology.degree") cfg.degree = std::stoi(value);
        else if (key == "topology.wavelengths") cfg.wavelengths = std::stoi(value);
        else if (key == "topology.seed") cfg.topology_seed = std::stoull(value);
        else if (key == "topology.file") cfg.topology_file = value;
        else if (key == "resources.tx") cfg.tx = std::stoi(value);
        else if (key == "resources.rx") cfg.rx = std::stoi(value);
        else if (key == "traffic.sigma") cfg.sigma = std::stod(value);
        else if (key == "traffic.load") cfg.load = std::stod(value);
        else if (key == "traffic.change_interval") cfg.change_interval = std::stoi(value);
        else if (key == "controller") {
            if (value != "asb" && value != "hlda")
                throw std::invalid_argument("must be \"asb\" or \"hlda\"");
            cfg.controller = value;
        } else if (key == "asb.t_max") cfg.asb.t_max = std::stod(value);
        else if (key == "asb.mu_mode") {
            if (value == "fixed") cfg.asb.mu_mode = MuMode::Fixed;
            else if (value == "mu_opt") cfg.asb.mu_mode = MuMode::MuOpt;
            else if (value == "resource_aware") cfg.asb.mu_mode = MuMode::ResourceAware;
            else throw std::invalid_argument("must be fixed, mu_opt or resource_aware");
        } else if (key == "asb.mu") cfg.asb.mu_value = std::stod(value);
        else if (key == "asb.update_mode") {
            if (value == "replacement") cfg.asb.update_mode = UpdateMode::Replacement;
            else if (value == "relaxation") cfg.asb.update_mode = UpdateMode::Relaxation;
            else throw std::invalid_argument("must be replacement or relaxation");
        } else if (key == "asb.two_phase") cfg.asb.two_phase_apply = parse_bool(value);
        else if (key == "asb.attractors") cfg.asb.attractor_capacity = std::stoi(value);
        else if (key == "asb.alpha") cfg.asb.alpha = std::stod(value);
        else if (key == "asb.beta") cfg.asb.beta = std::stod(value);
        else if (key == "asb.theta") cfg.asb.theta = std::stod(value);
        else if (key == "asb.zero_diagonal") cfg.asb.zero_diagonal = parse_bool(value);
        else if (key == "hlda.max_lightpaths") cfg.hlda.max_lightpaths = std::stoi(value);
        else if (key == "hlda.fill_leftover") cfg.hlda.fill_leftover = parse_bool(value);
        else if (key == "run.rounds") cfg.rounds = std::stoi(value);
        else if (key == "run.repetitions") cfg.repetitions = std::stoi(value);
        else if (key == "run.seed") cfg.base_seed = std::stoull(value);
        else if (key == "run.output_dir") cfg.output_dir = value;
        else if (key == "run.snapshot_interval") cfg.snapshot_interval = std::stoi(value);
        else if (key == "run.jobs") cfg.jobs = std::stoi(value);
        else throw std::invalid_argument("unknown configuration key \"" + key + "\"");
    } catch (const std::invalid_argument& e) {
        std::string what = e.what();
        if (what.find(key) != std::string::npos) throw;
        throw std::invalid_argument("config key \"" + key + "\": " + what);
    }
}

inline void apply_override(ExperimentConfig& cfg, const std::string& assignment) {
    const size_t eq = assignment.find('=');
    if (eq == std::string::npos)
        throw std::invalid_argument("override must look like key=value: " + assignment);
    apply_config_entry(cfg, assignment.substr(0, eq), assignment.substr(eq + 1));
}

/// Flat key=value text, '#' comments, dotted section prefixes.
inline ExperimentConfig parse_config(std::istream& in) {
    ExperimentConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto begin = line.find_first_not_of(" \t\r");
        if (begin == std::string::npos) continue;
        const auto end = line.find_last_not_of(" \t\r");
        line = line.substr(begin, end - begin + 1);
        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": expected key=value");
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t");
            if (b == std::string::npos) return std::string();
            const auto e = s.find_last_not_of(" \t");
            return s.substr(b, e - b + 1);
        };
        apply_config_entry(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return cfg;
}

inline void validate_config(const ExperimentConfig& cfg) {
    if (cfg.rounds < 1) throw std::invalid_argument("run.rounds must be >= 1");
    if (cfg.repetitions < 1) throw std::invalid_argument("run.repetitions must be >= 1");
    if (!(cfg.sigma > 0.0)) throw std::invalid_argument("traffic.sigma must be > 0");
    if (cfg.load < 0.0 || cfg.load > 1.0) throw std::invalid_argument("traffic.load must lie in [0,1]");
    if (cfg.tx <= 0 || cfg.rx <= 0) throw std::invalid_argument("resources.tx/rx must be positive");
    if (cfg.jobs < 1) throw std::invalid_argument("run.jobs must be >= 1");
}

inline PhysicalTopology build_topology(const ExperimentConfig& cfg) {
    if (!cfg.topology_file.empty()) {
        std::ifstream in(cfg.topology_file);
        if (!in) throw std::runtime_error("cannot open topology file " + cfg.topology_file);
        return load_topology(in);
    }
    return generate_regular_topology(cfg.nodes, cfg.degree, cfg.topology_seed, cfg.wavelengths);
}

// -------- execution --------

namespace detail {

struct RepetitionResult {
    std::vector<RoundRecord> records;
    MuCollector mu;
};

struct SnapshotRequest {
    int repetition;
    int round;
    std::string text;
};

inline RepetitionResult run_repetition(const ExperimentConfig& cfg, const PhysicalTopology& topo,
                                       int rep, std::vector<SnapshotRequest>* snapshots) {
    const uint64_t rep_seed = cfg.base_seed + static_cast<uint64_t>(rep);
    const int n = topo.node_count;

    TrafficMatrix raw = generate_lognormal_matrix(n, cfg.sigma, derive_seed(rep_seed, stream::kTraffic, 0));
    HldaConfig reference_cfg;
    reference_cfg.max_lightpaths = n * cfg.tx;
    reference_cfg.fill_leftover = true;
    const VirtualTopology reference_vt =
        hlda_build(raw, topo, cfg.tx, cfg.rx, reference_cfg, derive_seed(rep_seed, stream::kReferenceVt));
    TrafficMatrix traffic = calibrate(raw, reference_vt, cfg.load);

    NetworkState state(topo, cfg.tx, cfg.rx);
    Rng noise(derive_seed(rep_seed, stream::kNoise));

    const bool is_asb = cfg.controller == "asb";
    AsbController controller(n, cfg.asb);
    if (is_asb) {
        Rng init(derive_seed(rep_seed, stream::kInit));
        const double p0 =
            static_cast<double>(std::min(cfg.tx, topo.wavelengths_per_fiber)) / (n - 1);
        controller.seed_initial_state(init, p0);
    }

    RepetitionResult result;
    result.records.reserve(cfg.rounds);
    const uint64_t mu_offers = static_cast<uint64_t>(pair_count(n)) * cfg.rounds * cfg.repetitions;
    result.mu.stride = std::max<uint64_t>(1, (mu_offers + 999999) / 1000000);

    int traffic_epoch = 0;
    for (int round = 1; round <= cfg.rounds; ++round) {
        if (cfg.change_interval > 0 && round > 1 && (round - 1) % cfg.change_interval == 0) {
            ++traffic_epoch;
            raw = generate_lognormal_matrix(n, cfg.sigma,
                                            derive_seed(rep_seed, stream::kTraffic, traffic_epoch));
            traffic = calibrate(raw, reference_vt, cfg.load);
        }

        RoundRecord rec;
        rec.round = round;
        if (is_asb) {
            const UtilizationReport seen = state.measure(traffic);
            const AsbRoundOutcome out = controller.round(state, seen.u_max, noise, &result.mu);
            rec.established = out.established;
            rec.removed = out.removed;
            rec.mu_mean = out.mu_mean;
        } else {
            const RoundDelta delta =
                hlda_round(state, traffic, cfg.hlda, derive_seed(rep_seed, stream::kHlda, traffic_epoch));
            rec.established = delta.established;
            rec.removed = delta.removed;
        }
        // Reported performance: the topology that carries this round's
        // traffic, i.e. the state after the controller acted.
        const UtilizationReport served = state.measure(traffic);
        rec.u_max = round6(served.u_max);
        rec.v_g = round6(compute_activity(served.u_max));
        rec.total_lightpaths = state.total_lightpaths();
        rec.unroutable_fraction = round6(served.unroutable_fraction);
        rec.mu_mean = round6(rec.mu_mean);
        result.records.push_back(rec);

        if (snapshots && cfg.snapshot_interval > 0 && round % cfg.snapshot_interval == 0) {
            std::ostringstream text;
            state.write_snapshot(text);
            if (is_asb)
                for (size_t s = 0; s < controller.memory().stored(); ++s)
                    text << "attractor " << s << ' ' << bits_to_hex(controller.memory().attractor(s))
                         << '\n';
            snapshots->push_back({rep, round, text.str()});
        }
    }
    return result;
}

inline std::filesystem::path resolve_output_dir(const std::string& dir) {
    std::filesystem::path p(dir);
    if (p.is_relative()) {
        if (const char* root = std::getenv("VTLAB_OUTPUT_ROOT")) p = std::filesystem::path(root) / p;
    }
    return p;
}

}  // namespace detail

inline RunSummary summarize(const std::vector<std::vector<RoundRecord>>& per_rep,
                            const std::vector<MuCollector>& collectors) {
    RunSummary s;
    double changes = 0.0;
    for (const auto& records : per_rep) {
        for (const RoundRecord& r : records) {
            s.mean_u_max += r.u_max;
            s.max_u_max = std::max(s.max_u_max, r.u_max);
            s.mean_v_g += r.v_g;
            changes += r.established + r.removed;
            s.mean_total_lightpaths += r.total_lightpaths;
            s.mean_unroutable += r.unroutable_fraction;
            ++s.rounds_total;
        }
    }
    if (s.rounds_total > 0) {
        const double k = static_cast<double>(s.rounds_total);
        s.mean_u_max /= k;
        s.mean_v_g /= k;
        s.mean_changes = changes / k;
        s.mean_total_lightpaths /= k;
        s.mean_unroutable /= k;
        s.efficiency = s.mean_v_g / s.mean_changes;  // inf when nothing ever changed
    }
    double sum = 0.0, sum_sq = 0.0;
    for (const MuCollector& c : collectors) {
        s.mu_samples += c.samples;
        sum += c.sum;
        sum_sq += c.sum_sq;
        for (const auto& [bin, count] : c.histogram) s.mu_histogram[bin] += count;
    }
    if (s.mu_samples > 0) {
        s.mu_mean = sum / s.mu_samples;
        s.mu_std = std::sqrt(std::max(0.0, sum_sq / s.mu_samples - s.mu_mean * s.mu_mean));
    }
    return s;
}

struct RunResult {
    RunSummary summary;
    std::vector<std::vector<RoundRecord>> per_rep;
};

/// Executes repetitions x rounds. Repetition r derives every stochastic
/// stream from base_seed + r while the topology stays fixed, writes one
/// per-round CSV per repetition plus summary files, and is byte-for-byte
/// deterministic for a given config regardless of run.jobs.
inline RunResult run_experiment(const ExperimentConfig& cfg, bool write_files = true) {
    validate_config(cfg);
    if (cfg.controller != "asb" && cfg.controller != "hlda")
        throw std::invalid_argument("controller must be \"asb\" or \"hlda\"");
    const PhysicalTopology topo = build_topology(cfg);

    std::vector<detail::RepetitionResult> reps(cfg.repetitions);
    std::vector<std::vector<detail::SnapshotRequest>> snapshots(cfg.repetitions);
    const int jobs = std::max(1, std::min(cfg.jobs, cfg.repetitions));
    if (jobs == 1) {
        for (int r = 0; r < cfg.repetitions; ++r)
            reps[r] = detail::run_repetition(cfg, topo, r,
                                             cfg.snapshot_interval > 0 ? &snapshots[r] : nullptr);
    } else {
        std::vector<std::thread> pool;
        std::atomic<int> cursor{0};
        for (int t = 0; t < jobs; ++t) {
            pool.emplace_back([&]() {
                for (;;) {
                    const int r = cursor.fetch_add(1);
                    if (r >= cfg.repetitions) return;
                    reps[r] = detail::run_repetition(cfg, topo, r,
                                                     cfg.snapshot_interval > 0 ? &snapshots[r] : nullptr);
                }
            });
        }
        for (auto& t : pool) t.join();
    }

    RunResult result;
    result.per_rep.reserve(cfg.repetitions);
    std::vector<MuCollector> collectors;
    for (auto& rep : reps) {
        result.per_rep.push_back(std::move(rep.records));
        collectors.push_back(rep.mu);
    }
    result.summary = summarize(result.per_rep, collectors);

    if (write_files) {
        namespace fs = std::filesystem;
        const fs::path out_dir = detail::resolve_output_dir(cfg.output_dir);
        std::error_code ec;
        fs::create_directories(out_dir, ec);
        if (!fs::exists(out_dir))
            throw std::runtime_error("cannot create output directory " + out_dir.string());

        for (int r = 0; r < cfg.repetitions; ++r) {
            std::ofstream f(out_dir / ("run_rep" + std::to_string(r) + ".csv"));
            if (!f) throw std::runtime_error("output path is not writable: " + out_dir.string());
            emit_round_csv(result.per_rep[r], f);
        }
        {
            std::ofstream f(out_dir / "summary.csv");
            f << "mean_u_max,max_u_max,mean_v_g,mean_changes,mean_total_lightpaths,"
                 "mean_unroutable,efficiency,mu_mean,mu_std\n";
            const RunSummary& s = result.summary;
            f << detail::fmt6(s.mean_u_max) << ',' << detail::fmt6(s.max_u_max) << ','
              << detail::fmt6(s.mean_v_g) << ',' << detail::fmt6(s.mean_changes) << ','
              << detail::fmt6(s.mean_total_lightpaths) << ',' << detail::fmt6(s.mean_unroutable)
              << ',' << detail::fmt6(s.efficiency) << ',' << detail::fmt6(s.mu_mean) << ','
              << detail::fmt6(s.mu_std) << '\n';
        }
        if (result.summary.mu_samples > 0) {
            std::ofstream f(out_dir / "mu_hist.csv");
            f << "bin_low,count\n";
            for (const auto& [bin, count] : result.summary.mu_histogram)
                f << detail::fmt6(bin * 0.05) << ',' << count << '\n';
        }
        {
            std::ofstream f(out_dir / "meta.txt");
            f << "controller=" << cfg.controller << '\n'
              << "nodes=" << topo.node_count << '\n'
              << "degree=" << cfg.degree << '\n'
              << "wavelengths=" << topo.wavelengths_per_fiber << '\n'
              << "tx=" << cfg.tx << "\nrx=" << cfg.rx << '\n'
              << "sigma=" << cfg.sigma << "\nload=" << cfg.load << '\n'
              << "change_interval=" << cfg.change_interval << '\n'
              << "rounds=" << cfg.rounds << "\nrepetitions=" << cfg.repetitions << '\n'
              << "base_seed=" << cfg.base_seed << '\n'
              << "note=topology is fixed across repetitions; traffic, noise and initial "
                 "attractors are resampled per repetition from seed base_seed+rep\n";
        }
        for (int r = 0; r < cfg.repetitions; ++r) {
            for (const auto& snap : snapshots[r]) {
                std::ofstream f(out_dir / ("vt_rep" + std::to_string(snap.repetition) + "_round" +
                                           std::to_string(snap.round) + ".txt"));
                f << snap.text;
            }
        }
    }
    return result;
}

struct SweepRow {
    std::string param;
    double value = 0.0;
    RunSummary summary;
};

inline void emit_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& out) {
    out << "param,value,mean_u_max,max_u_max,mean_v_g,mean_changes,mean_total_lightpaths,"
           "mean_unroutable,efficiency,mu_mean,mu_std\n";
    char value_buf[64];
    for (const SweepRow& row : rows) {
        std::snprintf(value_buf, sizeof(value_buf), "%.6g", row.value);
        const RunSummary& s = row.summary;
        out << row.param << ',' << value_buf << ',' << detail::fmt6(s.mean_u_max) << ','
            << detail::fmt6(s.max_u_max) << ',' << detail::fmt6(s.mean_v_g) << ','
            << detail::fmt6(s.mean_changes) << ',' << detail::fmt6(s.mean_total_lightpaths) << ','
            << detail::fmt6(s.mean_unroutable) << ',' << detail::fmt6(s.efficiency) << ','
            << detail::fmt6(s.mu_mean) << ',' << detail::fmt6(s.mu_std) << '\n';
    }
}

/// One full run per value; row order follows the input order.
inline std::vector<SweepRow> sweep(const ExperimentConfig& base, const std::string& param,
                                   const std::vector<double>& values, bool write_files = true) {
    std::vector<SweepRow> rows;
    for (double value : values) {
        ExperimentConfig cfg = base;
        char tag[64];
        std::snprintf(tag, sizeof(tag), "%.6g", value);
        if (param == "mu") {
            if (cfg.controller != "asb")
                throw std::invalid_argument("sweep mu requires controller=asb");
            cfg.asb.mu_mode = MuMode::Fixed;
            cfg.asb.mu_value = value;
        } else if (param == "load") {
            cfg.load = value;
        } else if (param == "max_lightpaths") {
            if (cfg.controller != "hlda")
                throw std::invalid_argument("sweep max_lightpaths requires controller=hlda");
            cfg.hlda.max_lightpaths = static_cast<int>(value + 0.5);
        } else {
            throw std::invalid_argument("unknown sweep parameter \"" + param + "\"");
        }
        cfg.output_dir = (std::filesystem::path(base.output_dir) /
                          (param + std::string("_") + tag)).string();
        rows.push_back({param, value, run_experiment(cfg, write_files).summary});
    }
    if (write_files) {
        const std::filesystem::path out_dir = detail::resolve_output_dir(base.output_dir);
        std::error_code ec;
        std::filesystem::create_directories(out_dir, ec);
        std::ofstream f(out_dir / "sweep.csv");
        if (!f) throw std::runtime_error("output path is not writable: " + out_dir.string());
        emit_sweep_csv(rows, f);
    }
    return rows;
}

}  // namespace vtlab
