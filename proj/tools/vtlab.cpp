// Command-line front end: run a configured experiment, sweep a control
// parameter, or print graph statistics for a topology edge list.

#include <iostream>

#include <CLI11.hpp>

#include "vtlab/harness.hpp"

namespace {

vtlab::ExperimentConfig load_config(const std::string& path,
                                    const std::vector<std::string>& overrides) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file " + path);
    vtlab::ExperimentConfig cfg = vtlab::parse_config(in);
    for (const std::string& assignment : overrides) vtlab::apply_override(cfg, assignment);
    return cfg;
}

std::vector<double> parse_values(const std::string& csv) {
    std::vector<double> values;
    std::stringstream ss(csv);
    std::string cell;
    while (std::getline(ss, cell, ','))
        if (!cell.empty()) values.push_back(std::stod(cell));
    return values;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"vtlab - virtual topology reconfiguration laboratory"};
    app.require_subcommand(1);

    std::string config_path, out_dir, param, values_csv, edge_list;
    std::vector<std::string> overrides;

    CLI::App* run = app.add_subcommand("run", "execute one experiment configuration");
    run->add_option("config", config_path, "key=value configuration file")->required();
    run->add_option("--set", overrides, "override a config entry (key=value)");
    run->add_option("--out", out_dir, "override run.output_dir");

    CLI::App* sw = app.add_subcommand("sweep", "run once per control-parameter value");
    sw->add_option("config", config_path, "key=value configuration file")->required();
    sw->add_option("--param", param, "one of mu, load, max_lightpaths")->required();
    sw->add_option("--values", values_csv, "comma-separated values")->required();
    sw->add_option("--set", overrides, "override a config entry (key=value)");
    sw->add_option("--out", out_dir, "override run.output_dir");

    CLI::App* stats = app.add_subcommand("stats", "print graph statistics of an edge list");
    stats->add_option("edge-list", edge_list, "file with \"n m W\" header and one \"u v\" per line")
        ->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            vtlab::ExperimentConfig cfg = load_config(config_path, overrides);
            if (!out_dir.empty()) cfg.output_dir = out_dir;
            const vtlab::RunResult result = vtlab::run_experiment(cfg);
            const vtlab::RunSummary& s = result.summary;
            std::cout << "rounds=" << s.rounds_total << " mean_u_max=" << s.mean_u_max
                      << " mean_v_g=" << s.mean_v_g << " mean_changes=" << s.mean_changes
                      << " mean_lightpaths=" << s.mean_total_lightpaths
                      << " efficiency=" << s.efficiency << '\n';
        } else if (sw->parsed()) {
            vtlab::ExperimentConfig cfg = load_config(config_path, overrides);
            if (!out_dir.empty()) cfg.output_dir = out_dir;
            const auto rows = vtlab::sweep(cfg, param, parse_values(values_csv));
            for (const auto& row : rows)
                std::cout << row.param << '=' << row.value << " mean_u_max=" << row.summary.mean_u_max
                          << " mean_v_g=" << row.summary.mean_v_g
                          << " mean_changes=" << row.summary.mean_changes
                          << " mean_lightpaths=" << row.summary.mean_total_lightpaths
                          << " efficiency=" << row.summary.efficiency << '\n';
        } else if (stats->parsed()) {
            std::ifstream in(edge_list);
            if (!in) throw std::runtime_error("cannot open edge list " + edge_list);
            const vtlab::PhysicalTopology topo = vtlab::load_topology(in);
            const vtlab::GraphStats gs = vtlab::graph_stats(topo);
            std::cout << "nodes=" << topo.node_count << " fibers=" << topo.fiber_count()
                      << " wavelengths=" << topo.wavelengths_per_fiber << " degree=" << gs.degree
                      << " avg_path_length=" << gs.avg_path_length
                      << " clustering=" << gs.clustering_coefficient
                      << " diameter=" << gs.diameter << '\n';
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
