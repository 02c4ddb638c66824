#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tasbridge/model.hpp"
#include "tasbridge/planner.hpp"
#include "tasbridge/profiles.hpp"
#include "tasbridge/report.hpp"
#include "tasbridge/sim.hpp"
#include "tasbridge/trace.hpp"

namespace fs = std::filesystem;
using namespace tasbridge;

namespace {

nlohmann::json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    return nlohmann::json::parse(in);
}

EmpiricalDistribution load_pool(const std::string& pool_csv, const std::string& profile) {
    if (!pool_csv.empty()) return EmpiricalDistribution::load_csv(pool_csv);
    if (!profile.empty()) return profiles::builtin_pool(profile);
    throw ConfigError("either --pool or --profile is required");
}

struct GlobalOpts {
    std::uint64_t seed = 1;
    bool seed_given = false;
    std::string out = "out";
    double percentile = 0.999;
    Nanos warmup_ns = -1;  // -1: keep the config/preset default
};

int cmd_plan(const GlobalOpts& g, const std::string& pool_csv, const std::string& profile,
             std::int64_t packet_bytes, Nanos app_cycle, std::int64_t burst, std::int64_t rate_bps,
             Nanos margin, Nanos eval_offset, Nanos eval_window, Nanos eval_cycle) {
    const EmpiricalDistribution pool = load_pool(pool_csv, profile);
    OffsetPlan plan;
    if (eval_cycle > 0) {  // evaluate an explicit (offset, window, cycle) triple
        plan = evaluate_plan(eval_offset, eval_window, eval_cycle,
                             uncertainty_interval(pool, g.percentile));
    } else {
        const FlowSpec flow = FlowSpec::dc_flow(packet_bytes, app_cycle, burst);
        const Link egress{"MS", "NW-TT", rate_bps, 0};
        plan = recommend(pool, flow, egress, g.percentile, margin);
    }
    std::cout << plan.to_json().dump(2) << '\n';
    fs::create_directories(g.out);
    std::ofstream(fs::path(g.out) / "plan.json") << plan.to_json().dump(2) << '\n';
    return is_deterministic(plan.scenario) ? 0 : 2;
}

int cmd_simulate(const GlobalOpts& g, const std::string& config_path, bool records) {
    SimConfig cfg = profiles::parse_sim_config(load_json(config_path));
    if (g.seed_given) cfg.seed = g.seed;
    if (g.warmup_ns >= 0) cfg.warmup_ns = g.warmup_ns;
    const SimResult result = run(cfg);
    fs::create_directories(g.out);
    report::write_summary_json(cfg, result, fs::path(g.out) / "summary.json");
    if (records) report::write_records_csv(result, fs::path(g.out) / "records.csv");
    std::cout << report::summary_json(cfg, result).dump(2) << '\n';
    return 0;
}

int cmd_experiment(const GlobalOpts& g, const std::string& name, Nanos duration, bool records) {
    profiles::ExperimentPreset preset = profiles::make_preset(name);
    if (g.seed_given) preset.base.seed = g.seed;
    if (duration > 0) preset.base.duration_ns = duration;
    if (g.warmup_ns >= 0) preset.base.warmup_ns = g.warmup_ns;
    const auto points = sweep(preset.base, preset.axis, preset.values, preset.options);
    const fs::path out = fs::path(g.out) / preset.name;
    fs::create_directories(out);
    for (const auto& [value, result] : points) {
        const SimConfig cfg = configure_sweep_point(preset.base, preset.axis, value, preset.options);
        const std::string tag = std::to_string(value);
        report::write_summary_json(cfg, result, out / ("summary_" + tag + ".json"));
        if (records) report::write_records_csv(result, out / ("records_" + tag + ".csv"));
    }
    report::write_sweep_csv(preset.base, preset.axis, points, preset.options, g.percentile,
                            out / "sweep.csv");
    std::cout << "wrote " << points.size() << " sweep points to " << out.string() << '\n';
    return 0;
}

int cmd_analyze(const GlobalOpts& g, const std::string& ms_path, const std::string& sl_path,
                const std::string& format_path, const std::string& seq_col,
                const std::string& time_col, const std::string& time_unit,
                const std::string& gcl_path, Nanos offset) {
    trace::CsvFormat format;
    if (!format_path.empty()) {
        format = trace::CsvFormat::from_json(load_json(format_path));
    } else {
        format.seq_column = seq_col;
        format.time_column = time_col;
        format.time_unit = time_unit;
    }
    const auto ms = trace::parse_probe_csv(ms_path, format, "MS");
    const auto sl = trace::parse_probe_csv(sl_path, format, "SL");
    const Nanos warmup = g.warmup_ns >= 0 ? g.warmup_ns : 0;
    const auto matched = trace::match(ms, sl, warmup);
    const auto stats = trace::stats(matched, {0.50, 0.99, g.percentile});

    fs::create_directories(g.out);
    report::write_matched_csv(matched, fs::path(g.out) / "matched.csv");
    report::write_cdf_csv(stats, fs::path(g.out) / "cdf.csv");
    nlohmann::json summary = report::trace_summary_json(matched, stats);
    if (!gcl_path.empty()) {
        const GclConfig gcl = GclConfig::from_json(load_json(gcl_path));
        const auto hist = trace::window_report(matched, gcl, offset);
        report::write_windows_csv(hist, fs::path(g.out) / "windows.csv");
        summary["windows"] = nlohmann::json::array();
        for (const auto& [idx, row] : hist)
            summary["windows"].push_back({{"window_index", idx},
                                          {"count", row.count},
                                          {"probability", row.probability},
                                          {"min_delay_ns", row.min_delay},
                                          {"outside_gate", row.outside_gate}});
    }
    std::ofstream(fs::path(g.out) / "summary.json") << summary.dump(2) << '\n';
    std::cout << summary.dump(2) << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Time-aware-shaper planning, simulation and trace analysis for a "
                 "TSN path crossing a stochastic 5G bridge"};
    app.require_subcommand(1);

    GlobalOpts g;
    app.add_option("--seed", g.seed, "RNG seed");
    app.add_option("--out", g.out, "output directory");
    app.add_option("--percentile", g.percentile, "tail percentile for interval bounds");
    app.add_option("--warmup-ns", g.warmup_ns, "warm-up interval to discard");
    app.fallthrough();

    auto* plan = app.add_subcommand("plan", "derive or evaluate TAS parameters from a delay pool");
    std::string pool_csv, profile;
    std::int64_t packet_bytes = 200, burst = 29, rate_bps = 1'000'000'000;
    Nanos app_cycle = 30 * kMillisecond, margin = -1;
    Nanos eval_offset = 0, eval_window = 0, eval_cycle = 0;
    plan->add_option("--pool", pool_csv, "delay pool CSV (delay_ns column)");
    plan->add_option("--profile", profile, "builtin delay profile name");
    plan->add_option("--packet-bytes", packet_bytes, "DC packet size, on-wire bytes");
    plan->add_option("--app-cycle-ns", app_cycle, "application cycle");
    plan->add_option("--burst", burst, "packets per application cycle");
    plan->add_option("--rate-bps", rate_bps, "egress link rate");
    plan->add_option("--margin-ns", margin, "safety margin above the percentile bound");
    plan->add_option("--offset-ns", eval_offset, "evaluate this offset instead of planning");
    plan->add_option("--window-ns", eval_window, "window for evaluation mode");
    plan->add_option("--cycle-ns", eval_cycle, "network cycle for evaluation mode");

    auto* simulate = app.add_subcommand("simulate", "run one simulation from a config file");
    std::string config_path;
    bool records = false;
    simulate->add_option("--config", config_path, "simulation config JSON")->required();
    simulate->add_flag("--records", records, "also write per-packet records.csv");

    auto* experiment = app.add_subcommand("experiment", "run a predefined parameter sweep");
    std::string exp_name;
    Nanos duration = 0;
    bool exp_records = false;
    experiment
        ->add_option("--name", exp_name,
                     "exp1_rate_sweep | exp2_offset_sweep | exp3_cycle_sweep | "
                     "exp4_same_priority | exp5_be_load")
        ->required();
    experiment->add_option("--duration-ns", duration, "override the preset run length");
    experiment->add_flag("--records", exp_records, "also write per-packet records per point");

    auto* analyze = app.add_subcommand("analyze", "match and summarize two probe CSV logs");
    std::string ms_path, sl_path, format_path, gcl_path;
    std::string seq_col = "seq", time_col = "timestamp_ns", time_unit = "ns";
    Nanos offset = 0;
    analyze->add_option("--ms", ms_path, "MS-side probe CSV")->required();
    analyze->add_option("--sl", sl_path, "SL-side probe CSV")->required();
    analyze->add_option("--format", format_path, "CSV format descriptor JSON");
    analyze->add_option("--seq-column", seq_col, "sequence number column");
    analyze->add_option("--time-column", time_col, "timestamp column");
    analyze->add_option("--time-unit", time_unit, "timestamp unit: ns | us | ms | s");
    analyze->add_option("--gcl", gcl_path, "SL gate schedule JSON for the window report");
    analyze->add_option("--offset-ns", offset, "configured MS-to-SL offset for the window report");

    CLI11_PARSE(app, argc, argv);
    g.seed_given = app.count("--seed") > 0;

    try {
        if (plan->parsed())
            return cmd_plan(g, pool_csv, profile, packet_bytes, app_cycle, burst, rate_bps, margin,
                            eval_offset, eval_window, eval_cycle);
        if (simulate->parsed()) return cmd_simulate(g, config_path, records);
        if (experiment->parsed()) return cmd_experiment(g, exp_name, duration, exp_records);
        if (analyze->parsed())
            return cmd_analyze(g, ms_path, sl_path, format_path, seq_col, time_col, time_unit,
                               gcl_path, offset);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
