#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tasbridge/sim.hpp"
#include "tasbridge/trace.hpp"

namespace tasbridge::report {

namespace detail {

inline std::ofstream open_out(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
    return out;
}

inline nlohmann::json percentile_table(const EmpiricalDistribution& dist) {
    nlohmann::json j;
    j["min_ns"] = dist.min();
    j["p50_ns"] = dist.percentile(0.50);
    j["p99_ns"] = dist.percentile(0.99);
    j["p99_9_ns"] = dist.percentile(0.999);
    j["max_ns"] = dist.max();
    j["mean_ns"] = dist.mean();
    return j;
}

}  // namespace detail

inline void write_records_csv(const SimResult& result, const std::filesystem::path& path) {
    auto out = detail::open_out(path);
    out << "seq,flow,t_ms_out_ns,t_sl_in_ns,t_sl_out_ns,d_emp_ns,d_zwsl_ns,cycle_index,"
           "window_index,dropped\n";
    for (const auto& r : result.records) {
        out << r.seq << ',' << r.flow << ',' << r.t_ms_out << ',' << r.t_sl_in << ','
            << r.t_sl_out << ',' << r.d_emp << ',' << r.d_zwsl << ','
            << r.assignment.cycle_index << ',' << r.assignment.window_index << ','
            << (r.dropped ? 1 : 0) << '\n';
    }
}

inline nlohmann::json summary_json(const SimConfig& cfg, const SimResult& result) {
    nlohmann::json j;
    j["config"] = cfg.to_json();
    j["released"] = result.released;
    j["departed"] = result.departed;
    j["dropped"] = result.dropped;
    j["in_flight"] = result.in_flight;
    j["sync_error_ns"] = result.sync_error_ns;
    if (!result.d_emp_samples.empty()) {
        j["d_emp"] = detail::percentile_table(result.emp_distribution());
        j["d_zwsl"] = detail::percentile_table(result.zwsl_distribution());
    }
    j["window_histogram"] = nlohmann::json::array();
    for (const auto& [idx, bucket] : result.window_histogram)
        j["window_histogram"].push_back({{"window_index", idx},
                                         {"count", bucket.count},
                                         {"probability", bucket.probability},
                                         {"min_delay_ns", bucket.min_d_emp}});
    return j;
}

inline void write_summary_json(const SimConfig& cfg, const SimResult& result,
                               const std::filesystem::path& path) {
    auto out = detail::open_out(path);
    out << summary_json(cfg, result).dump(2) << '\n';
}

// One row per sweep point: headline delay statistics, the probability mass in
// window 0, and the analytical scenario class of the point's configuration.
inline void write_sweep_csv(const SimConfig& base, SweepAxis axis,
                            const std::vector<std::pair<std::int64_t, SimResult>>& points,
                            const SweepOptions& opt, double percentile,
                            const std::filesystem::path& path) {
    auto out = detail::open_out(path);
    out << "value,p50_ns,p99_9_ns,min_ns,max_ns,window0_probability,scenario\n";
    for (const auto& [value, result] : points) {
        const SimConfig cfg = configure_sweep_point(base, axis, value, opt);
        out << value;
        if (result.d_emp_samples.empty()) {
            out << ",,,,";
        } else {
            const auto dist = result.emp_distribution();
            out << ',' << dist.percentile(0.50) << ',' << dist.percentile(0.999) << ','
                << dist.min() << ',' << dist.max();
        }
        double w0 = 0.0;
        if (auto it = result.window_histogram.find(0); it != result.window_histogram.end())
            w0 = it->second.probability;
        out << ',' << w0;
        std::string scenario = "n/a";  // SL gate held open: no windows to classify
        if (cfg.sl_tas_enabled && !result.d_zwsl_samples.empty()) {
            const UncertaintyInterval interval =
                uncertainty_interval(result.zwsl_distribution(), percentile);
            const OffsetPlan plan =
                evaluate_plan(cfg.sl_offset, cfg.sl_gcl.window("DC").duration(),
                              cfg.sl_gcl.network_cycle_ns, interval);
            scenario = to_string(plan.scenario);
        }
        out << ',' << scenario << '\n';
    }
}

inline void write_matched_csv(const trace::MatchedTrace& t, const std::filesystem::path& path) {
    auto out = detail::open_out(path);
    out << "seq,t_ms_ns,t_sl_ns,delay_ns\n";
    for (const auto& p : t.pairs)
        out << p.seq << ',' << p.t_ms << ',' << p.t_sl << ',' << p.delay << '\n';
}

inline void write_cdf_csv(const trace::TraceStats& s, const std::filesystem::path& path) {
    auto out = detail::open_out(path);
    out << "delay_ns,cdf\n";
    for (const auto& [delay, f] : s.cdf) out << delay << ',' << f << '\n';
}

inline void write_windows_csv(const std::map<std::int64_t, trace::WindowReportRow>& hist,
                              const std::filesystem::path& path) {
    auto out = detail::open_out(path);
    out << "window_index,count,probability,min_delay_ns\n";
    for (const auto& [idx, row] : hist)
        out << idx << ',' << row.count << ',' << row.probability << ',' << row.min_delay << '\n';
}

inline nlohmann::json trace_summary_json(const trace::MatchedTrace& t,
                                         const trace::TraceStats& s) {
    nlohmann::json j;
    j["matched"] = s.count;
    j["unmatched_ms"] = t.unmatched_ms;
    j["unmatched_sl"] = t.unmatched_sl;
    j["negative_delays"] = t.negative_delays;
    j["warmup_discarded"] = t.warmup_discarded;
    j["min_ns"] = s.min;
    j["max_ns"] = s.max;
    j["mean_ns"] = s.mean;
    j["percentiles"] = nlohmann::json::object();
    for (const auto& [p, v] : s.percentiles) j["percentiles"][std::to_string(p)] = v;
    j["jitter_ns"] = nlohmann::json::object();
    for (const auto& [p, v] : s.jitter_at) j["jitter_ns"][std::to_string(p)] = v;
    return j;
}

}  // namespace tasbridge::report
