#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "tasbridge/delay.hpp"
#include "tasbridge/model.hpp"
#include "tasbridge/planner.hpp"

namespace tasbridge::trace {

// Column layout of a probe CSV. The timestamp unit is never guessed; silent
// ms/ns confusion is the classic failure mode of these logs.
struct CsvFormat {
    std::string seq_column = "seq";
    std::string time_column = "timestamp_ns";
    std::string time_unit = "ns";  // ns | us | ms | s

    Nanos to_ns(long double value) const {
        if (time_unit == "ns") return static_cast<Nanos>(value);
        if (time_unit == "us") return static_cast<Nanos>(value * 1e3L);
        if (time_unit == "ms") return static_cast<Nanos>(value * 1e6L);
        if (time_unit == "s") return static_cast<Nanos>(value * 1e9L);
        throw ConfigError("unknown time unit '" + time_unit + "'");
    }

    static CsvFormat from_json(const nlohmann::json& j) {
        CsvFormat f;
        f.seq_column = j.at("seq_column").get<std::string>();
        f.time_column = j.at("time_column").get<std::string>();
        f.time_unit = j.at("time_unit").get<std::string>();
        return f;
    }
};

struct ProbeRow {
    std::int64_t seq = 0;
    Nanos timestamp = 0;
};

struct ProbeLog {
    std::string port;
    std::string source;
    std::vector<ProbeRow> rows;
    std::vector<std::string> row_errors;
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.push_back("");
    return fields;
}

}  // namespace detail

// Parse a per-port timestamp log. Malformed rows are collected as diagnostics
// and only become fatal past a 1% corruption rate.
inline ProbeLog parse_probe_csv(const std::string& path, const CsvFormat& format,
                                const std::string& port = "") {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open probe file '" + path + "'");
    ProbeLog log;
    log.port = port.empty() ? path : port;
    log.source = path;

    std::string line;
    if (!std::getline(in, line)) throw ConfigError("probe file '" + path + "' is empty");
    const auto header = detail::split_csv_line(line);
    std::optional<std::size_t> seq_idx, time_idx;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == format.seq_column) seq_idx = i;
        if (header[i] == format.time_column) time_idx = i;
    }
    if (!seq_idx || !time_idx)
        throw ConfigError("probe file '" + path + "' lacks the declared seq/time columns");

    std::size_t line_no = 1;
    std::size_t total_rows = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        ++total_rows;
        const auto fields = detail::split_csv_line(line);
        try {
            if (fields.size() <= std::max(*seq_idx, *time_idx)) throw std::invalid_argument("short row");
            ProbeRow row;
            row.seq = std::stoll(fields[*seq_idx]);
            row.timestamp = format.to_ns(std::stold(fields[*time_idx]));
            log.rows.push_back(row);
        } catch (const std::exception&) {
            log.row_errors.push_back(path + ":" + std::to_string(line_no) + ": malformed row");
        }
    }
    if (total_rows == 0) throw ConfigError("probe file '" + path + "' has no data rows");
    if (log.row_errors.size() * 100 > total_rows)
        throw ConfigError("more than 1% malformed rows in '" + path + "'");
    return log;
}

// Undo 32-bit sequence counter wraparound by monotonic unwrapping with a
// half-range heuristic.
inline std::vector<std::int64_t> unwrap_sequences(const std::vector<std::int64_t>& seqs) {
    constexpr std::int64_t range = std::int64_t{1} << 32;
    std::vector<std::int64_t> out;
    out.reserve(seqs.size());
    std::int64_t base = 0;
    for (std::size_t i = 0; i < seqs.size(); ++i) {
        if (i > 0) {
            const std::int64_t prev = out.back() - base;
            if (seqs[i] - prev < -range / 2) base += range;
        }
        out.push_back(seqs[i] + base);
    }
    return out;
}

struct MatchedPair {
    std::int64_t seq = 0;
    Nanos t_ms = 0;
    Nanos t_sl = 0;
    Nanos delay = 0;
};

struct MatchedTrace {
    std::vector<MatchedPair> pairs;  // sorted by seq, sync-sane, post-warmup
    std::int64_t unmatched_ms = 0;
    std::int64_t unmatched_sl = 0;
    std::int64_t negative_delays = 0;  // sync anomalies, excluded from pairs
    std::int64_t warmup_discarded = 0;
};

// Inner-join the two probe logs on (unwrapped) sequence number. Rows released
// before `warmup` past the earliest MS timestamp are discarded, matching the
// measurement procedure's warm-up window.
inline MatchedTrace match(const ProbeLog& ms, const ProbeLog& sl, Nanos warmup = 0) {
    std::vector<std::int64_t> ms_seqs, sl_seqs;
    ms_seqs.reserve(ms.rows.size());
    sl_seqs.reserve(sl.rows.size());
    for (const auto& r : ms.rows) ms_seqs.push_back(r.seq);
    for (const auto& r : sl.rows) sl_seqs.push_back(r.seq);
    const auto ms_unwrapped = unwrap_sequences(ms_seqs);
    const auto sl_unwrapped = unwrap_sequences(sl_seqs);

    std::unordered_map<std::int64_t, Nanos> sl_by_seq;
    sl_by_seq.reserve(sl.rows.size());
    for (std::size_t i = 0; i < sl.rows.size(); ++i) sl_by_seq.emplace(sl_unwrapped[i], sl.rows[i].timestamp);

    Nanos start = 0;
    if (!ms.rows.empty()) {
        start = ms.rows.front().timestamp;
        for (const auto& r : ms.rows) start = std::min(start, r.timestamp);
    }
    const Nanos warmup_end = start + warmup;

    MatchedTrace out;
    std::int64_t matched_sl = 0;
    for (std::size_t i = 0; i < ms.rows.size(); ++i) {
        auto it = sl_by_seq.find(ms_unwrapped[i]);
        if (it == sl_by_seq.end()) {
            ++out.unmatched_ms;
            continue;
        }
        ++matched_sl;
        if (ms.rows[i].timestamp < warmup_end) {
            ++out.warmup_discarded;
            continue;
        }
        MatchedPair p;
        p.seq = ms_unwrapped[i];
        p.t_ms = ms.rows[i].timestamp;
        p.t_sl = it->second;
        p.delay = p.t_sl - p.t_ms;
        if (p.delay < 0) {
            ++out.negative_delays;
            continue;
        }
        out.pairs.push_back(p);
    }
    out.unmatched_sl = static_cast<std::int64_t>(sl.rows.size()) - matched_sl;
    if (out.pairs.empty() && out.warmup_discarded == 0)
        throw ConfigError("probe logs share no sequence numbers");
    std::sort(out.pairs.begin(), out.pairs.end(),
              [](const MatchedPair& a, const MatchedPair& b) { return a.seq < b.seq; });
    return out;
}

struct WindowReportRow {
    std::int64_t count = 0;
    double probability = 0.0;
    Nanos min_delay = 0;
    bool outside_gate = false;  // index from cycle arithmetic, t_sl not inside a window
};

// Per-window occupancy: each pair is assigned to the SL window instance
// containing t_sl, indexed relative to the window scheduled at the configured
// offset for the packet's MS cycle.
inline std::map<std::int64_t, WindowReportRow> window_report(const MatchedTrace& trace,
                                                             const GclConfig& sl_gcl, Nanos delta) {
    sl_gcl.validate();
    const Nanos T = sl_gcl.network_cycle_ns;
    const std::int64_t wraps = delta / T;
    std::map<std::int64_t, WindowReportRow> hist;
    std::int64_t total = 0;
    for (const auto& p : trace.pairs) {
        const std::int64_t ms_cycle = (p.t_ms - (sl_gcl.base_time_ns - delta % T)) / T;
        const std::int64_t sl_cycle = (p.t_sl - sl_gcl.base_time_ns) / T;
        const std::int64_t index = sl_cycle - ms_cycle - wraps;
        auto& row = hist[index];
        if (!gate_state(sl_gcl, "DC", p.t_sl)) row.outside_gate = true;
        if (row.count == 0 || p.delay < row.min_delay) row.min_delay = p.delay;
        ++row.count;
        ++total;
    }
    for (auto& [idx, row] : hist)
        row.probability = static_cast<double>(row.count) / static_cast<double>(total);
    return hist;
}

struct TraceStats {
    std::int64_t count = 0;
    Nanos min = 0;
    Nanos max = 0;
    double mean = 0.0;
    std::map<double, Nanos> percentiles;
    std::map<double, Nanos> jitter_at;           // hi(p) - min
    std::vector<std::pair<Nanos, double>> cdf;   // (delay, F(delay))
};

// Summary statistics of the matched delays at the requested percentiles.
inline TraceStats stats(const MatchedTrace& trace, const std::vector<double>& p_list,
                        std::size_t cdf_points = 1000) {
    if (trace.pairs.empty()) throw ConfigError("cannot compute statistics of an empty trace");
    std::vector<Nanos> delays;
    delays.reserve(trace.pairs.size());
    for (const auto& p : trace.pairs) delays.push_back(p.delay);
    EmpiricalDistribution dist(std::move(delays));

    TraceStats s;
    s.count = static_cast<std::int64_t>(dist.count());
    s.min = dist.min();
    s.max = dist.max();
    s.mean = dist.mean();
    for (double p : p_list) {
        s.percentiles[p] = dist.percentile(p);
        s.jitter_at[p] = jitter(uncertainty_interval(dist, p));
    }
    const std::size_t n = dist.count();
    const std::size_t points = std::min(cdf_points, n);
    for (std::size_t i = 1; i <= points; ++i) {
        const std::size_t rank = i * n / points;
        s.cdf.emplace_back(dist.samples()[rank - 1],
                           static_cast<double>(rank) / static_cast<double>(n));
    }
    return s;
}

}  // namespace tasbridge::trace
