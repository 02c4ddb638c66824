#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace tasbridge {

// All times are integer nanoseconds from an absolute epoch. The event clock
// never touches floating point.
using Nanos = std::int64_t;

constexpr Nanos kMicrosecond = 1'000;
constexpr Nanos kMillisecond = 1'000'000;
constexpr Nanos kSecond = 1'000'000'000;

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Serialization time of a frame of `bytes` on-wire bytes over a link of
// `rate_bps` bits per second, rounded up to whole nanoseconds. Exact for the
// usual 1 Gb/s case.
inline Nanos tran_delay_ns(std::int64_t bytes, std::int64_t rate_bps) {
    if (rate_bps <= 0) throw ConfigError("link rate must be positive");
    const __int128 bits = static_cast<__int128>(bytes) * 8 * kSecond;
    return static_cast<Nanos>((bits + rate_bps - 1) / rate_bps);
}

enum class TrafficClass { DC, BE, PTP };

inline const char* to_string(TrafficClass c) {
    switch (c) {
        case TrafficClass::DC: return "DC";
        case TrafficClass::BE: return "BE";
        case TrafficClass::PTP: return "PTP";
    }
    return "?";
}

struct Link {
    std::string from;
    std::string to;
    std::int64_t rate_bps = 1'000'000'000;
    Nanos prop_ns = 0;
};

// Directed MS -> SL path with the 5G segment in the middle.
struct Topology {
    std::vector<std::string> nodes;
    std::vector<Link> links;
    std::vector<std::string> fiveg_nodes;
    std::vector<std::size_t> fiveg_links;  // indices into links
    std::vector<std::string> tsn_nodes;
    std::vector<std::size_t> tsn_links;

    void validate() const {
        if (nodes.size() < 2 || links.size() + 1 != nodes.size())
            throw ConfigError("topology must be a single directed path");
        for (std::size_t i = 0; i < links.size(); ++i) {
            if (links[i].from != nodes[i] || links[i].to != nodes[i + 1])
                throw ConfigError("links do not follow the node sequence");
            if (links[i].rate_bps <= 0) throw ConfigError("link capacity must be > 0");
            if (links[i].prop_ns < 0) throw ConfigError("propagation delay must be >= 0");
        }
        for (auto idx : fiveg_links)
            if (idx >= links.size()) throw ConfigError("5G link index out of range");
        for (auto idx : tsn_links) {
            if (idx >= links.size()) throw ConfigError("TSN link index out of range");
            if (std::find(fiveg_links.begin(), fiveg_links.end(), idx) != fiveg_links.end())
                throw ConfigError("TSN and 5G link sets must be disjoint");
        }
    }

    // The paper's MS -> NW-TT -> UPF -> gNB -> UE -> DS-TT -> SL chain with
    // 1 Gb/s wired links.
    static Topology standard_path() {
        Topology t;
        t.nodes = {"MS", "NW-TT", "UPF", "gNB", "UE", "DS-TT", "SL"};
        for (std::size_t i = 0; i + 1 < t.nodes.size(); ++i)
            t.links.push_back({t.nodes[i], t.nodes[i + 1], 1'000'000'000, 0});
        t.fiveg_nodes = {"UE", "gNB", "UPF", "NW-TT", "DS-TT"};
        t.fiveg_links = {1, 2, 3, 4};
        t.tsn_nodes = {"MS", "SL"};
        t.tsn_links = {0, 5};
        return t;
    }
};

struct FlowSpec {
    TrafficClass traffic_class = TrafficClass::DC;
    std::int64_t packet_size_bytes = 200;  // on-wire, L2 overhead included
    Nanos app_cycle_ns = 30 * kMillisecond;
    std::int64_t burst_count = 1;  // packets per application cycle
    std::int64_t gen_rate_bps = 0;
    Nanos delay_bound_ns = 0;  // 0 = unconstrained
    int pcp = 0;

    void validate() const {
        if (burst_count < 1) throw ConfigError("burst count must be >= 1");
        if (packet_size_bytes < 64) throw ConfigError("packet size must be >= 64 bytes");
        if (app_cycle_ns <= 0) throw ConfigError("application cycle must be > 0");
        if (pcp < 0 || pcp > 7) throw ConfigError("PCP must be in 0..7");
        if (traffic_class == TrafficClass::DC && gen_rate_bps > 0) {
            const double expected =
                static_cast<double>(burst_count) * packet_size_bytes * 8 * kSecond /
                static_cast<double>(app_cycle_ns);
            if (std::abs(expected - static_cast<double>(gen_rate_bps)) > 1.0)
                throw ConfigError("DC generation rate inconsistent with N*L/T_app");
        }
    }

    static FlowSpec dc_flow(std::int64_t packet_bytes, Nanos app_cycle, std::int64_t burst) {
        FlowSpec f;
        f.traffic_class = TrafficClass::DC;
        f.packet_size_bytes = packet_bytes;
        f.app_cycle_ns = app_cycle;
        f.burst_count = burst;
        f.gen_rate_bps = static_cast<std::int64_t>(
            static_cast<double>(burst) * packet_bytes * 8 * kSecond / static_cast<double>(app_cycle) + 0.5);
        f.pcp = 2;
        return f;
    }
};

struct GateWindow {
    std::string queue;
    Nanos open_ns = 0;
    Nanos close_ns = 0;

    Nanos duration() const { return close_ns - open_ns; }
};

// Per-switch periodic gate schedule. The gate for a window's queue is open on
// the half-open interval (open, close] within each network cycle.
struct GclConfig {
    Nanos network_cycle_ns = 0;
    std::vector<GateWindow> windows;
    Nanos guard_band_ns = 0;
    Nanos base_time_ns = 0;

    const GateWindow& window(const std::string& queue) const {
        for (const auto& w : windows)
            if (w.queue == queue) return w;
        throw ConfigError("no window configured for queue '" + queue + "'");
    }

    bool has_window(const std::string& queue) const {
        for (const auto& w : windows)
            if (w.queue == queue) return true;
        return false;
    }

    void validate() const {
        if (network_cycle_ns <= 0) throw ConfigError("network cycle must be > 0");
        if (guard_band_ns < 0) throw ConfigError("guard band must be >= 0");
        Nanos total = guard_band_ns;
        for (const auto& w : windows) {
            if (w.open_ns < 0 || w.open_ns >= w.close_ns || w.close_ns > network_cycle_ns)
                throw ConfigError("window bounds must satisfy 0 <= open < close <= T_nc");
            total += w.duration();
        }
        if (total > network_cycle_ns)
            throw ConfigError("window durations plus guard band exceed the network cycle");
        for (std::size_t i = 0; i < windows.size(); ++i)
            for (std::size_t j = i + 1; j < windows.size(); ++j)
                if (windows[i].open_ns < windows[j].close_ns &&
                    windows[j].open_ns < windows[i].close_ns)
                    throw ConfigError("windows '" + windows[i].queue + "' and '" +
                                      windows[j].queue + "' overlap");
    }

    // Single-DC-window cycle used throughout the experiments: DC at the start
    // of the cycle, the 160 ns PTP slot right after it, BE filling the rest,
    // and the guard band at the tail of the cycle so it precedes the next
    // DC window.
    static GclConfig single_dc(Nanos network_cycle, Nanos dc_window, Nanos base_time = 0,
                               Nanos guard_band = 6'260, Nanos ptp_slot = 160) {
        GclConfig g;
        g.network_cycle_ns = network_cycle;
        g.guard_band_ns = guard_band;
        g.base_time_ns = base_time;
        g.windows.push_back({"DC", 0, dc_window});
        if (ptp_slot > 0) g.windows.push_back({"PTP", dc_window, dc_window + ptp_slot});
        const Nanos be_open = dc_window + ptp_slot;
        const Nanos be_close = network_cycle - guard_band;
        if (be_close > be_open) g.windows.push_back({"BE", be_open, be_close});
        g.validate();
        return g;
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["base_time_ns"] = base_time_ns;
        j["network_cycle_ns"] = network_cycle_ns;
        j["guard_band_ns"] = guard_band_ns;
        j["windows"] = nlohmann::json::array();
        for (const auto& w : windows)
            j["windows"].push_back({{"queue", w.queue}, {"open_ns", w.open_ns}, {"close_ns", w.close_ns}});
        return j;
    }

    static GclConfig from_json(const nlohmann::json& j) {
        GclConfig g;
        g.base_time_ns = j.at("base_time_ns").get<Nanos>();
        g.network_cycle_ns = j.at("network_cycle_ns").get<Nanos>();
        g.guard_band_ns = j.at("guard_band_ns").get<Nanos>();
        for (const auto& jw : j.at("windows"))
            g.windows.push_back({jw.at("queue").get<std::string>(), jw.at("open_ns").get<Nanos>(),
                                 jw.at("close_ns").get<Nanos>()});
        g.validate();
        return g;
    }
};

struct WindowAssignment {
    std::int64_t cycle_index = 0;
    // 0 = the window scheduled at the configured offset for the packet's
    // arrival cycle. Negative when a packet slips out through an earlier
    // window instance.
    std::int64_t window_index = 0;
};

// Gate state per the periodic schedule: open iff the cycle phase falls in
// (open, close] for queue q.
inline bool gate_state(const GclConfig& gcl, const std::string& queue, Nanos t) {
    if (t < gcl.base_time_ns) throw ConfigError("gate_state queried before base time");
    const GateWindow& w = gcl.window(queue);
    const Nanos phase = (t - gcl.base_time_ns) % gcl.network_cycle_ns;
    return phase > w.open_ns && phase <= w.close_ns;
}

// Smallest t' >= t at which the gate for `queue` is open. Returns t unchanged
// when the gate is already open; otherwise the first nanosecond inside the
// next window (one tick past the open boundary, which Eq-style half-open
// gating excludes).
inline Nanos next_gate_open(const GclConfig& gcl, const std::string& queue, Nanos t) {
    if (gate_state(gcl, queue, t)) return t;
    const GateWindow& w = gcl.window(queue);
    const Nanos rel = t - gcl.base_time_ns;
    const Nanos cycle = rel / gcl.network_cycle_ns;
    Nanos candidate = gcl.base_time_ns + cycle * gcl.network_cycle_ns + w.open_ns + 1;
    if (candidate < t) candidate += gcl.network_cycle_ns;
    return candidate;
}

enum class WindowVerdict { ok, too_short, too_long };

// Window-size bounds for a DC burst: N * d_tran <= W < T_nc.
inline WindowVerdict check_window_bounds(const FlowSpec& flow, const GclConfig& gcl,
                                         const Link& egress_link,
                                         const std::string& queue = "DC") {
    const GateWindow& w = gcl.window(queue);
    const Nanos d_tran = tran_delay_ns(flow.packet_size_bytes, egress_link.rate_bps);
    if (flow.burst_count * d_tran > w.duration()) return WindowVerdict::too_short;
    if (w.duration() >= gcl.network_cycle_ns) return WindowVerdict::too_long;
    return WindowVerdict::ok;
}

}  // namespace tasbridge
