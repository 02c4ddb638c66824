#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "tasbridge/delay.hpp"
#include "tasbridge/model.hpp"
#include "tasbridge/planner.hpp"

namespace tasbridge {

struct SimConfig {
    Topology topology = Topology::standard_path();
    FlowSpec flow;  // target DC flow
    GclConfig ms_gcl;
    GclConfig sl_gcl;
    Nanos sl_offset = 0;  // delta between MS and SL network cycles for DC
    BridgeModel bridge;
    Nanos duration_ns = 0;
    Nanos warmup_ns = 0;
    std::uint64_t seed = 1;
    std::int64_t sl_queue_capacity_bytes = 6'600;
    // A frame starts only if it completes before the gate closes; disable to
    // model guard-band-only switches.
    bool length_aware_gating = true;
    bool batch_release = true;  // false: continuous generation at R_gen
    bool sync_error_per_packet = false;
    bool sl_tas_enabled = true;  // false: SL gate held open for the whole cycle
    Nanos sl_proc_ns = 0;

    const Link& ms_egress_link() const { return topology.links.front(); }
    const Link& sl_egress_link() const { return topology.links.back(); }

    void validate() const {
        topology.validate();
        flow.validate();
        ms_gcl.validate();
        sl_gcl.validate();
        if (duration_ns <= warmup_ns || warmup_ns < 0)
            throw ConfigError("duration must exceed warmup >= 0");
        if (sl_offset < 0) throw ConfigError("offset must be >= 0");
        if (ms_gcl.network_cycle_ns != sl_gcl.network_cycle_ns)
            throw ConfigError("MS and SL must share the network cycle duration");
        const Nanos dprime = network_cycle_offset(sl_offset, ms_gcl.network_cycle_ns);
        if (sl_gcl.base_time_ns != ms_gcl.base_time_ns + dprime)
            throw ConfigError("SL base time must equal MS base time plus the cycle offset");
        if (check_window_bounds(flow, ms_gcl, ms_egress_link()) != WindowVerdict::ok)
            throw ConfigError("MS transmission window violates the burst-size bounds");
        if (sl_queue_capacity_bytes < flow.packet_size_bytes)
            throw ConfigError("SL queue cannot hold a single packet");
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["network_cycle_ns"] = ms_gcl.network_cycle_ns;
        j["dc_window_ns"] = ms_gcl.window("DC").duration();
        j["offset_ns"] = sl_offset;
        j["guard_band_ns"] = ms_gcl.guard_band_ns;
        j["base_time_ns"] = ms_gcl.base_time_ns;
        j["flow"] = {{"class", to_string(flow.traffic_class)},
                     {"packet_size_bytes", flow.packet_size_bytes},
                     {"app_cycle_ns", flow.app_cycle_ns},
                     {"burst_count", flow.burst_count},
                     {"gen_rate_bps", flow.gen_rate_bps},
                     {"pcp", flow.pcp}};
        j["bridge"] = bridge.to_json();
        j["duration_ns"] = duration_ns;
        j["warmup_ns"] = warmup_ns;
        j["seed"] = seed;
        j["sl_queue_capacity_bytes"] = sl_queue_capacity_bytes;
        j["length_aware_gating"] = length_aware_gating;
        j["batch_release"] = batch_release;
        j["sync_error_per_packet"] = sync_error_per_packet;
        j["sl_proc_ns"] = sl_proc_ns;
        return j;
    }
};

// Rebuild the GCL pair for a (T_nc, W, delta) triple, keeping everything else.
inline SimConfig with_tas(SimConfig base, Nanos network_cycle, Nanos dc_window, Nanos offset) {
    const Nanos ms_base = base.ms_gcl.base_time_ns;
    const Nanos guard = std::min<Nanos>(base.ms_gcl.guard_band_ns,
                                        std::max<Nanos>(0, network_cycle - dc_window - 160));
    base.ms_gcl = GclConfig::single_dc(network_cycle, dc_window, ms_base, guard);
    if (base.sl_tas_enabled) {
        base.sl_gcl = GclConfig::single_dc(
            network_cycle, dc_window, ms_base + network_cycle_offset(offset, network_cycle), guard);
    } else {  // gate held open: one DC window spanning the cycle
        base.sl_gcl = GclConfig::single_dc(network_cycle, network_cycle, ms_base, 0, 0);
        offset = 0;
    }
    base.sl_offset = offset;
    return base;
}

struct PacketRecord {
    std::int64_t seq = 0;
    std::string flow = "DC";
    Nanos t_ms_out = 0;
    Nanos t_sl_in = 0;
    Nanos t_sl_out = 0;
    Nanos d_emp = 0;
    Nanos d_zwsl = 0;
    WindowAssignment assignment;
    bool dropped = false;
};

struct WindowBucket {
    std::int64_t count = 0;
    double probability = 0.0;
    Nanos min_d_emp = 0;
};

struct SimResult {
    std::vector<PacketRecord> records;  // post-warmup
    std::map<std::int64_t, WindowBucket> window_histogram;
    std::int64_t released = 0;
    std::int64_t departed = 0;
    std::int64_t dropped = 0;
    std::int64_t in_flight = 0;
    Nanos sync_error_ns = 0;  // the per-run draw (0 when redrawn per packet)
    std::vector<Nanos> d_emp_samples;   // post-warmup, non-dropped
    std::vector<Nanos> d_zwsl_samples;

    EmpiricalDistribution emp_distribution() const { return EmpiricalDistribution(d_emp_samples); }
    EmpiricalDistribution zwsl_distribution() const { return EmpiricalDistribution(d_zwsl_samples); }
};

namespace detail {

// Earliest instant >= t at which a frame of serialization time d_tran may
// start through the gate. With length-aware gating the frame must also finish
// by the window close.
inline Nanos earliest_tx_start(const GclConfig& gcl, const std::string& queue, Nanos t,
                               Nanos d_tran, bool length_aware) {
    const GateWindow& w = gcl.window(queue);
    if (length_aware && d_tran >= w.duration())
        throw ConfigError("frame serialization cannot fit the '" + queue + "' window");
    for (;;) {
        t = next_gate_open(gcl, queue, t);
        if (!length_aware) return t;
        const Nanos cycle = (t - gcl.base_time_ns) / gcl.network_cycle_ns;
        const Nanos close_abs = gcl.base_time_ns + cycle * gcl.network_cycle_ns + w.close_ns;
        if (t + d_tran <= close_abs) return t;
        t = close_abs + 1;
    }
}

struct InFlightPacket {
    std::int64_t seq;
    Nanos t_ms_out;
    Nanos t_sl_in;
    std::int64_t ms_cycle;
};

}  // namespace detail

// Event-driven execution of the MS -> 5G bridge -> SL pipeline for the target
// DC flow. Deterministic for a given (config, seed).
inline SimResult run(const SimConfig& cfg) {
    cfg.validate();

    const Nanos T = cfg.ms_gcl.network_cycle_ns;
    const Nanos ms_base = cfg.ms_gcl.base_time_ns;
    const Nanos horizon = ms_base + cfg.duration_ns;
    const Nanos warmup_end = ms_base + cfg.warmup_ns;
    const Nanos d_tran_ms = tran_delay_ns(cfg.flow.packet_size_bytes, cfg.ms_egress_link().rate_bps);
    const Nanos d_tran_sl = tran_delay_ns(cfg.flow.packet_size_bytes, cfg.sl_egress_link().rate_bps);
    const Nanos delta_prime = network_cycle_offset(cfg.sl_offset, T);
    const std::int64_t offset_wraps = cfg.sl_offset / T;

    SimResult result;
    result.sync_error_ns =
        cfg.sync_error_per_packet ? 0 : draw_sync_error(cfg.bridge.sync_error_bound_ns, cfg.seed, 0);

    // --- MS release: serialize queued packets through the MS DC gate ---
    std::vector<Nanos> gen_times;
    if (cfg.batch_release) {
        for (Nanos cycle_start = ms_base; cycle_start < horizon; cycle_start += T)
            for (std::int64_t k = 0; k < cfg.flow.burst_count; ++k) gen_times.push_back(cycle_start);
    } else {
        if (cfg.flow.gen_rate_bps <= 0) throw ConfigError("continuous release needs a generation rate");
        const Nanos interval = tran_delay_ns(cfg.flow.packet_size_bytes, cfg.flow.gen_rate_bps);
        for (Nanos t = ms_base; t < horizon; t += interval) gen_times.push_back(t);
    }

    std::vector<detail::InFlightPacket> packets;
    packets.reserve(gen_times.size());
    {
        Nanos ms_free = ms_base;
        std::int64_t seq = 0;
        for (Nanos gen : gen_times) {
            const Nanos start = detail::earliest_tx_start(cfg.ms_gcl, "DC", std::max(gen, ms_free),
                                                          d_tran_ms, cfg.length_aware_gating);
            if (start > horizon) break;  // still queued at MS at the end of the run
            packets.push_back({seq++, start, 0, (start - ms_base) / T});
            ms_free = start + d_tran_ms;
        }
    }
    result.released = static_cast<std::int64_t>(packets.size());

    // --- 5G bridge traversal, one burst per MS cycle ---
    {
        std::size_t i = 0;
        Nanos prev_departure = INT64_MIN;
        while (i < packets.size()) {
            std::size_t j = i;
            while (j < packets.size() && packets[j].ms_cycle == packets[i].ms_cycle) ++j;
            std::vector<Nanos> releases;
            std::vector<std::int64_t> sizes;
            releases.reserve(j - i);
            for (std::size_t k = i; k < j; ++k) {
                releases.push_back(packets[k].t_ms_out);
                sizes.push_back(cfg.flow.packet_size_bytes);
            }
            const auto arrivals = sample_bridge_burst(
                cfg.bridge, releases, sizes,
                {cfg.seed, static_cast<std::uint64_t>(packets[i].ms_cycle)}, prev_departure);
            for (std::size_t k = i; k < j; ++k) packets[k].t_sl_in = arrivals[k - i];
            prev_departure = arrivals.back();
            i = j;
        }
    }

    // --- SL: bounded FIFO queue feeding the gated egress port ---
    auto emit = [&](const detail::InFlightPacket& p, Nanos t_sl_out, bool dropped) {
        if (dropped)
            ++result.dropped;
        else
            ++result.departed;
        if (p.t_ms_out < warmup_end) return;
        PacketRecord rec;
        rec.seq = p.seq;
        rec.t_ms_out = p.t_ms_out;
        rec.t_sl_in = p.t_sl_in;
        rec.t_sl_out = t_sl_out;
        rec.dropped = dropped;
        const Nanos delta = cfg.sync_error_per_packet
                                ? draw_sync_error(cfg.bridge.sync_error_bound_ns, cfg.seed,
                                                  static_cast<std::uint64_t>(p.seq) + 1)
                                : result.sync_error_ns;
        rec.d_zwsl = apply_sync_error(p.t_sl_in + cfg.sl_proc_ns - p.t_ms_out, delta);
        rec.assignment.cycle_index = p.ms_cycle;
        if (!dropped) {
            rec.d_emp = apply_sync_error(t_sl_out - p.t_ms_out, delta);
            const std::int64_t dep_cycle = (t_sl_out - cfg.sl_gcl.base_time_ns) / T;
            rec.assignment.window_index = dep_cycle - p.ms_cycle - offset_wraps;
            auto& bucket = result.window_histogram[rec.assignment.window_index];
            if (bucket.count == 0 || rec.d_emp < bucket.min_d_emp) bucket.min_d_emp = rec.d_emp;
            ++bucket.count;
            result.d_emp_samples.push_back(rec.d_emp);
            result.d_zwsl_samples.push_back(rec.d_zwsl);
        }
        result.records.push_back(rec);
    };

    {
        std::deque<std::size_t> queue;
        std::int64_t queue_bytes = 0;
        Nanos sl_free = cfg.sl_gcl.base_time_ns;
        std::size_t next_arrival = 0;
        while (next_arrival < packets.size() || !queue.empty()) {
            Nanos dep_start = INT64_MAX;
            if (!queue.empty()) {
                const auto& head = packets[queue.front()];
                const Nanos ready = std::max(head.t_sl_in + cfg.sl_proc_ns, sl_free);
                dep_start = detail::earliest_tx_start(cfg.sl_gcl, "DC", ready, d_tran_sl,
                                                      cfg.length_aware_gating);
            }
            const Nanos arr_time = next_arrival < packets.size()
                                       ? packets[next_arrival].t_sl_in + cfg.sl_proc_ns
                                       : INT64_MAX;
            if (dep_start <= arr_time && dep_start != INT64_MAX) {
                const auto& head = packets[queue.front()];
                if (dep_start > horizon) {  // never departs within the run
                    ++result.in_flight;
                    queue.pop_front();
                    queue_bytes -= cfg.flow.packet_size_bytes;
                    continue;
                }
                emit(head, dep_start, false);
                sl_free = dep_start + d_tran_sl;
                queue_bytes -= cfg.flow.packet_size_bytes;
                queue.pop_front();
            } else {
                const auto& p = packets[next_arrival];
                if (p.t_sl_in > horizon) {
                    ++result.in_flight;
                } else if (queue_bytes + cfg.flow.packet_size_bytes >
                           cfg.sl_queue_capacity_bytes) {
                    emit(p, 0, true);
                } else {
                    queue.push_back(next_arrival);
                    queue_bytes += cfg.flow.packet_size_bytes;
                }
                ++next_arrival;
            }
        }
    }

    std::int64_t histogram_total = 0;
    for (auto& [idx, bucket] : result.window_histogram) histogram_total += bucket.count;
    for (auto& [idx, bucket] : result.window_histogram)
        bucket.probability =
            static_cast<double>(bucket.count) / static_cast<double>(histogram_total);
    return result;
}

enum class SweepAxis { window, offset, cycle, same_priority_flows, be_load };

inline const char* to_string(SweepAxis a) {
    switch (a) {
        case SweepAxis::window: return "window";
        case SweepAxis::offset: return "offset";
        case SweepAxis::cycle: return "cycle";
        case SweepAxis::same_priority_flows: return "same_priority_flows";
        case SweepAxis::be_load: return "be_load";
    }
    return "?";
}

struct SweepOptions {
    // cycle axis: explicit T_nc -> W pairs (co-scaled proportionally if absent)
    std::map<std::int64_t, Nanos> cycle_window_ns;
    // same_priority_flows / be_load axes: per-value bridge calibration
    std::map<std::int64_t, BridgeModel> bridge_by_value;
    // same_priority_flows axis: per-value MS/SL window
    std::map<std::int64_t, Nanos> window_by_value;
};

inline SimConfig configure_sweep_point(const SimConfig& base, SweepAxis axis, std::int64_t value,
                                       const SweepOptions& opt) {
    const Nanos T = base.ms_gcl.network_cycle_ns;
    const Nanos W = base.ms_gcl.window("DC").duration();
    const Nanos d_tran = tran_delay_ns(base.flow.packet_size_bytes, base.ms_egress_link().rate_bps);
    SimConfig cfg = base;
    switch (axis) {
        case SweepAxis::window: {
            cfg = with_tas(base, T, value, base.sl_offset);
            cfg.flow.burst_count = std::max<std::int64_t>(1, value / d_tran);
            break;
        }
        case SweepAxis::offset:
            cfg = with_tas(base, T, W, value);
            break;
        case SweepAxis::cycle: {
            Nanos w = 0;
            auto it = opt.cycle_window_ns.find(value);
            if (it != opt.cycle_window_ns.end())
                w = it->second;
            else  // hold the injected rate constant: scale W with T_nc
                w = static_cast<Nanos>(static_cast<__int128>(W) * value / T);
            cfg = with_tas(base, value, w, base.sl_offset);
            cfg.flow.burst_count = std::max<std::int64_t>(1, w / d_tran);
            cfg.flow.app_cycle_ns = value;
            break;
        }
        case SweepAxis::same_priority_flows: {
            auto wit = opt.window_by_value.find(value);
            if (wit != opt.window_by_value.end()) {
                cfg = with_tas(base, T, wit->second, base.sl_offset);
                cfg.flow.burst_count = std::max<std::int64_t>(1, wit->second / d_tran);
            }
            break;
        }
        case SweepAxis::be_load:
            break;  // only the bridge calibration changes
    }
    auto bit = opt.bridge_by_value.find(value);
    if (bit != opt.bridge_by_value.end()) cfg.bridge = bit->second;
    cfg.flow.gen_rate_bps = 0;  // rederived below
    cfg.flow.gen_rate_bps = static_cast<std::int64_t>(
        static_cast<double>(cfg.flow.burst_count) * cfg.flow.packet_size_bytes * 8 * kSecond /
            static_cast<double>(cfg.flow.app_cycle_ns) +
        0.5);
    cfg.seed = rng::mix(base.seed, static_cast<std::uint64_t>(axis),
                        static_cast<std::uint64_t>(value));
    return cfg;
}

// Independent runs across the axis; seeds derive from (base seed, axis, value)
// so points are uncorrelated but reproducible.
inline std::vector<std::pair<std::int64_t, SimResult>> sweep(const SimConfig& base, SweepAxis axis,
                                                             const std::vector<std::int64_t>& values,
                                                             const SweepOptions& opt = {}) {
    std::vector<std::pair<std::int64_t, SimResult>> out;
    out.reserve(values.size());
    for (std::int64_t v : values)
        out.emplace_back(v, run(configure_sweep_point(base, axis, v, opt)));
    return out;
}

}  // namespace tasbridge
