#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "tasbridge/delay.hpp"
#include "tasbridge/model.hpp"

namespace tasbridge {

enum class Scenario {
    S1_early_arrival,
    S2_unused_first_window,
    S3_partial_arrival,
    S4_delayed_arrival,
};

inline const char* to_string(Scenario s) {
    switch (s) {
        case Scenario::S1_early_arrival: return "S1_early_arrival";
        case Scenario::S2_unused_first_window: return "S2_unused_first_window";
        case Scenario::S3_partial_arrival: return "S3_partial_arrival";
        case Scenario::S4_delayed_arrival: return "S4_delayed_arrival";
    }
    return "?";
}

inline bool is_deterministic(Scenario s) {
    return s == Scenario::S1_early_arrival || s == Scenario::S2_unused_first_window;
}

// Any offset at or above the upper end of the uncertainty interval satisfies
// the percentile bound.
inline Nanos min_offset(const UncertaintyInterval& interval) { return interval.hi; }

// Effective opening instant of the first SL window: delta reduced into
// [0, T_nc).
inline Nanos network_cycle_offset(Nanos delta, Nanos network_cycle) {
    if (network_cycle <= 0) throw std::domain_error("network cycle must be > 0");
    if (delta < 0) throw std::domain_error("offset must be >= 0");
    return delta < network_cycle ? delta : delta % network_cycle;
}

struct ConditionFlags {
    bool c1 = false;
    bool c2 = false;
    bool c3 = false;
    bool c4 = false;
};

// C1: the SL window opens only after the whole burst has arrived in the
// current cycle. C2: it closes before the next cycle's burst starts arriving.
inline std::pair<bool, bool> check_c1_c2(Nanos cycle_offset, Nanos window, Nanos network_cycle,
                                         const UncertaintyInterval& interval) {
    const bool c1 = interval.hi <= cycle_offset;
    const bool c2 = cycle_offset + window <= interval.lo + network_cycle;
    return {c1, c2};
}

// C3/C4: same pair shifted one cycle back, for bursts that arrived in the
// previous network cycle.
inline std::pair<bool, bool> check_c3_c4(Nanos cycle_offset, Nanos window, Nanos network_cycle,
                                         const UncertaintyInterval& interval) {
    const bool c3 = interval.hi <= cycle_offset + network_cycle;
    const bool c4 = cycle_offset + window <= interval.lo;
    return {c3, c4};
}

// Necessary condition: the cycle must leave at least the 5G jitter of slack
// outside the transmission window.
inline bool feasibility(Nanos network_cycle, Nanos window, Nanos jit) {
    if (network_cycle <= window) throw std::domain_error("network cycle must exceed the window");
    if (window < 0) throw std::domain_error("window must be >= 0");
    return network_cycle - window >= jit;
}

// Scenario taxonomy. Infeasibility of the jitter bound defines S4; otherwise
// the C1..C4 boundary conditions decide between early arrival (S1), an unused
// first window (S2), and partial arrival (S3). Boundary ties classify to the
// deterministic scenario.
inline Scenario classify(Nanos cycle_offset, Nanos window, Nanos network_cycle,
                         const UncertaintyInterval& interval) {
    if (cycle_offset < 0 || cycle_offset >= network_cycle)
        throw std::domain_error("cycle offset must be in [0, T_nc)");
    if (window >= network_cycle) throw std::domain_error("window must be < T_nc");
    if (!feasibility(network_cycle, window, interval.hi - interval.lo))
        return Scenario::S4_delayed_arrival;
    auto [c1, c2] = check_c1_c2(cycle_offset, window, network_cycle, interval);
    if (c1 && c2) return Scenario::S1_early_arrival;
    auto [c3, c4] = check_c3_c4(cycle_offset, window, network_cycle, interval);
    if (c3 && c4) return Scenario::S2_unused_first_window;
    return Scenario::S3_partial_arrival;
}

struct OffsetPlan {
    Nanos offset = 0;
    Nanos cycle_offset = 0;
    Nanos network_cycle = 0;
    Nanos window = 0;
    double percentile = 0.999;
    UncertaintyInterval interval;
    bool feasible_eq17 = false;
    Scenario scenario = Scenario::S4_delayed_arrival;
    ConditionFlags conditions;
    std::string reason;

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["offset_ns"] = offset;
        j["cycle_offset_ns"] = cycle_offset;
        j["network_cycle_ns"] = network_cycle;
        j["window_ns"] = window;
        j["percentile"] = percentile;
        j["interval_lo_ns"] = interval.lo;
        j["interval_hi_ns"] = interval.hi;
        j["jitter_ns"] = interval.hi - interval.lo;
        j["feasible_eq17"] = feasible_eq17;
        j["scenario"] = to_string(scenario);
        j["conditions"] = {{"C1", conditions.c1}, {"C2", conditions.c2},
                           {"C3", conditions.c3}, {"C4", conditions.c4}};
        j["reason"] = reason;
        return j;
    }
};

// Evaluate a fully specified configuration.
inline OffsetPlan evaluate_plan(Nanos offset, Nanos window, Nanos network_cycle,
                                const UncertaintyInterval& interval) {
    OffsetPlan plan;
    plan.offset = offset;
    plan.window = window;
    plan.network_cycle = network_cycle;
    plan.percentile = interval.p;
    plan.interval = interval;
    plan.cycle_offset = network_cycle_offset(offset, network_cycle);
    plan.feasible_eq17 = feasibility(network_cycle, window, jitter(interval));
    std::tie(plan.conditions.c1, plan.conditions.c2) =
        check_c1_c2(plan.cycle_offset, window, network_cycle, interval);
    std::tie(plan.conditions.c3, plan.conditions.c4) =
        check_c3_c4(plan.cycle_offset, window, network_cycle, interval);
    plan.scenario = classify(plan.cycle_offset, window, network_cycle, interval);
    switch (plan.scenario) {
        case Scenario::S1_early_arrival:
            plan.reason = "whole burst arrives before its window opens; jitter bounded by W";
            break;
        case Scenario::S2_unused_first_window:
            plan.reason = "first window passes unused; burst forwarded in the next one";
            break;
        case Scenario::S3_partial_arrival:
            plan.reason = "burst straddles the window close; inter-cycle interference";
            break;
        case Scenario::S4_delayed_arrival:
            plan.reason = plan.feasible_eq17
                              ? "offset below the delayed-arrival bound"
                              : "T_nc - W below the 5G jitter; interference unavoidable";
            break;
    }
    return plan;
}

// Pick TAS parameters for a DC flow from a measured ZWSL delay profile:
// smallest window fitting the burst, the smallest application-cycle multiple
// of T_nc that clears the jitter bound, and offset = p-th percentile + margin.
// margin < 0 selects the default jitter/2.
inline OffsetPlan recommend(const EmpiricalDistribution& dist, const FlowSpec& flow,
                            const Link& egress_link, double p, Nanos margin = -1,
                            Nanos max_network_cycle = 0) {
    if (flow.traffic_class != TrafficClass::DC)
        throw ConfigError("offset planning targets the DC flow");
    const UncertaintyInterval interval = uncertainty_interval(dist, p);
    const Nanos jit = jitter(interval);
    if (margin < 0) margin = jit / 2;
    const Nanos d_tran = tran_delay_ns(flow.packet_size_bytes, egress_link.rate_bps);
    const Nanos window = flow.burst_count * d_tran;
    if (max_network_cycle <= 0) max_network_cycle = 10 * flow.app_cycle_ns;

    Nanos cycle = flow.app_cycle_ns;
    while (cycle < jit + window) cycle += flow.app_cycle_ns;
    const Nanos offset = min_offset(interval) + margin;
    for (; cycle <= max_network_cycle; cycle += flow.app_cycle_ns) {
        OffsetPlan plan = evaluate_plan(offset, window, cycle, interval);
        if (plan.scenario == Scenario::S1_early_arrival) return plan;
    }
    OffsetPlan failed = evaluate_plan(offset, window, max_network_cycle, interval);
    failed.reason = "no network cycle up to the configured maximum yields a deterministic plan (" +
                    failed.reason + ")";
    return failed;
}

}  // namespace tasbridge
