// Release gate: one line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "tasbridge/planner.hpp"
#include "tasbridge/profiles.hpp"
#include "tasbridge/sim.hpp"
#include "tasbridge/trace.hpp"

using namespace tasbridge;

namespace {

int g_failures = 0;

void report(int id, const std::string& name, bool ok, const std::string& detail = "") {
    std::printf("%s  criterion %d: %s%s%s\n", ok ? "PASS" : "FAIL", id, name.c_str(),
                detail.empty() ? "" : " -- ", detail.c_str());
    if (!ok) ++g_failures;
}

UncertaintyInterval iv(Nanos lo, Nanos hi, double p = 0.999) {
    UncertaintyInterval u;
    u.lo = lo;
    u.hi = hi;
    u.p = p;
    return u;
}

EmpiricalDistribution uniform_pool(Nanos lo, Nanos hi, std::size_t n = 2'048) {
    std::vector<Nanos> samples(n);
    for (std::size_t i = 0; i < n; ++i)
        samples[i] = lo + static_cast<Nanos>(static_cast<__int128>(hi - lo) * i / (n - 1));
    return EmpiricalDistribution(std::move(samples));
}

// --- criterion 1: reference scenario classification -------------------------

bool check_classifier() {
    const UncertaintyInterval interval = iv(7'500'000, 15'000'000);
    const Nanos W = 5 * kMillisecond;
    const Nanos T20 = 20 * kMillisecond, T10 = 10 * kMillisecond;
    bool ok = true;
    ok &= classify(network_cycle_offset(15'000'000, T20), W, T20, interval) ==
          Scenario::S1_early_arrival;
    ok &= classify(network_cycle_offset(22'500'000, T20), W, T20, interval) ==
          Scenario::S2_unused_first_window;
    ok &= classify(network_cycle_offset(25'000'000, T20), W, T20, interval) ==
          Scenario::S3_partial_arrival;
    ok &= classify(network_cycle_offset(7'500'000, T10), W, T10, interval) ==
          Scenario::S4_delayed_arrival;
    ok &= !feasibility(T10, W, jitter(interval));
    return ok;
}

// --- criterion 2: cycle offset arithmetic -----------------------------------

bool check_offset_arithmetic() {
    const std::pair<Nanos, Nanos> cases[] = {
        {6'000'000, 2'000'000},  {8'000'000, 4'000'000},  {10'000'000, 0},
        {12'500'000, 7'500'000}, {15'000'000, 5'000'000}, {17'500'000, 2'500'000},
    };
    bool ok = true;
    for (const auto& [cycle, expected] : cases)
        ok &= network_cycle_offset(20 * kMillisecond, cycle) == expected;
    return ok;
}

// --- criterion 3: feasibility bound -----------------------------------------

bool check_feasibility_bound() {
    const Nanos jit = 10'500'000;
    bool ok = feasibility(30 * kMillisecond, 46'500, jit);
    ok &= !feasibility(6 * kMillisecond, 9'000, jit);
    ok &= !feasibility(8 * kMillisecond, 12'000, jit);
    ok &= !feasibility(10 * kMillisecond, 15'000, jit);
    return ok;
}

// --- criteria 4 and 8: simulator vs classifier, conservation, determinism ---

struct OracleCase {
    SimConfig cfg;
    Scenario expected = Scenario::S1_early_arrival;
    std::set<std::int64_t> expected_indices;
};

Nanos rnd_us(std::uint64_t stream, std::uint64_t trial, Nanos lo_us, Nanos hi_us) {
    return rng::uniform_int(0xACCE, stream, trial, lo_us, hi_us) * Nanos{1'000};
}

OracleCase make_oracle_case(int trial) {
    constexpr Nanos s = 100'000;  // distance kept from every classification boundary
    const int family = trial % 3;
    const Nanos T = rnd_us(1, trial, 8'000, 40'000);
    const Nanos W = rnd_us(2, trial, 50, T / 4'000);
    Nanos lo = 0, hi = 0, dprime = 0;
    std::set<std::int64_t> indices;
    Scenario expected;
    if (family == 0) {  // whole burst before the window opens
        const Nanos jit = rnd_us(3, trial, 200, std::min(T - W - 2 * s, T - 800'000) / 1'000);
        lo = rnd_us(4, trial, 500, (T - jit) / 1'000 - 200);
        hi = lo + jit;
        dprime = rnd_us(5, trial, (hi + s) / 1'000,
                        std::min(T - 1'000, lo + T - W - s) / 1'000);
        expected = Scenario::S1_early_arrival;
        indices = {0};
    } else if (family == 1) {  // burst lands after the window closed
        lo = rnd_us(4, trial, W / 1'000 + 600, T / 1'000 - 600);
        const Nanos jit = rnd_us(3, trial, 100, (T - lo) / 1'000 - 200);
        hi = lo + jit;
        dprime = rnd_us(5, trial, 0, (lo - W) / 1'000 - 100);
        expected = Scenario::S2_unused_first_window;
        indices = {1};
    } else {  // burst straddles the window close
        const Nanos jit = rnd_us(3, trial, std::max<Nanos>(2 * W, kMillisecond) / 1'000,
                                 (T - W - 2 * s) / 1'000);
        lo = rnd_us(4, trial, 500, 3'000);
        hi = lo + jit;
        const Nanos d_lo = lo + jit / 4;
        const Nanos d_hi = std::min(lo + jit - W - jit / 4, T - 200'000);
        dprime = rnd_us(5, trial, d_lo / 1'000, std::max(d_lo, d_hi) / 1'000);
        expected = Scenario::S3_partial_arrival;
        indices = {0, 1};
    }

    OracleCase c;
    c.expected = expected;
    c.expected_indices = indices;
    c.cfg.flow = FlowSpec::dc_flow(100, T, 5);
    c.cfg.bridge = BridgeModel::bootstrap(uniform_pool(lo, hi));
    c.cfg.bridge.sync_error_bound_ns = 0;
    c.cfg.ms_gcl.guard_band_ns = 6'260;
    c.cfg.duration_ns = 45 * T;
    c.cfg.warmup_ns = 0;
    c.cfg.seed = 1'000 + static_cast<std::uint64_t>(trial);
    c.cfg.sl_queue_capacity_bytes = 1'000'000;
    c.cfg = with_tas(c.cfg, T, W, dprime);
    return c;
}

SimConfig make_delayed_arrival_case(std::uint64_t seed) {
    // reference delayed-arrival parameters: T_nc 10 ms, W 5 ms, offset 7.5 ms,
    // delay support [7.5, 15] ms. The SL egress is slowed so the five-packet
    // burst slightly exceeds what one window can serialize; the resulting
    // queue buildup spreads departures across several windows.
    SimConfig cfg;
    cfg.topology = Topology::standard_path();
    cfg.topology.links.back().rate_bps = 12'000'000;  // d_tran = 1 ms for 1500 B
    cfg.flow = FlowSpec::dc_flow(1'500, 10 * kMillisecond, 5);
    cfg.bridge = BridgeModel::bootstrap(uniform_pool(7'500'000, 15'000'000));
    cfg.bridge.sync_error_bound_ns = 0;
    cfg.ms_gcl.guard_band_ns = 6'260;
    cfg.duration_ns = 500 * 10 * kMillisecond;
    cfg.warmup_ns = 0;
    cfg.seed = seed;
    cfg.sl_queue_capacity_bytes = 15'000;  // ten frames of headroom
    return with_tas(cfg, 10 * kMillisecond, 5 * kMillisecond, 7'500'000);
}

std::set<std::int64_t> occupied_indices(const SimResult& r) {
    std::set<std::int64_t> s;
    for (const auto& [idx, bucket] : r.window_histogram)
        if (bucket.count > 0) s.insert(idx);
    return s;
}

bool records_identical(const SimResult& a, const SimResult& b) {
    if (a.records.size() != b.records.size()) return false;
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        const auto& x = a.records[i];
        const auto& y = b.records[i];
        if (x.seq != y.seq || x.t_ms_out != y.t_ms_out || x.t_sl_in != y.t_sl_in ||
            x.t_sl_out != y.t_sl_out || x.d_emp != y.d_emp || x.d_zwsl != y.d_zwsl ||
            x.assignment.window_index != y.assignment.window_index || x.dropped != y.dropped)
            return false;
    }
    return a.released == b.released && a.departed == b.departed && a.dropped == b.dropped &&
           a.in_flight == b.in_flight && a.sync_error_ns == b.sync_error_ns;
}

bool check_sim_classifier_equivalence(std::vector<std::pair<SimConfig, SimResult>>& store,
                                      std::string& detail) {
    bool ok = true;
    int bad = 0;
    for (int trial = 0; trial < 210; ++trial) {
        OracleCase c = make_oracle_case(trial);
        const UncertaintyInterval support =
            iv(c.cfg.bridge.pool.min(), c.cfg.bridge.pool.max());
        const Scenario s = classify(network_cycle_offset(c.cfg.sl_offset, c.cfg.ms_gcl.network_cycle_ns),
                                    c.cfg.sl_gcl.window("DC").duration(),
                                    c.cfg.ms_gcl.network_cycle_ns, support);
        if (s != c.expected) {
            ok = false;
            ++bad;
            continue;
        }
        SimResult r = run(c.cfg);
        if (occupied_indices(r) != c.expected_indices) {
            ok = false;
            ++bad;
        }
        store.emplace_back(std::move(c.cfg), std::move(r));
    }
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        SimConfig cfg = make_delayed_arrival_case(seed);
        const UncertaintyInterval support = iv(7'500'000, 15'000'000);
        if (classify(7'500'000, 5 * kMillisecond, 10 * kMillisecond, support) !=
            Scenario::S4_delayed_arrival)
            ok = false;
        SimResult r = run(cfg);
        if (occupied_indices(r).size() < 3) {
            ok = false;
            ++bad;
        }
        store.emplace_back(std::move(cfg), std::move(r));
    }
    detail = std::to_string(store.size()) + " configs, " + std::to_string(bad) + " mismatches";
    return ok;
}

bool check_conservation_determinism(const std::vector<std::pair<SimConfig, SimResult>>& store,
                                    std::string& detail) {
    bool ok = true;
    for (const auto& [cfg, r] : store) {
        if (r.released != r.departed + r.dropped + r.in_flight) ok = false;
        std::int64_t prev_seq = -1;
        Nanos prev_out = -1;
        for (const auto& rec : r.records) {
            if (rec.dropped) continue;
            if (rec.seq <= prev_seq || rec.t_sl_out < prev_out) ok = false;
            prev_seq = rec.seq;
            prev_out = rec.t_sl_out;
        }
    }
    int reruns = 0;
    for (std::size_t i = 0; i < store.size(); i += 20) {
        const SimResult again = run(store[i].first);
        if (!records_identical(store[i].second, again)) ok = false;
        ++reruns;
    }
    detail = std::to_string(store.size()) + " runs checked, " + std::to_string(reruns) +
             " bit-identical reruns";
    return ok;
}

// --- criterion 5: offset sweep against the calibrated bridge profile --------

bool check_offset_sweep(std::string& detail) {
    const auto preset = profiles::make_preset("exp2_offset_sweep");
    const Nanos W = 46'500;
    const Nanos T = 30 * kMillisecond;
    bool ok = true;
    std::ostringstream log;
    for (Nanos delta : preset.values) {
        const SimConfig cfg =
            configure_sweep_point(preset.base, preset.axis, delta, preset.options);
        const SimResult r = run(cfg);
        auto prob = [&](std::int64_t idx) {
            auto it = r.window_histogram.find(idx);
            return it == r.window_histogram.end() ? 0.0 : it->second.probability;
        };
        auto min_at = [&](std::int64_t idx) {
            return r.window_histogram.at(idx).min_d_emp;
        };
        if (delta >= 20 * kMillisecond) {
            const bool here = prob(0) >= 0.999 && std::llabs(min_at(0) - delta) <= W;
            if (!here) log << " delta=" << delta / kMillisecond << "ms p0=" << prob(0);
            ok &= here;
        } else if (delta == 15 * kMillisecond) {
            // bimodal: the bulk in window 0, the upper tail one cycle later
            bool here = prob(0) > 0.9 && r.window_histogram.count(1) == 1 && prob(1) > 0.0;
            if (here) here = std::llabs(min_at(1) - (delta + T)) <= W;
            if (!here) log << " delta=15ms p0=" << prob(0);
            ok &= here;
        } else {  // 5 and 10 ms
            const double expected = profiles::exp1_pool().exceedance_fraction(delta);
            const bool here = std::abs(prob(1) - expected) <= 0.02;
            if (!here)
                log << " delta=" << delta / kMillisecond << "ms p1=" << prob(1)
                    << " expected=" << expected;
            ok &= here;
        }
    }
    detail = ok ? "6 offsets replayed" : log.str();
    return ok;
}

// --- criterion 6: cycle sweep -----------------------------------------------

bool check_cycle_sweep(std::string& detail) {
    auto preset = profiles::make_preset("exp3_cycle_sweep");
    bool ok = true;
    std::ostringstream log;

    {  // T_nc 17.5 ms: every packet leaves through the window 20 ms after its
       // cycle start
        const SimConfig cfg =
            configure_sweep_point(preset.base, preset.axis, 17'500'000, preset.options);
        const SimResult r = run(cfg);
        bool here = !r.records.empty();
        for (const auto& rec : r.records) {
            if (rec.dropped) continue;
            const Nanos phase =
                rec.t_sl_out - (cfg.ms_gcl.base_time_ns +
                                rec.assignment.cycle_index * cfg.ms_gcl.network_cycle_ns);
            if (rec.assignment.window_index != 0 || phase <= 20 * kMillisecond ||
                phase > 20 * kMillisecond + 25'500)
                here = false;
        }
        if (!here) log << " T=17.5ms window placement";
        ok &= here;
    }

    const std::pair<Nanos, Nanos> short_cycles[] = {
        {6'000'000, 9'000}, {8'000'000, 12'000}, {10'000'000, 15'000}};
    for (const auto& [T, W] : short_cycles) {
        SimConfig cfg = configure_sweep_point(preset.base, preset.axis, T, preset.options);
        cfg.warmup_ns = 0;  // the minimum occurs before sustained interference builds up
        const SimResult r = run(cfg);
        const Nanos expected = network_cycle_offset(20 * kMillisecond, T) + T;
        const Nanos observed = r.emp_distribution().min();
        if (std::llabs(observed - expected) > W) {
            log << " T=" << T / kMillisecond << "ms min=" << observed;
            ok = false;
        }
    }
    detail = ok ? "window placement and minimum-delay law hold" : log.str();
    return ok;
}

// --- criterion 7: percentile and jitter pipeline ----------------------------

bool check_percentile_pipeline(std::string& detail) {
    const auto& pool = profiles::exp1_pool();
    const UncertaintyInterval u = uncertainty_interval(pool, 0.999);
    bool ok = u.lo == 4'500'000 && u.hi == 15'000'000 && jitter(u) == 10'500'000;
    if (!ok) {
        detail = "calibrated pool interval mismatch";
        return false;
    }

    auto oracle = [](const std::vector<Nanos>& sorted, double p) {
        const std::size_t n = sorted.size();
        for (std::size_t k = 1; k <= n; ++k)
            if (static_cast<double>(k) / static_cast<double>(n) >= p) return sorted[k - 1];
        return sorted.back();
    };
    std::size_t checked = 0;
    for (std::uint64_t t = 0; t < 1'000'000; ++t) {
        const std::size_t n = 1 + rng::mix(77, 0, t) % 24;
        std::vector<Nanos> samples(n);
        for (std::size_t i = 0; i < n; ++i) samples[i] = rng::uniform_int(77, 1, t * 32 + i, 0, 1'000);
        const EmpiricalDistribution dist(std::move(samples));
        const double ps[] = {0.0, 0.5, 0.999, rng::uniform01(77, 2, t) * 0.999999};
        for (double p : ps) {
            if (dist.percentile(p) != oracle(dist.samples(), p)) {
                detail = "random pool mismatch at trial " + std::to_string(t);
                return false;
            }
            ++checked;
        }
    }
    detail = std::to_string(checked) + " percentile queries matched the sort oracle";
    return true;
}

// --- criterion 9: trace round-trip ------------------------------------------

bool check_trace_roundtrip(std::string& detail) {
    SimConfig cfg;
    cfg.flow = FlowSpec::dc_flow(200, 30 * kMillisecond, 29);
    cfg.bridge = BridgeModel::bootstrap(profiles::exp1_pool());
    cfg.bridge.sync_error_bound_ns = 0;  // probe stamps share one clock
    cfg.ms_gcl.guard_band_ns = 6'260;
    cfg.duration_ns = 12 * kSecond;
    cfg.warmup_ns = 0;
    cfg.seed = 404;
    cfg = with_tas(cfg, 30 * kMillisecond, 46'500, 20 * kMillisecond);
    const Nanos warmup = 3 * kSecond + 777;

    const SimResult full = run(cfg);
    const std::string ms_path = "acceptance_ms_probe.csv";
    const std::string sl_path = "acceptance_sl_probe.csv";
    {
        std::ofstream ms(ms_path), sl(sl_path);
        ms << "seq,timestamp_ns\n";
        sl << "seq,timestamp_ns\n";
        for (const auto& rec : full.records) {
            ms << rec.seq << ',' << rec.t_ms_out << '\n';
            if (!rec.dropped) sl << rec.seq << ',' << rec.t_sl_out << '\n';
        }
    }

    SimConfig trimmed_cfg = cfg;
    trimmed_cfg.warmup_ns = warmup;
    const SimResult trimmed = run(trimmed_cfg);

    const auto ms_log = trace::parse_probe_csv(ms_path, trace::CsvFormat{});
    const auto sl_log = trace::parse_probe_csv(sl_path, trace::CsvFormat{});
    // simulator warm-up is absolute, probe warm-up is relative to the first
    // stamp one tick past the schedule base
    const auto matched = trace::match(ms_log, sl_log, warmup - 1);
    std::remove(ms_path.c_str());
    std::remove(sl_path.c_str());

    bool ok = matched.pairs.size() == trimmed.d_emp_samples.size();
    ok &= matched.unmatched_ms == 0 && matched.unmatched_sl == 0 && matched.negative_delays == 0;
    if (ok) {
        const auto sim_dist = trimmed.emp_distribution();
        std::vector<Nanos> delays;
        delays.reserve(matched.pairs.size());
        for (const auto& p : matched.pairs) delays.push_back(p.delay);
        const EmpiricalDistribution trace_dist(std::move(delays));
        ok &= trace_dist.samples() == sim_dist.samples();
        for (double p : {0.0, 0.5, 0.99, 0.999})
            ok &= trace_dist.percentile(p) == sim_dist.percentile(p);
    }
    detail = std::to_string(matched.pairs.size()) + " pairs, " +
             std::to_string(matched.warmup_discarded) + " discarded by warm-up";
    return ok;
}

}  // namespace

int main() {
    using clock = std::chrono::steady_clock;
    const auto t0 = clock::now();

    report(1, "scenario classifier reference cases", check_classifier());
    report(2, "network-cycle offset arithmetic", check_offset_arithmetic());
    report(3, "determinism feasibility bound", check_feasibility_bound());

    std::string detail;
    std::vector<std::pair<SimConfig, SimResult>> store;
    bool ok4 = false;
    try {
        ok4 = check_sim_classifier_equivalence(store, detail);
    } catch (const std::exception& e) {
        detail = e.what();
    }
    report(4, "simulator matches the analytic classifier", ok4, detail);

    bool ok5 = false;
    try {
        ok5 = check_offset_sweep(detail);
    } catch (const std::exception& e) {
        detail = e.what();
    }
    report(5, "offset sweep replay on the calibrated bridge profile", ok5, detail);

    bool ok6 = false;
    try {
        ok6 = check_cycle_sweep(detail);
    } catch (const std::exception& e) {
        detail = e.what();
    }
    report(6, "cycle sweep replay", ok6, detail);

    report(7, "percentile and jitter pipeline", check_percentile_pipeline(detail), detail);

    bool ok8 = false;
    try {
        ok8 = check_conservation_determinism(store, detail);
    } catch (const std::exception& e) {
        detail = e.what();
    }
    report(8, "conservation, determinism and FIFO order", ok8, detail);

    bool ok9 = false;
    try {
        ok9 = check_trace_roundtrip(detail);
    } catch (const std::exception& e) {
        detail = e.what();
    }
    report(9, "trace round-trip with warm-up discard", ok9, detail);

    const auto secs =
        std::chrono::duration_cast<std::chrono::milliseconds>(clock::now() - t0).count() / 1000.0;
    std::printf("%d of 9 criteria failed (%.1f s)\n", g_failures, secs);
    return g_failures == 0 ? 0 : 1;
}
