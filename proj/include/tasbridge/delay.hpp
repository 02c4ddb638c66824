#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tasbridge/model.hpp"
#include "tasbridge/rng.hpp"

namespace tasbridge {

// Per-node / per-link delay terms of the composition model.
struct DelayComponents {
    Nanos que_in = 0;
    Nanos proc = 0;
    Nanos que_out = 0;

    Nanos node_sum() const { return que_in + proc + que_out; }
};

struct LinkDelay {
    Nanos tran = 0;
    Nanos prop = 0;
};

// End-to-end delay: sum of node terms over the path plus (tran + prop) per link.
inline Nanos compose_e2e(const std::map<std::string, DelayComponents>& per_node,
                         const std::map<std::string, LinkDelay>& per_link,
                         const std::vector<std::string>& nodes,
                         const std::vector<std::string>& links) {
    Nanos total = 0;
    for (const auto& n : nodes) {
        auto it = per_node.find(n);
        if (it == per_node.end()) throw ConfigError("missing delay components for node '" + n + "'");
        total += it->second.node_sum();
    }
    for (const auto& l : links) {
        auto it = per_link.find(l);
        if (it == per_link.end()) throw ConfigError("missing delay components for link '" + l + "'");
        total += it->second.tran + it->second.prop;
    }
    return total;
}

// Same composition restricted to the 5G node/link subsets.
inline Nanos compose_5g(const std::map<std::string, DelayComponents>& per_node,
                        const std::map<std::string, LinkDelay>& per_link,
                        const std::vector<std::string>& fiveg_nodes,
                        const std::vector<std::string>& fiveg_links) {
    return compose_e2e(per_node, per_link, fiveg_nodes, fiveg_links);
}

struct MsSlComponents {
    std::vector<LinkDelay> tsn_links;  // MS->NW-TT and DS-TT->SL
    Nanos fiveg = 0;
    Nanos sl_que_in = 0;
    Nanos sl_proc = 0;
    Nanos sl_que_out = 0;
};

// MS output port to SL output port.
inline Nanos ms_sl_delay(const MsSlComponents& c) {
    Nanos total = c.fiveg + c.sl_que_in + c.sl_proc + c.sl_que_out;
    for (const auto& l : c.tsn_links) total += l.tran + l.prop;
    return total;
}

// Same path excluding the SL output queuing term (the ZWSL delay).
inline Nanos zwsl_delay(const MsSlComponents& c) {
    return ms_sl_delay(c) - c.sl_que_out;
}

// A measured delay is the true delay biased by the MS/SL clock offset.
inline Nanos apply_sync_error(Nanos true_delay, Nanos delta) { return true_delay + delta; }

// Sorted delay samples with nearest-rank percentile queries.
class EmpiricalDistribution {
public:
    EmpiricalDistribution() = default;

    explicit EmpiricalDistribution(std::vector<Nanos> samples) : samples_(std::move(samples)) {
        if (samples_.empty()) throw ConfigError("empirical distribution needs at least one sample");
        std::sort(samples_.begin(), samples_.end());
    }

    const std::vector<Nanos>& samples() const { return samples_; }
    std::size_t count() const { return samples_.size(); }
    Nanos min() const { return samples_.front(); }
    Nanos max() const { return samples_.back(); }

    double mean() const {
        long double acc = 0;
        for (Nanos v : samples_) acc += static_cast<long double>(v);
        return static_cast<double>(acc / static_cast<long double>(samples_.size()));
    }

    // Nearest-rank (lower inclusive): the smallest sample v whose rank k
    // satisfies k / count >= p. percentile(0) is the minimum.
    Nanos percentile(double p) const {
        const std::size_t k = nearest_rank(p, samples_.size());
        return samples_[k - 1];
    }

    // Quantile by linear position, used when synthesizing per-position draws.
    Nanos quantile_at(double u) const {
        if (u < 0.0) u = 0.0;
        if (u >= 1.0) return samples_.back();
        return samples_[static_cast<std::size_t>(u * static_cast<double>(samples_.size()))];
    }

    double exceedance_fraction(Nanos threshold) const {
        auto it = std::upper_bound(samples_.begin(), samples_.end(), threshold);
        return static_cast<double>(samples_.end() - it) / static_cast<double>(samples_.size());
    }

    static std::size_t nearest_rank(double p, std::size_t n) {
        if (p < 0.0 || p >= 1.0) throw std::domain_error("percentile fraction must be in [0, 1)");
        std::size_t k = static_cast<std::size_t>(std::ceil(p * static_cast<double>(n)));
        if (k < 1) k = 1;
        if (k > n) k = n;
        // settle float roundoff against the defining inequality k/n >= p
        while (k > 1 && static_cast<double>(k - 1) / static_cast<double>(n) >= p) --k;
        while (k < n && static_cast<double>(k) / static_cast<double>(n) < p) ++k;
        return k;
    }

    // Single-column CSV with header `delay_ns`.
    static EmpiricalDistribution load_csv(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open sample file '" + path + "'");
        std::string line;
        if (!std::getline(in, line)) throw ConfigError("empty sample file '" + path + "'");
        if (line.find("delay_ns") == std::string::npos)
            throw ConfigError("sample file '" + path + "' must have a delay_ns header");
        std::vector<Nanos> samples;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            samples.push_back(static_cast<Nanos>(std::stoll(line)));
        }
        return EmpiricalDistribution(std::move(samples));
    }

    void save_csv(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw ConfigError("cannot write sample file '" + path + "'");
        out << "delay_ns\n";
        for (Nanos v : samples_) out << v << "\n";
    }

private:
    std::vector<Nanos> samples_;
};

struct UncertaintyInterval {
    Nanos lo = 0;
    Nanos hi = 0;
    double p = 0.999;

    Nanos width() const { return hi - lo; }
};

inline UncertaintyInterval uncertainty_interval(const EmpiricalDistribution& dist, double p) {
    UncertaintyInterval u;
    u.lo = dist.min();
    u.hi = dist.percentile(p);
    u.p = p;
    return u;
}

inline Nanos jitter(const UncertaintyInterval& interval) { return interval.hi - interval.lo; }

enum class BridgeKind { empirical_bootstrap, shifted_lognormal, constant };

inline const char* to_string(BridgeKind k) {
    switch (k) {
        case BridgeKind::empirical_bootstrap: return "empirical_bootstrap";
        case BridgeKind::shifted_lognormal: return "shifted_lognormal";
        case BridgeKind::constant: return "constant";
    }
    return "?";
}

// Black-box 5G bridge delay process. The per-burst queue recurrence models the
// 5G segment as the path bottleneck; draws are position-stratified over the
// delay profile so that the first packet of a burst lands near the profile
// minimum and the last near its upper tail, with the per-packet marginal
// matching the profile.
struct BridgeModel {
    BridgeKind kind = BridgeKind::constant;
    EmpiricalDistribution pool;   // empirical_bootstrap
    Nanos constant_delay_ns = 0;  // constant
    Nanos lognormal_location_ns = 0;
    double lognormal_mu = 0.0;  // of the ns-valued excess over the location
    double lognormal_sigma = 0.0;
    std::int64_t bottleneck_rate_bps = 0;  // 0 disables the bottleneck service term
    Nanos sync_error_bound_ns = 250;       // half of the 500 ns peak-to-peak

    static BridgeModel constant(Nanos delay, std::int64_t bottleneck_bps = 0) {
        BridgeModel m;
        m.kind = BridgeKind::constant;
        m.constant_delay_ns = delay;
        m.bottleneck_rate_bps = bottleneck_bps;
        return m;
    }

    static BridgeModel bootstrap(EmpiricalDistribution pool, std::int64_t bottleneck_bps = 0) {
        BridgeModel m;
        m.kind = BridgeKind::empirical_bootstrap;
        m.pool = std::move(pool);
        m.bottleneck_rate_bps = bottleneck_bps;
        return m;
    }

    // Shifted lognormal fit: location at the observed minimum, mu from the
    // median, sigma from the tail percentile.
    static BridgeModel fit_lognormal(Nanos lo, Nanos median, Nanos tail_value, double tail_p,
                                     std::int64_t bottleneck_bps = 0) {
        if (median <= lo || tail_value <= median)
            throw ConfigError("lognormal fit requires lo < median < tail value");
        BridgeModel m;
        m.kind = BridgeKind::shifted_lognormal;
        m.lognormal_location_ns = lo;
        m.lognormal_mu = std::log(static_cast<double>(median - lo));
        const double z = rng::normal_icdf(tail_p);
        m.lognormal_sigma = (std::log(static_cast<double>(tail_value - lo)) - m.lognormal_mu) / z;
        m.bottleneck_rate_bps = bottleneck_bps;
        return m;
    }

    Nanos draw_at_quantile(double u) const {
        switch (kind) {
            case BridgeKind::constant:
                return constant_delay_ns;
            case BridgeKind::empirical_bootstrap:
                return pool.quantile_at(u);
            case BridgeKind::shifted_lognormal: {
                if (u <= 0.0) u = 1e-12;
                if (u >= 1.0) u = 1.0 - 1e-12;
                const double v = std::exp(lognormal_mu + lognormal_sigma * rng::normal_icdf(u));
                return lognormal_location_ns + static_cast<Nanos>(v + 0.5);
            }
        }
        return constant_delay_ns;
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["kind"] = to_string(kind);
        j["bottleneck_rate_bps"] = bottleneck_rate_bps;
        j["sync_error_bound_ns"] = sync_error_bound_ns;
        switch (kind) {
            case BridgeKind::constant:
                j["delay_ns"] = constant_delay_ns;
                break;
            case BridgeKind::shifted_lognormal:
                j["location_ns"] = lognormal_location_ns;
                j["mu"] = lognormal_mu;
                j["sigma"] = lognormal_sigma;
                break;
            case BridgeKind::empirical_bootstrap:
                j["pool_size"] = pool.count();
                break;
        }
        return j;
    }
};

struct BurstDrawKey {
    std::uint64_t seed = 0;
    std::uint64_t burst_index = 0;  // network cycle of the burst
};

inline constexpr std::uint64_t kBridgeStream = 0x6272696467655F31ULL;

// Arrival times at the SL input for a burst released at the MS.
//
// Packet k draws its base delay from the quantile stratum [k/n, (k+1)/n) of
// the model, keyed by (seed, burst, position) so per-position draws are stable
// across window-size sweeps, then passes through the FIFO bottleneck
// recurrence: arrival_k = max(release_k + base_k, arrival_{k-1}) + service_k.
// `prev_departure` carries the bottleneck state across consecutive bursts.
inline std::vector<Nanos> sample_bridge_burst(const BridgeModel& model,
                                              const std::vector<Nanos>& release_times,
                                              const std::vector<std::int64_t>& sizes_bytes,
                                              BurstDrawKey key,
                                              Nanos prev_departure = INT64_MIN) {
    if (release_times.size() != sizes_bytes.size())
        throw ConfigError("release times and sizes must be parallel");
    std::vector<Nanos> arrivals;
    arrivals.reserve(release_times.size());
    const std::size_t n = release_times.size();
    Nanos last = prev_departure;
    for (std::size_t k = 0; k < n; ++k) {
        if (k > 0 && release_times[k] < release_times[k - 1])
            throw ConfigError("release times must be non-decreasing");
        const double v =
            rng::uniform01(key.seed, kBridgeStream, (key.burst_index << 20) | k);
        const double u = (static_cast<double>(k) + v) / static_cast<double>(n);
        const Nanos base = model.draw_at_quantile(u);
        Nanos service = 0;
        if (model.bottleneck_rate_bps > 0)
            service = tran_delay_ns(sizes_bytes[k], model.bottleneck_rate_bps);
        const Nanos ready = release_times[k] + base;
        const Nanos arrival = std::max(ready, last) + service;
        arrivals.push_back(arrival);
        last = arrival;
    }
    return arrivals;
}

inline constexpr std::uint64_t kSyncStream = 0x73796E635F657272ULL;

// Clock-offset draw, uniform in [-bound, +bound].
inline Nanos draw_sync_error(Nanos bound, std::uint64_t seed, std::uint64_t counter) {
    if (bound <= 0) return 0;
    return rng::uniform_int(seed, kSyncStream, counter, -bound, bound);
}

}  // namespace tasbridge
