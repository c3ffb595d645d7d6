#pragma once

#include "netdelay/routing.hpp"
#include "netdelay/topology.hpp"
#include "netdelay/traffic.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace netdelay {

/// Per-pair average end-to-end delay (time units) over packets delivered
/// within the horizon. The diagonal reads 0. Pairs without deliveries have
/// a zero count and read the unloaded path delay of a mean-size packet.
struct DelayMatrix {
    std::size_t n = 0;
    std::vector<double> mean_delay;          // row-major N*N
    std::vector<std::uint64_t> delivered;    // row-major N*N

    double operator()(std::size_t src, std::size_t dst) const { return mean_delay[src * n + dst]; }
    std::uint64_t count(std::size_t src, std::size_t dst) const { return delivered[src * n + dst]; }

    bool operator==(const DelayMatrix&) const = default;
};

struct SimResult {
    DelayMatrix delays;
    LinkLoadMap link_utilization; // measured: transmitted bits / horizon
    double horizon = 0.0;
    std::uint64_t seed = 0;
    std::uint64_t generated = 0;
    std::uint64_t delivered = 0;
    std::uint64_t in_flight = 0; // packets still queued or in transmission at the horizon

    bool operator==(const SimResult& o) const {
        return delays == o.delays && link_utilization.load == o.link_utilization.load && horizon == o.horizon &&
               seed == o.seed && generated == o.generated && delivered == o.delivered && in_flight == o.in_flight;
    }
};

/// Hooks for tests that need to see individual packets. `packet` is a
/// creation sequence number unique within one run.
class SimObserver {
public:
    virtual ~SimObserver() = default;
    virtual void on_enqueue(LinkId /*link*/, std::uint64_t /*packet*/, double /*time*/) {}
    virtual void on_transmit_start(LinkId /*link*/, std::uint64_t /*packet*/, double /*time*/) {}
    virtual void on_deliver(std::uint64_t /*packet*/, NodeId /*src*/, NodeId /*dst*/, double /*delay*/) {}
    /// Called once at the horizon with the number of packets sitting in each
    /// link's FIFO (including the one being transmitted).
    virtual void on_finish(std::span<const std::size_t> /*queue_lengths*/) {}
};

/// Event-driven packet simulation over [0, horizon]. Each link is an output
/// port with an unbounded FIFO; transmission takes size/capacity, propagation
/// and processing are instantaneous. One RNG stream per flow, derived from
/// (seed, src, dst).
SimResult simulate(const Topology& topo, const RoutingTable& table, const TrafficMatrix& tm, const TrafficConfig& cfg,
                   double horizon, std::uint64_t seed, SimObserver* observer = nullptr);

std::vector<SimResult> repeat_simulate(const Topology& topo, const RoutingTable& table, const TrafficMatrix& tm,
                                       const TrafficConfig& cfg, double horizon, std::span<const std::uint64_t> seeds);

/// Mean sojourn time of an M/G/1 queue (Pollaczek-Khinchine):
/// E[S] + lambda * (Var[S] + E[S]^2) / (2 (1 - rho)).
double pk_sojourn(double arrival_rate, double mean_service, double service_variance);

} // namespace netdelay
