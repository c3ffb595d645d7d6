#include "netdelay/simulator.hpp"

#include "netdelay/error.hpp"
#include "netdelay/parallel.hpp"
#include "netdelay/rng.hpp"

#include <cmath>
#include <deque>
#include <queue>

namespace netdelay {

namespace {

enum class EventKind : std::uint8_t { TransmissionComplete = 0, PacketGeneration = 1 };

struct Event {
    double time;
    EventKind kind;
    std::uint32_t id; // link id or flow index

    // Min-heap order on (time, kind, id).
    bool operator>(const Event& o) const {
        if (time != o.time) return time > o.time;
        if (kind != o.kind) return kind > o.kind;
        return id > o.id;
    }
};

struct Packet {
    NodeId src;
    NodeId dst;
    double size;
    double created_at;
    std::uint64_t seq;
};

struct Port {
    std::deque<std::uint32_t> fifo; // packet slots; front is in transmission when busy
    bool busy = false;
    double transmitted_bits = 0.0;
};

class Engine {
public:
    Engine(const Topology& topo, const RoutingTable& table, SimObserver* obs)
        : topo_(topo), table_(table), obs_(obs), ports_(topo.links().size()) {}

    std::uint32_t new_packet(const Packet& p) {
        if (!free_.empty()) {
            std::uint32_t slot = free_.back();
            free_.pop_back();
            packets_[slot] = p;
            return slot;
        }
        packets_.push_back(p);
        return static_cast<std::uint32_t>(packets_.size() - 1);
    }

    void enqueue(LinkId link, std::uint32_t slot, double now) {
        Port& port = ports_[link];
        port.fifo.push_back(slot);
        if (obs_) obs_->on_enqueue(link, packets_[slot].seq, now);
        if (!port.busy) start(link, now);
    }

    void start(LinkId link, double now) {
        Port& port = ports_[link];
        port.busy = true;
        const Packet& p = packets_[port.fifo.front()];
        if (obs_) obs_->on_transmit_start(link, p.seq, now);
        events_.push({now + p.size / topo_.link(link).capacity, EventKind::TransmissionComplete, link});
    }

    void complete(LinkId link, double now, std::vector<double>& delay_sum, std::vector<std::uint64_t>& count,
                  std::uint64_t& delivered) {
        Port& port = ports_[link];
        std::uint32_t slot = port.fifo.front();
        port.fifo.pop_front();
        port.busy = false;
        Packet& p = packets_[slot];
        port.transmitted_bits += p.size;
        const NodeId at = topo_.link(link).dst;
        if (at == p.dst) {
            const double delay = now - p.created_at;
            const std::size_t k = static_cast<std::size_t>(p.src) * topo_.node_count() + p.dst;
            delay_sum[k] += delay;
            ++count[k];
            ++delivered;
            if (obs_) obs_->on_deliver(p.seq, p.src, p.dst, delay);
            free_.push_back(slot);
        } else {
            enqueue(table_.next_link(at, p.dst), slot, now);
        }
        if (!port.fifo.empty()) start(link, now);
    }

    std::priority_queue<Event, std::vector<Event>, std::greater<>> events_;

    const Topology& topo_;
    const RoutingTable& table_;
    SimObserver* obs_;
    std::vector<Port> ports_;
    std::vector<Packet> packets_;
    std::vector<std::uint32_t> free_;
};

} // namespace

SimResult simulate(const Topology& topo, const RoutingTable& table, const TrafficMatrix& tm, const TrafficConfig& cfg,
                   double horizon, std::uint64_t seed, SimObserver* observer) {
    const std::size_t n = topo.node_count();
    if (tm.node_count() != n || table.node_count() != n)
        fail(ErrorCode::DimensionMismatch, "traffic matrix / routing table size does not match topology");
    if (!(horizon > 0.0) || !std::isfinite(horizon)) fail(ErrorCode::InvalidArgument, "horizon must be positive");
    cfg.validate();

    std::vector<FlowProcess> flows;
    for (NodeId s = 0; s < n; ++s)
        for (NodeId d = 0; d < n; ++d)
            if (s != d && tm(s, d) > 0.0)
                flows.emplace_back(s, d, tm(s, d), cfg, derive_seed(seed, {stream::flow, s, d}));

    Engine engine(topo, table, observer);
    for (std::uint32_t f = 0; f < flows.size(); ++f) {
        const double t = flows[f].next_interarrival();
        if (t <= horizon) engine.events_.push({t, EventKind::PacketGeneration, f});
    }

    std::vector<double> delay_sum(n * n, 0.0);
    std::vector<std::uint64_t> count(n * n, 0);
    std::uint64_t generated = 0, delivered = 0, seq = 0;

    while (!engine.events_.empty()) {
        const Event ev = engine.events_.top();
        if (ev.time > horizon) break;
        engine.events_.pop();
        if (ev.kind == EventKind::TransmissionComplete) {
            engine.complete(ev.id, ev.time, delay_sum, count, delivered);
        } else {
            FlowProcess& flow = flows[ev.id];
            const std::uint32_t slot =
                engine.new_packet({flow.src(), flow.dst(), flow.next_length(), ev.time, seq++});
            ++generated;
            engine.enqueue(table.next_link(flow.src(), flow.dst()), slot, ev.time);
            const double t = ev.time + flow.next_interarrival();
            if (t <= horizon) engine.events_.push({t, EventKind::PacketGeneration, ev.id});
        }
    }

    SimResult res;
    res.horizon = horizon;
    res.seed = seed;
    res.generated = generated;
    res.delivered = delivered;
    res.delays.n = n;
    res.delays.mean_delay.assign(n * n, 0.0);
    res.delays.delivered = count;
    for (std::size_t k = 0; k < n * n; ++k) {
        if (count[k] > 0) {
            res.delays.mean_delay[k] = delay_sum[k] / static_cast<double>(count[k]);
        } else if (k / n != k % n) {
            // Nothing delivered: fall back to the empty-network delay of a
            // mean-size packet, the limit of the estimate as the rate -> 0.
            double t = 0.0;
            for (NodeId at = static_cast<NodeId>(k / n); at != k % n;) {
                const Link& link = topo.link(table.next_link(at, static_cast<NodeId>(k % n)));
                t += cfg.mean_packet_bits / link.capacity;
                at = link.dst;
            }
            res.delays.mean_delay[k] = t;
        }
    }

    std::vector<std::size_t> queue_lengths(engine.ports_.size());
    res.link_utilization.load.resize(engine.ports_.size());
    res.link_utilization.utilization.resize(engine.ports_.size());
    for (std::size_t l = 0; l < engine.ports_.size(); ++l) {
        const Port& port = engine.ports_[l];
        queue_lengths[l] = port.fifo.size();
        res.in_flight += port.fifo.size();
        res.link_utilization.load[l] = port.transmitted_bits / horizon;
        res.link_utilization.utilization[l] = res.link_utilization.load[l] / topo.link(static_cast<LinkId>(l)).capacity;
    }
    if (observer) observer->on_finish(queue_lengths);
    return res;
}

std::vector<SimResult> repeat_simulate(const Topology& topo, const RoutingTable& table, const TrafficMatrix& tm,
                                       const TrafficConfig& cfg, double horizon, std::span<const std::uint64_t> seeds) {
    if (seeds.size() < 2) fail(ErrorCode::InvalidArgument, "repeat_simulate needs at least 2 seeds");
    std::vector<SimResult> out(seeds.size());
    parallel_for(seeds.size(), [&](std::size_t i) { out[i] = simulate(topo, table, tm, cfg, horizon, seeds[i]); });
    return out;
}

double pk_sojourn(double arrival_rate, double mean_service, double service_variance) {
    if (!(arrival_rate >= 0.0) || !(mean_service > 0.0) || !(service_variance >= 0.0))
        fail(ErrorCode::InvalidArgument, "pk_sojourn needs arrival_rate >= 0, mean_service > 0, variance >= 0");
    const double rho = arrival_rate * mean_service;
    if (rho >= 1.0)
        fail(ErrorCode::UnstableQueue, "queue is unstable (rho = " + std::to_string(rho) + " >= 1)");
    return mean_service +
           arrival_rate * (service_variance + mean_service * mean_service) / (2.0 * (1.0 - rho));
}

} // namespace netdelay
