#pragma once

#include "netdelay/topology.hpp"
#include "netdelay/traffic.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace netdelay {

enum class RoutingPolicy { ShortestPath, Balanced, Poor };

std::string_view to_string(RoutingPolicy p); // "SP", "MAN", "POOR"
RoutingPolicy parse_routing_policy(std::string_view name);

/// Per-destination forwarding: one outgoing link per (node, destination).
/// Construction validates that every entry is a link leaving the node and
/// that forwarding from any source reaches its destination within n-1 hops.
class RoutingTable {
public:
    static constexpr std::int32_t kNone = -1;

    RoutingTable(const Topology& topo, std::vector<std::int32_t> next_link);

    std::size_t node_count() const noexcept { return n_; }
    LinkId next_link(NodeId node, NodeId dst) const;
    NodeId next_hop(NodeId node, NodeId dst) const;
    /// Links traversed from src to dst (empty when src == dst).
    std::vector<LinkId> path(NodeId src, NodeId dst) const;
    std::size_t hop_count(NodeId src, NodeId dst) const;
    const std::vector<std::int32_t>& entries() const noexcept { return next_; }

    bool operator==(const RoutingTable& o) const { return n_ == o.n_ && next_ == o.next_; }

private:
    std::size_t n_;
    std::vector<std::int32_t> next_; // [node * n + dst] -> link id
    std::vector<NodeId> link_dst_;
};

struct LinkLoadMap {
    std::vector<double> load;        // bits per time unit, indexed by LinkId
    std::vector<double> utilization; // load / capacity

    double max_utilization() const;
    double mean_utilization() const;
};

/// Min-hop forwarding; among equal-length options the lowest next-hop node
/// wins.
RoutingTable shortest_path_routing(const Topology& topo);

/// Starts from shortest-path and repeatedly re-routes a flow crossing the
/// most utilized link whenever that lowers (max utilization, sum of squared
/// utilizations) lexicographically. Never raises the max utilization above
/// the shortest-path value under `reference_tm`.
RoutingTable balanced_routing(const Topology& topo, const TrafficMatrix& reference_tm);

/// Forces every flow that can be forced through one of the bottleneck links
/// (without creating a forwarding loop) to transit it; other flows keep
/// their shortest path.
RoutingTable poor_routing(const Topology& topo, const std::vector<LinkId>& bottleneck);

/// Default bottleneck set: the most utilized link under shortest-path
/// routing with `reference_tm`, plus its reverse link when present.
std::vector<LinkId> default_bottleneck(const Topology& topo, const TrafficMatrix& reference_tm);

/// Uniform matrix at the mean of the uniform sampler: rho_max*C/(n-1)/2.
TrafficMatrix reference_traffic(std::size_t n, double rho_max, double capacity = kDefaultCapacity);

LinkLoadMap link_loads(const Topology& topo, const RoutingTable& table, const TrafficMatrix& tm);

std::string format_routing_table(const RoutingTable& table, const Topology& topo);

} // namespace netdelay
