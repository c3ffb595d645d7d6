#include "netdelay/routing.hpp"

#include "netdelay/error.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <numeric>
#include <optional>

namespace netdelay {

namespace {

constexpr std::size_t kUnreachable = std::numeric_limits<std::size_t>::max();

/// Hop distance from every node to `target`, using only nodes with
/// allowed[node] != 0 (the target itself is always allowed).
std::vector<std::size_t> distances_to(const Topology& topo, NodeId target, const std::vector<char>& allowed) {
    const std::size_t n = topo.node_count();
    std::vector<std::vector<NodeId>> rev(n);
    for (const Link& l : topo.links()) rev[l.dst].push_back(l.src);
    std::vector<std::size_t> dist(n, kUnreachable);
    dist[target] = 0;
    std::deque<NodeId> frontier{target};
    while (!frontier.empty()) {
        NodeId v = frontier.front();
        frontier.pop_front();
        for (NodeId u : rev[v]) {
            if (!allowed[u] || dist[u] != kUnreachable) continue;
            dist[u] = dist[v] + 1;
            frontier.push_back(u);
        }
    }
    return dist;
}

/// Next link from `node` along a min-hop path given `dist`; out_links are
/// sorted by destination so the first match is the lowest next-hop id.
std::optional<LinkId> descend(const Topology& topo, NodeId node, const std::vector<std::size_t>& dist) {
    for (LinkId id : topo.out_links(node)) {
        NodeId v = topo.link(id).dst;
        if (dist[v] != kUnreachable && dist[v] + 1 == dist[node]) return id;
    }
    return std::nullopt;
}

std::vector<std::int32_t> shortest_entries(const Topology& topo) {
    const std::size_t n = topo.node_count();
    std::vector<std::int32_t> next(n * n, RoutingTable::kNone);
    const std::vector<char> all(n, 1);
    for (NodeId d = 0; d < n; ++d) {
        auto dist = distances_to(topo, d, all);
        for (NodeId x = 0; x < n; ++x)
            if (x != d) next[x * n + d] = static_cast<std::int32_t>(*descend(topo, x, dist));
    }
    return next;
}

/// Follows entries from `from` towards `dst`; returns false on a loop or on
/// reaching `forbidden`.
bool reaches_without(const Topology& topo, const std::vector<std::int32_t>& next, NodeId from, NodeId dst,
                     NodeId forbidden) {
    const std::size_t n = topo.node_count();
    NodeId cur = from;
    for (std::size_t steps = 0; steps < n; ++steps) {
        if (cur == dst) return true;
        if (cur == forbidden) return false;
        cur = topo.link(static_cast<LinkId>(next[cur * n + dst])).dst;
    }
    return cur == dst;
}

std::vector<double> loads_for(const Topology& topo, const std::vector<std::int32_t>& next, const TrafficMatrix& tm) {
    const std::size_t n = topo.node_count();
    std::vector<double> load(topo.links().size(), 0.0);
    for (NodeId s = 0; s < n; ++s) {
        for (NodeId d = 0; d < n; ++d) {
            const double r = tm(s, d);
            if (s == d || r == 0.0) continue;
            NodeId cur = s;
            while (cur != d) {
                auto id = static_cast<LinkId>(next[cur * n + d]);
                load[id] += r;
                cur = topo.link(id).dst;
            }
        }
    }
    return load;
}

struct Objective {
    double max_util;
    double sum_sq;

    bool better_than(const Objective& o) const {
        constexpr double tol = 1e-12;
        if (max_util < o.max_util - tol) return true;
        if (max_util > o.max_util + tol) return false;
        return sum_sq < o.sum_sq - tol * std::max(1.0, o.sum_sq);
    }
};

Objective objective(const Topology& topo, const std::vector<double>& load) {
    Objective obj{0.0, 0.0};
    for (std::size_t i = 0; i < load.size(); ++i) {
        const double u = load[i] / topo.link(static_cast<LinkId>(i)).capacity;
        obj.max_util = std::max(obj.max_util, u);
        obj.sum_sq += u * u;
    }
    return obj;
}

} // namespace

std::string_view to_string(RoutingPolicy p) {
    switch (p) {
    case RoutingPolicy::ShortestPath: return "SP";
    case RoutingPolicy::Balanced: return "MAN";
    case RoutingPolicy::Poor: return "POOR";
    }
    return "?";
}

RoutingPolicy parse_routing_policy(std::string_view name) {
    for (auto p : {RoutingPolicy::ShortestPath, RoutingPolicy::Balanced, RoutingPolicy::Poor})
        if (to_string(p) == name) return p;
    fail(ErrorCode::InvalidArgument, "unknown routing policy '" + std::string(name) + "' (expected SP, MAN or POOR)");
}

RoutingTable::RoutingTable(const Topology& topo, std::vector<std::int32_t> next_link)
    : n_(topo.node_count()), next_(std::move(next_link)) {
    if (next_.size() != n_ * n_) fail(ErrorCode::DimensionMismatch, "routing table size does not match topology");
    for (const Link& l : topo.links()) link_dst_.push_back(l.dst);
    for (NodeId x = 0; x < n_; ++x) {
        for (NodeId d = 0; d < n_; ++d) {
            const std::int32_t e = next_[x * n_ + d];
            if (x == d) {
                if (e != kNone) fail(ErrorCode::InvalidArgument, "routing entry for node to itself must be empty");
                continue;
            }
            if (e < 0 || static_cast<std::size_t>(e) >= topo.links().size() ||
                topo.link(static_cast<LinkId>(e)).src != x)
                fail(ErrorCode::InvalidArgument, "routing entry (" + std::to_string(x) + ", " + std::to_string(d) +
                                                     ") is not a link leaving node " + std::to_string(x));
        }
    }
    for (NodeId s = 0; s < n_; ++s) {
        for (NodeId d = 0; d < n_; ++d) {
            NodeId cur = s;
            std::size_t hops = 0;
            while (cur != d) {
                if (++hops > n_ - 1)
                    fail(ErrorCode::InvalidArgument, "routing loop from " + std::to_string(s) + " to " +
                                                         std::to_string(d));
                cur = link_dst_[static_cast<std::size_t>(next_[cur * n_ + d])];
            }
        }
    }
}

LinkId RoutingTable::next_link(NodeId node, NodeId dst) const {
    const std::int32_t e = next_.at(node * n_ + dst);
    if (e == kNone) fail(ErrorCode::InvalidArgument, "no next hop from a node to itself");
    return static_cast<LinkId>(e);
}

NodeId RoutingTable::next_hop(NodeId node, NodeId dst) const { return link_dst_[next_link(node, dst)]; }

std::vector<LinkId> RoutingTable::path(NodeId src, NodeId dst) const {
    std::vector<LinkId> out;
    NodeId cur = src;
    while (cur != dst) {
        LinkId id = next_link(cur, dst);
        out.push_back(id);
        cur = link_dst_[id];
    }
    return out;
}

std::size_t RoutingTable::hop_count(NodeId src, NodeId dst) const { return path(src, dst).size(); }

double LinkLoadMap::max_utilization() const {
    return utilization.empty() ? 0.0 : *std::max_element(utilization.begin(), utilization.end());
}

double LinkLoadMap::mean_utilization() const {
    if (utilization.empty()) return 0.0;
    return std::accumulate(utilization.begin(), utilization.end(), 0.0) / static_cast<double>(utilization.size());
}

RoutingTable shortest_path_routing(const Topology& topo) { return RoutingTable(topo, shortest_entries(topo)); }

RoutingTable balanced_routing(const Topology& topo, const TrafficMatrix& reference_tm) {
    const std::size_t n = topo.node_count();
    if (reference_tm.node_count() != n)
        fail(ErrorCode::DimensionMismatch, "reference traffic matrix size does not match topology");
    auto next = shortest_entries(topo);
    auto load = loads_for(topo, next, reference_tm);
    Objective current = objective(topo, load);

    const std::size_t max_moves = 100 * n * n;
    for (std::size_t move = 0; move < max_moves; ++move) {
        LinkId hottest = 0;
        double hottest_util = -1.0;
        for (LinkId id = 0; id < load.size(); ++id) {
            const double u = load[id] / topo.link(id).capacity;
            if (u > hottest_util) {
                hottest_util = u;
                hottest = id;
            }
        }

        bool moved = false;
        for (NodeId s = 0; s < n && !moved; ++s) {
            for (NodeId d = 0; d < n && !moved; ++d) {
                if (s == d || reference_tm(s, d) == 0.0) continue;
                // Nodes of the flow's path up to the tail of the hot link.
                std::vector<NodeId> prefix;
                bool crosses = false;
                for (NodeId cur = s; cur != d;) {
                    auto id = static_cast<LinkId>(next[cur * n + d]);
                    prefix.push_back(cur);
                    if (id == hottest) {
                        crosses = true;
                        break;
                    }
                    cur = topo.link(id).dst;
                }
                if (!crosses) continue;

                std::optional<std::vector<std::int32_t>> best_table;
                std::vector<double> best_load;
                Objective best = current;
                for (NodeId x : prefix) {
                    const std::int32_t old_entry = next[x * n + d];
                    for (LinkId alt : topo.out_links(x)) {
                        if (static_cast<std::int32_t>(alt) == old_entry) continue;
                        NodeId y = topo.link(alt).dst;
                        if (y != d && !reaches_without(topo, next, y, d, x)) continue;
                        auto candidate = next;
                        candidate[x * n + d] = static_cast<std::int32_t>(alt);
                        auto cand_load = loads_for(topo, candidate, reference_tm);
                        Objective obj = objective(topo, cand_load);
                        if (obj.better_than(best)) {
                            best = obj;
                            best_table = std::move(candidate);
                            best_load = std::move(cand_load);
                        }
                    }
                }
                if (best_table) {
                    next = std::move(*best_table);
                    load = std::move(best_load);
                    current = best;
                    moved = true;
                }
            }
        }
        if (!moved) break;
    }
    return RoutingTable(topo, std::move(next));
}

RoutingTable poor_routing(const Topology& topo, const std::vector<LinkId>& bottleneck) {
    const std::size_t n = topo.node_count();
    if (bottleneck.empty()) fail(ErrorCode::InfeasibleBottleneck, "bottleneck set is empty");
    for (LinkId id : bottleneck)
        if (id >= topo.links().size())
            fail(ErrorCode::InvalidArgument, "bottleneck link id " + std::to_string(id) + " does not exist");

    auto next = shortest_entries(topo);
    bool any_forced = false;
    for (NodeId d = 0; d < n; ++d) {
        std::vector<std::int32_t> best_tree;
        std::size_t best_forced = 0;
        for (LinkId b : bottleneck) {
            const NodeId u = topo.link(b).src;
            const NodeId v = topo.link(b).dst;
            if (u == d) continue;

            // Downstream segment: min-hop path v -> d avoiding u.
            std::vector<char> no_u(n, 1);
            no_u[u] = 0;
            auto dist_vd = distances_to(topo, d, no_u);
            if (dist_vd[v] == kUnreachable) continue;

            std::vector<std::int32_t> tree(n, RoutingTable::kNone);
            std::vector<char> downstream(n, 0);
            for (NodeId cur = v;; ) {
                downstream[cur] = 1;
                if (cur == d) break;
                LinkId id = *descend(topo, cur, dist_vd);
                tree[cur] = static_cast<std::int32_t>(id);
                cur = topo.link(id).dst;
            }
            tree[u] = static_cast<std::int32_t>(b);

            // Upstream: min-hop paths to u that stay clear of the downstream segment.
            std::vector<char> upstream_ok(n, 1);
            for (NodeId x = 0; x < n; ++x)
                if (downstream[x]) upstream_ok[x] = 0;
            auto dist_u = distances_to(topo, u, upstream_ok);
            std::size_t forced = 0;
            for (NodeId x = 0; x < n; ++x) {
                if (x == d) continue;
                if (x == u) {
                    ++forced;
                    continue;
                }
                if (downstream[x]) continue;
                if (dist_u[x] != kUnreachable) {
                    tree[x] = static_cast<std::int32_t>(*descend(topo, x, dist_u));
                    ++forced;
                } else {
                    tree[x] = next[x * n + d];
                }
            }
            if (forced > best_forced) {
                best_forced = forced;
                best_tree = std::move(tree);
            }
        }
        if (best_forced == 0) continue;
        any_forced = true;
        for (NodeId x = 0; x < n; ++x)
            if (x != d) next[x * n + d] = best_tree[x];
    }
    if (!any_forced)
        fail(ErrorCode::InfeasibleBottleneck, "no flow can be routed through the bottleneck links without a loop");
    return RoutingTable(topo, std::move(next));
}

std::vector<LinkId> default_bottleneck(const Topology& topo, const TrafficMatrix& reference_tm) {
    auto loads = link_loads(topo, shortest_path_routing(topo), reference_tm);
    LinkId hottest = 0;
    for (LinkId id = 1; id < loads.utilization.size(); ++id)
        if (loads.utilization[id] > loads.utilization[hottest]) hottest = id;
    std::vector<LinkId> out{hottest};
    if (auto rev = topo.find_link(topo.link(hottest).dst, topo.link(hottest).src)) out.push_back(*rev);
    return out;
}

TrafficMatrix reference_traffic(std::size_t n, double rho_max, double capacity) {
    if (n < 2) fail(ErrorCode::InvalidSize, "reference traffic needs n >= 2");
    TrafficMatrix tm(n);
    const double rate = rho_max * capacity / static_cast<double>(n - 1) / 2.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j) tm.set(i, j, rate);
    return tm;
}

LinkLoadMap link_loads(const Topology& topo, const RoutingTable& table, const TrafficMatrix& tm) {
    if (tm.node_count() != topo.node_count() || table.node_count() != topo.node_count())
        fail(ErrorCode::DimensionMismatch, "traffic matrix / routing table size does not match topology");
    LinkLoadMap out;
    out.load = loads_for(topo, table.entries(), tm);
    out.utilization.resize(out.load.size());
    for (std::size_t i = 0; i < out.load.size(); ++i)
        out.utilization[i] = out.load[i] / topo.link(static_cast<LinkId>(i)).capacity;
    return out;
}

std::string format_routing_table(const RoutingTable& table, const Topology& topo) {
    std::string out;
    const std::size_t n = topo.node_count();
    for (NodeId s = 0; s < n; ++s)
        for (NodeId d = 0; d < n; ++d)
            if (s != d)
                out += "route " + std::to_string(s) + " " + std::to_string(d) + " " +
                       std::to_string(table.next_hop(s, d)) + "\n";
    return out;
}

} // namespace netdelay
