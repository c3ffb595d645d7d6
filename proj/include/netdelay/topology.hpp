#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace netdelay {

using NodeId = std::uint32_t;
using LinkId = std::uint32_t;

inline constexpr double kDefaultCapacity = 10'000.0; // bits per time unit

struct Link {
    NodeId src = 0;
    NodeId dst = 0;
    double capacity = kDefaultCapacity;

    bool operator==(const Link&) const = default;
};

/// Directed capacitated graph. Immutable once constructed; the constructor
/// enforces node-range, capacity, duplicate-link and all-pairs reachability
/// invariants.
class Topology {
public:
    Topology(std::size_t node_count, std::vector<Link> links, std::string name);

    std::size_t node_count() const noexcept { return n_; }
    const std::vector<Link>& links() const noexcept { return links_; }
    const Link& link(LinkId id) const { return links_.at(id); }
    const std::string& name() const noexcept { return name_; }

    /// Outgoing link ids of `node`, sorted by destination node.
    const std::vector<LinkId>& out_links(NodeId node) const { return out_.at(node); }
    std::optional<LinkId> find_link(NodeId src, NodeId dst) const;

    bool operator==(const Topology& other) const { return n_ == other.n_ && links_ == other.links_; }

private:
    std::size_t n_;
    std::vector<Link> links_;
    std::string name_;
    std::vector<std::vector<LinkId>> out_;
};

/// True when every ordered pair (i, j), i != j, has a directed path.
bool strongly_connected(std::size_t node_count, const std::vector<Link>& links);

Topology make_ring(std::size_t n);
Topology make_star(std::size_t n);
/// Barabasi-Albert preferential attachment: a chain of m seed nodes, then
/// each new node attaches to m distinct existing nodes drawn proportionally
/// to degree. Undirected edges become bidirectional link pairs.
Topology make_scale_free(std::size_t n, std::size_t m, std::uint64_t seed);

Topology parse_topology(const std::string& text, const std::string& name);
Topology load_topology(const std::filesystem::path& path);
std::string format_topology(const Topology& topo);
void save_topology(const Topology& topo, const std::filesystem::path& path);

} // namespace netdelay
