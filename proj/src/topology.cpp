#include "netdelay/topology.hpp"

#include "netdelay/error.hpp"
#include "netdelay/rng.hpp"
#include "netdelay/text.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>
#include <sstream>

namespace netdelay {

namespace {

bool reaches_all(std::size_t n, const std::vector<std::vector<NodeId>>& adj, NodeId from) {
    std::vector<char> seen(n, 0);
    std::deque<NodeId> frontier{from};
    seen[from] = 1;
    std::size_t count = 1;
    while (!frontier.empty()) {
        NodeId u = frontier.front();
        frontier.pop_front();
        for (NodeId v : adj[u]) {
            if (!seen[v]) {
                seen[v] = 1;
                ++count;
                frontier.push_back(v);
            }
        }
    }
    return count == n;
}

} // namespace

bool strongly_connected(std::size_t n, const std::vector<Link>& links) {
    if (n <= 1) return true;
    std::vector<std::vector<NodeId>> fwd(n), rev(n);
    for (const Link& l : links) {
        fwd[l.src].push_back(l.dst);
        rev[l.dst].push_back(l.src);
    }
    // Strongly connected iff node 0 reaches everyone in both directions.
    return reaches_all(n, fwd, 0) && reaches_all(n, rev, 0);
}

Topology::Topology(std::size_t node_count, std::vector<Link> links, std::string name)
    : n_(node_count), links_(std::move(links)), name_(std::move(name)), out_(node_count) {
    if (n_ < 2) fail(ErrorCode::InvalidSize, "topology needs at least 2 nodes, got " + std::to_string(n_));
    std::set<std::pair<NodeId, NodeId>> seen;
    for (std::size_t i = 0; i < links_.size(); ++i) {
        const Link& l = links_[i];
        if (l.src >= n_ || l.dst >= n_)
            fail(ErrorCode::InvalidArgument, "link " + std::to_string(l.src) + "->" + std::to_string(l.dst) +
                                                 " references a node outside [0, " + std::to_string(n_) + ")");
        if (l.src == l.dst) fail(ErrorCode::InvalidArgument, "self-loop on node " + std::to_string(l.src));
        if (!(l.capacity > 0.0) || !std::isfinite(l.capacity))
            fail(ErrorCode::InvalidArgument, "link " + std::to_string(l.src) + "->" + std::to_string(l.dst) +
                                                 " has non-positive capacity");
        if (!seen.emplace(l.src, l.dst).second)
            fail(ErrorCode::DuplicateLink,
                 "duplicate link " + std::to_string(l.src) + "->" + std::to_string(l.dst));
        out_[l.src].push_back(static_cast<LinkId>(i));
    }
    if (!strongly_connected(n_, links_))
        fail(ErrorCode::Disconnected, "topology '" + name_ + "' is not strongly connected");
    for (auto& out : out_)
        std::sort(out.begin(), out.end(), [&](LinkId a, LinkId b) { return links_[a].dst < links_[b].dst; });
}

std::optional<LinkId> Topology::find_link(NodeId src, NodeId dst) const {
    if (src >= n_) return std::nullopt;
    for (LinkId id : out_[src])
        if (links_[id].dst == dst) return id;
    return std::nullopt;
}

Topology make_ring(std::size_t n) {
    if (n < 3) fail(ErrorCode::InvalidSize, "ring needs n >= 3, got " + std::to_string(n));
    std::vector<Link> links;
    for (std::size_t i = 0; i < n; ++i)
        links.push_back({static_cast<NodeId>(i), static_cast<NodeId>((i + 1) % n), kDefaultCapacity});
    return Topology(n, std::move(links), "ring" + std::to_string(n));
}

Topology make_star(std::size_t n) {
    if (n < 3) fail(ErrorCode::InvalidSize, "star needs n >= 3, got " + std::to_string(n));
    std::vector<Link> links;
    for (std::size_t i = 1; i < n; ++i) {
        links.push_back({0, static_cast<NodeId>(i), kDefaultCapacity});
        links.push_back({static_cast<NodeId>(i), 0, kDefaultCapacity});
    }
    return Topology(n, std::move(links), "star" + std::to_string(n));
}

Topology make_scale_free(std::size_t n, std::size_t m, std::uint64_t seed) {
    if (n < 3) fail(ErrorCode::InvalidSize, "scale-free needs n >= 3, got " + std::to_string(n));
    if (m < 1 || m >= n)
        fail(ErrorCode::InvalidArgument,
             "attachment degree m must satisfy 1 <= m < n (m=" + std::to_string(m) + ", n=" + std::to_string(n) + ")");

    Rng rng(derive_seed(seed, {stream::topology}));
    std::vector<std::pair<NodeId, NodeId>> edges;
    // Every edge contributes both endpoints, so a uniform pick from this list
    // is a degree-proportional pick of a node.
    std::vector<NodeId> endpoints;
    for (std::size_t i = 1; i < m; ++i) {
        edges.emplace_back(static_cast<NodeId>(i - 1), static_cast<NodeId>(i));
        endpoints.push_back(static_cast<NodeId>(i - 1));
        endpoints.push_back(static_cast<NodeId>(i));
    }
    for (std::size_t v = m; v < n; ++v) {
        std::vector<NodeId> targets;
        while (targets.size() < m) {
            NodeId t;
            if (endpoints.empty()) {
                t = static_cast<NodeId>(std::uniform_int_distribution<std::size_t>(0, v - 1)(rng));
            } else {
                t = endpoints[std::uniform_int_distribution<std::size_t>(0, endpoints.size() - 1)(rng)];
            }
            if (std::find(targets.begin(), targets.end(), t) == targets.end()) targets.push_back(t);
        }
        for (NodeId t : targets) {
            edges.emplace_back(t, static_cast<NodeId>(v));
            endpoints.push_back(t);
            endpoints.push_back(static_cast<NodeId>(v));
        }
    }
    std::vector<Link> links;
    links.reserve(edges.size() * 2);
    for (auto [a, b] : edges) {
        links.push_back({a, b, kDefaultCapacity});
        links.push_back({b, a, kDefaultCapacity});
    }
    return Topology(n, std::move(links), "scale-free" + std::to_string(n));
}

Topology parse_topology(const std::string& text, const std::string& name) {
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    std::optional<std::size_t> nodes;
    std::vector<Link> links;
    auto where = [&] { return name + ":" + std::to_string(line_no) + ": "; };
    while (std::getline(in, line)) {
        ++line_no;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto tokens = split_whitespace(line);
        if (tokens.empty()) continue;
        if (tokens[0] == "nodes") {
            if (nodes) fail(ErrorCode::Parse, where() + "repeated 'nodes' declaration");
            if (!links.empty()) fail(ErrorCode::Parse, where() + "'nodes' must precede links");
            if (tokens.size() != 2) fail(ErrorCode::Parse, where() + "expected 'nodes <N>'");
            nodes = parse_number<std::size_t>(tokens[1], where());
        } else if (tokens[0] == "link") {
            if (!nodes) fail(ErrorCode::Parse, where() + "'link' before 'nodes'");
            if (tokens.size() != 4) fail(ErrorCode::Parse, where() + "expected 'link <src> <dst> <capacity>'");
            Link l;
            l.src = parse_number<NodeId>(tokens[1], where());
            l.dst = parse_number<NodeId>(tokens[2], where());
            l.capacity = parse_number<double>(tokens[3], where());
            links.push_back(l);
        } else {
            fail(ErrorCode::Parse, where() + "unknown directive '" + tokens[0] + "'");
        }
    }
    if (!nodes) fail(ErrorCode::Parse, name + ": missing 'nodes <N>' line");
    return Topology(*nodes, std::move(links), name);
}

Topology load_topology(const std::filesystem::path& path) {
    return parse_topology(read_file(path), path.stem().string());
}

std::string format_topology(const Topology& topo) {
    std::string out = "# " + topo.name() + "\n";
    out += "nodes " + std::to_string(topo.node_count()) + "\n";
    for (const Link& l : topo.links())
        out += "link " + std::to_string(l.src) + " " + std::to_string(l.dst) + " " + format_double(l.capacity) + "\n";
    return out;
}

void save_topology(const Topology& topo, const std::filesystem::path& path) {
    write_file(path, format_topology(topo));
}

} // namespace netdelay
