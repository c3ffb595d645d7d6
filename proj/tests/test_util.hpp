#pragma once
// Small helpers shared by the unit tests. Oracles live in the tests
// themselves; nothing here calls into the library under test.
#include <cstdlib>
#include <filesystem>
#include <queue>
#include <string>
#include <utility>
#include <vector>

namespace testutil {

inline std::filesystem::path temp_dir(const std::string& name) {
    const char* env = std::getenv("NETDELAY_TEST_TMP");
    std::filesystem::path base = env ? env : std::filesystem::temp_directory_path() / "netdelay_tests";
    auto dir = base / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

// Hop distances from every node by plain BFS over a directed edge list.
inline std::vector<std::vector<int>> bfs_distances(std::size_t n, const std::vector<std::pair<int, int>>& edges) {
    std::vector<std::vector<int>> adj(n);
    for (auto [a, b] : edges) adj[a].push_back(b);
    std::vector<std::vector<int>> dist(n, std::vector<int>(n, -1));
    for (std::size_t s = 0; s < n; ++s) {
        std::queue<int> q;
        dist[s][s] = 0;
        q.push(static_cast<int>(s));
        while (!q.empty()) {
            int u = q.front();
            q.pop();
            for (int v : adj[u])
                if (dist[s][v] < 0) {
                    dist[s][v] = dist[s][u] + 1;
                    q.push(v);
                }
        }
    }
    return dist;
}

inline bool all_reachable(const std::vector<std::vector<int>>& dist) {
    for (const auto& row : dist)
        for (int d : row)
            if (d < 0) return false;
    return true;
}

} // namespace testutil
