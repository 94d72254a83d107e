#pragma once

#include <algorithm>
#include <istream>
#include <optional>
#include <ostream>
#include <queue>
#include <set>
#include <sstream>

#include "vtlab/common.hpp"

namespace vtlab {

using AdjList = std::vector<std::vector<int>>;

/// Fixed fiber plant: undirected links, each carrying `wavelengths_per_fiber`
/// channels in each direction. Immutable once built; shared read-only.
struct PhysicalTopology {
    int node_count = 0;
    int wavelengths_per_fiber = 0;
    std::vector<std::pair<int, int>> links;  // u < v, sorted, no duplicates
    AdjList adjacency;                       // sorted neighbor lists

    int fiber_count() const { return static_cast<int>(links.size()); }

    // Index into `links` for the undirected fiber {u,v}, or -1.
    int fiber_id(int u, int v) const {
        if (u > v) std::swap(u, v);
        auto it = std::lower_bound(links.begin(), links.end(), std::make_pair(u, v));
        if (it == links.end() || *it != std::make_pair(u, v)) return -1;
        return static_cast<int>(it - links.begin());
    }

    // Directed fiber ids: 2*fiber for low->high, 2*fiber+1 for high->low.
    int directed_fiber_id(int from, int to) const {
        const int f = fiber_id(from, to);
        if (f < 0) return -1;
        return 2 * f + (from < to ? 0 : 1);
    }

    bool has_link(int u, int v) const { return fiber_id(u, v) >= 0; }
};

inline std::vector<int> bfs_distances(const AdjList& adj, int start) {
    std::vector<int> dist(adj.size(), -1);
    std::queue<int> queue;
    dist[start] = 0;
    queue.push(start);
    while (!queue.empty()) {
        const int u = queue.front();
        queue.pop();
        for (int v : adj[u]) {
            if (dist[v] < 0) {
                dist[v] = dist[u] + 1;
                queue.push(v);
            }
        }
    }
    return dist;
}

/// Minimum-hop path from src to dst, ties broken toward the smallest
/// lexicographic node sequence. `in_adj` must be the reverse adjacency of
/// `out_adj` (pass the same list for undirected graphs). Returns nullopt
/// when dst is unreachable.
inline std::optional<std::vector<int>> shortest_path(const AdjList& out_adj,
                                                     const AdjList& in_adj,
                                                     int src, int dst) {
    const int n = static_cast<int>(out_adj.size());
    if (src < 0 || src >= n || dst < 0 || dst >= n)
        throw std::invalid_argument("shortest_path: node out of range");
    if (src == dst)
        throw std::invalid_argument("shortest_path: src and dst must differ");
    const std::vector<int> dist_to_dst = bfs_distances(in_adj, dst);
    if (dist_to_dst[src] < 0) return std::nullopt;
    std::vector<int> path;
    path.reserve(dist_to_dst[src] + 1);
    int u = src;
    path.push_back(u);
    while (u != dst) {
        // Smallest-index neighbor that still lies on a shortest path; with
        // sorted adjacency this greedy choice yields the lexicographic
        // minimum over all minimum-hop node sequences.
        int next = -1;
        for (int v : out_adj[u]) {
            if (dist_to_dst[v] == dist_to_dst[u] - 1) {
                next = v;
                break;
            }
        }
        u = next;
        path.push_back(u);
    }
    return path;
}

inline std::optional<std::vector<int>> shortest_path(const PhysicalTopology& topo,
                                                     int src, int dst) {
    return shortest_path(topo.adjacency, topo.adjacency, src, dst);
}

struct GraphStats {
    double avg_path_length = 0.0;
    double clustering_coefficient = 0.0;
    int diameter = 0;
    double degree = 0.0;
};

inline GraphStats graph_stats(const PhysicalTopology& topo) {
    const int n = topo.node_count;
    long long hop_sum = 0;
    int diameter = 0;
    for (int s = 0; s < n; ++s) {
        const std::vector<int> dist = bfs_distances(topo.adjacency, s);
        for (int t = 0; t < n; ++t) {
            if (t == s) continue;
            if (dist[t] < 0)
                throw std::invalid_argument("graph_stats: graph is disconnected");
            hop_sum += dist[t];
            diameter = std::max(diameter, dist[t]);
        }
    }
    double clustering = 0.0;
    for (int v = 0; v < n; ++v) {
        const auto& nb = topo.adjacency[v];
        const int d = static_cast<int>(nb.size());
        if (d < 2) continue;
        int closed = 0;
        for (int i = 0; i < d; ++i)
            for (int j = i + 1; j < d; ++j)
                if (topo.has_link(nb[i], nb[j])) ++closed;
        clustering += 2.0 * closed / (static_cast<double>(d) * (d - 1));
    }
    GraphStats stats;
    stats.avg_path_length = static_cast<double>(hop_sum) / (static_cast<double>(n) * (n - 1));
    stats.clustering_coefficient = clustering / n;
    stats.diameter = diameter;
    stats.degree = 2.0 * topo.fiber_count() / n;
    return stats;
}

inline PhysicalTopology make_topology(int n, int wavelengths_per_fiber,
                                      std::vector<std::pair<int, int>> links) {
    if (n <= 0) throw std::invalid_argument("topology: node count must be positive");
    if (wavelengths_per_fiber <= 0)
        throw std::invalid_argument("topology: wavelengths_per_fiber must be positive");
    for (auto& [u, v] : links) {
        if (u == v) throw std::invalid_argument("topology: self-loop");
        if (u > v) std::swap(u, v);
        if (u < 0 || v >= n) throw std::invalid_argument("topology: node out of range");
    }
    std::sort(links.begin(), links.end());
    if (std::adjacent_find(links.begin(), links.end()) != links.end())
        throw std::invalid_argument("topology: duplicate link");
    PhysicalTopology topo;
    topo.node_count = n;
    topo.wavelengths_per_fiber = wavelengths_per_fiber;
    topo.links = std::move(links);
    topo.adjacency.assign(n, {});
    for (const auto& [u, v] : topo.links) {
        topo.adjacency[u].push_back(v);
        topo.adjacency[v].push_back(u);
    }
    for (auto& nb : topo.adjacency) std::sort(nb.begin(), nb.end());
    const std::vector<int> dist = bfs_distances(topo.adjacency, 0);
    if (std::any_of(dist.begin(), dist.end(), [](int d) { return d < 0; }))
        throw std::invalid_argument("topology: graph is disconnected");
    return topo;
}

/// Uniform random regular graph via the pairing model: shuffle node stubs,
/// pair them up, and retry whole attempts until the multigraph comes out
/// simple and connected. Deterministic for a fixed seed.
inline PhysicalTopology generate_regular_topology(int n, int degree, uint64_t seed,
                                                  int wavelengths_per_fiber = 16,
                                                  int max_attempts = 50000) {
    if (degree < 2) throw std::invalid_argument("generate_regular_topology: degree must be >= 2");
    if (degree >= n) throw std::invalid_argument("generate_regular_topology: degree must be < n");
    if ((static_cast<long long>(n) * degree) % 2 != 0)
        throw std::invalid_argument("generate_regular_topology: n*degree must be even");

    Rng rng(derive_seed(seed, stream::kTopology));
    std::vector<int> stubs;
    stubs.reserve(static_cast<size_t>(n) * degree);
    std::vector<char> seen(static_cast<size_t>(n) * n, 0);

    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        stubs.clear();
        for (int v = 0; v < n; ++v)
            for (int d = 0; d < degree; ++d) stubs.push_back(v);
        rng.shuffle(stubs);

        std::vector<std::pair<int, int>> links;
        links.reserve(stubs.size() / 2);
        bool simple = true;
        for (size_t t = 0; t + 1 < stubs.size(); t += 2) {
            int u = stubs[t], v = stubs[t + 1];
            if (u == v) { simple = false; break; }
            if (u > v) std::swap(u, v);
            char& flag = seen[static_cast<size_t>(u) * n + v];
            if (flag) { simple = false; break; }
            flag = 1;
            links.emplace_back(u, v);
        }
        for (const auto& [u, v] : links) seen[static_cast<size_t>(u) * n + v] = 0;
        if (!simple) continue;

        try {
            return make_topology(n, wavelengths_per_fiber, std::move(links));
        } catch (const std::invalid_argument&) {
            continue;  // disconnected; redraw
        }
    }
    throw std::runtime_error("generate_regular_topology: no connected instance after retries");
}

// Plain text edge list: "n m W" then one "u v" line per fiber.
inline void save_topology(const PhysicalTopology& topo, std::ostream& out) {
    out << topo.node_count << ' ' << topo.fiber_count() << ' '
        << topo.wavelengths_per_fiber << '\n';
    for (const auto& [u, v] : topo.links) out << u << ' ' << v << '\n';
}

inline PhysicalTopology load_topology(std::istream& in) {
    int n = 0, m = 0, w = 0;
    if (!(in >> n >> m >> w))
        throw std::invalid_argument("load_topology: malformed header, expected \"n m W\"");
    std::vector<std::pair<int, int>> links;
    links.reserve(m);
    for (int i = 0; i < m; ++i) {
        int u = 0, v = 0;
        if (!(in >> u >> v))
            throw std::invalid_argument("load_topology: truncated edge list");
        links.emplace_back(u, v);
    }
    return make_topology(n, w, std::move(links));
}

}  // namespace vtlab
