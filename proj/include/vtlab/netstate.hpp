#pragma once

#include <cassert>
#include <numeric>

#include "vtlab/graph.hpp"
#include "vtlab/traffic.hpp"

namespace vtlab {

// Hex encoding of a bit vector, 4 bits per character, bit 4k becoming the
// most significant bit of character k.
inline std::string bits_to_hex(const std::vector<uint8_t>& bits) {
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve((bits.size() + 3) / 4);
    for (size_t i = 0; i < bits.size(); i += 4) {
        int nibble = 0;
        for (size_t b = 0; b < 4 && i + b < bits.size(); ++b)
            if (bits[i + b]) nibble |= 8 >> b;
        out.push_back(digits[nibble]);
    }
    return out;
}

/// The object both controllers mutate: one slot per directed node pair,
/// indexed source-major. `counts` carries lightpath multiplicity (parallel
/// lightpaths share the pair's fixed physical route); the controller-facing
/// view is the bit vector counts > 0.
struct VirtualTopology {
    int n = 0;
    std::vector<uint16_t> counts;
    int total = 0;

    static VirtualTopology empty(int n) {
        VirtualTopology vt;
        vt.n = n;
        vt.counts.assign(pair_count(n), 0);
        return vt;
    }

    bool bit(int pair) const { return counts[pair] > 0; }

    std::vector<uint8_t> bits() const {
        std::vector<uint8_t> b(counts.size());
        for (size_t i = 0; i < counts.size(); ++i) b[i] = counts[i] > 0 ? 1 : 0;
        return b;
    }

    std::string bits_hex() const { return bits_to_hex(bits()); }
};

struct ResourcePool {
    int tx_per_node = 16;
    int rx_per_node = 16;
    std::vector<int> tx_used;            // per node
    std::vector<int> rx_used;            // per node
    std::vector<int> wavelengths_used;   // per directed fiber id
};

struct UtilizationReport {
    std::vector<double> per_lightpath_load;  // one entry per lightpath instance
    double u_max = 0.0;
    double unroutable_fraction = 0.0;
    double mean_utilization = 0.0;
    double total_demand = 0.0;
};

struct RoundDelta {
    int established = 0;
    int removed = 0;
    int total_changes() const { return established + removed; }
};

inline RoundDelta diff(const std::vector<uint8_t>& before, const std::vector<uint8_t>& after) {
    if (before.size() != after.size())
        throw std::invalid_argument("diff: bit vectors differ in length");
    RoundDelta d;
    for (size_t i = 0; i < before.size(); ++i) {
        if (!before[i] && after[i]) ++d.established;
        else if (before[i] && !after[i]) ++d.removed;
    }
    return d;
}

/// Routes every demand over the current lightpath graph on its minimum-hop
/// path (lexicographic tie-break), accumulating carried traffic per
/// lightpath instance. A demand crossing a pair with parallel lightpaths is
/// assigned whole to the least-loaded instance; demands are never split.
/// Demand with no virtual route counts into unroutable_fraction and pins
/// u_max to at least 1.0.
inline UtilizationReport route_traffic(const VirtualTopology& vt, const TrafficMatrix& traffic) {
    const int n = vt.n;
    if (traffic.n != n)
        throw std::invalid_argument("route_traffic: traffic size does not match topology");

    AdjList out_adj(n), in_adj(n);
    for (int p = 0; p < pair_count(n); ++p) {
        if (vt.counts[p] == 0) continue;
        const auto [u, v] = pair_nodes(p, n);
        out_adj[u].push_back(v);
        in_adj[v].push_back(u);
    }
    // pair_nodes visits destinations in ascending order per source, so
    // out_adj is already sorted; in_adj likewise per destination.

    std::vector<std::vector<double>> loads(pair_count(n));
    for (int p = 0; p < pair_count(n); ++p)
        if (vt.counts[p] > 0) loads[p].assign(vt.counts[p], 0.0);

    double unroutable = 0.0, total = 0.0;
    for (int dst = 0; dst < n; ++dst) {
        const std::vector<int> dist = bfs_distances(in_adj, dst);
        for (int src = 0; src < n; ++src) {
            if (src == dst) continue;
            const double demand = traffic.at(src, dst);
            if (demand <= 0.0) continue;
            total += demand;
            if (dist[src] < 0) {
                unroutable += demand;
                continue;
            }
            int u = src;
            while (u != dst) {
                int next = -1;
                for (int v : out_adj[u]) {
                    if (dist[v] == dist[u] - 1) { next = v; break; }
                }
                auto& inst = loads[pair_index(u, next, n)];
                inst[std::min_element(inst.begin(), inst.end()) - inst.begin()] += demand;
                u = next;
            }
        }
    }

    UtilizationReport report;
    report.total_demand = total;
    double sum = 0.0;
    for (const auto& inst : loads) {
        for (double load : inst) {
            report.per_lightpath_load.push_back(load);
            report.u_max = std::max(report.u_max, load);
            sum += load;
        }
    }
    report.mean_utilization =
        report.per_lightpath_load.empty() ? 0.0 : sum / report.per_lightpath_load.size();
    report.unroutable_fraction = total > 0.0 ? unroutable / total : 0.0;
    if (unroutable > 0.0) report.u_max = std::max(report.u_max, 1.0);
    return report;
}

/// Owns the live virtual topology plus transceiver and wavelength
/// accounting. Physical routes are fixed per pair (shortest path at
/// construction; the fiber plant never changes), so establishment checks
/// and releases walk a precomputed fiber list. One instance per run,
/// single-threaded.
class NetworkState {
public:
    NetworkState(const PhysicalTopology& topo, int tx_per_node, int rx_per_node)
        : topo_(&topo), n_(topo.node_count), vt_(VirtualTopology::empty(n_)) {
        if (tx_per_node <= 0 || rx_per_node <= 0)
            throw std::invalid_argument("NetworkState: transceiver budgets must be positive");
        pool_.tx_per_node = tx_per_node;
        pool_.rx_per_node = rx_per_node;
        pool_.tx_used.assign(n_, 0);
        pool_.rx_used.assign(n_, 0);
        pool_.wavelengths_used.assign(2 * topo.fiber_count(), 0);

        route_nodes_.resize(pair_count(n_));
        route_fibers_.resize(pair_count(n_));
        for (int dst = 0; dst < n_; ++dst) {
            const std::vector<int> dist = bfs_distances(topo.adjacency, dst);
            for (int src = 0; src < n_; ++src) {
                if (src == dst) continue;
                if (dist[src] < 0)
                    throw std::invalid_argument("NetworkState: physical topology is disconnected");
                const int p = pair_index(src, dst, n_);
                auto& nodes = route_nodes_[p];
                auto& fibers = route_fibers_[p];
                nodes.reserve(dist[src] + 1);
                fibers.reserve(dist[src]);
                int u = src;
                nodes.push_back(u);
                while (u != dst) {
                    int next = -1;
                    for (int v : topo.adjacency[u]) {
                        if (dist[v] == dist[u] - 1) { next = v; break; }
                    }
                    fibers.push_back(topo.directed_fiber_id(u, next));
                    nodes.push_back(next);
                    u = next;
                }
            }
        }
    }

    const PhysicalTopology& topology() const { return *topo_; }
    const VirtualTopology& vt() const { return vt_; }
    const ResourcePool& pool() const { return pool_; }
    int total_lightpaths() const { return vt_.total; }
    const std::vector<int>& route(int pair) const { return route_nodes_[pair]; }

    // Resource feasibility for one more lightpath on this pair, regardless
    // of how many it already has.
    bool can_add(int pair) const {
        const auto [src, dst] = pair_nodes(pair, n_);
        if (pool_.tx_used[src] >= pool_.tx_per_node) return false;
        if (pool_.rx_used[dst] >= pool_.rx_per_node) return false;
        for (int f : route_fibers_[pair])
            if (pool_.wavelengths_used[f] >= topo_->wavelengths_per_fiber) return false;
        return true;
    }

    // The controller-facing check: pair currently dark and resources free.
    bool can_establish(int pair) const { return vt_.counts[pair] == 0 && can_add(pair); }

    bool establish(int pair) {
        if (!can_add(pair)) return false;
        const auto [src, dst] = pair_nodes(pair, n_);
        ++pool_.tx_used[src];
        ++pool_.rx_used[dst];
        for (int f : route_fibers_[pair]) ++pool_.wavelengths_used[f];
        ++vt_.counts[pair];
        ++vt_.total;
        return true;
    }

    bool remove_one(int pair) {
        if (vt_.counts[pair] == 0) return false;
        const auto [src, dst] = pair_nodes(pair, n_);
        if (pool_.tx_used[src] <= 0 || pool_.rx_used[dst] <= 0)
            throw std::logic_error("NetworkState: transceiver counter underflow");
        --pool_.tx_used[src];
        --pool_.rx_used[dst];
        for (int f : route_fibers_[pair]) {
            if (pool_.wavelengths_used[f] <= 0)
                throw std::logic_error("NetworkState: wavelength counter underflow");
            --pool_.wavelengths_used[f];
        }
        --vt_.counts[pair];
        --vt_.total;
        return true;
    }

    /// want=true establishes the pair when dark and feasible; want=false
    /// drops one instance when lit. Anything else is a no-op. Returns
    /// whether the state changed.
    bool apply_decision(int pair, bool want) {
        if (want) {
            if (vt_.counts[pair] != 0) return false;
            return establish(pair);
        }
        return remove_one(pair);
    }

    UtilizationReport measure(const TrafficMatrix& traffic) const {
        return route_traffic(vt_, traffic);
    }

    /// Full recount of every counter from the lightpath multiset. Any
    /// mismatch means a bookkeeping bug; tests call this after each round.
    bool audit() const {
        std::vector<int> tx(n_, 0), rx(n_, 0), wl(pool_.wavelengths_used.size(), 0);
        long long total = 0;
        for (int p = 0; p < pair_count(n_); ++p) {
            const int c = vt_.counts[p];
            if (c == 0) continue;
            const auto [src, dst] = pair_nodes(p, n_);
            tx[src] += c;
            rx[dst] += c;
            for (int f : route_fibers_[p]) wl[f] += c;
            total += c;
        }
        if (total != vt_.total) return false;
        if (total > static_cast<long long>(n_) * pool_.tx_per_node) return false;
        for (int v = 0; v < n_; ++v) {
            if (tx[v] != pool_.tx_used[v] || tx[v] > pool_.tx_per_node) return false;
            if (rx[v] != pool_.rx_used[v] || rx[v] > pool_.rx_per_node) return false;
        }
        for (size_t f = 0; f < wl.size(); ++f) {
            if (wl[f] != pool_.wavelengths_used[f]) return false;
            if (wl[f] > topo_->wavelengths_per_fiber) return false;
        }
        return true;
    }

    // Text snapshot: bit vector in hex, then one line per lit pair with its
    // multiplicity and physical route.
    void write_snapshot(std::ostream& out) const {
        out << vt_.bits_hex() << '\n';
        for (int p = 0; p < pair_count(n_); ++p) {
            if (vt_.counts[p] == 0) continue;
            const auto [src, dst] = pair_nodes(p, n_);
            out << src << "->" << dst << " x" << vt_.counts[p] << " via";
            for (int v : route_nodes_[p]) out << ' ' << v;
            out << '\n';
        }
    }

private:
    const PhysicalTopology* topo_;
    int n_;
    ResourcePool pool_;
    VirtualTopology vt_;
    std::vector<std::vector<int>> route_nodes_;
    std::vector<std::vector<int>> route_fibers_;
};

}  // namespace vtlab
