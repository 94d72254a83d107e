#pragma once

#include <queue>

#include "vtlab/netstate.hpp"

namespace vtlab {

struct HldaConfig {
    int max_lightpaths = 0;     // tHLDA cap; <= 0 means resource-bound only
    bool fill_leftover = true;  // hand leftover transceivers to random pairs
};

/// Greedy demand-descending construction. Repeatedly visit the largest
/// residual demand (ties toward the smaller pair index); establish a
/// lightpath for it when the cap and resources allow (a hot pair may
/// collect parallel lightpaths); subtract one lightpath capacity from the
/// residual, clamping at zero, and continue until every residual is spent
/// or the cap is hit. Optionally fills remaining capacity with uniformly
/// random feasible pairs. Pure function of (traffic, topo, budgets, seed).
inline VirtualTopology hlda_build(const TrafficMatrix& traffic, const PhysicalTopology& topo,
                                  int tx_per_node, int rx_per_node, const HldaConfig& config,
                                  uint64_t seed) {
    NetworkState scratch(topo, tx_per_node, rx_per_node);
    const int n = topo.node_count;
    const int resource_cap = n * tx_per_node;
    const int cap = config.max_lightpaths > 0 ? std::min(config.max_lightpaths, resource_cap)
                                              : resource_cap;

    struct Entry {
        double residual;
        int pair;
        bool operator<(const Entry& other) const {
            if (residual != other.residual) return residual < other.residual;
            return pair > other.pair;
        }
    };
    std::priority_queue<Entry> heap;
    for (int p = 0; p < pair_count(n); ++p) {
        const auto [i, j] = pair_nodes(p, n);
        if (traffic.at(i, j) > 0.0) heap.push({traffic.at(i, j), p});
    }

    while (!heap.empty() && scratch.total_lightpaths() < cap) {
        Entry top = heap.top();
        heap.pop();
        if (scratch.can_add(top.pair)) scratch.establish(top.pair);
        top.residual -= 1.0;
        if (top.residual > 0.0) heap.push(top);
    }

    if (config.fill_leftover && scratch.total_lightpaths() < cap) {
        Rng rng(derive_seed(seed, stream::kHlda));
        std::vector<int> pairs(pair_count(n));
        for (int p = 0; p < pair_count(n); ++p) pairs[p] = p;
        bool progress = true;
        while (progress && scratch.total_lightpaths() < cap) {
            progress = false;
            rng.shuffle(pairs);
            for (int p : pairs) {
                if (scratch.total_lightpaths() >= cap) break;
                if (scratch.establish(p)) progress = true;
            }
        }
    }
    return scratch.vt();
}

/// One HLDA round: rebuild the target topology from scratch for the current
/// traffic, then morph the live state into it, removals first. The final
/// multiset equals the target exactly, so establishments can never be
/// blocked mid-way.
inline RoundDelta hlda_round(NetworkState& state, const TrafficMatrix& traffic,
                             const HldaConfig& config, uint64_t seed) {
    const VirtualTopology target = hlda_build(traffic, state.topology(), state.pool().tx_per_node,
                                              state.pool().rx_per_node, config, seed);
    RoundDelta delta;
    const int pairs = pair_count(state.vt().n);
    for (int p = 0; p < pairs; ++p) {
        while (state.vt().counts[p] > target.counts[p]) {
            state.remove_one(p);
            ++delta.removed;
        }
    }
    for (int p = 0; p < pairs; ++p) {
        while (state.vt().counts[p] < target.counts[p]) {
            if (!state.establish(p))
                throw std::logic_error("hlda_round: feasible target rejected establishment");
            ++delta.established;
        }
    }
    return delta;
}

}  // namespace vtlab
