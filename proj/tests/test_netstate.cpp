#include <catch2/catch_amalgamated.hpp>

#include "vtlab/netstate.hpp"

using namespace vtlab;

namespace {

PhysicalTopology four_cycle(int wavelengths) {
    return make_topology(4, wavelengths, {{0, 1}, {1, 2}, {2, 3}, {0, 3}});
}

// Independent feasibility check: recompute the lexicographic shortest route
// and recount every resource from the currently lit pairs.
bool oracle_can_add(const NetworkState& state, int pair) {
    const PhysicalTopology& topo = state.topology();
    const int n = topo.node_count;
    const auto [src, dst] = pair_nodes(pair, n);
    std::vector<int> tx(n, 0), rx(n, 0);
    std::vector<int> wl(2 * topo.fiber_count(), 0);
    for (int p = 0; p < pair_count(n); ++p) {
        const int c = state.vt().counts[p];
        if (c == 0) continue;
        const auto [s, d] = pair_nodes(p, n);
        tx[s] += c;
        rx[d] += c;
        const auto route = shortest_path(topo, s, d);
        for (size_t h = 0; h + 1 < route->size(); ++h)
            wl[topo.directed_fiber_id((*route)[h], (*route)[h + 1])] += c;
    }
    if (tx[src] >= state.pool().tx_per_node) return false;
    if (rx[dst] >= state.pool().rx_per_node) return false;
    const auto route = shortest_path(topo, src, dst);
    for (size_t h = 0; h + 1 < route->size(); ++h)
        if (wl[topo.directed_fiber_id((*route)[h], (*route)[h + 1])] >= topo.wavelengths_per_fiber)
            return false;
    return true;
}

// Brute-force per-demand routing: enumerate all minimum-hop paths over the
// lightpath graph, pick the lexicographic minimum, accumulate loads.
void enumerate_paths(const AdjList& adj, int u, int dst, int budget, std::vector<int>& cur,
                     std::vector<int>& best) {
    if (u == dst) {
        if (best.empty() || cur < best) best = cur;
        return;
    }
    if (budget == 0) return;
    for (int v : adj[u]) {
        cur.push_back(v);
        enumerate_paths(adj, v, dst, budget - 1, cur, best);
        cur.pop_back();
    }
}

}  // namespace

TEST_CASE("fresh state accepts any pair; exhausted budgets refuse") {
    const PhysicalTopology topo = four_cycle(16);
    NetworkState generous(topo, 16, 16);
    for (int p = 0; p < pair_count(4); ++p) REQUIRE(generous.can_establish(p));

    NetworkState tight(topo, 1, 16);
    REQUIRE(tight.establish(pair_index(0, 1, 4)));
    REQUIRE_FALSE(tight.can_establish(pair_index(0, 2, 4)));  // tx budget of node 0 spent
    REQUIRE(tight.can_establish(pair_index(1, 2, 4)));
}

TEST_CASE("wavelength gating follows the fixed lexicographic route") {
    const PhysicalTopology topo = four_cycle(1);
    NetworkState state(topo, 16, 16);
    REQUIRE(state.establish(pair_index(0, 1, 4)));
    // 3->1 routes 3-0-1 (lexicographic), whose fiber 0->1 is now full.
    REQUIRE_FALSE(state.can_establish(pair_index(3, 1, 4)));
    // 3->2 routes over the untouched fiber 3->2.
    REQUIRE(state.can_establish(pair_index(3, 2, 4)));
    for (int p = 0; p < pair_count(4); ++p)
        REQUIRE(state.can_establish(p) == (state.vt().counts[p] == 0 && oracle_can_add(state, p)));
}

TEST_CASE("feasibility matches the brute-force oracle through random churn") {
    const PhysicalTopology topo = four_cycle(2);
    NetworkState state(topo, 3, 3);
    Rng rng(77);
    for (int step = 0; step < 400; ++step) {
        const int pair = static_cast<int>(rng.next_below(pair_count(4)));
        if (rng.next_unit() < 0.5) {
            const bool oracle = oracle_can_add(state, pair);
            REQUIRE(state.can_add(pair) == oracle);
            REQUIRE(state.establish(pair) == oracle);
        } else {
            state.remove_one(pair);
        }
        REQUIRE(state.audit());
    }
}

TEST_CASE("establish then remove restores the exact initial state") {
    const PhysicalTopology topo = generate_regular_topology(12, 3, 4, 2);
    NetworkState state(topo, 4, 4);
    const ResourcePool initial = state.pool();
    Rng rng(5);
    std::vector<int> established;
    for (int p = 0; p < pair_count(12); ++p)
        if (rng.next_unit() < 0.4 && state.establish(p)) established.push_back(p);
    REQUIRE_FALSE(established.empty());
    rng.shuffle(established);
    for (int p : established) REQUIRE(state.remove_one(p));
    REQUIRE(state.total_lightpaths() == 0);
    REQUIRE(state.pool().tx_used == initial.tx_used);
    REQUIRE(state.pool().rx_used == initial.rx_used);
    REQUIRE(state.pool().wavelengths_used == initial.wavelengths_used);
    REQUIRE(state.audit());
}

TEST_CASE("apply_decision is idempotent on no-ops and reports changes") {
    const PhysicalTopology topo = four_cycle(16);
    NetworkState state(topo, 1, 1);
    const int p01 = pair_index(0, 1, 4);
    REQUIRE(state.apply_decision(p01, true));
    REQUIRE_FALSE(state.apply_decision(p01, true));   // already lit
    // Wanting a blocked pair skips without touching anything.
    const int p02 = pair_index(0, 2, 4);
    REQUIRE_FALSE(state.apply_decision(p02, true));
    REQUIRE(state.vt().counts[p02] == 0);
    REQUIRE(state.apply_decision(p01, false));
    REQUIRE_FALSE(state.apply_decision(p01, false));  // already dark
    REQUIRE(state.total_lightpaths() == 0);
}

TEST_CASE("a full 9900-pair sweep lands just under the 1600 transceiver ceiling") {
    // The ascending source-major sweep is a greedy bipartite fill: the last
    // sources find free receivers only on themselves, stranding 30 slots.
    // The count is a pure function of (n=100, budgets=16, sweep order), so
    // it is identical for every topology and wavelength budget.
    const PhysicalTopology topo = generate_regular_topology(100, 4, 1, 99);
    NetworkState state(topo, 16, 16);
    int established = 0;
    for (int p = 0; p < pair_count(100); ++p)
        if (state.apply_decision(p, true)) ++established;
    REQUIRE(established == 1570);
    REQUIRE(state.total_lightpaths() == established);
    REQUIRE(state.total_lightpaths() <= 1600);
    REQUIRE(state.total_lightpaths() >= 1560);
    REQUIRE(state.audit());
}

TEST_CASE("route_traffic on a full mesh is one-hop") {
    const int n = 5;
    const PhysicalTopology topo = generate_regular_topology(n, 4, 2, 16);
    NetworkState state(topo, n - 1, n - 1);
    for (int p = 0; p < pair_count(n); ++p) REQUIRE(state.establish(p));
    TrafficMatrix traffic = TrafficMatrix::zeros(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j) traffic.at(i, j) = 0.25;
    const UtilizationReport rep = state.measure(traffic);
    REQUIRE(rep.u_max == Catch::Approx(0.25));
    REQUIRE(rep.unroutable_fraction == 0.0);
    for (double load : rep.per_lightpath_load) REQUIRE(load == Catch::Approx(0.25));
}

TEST_CASE("a single lightpath carries exactly its demand") {
    VirtualTopology vt = VirtualTopology::empty(4);
    vt.counts[pair_index(0, 1, 4)] = 1;
    vt.total = 1;
    TrafficMatrix traffic = TrafficMatrix::zeros(4);
    traffic.at(0, 1) = 0.4;
    const UtilizationReport rep = route_traffic(vt, traffic);
    REQUIRE(rep.u_max == Catch::Approx(0.4));
    REQUIRE(rep.unroutable_fraction == 0.0);
}

TEST_CASE("unroutable demand pins u_max to at least one") {
    VirtualTopology vt = VirtualTopology::empty(4);
    TrafficMatrix traffic = TrafficMatrix::zeros(4);
    traffic.at(0, 1) = 0.1;
    const UtilizationReport rep = route_traffic(vt, traffic);
    REQUIRE(rep.u_max == 1.0);
    REQUIRE(rep.unroutable_fraction == 1.0);

    vt.counts[pair_index(0, 1, 4)] = 1;
    vt.total = 1;
    traffic.at(2, 3) = 0.3;
    const UtilizationReport partial = route_traffic(vt, traffic);
    REQUIRE(partial.unroutable_fraction == Catch::Approx(0.75));
    REQUIRE(partial.u_max == 1.0);  // forced despite the 0.1 carried load
}

TEST_CASE("parallel lightpaths take whole demands, least-loaded first") {
    VirtualTopology vt = VirtualTopology::empty(3);
    vt.counts[pair_index(0, 1, 3)] = 2;
    vt.counts[pair_index(2, 0, 3)] = 1;
    vt.total = 3;
    TrafficMatrix traffic = TrafficMatrix::zeros(3);
    traffic.at(0, 1) = 0.5;
    traffic.at(2, 1) = 0.4;  // routes 2 -> 0 -> 1
    const UtilizationReport rep = route_traffic(vt, traffic);
    std::vector<double> loads = rep.per_lightpath_load;
    std::sort(loads.begin(), loads.end());
    REQUIRE(loads == std::vector<double>{0.4, 0.4, 0.5});
    REQUIRE(rep.u_max == Catch::Approx(0.5));
}

TEST_CASE("virtual routing matches the exhaustive oracle on random instances") {
    const int n = 8;
    Rng rng(31);
    for (int instance = 0; instance < 20; ++instance) {
        VirtualTopology vt = VirtualTopology::empty(n);
        for (int p = 0; p < pair_count(n); ++p)
            if (rng.next_unit() < 0.25) {
                vt.counts[p] = 1;
                ++vt.total;
            }
        TrafficMatrix traffic = TrafficMatrix::zeros(n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (i != j && rng.next_unit() < 0.5) traffic.at(i, j) = rng.next_unit();

        AdjList adj(n);
        for (int p = 0; p < pair_count(n); ++p)
            if (vt.counts[p]) {
                const auto [u, v] = pair_nodes(p, n);
                adj[u].push_back(v);
            }
        std::vector<double> loads(pair_count(n), 0.0);
        double unroutable = 0.0, total = 0.0;
        for (int i = 0; i < n; ++i) {
            const AdjList& out = adj;
            for (int j = 0; j < n; ++j) {
                if (i == j || traffic.at(i, j) <= 0.0) continue;
                total += traffic.at(i, j);
                AdjList reversed(n);
                for (int u = 0; u < n; ++u)
                    for (int v : out[u]) reversed[v].push_back(u);
                const std::vector<int> dist = bfs_distances(reversed, j);
                if (dist[i] < 0) {
                    unroutable += traffic.at(i, j);
                    continue;
                }
                std::vector<int> cur{i}, best;
                enumerate_paths(out, i, j, dist[i], cur, best);
                for (size_t h = 0; h + 1 < best.size(); ++h)
                    loads[pair_index(best[h], best[h + 1], n)] += traffic.at(i, j);
            }
        }
        const UtilizationReport rep = route_traffic(vt, traffic);
        size_t cursor = 0;
        double expected_max = 0.0;
        for (int p = 0; p < pair_count(n); ++p) {
            if (!vt.counts[p]) continue;
            REQUIRE(rep.per_lightpath_load[cursor++] == Catch::Approx(loads[p]).margin(1e-12));
            expected_max = std::max(expected_max, loads[p]);
        }
        if (unroutable > 0.0) expected_max = std::max(expected_max, 1.0);
        REQUIRE(rep.u_max == Catch::Approx(expected_max).margin(1e-12));
        REQUIRE(rep.unroutable_fraction == Catch::Approx(unroutable / total).margin(1e-12));
    }
}

TEST_CASE("u_max is monotone in any single demand entry") {
    const int n = 8;
    Rng rng(53);
    VirtualTopology vt = VirtualTopology::empty(n);
    for (int p = 0; p < pair_count(n); ++p)
        if (rng.next_unit() < 0.3) {
            vt.counts[p] = 1;
            ++vt.total;
        }
    TrafficMatrix traffic = TrafficMatrix::zeros(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j) traffic.at(i, j) = rng.next_unit() * 0.2;
    const double base = route_traffic(vt, traffic).u_max;
    for (int trial = 0; trial < 30; ++trial) {
        TrafficMatrix bumped = traffic;
        const auto [i, j] = pair_nodes(static_cast<int>(rng.next_below(pair_count(n))), n);
        bumped.at(i, j) += rng.next_unit();
        REQUIRE(route_traffic(vt, bumped).u_max >= base - 1e-12);
    }
}

TEST_CASE("diff counts bit flips in both directions") {
    REQUIRE(diff({0, 1, 1}, {0, 1, 1}).total_changes() == 0);
    const RoundDelta up = diff({0, 0, 0}, {1, 1, 1});
    REQUIRE(up.established == 3);
    REQUIRE(up.removed == 0);
    REQUIRE_THROWS_AS(diff({0, 1}, {0, 1, 1}), std::invalid_argument);

    Rng rng(97);
    std::vector<uint8_t> before(9900), after(9900);
    for (auto& b : before) b = rng.next_unit() < 0.5;
    for (auto& b : after) b = rng.next_unit() < 0.5;
    const RoundDelta d = diff(before, after);
    int est = 0, rem = 0, hamming = 0;
    for (size_t i = 0; i < before.size(); ++i) {
        est += !before[i] && after[i];
        rem += before[i] && !after[i];
        hamming += before[i] != after[i];
    }
    REQUIRE(d.established == est);
    REQUIRE(d.removed == rem);
    REQUIRE(d.total_changes() == hamming);
}

TEST_CASE("snapshots carry the hex bit vector and the stored routes") {
    const PhysicalTopology topo = four_cycle(16);
    NetworkState state(topo, 4, 4);
    REQUIRE(state.establish(pair_index(0, 2, 4)));
    std::ostringstream text;
    state.write_snapshot(text);
    const std::string out = text.str();
    REQUIRE(out.find(state.vt().bits_hex()) == 0);
    REQUIRE(out.find("0->2 x1 via 0 1 2") != std::string::npos);
    // hex layout: bit 1 of 12 set -> first nibble 0100 = 4, then zeros
    REQUIRE(state.vt().bits_hex() == "400");
}
