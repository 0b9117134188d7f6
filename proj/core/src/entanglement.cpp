#include "ket/entanglement.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <unordered_map>
#include <unordered_set>

namespace ket {

std::string to_string(MetricFlag f) {
    switch (f) {
        case MetricFlag::NoEdges: return "NO_EDGES";
        case MetricFlag::NoReachablePairs: return "NO_REACHABLE_PAIRS";
        case MetricFlag::EmptySubgraph: return "EMPTY_SUBGRAPH";
        case MetricFlag::ConstantMetric: return "CONSTANT_METRIC";
    }
    return "UNKNOWN";
}

InducedSubgraph induce_subgraph(const DomainGraph& graph,
                                const std::vector<EntityId>& entities) {
    InducedSubgraph sub;
    sub.parent = &graph;
    sub.nodes = entities;
    std::sort(sub.nodes.begin(), sub.nodes.end());
    sub.nodes.erase(std::unique(sub.nodes.begin(), sub.nodes.end()),
                    sub.nodes.end());
    std::unordered_set<EntityId> members(sub.nodes.begin(), sub.nodes.end());
    for (EntityId id : sub.nodes) {
        graph.entity(id);  // throws UnknownEntity
    }
    for (const auto& e : graph.edges()) {
        if (members.count(e.u) && members.count(e.v)) {
            sub.edges.push_back(e);
        }
    }
    return sub;
}

ConnectionMetrics connection_metrics(const InducedSubgraph& sub) {
    ConnectionMetrics m;
    if (sub.edges.empty()) {
        m.no_edges = true;
        return m;
    }
    for (const auto& e : sub.edges) m.ews += e.weight;
    m.ece = sub.nodes.empty() ? 0.0 : m.ews / static_cast<double>(sub.nodes.size());
    m.aews = m.ews / static_cast<double>(sub.edges.size());
    return m;
}

NodeMetrics node_metrics(const InducedSubgraph& sub) {
    if (sub.nodes.empty()) {
        throw EmptySubgraph("node metrics need at least one node");
    }
    NodeMetrics m;
    for (EntityId id : sub.nodes) {
        m.wnr += static_cast<double>(sub.parent->freq(id));
        m.ande += static_cast<double>(sub.parent->degree(id));
    }
    m.wnr /= static_cast<double>(sub.nodes.size());
    m.ande /= static_cast<double>(sub.nodes.size());
    return m;
}

namespace {

// Unweighted BFS hop distances from `source`, restricted to the subgraph.
std::unordered_map<EntityId, int> bfs_within(
    const std::unordered_map<EntityId, std::vector<EntityId>>& adj,
    EntityId source) {
    std::unordered_map<EntityId, int> dist;
    dist[source] = 0;
    std::deque<EntityId> queue{source};
    while (!queue.empty()) {
        EntityId cur = queue.front();
        queue.pop_front();
        auto it = adj.find(cur);
        if (it == adj.end()) continue;
        for (EntityId next : it->second) {
            if (!dist.count(next)) {
                dist[next] = dist[cur] + 1;
                queue.push_back(next);
            }
        }
    }
    return dist;
}

}  // namespace

TopologyMetrics topology_metrics(const InducedSubgraph& sub) {
    TopologyMetrics m;
    const double n = static_cast<double>(sub.nodes.size());
    const double e = static_cast<double>(sub.edges.size());
    if (sub.nodes.size() >= 2) m.sgd = 2.0 * e / (n * (n - 1.0));
    if (!sub.nodes.empty()) m.rr = e / n;

    std::unordered_map<EntityId, std::vector<EntityId>> adj;
    for (const auto& edge : sub.edges) {
        adj[edge.u].push_back(edge.v);
        adj[edge.v].push_back(edge.u);
    }
    double total = 0.0;
    std::size_t pairs = 0;  // ordered reachable pairs
    for (EntityId u : sub.nodes) {
        auto dist = bfs_within(adj, u);
        for (EntityId v : sub.nodes) {
            if (u == v) continue;
            auto it = dist.find(v);
            if (it != dist.end()) {
                total += it->second;
                ++pairs;
            }
        }
    }
    if (pairs == 0) {
        m.no_reachable_pairs = true;
    } else {
        m.msp = total / static_cast<double>(pairs);
    }
    return m;
}

double dwis(const InducedSubgraph& sub, const DwisConfig& cfg) {
    if (cfg.reference_nodes.empty()) {
        throw EmptyReferenceSet("DWIS requires at least one reference node");
    }
    if (!(cfg.delta > 0.0 && cfg.delta < 1.0)) {
        throw ConfigError("DWIS delta must lie in (0,1)");
    }
    const DomainGraph& graph = *sub.parent;
    for (EntityId r : cfg.reference_nodes) graph.entity(r);

    // Multi-source BFS over the parent graph gives hops(n, R) directly.
    std::unordered_map<EntityId, int> hops;
    std::deque<EntityId> queue;
    for (EntityId r : cfg.reference_nodes) {
        if (hops.emplace(r, 0).second) queue.push_back(r);
    }
    while (!queue.empty()) {
        EntityId cur = queue.front();
        queue.pop_front();
        for (const auto& [next, w] : graph.neighbors(cur)) {
            (void)w;
            if (!hops.count(next)) {
                hops[next] = hops[cur] + 1;
                queue.push_back(next);
            }
        }
    }
    double total = 0.0;
    for (EntityId id : sub.nodes) {
        auto it = hops.find(id);
        if (it == hops.end()) continue;  // unreachable contributes 0
        total += static_cast<double>(graph.freq(id)) *
                 std::pow(cfg.delta, it->second);
    }
    return total;
}

EntanglementVector entanglement_vector(
    const DomainGraph& graph, const std::string& prompt_id,
    const std::vector<EntityId>& prompt_entities, const DwisConfig& cfg) {
    InducedSubgraph sub = induce_subgraph(graph, prompt_entities);
    if (sub.nodes.empty()) {
        throw EmptySubgraph("prompt '" + prompt_id + "' mentions no entities");
    }
    EntanglementVector v;
    v.prompt_id = prompt_id;
    auto conn = connection_metrics(sub);
    auto node = node_metrics(sub);
    auto topo = topology_metrics(sub);
    v.m = {conn.ece, conn.ews, conn.aews, node.wnr, node.ande,
           topo.sgd, topo.msp, topo.rr,  dwis(sub, cfg)};
    if (conn.no_edges) v.flags.insert(MetricFlag::NoEdges);
    if (topo.no_reachable_pairs) v.flags.insert(MetricFlag::NoReachablePairs);
    return v;
}

NormalizedScores normalize_scores(
    const std::vector<EntanglementVector>& vectors) {
    if (vectors.empty()) throw InputEmpty("no vectors to normalize");
    NormalizedScores out;
    out.values.resize(vectors.size());
    for (int k = 0; k < 9; ++k) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        for (const auto& v : vectors) {
            lo = std::min(lo, v.m[k]);
            hi = std::max(hi, v.m[k]);
        }
        if (hi == lo) {
            out.constant_metric[k] = true;
            for (auto& row : out.values) row[k] = 0.0;
        } else {
            for (std::size_t i = 0; i < vectors.size(); ++i) {
                out.values[i][k] = 100.0 * (vectors[i].m[k] - lo) / (hi - lo);
            }
        }
    }
    return out;
}

}  // namespace ket
