#pragma once

#include <array>
#include <set>
#include <string>
#include <vector>

#include "ket/domain_graph.hpp"

namespace ket {

struct InducedSubgraph {
    const DomainGraph* parent = nullptr;
    std::vector<EntityId> nodes;       // sorted ascending
    std::vector<WeightedEdge> edges;   // parent edges internal to nodes
};

enum class MetricFlag {
    NoEdges,
    NoReachablePairs,
    EmptySubgraph,
    ConstantMetric,
};

std::string to_string(MetricFlag f);

struct EntanglementVector {
    std::string prompt_id;
    // m[0]..m[8] correspond to the nine metrics:
    //   m1 ECE, m2 EWS, m3 AEWS, m4 WNR, m5 ANDE, m6 SGD, m7 MSP, m8 RR, m9 DWIS
    std::array<double, 9> m{};
    std::set<MetricFlag> flags;
};

struct DwisConfig {
    std::vector<EntityId> reference_nodes;  // non-empty, subset of the graph
    double delta = 0.5;                     // decay per hop, in (0,1)
};

InducedSubgraph induce_subgraph(const DomainGraph& graph,
                                const std::vector<EntityId>& entities);

struct ConnectionMetrics {
    double ece = 0.0;   // m1: edge weight sum / |nodes|
    double ews = 0.0;   // m2: edge weight sum
    double aews = 0.0;  // m3: edge weight sum / |edges|
    bool no_edges = false;
};
ConnectionMetrics connection_metrics(const InducedSubgraph& sub);

struct NodeMetrics {
    double wnr = 0.0;   // m4: mean parent-graph frequency
    double ande = 0.0;  // m5: mean parent-graph degree
};
NodeMetrics node_metrics(const InducedSubgraph& sub);

struct TopologyMetrics {
    double sgd = 0.0;  // m6: 2|E| / (|N|(|N|-1))
    double msp = 0.0;  // m7: mean hop distance over ordered reachable pairs
    double rr = 0.0;   // m8: |E| / |N|
    bool no_reachable_pairs = false;
};
TopologyMetrics topology_metrics(const InducedSubgraph& sub);

// m9: sum of freq(n) * delta^hops(n, R), hop distances taken in the parent
// graph; unreachable nodes contribute 0.
double dwis(const InducedSubgraph& sub, const DwisConfig& cfg);

EntanglementVector entanglement_vector(const DomainGraph& graph,
                                       const std::string& prompt_id,
                                       const std::vector<EntityId>& prompt_entities,
                                       const DwisConfig& cfg);

struct NormalizedScores {
    std::vector<std::array<double, 9>> values;  // per input vector, in [0,100]
    std::array<bool, 9> constant_metric{};      // metric was constant, mapped to 0
};

// Per-metric min-max scaling to [0,100] over the supplied list.
NormalizedScores normalize_scores(const std::vector<EntanglementVector>& vectors);

}  // namespace ket
