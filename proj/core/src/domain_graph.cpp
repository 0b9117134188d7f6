#include "ket/domain_graph.hpp"

#include <algorithm>
#include <set>

namespace ket {

std::string to_string(EntityCategory c) {
    switch (c) {
        case EntityCategory::Character: return "character";
        case EntityCategory::Location: return "location";
        case EntityCategory::Object: return "object";
        case EntityCategory::Event: return "event";
    }
    return "character";
}

EntityCategory category_from_string(const std::string& s) {
    if (s == "character") return EntityCategory::Character;
    if (s == "location") return EntityCategory::Location;
    if (s == "object") return EntityCategory::Object;
    if (s == "event") return EntityCategory::Event;
    throw FormatError("unknown entity category: " + s);
}

DomainGraph::DomainGraph(std::vector<Entity> entities,
                         std::vector<WeightedEdge> edges,
                         Provenance provenance)
    : entities_(std::move(entities)),
      edges_(std::move(edges)),
      provenance_(std::move(provenance)) {
    std::sort(entities_.begin(), entities_.end(),
              [](const Entity& a, const Entity& b) { return a.id < b.id; });
    for (auto& e : edges_) {
        if (e.u > e.v) std::swap(e.u, e.v);
    }
    std::sort(edges_.begin(), edges_.end(),
              [](const WeightedEdge& a, const WeightedEdge& b) {
                  return std::tie(a.u, a.v) < std::tie(b.u, b.v);
              });
    for (std::size_t i = 0; i < entities_.size(); ++i) {
        index_[entities_[i].id] = i;
    }
    validate();
    for (const auto& e : edges_) {
        adjacency_[e.u].emplace_back(e.v, e.weight);
        adjacency_[e.v].emplace_back(e.u, e.weight);
    }
    for (auto& [id, nbrs] : adjacency_) {
        std::sort(nbrs.begin(), nbrs.end());
    }
}

void DomainGraph::validate() const {
    if (index_.size() != entities_.size()) {
        throw FormatError("duplicate entity ids in graph");
    }
    for (const auto& ent : entities_) {
        bool has_canonical =
            std::find(ent.aliases.begin(), ent.aliases.end(),
                      ent.canonical_name) != ent.aliases.end();
        if (ent.aliases.empty() || !has_canonical) {
            throw FormatError("entity " + std::to_string(ent.id) +
                              " aliases must include its canonical name");
        }
    }
    std::set<std::pair<EntityId, EntityId>> seen;
    for (const auto& e : edges_) {
        if (e.u == e.v) {
            throw FormatError("self-loop on entity " + std::to_string(e.u));
        }
        if (e.weight <= 0.0) {
            throw FormatError("non-positive edge weight on (" +
                              std::to_string(e.u) + "," + std::to_string(e.v) +
                              ")");
        }
        if (!index_.count(e.u) || !index_.count(e.v)) {
            throw FormatError("edge (" + std::to_string(e.u) + "," +
                              std::to_string(e.v) +
                              ") references unknown entity id");
        }
        if (!seen.insert({e.u, e.v}).second) {
            throw FormatError("duplicate edge (" + std::to_string(e.u) + "," +
                              std::to_string(e.v) + ")");
        }
    }
}

const Entity& DomainGraph::entity(EntityId id) const {
    auto it = index_.find(id);
    if (it == index_.end()) {
        throw UnknownEntity("entity id " + std::to_string(id) +
                            " not in graph");
    }
    return entities_[it->second];
}

std::size_t DomainGraph::degree(EntityId id) const {
    entity(id);  // existence check
    auto it = adjacency_.find(id);
    return it == adjacency_.end() ? 0 : it->second.size();
}

const std::vector<std::pair<EntityId, double>>& DomainGraph::neighbors(
    EntityId id) const {
    static const std::vector<std::pair<EntityId, double>> kEmpty;
    entity(id);
    auto it = adjacency_.find(id);
    return it == adjacency_.end() ? kEmpty : it->second;
}

}  // namespace ket
