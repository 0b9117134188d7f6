#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "ket/errors.hpp"

namespace ket {

using EntityId = std::int64_t;

enum class EntityCategory { Character, Location, Object, Event };

std::string to_string(EntityCategory c);
EntityCategory category_from_string(const std::string& s);

struct Entity {
    EntityId id = 0;
    std::string canonical_name;
    std::vector<std::string> aliases;  // always contains canonical_name
    EntityCategory category = EntityCategory::Character;
    std::uint64_t freq = 0;  // total mention count across the corpus
};

// Undirected, simple; stored with u < v.
struct WeightedEdge {
    EntityId u = 0;
    EntityId v = 0;
    double weight = 0.0;
};

struct Provenance {
    std::string corpus_hash;
    std::string gazetteer_hash;
    std::string marker_pattern;
};

// Weighted entity co-occurrence graph. Immutable once built; safe to share
// across threads.
class DomainGraph {
public:
    DomainGraph() = default;
    DomainGraph(std::vector<Entity> entities, std::vector<WeightedEdge> edges,
                Provenance provenance);

    const std::vector<Entity>& entities() const { return entities_; }
    const std::vector<WeightedEdge>& edges() const { return edges_; }
    const Provenance& provenance() const { return provenance_; }

    bool has_entity(EntityId id) const { return index_.count(id) != 0; }
    const Entity& entity(EntityId id) const;

    std::size_t degree(EntityId id) const;
    std::uint64_t freq(EntityId id) const { return entity(id).freq; }

    // Neighbors with edge weights, sorted by neighbor id.
    const std::vector<std::pair<EntityId, double>>& neighbors(EntityId id) const;

private:
    void validate() const;

    std::vector<Entity> entities_;       // sorted by id
    std::vector<WeightedEdge> edges_;    // sorted by (u, v), u < v
    Provenance provenance_;
    std::unordered_map<EntityId, std::size_t> index_;
    std::unordered_map<EntityId, std::vector<std::pair<EntityId, double>>> adjacency_;
};

}  // namespace ket
