#pragma once

#include <string>
#include <vector>

#include "ket/domain_graph.hpp"

namespace ket {

// Entity definitions without frequencies (freq is computed from the corpus).
// Invariant: no two entries share an alias after case-folding.
class Gazetteer {
public:
    Gazetteer() = default;
    explicit Gazetteer(std::vector<Entity> entries);

    static Gazetteer load(const std::string& path);
    std::string content_hash() const { return content_hash_; }

    const std::vector<Entity>& entries() const { return entries_; }
    bool empty() const { return entries_.empty(); }

    // Aliases case-folded, sorted longest-first (ties: lexicographic), each
    // paired with its entity id. Drives longest-match-first extraction.
    const std::vector<std::pair<std::string, EntityId>>& folded_aliases() const {
        return folded_aliases_;
    }

private:
    void build_index();

    std::vector<Entity> entries_;  // sorted by id
    std::vector<std::pair<std::string, EntityId>> folded_aliases_;
    std::string content_hash_;
};

}  // namespace ket
