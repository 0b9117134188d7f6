#pragma once

#include <string>

#include "ket/domain_graph.hpp"

namespace ket {

// Canonical JSON: entities ascending by id, edges ascending by (u, v),
// fixed key order. Identical graphs serialize to identical bytes.
std::string graph_to_json(const DomainGraph& g);
void save_graph(const DomainGraph& g, const std::string& path);

// Throws FormatError with byte-offset diagnostics on malformed input or
// invariant violations (unknown edge endpoints, duplicate ids, ...).
DomainGraph graph_from_json(const std::string& text);
DomainGraph load_graph(const std::string& path);

}  // namespace ket
