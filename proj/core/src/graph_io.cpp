#include "ket/graph_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace ket {

using ordered_json = nlohmann::ordered_json;

std::string graph_to_json(const DomainGraph& g) {
    ordered_json doc;
    doc["entities"] = ordered_json::array();
    for (const auto& ent : g.entities()) {
        ordered_json e;
        e["id"] = ent.id;
        e["name"] = ent.canonical_name;
        e["aliases"] = ent.aliases;
        e["category"] = to_string(ent.category);
        e["freq"] = ent.freq;
        doc["entities"].push_back(std::move(e));
    }
    doc["edges"] = ordered_json::array();
    for (const auto& edge : g.edges()) {
        ordered_json e;
        e["u"] = edge.u;
        e["v"] = edge.v;
        e["w"] = edge.weight;
        doc["edges"].push_back(std::move(e));
    }
    doc["provenance"] = {
        {"corpus_hash", g.provenance().corpus_hash},
        {"gazetteer_hash", g.provenance().gazetteer_hash},
        {"marker_pattern", g.provenance().marker_pattern},
    };
    return doc.dump(2) + "\n";
}

void save_graph(const DomainGraph& g, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot write graph file: " + path);
    out << graph_to_json(g);
}

DomainGraph graph_from_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        // e.byte is the offset of the parse failure
        throw FormatError("graph file: " + std::string(e.what()));
    }
    std::vector<Entity> entities;
    std::vector<WeightedEdge> edges;
    Provenance prov;
    try {
        for (const auto& e : doc.at("entities")) {
            Entity ent;
            ent.id = e.at("id").get<EntityId>();
            ent.canonical_name = e.at("name").get<std::string>();
            ent.aliases = e.at("aliases").get<std::vector<std::string>>();
            ent.category =
                category_from_string(e.at("category").get<std::string>());
            ent.freq = e.at("freq").get<std::uint64_t>();
            entities.push_back(std::move(ent));
        }
        for (const auto& e : doc.at("edges")) {
            edges.push_back({e.at("u").get<EntityId>(),
                             e.at("v").get<EntityId>(),
                             e.at("w").get<double>()});
        }
        if (doc.contains("provenance")) {
            const auto& p = doc["provenance"];
            prov.corpus_hash = p.value("corpus_hash", "");
            prov.gazetteer_hash = p.value("gazetteer_hash", "");
            prov.marker_pattern = p.value("marker_pattern", "");
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("graph file: " + std::string(e.what()));
    }
    // DomainGraph's constructor re-checks all structural invariants and
    // reports violations as FormatError.
    return DomainGraph(std::move(entities), std::move(edges), std::move(prov));
}

DomainGraph load_graph(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot read graph file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return graph_from_json(ss.str());
}

}  // namespace ket
