#include "ket/gazetteer.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "ket/hash.hpp"

namespace ket {

namespace {

std::string fold_case(const std::string& s) {
    std::string out = s;
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
        return static_cast<char>(std::tolower(c));
    });
    return out;
}

}  // namespace

Gazetteer::Gazetteer(std::vector<Entity> entries)
    : entries_(std::move(entries)) {
    std::sort(entries_.begin(), entries_.end(),
              [](const Entity& a, const Entity& b) { return a.id < b.id; });
    build_index();
}

void Gazetteer::build_index() {
    std::unordered_map<std::string, EntityId> seen;
    for (const auto& ent : entries_) {
        if (ent.aliases.empty()) {
            throw FormatError("gazetteer entry " + std::to_string(ent.id) +
                              " has no aliases");
        }
        for (const auto& alias : ent.aliases) {
            std::string folded = fold_case(alias);
            auto [it, inserted] = seen.emplace(folded, ent.id);
            if (!inserted && it->second != ent.id) {
                throw FormatError("alias '" + alias +
                                  "' shared by entities " +
                                  std::to_string(it->second) + " and " +
                                  std::to_string(ent.id));
            }
            folded_aliases_.emplace_back(std::move(folded), ent.id);
        }
    }
    std::sort(folded_aliases_.begin(), folded_aliases_.end(),
              [](const auto& a, const auto& b) {
                  if (a.first.size() != b.first.size())
                      return a.first.size() > b.first.size();
                  return a < b;
              });
    folded_aliases_.erase(
        std::unique(folded_aliases_.begin(), folded_aliases_.end()),
        folded_aliases_.end());
}

Gazetteer Gazetteer::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot read gazetteer: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();

    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError("gazetteer " + path + ": " + e.what());
    }
    if (!doc.is_array()) {
        throw FormatError("gazetteer must be a JSON list of entities");
    }
    std::vector<Entity> entries;
    for (const auto& item : doc) {
        Entity ent;
        try {
            ent.id = item.at("id").get<EntityId>();
            ent.canonical_name = item.at("name").get<std::string>();
            ent.category =
                category_from_string(item.at("category").get<std::string>());
            if (item.contains("aliases")) {
                ent.aliases = item.at("aliases").get<std::vector<std::string>>();
            }
        } catch (const nlohmann::json::exception& e) {
            throw FormatError("gazetteer entry: " + std::string(e.what()));
        }
        if (std::find(ent.aliases.begin(), ent.aliases.end(),
                      ent.canonical_name) == ent.aliases.end()) {
            ent.aliases.insert(ent.aliases.begin(), ent.canonical_name);
        }
        entries.push_back(std::move(ent));
    }
    Gazetteer g(std::move(entries));
    g.content_hash_ = hash_hex(text);
    return g;
}

}  // namespace ket
