#include "ket/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <regex>
#include <set>

namespace ket {

namespace {

bool is_word_char(unsigned char c) { return std::isalnum(c) != 0; }

std::string fold_case(const std::string& s) {
    std::string out = s;
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
        return static_cast<char>(std::tolower(c));
    });
    return out;
}

}  // namespace

std::vector<std::string> segment_corpus(const std::string& raw_text,
                                        const std::string& marker_pattern) {
    if (raw_text.empty()) throw InputEmpty("corpus text is empty");

    std::regex marker;
    try {
        marker = std::regex(marker_pattern);
    } catch (const std::regex_error& e) {
        throw FormatError("bad marker pattern: " + std::string(e.what()));
    }

    // Byte offsets of lines whose content matches the marker.
    std::vector<std::size_t> starts;
    std::size_t pos = 0;
    while (pos <= raw_text.size()) {
        std::size_t eol = raw_text.find('\n', pos);
        std::size_t len =
            (eol == std::string::npos ? raw_text.size() : eol) - pos;
        std::string line = raw_text.substr(pos, len);
        if (std::regex_search(line, marker)) starts.push_back(pos);
        if (eol == std::string::npos) break;
        pos = eol + 1;
    }
    if (starts.empty()) {
        throw NoSegments("no lines match marker pattern '" + marker_pattern +
                         "'");
    }

    // Preamble before the first marker is folded into the first segment so
    // concatenation reconstructs the input byte for byte.
    std::vector<std::string> chapters;
    chapters.reserve(starts.size());
    for (std::size_t i = 0; i < starts.size(); ++i) {
        std::size_t begin = (i == 0) ? 0 : starts[i];
        std::size_t end =
            (i + 1 < starts.size()) ? starts[i + 1] : raw_text.size();
        chapters.push_back(raw_text.substr(begin, end - begin));
    }
    return chapters;
}

std::vector<Mention> extract_entities(const std::string& text,
                                      const Gazetteer& gazetteer) {
    const std::string folded = fold_case(text);
    std::vector<bool> claimed(folded.size(), false);
    std::vector<Mention> mentions;

    // Aliases come sorted longest-first, so longer matches claim their spans
    // before shorter ones can overlap them.
    for (const auto& [alias, id] : gazetteer.folded_aliases()) {
        if (alias.empty()) continue;
        std::size_t from = 0;
        while ((from = folded.find(alias, from)) != std::string::npos) {
            std::size_t end = from + alias.size();
            bool boundary_ok =
                (from == 0 || !is_word_char(folded[from - 1])) &&
                (end == folded.size() || !is_word_char(folded[end]));
            bool overlap = false;
            if (boundary_ok) {
                for (std::size_t i = from; i < end && !overlap; ++i) {
                    overlap = claimed[i];
                }
            }
            if (boundary_ok && !overlap) {
                for (std::size_t i = from; i < end; ++i) claimed[i] = true;
                mentions.push_back({id, from, end});
                from = end;
            } else {
                ++from;
            }
        }
    }
    std::sort(mentions.begin(), mentions.end(),
              [](const Mention& a, const Mention& b) {
                  return a.begin < b.begin;
              });
    return mentions;
}

DomainGraph build_graph(const std::vector<std::string>& chapters,
                        const Gazetteer& gazetteer, Provenance provenance) {
    if (chapters.empty()) throw InputEmpty("no chapters to process");

    std::map<EntityId, std::uint64_t> freq;
    std::map<std::pair<EntityId, EntityId>, double> weights;

    for (const auto& chapter : chapters) {
        std::set<EntityId> present;
        for (const auto& m : extract_entities(chapter, gazetteer)) {
            ++freq[m.entity];
            present.insert(m.entity);
        }
        // Chapter co-occurrence is binary: each co-mentioned pair counts
        // once per chapter.
        for (auto it = present.begin(); it != present.end(); ++it) {
            auto jt = it;
            for (++jt; jt != present.end(); ++jt) {
                weights[{*it, *jt}] += 1.0;
            }
        }
    }

    std::vector<Entity> entities;
    for (const auto& ent : gazetteer.entries()) {
        Entity copy = ent;
        auto it = freq.find(ent.id);
        copy.freq = (it == freq.end()) ? 0 : it->second;
        entities.push_back(std::move(copy));
    }
    std::vector<WeightedEdge> edges;
    edges.reserve(weights.size());
    for (const auto& [key, w] : weights) {
        edges.push_back({key.first, key.second, w});
    }
    return DomainGraph(std::move(entities), std::move(edges),
                       std::move(provenance));
}

}  // namespace ket
