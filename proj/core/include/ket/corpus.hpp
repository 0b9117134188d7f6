#pragma once

#include <string>
#include <vector>

#include "ket/domain_graph.hpp"
#include "ket/gazetteer.hpp"

namespace ket {

struct Mention {
    EntityId entity = 0;
    std::size_t begin = 0;  // byte offsets into the scanned text
    std::size_t end = 0;
};

// Split a corpus at lines matching marker_pattern (line-anchored ECMAScript
// regex). Each segment starts at a marker line; text before the first marker
// is folded into the first segment, so concatenating the segments
// reconstructs the input exactly.
std::vector<std::string> segment_corpus(const std::string& raw_text,
                                        const std::string& marker_pattern);

// Case-insensitive, longest-match-first, word-boundary anchored,
// non-overlapping gazetteer matching.
std::vector<Mention> extract_entities(const std::string& text,
                                      const Gazetteer& gazetteer);

// Edge weight = number of chapters mentioning both endpoints; freq = total
// mention count. Pure function of (chapters, gazetteer).
DomainGraph build_graph(const std::vector<std::string>& chapters,
                        const Gazetteer& gazetteer,
                        Provenance provenance = {});

}  // namespace ket
