#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "ket/corpus.hpp"
#include "ket/graph_io.hpp"

using namespace ket;

namespace {

Gazetteer fixture_gazetteer() {
    return Gazetteer::load(std::string(KET_FIXTURES_DIR) + "/gazetteer.json");
}

Gazetteer tiny_gazetteer() {
    std::vector<Entity> entries;
    entries.push_back({1, "Harry Potter", {"Harry Potter", "Harry"},
                       EntityCategory::Character, 0});
    entries.push_back({2, "Ron Weasley", {"Ron Weasley", "Ron"},
                       EntityCategory::Character, 0});
    entries.push_back({3, "Hogwarts", {"Hogwarts"},
                       EntityCategory::Location, 0});
    return Gazetteer(std::move(entries));
}

}  // namespace

TEST_CASE("segment_corpus splits at marker lines") {
    std::string text =
        "CHAPTER 1\nalpha beta\nCHAPTER 2\ngamma\n";
    auto chapters = segment_corpus(text, "^CHAPTER");
    REQUIRE(chapters.size() == 2);
    std::string joined;
    for (const auto& c : chapters) joined += c;
    CHECK(joined == text);
}

TEST_CASE("segment_corpus folds preamble into the first segment") {
    std::string text = "preface\nCHAPTER 1\na\nCHAPTER 2\nb\n";
    auto chapters = segment_corpus(text, "^CHAPTER");
    REQUIRE(chapters.size() == 2);
    CHECK(chapters[0].rfind("preface", 0) == 0);
    CHECK(chapters[0] + chapters[1] == text);
}

TEST_CASE("segment_corpus error paths") {
    CHECK_THROWS_AS(segment_corpus("", "^CHAPTER"), InputEmpty);
    CHECK_THROWS_AS(segment_corpus("no markers here\n", "^CHAPTER"),
                    NoSegments);
}

TEST_CASE("segment_corpus counts markers on a generated corpus") {
    // Independent oracle: we generate the corpus, so we know N.
    const int n = 37;
    std::ostringstream text;
    std::mt19937 rng(7);
    for (int i = 0; i < n; ++i) {
        text << "CHAPTER " << (i + 1) << "\n";
        int lines = 1 + static_cast<int>(rng() % 4);
        for (int l = 0; l < lines; ++l) text << "filler line " << l << "\n";
    }
    auto chapters = segment_corpus(text.str(), "^CHAPTER");
    CHECK(chapters.size() == static_cast<std::size_t>(n));
}

TEST_CASE("extract_entities resolves aliases case-insensitively") {
    auto gaz = tiny_gazetteer();
    auto mentions = extract_entities("harry met RON", gaz);
    REQUIRE(mentions.size() == 2);
    CHECK(mentions[0].entity == 1);
    CHECK(mentions[1].entity == 2);
}

TEST_CASE("extract_entities prefers the longest match") {
    auto gaz = tiny_gazetteer();
    auto mentions = extract_entities("Harry Potter went home", gaz);
    REQUIRE(mentions.size() == 1);
    CHECK(mentions[0].entity == 1);
    CHECK(mentions[0].end - mentions[0].begin == 12);
}

TEST_CASE("extract_entities respects word boundaries") {
    auto gaz = tiny_gazetteer();
    CHECK(extract_entities("Ronald rondo harrying", gaz).empty());
    CHECK(extract_entities("nothing relevant", gaz).empty());
}

TEST_CASE("gazetteer rejects shared aliases") {
    std::vector<Entity> entries;
    entries.push_back({1, "A", {"A", "shared"}, EntityCategory::Character, 0});
    entries.push_back({2, "B", {"B", "Shared"}, EntityCategory::Character, 0});
    CHECK_THROWS_AS(Gazetteer(std::move(entries)), FormatError);
}

TEST_CASE("build_graph counts chapter co-occurrence") {
    auto gaz = tiny_gazetteer();
    std::vector<std::string> chapters = {
        "Harry and Ron",  "Harry alone",      "Ron and Harry again",
        "nothing at all", "Harry, Ron, both",
    };
    auto g = build_graph(chapters, gaz);
    REQUIRE(g.edges().size() == 1);
    CHECK(g.edges()[0].weight == doctest::Approx(3.0));
    CHECK(g.freq(1) == 4);
    CHECK(g.freq(2) == 3);
    CHECK(g.freq(3) == 0);
}

TEST_CASE("entity never co-mentioned keeps its frequency, degree 0") {
    auto gaz = tiny_gazetteer();
    std::vector<std::string> chapters(7, "Hogwarts");
    auto g = build_graph(chapters, gaz);
    CHECK(g.freq(3) == 7);
    CHECK(g.degree(3) == 0);
    CHECK(g.edges().empty());
}

TEST_CASE("build_graph invariants on the fixture corpus") {
    auto gaz = fixture_gazetteer();
    std::ifstream in(std::string(KET_FIXTURES_DIR) + "/corpus.txt");
    std::stringstream ss;
    ss << in.rdbuf();
    auto chapters = segment_corpus(ss.str(), "^CHAPTER");
    REQUIRE(chapters.size() == 3);
    auto g = build_graph(chapters, gaz);

    // Frequency conservation.
    std::size_t total_mentions = 0;
    for (const auto& c : chapters) {
        total_mentions += extract_entities(c, gaz).size();
    }
    std::uint64_t freq_sum = 0;
    for (const auto& e : g.entities()) freq_sum += e.freq;
    CHECK(freq_sum == total_mentions);

    // Weight bounded by per-endpoint chapter counts.
    for (const auto& edge : g.edges()) {
        int chapters_u = 0, chapters_v = 0;
        for (const auto& c : chapters) {
            bool has_u = false, has_v = false;
            for (const auto& m : extract_entities(c, gaz)) {
                has_u |= m.entity == edge.u;
                has_v |= m.entity == edge.v;
            }
            chapters_u += has_u;
            chapters_v += has_v;
        }
        CHECK(edge.weight <= std::min(chapters_u, chapters_v));
        CHECK(edge.weight > 0);
    }
}

TEST_CASE("graph round-trips through the canonical format") {
    std::vector<Entity> entities = {
        {1, "A", {"A"}, EntityCategory::Character, 4},
        {2, "B", {"B"}, EntityCategory::Location, 2},
        {3, "C", {"C"}, EntityCategory::Object, 0},
    };
    std::vector<WeightedEdge> edges = {{2, 1, 3.0}, {1, 3, 1.0}};
    DomainGraph g(entities, edges, {"h1", "h2", "^CHAPTER"});

    std::string json = graph_to_json(g);
    DomainGraph g2 = graph_from_json(json);
    CHECK(graph_to_json(g2) == json);
    CHECK(g2.entities().size() == 3);
    REQUIRE(g2.edges().size() == 2);
    CHECK(g2.edges()[0].u == 1);  // canonical ordering: (1,2) before (1,3)
    CHECK(g2.edges()[0].v == 2);
}

TEST_CASE("load rejects edges with unknown endpoints") {
    std::string bad = R"({
      "entities": [{"id": 1, "name": "A", "aliases": ["A"], "category": "character", "freq": 0}],
      "edges": [{"u": 1, "v": 99, "w": 1.0}]
    })";
    CHECK_THROWS_AS(graph_from_json(bad), FormatError);
    CHECK_THROWS_AS(graph_from_json("{not json"), FormatError);
}

TEST_CASE("identical inputs produce byte-identical graph files") {
    auto gaz = fixture_gazetteer();
    std::ifstream in(std::string(KET_FIXTURES_DIR) + "/corpus.txt");
    std::stringstream ss;
    ss << in.rdbuf();
    auto chapters = segment_corpus(ss.str(), "^CHAPTER");
    auto a = graph_to_json(build_graph(chapters, gaz));
    auto b = graph_to_json(build_graph(chapters, gaz));
    CHECK(a == b);
}
