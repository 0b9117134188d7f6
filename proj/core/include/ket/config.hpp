#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ket/domain_graph.hpp"

namespace ket {

// Flat "[section] key = value" file; '#' starts a comment. CLI flags
// override anything set here.
class KeyValueFile {
public:
    static KeyValueFile parse(const std::string& text);
    static KeyValueFile load(const std::string& path);

    std::optional<std::string> get(const std::string& section,
                                   const std::string& key) const;
    std::string get_or(const std::string& section, const std::string& key,
                       const std::string& fallback) const;
    double get_double(const std::string& section, const std::string& key,
                      double fallback) const;
    std::int64_t get_int(const std::string& section, const std::string& key,
                         std::int64_t fallback) const;

private:
    std::map<std::string, std::string> values_;  // "section.key" -> value
};

struct RunConfig {
    // paths
    std::string corpus;
    std::string gazetteer;
    std::string base_prompts;
    std::string templates_dir;
    std::string out_dir;
    std::string marker = "^CHAPTER";

    // gateway
    std::string gateway_base_url;
    std::string transform_model = "gpt-4";
    std::string mock_fixtures;  // non-empty selects the mock gateway
    int max_inflight = 4;
    int retry_max = 5;
    int backoff_base_ms = 1000;
    int timeout_ms = 120000;

    // generate
    std::vector<std::string> target_models;

    // judge
    std::vector<std::string> judge_models;
    std::string tiebreak_model;

    // dwis
    std::vector<EntityId> reference_nodes;
    double delta = 0.5;

    // analytics
    std::uint64_t split_seed = 42;
    std::optional<double> risk_threshold;  // default: 90th percentile

    static RunConfig from_file(const std::string& path);
    void validate() const;  // throws ConfigError
};

std::vector<std::string> split_csv(const std::string& s);
std::vector<EntityId> parse_id_list(const std::string& s);

}  // namespace ket
