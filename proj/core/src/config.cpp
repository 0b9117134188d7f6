#include "ket/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "ket/errors.hpp"

namespace ket {

namespace {

std::string trim(const std::string& s) {
    auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

std::string unquote(const std::string& s) {
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') {
        return s.substr(1, s.size() - 2);
    }
    return s;
}

}  // namespace

KeyValueFile KeyValueFile::parse(const std::string& text) {
    KeyValueFile kv;
    std::istringstream in(text);
    std::string line, section;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw ConfigError("line " + std::to_string(line_no) +
                                  ": unterminated section header");
            }
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(line_no) +
                              ": expected key = value");
        }
        std::string key = trim(line.substr(0, eq));
        std::string value = unquote(trim(line.substr(eq + 1)));
        kv.values_[section + "." + key] = value;
    }
    return kv;
}

KeyValueFile KeyValueFile::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

std::optional<std::string> KeyValueFile::get(const std::string& section,
                                             const std::string& key) const {
    auto it = values_.find(section + "." + key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
}

std::string KeyValueFile::get_or(const std::string& section,
                                 const std::string& key,
                                 const std::string& fallback) const {
    auto v = get(section, key);
    return v ? *v : fallback;
}

double KeyValueFile::get_double(const std::string& section,
                                const std::string& key,
                                double fallback) const {
    auto v = get(section, key);
    if (!v) return fallback;
    try {
        return std::stod(*v);
    } catch (const std::exception&) {
        throw ConfigError(section + "." + key + ": not a number: " + *v);
    }
}

std::int64_t KeyValueFile::get_int(const std::string& section,
                                   const std::string& key,
                                   std::int64_t fallback) const {
    auto v = get(section, key);
    if (!v) return fallback;
    try {
        return std::stoll(*v);
    } catch (const std::exception&) {
        throw ConfigError(section + "." + key + ": not an integer: " + *v);
    }
}

std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::vector<EntityId> parse_id_list(const std::string& s) {
    std::vector<EntityId> out;
    for (const auto& item : split_csv(s)) {
        try {
            out.push_back(std::stoll(item));
        } catch (const std::exception&) {
            throw ConfigError("not an entity id: " + item);
        }
    }
    return out;
}

RunConfig RunConfig::from_file(const std::string& path) {
    KeyValueFile kv = KeyValueFile::load(path);
    RunConfig c;
    c.corpus = kv.get_or("paths", "corpus", "");
    c.gazetteer = kv.get_or("paths", "gazetteer", "");
    c.base_prompts = kv.get_or("paths", "prompts", "");
    c.templates_dir = kv.get_or("paths", "templates", "");
    c.out_dir = kv.get_or("paths", "out", "out");
    c.marker = kv.get_or("graph", "marker", "^CHAPTER");

    c.gateway_base_url = kv.get_or("gateway", "base_url", "");
    c.transform_model = kv.get_or("gateway", "transform_model", "gpt-4");
    c.mock_fixtures = kv.get_or("gateway", "mock_fixtures", "");
    c.max_inflight = static_cast<int>(kv.get_int("gateway", "max_inflight", 4));
    c.retry_max = static_cast<int>(kv.get_int("gateway", "retry_max", 5));
    c.backoff_base_ms =
        static_cast<int>(kv.get_int("gateway", "backoff_base_ms", 1000));
    c.timeout_ms = static_cast<int>(kv.get_int("gateway", "timeout_ms", 120000));

    c.target_models = split_csv(kv.get_or("generate", "models", ""));
    c.judge_models = split_csv(kv.get_or("judge", "judges", ""));
    c.tiebreak_model = kv.get_or("judge", "tiebreak", "");

    c.reference_nodes = parse_id_list(kv.get_or("dwis", "refs", ""));
    c.delta = kv.get_double("dwis", "delta", 0.5);

    c.split_seed =
        static_cast<std::uint64_t>(kv.get_int("analytics", "split_seed", 42));
    if (auto t = kv.get("analytics", "risk_threshold")) {
        try {
            c.risk_threshold = std::stod(*t);
        } catch (const std::exception&) {
            throw ConfigError("analytics.risk_threshold: not a number");
        }
    }
    return c;
}

void RunConfig::validate() const {
    if (!(delta > 0.0 && delta < 1.0)) {
        throw ConfigError("dwis.delta must lie in (0,1)");
    }
    if (risk_threshold && !(*risk_threshold > 0.0 && *risk_threshold <= 1.0)) {
        throw ConfigError("analytics.risk_threshold must lie in (0,1]");
    }
    if (out_dir.empty()) throw ConfigError("paths.out must be set");
}

}  // namespace ket
