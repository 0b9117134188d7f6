#include "ket/prompts.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ket/corpus.hpp"
#include "ket/hash.hpp"

namespace ket {

std::string to_string(Variant v) {
    switch (v) {
        case Variant::Orig: return "orig";
        case Variant::Emotional: return "emotional";
        case Variant::Logical: return "logical";
        case Variant::Authority: return "authority";
    }
    return "orig";
}

Variant variant_from_string(const std::string& s) {
    if (s == "orig") return Variant::Orig;
    if (s == "emotional" || s == "emo") return Variant::Emotional;
    if (s == "logical" || s == "logic") return Variant::Logical;
    if (s == "authority" || s == "auth") return Variant::Authority;
    throw FormatError("unknown variant: " + s);
}

namespace {

PromptRecord record_from_json(const nlohmann::json& j, std::size_t line_no) {
    PromptRecord r;
    try {
        r.id = j.at("id").get<std::string>();
        r.text = j.at("text").get<std::string>();
        r.base_id = j.value("base_id", r.id);
        r.variant = variant_from_string(j.value("variant", "orig"));
        if (j.contains("entities")) {
            r.entities = j.at("entities").get<std::vector<EntityId>>();
        }
        if (j.contains("target_entities")) {
            r.target_entities =
                j.at("target_entities").get<std::vector<EntityId>>();
        }
        r.template_hash = j.value("template_hash", "");
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("prompt file line " + std::to_string(line_no) +
                          ": " + e.what());
    }
    return r;
}

nlohmann::ordered_json record_to_json(const PromptRecord& r) {
    nlohmann::ordered_json j;
    j["id"] = r.id;
    j["base_id"] = r.base_id;
    j["variant"] = to_string(r.variant);
    j["text"] = r.text;
    j["entities"] = r.entities;
    if (!r.target_entities.empty()) j["target_entities"] = r.target_entities;
    if (!r.template_hash.empty()) j["template_hash"] = r.template_hash;
    return j;
}

std::vector<PromptRecord> load_jsonl(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot read prompt file: " + path);
    std::vector<PromptRecord> records;
    std::set<std::string> ids;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw FormatError("prompt file line " + std::to_string(line_no) +
                              ": " + e.what());
        }
        PromptRecord r = record_from_json(j, line_no);
        if (!ids.insert(r.id).second) {
            throw DuplicateId("duplicate prompt id '" + r.id + "' at line " +
                              std::to_string(line_no));
        }
        records.push_back(std::move(r));
    }
    return records;
}

}  // namespace

std::vector<PromptRecord> load_base_prompts(const std::string& path) {
    auto records = load_jsonl(path);
    for (auto& r : records) {
        r.variant = Variant::Orig;
        r.base_id = r.id;
    }
    return records;
}

std::vector<PromptRecord> load_prompts(const std::string& path) {
    return load_jsonl(path);
}

void save_prompts(const std::vector<PromptRecord>& records,
                  const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot write prompt file: " + path);
    for (const auto& r : records) {
        out << record_to_json(r).dump() << "\n";
    }
}

TransformTemplate load_template(Variant technique, const std::string& path) {
    if (technique == Variant::Orig) {
        throw ConfigError("orig is the identity transformation, no template");
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot read template: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    TransformTemplate t;
    t.technique = technique;
    t.instruction = ss.str();
    if (t.instruction.find("{prompt}") == std::string::npos) {
        throw FormatError("template " + path + " lacks a {prompt} placeholder");
    }
    t.hash = hash_hex(t.instruction);
    return t;
}

PromptRecord transform_prompt(const PromptRecord& base, Variant technique,
                              const TransformTemplate& tmpl, Gateway& gateway,
                              const std::string& model) {
    if (technique == Variant::Orig) {
        throw ConfigError("orig variants are never generated");
    }
    if (tmpl.technique != technique) {
        throw ConfigError("template/technique mismatch");
    }
    std::string instruction = tmpl.instruction;
    auto pos = instruction.find("{prompt}");
    instruction.replace(pos, std::string("{prompt}").size(), base.text);

    CompletionRequest req;
    req.model = model;
    req.messages = {{"user", instruction}};
    CompletionResponse res = gateway.complete(req);

    std::string text = res.text;
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
        throw EmptyTransform("gateway produced an empty rewrite for '" +
                             base.id + "'");
    }
    PromptRecord out;
    out.id = base.base_id + "." + to_string(technique);
    out.base_id = base.base_id;
    out.variant = technique;
    out.text = std::move(text);
    out.target_entities = base.target_entities;
    out.template_hash = tmpl.hash;
    return out;
}

PromptRecord annotate_entities(PromptRecord record,
                               const Gazetteer& gazetteer) {
    std::set<EntityId> ids;
    for (const auto& m : extract_entities(record.text, gazetteer)) {
        ids.insert(m.entity);
    }
    record.entities.assign(ids.begin(), ids.end());
    return record;
}

std::vector<EntityId> preservation_violations(const PromptRecord& variant) {
    std::vector<EntityId> missing;
    for (EntityId target : variant.target_entities) {
        if (!std::binary_search(variant.entities.begin(),
                                variant.entities.end(), target)) {
            missing.push_back(target);
        }
    }
    return missing;
}

}  // namespace ket
