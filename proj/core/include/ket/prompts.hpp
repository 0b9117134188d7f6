#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ket/domain_graph.hpp"
#include "ket/gateway.hpp"
#include "ket/gazetteer.hpp"

namespace ket {

enum class Variant { Orig, Emotional, Logical, Authority };

std::string to_string(Variant v);
Variant variant_from_string(const std::string& s);

struct PromptRecord {
    std::string id;
    std::string base_id;
    Variant variant = Variant::Orig;
    std::string text;
    std::vector<EntityId> entities;  // sorted, deduplicated
    // Declared target entities of the base prompt, when present; used for
    // the content-preservation check on variants.
    std::vector<EntityId> target_entities;
    std::string template_hash;  // provenance for generated variants
};

std::vector<PromptRecord> load_base_prompts(const std::string& path);

std::vector<PromptRecord> load_prompts(const std::string& path);
void save_prompts(const std::vector<PromptRecord>& records,
                  const std::string& path);

// Rewriting instruction for one technique; "{prompt}" marks where the base
// prompt goes. Shipped as editable data files.
struct TransformTemplate {
    Variant technique = Variant::Emotional;
    std::string instruction;
    std::string hash;
};

TransformTemplate load_template(Variant technique, const std::string& path);

PromptRecord transform_prompt(const PromptRecord& base, Variant technique,
                              const TransformTemplate& tmpl, Gateway& gateway,
                              const std::string& model);

PromptRecord annotate_entities(PromptRecord record, const Gazetteer& gazetteer);

// Content preservation: a variant's entity set must cover the base's declared
// target entities. Returns the missing ids (empty when the contract holds).
std::vector<EntityId> preservation_violations(const PromptRecord& variant);

}  // namespace ket
