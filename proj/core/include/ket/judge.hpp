#pragma once

#include <functional>
#include <string>
#include <vector>

#include "ket/gateway.hpp"

namespace ket {

struct JudgeVerdict {
    std::string judge_model;
    int factual = 0;       // percent, 0..100
    int non_factual = 0;
    int hallucinated = 0;  // the three always sum to 100
};

struct EnsembleScore {
    std::string response_id;
    std::vector<JudgeVerdict> verdicts;
    double mean_factual = 0.0;
    double mean_non_factual = 0.0;
    double mean_hallucinated = 0.0;
    bool escalated = false;
};

// Instruction sent to each judge, with the response between "---" fences.
std::vector<Message> build_judge_prompt(const std::string& response_text);
std::string judge_template_hash();

// Extracts the first JSON object from raw model output. Throws ParseError
// when none parses, SumViolation when the three values do not sum to 100.
JudgeVerdict parse_verdict(const std::string& raw_text,
                           const std::string& judge_model);

// Largest-remainder scaling back to a 100 total; keeps integer percents.
JudgeVerdict renormalize_verdict(JudgeVerdict v);

// Category indices: 0 factual, 1 non_factual, 2 hallucinated. Top-2 set as a
// bitmask; within-verdict ranking ties broken by that fixed category order.
unsigned top2_mask(const JudgeVerdict& v);

using TiebreakFn = std::function<JudgeVerdict()>;

// Escalates iff no top-2 category set is shared by at least 2 of the 3
// verdicts; the tie-break verdict is then averaged in with the others.
EnsembleScore aggregate(const std::string& response_id,
                        const std::vector<JudgeVerdict>& verdicts,
                        const TiebreakFn& tiebreak);

// Full per-response evaluation: query each judge, re-query once on a sum
// violation, renormalize if it persists, then aggregate.
class JudgeRunner {
public:
    JudgeRunner(Gateway& gateway, std::vector<std::string> judge_models,
                std::string tiebreak_model)
        : gateway_(gateway),
          judges_(std::move(judge_models)),
          tiebreak_model_(std::move(tiebreak_model)) {}

    EnsembleScore evaluate(const std::string& response_id,
                           const std::string& response_text) const;

private:
    JudgeVerdict query(const std::string& model,
                       const std::string& response_text) const;

    Gateway& gateway_;
    std::vector<std::string> judges_;
    std::string tiebreak_model_;
};

}  // namespace ket
