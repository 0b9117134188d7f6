#include "ket/judge.hpp"

#include <algorithm>
#include <array>
#include <numeric>

#include <json.hpp>

#include "ket/hash.hpp"

namespace ket {

namespace {

const char* kJudgeTemplate =
    "You are an evaluator. Analyze the following response sentence by "
    "sentence and estimate:\n"
    "1. Percentage factual (objectively verifiable).\n"
    "2. Percentage non-factual (subjective or unverifiable).\n"
    "3. Percentage hallucinated (fabricated or false).\n"
    "\n"
    "Return ONLY a JSON object:\n"
    "{\n"
    "  \"factual\": <int>,\n"
    "  \"non_factual\": <int>,\n"
    "  \"hallucinated\": <int>\n"
    "}\n"
    "The three values must sum to 100.\n"
    "Response to analyze:\n"
    "---\n"
    "{text}\n"
    "---";

std::array<int, 3> values(const JudgeVerdict& v) {
    return {v.factual, v.non_factual, v.hallucinated};
}

}  // namespace

std::vector<Message> build_judge_prompt(const std::string& response_text) {
    if (response_text.empty()) {
        throw InputEmpty("cannot judge an empty response");
    }
    std::string content = kJudgeTemplate;
    auto pos = content.find("{text}");
    content.replace(pos, 6, response_text);
    return {{"user", content}};
}

std::string judge_template_hash() { return hash_hex(kJudgeTemplate); }

namespace {

// First balanced {...} span that parses as an object with the three keys.
// Sum is NOT checked here.
JudgeVerdict extract_verdict(const std::string& raw_text,
                             const std::string& judge_model) {
    for (std::size_t start = raw_text.find('{'); start != std::string::npos;
         start = raw_text.find('{', start + 1)) {
        int depth = 0;
        for (std::size_t i = start; i < raw_text.size(); ++i) {
            if (raw_text[i] == '{') ++depth;
            if (raw_text[i] == '}' && --depth == 0) {
                nlohmann::json doc;
                try {
                    doc = nlohmann::json::parse(
                        raw_text.substr(start, i - start + 1));
                } catch (const nlohmann::json::parse_error&) {
                    break;
                }
                if (!doc.contains("factual") || !doc.contains("non_factual") ||
                    !doc.contains("hallucinated")) {
                    break;
                }
                JudgeVerdict v;
                v.judge_model = judge_model;
                try {
                    v.factual = doc["factual"].get<int>();
                    v.non_factual = doc["non_factual"].get<int>();
                    v.hallucinated = doc["hallucinated"].get<int>();
                } catch (const nlohmann::json::exception& e) {
                    throw ParseError("verdict fields must be integers: " +
                                     std::string(e.what()));
                }
                for (int x : values(v)) {
                    if (x < 0 || x > 100) {
                        throw ParseError("verdict percentage out of range");
                    }
                }
                return v;
            }
        }
    }
    throw ParseError("no JSON verdict object in judge output");
}

}  // namespace

JudgeVerdict parse_verdict(const std::string& raw_text,
                           const std::string& judge_model) {
    JudgeVerdict v = extract_verdict(raw_text, judge_model);
    if (v.factual + v.non_factual + v.hallucinated != 100) {
        throw SumViolation("verdict sums to " +
                           std::to_string(v.factual + v.non_factual +
                                          v.hallucinated) +
                           " (judge " + judge_model + ")");
    }
    return v;
}

JudgeVerdict renormalize_verdict(JudgeVerdict v) {
    const double sum = v.factual + v.non_factual + v.hallucinated;
    if (sum <= 0) {
        throw ParseError("verdict has no mass to renormalize");
    }
    // Largest-remainder scaling keeps integer percents summing to 100.
    std::array<double, 3> exact{100.0 * v.factual / sum,
                                100.0 * v.non_factual / sum,
                                100.0 * v.hallucinated / sum};
    std::array<int, 3> floors{};
    std::array<double, 3> rem{};
    int total = 0;
    for (int i = 0; i < 3; ++i) {
        floors[i] = static_cast<int>(exact[i]);
        rem[i] = exact[i] - floors[i];
        total += floors[i];
    }
    std::array<int, 3> order{0, 1, 2};
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (rem[a] != rem[b]) return rem[a] > rem[b];
        return a < b;  // fixed category order breaks ties
    });
    for (int i = 0; total < 100; ++i, ++total) ++floors[order[i % 3]];
    v.factual = floors[0];
    v.non_factual = floors[1];
    v.hallucinated = floors[2];
    return v;
}

unsigned top2_mask(const JudgeVerdict& v) {
    std::array<int, 3> vals = values(v);
    std::array<int, 3> order{0, 1, 2};
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (vals[a] != vals[b]) return vals[a] > vals[b];
        return a < b;  // factual > non_factual > hallucinated on ties
    });
    return (1u << order[0]) | (1u << order[1]);
}

EnsembleScore aggregate(const std::string& response_id,
                        const std::vector<JudgeVerdict>& verdicts,
                        const TiebreakFn& tiebreak) {
    if (verdicts.size() != 3) {
        throw ShapeError("aggregate expects exactly 3 verdicts, got " +
                         std::to_string(verdicts.size()));
    }
    EnsembleScore score;
    score.response_id = response_id;
    score.verdicts = verdicts;

    std::array<unsigned, 3> masks{top2_mask(verdicts[0]),
                                  top2_mask(verdicts[1]),
                                  top2_mask(verdicts[2])};
    bool agreement = masks[0] == masks[1] || masks[0] == masks[2] ||
                     masks[1] == masks[2];
    if (!agreement) {
        score.escalated = true;
        try {
            score.verdicts.push_back(tiebreak());
        } catch (const Error&) {
            throw;
        } catch (const std::exception& e) {
            throw EscalationError("tie-break judge failed: " +
                                  std::string(e.what()));
        }
    }
    double f = 0, nf = 0, h = 0;
    for (const auto& v : score.verdicts) {
        f += v.factual;
        nf += v.non_factual;
        h += v.hallucinated;
    }
    const double n = static_cast<double>(score.verdicts.size());
    score.mean_factual = f / n;
    score.mean_non_factual = nf / n;
    score.mean_hallucinated = h / n;
    return score;
}

JudgeVerdict JudgeRunner::query(const std::string& model,
                                const std::string& response_text) const {
    CompletionRequest req;
    req.model = model;
    req.messages = build_judge_prompt(response_text);
    try {
        return parse_verdict(gateway_.complete(req).text, model);
    } catch (const SumViolation&) {
        // One re-query; if the sum is still off, renormalize proportionally.
        JudgeVerdict v = extract_verdict(gateway_.complete(req).text, model);
        if (v.factual + v.non_factual + v.hallucinated == 100) return v;
        return renormalize_verdict(v);
    }
}

EnsembleScore JudgeRunner::evaluate(const std::string& response_id,
                                    const std::string& response_text) const {
    if (judges_.size() != 3) {
        throw ConfigError("judge ensemble requires exactly 3 judges");
    }
    std::vector<JudgeVerdict> verdicts;
    verdicts.reserve(3);
    for (const auto& judge : judges_) {
        verdicts.push_back(query(judge, response_text));
    }
    return aggregate(response_id, verdicts,
                     [&] { return query(tiebreak_model_, response_text); });
}

}  // namespace ket
