#include "ket/analytics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ket/errors.hpp"

namespace ket {

namespace {

std::string fmt(double x) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, ptr);
}

double behavior_mean(const EnsembleScore& s, Behavior b) {
    switch (b) {
        case Behavior::Factual: return s.mean_factual;
        case Behavior::NonFactual: return s.mean_non_factual;
        case Behavior::Hallucination: return s.mean_hallucinated;
    }
    return 0.0;
}

}  // namespace

std::array<int, 3> label_response(const EnsembleScore& score) {
    std::array<double, 3> means{score.mean_factual, score.mean_non_factual,
                                score.mean_hallucinated};
    int best = 0;
    for (int i = 1; i < 3; ++i) {
        if (means[i] > means[best]) best = i;  // ties keep the earlier index
    }
    std::array<int, 3> labels{};
    labels[best] = 1;
    return labels;
}

std::vector<std::array<int, 3>> label_responses(
    const std::vector<EnsembleScore>& scores) {
    std::vector<std::array<int, 3>> out;
    out.reserve(scores.size());
    for (const auto& s : scores) out.push_back(label_response(s));
    return out;
}

CorrelationReport correlation_report(
    const std::vector<EntanglementVector>& vectors,
    const std::vector<ScoredResponse>& responses) {
    std::map<std::string, const EntanglementVector*> by_prompt;
    for (const auto& v : vectors) by_prompt[v.prompt_id] = &v;

    std::set<std::string> models;
    for (const auto& r : responses) models.insert(r.model);

    static const Behavior kBehaviors[] = {
        Behavior::Factual, Behavior::NonFactual, Behavior::Hallucination};

    CorrelationReport report;
    for (const auto& model : models) {
        for (int metric = 1; metric <= 9; ++metric) {
            for (Behavior behavior : kBehaviors) {
                CorrelationCell cell;
                cell.model = model;
                cell.metric_id = metric;
                cell.behavior = behavior;
                std::vector<double> xs, ys;
                for (const auto& r : responses) {
                    if (r.model != model) continue;
                    auto it = by_prompt.find(r.prompt_id);
                    if (it == by_prompt.end()) continue;
                    xs.push_back(it->second->m[metric - 1]);
                    ys.push_back(behavior_mean(r.score, behavior));
                }
                cell.n = xs.size();
                if (xs.size() < 2) {
                    cell.degenerate = true;
                } else {
                    try {
                        auto res = pearson(xs, ys);
                        cell.r = res.r;
                        cell.p_value = res.p_value;
                    } catch (const DegenerateVariance&) {
                        cell.degenerate = true;
                    }
                }
                report.cells.push_back(std::move(cell));
            }
        }
    }
    return report;
}

std::string CorrelationReport::to_csv() const {
    std::ostringstream out;
    out << "model,metric,behavior,r,p_value,n,degenerate\n";
    for (const auto& c : cells) {
        out << c.model << ",M" << c.metric_id << "," << to_string(c.behavior)
            << "," << (c.degenerate ? "" : fmt(c.r)) << ","
            << (c.degenerate ? "" : fmt(c.p_value)) << "," << c.n << ","
            << (c.degenerate ? "true" : "false") << "\n";
    }
    return out.str();
}

std::string CorrelationReport::to_json() const {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& c : cells) {
        nlohmann::ordered_json j;
        j["model"] = c.model;
        j["metric"] = "M" + std::to_string(c.metric_id);
        j["behavior"] = to_string(c.behavior);
        if (c.degenerate) {
            j["degenerate"] = true;
        } else {
            j["r"] = c.r;
            j["p_value"] = c.p_value;
        }
        j["n"] = c.n;
        arr.push_back(std::move(j));
    }
    return arr.dump(2) + "\n";
}

std::vector<RiskAssessment> risk_filter(
    const std::vector<EntanglementVector>& vectors,
    const RegressionModel& model, double threshold) {
    if (!(threshold > 0.0 && threshold <= 1.0)) {
        throw ConfigError("risk threshold must lie in (0,1]");
    }
    std::vector<RiskAssessment> out;
    out.reserve(vectors.size());
    for (const auto& v : vectors) {
        RiskAssessment a;
        a.prompt_id = v.prompt_id;
        a.probability = predict(model, v.m[model.metric_id - 1]);
        a.flagged = a.probability >= threshold;
        out.push_back(std::move(a));
    }
    std::sort(out.begin(), out.end(),
              [](const RiskAssessment& a, const RiskAssessment& b) {
                  if (a.probability != b.probability)
                      return a.probability > b.probability;
                  return a.prompt_id < b.prompt_id;
              });
    return out;
}

double percentile_threshold(const std::vector<EntanglementVector>& vectors,
                            const RegressionModel& model, double q) {
    if (vectors.empty()) throw InputEmpty("no vectors for threshold");
    std::vector<double> probs;
    probs.reserve(vectors.size());
    for (const auto& v : vectors) {
        probs.push_back(predict(model, v.m[model.metric_id - 1]));
    }
    std::sort(probs.begin(), probs.end());
    double rank = q * static_cast<double>(probs.size() - 1);
    std::size_t lo = static_cast<std::size_t>(rank);
    std::size_t hi = std::min(lo + 1, probs.size() - 1);
    double frac = rank - static_cast<double>(lo);
    return probs[lo] + frac * (probs[hi] - probs[lo]);
}

}  // namespace ket
