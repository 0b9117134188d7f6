#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "ket/entanglement.hpp"
#include "ket/judge.hpp"
#include "ket/stats.hpp"

namespace ket {

// One 1 among the three behaviors per response: argmax of the final means,
// ties broken factual > non_factual > hallucinated.
std::array<int, 3> label_response(const EnsembleScore& score);
std::vector<std::array<int, 3>> label_responses(
    const std::vector<EnsembleScore>& scores);

struct ScoredResponse {
    std::string response_id;
    std::string prompt_id;
    std::string variant;
    std::string model;  // generating model
    EnsembleScore score;
};

struct CorrelationCell {
    std::string model;
    int metric_id = 0;  // 1..9
    Behavior behavior = Behavior::Factual;
    double r = 0.0;
    double p_value = 1.0;
    std::size_t n = 0;
    bool degenerate = false;  // too few pairs or zero variance
};

struct CorrelationReport {
    std::vector<CorrelationCell> cells;
    std::string to_csv() const;
    std::string to_json() const;
};

// One cell per (model, metric, behavior), joining entanglement vectors to
// judged responses by prompt_id. Degenerate cells are flagged, not fatal.
CorrelationReport correlation_report(
    const std::vector<EntanglementVector>& vectors,
    const std::vector<ScoredResponse>& responses);

struct RiskAssessment {
    std::string prompt_id;
    double probability = 0.0;
    bool flagged = false;
};

// Flags prompt iff predicted probability >= threshold; sorted by descending
// probability (ties by prompt_id).
std::vector<RiskAssessment> risk_filter(
    const std::vector<EntanglementVector>& vectors,
    const RegressionModel& model, double threshold);

// Default filter threshold: the q-th percentile (q in [0,1]) of the
// predicted probabilities over the supplied set.
double percentile_threshold(const std::vector<EntanglementVector>& vectors,
                            const RegressionModel& model, double q);

}  // namespace ket
