#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ket {

struct PearsonResult {
    double r = 0.0;
    double p_value = 1.0;  // two-sided, t-approximation
    std::size_t n = 0;
};

PearsonResult pearson(const std::vector<double>& xs,
                      const std::vector<double>& ys);

double sigmoid(double z);

// Regularized incomplete beta I_x(a, b); exposed for tests.
double incomplete_beta(double a, double b, double x);

enum class Behavior { Factual, NonFactual, Hallucination };
std::string to_string(Behavior b);
Behavior behavior_from_string(const std::string& s);

struct FitStats {
    double intercept_std_err = 0.0;
    double coef_std_err = 0.0;
    double intercept_z = 0.0;
    double coef_z = 0.0;
    double intercept_p = 1.0;
    double coef_p = 1.0;
    double test_accuracy = 0.0;
    int iterations = 0;
};

struct RegressionModel {
    Behavior behavior = Behavior::Factual;
    int metric_id = 9;  // 1..9
    double intercept = 0.0;
    double coefficient = 0.0;
    std::optional<FitStats> fit_stats;  // absent for published coefficients
};

// Single-feature logistic fit by Newton iteration (tolerance 1e-8, at most
// 100 steps) on a seeded 80/20 train-test split.
RegressionModel fit_logistic(const std::vector<double>& metric_values,
                             const std::vector<int>& labels,
                             std::uint64_t split_seed,
                             Behavior behavior = Behavior::Factual,
                             int metric_id = 0);

double predict(const RegressionModel& model, double metric_value);

std::string models_to_json(const std::vector<RegressionModel>& models);
std::vector<RegressionModel> models_from_json(const std::string& text);

}  // namespace ket
