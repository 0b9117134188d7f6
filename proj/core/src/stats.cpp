#include "ket/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <json.hpp>

#include "ket/errors.hpp"

namespace ket {

namespace {

// Continued-fraction evaluation for the regularized incomplete beta
// (modified Lentz). Good to ~1e-14 over the domain we use.
double beta_cf(double a, double b, double x) {
    const double eps = 1e-15;
    const double fpmin = 1e-300;
    double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < fpmin) d = fpmin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 300; ++m) {
        int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < eps) break;
    }
    return h;
}

double normal_two_sided_p(double z) {
    return std::erfc(std::fabs(z) / std::sqrt(2.0));
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    double ln_bt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                   a * std::log(x) + b * std::log(1.0 - x);
    double bt = std::exp(ln_bt);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return bt * beta_cf(a, b, x) / a;
    }
    return 1.0 - bt * beta_cf(b, a, 1.0 - x) / b;
}

PearsonResult pearson(const std::vector<double>& xs,
                      const std::vector<double>& ys) {
    if (xs.size() != ys.size()) {
        throw ShapeError("pearson: " + std::to_string(xs.size()) + " vs " +
                         std::to_string(ys.size()) + " samples");
    }
    const std::size_t n = xs.size();
    if (n < 2) throw ShapeError("pearson needs at least 2 samples");

    double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
    double sxx = 0, syy = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double dx = xs[i] - mx, dy = ys[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx == 0.0 || syy == 0.0) {
        throw DegenerateVariance("pearson input has zero variance");
    }
    PearsonResult out;
    out.n = n;
    out.r = sxy / std::sqrt(sxx * syy);
    out.r = std::clamp(out.r, -1.0, 1.0);

    // Two-sided p via the t distribution with n-2 degrees of freedom.
    double df = static_cast<double>(n - 2);
    if (df <= 0 || std::fabs(out.r) >= 1.0) {
        out.p_value = 0.0;
    } else {
        double t2 = out.r * out.r * df / (1.0 - out.r * out.r);
        out.p_value = incomplete_beta(df / 2.0, 0.5, df / (df + t2));
    }
    return out;
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

std::string to_string(Behavior b) {
    switch (b) {
        case Behavior::Factual: return "factual";
        case Behavior::NonFactual: return "non_factual";
        case Behavior::Hallucination: return "hallucination";
    }
    return "factual";
}

Behavior behavior_from_string(const std::string& s) {
    if (s == "factual") return Behavior::Factual;
    if (s == "non_factual") return Behavior::NonFactual;
    if (s == "hallucination" || s == "hallucinated")
        return Behavior::Hallucination;
    throw FormatError("unknown behavior: " + s);
}

RegressionModel fit_logistic(const std::vector<double>& metric_values,
                             const std::vector<int>& labels,
                             std::uint64_t split_seed, Behavior behavior,
                             int metric_id) {
    if (metric_values.size() != labels.size()) {
        throw ShapeError("fit_logistic: feature/label length mismatch");
    }
    const std::size_t n = metric_values.size();
    if (n < 20) {
        throw ShapeError("fit_logistic needs at least 20 samples, got " +
                         std::to_string(n));
    }

    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::mt19937_64 rng(split_seed);
    std::shuffle(idx.begin(), idx.end(), rng);
    const std::size_t n_train = (n * 8) / 10;

    std::vector<double> x_train, x_test;
    std::vector<int> y_train, y_test;
    for (std::size_t i = 0; i < n; ++i) {
        if (i < n_train) {
            x_train.push_back(metric_values[idx[i]]);
            y_train.push_back(labels[idx[i]]);
        } else {
            x_test.push_back(metric_values[idx[i]]);
            y_test.push_back(labels[idx[i]]);
        }
    }
    bool has0 = false, has1 = false;
    for (int y : y_train) (y ? has1 : has0) = true;
    if (!has0 || !has1) {
        throw DegenerateLabels("training split contains a single class");
    }

    // Newton iteration on the two-parameter log-likelihood, with step
    // halving so overshoot near saturated probabilities cannot oscillate.
    auto log_lik = [&](double c0, double c1) {
        double ll = 0.0;
        for (std::size_t i = 0; i < x_train.size(); ++i) {
            double z = c0 + c1 * x_train[i];
            // log sigma(z) and log(1-sigma(z)) in stable form
            ll += y_train[i] * z - std::log1p(std::exp(-std::fabs(z))) -
                  std::max(z, 0.0);
        }
        return ll;
    };
    double b0 = 0.0, b1 = 0.0;
    double ll = log_lik(b0, b1);
    const double tol = 1e-8;
    const int max_iter = 100;
    int iter = 0;
    double i00 = 0, i01 = 0, i11 = 0;  // Fisher information at the solution
    for (iter = 1; iter <= max_iter; ++iter) {
        double g0 = 0, g1 = 0;
        i00 = i01 = i11 = 0;
        for (std::size_t i = 0; i < x_train.size(); ++i) {
            double p = sigmoid(b0 + b1 * x_train[i]);
            double r = y_train[i] - p;
            double w = p * (1.0 - p);
            g0 += r;
            g1 += r * x_train[i];
            i00 += w;
            i01 += w * x_train[i];
            i11 += w * x_train[i] * x_train[i];
        }
        double det = i00 * i11 - i01 * i01;
        if (!std::isfinite(det) || std::fabs(det) < 1e-300) {
            throw FitDiverged("singular information matrix");
        }
        double d0 = (i11 * g0 - i01 * g1) / det;
        double d1 = (-i01 * g0 + i00 * g1) / det;
        double step = 1.0;
        double next_ll = log_lik(b0 + d0, b1 + d1);
        for (int half = 0; half < 50 && !(next_ll >= ll - 1e-12); ++half) {
            step *= 0.5;
            next_ll = log_lik(b0 + step * d0, b1 + step * d1);
        }
        if (!(next_ll >= ll - 1e-12)) {
            throw FitDiverged("line search found no ascent direction");
        }
        b0 += step * d0;
        b1 += step * d1;
        ll = next_ll;
        if (!std::isfinite(b0) || !std::isfinite(b1)) {
            throw FitDiverged("coefficients diverged");
        }
        if (step * std::max(std::fabs(d0), std::fabs(d1)) < tol) break;
    }
    if (iter > max_iter) {
        throw FitDiverged("no convergence in " + std::to_string(max_iter) +
                          " iterations");
    }

    double det = i00 * i11 - i01 * i01;
    FitStats stats;
    stats.intercept_std_err = std::sqrt(i11 / det);
    stats.coef_std_err = std::sqrt(i00 / det);
    stats.intercept_z = b0 / stats.intercept_std_err;
    stats.coef_z = b1 / stats.coef_std_err;
    stats.intercept_p = normal_two_sided_p(stats.intercept_z);
    stats.coef_p = normal_two_sided_p(stats.coef_z);
    stats.iterations = iter;

    std::size_t correct = 0;
    for (std::size_t i = 0; i < x_test.size(); ++i) {
        int pred = sigmoid(b0 + b1 * x_test[i]) >= 0.5 ? 1 : 0;
        if (pred == y_test[i]) ++correct;
    }
    stats.test_accuracy = x_test.empty()
                              ? 0.0
                              : static_cast<double>(correct) / x_test.size();

    RegressionModel model;
    model.behavior = behavior;
    model.metric_id = metric_id;
    model.intercept = b0;
    model.coefficient = b1;
    model.fit_stats = stats;
    return model;
}

double predict(const RegressionModel& model, double metric_value) {
    return sigmoid(model.intercept + model.coefficient * metric_value);
}

std::string models_to_json(const std::vector<RegressionModel>& models) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& m : models) {
        nlohmann::ordered_json j;
        j["behavior"] = to_string(m.behavior);
        j["metric_id"] = m.metric_id;
        j["intercept"] = m.intercept;
        j["coefficient"] = m.coefficient;
        if (m.fit_stats) {
            j["fit_stats"] = {
                {"intercept_std_err", m.fit_stats->intercept_std_err},
                {"coef_std_err", m.fit_stats->coef_std_err},
                {"intercept_z", m.fit_stats->intercept_z},
                {"coef_z", m.fit_stats->coef_z},
                {"intercept_p", m.fit_stats->intercept_p},
                {"coef_p", m.fit_stats->coef_p},
                {"test_accuracy", m.fit_stats->test_accuracy},
                {"iterations", m.fit_stats->iterations},
            };
        }
        arr.push_back(std::move(j));
    }
    return arr.dump(2) + "\n";
}

std::vector<RegressionModel> models_from_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError("models file: " + std::string(e.what()));
    }
    if (!doc.is_array()) throw FormatError("models file must be a JSON list");
    std::vector<RegressionModel> models;
    for (const auto& j : doc) {
        RegressionModel m;
        try {
            m.behavior = behavior_from_string(j.at("behavior"));
            m.metric_id = j.at("metric_id").get<int>();
            m.intercept = j.at("intercept").get<double>();
            m.coefficient = j.at("coefficient").get<double>();
            if (j.contains("fit_stats")) {
                const auto& s = j["fit_stats"];
                FitStats stats;
                stats.intercept_std_err = s.value("intercept_std_err", 0.0);
                stats.coef_std_err = s.value("coef_std_err", 0.0);
                stats.intercept_z = s.value("intercept_z", 0.0);
                stats.coef_z = s.value("coef_z", 0.0);
                stats.intercept_p = s.value("intercept_p", 1.0);
                stats.coef_p = s.value("coef_p", 1.0);
                stats.test_accuracy = s.value("test_accuracy", 0.0);
                stats.iterations = s.value("iterations", 0);
                m.fit_stats = stats;
            }
        } catch (const nlohmann::json::exception& e) {
            throw FormatError("models file: " + std::string(e.what()));
        }
        if (m.metric_id < 1 || m.metric_id > 9) {
            throw FormatError("metric_id must be 1..9");
        }
        models.push_back(std::move(m));
    }
    return models;
}

}  // namespace ket
