#include "ket/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ket/analytics.hpp"
#include "ket/corpus.hpp"
#include "ket/entanglement.hpp"
#include "ket/errors.hpp"
#include "ket/gateway.hpp"
#include "ket/gazetteer.hpp"
#include "ket/graph_io.hpp"
#include "ket/hash.hpp"
#include "ket/judge.hpp"
#include "ket/prompts.hpp"
#include "ket/stats.hpp"

namespace fs = std::filesystem;

namespace ket {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot read file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    fs::create_directories(fs::path(path).parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot write file: " + path);
    out << content;
}

std::string fmt_double(double x) {
    nlohmann::json j = x;
    return j.dump();
}

struct ResponseRecord {
    std::string response_id;
    std::string prompt_id;
    std::string variant;
    std::string model;
    std::string text;
};

struct JudgedRecord {
    std::string response_id;
    std::string prompt_id;
    std::string variant;
    std::string model;
    EnsembleScore score;
};

struct ScoreRecord {
    EntanglementVector vector;
    std::string variant;
    std::array<double, 9> normalized{};
};

std::vector<ResponseRecord> load_responses(const std::string& path) {
    std::vector<ResponseRecord> out;
    std::istringstream in(read_file(path));
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            auto j = nlohmann::json::parse(line);
            out.push_back({j.at("response_id"), j.at("prompt_id"),
                           j.at("variant"), j.at("model"), j.at("text")});
        } catch (const nlohmann::json::exception& e) {
            throw FormatError(path + " line " + std::to_string(line_no) +
                              ": " + e.what());
        }
    }
    return out;
}

std::vector<JudgedRecord> load_judged(const std::string& path) {
    std::vector<JudgedRecord> out;
    std::istringstream in(read_file(path));
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            auto j = nlohmann::json::parse(line);
            JudgedRecord r;
            r.response_id = j.at("response_id");
            r.prompt_id = j.at("prompt_id");
            r.variant = j.at("variant");
            r.model = j.at("model");
            r.score.response_id = r.response_id;
            for (const auto& v : j.at("verdicts")) {
                JudgeVerdict verdict;
                verdict.judge_model = v.at("judge_model");
                verdict.factual = v.at("factual");
                verdict.non_factual = v.at("non_factual");
                verdict.hallucinated = v.at("hallucinated");
                r.score.verdicts.push_back(std::move(verdict));
            }
            r.score.mean_factual = j.at("final").at("factual");
            r.score.mean_non_factual = j.at("final").at("non_factual");
            r.score.mean_hallucinated = j.at("final").at("hallucinated");
            r.score.escalated = j.at("escalated");
            out.push_back(std::move(r));
        } catch (const nlohmann::json::exception& e) {
            throw FormatError(path + " line " + std::to_string(line_no) +
                              ": " + e.what());
        }
    }
    return out;
}

std::vector<ScoreRecord> load_scores(const std::string& path) {
    std::vector<ScoreRecord> out;
    std::istringstream in(read_file(path));
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            auto j = nlohmann::json::parse(line);
            ScoreRecord r;
            r.vector.prompt_id = j.at("prompt_id");
            r.variant = j.at("variant");
            for (int k = 0; k < 9; ++k) {
                std::string key = "m" + std::to_string(k + 1);
                r.vector.m[k] = j.at(key).get<double>();
                r.normalized[k] = j.at("normalized").at(key).get<double>();
            }
            out.push_back(std::move(r));
        } catch (const nlohmann::json::exception& e) {
            throw FormatError(path + " line " + std::to_string(line_no) +
                              ": " + e.what());
        }
    }
    return out;
}

class ManifestStore {
public:
    explicit ManifestStore(const std::string& path) : path_(path) {
        if (fs::exists(path_)) {
            try {
                doc_ = nlohmann::json::parse(read_file(path_));
            } catch (const nlohmann::json::exception&) {
                doc_ = nlohmann::json::object();  // stale manifest, rebuild
            }
        } else {
            doc_ = nlohmann::json::object();
        }
    }

    bool up_to_date(const std::string& stage,
                    const std::map<std::string, std::string>& inputs,
                    const std::string& params_hash,
                    const std::vector<std::string>& outputs) const {
        if (!doc_.contains(stage)) return false;
        const auto& entry = doc_[stage];
        if (entry.value("params", "") != params_hash) return false;
        auto recorded = entry.value("inputs", nlohmann::json::object());
        if (recorded.size() != inputs.size()) return false;
        for (const auto& [path, hash] : inputs) {
            if (recorded.value(path, "") != hash) return false;
        }
        auto out_rec = entry.value("outputs", nlohmann::json::object());
        for (const auto& path : outputs) {
            if (!fs::exists(path)) return false;
            if (out_rec.value(path, "") != hash_file(path)) return false;
        }
        return true;
    }

    void record(const std::string& stage,
                const std::map<std::string, std::string>& inputs,
                const std::string& params_hash,
                const std::vector<std::string>& outputs,
                std::int64_t elapsed_ms) {
        nlohmann::json entry;
        entry["params"] = params_hash;
        entry["inputs"] = inputs;
        nlohmann::json outs = nlohmann::json::object();
        for (const auto& path : outputs) outs[path] = hash_file(path);
        entry["outputs"] = outs;
        entry["elapsed_ms"] = elapsed_ms;
        doc_[stage] = entry;
        write_file(path_, doc_.dump(2) + "\n");
    }

private:
    std::string path_;
    nlohmann::json doc_;
};

std::unique_ptr<Gateway> make_gateway(const RunConfig& config) {
    if (!config.mock_fixtures.empty()) {
        return std::make_unique<MockGateway>(
            MockGateway::load(config.mock_fixtures));
    }
    HttpGatewayConfig hc;
    hc.base_url = config.gateway_base_url;
    if (hc.base_url.empty()) {
        if (const char* env = std::getenv("LLM_BASE_URL")) hc.base_url = env;
    }
    if (const char* key = std::getenv("LLM_API_KEY")) hc.api_key = key;
    hc.max_inflight = config.max_inflight;
    hc.retry_max = config.retry_max;
    hc.backoff_base_ms = config.backoff_base_ms;
    hc.timeout_ms = config.timeout_ms;
    hc.log_path = (fs::path(config.out_dir) / "gateway_log.jsonl").string();
    return std::make_unique<HttpGateway>(std::move(hc));
}

void require_stage_output(const std::string& path, Stage producer) {
    if (!fs::exists(path)) {
        throw DependencyError("missing output of stage '" +
                              to_string(producer) + "': " + path);
    }
}

}  // namespace

// ---- stage bodies -------------------------------------------------------

namespace stages {

void build_graph(const RunConfig& config, const std::string& out_path) {
    if (config.corpus.empty() || config.gazetteer.empty()) {
        throw ConfigError("build-graph requires paths.corpus and paths.gazetteer");
    }
    std::string raw = read_file(config.corpus);
    Gazetteer gaz = Gazetteer::load(config.gazetteer);
    auto chapters = segment_corpus(raw, config.marker);
    Provenance prov{hash_hex(raw), gaz.content_hash(), config.marker};
    DomainGraph graph = ket::build_graph(chapters, gaz, prov);
    write_file(out_path, graph_to_json(graph));
}

void transform(const RunConfig& config, const std::string& out_path) {
    auto bases = load_base_prompts(config.base_prompts);
    auto gateway = make_gateway(config);

    std::map<Variant, TransformTemplate> templates;
    for (Variant v :
         {Variant::Emotional, Variant::Logical, Variant::Authority}) {
        templates[v] = load_template(
            v, (fs::path(config.templates_dir) / (to_string(v) + ".txt"))
                   .string());
    }

    // Cache keyed by (base_id, technique, template hash): reruns with an
    // unchanged template never re-issue gateway calls.
    const std::string cache_path =
        (fs::path(config.out_dir) / "transform_cache.json").string();
    nlohmann::json cache = nlohmann::json::object();
    if (fs::exists(cache_path)) {
        try {
            cache = nlohmann::json::parse(read_file(cache_path));
        } catch (const nlohmann::json::exception&) {
            cache = nlohmann::json::object();
        }
    }

    std::vector<PromptRecord> all;
    for (const auto& base : bases) {
        all.push_back(base);
        for (Variant v :
             {Variant::Emotional, Variant::Logical, Variant::Authority}) {
            const auto& tmpl = templates[v];
            std::string key =
                base.base_id + "|" + to_string(v) + "|" + tmpl.hash;
            PromptRecord rec;
            if (cache.contains(key)) {
                rec.id = base.base_id + "." + to_string(v);
                rec.base_id = base.base_id;
                rec.variant = v;
                rec.text = cache[key].get<std::string>();
                rec.target_entities = base.target_entities;
                rec.template_hash = tmpl.hash;
            } else {
                rec = transform_prompt(base, v, tmpl, *gateway,
                                       config.transform_model);
                cache[key] = rec.text;
            }
            all.push_back(std::move(rec));
        }
    }
    write_file(cache_path, cache.dump(2) + "\n");
    save_prompts(all, out_path);
}

void annotate(const RunConfig& config, const std::string& prompts_path,
                    const std::string& out_path) {
    Gazetteer gaz = Gazetteer::load(config.gazetteer);
    auto records = load_prompts(prompts_path);
    for (auto& r : records) {
        r = annotate_entities(std::move(r), gaz);
    }
    save_prompts(records, out_path);
}

void generate(const RunConfig& config, const std::string& prompts_path,
                    const std::string& out_path) {
    if (config.target_models.empty()) {
        throw ConfigError("generate requires [generate] models");
    }
    auto records = load_prompts(prompts_path);
    auto gateway = make_gateway(config);
    std::ostringstream out;
    for (const auto& model : config.target_models) {
        for (const auto& r : records) {
            auto wrapped = wrap_instruction(r.text);
            CompletionRequest req;
            req.model = model;
            req.messages = wrapped.messages;
            req.max_new_tokens = 300;
            auto res = gateway->complete(req);
            ordered_json j;
            j["response_id"] = r.id + "@" + model;
            j["prompt_id"] = r.id;
            j["variant"] = to_string(r.variant);
            j["model"] = model;
            j["text"] = res.text;
            out << j.dump() << "\n";
        }
    }
    write_file(out_path, out.str());
}

void judge(const RunConfig& config, const std::string& responses_path,
                 const std::string& out_path) {
    if (config.judge_models.size() != 3 || config.tiebreak_model.empty()) {
        throw ConfigError("judge requires [judge] judges (3) and tiebreak");
    }
    auto responses = load_responses(responses_path);
    auto gateway = make_gateway(config);
    JudgeRunner runner(*gateway, config.judge_models, config.tiebreak_model);
    std::ostringstream out;
    for (const auto& r : responses) {
        EnsembleScore score = runner.evaluate(r.response_id, r.text);
        ordered_json j;
        j["response_id"] = r.response_id;
        j["prompt_id"] = r.prompt_id;
        j["variant"] = r.variant;
        j["model"] = r.model;
        auto verdicts = ordered_json::array();
        for (const auto& v : score.verdicts) {
            verdicts.push_back({{"judge_model", v.judge_model},
                                {"factual", v.factual},
                                {"non_factual", v.non_factual},
                                {"hallucinated", v.hallucinated}});
        }
        j["verdicts"] = std::move(verdicts);
        j["final"] = {{"factual", score.mean_factual},
                      {"non_factual", score.mean_non_factual},
                      {"hallucinated", score.mean_hallucinated}};
        j["escalated"] = score.escalated;
        out << j.dump() << "\n";
    }
    write_file(out_path, out.str());
}

void score(const RunConfig& config, const std::string& graph_path,
                 const std::string& prompts_path,
                 const std::string& out_path) {
    if (config.reference_nodes.empty()) {
        throw ConfigError("score requires [dwis] refs");
    }
    DomainGraph graph = load_graph(graph_path);
    auto records = load_prompts(prompts_path);
    DwisConfig cfg{config.reference_nodes, config.delta};

    std::vector<EntanglementVector> vectors;
    std::vector<std::string> variants;
    for (const auto& r : records) {
        EntanglementVector v;
        try {
            v = entanglement_vector(graph, r.id, r.entities, cfg);
        } catch (const EmptySubgraph&) {
            // Sparse prompts flow through flagged, not fatal.
            v.prompt_id = r.id;
            v.flags.insert(MetricFlag::EmptySubgraph);
        }
        vectors.push_back(std::move(v));
        variants.push_back(to_string(r.variant));
    }
    auto normalized = normalize_scores(vectors);

    std::ostringstream out;
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        ordered_json j;
        j["prompt_id"] = vectors[i].prompt_id;
        j["variant"] = variants[i];
        for (int k = 0; k < 9; ++k) {
            j["m" + std::to_string(k + 1)] = vectors[i].m[k];
        }
        auto flags = ordered_json::array();
        for (auto f : vectors[i].flags) flags.push_back(to_string(f));
        for (int k = 0; k < 9; ++k) {
            if (normalized.constant_metric[k]) {
                flags.push_back("CONSTANT_METRIC_M" + std::to_string(k + 1));
                break;  // one marker per record is enough to audit
            }
        }
        j["flags"] = std::move(flags);
        ordered_json norm;
        for (int k = 0; k < 9; ++k) {
            norm["m" + std::to_string(k + 1)] = normalized.values[i][k];
        }
        j["normalized"] = std::move(norm);
        out << j.dump() << "\n";
    }
    write_file(out_path, out.str());
}

static std::vector<ScoredResponse> join_scored(const std::vector<JudgedRecord>& judged) {
    std::vector<ScoredResponse> out;
    out.reserve(judged.size());
    for (const auto& r : judged) {
        out.push_back({r.response_id, r.prompt_id, r.variant, r.model, r.score});
    }
    return out;
}

void correlate(const std::string& scores_path,
                     const std::string& judged_path,
                     const std::string& json_out,
                     const std::string& csv_out) {
    auto scores = load_scores(scores_path);
    auto judged = load_judged(judged_path);
    std::vector<EntanglementVector> vectors;
    for (const auto& s : scores) vectors.push_back(s.vector);
    auto report = correlation_report(vectors, join_scored(judged));
    write_file(json_out, report.to_json());
    write_file(csv_out, report.to_csv());
}

static int default_metric_for(Behavior b) {
    switch (b) {
        case Behavior::Factual: return 9;
        case Behavior::NonFactual: return 4;
        case Behavior::Hallucination: return 3;
    }
    return 9;
}

void fit(const RunConfig& config, const std::string& scores_path,
               const std::string& judged_path, const std::string& out_path) {
    auto scores = load_scores(scores_path);
    auto judged = load_judged(judged_path);
    std::map<std::string, const ScoreRecord*> by_prompt;
    for (const auto& s : scores) by_prompt[s.vector.prompt_id] = &s;

    std::vector<RegressionModel> models;
    for (Behavior b : {Behavior::Factual, Behavior::NonFactual,
                       Behavior::Hallucination}) {
        int metric = default_metric_for(b);
        std::vector<double> xs;
        std::vector<int> ys;
        for (const auto& r : judged) {
            auto it = by_prompt.find(r.prompt_id);
            if (it == by_prompt.end()) continue;
            xs.push_back(it->second->vector.m[metric - 1]);
            auto labels = label_response(r.score);
            ys.push_back(labels[static_cast<int>(b)]);
        }
        models.push_back(fit_logistic(xs, ys, config.split_seed, b, metric));
    }
    write_file(out_path, models_to_json(models));
}

static RegressionModel pick_model(const std::vector<RegressionModel>& models,
                           Behavior behavior) {
    for (const auto& m : models) {
        if (m.behavior == behavior) return m;
    }
    throw FormatError("models file lacks a '" + to_string(behavior) +
                      "' model");
}

void predict(const std::string& models_path,
                   const std::string& scores_path,
                   const std::string& out_path) {
    auto models = models_from_json(read_file(models_path));
    auto model = pick_model(models, Behavior::Factual);
    auto scores = load_scores(scores_path);
    std::ostringstream out;
    for (const auto& s : scores) {
        ordered_json j;
        j["prompt_id"] = s.vector.prompt_id;
        j["probability"] = predict(model, s.vector.m[model.metric_id - 1]);
        out << j.dump() << "\n";
    }
    write_file(out_path, out.str());
}

void filter(const RunConfig& config, const std::string& models_path,
                  const std::string& scores_path,
                  const std::string& out_path) {
    auto models = models_from_json(read_file(models_path));
    auto model = pick_model(models, Behavior::Factual);
    auto scores = load_scores(scores_path);
    std::vector<EntanglementVector> vectors;
    for (const auto& s : scores) vectors.push_back(s.vector);

    double threshold = config.risk_threshold
                           ? *config.risk_threshold
                           : percentile_threshold(vectors, model, 0.9);
    auto assessments = risk_filter(vectors, model, threshold);

    ordered_json doc;
    doc["threshold"] = threshold;
    doc["flagged"] = ordered_json::array();
    doc["all"] = ordered_json::array();
    for (const auto& a : assessments) {
        ordered_json j{{"prompt_id", a.prompt_id},
                       {"probability", a.probability}};
        if (a.flagged) doc["flagged"].push_back(j);
        doc["all"].push_back(std::move(j));
    }
    write_file(out_path, doc.dump(2) + "\n");
}

void report(const RunConfig& config, const std::string& scores_path,
                  const std::string& judged_path,
                  const std::string& corr_csv_path,
                  const std::string& models_path,
                  const std::string& report_dir) {
    auto scores = load_scores(scores_path);
    auto judged = load_judged(judged_path);
    auto models = models_from_json(read_file(models_path));

    fs::create_directories(report_dir);
    std::vector<std::string> files;

    // Correlation table (metric x model x behavior).
    std::string corr_out = (fs::path(report_dir) / "correlations.csv").string();
    write_file(corr_out, read_file(corr_csv_path));
    files.push_back("correlations.csv");

    // Fitted model table: behavior, metric, coefficients, Wald stats.
    {
        std::ostringstream out;
        out << "behavior,metric,intercept,coefficient,intercept_std_err,"
               "coef_std_err,intercept_z,coef_z,intercept_p,coef_p,"
               "test_accuracy\n";
        for (const auto& m : models) {
            out << to_string(m.behavior) << ",M" << m.metric_id << ","
                << fmt_double(m.intercept) << "," << fmt_double(m.coefficient);
            if (m.fit_stats) {
                const auto& s = *m.fit_stats;
                out << "," << fmt_double(s.intercept_std_err) << ","
                    << fmt_double(s.coef_std_err) << ","
                    << fmt_double(s.intercept_z) << "," << fmt_double(s.coef_z)
                    << "," << fmt_double(s.intercept_p) << ","
                    << fmt_double(s.coef_p) << ","
                    << fmt_double(s.test_accuracy);
            } else {
                out << ",,,,,,,";
            }
            out << "\n";
        }
        write_file((fs::path(report_dir) / "models.csv").string(), out.str());
        files.push_back("models.csv");
    }

    // Mean normalized entanglement per technique, one row per variant.
    {
        std::map<std::string, std::array<double, 9>> sums;
        std::map<std::string, std::size_t> counts;
        for (const auto& s : scores) {
            auto& acc = sums[s.variant];
            for (int k = 0; k < 9; ++k) acc[k] += s.normalized[k];
            ++counts[s.variant];
        }
        std::ostringstream out;
        out << "variant";
        for (int k = 1; k <= 9; ++k) out << ",m" << k;
        out << ",n\n";
        for (const auto& [variant, acc] : sums) {
            out << variant;
            for (int k = 0; k < 9; ++k) {
                out << "," << fmt_double(acc[k] / counts[variant]);
            }
            out << "," << counts[variant] << "\n";
        }
        write_file(
            (fs::path(report_dir) / "entanglement_by_technique.csv").string(),
            out.str());
        files.push_back("entanglement_by_technique.csv");
    }

    // Technique effectiveness: mean judged percentages per (model, variant).
    {
        std::map<std::pair<std::string, std::string>, std::array<double, 3>>
            sums;
        std::map<std::pair<std::string, std::string>, std::size_t> counts;
        for (const auto& r : judged) {
            auto key = std::make_pair(r.model, r.variant);
            auto& acc = sums[key];
            acc[0] += r.score.mean_factual;
            acc[1] += r.score.mean_non_factual;
            acc[2] += r.score.mean_hallucinated;
            ++counts[key];
        }
        std::ostringstream out;
        out << "model,variant,factual,non_factual,hallucinated,n\n";
        for (const auto& [key, acc] : sums) {
            std::size_t n = counts[key];
            out << key.first << "," << key.second << ","
                << fmt_double(acc[0] / n) << "," << fmt_double(acc[1] / n)
                << "," << fmt_double(acc[2] / n) << "," << n << "\n";
        }
        write_file(
            (fs::path(report_dir) / "technique_effectiveness.csv").string(),
            out.str());
        files.push_back("technique_effectiveness.csv");
    }

    ordered_json bundle;
    bundle["files"] = files;
    bundle["prompts"] = scores.size();
    bundle["responses"] = judged.size();
    write_file((fs::path(report_dir) / "report.json").string(),
               bundle.dump(2) + "\n");
}

}  // namespace stages

std::string to_string(Stage s) {
    switch (s) {
        case Stage::BuildGraph: return "build-graph";
        case Stage::Transform: return "transform";
        case Stage::Annotate: return "annotate";
        case Stage::Generate: return "generate";
        case Stage::Judge: return "judge";
        case Stage::Score: return "score";
        case Stage::Correlate: return "correlate";
        case Stage::Fit: return "fit";
        case Stage::Predict: return "predict";
        case Stage::Filter: return "filter";
        case Stage::Report: return "report";
    }
    return "?";
}

Stage stage_from_string(const std::string& s) {
    for (Stage stage : all_stages()) {
        if (to_string(stage) == s) return stage;
    }
    throw ConfigError("unknown stage: " + s);
}

std::vector<Stage> all_stages() {
    return {Stage::BuildGraph, Stage::Transform, Stage::Annotate,
            Stage::Generate,   Stage::Judge,     Stage::Score,
            Stage::Correlate,  Stage::Fit,       Stage::Predict,
            Stage::Filter,     Stage::Report};
}

std::string stage_output(const RunConfig& config, Stage stage) {
    fs::path out(config.out_dir);
    switch (stage) {
        case Stage::BuildGraph: return (out / "graph.json").string();
        case Stage::Transform: return (out / "prompts.jsonl").string();
        case Stage::Annotate: return (out / "prompts_annotated.jsonl").string();
        case Stage::Generate: return (out / "responses.jsonl").string();
        case Stage::Judge: return (out / "judged.jsonl").string();
        case Stage::Score: return (out / "scores.jsonl").string();
        case Stage::Correlate: return (out / "correlations.json").string();
        case Stage::Fit: return (out / "models.json").string();
        case Stage::Predict: return (out / "predictions.jsonl").string();
        case Stage::Filter: return (out / "flagged.json").string();
        case Stage::Report: return (out / "report" / "report.json").string();
    }
    return {};
}

RunManifest run_pipeline(const RunConfig& config,
                         const std::vector<Stage>& requested) {
    config.validate();
    fs::create_directories(config.out_dir);
    ManifestStore manifest((fs::path(config.out_dir) / "manifest.json").string());

    // Dependency order is the declaration order of all_stages().
    std::set<Stage> wanted(requested.begin(), requested.end());
    RunManifest result;

    const std::string corr_csv =
        (fs::path(config.out_dir) / "correlations.csv").string();
    const std::string report_dir =
        (fs::path(config.out_dir) / "report").string();

    for (Stage stage : all_stages()) {
        if (!wanted.count(stage)) continue;

        std::map<std::string, std::string> inputs;
        std::vector<std::string> outputs{stage_output(config, stage)};
        std::string params;

        auto need = [&](Stage dep) {
            std::string path = stage_output(config, dep);
            require_stage_output(path, dep);
            inputs[path] = hash_file(path);
            return path;
        };
        auto file_input = [&](const std::string& path, const char* what) {
            if (path.empty() || !fs::exists(path)) {
                throw ConfigError(std::string(what) + " not found: " + path);
            }
            inputs[path] = hash_file(path);
            return path;
        };

        std::function<void()> body;
        switch (stage) {
            case Stage::BuildGraph: {
                file_input(config.corpus, "corpus");
                file_input(config.gazetteer, "gazetteer");
                params = config.marker;
                body = [&] { stages::build_graph(config, outputs[0]); };
                break;
            }
            case Stage::Transform: {
                file_input(config.base_prompts, "base prompts");
                for (Variant v : {Variant::Emotional, Variant::Logical,
                                  Variant::Authority}) {
                    file_input((fs::path(config.templates_dir) /
                                (to_string(v) + ".txt"))
                                   .string(),
                               "template");
                }
                if (!config.mock_fixtures.empty()) {
                    file_input(config.mock_fixtures, "fixtures");
                }
                params = config.transform_model;
                body = [&] { stages::transform(config, outputs[0]); };
                break;
            }
            case Stage::Annotate: {
                std::string prompts = need(Stage::Transform);
                file_input(config.gazetteer, "gazetteer");
                body = [&, prompts] {
                    stages::annotate(config, prompts, outputs[0]);
                };
                break;
            }
            case Stage::Generate: {
                std::string prompts = need(Stage::Annotate);
                if (!config.mock_fixtures.empty()) {
                    file_input(config.mock_fixtures, "fixtures");
                }
                for (const auto& m : config.target_models) params += m + ",";
                body = [&, prompts] {
                    stages::generate(config, prompts, outputs[0]);
                };
                break;
            }
            case Stage::Judge: {
                std::string responses = need(Stage::Generate);
                if (!config.mock_fixtures.empty()) {
                    file_input(config.mock_fixtures, "fixtures");
                }
                for (const auto& m : config.judge_models) params += m + ",";
                params += config.tiebreak_model;
                body = [&, responses] {
                    stages::judge(config, responses, outputs[0]);
                };
                break;
            }
            case Stage::Score: {
                std::string graph = need(Stage::BuildGraph);
                std::string prompts = need(Stage::Annotate);
                for (EntityId id : config.reference_nodes) {
                    params += std::to_string(id) + ",";
                }
                params += fmt_double(config.delta);
                body = [&, graph, prompts] {
                    stages::score(config, graph, prompts, outputs[0]);
                };
                break;
            }
            case Stage::Correlate: {
                std::string scores = need(Stage::Score);
                std::string judged = need(Stage::Judge);
                outputs.push_back(corr_csv);
                body = [&, scores, judged] {
                    stages::correlate(scores, judged, outputs[0], outputs[1]);
                };
                break;
            }
            case Stage::Fit: {
                std::string scores = need(Stage::Score);
                std::string judged = need(Stage::Judge);
                params = std::to_string(config.split_seed);
                body = [&, scores, judged] {
                    stages::fit(config, scores, judged, outputs[0]);
                };
                break;
            }
            case Stage::Predict: {
                std::string models = need(Stage::Fit);
                std::string scores = need(Stage::Score);
                body = [&, models, scores] {
                    stages::predict(models, scores, outputs[0]);
                };
                break;
            }
            case Stage::Filter: {
                std::string models = need(Stage::Fit);
                std::string scores = need(Stage::Score);
                params = config.risk_threshold
                             ? fmt_double(*config.risk_threshold)
                             : "p90";
                body = [&, models, scores] {
                    stages::filter(config, models, scores, outputs[0]);
                };
                break;
            }
            case Stage::Report: {
                std::string scores = need(Stage::Score);
                std::string judged = need(Stage::Judge);
                need(Stage::Correlate);
                std::string models = need(Stage::Fit);
                if (!fs::exists(corr_csv)) {
                    throw DependencyError(
                        "missing output of stage 'correlate': " + corr_csv);
                }
                inputs[corr_csv] = hash_file(corr_csv);
                outputs = {
                    (fs::path(report_dir) / "report.json").string(),
                    (fs::path(report_dir) / "correlations.csv").string(),
                    (fs::path(report_dir) / "models.csv").string(),
                    (fs::path(report_dir) / "entanglement_by_technique.csv")
                        .string(),
                    (fs::path(report_dir) / "technique_effectiveness.csv")
                        .string(),
                };
                body = [&, scores, judged, models] {
                    stages::report(config, scores, judged, corr_csv,
                                   models, report_dir);
                };
                break;
            }
        }

        std::string params_hash = hash_hex(params);
        StageResult sr;
        sr.stage = stage;
        sr.outputs = outputs;
        if (manifest.up_to_date(to_string(stage), inputs, params_hash,
                                outputs)) {
            sr.skipped = true;
            result.stages.push_back(std::move(sr));
            continue;
        }
        auto t0 = std::chrono::steady_clock::now();
        body();
        sr.elapsed_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                            std::chrono::steady_clock::now() - t0)
                            .count();
        manifest.record(to_string(stage), inputs, params_hash, outputs,
                        sr.elapsed_ms);
        result.stages.push_back(std::move(sr));
    }
    return result;
}

}  // namespace ket
