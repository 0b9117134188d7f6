// Command-line front end for the knowledge-entanglement toolkit: builds
// co-occurrence graphs, scores prompt subgraphs, drives the generation and
// judging pipeline, and fits/applies leak-risk predictors.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ket/config.hpp"
#include "ket/errors.hpp"
#include "ket/pipeline.hpp"

namespace fs = std::filesystem;

namespace {

struct CliOptions {
    std::string config_path;
    std::string mock_fixtures;
    ket::RunConfig config;

    // Explicit per-command path overrides.
    std::string corpus, gazetteer, marker, out, graph, prompts, refs;
    std::string responses, judges, tiebreak, techniques, scores, models;
    std::string judged, input;
    double delta = -1.0;
    double threshold = -1.0;

    ket::RunConfig resolve() {
        ket::RunConfig c = config_path.empty()
                               ? ket::RunConfig{}
                               : ket::RunConfig::from_file(config_path);
        if (!mock_fixtures.empty()) c.mock_fixtures = mock_fixtures;
        if (!corpus.empty()) c.corpus = corpus;
        if (!gazetteer.empty()) c.gazetteer = gazetteer;
        if (!marker.empty()) c.marker = marker;
        if (!out.empty()) c.out_dir = out;
        if (!prompts.empty()) c.base_prompts = prompts;
        if (!refs.empty()) {
            if (fs::exists(refs)) {
                std::ifstream in(refs);
                std::string all((std::istreambuf_iterator<char>(in)),
                                std::istreambuf_iterator<char>());
                c.reference_nodes = ket::parse_id_list(all);
            } else {
                c.reference_nodes = ket::parse_id_list(refs);
            }
        }
        if (delta > 0.0) c.delta = delta;
        if (!judges.empty()) c.judge_models = ket::split_csv(judges);
        if (!tiebreak.empty()) c.tiebreak_model = tiebreak;
        if (threshold > 0.0) c.risk_threshold = threshold;
        return c;
    }
};

std::string out_or(const std::string& explicit_out, const ket::RunConfig& c,
                   ket::Stage stage) {
    return explicit_out.empty() ? ket::stage_output(c, stage) : explicit_out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"knowledge-entanglement toolkit"};
    app.require_subcommand(1);
    app.fallthrough();  // accept --config/--mock-gateway after the subcommand

    CliOptions opt;
    app.add_option("--config", opt.config_path, "run configuration file");
    app.add_option("--mock-gateway", opt.mock_fixtures,
                   "fixtures file; selects the offline mock gateway");

    auto* build = app.add_subcommand("build-graph",
                                     "build the co-occurrence domain graph");
    build->add_option("--corpus", opt.corpus, "corpus text file");
    build->add_option("--gazetteer", opt.gazetteer, "entity gazetteer JSON");
    build->add_option("--marker", opt.marker, "chapter marker pattern");
    build->add_option("--out", opt.out, "output graph path");

    auto* transform = app.add_subcommand(
        "transform", "generate persuasive prompt variants");
    transform->add_option("--prompts", opt.prompts, "base prompts JSONL");
    transform->add_option("--techniques", opt.techniques,
                          "comma list (emo,logic,auth); default all");
    transform->add_option("--templates", opt.input, "templates directory");
    transform->add_option("--out", opt.out, "output prompts JSONL");

    auto* annotate =
        app.add_subcommand("annotate", "attach mentioned-entity sets");
    annotate->add_option("--prompts", opt.prompts, "prompts JSONL");
    annotate->add_option("--gazetteer", opt.gazetteer, "gazetteer JSON");
    annotate->add_option("--out", opt.out, "output prompts JSONL");

    auto* generate =
        app.add_subcommand("generate", "query target models for responses");
    generate->add_option("--prompts", opt.prompts, "annotated prompts JSONL");
    generate->add_option("--models", opt.models, "comma list of models");
    generate->add_option("--out", opt.out, "responses JSONL");

    auto* judge = app.add_subcommand("judge", "score responses with the ensemble");
    judge->add_option("--responses", opt.responses, "responses JSONL");
    judge->add_option("--judges", opt.judges, "three judge models");
    judge->add_option("--tiebreak", opt.tiebreak, "tie-break model");
    judge->add_option("--out", opt.out, "judged JSONL");

    auto* score =
        app.add_subcommand("score", "compute entanglement metrics per prompt");
    score->add_option("--graph", opt.graph, "domain graph file");
    score->add_option("--prompts", opt.prompts, "annotated prompts JSONL");
    score->add_option("--refs", opt.refs, "reference entity ids or file");
    score->add_option("--delta", opt.delta, "DWIS decay factor in (0,1)");
    score->add_option("--out", opt.out, "scores JSONL");

    auto* correlate = app.add_subcommand(
        "correlate", "metric/behavior Pearson correlation table");
    correlate->add_option("--scores", opt.scores, "scores JSONL");
    correlate->add_option("--judged", opt.judged, "judged JSONL");
    correlate->add_option("--out", opt.out, "output JSON (CSV beside it)");

    auto* fit =
        app.add_subcommand("fit", "fit per-behavior logistic predictors");
    fit->add_option("--scores", opt.scores, "scores JSONL");
    fit->add_option("--judged", opt.judged, "judged JSONL");
    fit->add_option("--out", opt.out, "models JSON");

    auto* predict = app.add_subcommand(
        "predict", "apply the factual-leak model to scored prompts");
    predict->add_option("--models", opt.models, "models JSON");
    predict->add_option("--scores", opt.scores, "scores JSONL");
    predict->add_option("--out", opt.out, "predictions JSONL");

    auto* filter =
        app.add_subcommand("filter", "flag prompts above the risk threshold");
    filter->add_option("--models", opt.models, "models JSON");
    filter->add_option("--scores", opt.scores, "scores JSONL");
    filter->add_option("--threshold", opt.threshold,
                       "leak probability threshold (default: 90th percentile)");
    filter->add_option("--out", opt.out, "flagged prompts JSON");

    auto* report =
        app.add_subcommand("report", "emit the CSV/JSON report bundle");
    report->add_option("--out", opt.out, "run output directory");

    auto* run = app.add_subcommand("run", "run the full pipeline");
    std::vector<std::string> stage_names;
    run->add_option("--stages", stage_names,
                    "subset of stages (default: all)")->delimiter(',');

    CLI11_PARSE(app, argc, argv);

    try {
        ket::RunConfig c = opt.resolve();
        c.validate();
        const auto out_path = [&](ket::Stage s) { return out_or(opt.out, c, s); };

        if (build->parsed()) {
            ket::stages::build_graph(c, out_path(ket::Stage::BuildGraph));
        } else if (transform->parsed()) {
            if (!opt.input.empty()) c.templates_dir = opt.input;
            ket::stages::transform(c, out_path(ket::Stage::Transform));
        } else if (annotate->parsed()) {
            std::string in = opt.prompts.empty()
                                 ? ket::stage_output(c, ket::Stage::Transform)
                                 : opt.prompts;
            ket::stages::annotate(c, in, out_path(ket::Stage::Annotate));
        } else if (generate->parsed()) {
            if (!opt.models.empty()) c.target_models = ket::split_csv(opt.models);
            std::string in = opt.prompts.empty()
                                 ? ket::stage_output(c, ket::Stage::Annotate)
                                 : opt.prompts;
            ket::stages::generate(c, in, out_path(ket::Stage::Generate));
        } else if (judge->parsed()) {
            std::string in = opt.responses.empty()
                                 ? ket::stage_output(c, ket::Stage::Generate)
                                 : opt.responses;
            ket::stages::judge(c, in, out_path(ket::Stage::Judge));
        } else if (score->parsed()) {
            std::string graph = opt.graph.empty()
                                    ? ket::stage_output(c, ket::Stage::BuildGraph)
                                    : opt.graph;
            std::string in = opt.prompts.empty()
                                 ? ket::stage_output(c, ket::Stage::Annotate)
                                 : opt.prompts;
            ket::stages::score(c, graph, in, out_path(ket::Stage::Score));
        } else if (correlate->parsed()) {
            std::string scores_in = opt.scores.empty()
                                        ? ket::stage_output(c, ket::Stage::Score)
                                        : opt.scores;
            std::string judged_in = opt.judged.empty()
                                        ? ket::stage_output(c, ket::Stage::Judge)
                                        : opt.judged;
            std::string json_out = out_path(ket::Stage::Correlate);
            std::string csv_out =
                (fs::path(json_out).parent_path() / "correlations.csv").string();
            ket::stages::correlate(scores_in, judged_in, json_out, csv_out);
        } else if (fit->parsed()) {
            std::string scores_in = opt.scores.empty()
                                        ? ket::stage_output(c, ket::Stage::Score)
                                        : opt.scores;
            std::string judged_in = opt.judged.empty()
                                        ? ket::stage_output(c, ket::Stage::Judge)
                                        : opt.judged;
            ket::stages::fit(c, scores_in, judged_in, out_path(ket::Stage::Fit));
        } else if (predict->parsed()) {
            std::string models_in = opt.models.empty()
                                        ? ket::stage_output(c, ket::Stage::Fit)
                                        : opt.models;
            std::string scores_in = opt.scores.empty()
                                        ? ket::stage_output(c, ket::Stage::Score)
                                        : opt.scores;
            ket::stages::predict(models_in, scores_in,
                                 out_path(ket::Stage::Predict));
        } else if (filter->parsed()) {
            std::string models_in = opt.models.empty()
                                        ? ket::stage_output(c, ket::Stage::Fit)
                                        : opt.models;
            std::string scores_in = opt.scores.empty()
                                        ? ket::stage_output(c, ket::Stage::Score)
                                        : opt.scores;
            ket::stages::filter(c, models_in, scores_in,
                                out_path(ket::Stage::Filter));
        } else if (report->parsed()) {
            if (!opt.out.empty()) c.out_dir = opt.out;
            ket::stages::report(
                c, ket::stage_output(c, ket::Stage::Score),
                ket::stage_output(c, ket::Stage::Judge),
                (fs::path(c.out_dir) / "correlations.csv").string(),
                ket::stage_output(c, ket::Stage::Fit),
                (fs::path(c.out_dir) / "report").string());
        } else if (run->parsed()) {
            std::vector<ket::Stage> stages;
            if (stage_names.empty()) {
                stages = ket::all_stages();
            } else {
                for (const auto& name : stage_names) {
                    stages.push_back(ket::stage_from_string(name));
                }
            }
            auto manifest = ket::run_pipeline(c, stages);
            for (const auto& s : manifest.stages) {
                std::cout << ket::to_string(s.stage) << ": "
                          << (s.skipped ? "skipped (up to date)"
                                        : std::to_string(s.elapsed_ms) + " ms")
                          << "\n";
            }
        }
    } catch (const ket::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
