#pragma once

#include <string>
#include <vector>

#include "ket/config.hpp"

namespace ket {

enum class Stage {
    BuildGraph,
    Transform,
    Annotate,
    Generate,
    Judge,
    Score,
    Correlate,
    Fit,
    Predict,
    Filter,
    Report,
};

std::string to_string(Stage s);
Stage stage_from_string(const std::string& s);
std::vector<Stage> all_stages();

struct StageResult {
    Stage stage = Stage::BuildGraph;
    bool skipped = false;  // inputs unchanged, outputs already present
    std::vector<std::string> outputs;
    std::int64_t elapsed_ms = 0;
};

struct RunManifest {
    std::vector<StageResult> stages;
};

// Executes the requested stages in dependency order. Content-hash manifest
// (manifest.json in out_dir) makes unchanged reruns no-ops. Throws
// DependencyError naming the missing stage when a prerequisite output is
// absent.
RunManifest run_pipeline(const RunConfig& config,
                         const std::vector<Stage>& stages);

// Stage output paths within config.out_dir.
std::string stage_output(const RunConfig& config, Stage stage);

// Individual stage entry points with explicit paths; run_pipeline wires
// these together with manifest-based caching on top.
namespace stages {

void build_graph(const RunConfig& config, const std::string& out_path);
void transform(const RunConfig& config, const std::string& out_path);
void annotate(const RunConfig& config, const std::string& prompts_path,
              const std::string& out_path);
void generate(const RunConfig& config, const std::string& prompts_path,
              const std::string& out_path);
void judge(const RunConfig& config, const std::string& responses_path,
           const std::string& out_path);
void score(const RunConfig& config, const std::string& graph_path,
           const std::string& prompts_path, const std::string& out_path);
void correlate(const std::string& scores_path, const std::string& judged_path,
               const std::string& json_out, const std::string& csv_out);
void fit(const RunConfig& config, const std::string& scores_path,
         const std::string& judged_path, const std::string& out_path);
void predict(const std::string& models_path, const std::string& scores_path,
             const std::string& out_path);
void filter(const RunConfig& config, const std::string& models_path,
            const std::string& scores_path, const std::string& out_path);
void report(const RunConfig& config, const std::string& scores_path,
            const std::string& judged_path, const std::string& corr_csv_path,
            const std::string& models_path, const std::string& report_dir);

}  // namespace stages

}  // namespace ket
