#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace litmine {

struct ExternalCorpusRef {
  std::string tag;
  std::filesystem::path path;
};

struct PipelineConfig {
  std::filesystem::path corpus;
  std::vector<ExternalCorpusRef> external_corpora;
  std::filesystem::path blacklist;
  std::filesystem::path lexicon;  // optional; empty means built-in rules only
  std::filesystem::path output_dir = "out";

  int min_chars = 100;
  std::optional<int> year_min;
  std::optional<int> year_max;

  double max_df_frac = 0.20;
  long long min_total = 300;
  double min_mean_score = 0.015;

  int window = 10;
  int max_phrase_len = 4;

  int K = 0;                // used when k_grid is empty
  std::vector<int> k_grid;  // non-empty: pick K by coherence first
  int n_runs = 10;
  std::uint64_t base_seed = 42;
  double alpha = 0.0;  // 0 means 1/K
  double eta = 0.0;    // 0 means 1/K
  int max_iters = 100;
  double tol = 1e-5;
  int top_m = 10;

  double relevance_lambda = 0.6;
  double relevance_threshold = -2.5;
  double strong_doc_threshold = 0.5;
  double ri_offset = 0.05;
  std::string cagr_period = "intervals";  // or "years"

  long long min_cites = 10;
  double min_inference = 0.2;
  int min_papers = 3;
  int reference_year = 2021;
  std::vector<double> sweep_thresholds = {0.01, 0.1, 0.2, 0.3, 0.5};

  std::vector<int> excluded_topic_ids;
  int bootstrap_b = 1000;
  int histogram_bins = 20;
  double exploratory_tcs_max = 700.0;
};

PipelineConfig load_config(const std::filesystem::path& path);
std::string config_to_json(const PipelineConfig& config);

// Checks paths and numeric ranges; throws std::runtime_error with a
// config-level message before any compute happens.
void validate_config(const PipelineConfig& config);

enum class Stage {
  Ingest,
  Terms,
  Vocab,
  Train,
  Infer,
  Metrics,
  Stability,
  Citations,
  Correlate,
  Report,
};

const std::vector<Stage>& all_stages();
std::string stage_name(Stage stage);
Stage stage_from_name(const std::string& name);

// Runs one stage against the artifacts in config.output_dir. Refuses to run
// when a recorded input checksum no longer matches (stale artifact) unless
// force is set. Throws with the stage name on failure.
void run_stage(Stage stage, const PipelineConfig& config, bool force = false);

// All stages in order.
void run_pipeline(const PipelineConfig& config, bool force = false);

}  // namespace litmine
