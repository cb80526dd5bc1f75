#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "litmine/pipeline.hpp"

namespace {

// CLI flags mirror the config-file fields; a flag given on the command line
// wins over the file value.
struct Overrides {
  std::optional<std::string> corpus, blacklist, lexicon, output_dir, cagr_period;
  std::vector<std::string> external;  // tag=path
  std::optional<int> min_chars, year_min, year_max, window, max_phrase_len, K, n_runs,
      max_iters, top_m, min_papers, reference_year, bootstrap_b, histogram_bins;
  std::optional<double> max_df_frac, min_mean_score, alpha, eta, tol, relevance_lambda,
      relevance_threshold, strong_doc_threshold, ri_offset, min_inference,
      exploratory_tcs_max;
  std::optional<long long> min_total, min_cites;
  std::optional<std::uint64_t> base_seed;
  std::vector<int> k_grid, excluded_topic_ids;
  std::vector<double> sweep_thresholds;
};

void add_config_options(CLI::App* sub, Overrides& o) {
  sub->add_option("--corpus", o.corpus, "literature documents.jsonl");
  sub->add_option("--external", o.external,
                  "external corpus as tag=path (repeatable)");
  sub->add_option("--blacklist", o.blacklist, "blacklist.txt path");
  sub->add_option("--lexicon", o.lexicon, "lexicon.txt path");
  sub->add_option("--output_dir", o.output_dir, "artifact directory");
  sub->add_option("--min_chars", o.min_chars, "minimum cleaned body length");
  sub->add_option("--year_min", o.year_min, "lowest accepted literature year");
  sub->add_option("--year_max", o.year_max, "highest accepted literature year");
  sub->add_option("--max_df_frac", o.max_df_frac, "vocab document-frequency cap");
  sub->add_option("--min_total", o.min_total, "vocab total-occurrence floor");
  sub->add_option("--min_mean_score", o.min_mean_score, "vocab mean-score floor");
  sub->add_option("--window", o.window, "co-occurrence window");
  sub->add_option("--max_phrase_len", o.max_phrase_len, "phrase length cap");
  sub->add_option("--K", o.K, "topic count");
  sub->add_option("--k_grid", o.k_grid, "candidate topic counts");
  sub->add_option("--n_runs", o.n_runs, "number of seeded runs");
  sub->add_option("--base_seed", o.base_seed, "seed for run 0");
  sub->add_option("--alpha", o.alpha, "document-topic prior (0 = 1/K)");
  sub->add_option("--eta", o.eta, "topic-term prior (0 = 1/K)");
  sub->add_option("--max_iters", o.max_iters, "training iteration cap");
  sub->add_option("--tol", o.tol, "relative bound change for convergence");
  sub->add_option("--top_m", o.top_m, "coherence top-term count");
  sub->add_option("--relevance_lambda", o.relevance_lambda, "relevance blend weight");
  sub->add_option("--relevance_threshold", o.relevance_threshold,
                  "strong-term relevance floor");
  sub->add_option("--strong_doc_threshold", o.strong_doc_threshold,
                  "strong-doc inference floor");
  sub->add_option("--ri_offset", o.ri_offset, "growth-rate offset");
  sub->add_option("--cagr_period", o.cagr_period, "'intervals' or 'years'");
  sub->add_option("--min_cites", o.min_cites, "citation floor for impact stats");
  sub->add_option("--min_inference", o.min_inference, "paper inference floor");
  sub->add_option("--min_papers", o.min_papers, "surviving-paper floor per topic");
  sub->add_option("--reference_year", o.reference_year, "citation extraction year");
  sub->add_option("--sweep_thresholds", o.sweep_thresholds,
                  "inference thresholds for the sweep");
  sub->add_option("--excluded_topic_ids", o.excluded_topic_ids,
                  "topics dropped before metric export");
  sub->add_option("--bootstrap_b", o.bootstrap_b, "bootstrap resample count");
  sub->add_option("--histogram_bins", o.histogram_bins, "stability histogram bins");
  sub->add_option("--exploratory_tcs_max", o.exploratory_tcs_max,
                  "scatter exploratory-region cap");
}

void apply_overrides(litmine::PipelineConfig& cfg, const Overrides& o) {
  if (o.corpus) cfg.corpus = *o.corpus;
  if (!o.external.empty()) {
    cfg.external_corpora.clear();
    for (const auto& entry : o.external) {
      const auto eq = entry.find('=');
      if (eq == std::string::npos || eq == 0 || eq + 1 == entry.size())
        throw std::runtime_error("--external expects tag=path, got: " + entry);
      cfg.external_corpora.push_back({entry.substr(0, eq), entry.substr(eq + 1)});
    }
  }
  if (o.blacklist) cfg.blacklist = *o.blacklist;
  if (o.lexicon) cfg.lexicon = *o.lexicon;
  if (o.output_dir) cfg.output_dir = *o.output_dir;
  if (o.min_chars) cfg.min_chars = *o.min_chars;
  if (o.year_min) cfg.year_min = *o.year_min;
  if (o.year_max) cfg.year_max = *o.year_max;
  if (o.max_df_frac) cfg.max_df_frac = *o.max_df_frac;
  if (o.min_total) cfg.min_total = *o.min_total;
  if (o.min_mean_score) cfg.min_mean_score = *o.min_mean_score;
  if (o.window) cfg.window = *o.window;
  if (o.max_phrase_len) cfg.max_phrase_len = *o.max_phrase_len;
  if (o.K) cfg.K = *o.K;
  if (!o.k_grid.empty()) cfg.k_grid = o.k_grid;
  if (o.n_runs) cfg.n_runs = *o.n_runs;
  if (o.base_seed) cfg.base_seed = *o.base_seed;
  if (o.alpha) cfg.alpha = *o.alpha;
  if (o.eta) cfg.eta = *o.eta;
  if (o.max_iters) cfg.max_iters = *o.max_iters;
  if (o.tol) cfg.tol = *o.tol;
  if (o.top_m) cfg.top_m = *o.top_m;
  if (o.relevance_lambda) cfg.relevance_lambda = *o.relevance_lambda;
  if (o.relevance_threshold) cfg.relevance_threshold = *o.relevance_threshold;
  if (o.strong_doc_threshold) cfg.strong_doc_threshold = *o.strong_doc_threshold;
  if (o.ri_offset) cfg.ri_offset = *o.ri_offset;
  if (o.cagr_period) cfg.cagr_period = *o.cagr_period;
  if (o.min_cites) cfg.min_cites = *o.min_cites;
  if (o.min_inference) cfg.min_inference = *o.min_inference;
  if (o.min_papers) cfg.min_papers = *o.min_papers;
  if (o.reference_year) cfg.reference_year = *o.reference_year;
  if (!o.sweep_thresholds.empty()) cfg.sweep_thresholds = o.sweep_thresholds;
  if (!o.excluded_topic_ids.empty()) cfg.excluded_topic_ids = o.excluded_topic_ids;
  if (o.bootstrap_b) cfg.bootstrap_b = *o.bootstrap_b;
  if (o.histogram_bins) cfg.histogram_bins = *o.histogram_bins;
  if (o.exploratory_tcs_max) cfg.exploratory_tcs_max = *o.exploratory_tcs_max;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"research-literature topic trend mining"};
  app.require_subcommand(1);

  std::string config_path;
  bool force = false;
  bool print_config = false;
  Overrides overrides;

  auto add_sub = [&](const std::string& name, const std::string& desc) {
    CLI::App* sub = app.add_subcommand(name, desc);
    sub->add_option("--config", config_path, "JSON config file");
    sub->add_flag("--force", force, "run even when input artifact checksums are stale");
    add_config_options(sub, overrides);
    return sub;
  };

  CLI::App* run_cmd = add_sub("run", "run every stage in order");
  run_cmd->add_flag("--print-config", print_config, "print the effective config and exit");
  for (litmine::Stage stage : litmine::all_stages())
    add_sub(litmine::stage_name(stage), "run the " + litmine::stage_name(stage) + " stage");

  CLI11_PARSE(app, argc, argv);

  try {
    litmine::PipelineConfig config;
    if (!config_path.empty()) config = litmine::load_config(config_path);
    apply_overrides(config, overrides);

    CLI::App* chosen = app.get_subcommands().front();
    if (chosen == run_cmd) {
      if (print_config) {
        std::cout << litmine::config_to_json(config) << "\n";
        return 0;
      }
      litmine::run_pipeline(config, force);
    } else {
      litmine::run_stage(litmine::stage_from_name(chosen->get_name()), config, force);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
