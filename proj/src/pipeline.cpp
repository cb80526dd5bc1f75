#include "litmine/pipeline.hpp"

#include <chrono>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "litmine/citations.hpp"
#include "litmine/corpus.hpp"
#include "litmine/keyterms.hpp"
#include "litmine/lda.hpp"
#include "litmine/metrics.hpp"
#include "litmine/stability.hpp"
#include "litmine/stats.hpp"
#include "litmine/util.hpp"
#include "litmine/vocab.hpp"

namespace litmine {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

json config_json(const PipelineConfig& c) {
  json j;
  j["corpus"] = c.corpus.string();
  auto ext = json::array();
  for (const auto& e : c.external_corpora)
    ext.push_back({{"tag", e.tag}, {"path", e.path.string()}});
  j["external_corpora"] = ext;
  j["blacklist"] = c.blacklist.string();
  j["lexicon"] = c.lexicon.string();
  j["output_dir"] = c.output_dir.string();
  j["min_chars"] = c.min_chars;
  if (c.year_min) j["year_min"] = *c.year_min;
  if (c.year_max) j["year_max"] = *c.year_max;
  j["max_df_frac"] = c.max_df_frac;
  j["min_total"] = c.min_total;
  j["min_mean_score"] = c.min_mean_score;
  j["window"] = c.window;
  j["max_phrase_len"] = c.max_phrase_len;
  j["K"] = c.K;
  j["k_grid"] = c.k_grid;
  j["n_runs"] = c.n_runs;
  j["base_seed"] = c.base_seed;
  j["alpha"] = c.alpha;
  j["eta"] = c.eta;
  j["max_iters"] = c.max_iters;
  j["tol"] = c.tol;
  j["top_m"] = c.top_m;
  j["relevance_lambda"] = c.relevance_lambda;
  j["relevance_threshold"] = c.relevance_threshold;
  j["strong_doc_threshold"] = c.strong_doc_threshold;
  j["ri_offset"] = c.ri_offset;
  j["cagr_period"] = c.cagr_period;
  j["min_cites"] = c.min_cites;
  j["min_inference"] = c.min_inference;
  j["min_papers"] = c.min_papers;
  j["reference_year"] = c.reference_year;
  j["sweep_thresholds"] = c.sweep_thresholds;
  j["excluded_topic_ids"] = c.excluded_topic_ids;
  j["bootstrap_b"] = c.bootstrap_b;
  j["histogram_bins"] = c.histogram_bins;
  j["exploratory_tcs_max"] = c.exploratory_tcs_max;
  return j;
}

void config_from_json(const json& j, PipelineConfig& c) {
  if (j.contains("corpus")) c.corpus = j.at("corpus").get<std::string>();
  if (j.contains("external_corpora")) {
    c.external_corpora.clear();
    for (const auto& e : j.at("external_corpora"))
      c.external_corpora.push_back(
          {e.at("tag").get<std::string>(), fs::path(e.at("path").get<std::string>())});
  }
  if (j.contains("blacklist")) c.blacklist = j.at("blacklist").get<std::string>();
  if (j.contains("lexicon")) c.lexicon = j.at("lexicon").get<std::string>();
  if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
  if (j.contains("min_chars")) c.min_chars = j.at("min_chars").get<int>();
  if (j.contains("year_min") && !j.at("year_min").is_null())
    c.year_min = j.at("year_min").get<int>();
  if (j.contains("year_max") && !j.at("year_max").is_null())
    c.year_max = j.at("year_max").get<int>();
  if (j.contains("max_df_frac")) c.max_df_frac = j.at("max_df_frac").get<double>();
  if (j.contains("min_total")) c.min_total = j.at("min_total").get<long long>();
  if (j.contains("min_mean_score")) c.min_mean_score = j.at("min_mean_score").get<double>();
  if (j.contains("window")) c.window = j.at("window").get<int>();
  if (j.contains("max_phrase_len")) c.max_phrase_len = j.at("max_phrase_len").get<int>();
  if (j.contains("K")) c.K = j.at("K").get<int>();
  if (j.contains("k_grid")) c.k_grid = j.at("k_grid").get<std::vector<int>>();
  if (j.contains("n_runs")) c.n_runs = j.at("n_runs").get<int>();
  if (j.contains("base_seed")) c.base_seed = j.at("base_seed").get<std::uint64_t>();
  if (j.contains("alpha")) c.alpha = j.at("alpha").get<double>();
  if (j.contains("eta")) c.eta = j.at("eta").get<double>();
  if (j.contains("max_iters")) c.max_iters = j.at("max_iters").get<int>();
  if (j.contains("tol")) c.tol = j.at("tol").get<double>();
  if (j.contains("top_m")) c.top_m = j.at("top_m").get<int>();
  if (j.contains("relevance_lambda"))
    c.relevance_lambda = j.at("relevance_lambda").get<double>();
  if (j.contains("relevance_threshold"))
    c.relevance_threshold = j.at("relevance_threshold").get<double>();
  if (j.contains("strong_doc_threshold"))
    c.strong_doc_threshold = j.at("strong_doc_threshold").get<double>();
  if (j.contains("ri_offset")) c.ri_offset = j.at("ri_offset").get<double>();
  if (j.contains("cagr_period")) c.cagr_period = j.at("cagr_period").get<std::string>();
  if (j.contains("min_cites")) c.min_cites = j.at("min_cites").get<long long>();
  if (j.contains("min_inference")) c.min_inference = j.at("min_inference").get<double>();
  if (j.contains("min_papers")) c.min_papers = j.at("min_papers").get<int>();
  if (j.contains("reference_year")) c.reference_year = j.at("reference_year").get<int>();
  if (j.contains("sweep_thresholds"))
    c.sweep_thresholds = j.at("sweep_thresholds").get<std::vector<double>>();
  if (j.contains("excluded_topic_ids"))
    c.excluded_topic_ids = j.at("excluded_topic_ids").get<std::vector<int>>();
  if (j.contains("bootstrap_b")) c.bootstrap_b = j.at("bootstrap_b").get<int>();
  if (j.contains("histogram_bins")) c.histogram_bins = j.at("histogram_bins").get<int>();
  if (j.contains("exploratory_tcs_max"))
    c.exploratory_tcs_max = j.at("exploratory_tcs_max").get<double>();
}

std::string checksum_hex(const std::string& data) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(data)));
  return buf;
}

// Tracks per-stage outputs with content checksums so later stages can verify
// their inputs have not been rebuilt or edited out from under them.
class Manifest {
 public:
  static fs::path file_for(const fs::path& outdir) { return outdir / "manifest.json"; }

  static Manifest load_or_create(const PipelineConfig& config) {
    Manifest m;
    m.dir_ = config.output_dir;
    const fs::path path = file_for(m.dir_);
    if (fs::exists(path)) {
      std::ifstream in(path);
      in >> m.root_;
    }
    m.root_["config"] = config_json(config);
    return m;
  }

  static Manifest require(const PipelineConfig& config, const std::string& stage) {
    if (!fs::exists(file_for(config.output_dir)))
      throw std::runtime_error("stage " + stage +
                               ": no manifest in " + config.output_dir.string() +
                               " (run the ingest stage first)");
    return load_or_create(config);
  }

  void check_input(const std::string& relpath, const std::string& stage, bool force) const {
    const fs::path full = dir_ / relpath;
    if (!fs::exists(full))
      throw std::runtime_error("stage " + stage + ": missing artifact " + relpath +
                               " (run the producing stage first)");
    if (force) return;
    const std::string recorded = recorded_checksum(relpath);
    if (recorded.empty()) return;
    if (checksum_hex(read_file(full)) != recorded)
      throw std::runtime_error("stage " + stage + ": stale artifact " + relpath +
                               " (checksum differs from manifest; rerun upstream stages "
                               "or pass --force)");
  }

  void record_stage(const std::string& stage, const std::vector<std::string>& outputs,
                    long long duration_ms) {
    json entry;
    entry["duration_ms"] = duration_ms;
    json files;
    for (const auto& rel : outputs)
      files[rel] = checksum_hex(read_file(dir_ / rel));
    entry["outputs"] = files;
    root_["stages"][stage] = entry;
    std::ofstream out(file_for(dir_));
    if (!out) throw std::runtime_error("cannot write manifest in " + dir_.string());
    out << root_.dump(2) << '\n';
  }

 private:
  std::string recorded_checksum(const std::string& relpath) const {
    if (!root_.contains("stages")) return {};
    for (const auto& [stage, entry] : root_.at("stages").items()) {
      (void)stage;
      if (entry.contains("outputs") && entry.at("outputs").contains(relpath))
        return entry.at("outputs").at(relpath).get<std::string>();
    }
    return {};
  }

  fs::path dir_;
  json root_;
};

double effective_alpha(const PipelineConfig& c, int K) {
  return c.alpha > 0.0 ? c.alpha : 1.0 / K;
}
double effective_eta(const PipelineConfig& c, int K) {
  return c.eta > 0.0 ? c.eta : 1.0 / K;
}

std::string run_dir(int i) { return "runs/run_" + std::to_string(i); }

CagrPeriod cagr_period_of(const PipelineConfig& c) {
  if (c.cagr_period == "intervals") return CagrPeriod::Intervals;
  if (c.cagr_period == "years") return CagrPeriod::Years;
  throw std::runtime_error("cagr_period must be 'intervals' or 'years'");
}

// ---- shared artifact plumbing ----

struct TermsTable {
  // doc_id -> terms in extraction order; docs with no terms are absent.
  std::map<std::string, std::vector<ScoredTerm>> by_doc;
};

TermsTable read_terms_csv(const fs::path& path) {
  auto rows = read_csv(path);
  if (rows.empty() || rows[0] != std::vector<std::string>{"doc_id", "phrase", "score",
                                                          "occurrences"})
    throw std::runtime_error("malformed terms csv: " + path.string());
  TermsTable table;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.size() != 4) throw std::runtime_error("malformed terms csv row");
    ScoredTerm term;
    term.doc_id = r[0];
    term.lemma_phrase = r[1];
    term.score = std::stod(r[2]);
    term.occurrences = std::stoll(r[3]);
    table.by_doc[term.doc_id].push_back(std::move(term));
  }
  return table;
}

std::vector<ScoredTerm> doc_terms(const TermsTable& table, const std::string& doc_id) {
  auto it = table.by_doc.find(doc_id);
  return it == table.by_doc.end() ? std::vector<ScoredTerm>{} : it->second;
}

std::vector<DocTermCounts> encode_corpus(const Corpus& corpus, const TermsTable& table,
                                         const Vocabulary& vocab) {
  std::vector<DocTermCounts> encoded;
  encoded.reserve(corpus.documents.size());
  for (const auto& doc : corpus.documents)
    encoded.push_back(encode_document(doc_terms(table, doc.id), vocab));
  return encoded;
}

std::vector<ScoredTerm> extract_doc_terms(const Document& doc, const Lexicon& lexicon,
                                          const PipelineConfig& config) {
  TokenizedDoc tokens = tokenize_lemmatize(doc, lexicon);
  CooccurrenceGraph graph = build_cooccurrence_graph(tokens, config.window);
  auto scores = singlerank_scores(graph);
  return extract_scored_terms(tokens, scores, config.max_phrase_len);
}

Lexicon load_lexicon_if_set(const PipelineConfig& config) {
  if (config.lexicon.empty()) return {};
  return Lexicon::load(config.lexicon);
}

struct MetricsTable {
  std::vector<int> topic_ids;
  std::map<int, std::map<std::string, double>> values;  // topic -> column -> value
  std::vector<std::string> columns;                     // minus topic_id
};

MetricsTable read_metrics_csv(const fs::path& path) {
  auto rows = read_csv(path);
  if (rows.size() < 1 || rows[0].empty() || rows[0][0] != "topic_id")
    throw std::runtime_error("malformed metrics csv: " + path.string());
  MetricsTable table;
  for (std::size_t c = 1; c < rows[0].size(); ++c) table.columns.push_back(rows[0][c]);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const int topic = std::stoi(rows[i][0]);
    table.topic_ids.push_back(topic);
    for (std::size_t c = 1; c < rows[i].size(); ++c)
      table.values[topic][table.columns[c - 1]] = std::stod(rows[i][c]);
  }
  return table;
}

std::map<int, MlcrResult> read_mlcr_csv(const fs::path& path) {
  auto rows = read_csv(path);
  if (rows.empty() ||
      rows[0] != std::vector<std::string>{"topic_id", "mlcr", "n_papers_surviving"})
    throw std::runtime_error("malformed mlcr csv: " + path.string());
  std::map<int, MlcrResult> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    MlcrResult res;
    const double v = std::stod(rows[i][1]);
    if (!std::isnan(v)) res.value = v;
    res.n_surviving = std::stoi(rows[i][2]);
    out[std::stoi(rows[i][0])] = res;
  }
  return out;
}

std::set<int> excluded_set(const PipelineConfig& config) {
  return {config.excluded_topic_ids.begin(), config.excluded_topic_ids.end()};
}

// ---- stages ----

std::vector<std::string> stage_ingest(const PipelineConfig& config, Manifest& manifest) {
  fs::create_directories(config.output_dir);
  std::vector<std::string> outputs;

  ParseOptions opts;
  opts.year_min = config.year_min;
  opts.year_max = config.year_max;
  ParseResult parsed = parse_corpus(config.corpus, "literature", opts);
  Corpus cleaned = clean_filter(parsed.corpus, static_cast<std::size_t>(config.min_chars));
  write_corpus(cleaned, config.output_dir / "corpus_clean.jsonl");
  write_rejects(parsed.rejects, config.output_dir / "rejects.txt");
  outputs.push_back("corpus_clean.jsonl");
  outputs.push_back("rejects.txt");
  std::cerr << "ingest: literature " << cleaned.documents.size() << " docs kept, "
            << parsed.rejects.size() << " rejected, "
            << (parsed.corpus.documents.size() - cleaned.documents.size())
            << " below min_chars\n";

  for (const auto& ext : config.external_corpora) {
    ParseResult ext_parsed = parse_corpus(ext.path, ext.tag, {});
    Corpus ext_clean =
        clean_filter(ext_parsed.corpus, static_cast<std::size_t>(config.min_chars));
    const std::string stem = "external_" + ext.tag;
    write_corpus(ext_clean, config.output_dir / (stem + ".jsonl"));
    write_rejects(ext_parsed.rejects, config.output_dir / (stem + "_rejects.txt"));
    outputs.push_back(stem + ".jsonl");
    outputs.push_back(stem + "_rejects.txt");
    std::cerr << "ingest: " << ext.tag << " " << ext_clean.documents.size()
              << " docs kept\n";
  }
  return outputs;
}

std::vector<std::string> stage_terms(const PipelineConfig& config, Manifest& manifest, bool force) {
  manifest.check_input("corpus_clean.jsonl", "terms", force);
  Corpus corpus = parse_corpus(config.output_dir / "corpus_clean.jsonl", "literature").corpus;
  Lexicon lexicon = load_lexicon_if_set(config);

  CsvWriter csv({"doc_id", "phrase", "score", "occurrences"});
  std::size_t n_terms = 0;
  for (const auto& doc : corpus.documents) {
    for (const auto& term : extract_doc_terms(doc, lexicon, config)) {
      csv.add_row({term.doc_id, term.lemma_phrase, format_double(term.score),
                   std::to_string(term.occurrences)});
      ++n_terms;
    }
  }
  csv.save(config.output_dir / "terms.csv");
  std::cerr << "terms: " << n_terms << " scored terms over " << corpus.documents.size()
            << " docs\n";
  return {"terms.csv"};
}

std::vector<std::string> stage_vocab(const PipelineConfig& config, Manifest& manifest, bool force) {
  manifest.check_input("terms.csv", "vocab", force);
  manifest.check_input("corpus_clean.jsonl", "vocab", force);
  Corpus corpus = parse_corpus(config.output_dir / "corpus_clean.jsonl", "literature").corpus;
  TermsTable table = read_terms_csv(config.output_dir / "terms.csv");

  std::vector<std::vector<ScoredTerm>> per_doc;
  per_doc.reserve(corpus.documents.size());
  for (const auto& doc : corpus.documents) per_doc.push_back(doc_terms(table, doc.id));

  auto stats = accumulate_stats(per_doc, corpus.documents.size());
  VocabFilters filters;
  filters.max_df_frac = config.max_df_frac;
  filters.min_total = config.min_total;
  filters.min_mean_score = config.min_mean_score;
  auto blacklist = load_blacklist(config.blacklist);
  Vocabulary vocab = apply_filters(stats, corpus.documents.size(), filters, blacklist);
  write_vocab_csv(vocab, config.output_dir / "vocab.csv");
  std::cerr << "vocab: " << vocab.size() << " terms kept of " << stats.size() << "\n";
  if (vocab.size() < 50)
    std::cerr << "vocab: warning: only " << vocab.size()
              << " terms survive the filters; consider loosening thresholds for small "
                 "corpora\n";
  return {"vocab.csv"};
}

// Literature corpus + vocabulary encoding shared by train/infer/metrics.
struct EncodedCorpus {
  Corpus corpus;
  Vocabulary vocab;
  std::vector<DocTermCounts> docs;
};

EncodedCorpus load_encoded(const PipelineConfig& config, const Manifest& manifest,
                           const std::string& stage, bool force) {
  manifest.check_input("corpus_clean.jsonl", stage, force);
  manifest.check_input("terms.csv", stage, force);
  manifest.check_input("vocab.csv", stage, force);
  EncodedCorpus enc;
  enc.corpus = parse_corpus(config.output_dir / "corpus_clean.jsonl", "literature").corpus;
  enc.vocab = read_vocab_csv(config.output_dir / "vocab.csv");
  TermsTable table = read_terms_csv(config.output_dir / "terms.csv");
  enc.docs = encode_corpus(enc.corpus, table, enc.vocab);
  return enc;
}

std::vector<std::string> stage_train(const PipelineConfig& config, Manifest& manifest, bool force) {
  EncodedCorpus enc = load_encoded(config, manifest, "train", force);
  std::vector<std::string> outputs;

  TrainOptions opts;
  opts.max_iters = config.max_iters;
  opts.tol = config.tol;

  int K = config.K;
  if (!config.k_grid.empty()) {
    KSelection sel = select_k(enc.docs, enc.vocab, config.k_grid, config.base_seed,
                              effective_alpha(config, config.k_grid.front()),
                              effective_eta(config, config.k_grid.front()), opts,
                              config.top_m);
    K = sel.best_K;
    CsvWriter csv({"K", "mean_coherence", "selected"});
    for (const auto& [k, coherence] : sel.curve)
      csv.add_row({std::to_string(k), format_double(coherence),
                   k == sel.best_K ? "1" : "0"});
    csv.save(config.output_dir / "k_selection.csv");
    outputs.push_back("k_selection.csv");
    std::cerr << "train: selected K=" << K << " from grid by mean coherence\n";
  }

  for (int i = 0; i < config.n_runs; ++i) {
    fs::create_directories(config.output_dir / run_dir(i));
    TrainResult result = train(enc.docs, enc.vocab, K, config.base_seed + i,
                               effective_alpha(config, K), effective_eta(config, K), opts);
    if (!result.skipped_docs.empty() && i == 0)
      std::cerr << "train: " << result.skipped_docs.size()
                << " docs have no vocabulary terms and were excluded from training\n";
    const std::string rel = run_dir(i) + "/model.json";
    write_model_json(result.model, config.output_dir / rel);
    outputs.push_back(rel);
    std::cerr << "train: run " << i << " seed " << (config.base_seed + i) << " "
              << result.iterations << " iterations"
              << (result.converged ? "" : " (max_iters reached)") << "\n";
  }
  return outputs;
}

std::vector<std::string> stage_infer(const PipelineConfig& config, Manifest& manifest, bool force) {
  EncodedCorpus enc = load_encoded(config, manifest, "infer", force);
  std::vector<std::string> outputs;
  for (int i = 0; i < config.n_runs; ++i) {
    const std::string model_rel = run_dir(i) + "/model.json";
    manifest.check_input(model_rel, "infer", force);
    TopicModel model = read_model_json(config.output_dir / model_rel);
    if (model.vocab_hash != enc.vocab.checksum())
      throw std::runtime_error("infer: model/vocabulary checksum mismatch for run " +
                               std::to_string(i));
    std::vector<DocTopicInference> inferences;
    inferences.reserve(enc.corpus.documents.size());
    std::size_t uniform_docs = 0;
    for (std::size_t d = 0; d < enc.corpus.documents.size(); ++d) {
      inferences.push_back(infer(model, enc.corpus.documents[d].id, enc.docs[d]));
      if (inferences.back().no_vocab_terms) ++uniform_docs;
    }
    const std::string rel = run_dir(i) + "/inference.csv";
    write_inference_csv(inferences, config.output_dir / rel);
    outputs.push_back(rel);
    if (i == 0 && uniform_docs > 0)
      std::cerr << "infer: " << uniform_docs
                << " docs have no vocabulary terms (uniform inference)\n";
  }
  return outputs;
}

std::vector<std::string> stage_metrics(const PipelineConfig& config, Manifest& manifest, bool force) {
  EncodedCorpus enc = load_encoded(config, manifest, "metrics", force);
  Lexicon lexicon = load_lexicon_if_set(config);
  const CagrPeriod period = cagr_period_of(config);
  const auto excluded = excluded_set(config);
  std::vector<std::string> outputs;

  std::map<std::string, int> year_of;
  for (const auto& doc : enc.corpus.documents) year_of[doc.id] = doc.year;

  // External corpora are encoded once; inference then runs per trained model.
  struct ExternalEncoded {
    std::string tag;
    Corpus corpus;
    std::vector<DocTermCounts> docs;
  };
  std::vector<ExternalEncoded> externals;
  std::vector<std::string> external_tags;
  for (const auto& ext : config.external_corpora) {
    const std::string rel = "external_" + ext.tag + ".jsonl";
    manifest.check_input(rel, "metrics", force);
    ExternalEncoded ee;
    ee.tag = ext.tag;
    ee.corpus = parse_corpus(config.output_dir / rel, ext.tag).corpus;
    if (ee.corpus.documents.empty())
      throw std::runtime_error("metrics: external corpus '" + ext.tag +
                               "' has no surviving documents");
    for (const auto& doc : ee.corpus.documents)
      ee.docs.push_back(encode_document(extract_doc_terms(doc, lexicon, config), enc.vocab));
    external_tags.push_back(ext.tag);
    externals.push_back(std::move(ee));
  }

  for (int i = 0; i < config.n_runs; ++i) {
    const std::string model_rel = run_dir(i) + "/model.json";
    const std::string inf_rel = run_dir(i) + "/inference.csv";
    manifest.check_input(model_rel, "metrics", force);
    manifest.check_input(inf_rel, "metrics", force);
    TopicModel model = read_model_json(config.output_dir / model_rel);
    auto inferences = read_inference_csv(config.output_dir / inf_rel);
    const int K = model.K;

    std::vector<double> totals = tcs(inferences, K);
    std::map<int, std::vector<DocTopicInference>> yearly;
    for (const auto& inf : inferences) yearly[year_of.at(inf.doc_id)].push_back(inf);
    auto series_by_year = tcs_timeseries(yearly, K);
    const int y0 = series_by_year.begin()->first;
    const int yf = series_by_year.rbegin()->first;

    std::map<std::string, std::vector<double>> external_totals;
    for (const auto& ee : externals) {
      std::vector<DocTopicInference> ext_inf;
      for (std::size_t d = 0; d < ee.corpus.documents.size(); ++d)
        ext_inf.push_back(infer(model, ee.corpus.documents[d].id, ee.docs[d]));
      external_totals[ee.tag] = tcs(ext_inf, K);
    }

    std::vector<TopicMetricRow> rows;
    int undefined_growth = 0;
    for (int k = 0; k < K; ++k) {
      if (excluded.count(k)) continue;
      TopicMetricRow row;
      row.topic_id = k;
      row.tcs = totals[k];
      std::map<int, double> series;
      for (const auto& [year, values] : series_by_year) series[year] = values[k];
      row.tcs_by_year = series;
      try {
        row.tcs_cagr = tcs_cagr(series, y0, yf, period);
      } catch (const UndefinedGrowthError&) {
        ++undefined_growth;
      }
      if (series.size() >= 4) {
        try {
          row.tcs_cagr_weighted = tcs_cagr_weighted(series, y0, yf, period);
        } catch (const std::exception&) {
          // missing interior year or zero start average
        }
      }
      if (row.tcs_cagr) row.ri = ri(row.tcs, *row.tcs_cagr, config.ri_offset);
      for (const auto& tag : external_tags)
        row.external_tcs[tag] = external_totals.at(tag)[k];
      rows.push_back(std::move(row));
    }
    if (undefined_growth > 0 && i == 0)
      std::cerr << "metrics: " << undefined_growth
                << " topics have zero starting-year TCS; growth metrics left undefined\n";

    const std::string metrics_rel = run_dir(i) + "/metrics.csv";
    write_metrics_csv(rows, external_tags, config.output_dir / metrics_rel);
    outputs.push_back(metrics_rel);

    CsvWriter yearly_csv({"topic_id", "year", "tcs"});
    for (const auto& row : rows)
      for (const auto& [year, value] : row.tcs_by_year)
        yearly_csv.add_row({std::to_string(row.topic_id), std::to_string(year),
                            format_double(value)});
    const std::string yearly_rel = run_dir(i) + "/tcs_yearly.csv";
    yearly_csv.save(config.output_dir / yearly_rel);
    outputs.push_back(yearly_rel);

    if (i == 0) {
      write_metrics_csv(rows, external_tags, config.output_dir / "metrics.csv");
      outputs.push_back("metrics.csv");
    }
  }
  return outputs;
}

std::vector<std::string> stage_stability(const PipelineConfig& config, Manifest& manifest, bool force) {
  if (config.n_runs < 2) {
    std::cerr << "stability: skipped (needs at least 2 runs, have " << config.n_runs
              << ")\n";
    return {};
  }
  manifest.check_input("vocab.csv", "stability", force);
  manifest.check_input("corpus_clean.jsonl", "stability", force);
  manifest.check_input("terms.csv", "stability", force);
  EncodedCorpus enc = load_encoded(config, manifest, "stability", force);
  auto term_probs = corpus_term_probs(enc.docs, static_cast<int>(enc.vocab.size()));

  std::vector<std::vector<TopicTermVector>> runs;
  for (int i = 0; i < config.n_runs; ++i) {
    const std::string model_rel = run_dir(i) + "/model.json";
    manifest.check_input(model_rel, "stability", force);
    TopicModel model = read_model_json(config.output_dir / model_rel);
    auto relevance = term_relevance(model, term_probs, config.relevance_lambda);
    auto strong = strong_terms(relevance, model.K, model.V, config.relevance_threshold);
    std::vector<TopicTermVector> vectors;
    for (int k = 0; k < model.K; ++k)
      vectors.push_back(make_topic_term_vector(model, i, k, strong[k], enc.vocab));
    runs.push_back(std::move(vectors));
  }

  StabilityReport report = mean_best_similarity(runs, config.histogram_bins);
  write_stability_csv(report, config.output_dir / "stability.csv");
  write_histogram_csv(report, config.output_dir / "histogram.csv");
  std::cerr << "stability: fraction above 0.5 = " << report.fraction_above_half
            << ", fraction at or above 0.9 = " << report.fraction_near_one << "\n";
  return {"stability.csv", "histogram.csv"};
}

std::vector<std::string> stage_citations(const PipelineConfig& config, Manifest& manifest, bool force) {
  manifest.check_input("corpus_clean.jsonl", "citations", force);
  Corpus corpus = parse_corpus(config.output_dir / "corpus_clean.jsonl", "literature").corpus;
  const auto excluded = excluded_set(config);

  std::vector<PaperCitation> papers;
  std::map<std::string, long long> cites_by_doc;
  for (const auto& doc : corpus.documents) {
    if (!doc.citation_count) continue;
    papers.push_back({doc.id, *doc.citation_count, doc.year});
    cites_by_doc[doc.id] = *doc.citation_count;
  }
  if (papers.empty())
    throw std::runtime_error("citations: no documents carry citation counts");

  auto points = mean_citation_curve(papers, config.reference_year, config.bootstrap_b,
                                    config.base_seed);
  SigmoidFit fit = fit_sigmoid(points);
  write_sigmoid_json(fit, points, config.output_dir / "sigmoid_fit.json");
  std::cerr << "citations: sigmoid rmse " << fit.fit_rmse << ", linear rmse "
            << fit.linear_rmse << "\n";

  std::map<std::string, double> lifetime_by_doc;
  for (const auto& p : papers)
    lifetime_by_doc[p.doc_id] = lifetime_citations(p, fit, config.reference_year);

  MlcrFilters filters;
  filters.min_cites = config.min_cites;
  filters.min_inference = config.min_inference;
  filters.min_papers = config.min_papers;

  std::vector<std::string> outputs{"sigmoid_fit.json"};
  for (int i = 0; i < config.n_runs; ++i) {
    const std::string inf_rel = run_dir(i) + "/inference.csv";
    manifest.check_input(inf_rel, "citations", force);
    auto inferences = read_inference_csv(config.output_dir / inf_rel);
    const int K = static_cast<int>(inferences.front().theta.size());

    std::vector<std::pair<int, MlcrResult>> rows;
    std::map<int, double> cagr_by_topic;
    {
      const std::string metrics_rel = run_dir(i) + "/metrics.csv";
      manifest.check_input(metrics_rel, "citations", force);
      MetricsTable table = read_metrics_csv(config.output_dir / metrics_rel);
      for (int topic : table.topic_ids) {
        const double v = table.values.at(topic).at("tcs_cagr");
        if (!std::isnan(v)) cagr_by_topic[topic] = v;
      }
    }
    for (int k = 0; k < K; ++k) {
      if (excluded.count(k)) continue;
      rows.emplace_back(k, mlcr(k, inferences, lifetime_by_doc, cites_by_doc, filters));
    }
    const std::string mlcr_rel = run_dir(i) + "/mlcr.csv";
    write_mlcr_csv(rows, config.output_dir / mlcr_rel);
    outputs.push_back(mlcr_rel);
    if (i == 0) {
      write_mlcr_csv(rows, config.output_dir / "mlcr.csv");
      outputs.push_back("mlcr.csv");
    }

    auto sweep = threshold_sweep(config.sweep_thresholds, cagr_by_topic, inferences,
                                 lifetime_by_doc, cites_by_doc, K, filters,
                                 CorrelationMethod::Spearman, config.bootstrap_b,
                                 config.base_seed + i);
    CsvWriter sweep_csv({"threshold", "spearman_r", "p", "se", "n_topics"});
    for (const auto& row : sweep) {
      if (!row.r)
        std::cerr << "citations: run " << i << " sweep threshold " << row.threshold
                  << (row.n_topics < 3 ? " leaves fewer than 3 topics"
                                       : " gives degenerate ranks")
                  << "; correlation undefined\n";
      sweep_csv.add_row({format_double(row.threshold),
                         row.r ? format_double(*row.r) : "nan",
                         row.p ? format_double(*row.p) : "nan", format_double(row.se),
                         std::to_string(row.n_topics)});
    }
    const std::string sweep_rel = run_dir(i) + "/sweep.csv";
    sweep_csv.save(config.output_dir / sweep_rel);
    outputs.push_back(sweep_rel);
  }
  return outputs;
}

std::vector<std::string> stage_correlate(const PipelineConfig& config, Manifest& manifest, bool force) {
  std::vector<std::string> base_metrics{"tcs", "tcs_cagr", "tcs_cagr_weighted", "ri"};
  std::vector<std::pair<std::string, std::string>> pairs;  // (metric, against)
  for (const auto& ext : config.external_corpora)
    for (const auto& m : base_metrics) pairs.emplace_back(m, "tcs_" + ext.tag);
  for (const auto& m : base_metrics) pairs.emplace_back(m, "mlcr");

  // pair name -> method -> per-run results
  std::map<std::string, std::map<std::string, std::vector<CorrelationResult>>> collected;
  std::vector<std::string> pair_order;

  for (int i = 0; i < config.n_runs; ++i) {
    const std::string metrics_rel = run_dir(i) + "/metrics.csv";
    const std::string mlcr_rel = run_dir(i) + "/mlcr.csv";
    manifest.check_input(metrics_rel, "correlate", force);
    manifest.check_input(mlcr_rel, "correlate", force);
    MetricsTable table = read_metrics_csv(config.output_dir / metrics_rel);
    auto mlcr_rows = read_mlcr_csv(config.output_dir / mlcr_rel);

    for (const auto& [metric, against] : pairs) {
      std::vector<double> xs, ys;
      for (int topic : table.topic_ids) {
        const auto& cols = table.values.at(topic);
        auto xt = cols.find(metric);
        if (xt == cols.end() || std::isnan(xt->second)) continue;
        double y;
        if (against == "mlcr") {
          auto mit = mlcr_rows.find(topic);
          if (mit == mlcr_rows.end() || !mit->second.value) continue;
          y = *mit->second.value;
        } else {
          auto yt = cols.find(against);
          if (yt == cols.end() || std::isnan(yt->second)) continue;
          y = yt->second;
        }
        xs.push_back(xt->second);
        ys.push_back(y);
      }
      const std::string name = metric + "_vs_" + against;
      if (i == 0) pair_order.push_back(name);
      if (xs.size() < 3) continue;
      try {
        collected[name]["pearson"].push_back(pearson(xs, ys));
        collected[name]["spearman"].push_back(spearman(xs, ys));
      } catch (const std::invalid_argument&) {
        // constant column in this run; pair dropped below if any run lacks it
      }
    }
  }

  CsvWriter csv({"metric_pair", "method", "mean_r", "se_r", "mean_p"});
  for (const auto& name : pair_order) {
    auto it = collected.find(name);
    if (it == collected.end() ||
        static_cast<int>(it->second.at("pearson").size()) != config.n_runs) {
      std::cerr << "correlate: pair " << name
                << " undefined in at least one run; omitted\n";
      continue;
    }
    for (const std::string method : {"pearson", "spearman"}) {
      const auto& runs = it->second.at(method);
      double mean_r, se_r, mean_p;
      if (runs.size() >= 2) {
        RunAggregate agg = aggregate_runs(runs);
        mean_r = agg.mean_r;
        se_r = agg.se_r;
        mean_p = agg.mean_p;
      } else {
        mean_r = runs.front().r;
        se_r = 0.0;
        mean_p = runs.front().p;
        std::cerr << "correlate: single run; se_r is 0 by construction\n";
      }
      csv.add_row({name, method, format_double(mean_r), format_double(se_r),
                   format_double(mean_p)});
    }
  }
  csv.save(config.output_dir / "correlations.csv");
  return {"correlations.csv"};
}

std::vector<std::string> stage_report(const PipelineConfig& config, Manifest& manifest, bool force) {
  manifest.check_input("metrics.csv", "report", force);
  manifest.check_input("mlcr.csv", "report", force);
  MetricsTable table = read_metrics_csv(config.output_dir / "metrics.csv");
  auto mlcr_rows = read_mlcr_csv(config.output_dir / "mlcr.csv");

  std::vector<TopicMetricRow> rows;
  for (int topic : table.topic_ids) {
    TopicMetricRow row;
    row.topic_id = topic;
    const auto& cols = table.values.at(topic);
    row.tcs = cols.at("tcs");
    if (!std::isnan(cols.at("tcs_cagr"))) row.tcs_cagr = cols.at("tcs_cagr");
    if (!std::isnan(cols.at("ri"))) row.ri = cols.at("ri");
    auto mit = mlcr_rows.find(topic);
    if (mit != mlcr_rows.end() && mit->second.value) row.mlcr = mit->second.value;
    rows.push_back(std::move(row));
  }
  ScatterOptions opts;
  opts.offset = config.ri_offset;
  opts.exploratory_tcs_max = config.exploratory_tcs_max;
  scatter_data(rows, opts, config.output_dir / "scatter.csv",
               config.output_dir / "iso_ri.csv");

  // Topic summaries from the first run's model.
  EncodedCorpus enc = load_encoded(config, manifest, "report", force);
  manifest.check_input(run_dir(0) + "/model.json", "report", force);
  manifest.check_input(run_dir(0) + "/inference.csv", "report", force);
  TopicModel model = read_model_json(config.output_dir / run_dir(0) / "model.json");
  auto inferences = read_inference_csv(config.output_dir / run_dir(0) / "inference.csv");
  auto term_probs = corpus_term_probs(enc.docs, static_cast<int>(enc.vocab.size()));
  auto relevance = term_relevance(model, term_probs, config.relevance_lambda);
  auto summaries = summarize_topics(model, relevance, inferences, enc.vocab,
                                    config.relevance_threshold,
                                    config.strong_doc_threshold);
  const auto excluded = excluded_set(config);
  json j = json::array();
  for (const auto& s : summaries) {
    if (excluded.count(s.topic_id)) continue;
    json terms = json::array();
    for (const auto& [phrase, rel] : s.strong_terms)
      terms.push_back({{"phrase", phrase}, {"relevance", rel}});
    json docs = json::array();
    for (const auto& [doc_id, inf] : s.strong_docs)
      docs.push_back({{"doc_id", doc_id}, {"inference", inf}});
    j.push_back({{"topic_id", s.topic_id},
                 {"strong_terms", terms},
                 {"strong_docs", docs}});
  }
  std::ofstream out(config.output_dir / "topic_summaries.json");
  out << j.dump(2) << '\n';

  return {"scatter.csv", "iso_ri.csv", "topic_summaries.json"};
}

}  // namespace

PipelineConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::runtime_error("config parse error in " + path.string() + ": " + e.what());
  }
  PipelineConfig config;
  config_from_json(j, config);
  return config;
}

std::string config_to_json(const PipelineConfig& config) {
  return config_json(config).dump(2);
}

void validate_config(const PipelineConfig& config) {
  auto fail = [](const std::string& msg) { throw std::runtime_error("config: " + msg); };
  if (config.corpus.empty()) fail("corpus path is required");
  if (!fs::exists(config.corpus)) fail("corpus file not found: " + config.corpus.string());
  if (config.blacklist.empty()) fail("blacklist path is required");
  if (!fs::exists(config.blacklist))
    fail("blacklist file not found: " + config.blacklist.string());
  if (!config.lexicon.empty() && !fs::exists(config.lexicon))
    fail("lexicon file not found: " + config.lexicon.string());
  for (const auto& ext : config.external_corpora) {
    if (ext.tag.empty()) fail("external corpus with empty tag");
    if (!fs::exists(ext.path))
      fail("external corpus file not found: " + ext.path.string());
  }
  if (config.min_chars < 0) fail("min_chars must be >= 0");
  if (!(config.max_df_frac > 0.0 && config.max_df_frac <= 1.0))
    fail("max_df_frac must be in (0, 1]");
  if (config.min_total < 0) fail("min_total must be >= 0");
  if (config.window < 2) fail("window must be >= 2");
  if (config.max_phrase_len < 1) fail("max_phrase_len must be >= 1");
  if (config.k_grid.empty() && config.K < 2) fail("K must be >= 2 (or provide k_grid)");
  for (int k : config.k_grid)
    if (k < 2) fail("k_grid entries must be >= 2");
  if (config.n_runs < 1) fail("n_runs must be >= 1");
  if (config.max_iters < 1) fail("max_iters must be >= 1");
  if (!(config.tol > 0.0)) fail("tol must be > 0");
  if (config.top_m < 2) fail("top_m must be >= 2");
  if (config.relevance_lambda < 0.0 || config.relevance_lambda > 1.0)
    fail("relevance_lambda must be in [0, 1]");
  if (config.strong_doc_threshold < 0.0 || config.strong_doc_threshold > 1.0)
    fail("strong_doc_threshold must be in [0, 1]");
  if (config.cagr_period != "intervals" && config.cagr_period != "years")
    fail("cagr_period must be 'intervals' or 'years'");
  if (config.min_cites < 0) fail("min_cites must be >= 0");
  if (config.min_inference < 0.0 || config.min_inference > 1.0)
    fail("min_inference must be in [0, 1]");
  if (config.min_papers < 1) fail("min_papers must be >= 1");
  if (config.sweep_thresholds.empty()) fail("sweep_thresholds must be non-empty");
  if (config.bootstrap_b < 100) fail("bootstrap_b must be >= 100");
  if (config.histogram_bins < 1) fail("histogram_bins must be >= 1");
  fs::create_directories(config.output_dir);
}

const std::vector<Stage>& all_stages() {
  static const std::vector<Stage> stages{
      Stage::Ingest,  Stage::Terms,     Stage::Vocab,     Stage::Train,
      Stage::Infer,   Stage::Metrics,   Stage::Stability, Stage::Citations,
      Stage::Correlate, Stage::Report,
  };
  return stages;
}

std::string stage_name(Stage stage) {
  switch (stage) {
    case Stage::Ingest: return "ingest";
    case Stage::Terms: return "terms";
    case Stage::Vocab: return "vocab";
    case Stage::Train: return "train";
    case Stage::Infer: return "infer";
    case Stage::Metrics: return "metrics";
    case Stage::Stability: return "stability";
    case Stage::Citations: return "citations";
    case Stage::Correlate: return "correlate";
    case Stage::Report: return "report";
  }
  throw std::logic_error("unknown stage");
}

Stage stage_from_name(const std::string& name) {
  for (Stage s : all_stages())
    if (stage_name(s) == name) return s;
  throw std::runtime_error("unknown stage: " + name);
}

void run_stage(Stage stage, const PipelineConfig& config, bool force) {
  validate_config(config);
  const auto started = std::chrono::steady_clock::now();
  Manifest manifest = stage == Stage::Ingest
                          ? Manifest::load_or_create(config)
                          : Manifest::require(config, stage_name(stage));
  std::vector<std::string> outputs;
  try {
    switch (stage) {
      case Stage::Ingest: outputs = stage_ingest(config, manifest); break;
      case Stage::Terms: outputs = stage_terms(config, manifest, force); break;
      case Stage::Vocab: outputs = stage_vocab(config, manifest, force); break;
      case Stage::Train: outputs = stage_train(config, manifest, force); break;
      case Stage::Infer: outputs = stage_infer(config, manifest, force); break;
      case Stage::Metrics: outputs = stage_metrics(config, manifest, force); break;
      case Stage::Stability: outputs = stage_stability(config, manifest, force); break;
      case Stage::Citations: outputs = stage_citations(config, manifest, force); break;
      case Stage::Correlate: outputs = stage_correlate(config, manifest, force); break;
      case Stage::Report: outputs = stage_report(config, manifest, force); break;
    }
  } catch (const std::exception& e) {
    std::string msg = e.what();
    if (msg.rfind("stage ", 0) == 0) throw;
    throw std::runtime_error("stage " + stage_name(stage) + ": " + msg);
  }
  const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                           std::chrono::steady_clock::now() - started)
                           .count();
  manifest.record_stage(stage_name(stage), outputs, elapsed);
  std::cerr << stage_name(stage) << ": done in " << elapsed << " ms\n";
}

void run_pipeline(const PipelineConfig& config, bool force) {
  for (Stage stage : all_stages()) run_stage(stage, config, force);
}

}  // namespace litmine
