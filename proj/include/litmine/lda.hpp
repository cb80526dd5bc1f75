#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "litmine/vocab.hpp"

namespace litmine {

struct TopicModel {
  int K = 0;
  int V = 0;
  double alpha = 0.0;  // symmetric document-topic prior
  double eta = 0.0;    // symmetric topic-term prior
  std::uint64_t seed = 0;
  std::uint64_t vocab_hash = 0;
  // Row-major K x V; each row is a topic's term distribution summing to 1.
  std::vector<double> phi;

  double phi_at(int k, int w) const { return phi[static_cast<std::size_t>(k) * V + w]; }
};

struct TrainOptions {
  int max_iters = 100;        // outer EM iterations
  double tol = 1e-5;          // relative ELBO change for convergence
  int doc_max_iters = 100;    // per-document gamma updates within one E-step
  double doc_tol = 1e-6;      // mean absolute gamma change
};

struct TrainResult {
  TopicModel model;
  std::vector<double> elbo_trace;      // one entry per completed outer iteration
  std::vector<std::size_t> skipped_docs;  // input positions with no vocab terms
  int iterations = 0;
  bool converged = false;
};

// Batch variational Bayes. Documents with no vocabulary terms are excluded
// from training (their input positions are reported). Throws if no documents
// remain or K exceeds the number of trainable documents.
TrainResult train(const std::vector<DocTermCounts>& docs, const Vocabulary& vocab,
                  int K, std::uint64_t seed, double alpha, double eta,
                  const TrainOptions& opts = {});

struct DocTopicInference {
  std::string doc_id;
  std::vector<double> theta;  // sums to 1
  bool no_vocab_terms = false;  // theta fell back to uniform 1/K
};

// Variational E-step against the frozen model. A document with no
// vocabulary terms gets exactly uniform theta and is flagged.
DocTopicInference infer(const TopicModel& model, const std::string& doc_id,
                        const DocTermCounts& counts,
                        int max_iters = 100, double tol = 1e-6);

struct CoherenceResult {
  std::vector<double> per_topic;
  double mean = 0.0;
};

// UMass coherence over each topic's top_m most probable terms, using
// document co-occurrence counts from the training corpus. Natural logs.
CoherenceResult umass_coherence(const TopicModel& model,
                                const std::vector<DocTermCounts>& docs,
                                int top_m = 10);

struct KSelection {
  int best_K = 0;
  std::vector<std::pair<int, double>> curve;  // (K, mean coherence)
};

// Trains one model per grid entry and picks the K with the highest mean
// coherence; ties go to the smaller K.
KSelection select_k(const std::vector<DocTermCounts>& docs, const Vocabulary& vocab,
                    const std::vector<int>& k_grid, std::uint64_t seed,
                    double alpha, double eta, const TrainOptions& opts = {},
                    int top_m = 10);

// Row-major K x V matrix of lambda-blended relevance:
// lambda*log(phi) + (1-lambda)*log(phi/p_w), probabilities floored at 1e-12.
std::vector<double> term_relevance(const TopicModel& model,
                                   const std::vector<double>& term_probs,
                                   double lambda = 0.6);

// Empirical term probabilities from encoded documents (counts / total).
std::vector<double> corpus_term_probs(const std::vector<DocTermCounts>& docs, int V);

// Per topic: (term index, relevance) with relevance >= threshold, sorted
// descending by relevance (ties by term index).
std::vector<std::vector<std::pair<int, double>>> strong_terms(
    const std::vector<double>& relevance, int K, int V, double threshold = -2.5);

// Documents with inference >= threshold for the topic, sorted descending.
std::vector<std::pair<std::string, double>> strong_docs(
    const std::vector<DocTopicInference>& inferences, int topic_id,
    double threshold = 0.5);

struct TopicSummary {
  int topic_id = 0;
  std::vector<std::pair<std::string, double>> strong_terms;  // (phrase, relevance)
  std::vector<std::pair<std::string, double>> strong_docs;   // (doc_id, inference)
  std::optional<std::string> label;
};

std::vector<TopicSummary> summarize_topics(
    const TopicModel& model, const std::vector<double>& relevance,
    const std::vector<DocTopicInference>& inferences, const Vocabulary& vocab,
    double term_threshold = -2.5, double doc_threshold = 0.5);

void write_model_json(const TopicModel& model, const std::filesystem::path& path);
TopicModel read_model_json(const std::filesystem::path& path);

void write_inference_csv(const std::vector<DocTopicInference>& inferences,
                         const std::filesystem::path& path);
std::vector<DocTopicInference> read_inference_csv(const std::filesystem::path& path);

}  // namespace litmine
