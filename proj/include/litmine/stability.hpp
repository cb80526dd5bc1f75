#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "litmine/lda.hpp"

namespace litmine {

// Sparse per-topic term vector: estimated occurrence counts of the topic's
// strong terms (phi times the term's total corpus count).
struct TopicTermVector {
  int run_id = 0;
  int topic_id = 0;
  std::map<std::string, double> weights;
};

TopicTermVector make_topic_term_vector(
    const TopicModel& model, int run_id, int topic_id,
    const std::vector<std::pair<int, double>>& strong_terms,
    const Vocabulary& vocab);

// Cosine over the union of keys; 0 when either vector is all-zero.
double cosine(const TopicTermVector& u, const TopicTermVector& v);

struct StabilityEntry {
  int run_id = 0;
  int topic_id = 0;
  double mean_best_similarity = 0.0;
};

struct HistogramBin {
  double lo = 0.0;
  double hi = 0.0;
  long long count = 0;
};

struct StabilityReport {
  std::vector<StabilityEntry> entries;
  std::vector<HistogramBin> histogram;
  double fraction_above_half = 0.0;   // mean_best_similarity > 0.5
  double fraction_near_one = 0.0;     // mean_best_similarity >= 0.9
};

// For each (run, topic): best-match cosine against every other run's topics,
// averaged over the n_runs - 1 other runs. Requires >= 2 runs, each with at
// least one topic.
StabilityReport mean_best_similarity(
    const std::vector<std::vector<TopicTermVector>>& runs, int histogram_bins = 20);

void write_stability_csv(const StabilityReport& report, const std::filesystem::path& path);
void write_histogram_csv(const StabilityReport& report, const std::filesystem::path& path);

}  // namespace litmine
