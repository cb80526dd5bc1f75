#include "litmine/stability.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "litmine/util.hpp"

namespace litmine {

TopicTermVector make_topic_term_vector(
    const TopicModel& model, int run_id, int topic_id,
    const std::vector<std::pair<int, double>>& strong_terms,
    const Vocabulary& vocab) {
  TopicTermVector vec;
  vec.run_id = run_id;
  vec.topic_id = topic_id;
  for (const auto& [w, rel] : strong_terms) {
    (void)rel;
    const auto& phrase = vocab.terms[w];
    const double total = static_cast<double>(vocab.stats.at(phrase).total_count);
    vec.weights[phrase] = model.phi_at(topic_id, w) * total;
  }
  return vec;
}

double cosine(const TopicTermVector& u, const TopicTermVector& v) {
  double dot = 0.0, uu = 0.0, vv = 0.0;
  for (const auto& [key, w] : u.weights) {
    uu += w * w;
    auto it = v.weights.find(key);
    if (it != v.weights.end()) dot += w * it->second;
  }
  for (const auto& [key, w] : v.weights) vv += w * w;
  if (uu <= 0.0 || vv <= 0.0) return 0.0;
  return dot / (std::sqrt(uu) * std::sqrt(vv));
}

StabilityReport mean_best_similarity(
    const std::vector<std::vector<TopicTermVector>>& runs, int histogram_bins) {
  if (runs.size() < 2)
    throw std::invalid_argument("mean_best_similarity requires at least 2 runs");
  for (const auto& run : runs)
    if (run.empty()) throw std::runtime_error("stability: run with zero topics");
  if (histogram_bins < 1) throw std::invalid_argument("histogram_bins must be >= 1");

  StabilityReport report;
  const std::size_t n_runs = runs.size();
  for (std::size_t r = 0; r < n_runs; ++r) {
    for (const auto& topic_vec : runs[r]) {
      double sum_best = 0.0;
      for (std::size_t r2 = 0; r2 < n_runs; ++r2) {
        if (r2 == r) continue;
        double best = 0.0;
        for (const auto& other : runs[r2])
          best = std::max(best, cosine(topic_vec, other));
        sum_best += best;
      }
      StabilityEntry entry;
      entry.run_id = topic_vec.run_id;
      entry.topic_id = topic_vec.topic_id;
      entry.mean_best_similarity = sum_best / static_cast<double>(n_runs - 1);
      report.entries.push_back(entry);
    }
  }

  report.histogram.resize(histogram_bins);
  const double width = 1.0 / histogram_bins;
  for (int b = 0; b < histogram_bins; ++b) {
    report.histogram[b].lo = b * width;
    report.histogram[b].hi = (b + 1) * width;
  }
  long long above_half = 0, near_one = 0;
  for (const auto& e : report.entries) {
    int b = static_cast<int>(e.mean_best_similarity / width);
    b = std::clamp(b, 0, histogram_bins - 1);
    report.histogram[b].count += 1;
    if (e.mean_best_similarity > 0.5) ++above_half;
    if (e.mean_best_similarity >= 0.9) ++near_one;
  }
  const double n = static_cast<double>(report.entries.size());
  report.fraction_above_half = above_half / n;
  report.fraction_near_one = near_one / n;
  return report;
}

void write_stability_csv(const StabilityReport& report, const std::filesystem::path& path) {
  CsvWriter csv({"run_id", "topic_id", "mean_best_similarity"});
  for (const auto& e : report.entries)
    csv.add_row({std::to_string(e.run_id), std::to_string(e.topic_id),
                 format_double(e.mean_best_similarity)});
  csv.save(path);
}

void write_histogram_csv(const StabilityReport& report, const std::filesystem::path& path) {
  CsvWriter csv({"bin_lo", "bin_hi", "count"});
  for (const auto& b : report.histogram)
    csv.add_row({format_double(b.lo), format_double(b.hi), std::to_string(b.count)});
  csv.save(path);
}

}  // namespace litmine
