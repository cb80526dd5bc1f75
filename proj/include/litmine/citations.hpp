#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "litmine/lda.hpp"
#include "litmine/stats.hpp"

namespace litmine {

struct PaperCitation {
  std::string doc_id;
  long long cites = 0;
  int pub_year = 0;
};

struct CurvePoint {
  double t = 0.0;     // years since publication
  double mean = 0.0;  // mean citations across that year's papers
  double se = 0.0;    // bootstrap standard error of the mean
  int n_papers = 0;
  int year = 0;
};

// One point per publication year with >= 2 papers, t = reference_year - year,
// sorted by t ascending. SE from n_boot seeded resamples.
std::vector<CurvePoint> mean_citation_curve(const std::vector<PaperCitation>& papers,
                                            int reference_year, int n_boot = 1000,
                                            std::uint64_t seed = 0);

struct SigmoidFit {
  double beta = 0.0;        // scale
  double alpha_ts = 0.0;    // timescale, years
  double gamma_bias = 0.0;  // offset
  double cov[3][3] = {};    // parameter covariance (beta, alpha_ts, gamma_bias)
  double fit_rmse = 0.0;    // unweighted
  double linear_slope = 0.0;
  double linear_intercept = 0.0;
  double linear_rmse = 0.0;
  int n_points = 0;

  double value_at(double t) const;
};

// Weighted least squares fit of beta/(1 + exp(-t/alpha)) + gamma by
// multi-start Levenberg-Marquardt (weights 1/se^2; unit weights if any
// se is 0), plus a weighted linear baseline. Throws if no start converges.
SigmoidFit fit_sigmoid(const std::vector<CurvePoint>& points);

// (cites - gamma) / (1 + exp(-t/alpha)) with t = reference_year - pub_year.
// Throws if the result would be negative (possible only when gamma > 0).
double lifetime_citations(const PaperCitation& paper, const SigmoidFit& fit,
                          int reference_year);

struct MlcrResult {
  std::optional<double> value;  // absent when survivors < min_papers
  int n_surviving = 0;
};

struct MlcrFilters {
  long long min_cites = 10;
  double min_inference = 0.2;
  int min_papers = 3;
};

// Mean lifetime citations over papers with cites >= min_cites and
// inference >= min_inference for the topic.
MlcrResult mlcr(int topic_id, const std::vector<DocTopicInference>& inferences,
                const std::map<std::string, double>& lifetime_by_doc,
                const std::map<std::string, long long>& cites_by_doc,
                const MlcrFilters& filters = {});

struct SweepRow {
  double threshold = 0.0;
  std::optional<double> r;   // absent when < 3 topics have both values
  std::optional<double> p;
  double se = 0.0;
  int n_topics = 0;
};

// Recomputes per-topic MLCR at each threshold and correlates it against the
// supplied per-topic metric. Pairs (threshold index i uses seed + i for the
// bootstrap) so each row is reproducible in isolation.
std::vector<SweepRow> threshold_sweep(
    const std::vector<double>& grid, const std::map<int, double>& metric_by_topic,
    const std::vector<DocTopicInference>& inferences,
    const std::map<std::string, double>& lifetime_by_doc,
    const std::map<std::string, long long>& cites_by_doc, int K,
    const MlcrFilters& base_filters, CorrelationMethod method, int n_boot,
    std::uint64_t seed);

void write_sigmoid_json(const SigmoidFit& fit, const std::vector<CurvePoint>& points,
                        const std::filesystem::path& path);
SigmoidFit read_sigmoid_json(const std::filesystem::path& path);

void write_mlcr_csv(const std::vector<std::pair<int, MlcrResult>>& rows,
                    const std::filesystem::path& path);

}  // namespace litmine
