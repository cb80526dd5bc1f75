#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "litmine/lda.hpp"

namespace litmine {

enum class CagrPeriod { Intervals, Years };

struct TopicMetricRow {
  int topic_id = 0;
  double tcs = 0.0;
  std::map<int, double> tcs_by_year;
  std::optional<double> tcs_cagr;           // absent when growth is undefined
  std::optional<double> tcs_cagr_weighted;
  std::optional<double> ri;
  std::optional<double> mlcr;
  std::map<std::string, double> external_tcs;  // corpus_tag -> value
};

// Per-topic sum of inference scores. K disambiguates the empty corpus.
std::vector<double> tcs(const std::vector<DocTopicInference>& inferences, int K);

// Year -> per-topic contribution sums.
std::map<int, std::vector<double>> tcs_timeseries(
    const std::map<int, std::vector<DocTopicInference>>& yearly, int K);

struct UndefinedGrowthError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Compound annual growth rate between the series values at y0 and yf.
// P is yf - y0 for Intervals (default) or yf - y0 + 1 for Years.
// Throws UndefinedGrowthError when the starting value is not positive.
double tcs_cagr(const std::map<int, double>& series, int y0, int yf,
                CagrPeriod period = CagrPeriod::Intervals);

// Same rate with endpoints replaced by two-year means: avg of (y0, y0+1)
// against avg of (yf-1, yf). P is unchanged. Requires at least 4 years.
double tcs_cagr_weighted(const std::map<int, double>& series, int y0, int yf,
                         CagrPeriod period = CagrPeriod::Intervals);

inline double ri(double tcs_value, double cagr, double offset) {
  return (cagr + offset) * tcs_value;
}

void write_metrics_csv(const std::vector<TopicMetricRow>& rows,
                       const std::vector<std::string>& external_tags,
                       const std::filesystem::path& path);

struct ScatterOptions {
  double offset = 0.05;
  double exploratory_tcs_max = 700.0;  // flag high-growth topics below this
  std::vector<double> iso_ri_levels;   // empty -> quantiles of observed RI
  int curve_samples = 100;
};

// Emits scatter.csv (per-topic point data) and iso_ri.csv (constant-RI
// curve samples cagr = level/tcs - offset).
void scatter_data(const std::vector<TopicMetricRow>& rows, const ScatterOptions& opts,
                  const std::filesystem::path& scatter_path,
                  const std::filesystem::path& iso_path);

}  // namespace litmine
