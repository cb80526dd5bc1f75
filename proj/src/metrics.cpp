#include "litmine/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "litmine/util.hpp"

namespace litmine {

std::vector<double> tcs(const std::vector<DocTopicInference>& inferences, int K) {
  std::vector<double> sums(K, 0.0);
  for (const auto& inf : inferences) {
    if (static_cast<int>(inf.theta.size()) != K)
      throw std::invalid_argument("tcs: inconsistent topic count across documents");
    for (int k = 0; k < K; ++k) sums[k] += inf.theta[k];
  }
  return sums;
}

std::map<int, std::vector<double>> tcs_timeseries(
    const std::map<int, std::vector<DocTopicInference>>& yearly, int K) {
  std::map<int, std::vector<double>> out;
  for (const auto& [year, infs] : yearly) out[year] = tcs(infs, K);
  return out;
}

namespace {

double cagr_from_endpoints(double start, double end, int y0, int yf, CagrPeriod period) {
  if (yf <= y0) throw std::invalid_argument("tcs_cagr requires yf > y0");
  if (!(start > 0.0))
    throw UndefinedGrowthError("growth rate undefined: starting value is not positive");
  const int p = period == CagrPeriod::Intervals ? yf - y0 : yf - y0 + 1;
  return std::pow(end / start, 1.0 / static_cast<double>(p)) - 1.0;
}

}  // namespace

double tcs_cagr(const std::map<int, double>& series, int y0, int yf, CagrPeriod period) {
  return cagr_from_endpoints(series.at(y0), series.at(yf), y0, yf, period);
}

double tcs_cagr_weighted(const std::map<int, double>& series, int y0, int yf,
                         CagrPeriod period) {
  if (series.size() < 4)
    throw std::invalid_argument("tcs_cagr_weighted requires at least 4 years");
  const double start = (series.at(y0) + series.at(y0 + 1)) / 2.0;
  const double end = (series.at(yf - 1) + series.at(yf)) / 2.0;
  return cagr_from_endpoints(start, end, y0, yf, period);
}

void write_metrics_csv(const std::vector<TopicMetricRow>& rows,
                       const std::vector<std::string>& external_tags,
                       const std::filesystem::path& path) {
  std::vector<std::string> header{"topic_id", "tcs", "tcs_cagr", "tcs_cagr_weighted", "ri"};
  for (const auto& tag : external_tags) header.push_back("tcs_" + tag);
  CsvWriter csv(std::move(header));
  auto opt_field = [](const std::optional<double>& v) {
    return v ? format_double(*v) : std::string("nan");
  };
  for (const auto& row : rows) {
    std::vector<std::string> fields{std::to_string(row.topic_id), format_double(row.tcs),
                                    opt_field(row.tcs_cagr), opt_field(row.tcs_cagr_weighted),
                                    opt_field(row.ri)};
    for (const auto& tag : external_tags) {
      auto it = row.external_tcs.find(tag);
      fields.push_back(it == row.external_tcs.end() ? std::string("nan")
                                                    : format_double(it->second));
    }
    csv.add_row(std::move(fields));
  }
  csv.save(path);
}

void scatter_data(const std::vector<TopicMetricRow>& rows, const ScatterOptions& opts,
                  const std::filesystem::path& scatter_path,
                  const std::filesystem::path& iso_path) {
  CsvWriter scatter({"topic_id", "tcs", "tcs_cagr", "ri", "mlcr", "exploratory"});
  double max_tcs = 0.0;
  std::vector<double> observed_ri;
  for (const auto& row : rows) {
    const bool exploratory = row.tcs < opts.exploratory_tcs_max && row.tcs_cagr &&
                             *row.tcs_cagr > 0.0;
    scatter.add_row({std::to_string(row.topic_id), format_double(row.tcs),
                     row.tcs_cagr ? format_double(*row.tcs_cagr) : "nan",
                     row.ri ? format_double(*row.ri) : "nan",
                     row.mlcr ? format_double(*row.mlcr) : "nan",
                     exploratory ? "1" : "0"});
    max_tcs = std::max(max_tcs, row.tcs);
    if (row.ri && *row.ri > 0.0) observed_ri.push_back(*row.ri);
  }
  scatter.save(scatter_path);

  std::vector<double> levels = opts.iso_ri_levels;
  if (levels.empty() && !observed_ri.empty()) {
    std::sort(observed_ri.begin(), observed_ri.end());
    for (double q : {0.0, 0.25, 0.5, 0.75, 1.0}) {
      const auto idx = static_cast<std::size_t>(q * (observed_ri.size() - 1));
      levels.push_back(observed_ri[idx]);
    }
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  }

  CsvWriter iso({"ri_level", "tcs", "tcs_cagr"});
  if (max_tcs > 0.0) {
    const double lo = max_tcs / 200.0;
    const double hi = max_tcs * 1.05;
    for (double level : levels)
      for (int i = 0; i < opts.curve_samples; ++i) {
        const double t = lo + (hi - lo) * i / (opts.curve_samples - 1);
        iso.add_row({format_double(level), format_double(t),
                     format_double(level / t - opts.offset)});
      }
  }
  iso.save(iso_path);
}

}  // namespace litmine
