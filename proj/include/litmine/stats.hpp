#pragma once

#include <cstdint>
#include <vector>

namespace litmine {

struct CorrelationResult {
  double r = 0.0;
  double p = 1.0;
  std::size_t n = 0;
};

// Pearson correlation with a two-sided p-value from the t distribution.
// Throws if the inputs differ in length, have fewer than 3 elements, or
// either side has zero variance.
CorrelationResult pearson(const std::vector<double>& x, const std::vector<double>& y);

// Spearman rank correlation: Pearson applied to average ranks (ties share
// the mean of the rank positions they occupy).
CorrelationResult spearman(const std::vector<double>& x, const std::vector<double>& y);

// Average ranks, 1-based. (3.5 for a two-way tie at positions 3 and 4.)
std::vector<double> average_ranks(const std::vector<double>& v);

enum class CorrelationMethod { Pearson, Spearman };

// Standard error of the correlation coefficient over B paired bootstrap
// resamples (sample stddev, ddof=1). Resamples that collapse to zero
// variance are skipped; throws if fewer than 2 resamples survive.
double bootstrap_se(const std::vector<double>& x, const std::vector<double>& y,
                    CorrelationMethod method, int n_boot, std::uint64_t seed);

struct RunAggregate {
  double mean_r = 0.0;
  double se_r = 0.0;
  double mean_p = 1.0;
  std::size_t n_runs = 0;
};

// Mean and standard error of per-run correlation estimates. se_r is the
// sample stddev divided by sqrt(n_runs); requires at least 2 runs.
RunAggregate aggregate_runs(const std::vector<CorrelationResult>& runs);

// Exact two-sided permutation p-value: the fraction of permutations of y
// whose |r| is >= |r_observed| (within 1e-12). Factorial cost, so n <= 12.
double exact_permutation_pvalue(const std::vector<double>& x,
                                const std::vector<double>& y,
                                CorrelationMethod method);

}  // namespace litmine
