#include "litmine/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "litmine/special.hpp"

namespace litmine {

namespace {

double pearson_r(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0)
    throw std::invalid_argument("correlation undefined for constant input");
  double r = sxy / std::sqrt(sxx * syy);
  return std::clamp(r, -1.0, 1.0);
}

void check_pair(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size())
    throw std::invalid_argument("correlation inputs must have equal length");
  if (x.size() < 3)
    throw std::invalid_argument("correlation requires at least 3 observations");
}

CorrelationResult finish(double r, std::size_t n) {
  CorrelationResult res;
  res.r = r;
  res.n = n;
  const double df = static_cast<double>(n - 2);
  if (std::abs(r) >= 1.0) {
    res.p = 0.0;
  } else {
    const double t = r * std::sqrt(df / (1.0 - r * r));
    res.p = student_t_two_sided_p(t, df);
  }
  return res;
}

}  // namespace

CorrelationResult pearson(const std::vector<double>& x, const std::vector<double>& y) {
  check_pair(x, y);
  return finish(pearson_r(x, y), x.size());
}

std::vector<double> average_ranks(const std::vector<double>& v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
    const double avg = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

CorrelationResult spearman(const std::vector<double>& x, const std::vector<double>& y) {
  check_pair(x, y);
  return finish(pearson_r(average_ranks(x), average_ranks(y)), x.size());
}

double bootstrap_se(const std::vector<double>& x, const std::vector<double>& y,
                    CorrelationMethod method, int n_boot, std::uint64_t seed) {
  check_pair(x, y);
  if (n_boot < 2) throw std::invalid_argument("bootstrap_se requires n_boot >= 2");
  const std::size_t n = x.size();
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::vector<double> rs;
  rs.reserve(static_cast<std::size_t>(n_boot));
  std::vector<double> bx(n), by(n);
  for (int b = 0; b < n_boot; ++b) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t j = pick(rng);
      bx[i] = x[j];
      by[i] = y[j];
    }
    try {
      const double r = method == CorrelationMethod::Pearson
                           ? pearson_r(bx, by)
                           : pearson_r(average_ranks(bx), average_ranks(by));
      rs.push_back(r);
    } catch (const std::invalid_argument&) {
      // degenerate resample, skip
    }
  }
  if (rs.size() < 2)
    throw std::runtime_error("bootstrap_se: fewer than 2 usable resamples");
  double mean = std::accumulate(rs.begin(), rs.end(), 0.0) / static_cast<double>(rs.size());
  double ss = 0.0;
  for (double r : rs) ss += (r - mean) * (r - mean);
  return std::sqrt(ss / static_cast<double>(rs.size() - 1));
}

RunAggregate aggregate_runs(const std::vector<CorrelationResult>& runs) {
  if (runs.size() < 2)
    throw std::invalid_argument("aggregate_runs requires at least 2 runs");
  RunAggregate agg;
  agg.n_runs = runs.size();
  double sum_r = 0.0, sum_p = 0.0;
  for (const auto& r : runs) {
    sum_r += r.r;
    sum_p += r.p;
  }
  agg.mean_r = sum_r / static_cast<double>(runs.size());
  agg.mean_p = sum_p / static_cast<double>(runs.size());
  double ss = 0.0;
  for (const auto& r : runs) ss += (r.r - agg.mean_r) * (r.r - agg.mean_r);
  const double sd = std::sqrt(ss / static_cast<double>(runs.size() - 1));
  agg.se_r = sd / std::sqrt(static_cast<double>(runs.size()));
  return agg;
}

double exact_permutation_pvalue(const std::vector<double>& x,
                                const std::vector<double>& y,
                                CorrelationMethod method) {
  check_pair(x, y);
  if (x.size() > 12)
    throw std::invalid_argument("exact permutation test limited to n <= 12");
  auto corr = [&](const std::vector<double>& a, const std::vector<double>& b) {
    return method == CorrelationMethod::Pearson
               ? pearson_r(a, b)
               : pearson_r(average_ranks(a), average_ranks(b));
  };
  const double observed = std::abs(corr(x, y));
  std::vector<double> perm = y;
  std::sort(perm.begin(), perm.end());
  long long total = 0, at_least = 0;
  do {
    ++total;
    if (std::abs(corr(x, perm)) >= observed - 1e-12) ++at_least;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return static_cast<double>(at_least) / static_cast<double>(total);
}

}  // namespace litmine
