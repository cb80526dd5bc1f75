#include "doctest.h"

#include <cmath>
#include <random>
#include <set>
#include <stdexcept>

#include "litmine/metrics.hpp"
#include "litmine/util.hpp"
#include "support.hpp"

using namespace litmine;

namespace {

DocTopicInference inf_of(const std::string& id, std::vector<double> theta) {
  DocTopicInference inf;
  inf.doc_id = id;
  inf.theta = std::move(theta);
  return inf;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("contribution sums add inference mass per topic") {
  std::vector<DocTopicInference> infs{
      inf_of("a", {1.0, 0.0}),
      inf_of("b", {0.5, 0.5}),
      inf_of("c", {0.25, 0.75}),
  };
  auto sums = tcs(infs, 2);
  REQUIRE(sums.size() == 2);
  CHECK(sums[0] == doctest::Approx(1.75).epsilon(1e-12));
  CHECK(sums[1] == doctest::Approx(1.25).epsilon(1e-12));

  CHECK(tcs({}, 3) == std::vector<double>{0.0, 0.0, 0.0});
  CHECK_THROWS_AS(tcs({inf_of("a", {1.0})}, 2), std::invalid_argument);
}

TEST_CASE("total contribution equals document count when rows sum to one") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<DocTopicInference> infs;
  const int K = 4;
  for (int d = 0; d < 200; ++d) {
    std::vector<double> theta(K);
    double total = 0.0;
    for (double& t : theta) {
      t = u(rng) + 1e-6;
      total += t;
    }
    for (double& t : theta) t /= total;
    infs.push_back(inf_of("d" + std::to_string(d), theta));
  }
  auto sums = tcs(infs, K);
  double grand = 0.0;
  for (double s : sums) grand += s;
  CHECK(grand == doctest::Approx(200.0).epsilon(1e-9));
}

TEST_CASE("duplicating every document doubles each topic sum") {
  std::vector<DocTopicInference> infs{inf_of("a", {0.9, 0.1}),
                                      inf_of("b", {0.3, 0.7})};
  auto once = tcs(infs, 2);
  auto twice_input = infs;
  twice_input.insert(twice_input.end(), infs.begin(), infs.end());
  auto twice = tcs(twice_input, 2);
  for (int k = 0; k < 2; ++k)
    CHECK(twice[k] == doctest::Approx(2.0 * once[k]).epsilon(1e-12));
}

TEST_CASE("yearly series group sums by year and their totals match") {
  std::map<int, std::vector<DocTopicInference>> yearly;
  yearly[2000] = {inf_of("a", {1.0, 0.0}), inf_of("b", {0.5, 0.5})};
  yearly[2001] = {inf_of("c", {0.25, 0.75})};
  auto series = tcs_timeseries(yearly, 2);
  REQUIRE(series.size() == 2);
  CHECK(series.at(2000)[0] == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(series.at(2000)[1] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(series.at(2001)[0] == doctest::Approx(0.25).epsilon(1e-12));

  std::vector<DocTopicInference> all;
  for (const auto& [y, infs] : yearly) all.insert(all.end(), infs.begin(), infs.end());
  auto total = tcs(all, 2);
  for (int k = 0; k < 2; ++k)
    CHECK(series.at(2000)[k] + series.at(2001)[k] ==
          doctest::Approx(total[k]).epsilon(1e-12));
}

TEST_CASE("flat series grow at rate zero") {
  std::map<int, double> series{{2000, 5.0}, {2001, 5.0}, {2002, 5.0}};
  CHECK(tcs_cagr(series, 2000, 2002) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("growth rate of a doubling over twelve intervals") {
  std::map<int, double> series{{1998, 10.0}, {2010, 20.0}};
  CHECK(tcs_cagr(series, 1998, 2010) ==
        doctest::Approx(0.059463094359295).epsilon(1e-9));
  // per-year convention divides over one more period
  CHECK(tcs_cagr(series, 1998, 2010, CagrPeriod::Years) ==
        doctest::Approx(std::pow(2.0, 1.0 / 13.0) - 1.0).epsilon(1e-12));
}

TEST_CASE("halving yields the matching negative rate") {
  std::map<int, double> series{{1998, 20.0}, {2010, 10.0}};
  CHECK(tcs_cagr(series, 1998, 2010) ==
        doctest::Approx(std::pow(0.5, 1.0 / 12.0) - 1.0).epsilon(1e-12));
  CHECK(tcs_cagr(series, 1998, 2010) == doctest::Approx(-0.0561256).epsilon(1e-4));
}

TEST_CASE("growth rate sign matches endpoint comparison on random series") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> v(0.1, 100.0);
  for (int trial = 0; trial < 1000; ++trial) {
    std::map<int, double> series;
    const int y0 = 1990 + static_cast<int>(rng() % 10);
    const int yf = y0 + 1 + static_cast<int>(rng() % 15);
    series[y0] = v(rng);
    series[yf] = v(rng);
    const double rate = tcs_cagr(series, y0, yf);
    if (series[yf] > series[y0]) CHECK(rate > 0.0);
    if (series[yf] < series[y0]) CHECK(rate < 0.0);
    if (series[yf] == series[y0]) CHECK(rate == 0.0);
  }
}

TEST_CASE("growth is undefined from a non-positive start") {
  std::map<int, double> series{{2000, 0.0}, {2005, 10.0}};
  CHECK_THROWS_AS(tcs_cagr(series, 2000, 2005), UndefinedGrowthError);
  CHECK_THROWS_AS(tcs_cagr(series, 2005, 2000), std::invalid_argument);
}

TEST_CASE("weighted growth rate averages the two years at each end") {
  std::map<int, double> series{{2000, 10.0}, {2001, 14.0}, {2002, 18.0}, {2003, 22.0}};
  // endpoints: (10+14)/2 = 12 and (18+22)/2 = 20 over 3 intervals
  CHECK(tcs_cagr_weighted(series, 2000, 2003) ==
        doctest::Approx(std::pow(20.0 / 12.0, 1.0 / 3.0) - 1.0).epsilon(1e-12));

  std::map<int, double> flat{{2000, 7.0}, {2001, 7.0}, {2002, 7.0}, {2003, 7.0}};
  CHECK(tcs_cagr_weighted(flat, 2000, 2003) == doctest::Approx(0.0).epsilon(1e-12));

  std::map<int, double> three{{2000, 1.0}, {2001, 2.0}, {2002, 3.0}};
  CHECK_THROWS_AS(tcs_cagr_weighted(three, 2000, 2002), std::invalid_argument);
}

TEST_CASE("weighted growth dampens a first-year spike") {
  // a spike at the start inflates the plain rate's denominator year only;
  // averaging it with the calmer neighbour moves the rate toward the trend
  std::map<int, double> series{{2000, 0.5}, {2001, 4.0}, {2002, 6.0},
                               {2003, 8.0}, {2004, 10.0}};
  const double plain = tcs_cagr(series, 2000, 2004);
  const double weighted = tcs_cagr_weighted(series, 2000, 2004);
  CHECK(weighted < plain);
  CHECK(weighted > 0.0);
}

TEST_CASE("rising interest index combines level and growth") {
  CHECK(ri(100.0, 0.15, 0.05) == doctest::Approx(20.0).epsilon(1e-12));
  CHECK(ri(100.0, -0.05, 0.05) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(ri(40.0, 0.0, 0.05) == doctest::Approx(2.0).epsilon(1e-12));
  // linear in the contribution sum at fixed growth
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 500.0);
  for (int i = 0; i < 100; ++i) {
    const double t = u(rng), g = 0.12;
    CHECK(ri(2.0 * t, g, 0.05) == doctest::Approx(2.0 * ri(t, g, 0.05)).epsilon(1e-12));
  }
}

TEST_CASE("metrics csv writes nan for undefined quantities") {
  TopicMetricRow a;
  a.topic_id = 0;
  a.tcs = 12.5;
  a.tcs_cagr = 0.08;
  a.tcs_cagr_weighted = 0.07;
  a.ri = ri(12.5, 0.08, 0.05);
  a.external_tcs["survey"] = 3.25;
  TopicMetricRow b;
  b.topic_id = 1;
  b.tcs = 4.0;  // growth undefined for this topic

  testutil::TempDir dir("metrics");
  write_metrics_csv({a, b}, {"survey"}, dir.path() / "metrics.csv");
  auto rows = read_csv(dir.path() / "metrics.csv");
  REQUIRE(rows.size() == 3);
  CHECK(rows[0] == std::vector<std::string>{"topic_id", "tcs", "tcs_cagr",
                                            "tcs_cagr_weighted", "ri", "tcs_survey"});
  CHECK(rows[1][0] == "0");
  CHECK(std::stod(rows[1][1]) == 12.5);
  CHECK(std::stod(rows[1][5]) == 3.25);
  CHECK(rows[2][2] == "nan");
  CHECK(rows[2][3] == "nan");
  CHECK(rows[2][4] == "nan");
  CHECK(rows[2][5] == "nan");
}

TEST_CASE("scatter rows flag low-volume growing topics as exploratory") {
  TopicMetricRow grow;
  grow.topic_id = 0;
  grow.tcs = 100.0;
  grow.tcs_cagr = 0.2;
  grow.ri = ri(100.0, 0.2, 0.05);
  TopicMetricRow big;
  big.topic_id = 1;
  big.tcs = 900.0;
  big.tcs_cagr = 0.2;
  big.ri = ri(900.0, 0.2, 0.05);
  TopicMetricRow shrink;
  shrink.topic_id = 2;
  shrink.tcs = 50.0;
  shrink.tcs_cagr = -0.1;
  shrink.ri = ri(50.0, -0.1, 0.05);

  testutil::TempDir dir("scatter");
  ScatterOptions opts;
  scatter_data({grow, big, shrink}, opts, dir.path() / "scatter.csv",
               dir.path() / "iso.csv");
  auto rows = read_csv(dir.path() / "scatter.csv");
  REQUIRE(rows.size() == 4);
  CHECK(rows[1][5] == "1");  // growing below the volume cap
  CHECK(rows[2][5] == "0");  // above the cap
  CHECK(rows[3][5] == "0");  // not growing
}

TEST_CASE("iso curves pass through the equation cagr = level/tcs - offset") {
  TopicMetricRow row;
  row.topic_id = 0;
  row.tcs = 200.0;
  row.tcs_cagr = 0.1;
  row.ri = ri(200.0, 0.1, 0.05);

  testutil::TempDir dir("iso");
  ScatterOptions opts;
  opts.iso_ri_levels = {30.0};
  opts.curve_samples = 10;
  scatter_data({row}, opts, dir.path() / "scatter.csv", dir.path() / "iso.csv");
  auto rows = read_csv(dir.path() / "iso.csv");
  REQUIRE(rows.size() == 11);
  CHECK(rows[0] == std::vector<std::string>{"ri_level", "tcs", "tcs_cagr"});
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double level = std::stod(rows[i][0]);
    const double t = std::stod(rows[i][1]);
    const double g = std::stod(rows[i][2]);
    CHECK(level == 30.0);
    CHECK(g == doctest::Approx(level / t - opts.offset).epsilon(1e-12));
  }
}

TEST_CASE("default iso levels are quantiles of the positive observed index") {
  std::vector<TopicMetricRow> rows;
  for (int i = 0; i < 5; ++i) {
    TopicMetricRow r;
    r.topic_id = i;
    r.tcs = 100.0 + i;
    r.tcs_cagr = 0.1;
    r.ri = 10.0 * (i + 1);  // 10, 20, 30, 40, 50
    rows.push_back(r);
  }
  testutil::TempDir dir("isoq");
  ScatterOptions opts;
  opts.curve_samples = 3;
  scatter_data(rows, opts, dir.path() / "scatter.csv", dir.path() / "iso.csv");
  auto iso = read_csv(dir.path() / "iso.csv");
  std::set<std::string> levels;
  for (std::size_t i = 1; i < iso.size(); ++i) levels.insert(iso[i][0]);
  CHECK(levels == std::set<std::string>{"10", "20", "30", "40", "50"});
}

}  // TEST_SUITE
