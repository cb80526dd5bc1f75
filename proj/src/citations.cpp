#include "litmine/citations.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "litmine/util.hpp"

namespace litmine {

namespace {

double sigmoid_value(double beta, double alpha, double gamma, double t) {
  return beta / (1.0 + std::exp(-t / alpha)) + gamma;
}

// Solves the 3x3 system A x = b in place with partial pivoting.
// Returns false when the matrix is singular to working precision.
bool solve3(double a[3][3], double b[3], double x[3]) {
  int perm[3] = {0, 1, 2};
  for (int col = 0; col < 3; ++col) {
    int pivot = col;
    for (int r = col + 1; r < 3; ++r)
      if (std::abs(a[perm[r]][col]) > std::abs(a[perm[pivot]][col])) pivot = r;
    std::swap(perm[col], perm[pivot]);
    const double diag = a[perm[col]][col];
    if (std::abs(diag) < 1e-300) return false;
    for (int r = col + 1; r < 3; ++r) {
      const double f = a[perm[r]][col] / diag;
      for (int c = col; c < 3; ++c) a[perm[r]][c] -= f * a[perm[col]][c];
      b[perm[r]] -= f * b[perm[col]];
    }
  }
  for (int col = 2; col >= 0; --col) {
    double acc = b[perm[col]];
    for (int c = col + 1; c < 3; ++c) acc -= a[perm[col]][c] * x[c];
    x[col] = acc / a[perm[col]][col];
  }
  return true;
}

bool invert3(const double a[3][3], double inv[3][3]) {
  for (int col = 0; col < 3; ++col) {
    double m[3][3];
    double b[3] = {0, 0, 0};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) m[i][j] = a[i][j];
    b[col] = 1.0;
    double x[3];
    if (!solve3(m, b, x)) return false;
    for (int i = 0; i < 3; ++i) inv[i][col] = x[i];
  }
  return true;
}

double weighted_sse(const std::vector<CurvePoint>& pts, const std::vector<double>& w,
                    double beta, double alpha, double gamma) {
  double sse = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double r = pts[i].mean - sigmoid_value(beta, alpha, gamma, pts[i].t);
    sse += w[i] * r * r;
  }
  return sse;
}

struct LmOutcome {
  bool converged = false;
  double beta = 0.0, alpha = 0.0, gamma = 0.0;
  double sse = std::numeric_limits<double>::infinity();
};

LmOutcome run_lm(const std::vector<CurvePoint>& pts, const std::vector<double>& w,
                 double beta, double alpha, double gamma) {
  LmOutcome out;
  double damping = 1e-3;
  double sse = weighted_sse(pts, w, beta, alpha, gamma);

  for (int iter = 0; iter < 500; ++iter) {
    // Normal equations J^T W J and J^T W r at the current parameters.
    double jtj[3][3] = {};
    double jtr[3] = {};
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const double t = pts[i].t;
      const double s = 1.0 / (1.0 + std::exp(-t / alpha));
      const double j0 = s;                                  // d/d beta
      const double j1 = -beta * t * s * (1.0 - s) / (alpha * alpha);  // d/d alpha
      const double j2 = 1.0;                                // d/d gamma
      const double resid = pts[i].mean - (beta * s + gamma);
      const double jac[3] = {j0, j1, j2};
      for (int r = 0; r < 3; ++r) {
        jtr[r] += w[i] * jac[r] * resid;
        for (int c = 0; c < 3; ++c) jtj[r][c] += w[i] * jac[r] * jac[c];
      }
    }

    bool stepped = false;
    for (int attempt = 0; attempt < 25 && !stepped; ++attempt) {
      double a[3][3];
      double b[3] = {jtr[0], jtr[1], jtr[2]};
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c)
          a[r][c] = jtj[r][c] + (r == c ? damping * jtj[r][r] : 0.0);
      double delta[3];
      if (!solve3(a, b, delta)) {
        damping *= 10.0;
        continue;
      }
      const double nb = beta + delta[0];
      const double na = alpha + delta[1];
      const double ng = gamma + delta[2];
      if (!(na > 0.0) || !std::isfinite(nb) || !std::isfinite(na) || !std::isfinite(ng)) {
        damping *= 10.0;
        continue;
      }
      const double new_sse = weighted_sse(pts, w, nb, na, ng);
      if (new_sse <= sse) {
        double rel = 0.0;
        rel = std::max(rel, std::abs(delta[0]) / (std::abs(beta) + 1e-12));
        rel = std::max(rel, std::abs(delta[1]) / (std::abs(alpha) + 1e-12));
        rel = std::max(rel, std::abs(delta[2]) / (std::abs(gamma) + 1e-12));
        beta = nb;
        alpha = na;
        gamma = ng;
        sse = new_sse;
        damping = std::max(damping / 10.0, 1e-12);
        stepped = true;
        if (rel < 1e-8) {
          out.converged = true;
          out.beta = beta;
          out.alpha = alpha;
          out.gamma = gamma;
          out.sse = sse;
          return out;
        }
      } else {
        damping *= 10.0;
      }
    }
    if (!stepped) break;  // damping exhausted; this start stalls
  }
  return out;
}

}  // namespace

std::vector<CurvePoint> mean_citation_curve(const std::vector<PaperCitation>& papers,
                                            int reference_year, int n_boot,
                                            std::uint64_t seed) {
  if (n_boot < 2) throw std::invalid_argument("mean_citation_curve requires n_boot >= 2");
  std::map<int, std::vector<double>> by_year;
  for (const auto& p : papers)
    by_year[p.pub_year].push_back(static_cast<double>(p.cites));

  std::vector<CurvePoint> points;
  std::mt19937_64 rng(seed);
  for (const auto& [year, cites] : by_year) {
    if (cites.size() < 2) continue;
    CurvePoint pt;
    pt.year = year;
    pt.t = static_cast<double>(reference_year - year);
    pt.n_papers = static_cast<int>(cites.size());
    pt.mean = std::accumulate(cites.begin(), cites.end(), 0.0) /
              static_cast<double>(cites.size());

    std::uniform_int_distribution<std::size_t> pick(0, cites.size() - 1);
    std::vector<double> means;
    means.reserve(static_cast<std::size_t>(n_boot));
    for (int b = 0; b < n_boot; ++b) {
      double total = 0.0;
      for (std::size_t i = 0; i < cites.size(); ++i) total += cites[pick(rng)];
      means.push_back(total / static_cast<double>(cites.size()));
    }
    const double mean_of_means =
        std::accumulate(means.begin(), means.end(), 0.0) / static_cast<double>(means.size());
    double ss = 0.0;
    for (double m : means) ss += (m - mean_of_means) * (m - mean_of_means);
    pt.se = std::sqrt(ss / static_cast<double>(means.size() - 1));
    points.push_back(pt);
  }
  std::sort(points.begin(), points.end(),
            [](const CurvePoint& a, const CurvePoint& b) { return a.t < b.t; });
  return points;
}

double SigmoidFit::value_at(double t) const {
  return sigmoid_value(beta, alpha_ts, gamma_bias, t);
}

SigmoidFit fit_sigmoid(const std::vector<CurvePoint>& points) {
  if (points.size() < 4)
    throw std::invalid_argument("fit_sigmoid requires at least 4 points");
  double tmin = points.front().t, tmax = points.front().t;
  double ymin = points.front().mean, ymax = points.front().mean;
  for (const auto& p : points) {
    tmin = std::min(tmin, p.t);
    tmax = std::max(tmax, p.t);
    ymin = std::min(ymin, p.mean);
    ymax = std::max(ymax, p.mean);
  }
  if (tmax - tmin < 5.0)
    throw std::invalid_argument("fit_sigmoid requires points spanning at least 5 years");

  bool any_zero_se = false;
  for (const auto& p : points)
    if (p.se <= 0.0) any_zero_se = true;
  std::vector<double> w(points.size(), 1.0);
  if (!any_zero_se)
    for (std::size_t i = 0; i < points.size(); ++i) w[i] = 1.0 / (points[i].se * points[i].se);

  const double beta0 = std::max(ymax - ymin, 1e-6);
  const double gamma0 = ymin;
  LmOutcome best;
  std::ostringstream diag;
  for (double alpha0 : {2.0, 5.0, 10.0}) {
    LmOutcome out = run_lm(points, w, beta0, alpha0, gamma0);
    diag << "start alpha=" << alpha0 << (out.converged ? " converged" : " stalled")
         << " sse=" << out.sse << "; ";
    if (out.converged && out.sse < best.sse) best = out;
  }
  if (!best.converged)
    throw std::runtime_error("fit_sigmoid: no start converged (" + diag.str() + ")");

  SigmoidFit fit;
  fit.beta = best.beta;
  fit.alpha_ts = best.alpha;
  fit.gamma_bias = best.gamma;
  fit.n_points = static_cast<int>(points.size());

  // Covariance from the final normal equations, scaled by reduced chi-square.
  double jtj[3][3] = {};
  for (const auto& p : points) {
    const double s = 1.0 / (1.0 + std::exp(-p.t / fit.alpha_ts));
    const double jac[3] = {s, -fit.beta * p.t * s * (1.0 - s) / (fit.alpha_ts * fit.alpha_ts),
                           1.0};
    const double wi = any_zero_se ? 1.0 : 1.0 / (p.se * p.se);
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) jtj[r][c] += wi * jac[r] * jac[c];
  }
  double inv[3][3];
  if (invert3(jtj, inv)) {
    const double dof = std::max(static_cast<double>(points.size()) - 3.0, 1.0);
    const double scale = best.sse / dof;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) fit.cov[r][c] = inv[r][c] * scale;
  }

  double sse_unweighted = 0.0;
  for (const auto& p : points) {
    const double r = p.mean - fit.value_at(p.t);
    sse_unweighted += r * r;
  }
  fit.fit_rmse = std::sqrt(sse_unweighted / static_cast<double>(points.size()));

  // Weighted linear baseline via closed-form normal equations.
  double sw = 0.0, swt = 0.0, swy = 0.0, swtt = 0.0, swty = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double wi = w[i];
    sw += wi;
    swt += wi * points[i].t;
    swy += wi * points[i].mean;
    swtt += wi * points[i].t * points[i].t;
    swty += wi * points[i].t * points[i].mean;
  }
  const double det = sw * swtt - swt * swt;
  fit.linear_slope = (sw * swty - swt * swy) / det;
  fit.linear_intercept = (swtt * swy - swt * swty) / det;
  double lin_sse = 0.0;
  for (const auto& p : points) {
    const double r = p.mean - (fit.linear_slope * p.t + fit.linear_intercept);
    lin_sse += r * r;
  }
  fit.linear_rmse = std::sqrt(lin_sse / static_cast<double>(points.size()));
  return fit;
}

double lifetime_citations(const PaperCitation& paper, const SigmoidFit& fit,
                          int reference_year) {
  const double t = static_cast<double>(reference_year - paper.pub_year);
  const double lc = (static_cast<double>(paper.cites) - fit.gamma_bias) /
                    (1.0 + std::exp(-t / fit.alpha_ts));
  if (lc < 0.0)
    throw std::runtime_error(
        "lifetime_citations: negative estimate (fitted offset exceeds citation count)");
  return lc;
}

MlcrResult mlcr(int topic_id, const std::vector<DocTopicInference>& inferences,
                const std::map<std::string, double>& lifetime_by_doc,
                const std::map<std::string, long long>& cites_by_doc,
                const MlcrFilters& filters) {
  MlcrResult res;
  double total = 0.0;
  for (const auto& inf : inferences) {
    if (inf.theta[topic_id] < filters.min_inference) continue;
    auto cit = cites_by_doc.find(inf.doc_id);
    if (cit == cites_by_doc.end() || cit->second < filters.min_cites) continue;
    auto lit = lifetime_by_doc.find(inf.doc_id);
    if (lit == lifetime_by_doc.end()) continue;
    total += lit->second;
    res.n_surviving += 1;
  }
  if (res.n_surviving >= filters.min_papers)
    res.value = total / static_cast<double>(res.n_surviving);
  return res;
}

std::vector<SweepRow> threshold_sweep(
    const std::vector<double>& grid, const std::map<int, double>& metric_by_topic,
    const std::vector<DocTopicInference>& inferences,
    const std::map<std::string, double>& lifetime_by_doc,
    const std::map<std::string, long long>& cites_by_doc, int K,
    const MlcrFilters& base_filters, CorrelationMethod method, int n_boot,
    std::uint64_t seed) {
  if (grid.empty()) throw std::invalid_argument("threshold_sweep requires a non-empty grid");
  std::vector<SweepRow> rows;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    SweepRow row;
    row.threshold = grid[g];
    MlcrFilters filters = base_filters;
    filters.min_inference = grid[g];

    std::vector<double> xs, ys;
    for (int k = 0; k < K; ++k) {
      auto mit = metric_by_topic.find(k);
      if (mit == metric_by_topic.end()) continue;
      MlcrResult m = mlcr(k, inferences, lifetime_by_doc, cites_by_doc, filters);
      if (!m.value) continue;
      xs.push_back(mit->second);
      ys.push_back(*m.value);
    }
    row.n_topics = static_cast<int>(xs.size());
    if (xs.size() >= 3) {
      try {
        CorrelationResult c = method == CorrelationMethod::Pearson ? pearson(xs, ys)
                                                                   : spearman(xs, ys);
        row.r = c.r;
        row.p = c.p;
        row.se = bootstrap_se(xs, ys, method, n_boot, seed + g);
      } catch (const std::invalid_argument&) {
        // constant columns at this threshold: leave the correlation absent
      }
    }
    rows.push_back(row);
  }
  return rows;
}

void write_sigmoid_json(const SigmoidFit& fit, const std::vector<CurvePoint>& points,
                        const std::filesystem::path& path) {
  nlohmann::json j;
  j["beta"] = fit.beta;
  j["alpha"] = fit.alpha_ts;
  j["gamma"] = fit.gamma_bias;
  j["fit_rmse"] = fit.fit_rmse;
  j["linear_slope"] = fit.linear_slope;
  j["linear_intercept"] = fit.linear_intercept;
  j["linear_rmse"] = fit.linear_rmse;
  j["n_points"] = fit.n_points;
  auto cov = nlohmann::json::array();
  for (int r = 0; r < 3; ++r) {
    auto row = nlohmann::json::array();
    for (int c = 0; c < 3; ++c) row.push_back(fit.cov[r][c]);
    cov.push_back(row);
  }
  j["covariance"] = cov;
  auto pts = nlohmann::json::array();
  for (const auto& p : points) {
    pts.push_back({{"t", p.t},
                   {"mean", p.mean},
                   {"se", p.se},
                   {"n_papers", p.n_papers},
                   {"year", p.year}});
  }
  j["points"] = pts;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write sigmoid fit file: " + path.string());
  out << j.dump(2) << '\n';
}

SigmoidFit read_sigmoid_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open sigmoid fit file: " + path.string());
  nlohmann::json j;
  in >> j;
  SigmoidFit fit;
  fit.beta = j.at("beta").get<double>();
  fit.alpha_ts = j.at("alpha").get<double>();
  fit.gamma_bias = j.at("gamma").get<double>();
  fit.fit_rmse = j.at("fit_rmse").get<double>();
  fit.linear_slope = j.at("linear_slope").get<double>();
  fit.linear_intercept = j.at("linear_intercept").get<double>();
  fit.linear_rmse = j.at("linear_rmse").get<double>();
  fit.n_points = j.at("n_points").get<int>();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) fit.cov[r][c] = j.at("covariance")[r][c].get<double>();
  return fit;
}

void write_mlcr_csv(const std::vector<std::pair<int, MlcrResult>>& rows,
                    const std::filesystem::path& path) {
  CsvWriter csv({"topic_id", "mlcr", "n_papers_surviving"});
  for (const auto& [topic, res] : rows)
    csv.add_row({std::to_string(topic), res.value ? format_double(*res.value) : "nan",
                 std::to_string(res.n_surviving)});
  csv.save(path);
}

}  // namespace litmine
