#pragma once

// Shared helpers for the test suites: scratch directories, brute-force
// statistical oracles, a dense linear solver, and synthetic corpus builders.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"

namespace testutil {

class TempDir {
 public:
  explicit TempDir(const std::string& prefix) {
    static std::atomic<int> counter{0};
    const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
    path_ = std::filesystem::temp_directory_path() /
            (prefix + "_" + std::to_string(stamp) + "_" +
             std::to_string(counter.fetch_add(1)));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

// Pearson through the raw covariance formula, independent of the library's
// centered-accumulator implementation.
inline double brute_pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxy += x[i] * y[i];
    sxx += x[i] * x[i];
    syy += y[i] * y[i];
  }
  const double cov = sxy - sx * sy / n;
  const double vx = sxx - sx * sx / n;
  const double vy = syy - sy * sy / n;
  return cov / std::sqrt(vx * vy);
}

inline std::vector<double> brute_ranks(const std::vector<double>& v) {
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double below = 0, equal = 0;
    for (std::size_t j = 0; j < v.size(); ++j) {
      if (v[j] < v[i]) ++below;
      if (v[j] == v[i]) ++equal;
    }
    ranks[i] = below + (equal + 1.0) / 2.0;
  }
  return ranks;
}

inline double brute_spearman(const std::vector<double>& x, const std::vector<double>& y) {
  return brute_pearson(brute_ranks(x), brute_ranks(y));
}

// Gaussian elimination with partial pivoting for small dense systems.
// a is row-major n x n and is consumed.
inline bool solve_dense(std::vector<double> a, std::vector<double> b, int n,
                        std::vector<double>& x) {
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(a[perm[r] * n + col]) > std::abs(a[perm[pivot] * n + col])) pivot = r;
    std::swap(perm[col], perm[pivot]);
    const double diag = a[perm[col] * n + col];
    if (std::abs(diag) < 1e-300) return false;
    for (int r = col + 1; r < n; ++r) {
      const double f = a[perm[r] * n + col] / diag;
      for (int c = col; c < n; ++c) a[perm[r] * n + c] -= f * a[perm[col] * n + c];
      b[perm[r]] -= f * b[perm[col]];
    }
  }
  x.assign(n, 0.0);
  for (int col = n - 1; col >= 0; --col) {
    double acc = b[perm[col]];
    for (int c = col + 1; c < n; ++c) acc -= a[perm[col] * n + c] * x[c];
    x[col] = acc / a[perm[col] * n + col];
  }
  return true;
}

// Best min-cosine over all assignments of learned to reference topic rows
// (brute force; fine for K <= 8).
inline double best_matched_min_cosine(const std::vector<double>& learned,
                                      const std::vector<double>& reference, int K,
                                      int V) {
  auto row_cos = [&](int lk, int rk) {
    double dot = 0, a = 0, b = 0;
    for (int w = 0; w < V; ++w) {
      const double x = learned[static_cast<std::size_t>(lk) * V + w];
      const double y = reference[static_cast<std::size_t>(rk) * V + w];
      dot += x * y;
      a += x * x;
      b += y * y;
    }
    return dot / (std::sqrt(a) * std::sqrt(b));
  };
  std::vector<int> perm(K);
  std::iota(perm.begin(), perm.end(), 0);
  double best = -1.0;
  do {
    double worst = 2.0;
    for (int k = 0; k < K; ++k) worst = std::min(worst, row_cos(k, perm[k]));
    best = std::max(best, worst);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

// ---- synthetic corpora ----

struct ThemeSpec {
  std::string name;
  std::vector<std::string> terms;  // noun phrases with a noun head
  double cite_boost = 1.0;
};

inline std::vector<ThemeSpec> default_themes() {
  return {
      {"exoplanets",
       {"exoplanet", "transit survey", "radial velocity", "habitable zone",
        "planet occurrence", "detection pipeline"},
       4.0},
      {"supernovae",
       {"supernova remnant", "shock wave", "light curve", "progenitor channel",
        "explosion energy", "nickel mass"},
       0.8},
      {"clusters",
       {"galaxy cluster", "dark matter", "halo mass", "velocity dispersion",
        "weak lens", "cluster catalog"},
       1.0},
      {"solar",
       {"solar flare", "magnetic field", "plasma density", "corona structure",
        "sunspot cycle", "flux rope"},
       1.2},
      {"pulsars",
       {"neutron star", "pulsar timing", "radio emission", "spin period",
        "glitch activity", "dispersion measure"},
       1.4},
  };
}

inline std::string themed_body(const ThemeSpec& theme, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, theme.terms.size() - 1);
  const std::string& a = theme.terms[pick(rng)];
  const std::string& b = theme.terms[pick(rng)];
  const std::string& c = theme.terms[pick(rng)];
  const std::string& d = theme.terms[pick(rng)];
  std::vector<std::string> sentences{
      "We present a study of the " + a + " and the " + b + ".",
      "Our analysis of the " + c + " builds on observations of the " + a + ".",
      "The " + d + " in this sample shows a clear link with the " + b + ".",
      "We find that the " + c + " is related with the " + a + " in most cases.",
      "These results support the interpretation of the " + d + ".",
  };
  std::shuffle(sentences.begin(), sentences.end(), rng);
  std::string body;
  for (const auto& s : sentences) {
    if (!body.empty()) body += " ";
    body += s;
  }
  return body;
}

struct TrendCorpusOptions {
  int year_first = 1998;
  int year_last = 2010;
  int per_year_base = 15;  // docs per non-growth theme per year
  int growth_start = 2;    // growth-theme docs in year_first; doubles every 2 years
  std::size_t growth_theme = 0;
  std::size_t n_themes = 5;  // use the first n_themes entries of default_themes()
  int reference_year = 2012;  // citation ages measured from here
  double cite_scale = 100.0;
  double cite_alpha = 5.6;
  bool with_citations = true;
  std::uint64_t seed = 20240901;
};

struct TrendCorpusInfo {
  int n_docs = 0;
  std::map<int, int> growth_docs_by_year;
  std::vector<ThemeSpec> themes;
};

// Writes a JSONL corpus where one theme's yearly document count doubles
// every two years while the others stay flat, with citation counts scaled
// per theme so citation impact tracks the planted boost.
inline TrendCorpusInfo write_trend_corpus(const std::filesystem::path& path,
                                          const TrendCorpusOptions& opts = {}) {
  TrendCorpusInfo info;
  info.themes = default_themes();
  info.themes.resize(std::min(opts.n_themes, info.themes.size()));
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> jitter(-3.0, 3.0);
  std::ofstream out(path);

  int doc_no = 0;
  for (int year = opts.year_first; year <= opts.year_last; ++year) {
    for (std::size_t th = 0; th < info.themes.size(); ++th) {
      int count = opts.per_year_base;
      if (th == opts.growth_theme) {
        count = static_cast<int>(std::lround(
            opts.growth_start * std::pow(2.0, (year - opts.year_first) / 2.0)));
        info.growth_docs_by_year[year] = count;
      }
      for (int i = 0; i < count; ++i) {
        const ThemeSpec& theme = info.themes[th];
        nlohmann::json j;
        j["id"] = "d" + std::to_string(doc_no++);
        j["title"] = "A study of the " + theme.terms[0];
        j["body"] = themed_body(theme, rng);
        j["year"] = year;
        if (opts.with_citations) {
          // centered logistic: recent papers start near zero cites and older
          // ones saturate, which is the shape the curve fit expects
          const double t = static_cast<double>(opts.reference_year - year);
          const double s = 1.0 / (1.0 + std::exp(-t / opts.cite_alpha));
          const long long cites = std::llround(
              opts.cite_scale * (s - 0.5) * theme.cite_boost + jitter(rng));
          j["citation_count"] = std::max<long long>(cites, 0);
        }
        out << j.dump() << "\n";
      }
    }
  }
  info.n_docs = doc_no;
  return info;
}

// Small single-year corpus (first n_themes themes, docs_per_theme each),
// handy for smoke tests that do not need a trend.
inline int write_flat_corpus(const std::filesystem::path& path, int n_themes,
                             int docs_per_theme, int year = 2005,
                             std::uint64_t seed = 7) {
  auto themes = default_themes();
  std::mt19937_64 rng(seed);
  std::ofstream out(path);
  int doc_no = 0;
  for (int d = 0; d < docs_per_theme; ++d)
    for (int th = 0; th < n_themes; ++th) {
      nlohmann::json j;
      j["id"] = "f" + std::to_string(doc_no++);
      j["title"] = "Notes on the " + themes[th].terms[0];
      j["body"] = themed_body(themes[th], rng);
      j["year"] = year;
      out << j.dump() << "\n";
    }
  return doc_no;
}

// One external paragraph corpus: a few paragraphs per listed theme.
inline void write_external_corpus(const std::filesystem::path& path,
                                  const std::vector<std::size_t>& theme_ids,
                                  int paragraphs_per_theme = 3,
                                  std::uint64_t seed = 99) {
  auto themes = default_themes();
  std::mt19937_64 rng(seed);
  std::ofstream out(path);
  int doc_no = 0;
  for (std::size_t th : theme_ids)
    for (int i = 0; i < paragraphs_per_theme; ++i) {
      nlohmann::json j;
      j["id"] = "p" + std::to_string(doc_no++);
      j["body"] = themed_body(themes[th], rng);
      j["year"] = 2010;
      out << j.dump() << "\n";
    }
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

}  // namespace testutil

#include "litmine/vocab.hpp"

namespace testutil {

struct PlantedLda {
  litmine::Vocabulary vocab;
  std::vector<litmine::DocTermCounts> docs;
  std::vector<double> true_phi;  // K x V row-major, disjoint uniform blocks
  int K = 0;
  int V = 0;
};

// Documents drawn from K planted topics with disjoint word blocks; topic
// mixtures come from a symmetric Dirichlet via normalized gamma draws.
inline PlantedLda make_planted_lda(int n_docs, int K, int words_per_topic,
                                   int tokens_per_doc, double dirichlet_a,
                                   std::uint64_t data_seed) {
  PlantedLda out;
  out.K = K;
  out.V = K * words_per_topic;

  for (int w = 0; w < out.V; ++w) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "w%03d", w);
    out.vocab.terms.emplace_back(buf);
  }
  for (int w = 0; w < out.V; ++w) out.vocab.index[out.vocab.terms[w]] = w;

  out.true_phi.assign(static_cast<std::size_t>(K) * out.V, 0.0);
  for (int k = 0; k < K; ++k)
    for (int j = 0; j < words_per_topic; ++j)
      out.true_phi[static_cast<std::size_t>(k) * out.V + k * words_per_topic + j] =
          1.0 / words_per_topic;

  std::mt19937_64 rng(data_seed);
  std::gamma_distribution<double> gd(dirichlet_a, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> word_in_topic(0, words_per_topic - 1);

  std::vector<long long> totals(out.V, 0);
  std::vector<long long> doc_freq(out.V, 0);
  out.docs.reserve(n_docs);
  for (int d = 0; d < n_docs; ++d) {
    std::vector<double> theta(K);
    double total = 0.0;
    for (int k = 0; k < K; ++k) {
      theta[k] = gd(rng);
      total += theta[k];
    }
    for (int k = 0; k < K; ++k) theta[k] /= total;

    std::map<int, long long> counts;
    for (int t = 0; t < tokens_per_doc; ++t) {
      double u = unit(rng);
      int k = 0;
      while (k + 1 < K && u >= theta[k]) {
        u -= theta[k];
        ++k;
      }
      counts[k * words_per_topic + word_in_topic(rng)] += 1;
    }
    litmine::DocTermCounts doc;
    for (const auto& [w, c] : counts) {
      doc.push_back({w, c});
      totals[w] += c;
      doc_freq[w] += 1;
    }
    out.docs.push_back(std::move(doc));
  }

  for (int w = 0; w < out.V; ++w) {
    litmine::TermStats s;
    s.lemma_phrase = out.vocab.terms[w];
    s.doc_frequency = doc_freq[w];
    s.total_count = totals[w];
    s.mean_singlerank = 0.1;
    out.vocab.stats[s.lemma_phrase] = s;
  }
  return out;
}

}  // namespace testutil
