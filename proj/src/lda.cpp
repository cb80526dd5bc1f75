#include "litmine/lda.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <stdexcept>

#include "json.hpp"
#include "litmine/special.hpp"
#include "litmine/util.hpp"

namespace litmine {

namespace {

constexpr double kProbFloor = 1e-12;

// E[log X] for each coordinate of Dirichlet(row), written into out.
void dirichlet_elog(const double* row, int n, double* out) {
  double total = 0.0;
  for (int i = 0; i < n; ++i) total += row[i];
  const double dg_total = digamma(total);
  for (int i = 0; i < n; ++i) out[i] = digamma(row[i]) - dg_total;
}

struct EStepScratch {
  std::vector<double> elog_theta;
  std::vector<double> exp_elog_theta;
  std::vector<double> phinorm;  // per word in doc
};

// One document's coordinate ascent on gamma given fixed exp(E[log beta]).
// exp_elog_beta is K x V row-major. gamma is updated in place; returns the
// implied per-word responsibilities only through sstats accumulation.
void doc_e_step(const DocTermCounts& counts, const double* exp_elog_beta, int K,
                int V, double alpha, int max_iters, double tol,
                std::vector<double>& gamma, EStepScratch& scratch,
                std::vector<double>* sstats) {
  const std::size_t n_ids = counts.size();
  scratch.elog_theta.resize(K);
  scratch.exp_elog_theta.resize(K);
  scratch.phinorm.resize(n_ids);

  for (int it = 0; it < max_iters; ++it) {
    dirichlet_elog(gamma.data(), K, scratch.elog_theta.data());
    for (int k = 0; k < K; ++k) scratch.exp_elog_theta[k] = std::exp(scratch.elog_theta[k]);
    for (std::size_t i = 0; i < n_ids; ++i) {
      double norm = 0.0;
      const int w = counts[i].term;
      for (int k = 0; k < K; ++k)
        norm += scratch.exp_elog_theta[k] * exp_elog_beta[static_cast<std::size_t>(k) * V + w];
      scratch.phinorm[i] = norm + 1e-100;
    }
    double meanchange = 0.0;
    for (int k = 0; k < K; ++k) {
      double acc = 0.0;
      for (std::size_t i = 0; i < n_ids; ++i) {
        const int w = counts[i].term;
        acc += static_cast<double>(counts[i].count) *
               exp_elog_beta[static_cast<std::size_t>(k) * V + w] / scratch.phinorm[i];
      }
      const double updated = alpha + scratch.exp_elog_theta[k] * acc;
      meanchange += std::abs(updated - gamma[k]);
      gamma[k] = updated;
    }
    meanchange /= static_cast<double>(K);
    if (meanchange < tol) break;
  }

  if (sstats) {
    dirichlet_elog(gamma.data(), K, scratch.elog_theta.data());
    for (int k = 0; k < K; ++k) scratch.exp_elog_theta[k] = std::exp(scratch.elog_theta[k]);
    for (std::size_t i = 0; i < n_ids; ++i) {
      double norm = 0.0;
      const int w = counts[i].term;
      for (int k = 0; k < K; ++k)
        norm += scratch.exp_elog_theta[k] * exp_elog_beta[static_cast<std::size_t>(k) * V + w];
      scratch.phinorm[i] = norm + 1e-100;
    }
    for (int k = 0; k < K; ++k)
      for (std::size_t i = 0; i < n_ids; ++i) {
        const int w = counts[i].term;
        (*sstats)[static_cast<std::size_t>(k) * V + w] +=
            static_cast<double>(counts[i].count) * scratch.exp_elog_theta[k] *
            exp_elog_beta[static_cast<std::size_t>(k) * V + w] / scratch.phinorm[i];
      }
  }
}

// Variational lower bound, following the standard batch decomposition.
double compute_elbo(const std::vector<DocTermCounts>& docs,
                    const std::vector<std::vector<double>>& gammas,
                    const std::vector<double>& lambda,
                    const std::vector<double>& elog_beta, int K, int V,
                    double alpha, double eta) {
  double score = 0.0;
  std::vector<double> elog_theta(K);
  for (std::size_t d = 0; d < docs.size(); ++d) {
    dirichlet_elog(gammas[d].data(), K, elog_theta.data());
    for (const auto& tc : docs[d]) {
      double maxv = -std::numeric_limits<double>::infinity();
      for (int k = 0; k < K; ++k)
        maxv = std::max(maxv, elog_theta[k] + elog_beta[static_cast<std::size_t>(k) * V + tc.term]);
      double sum = 0.0;
      for (int k = 0; k < K; ++k)
        sum += std::exp(elog_theta[k] + elog_beta[static_cast<std::size_t>(k) * V + tc.term] - maxv);
      score += static_cast<double>(tc.count) * (std::log(sum) + maxv);
    }
    double gamma_total = 0.0;
    for (int k = 0; k < K; ++k) {
      score += (alpha - gammas[d][k]) * elog_theta[k];
      score += std::lgamma(gammas[d][k]) - std::lgamma(alpha);
      gamma_total += gammas[d][k];
    }
    score += std::lgamma(alpha * K) - std::lgamma(gamma_total);
  }
  for (int k = 0; k < K; ++k) {
    double lambda_total = 0.0;
    for (int w = 0; w < V; ++w) {
      const std::size_t idx = static_cast<std::size_t>(k) * V + w;
      score += (eta - lambda[idx]) * elog_beta[idx];
      score += std::lgamma(lambda[idx]) - std::lgamma(eta);
      lambda_total += lambda[idx];
    }
    score += std::lgamma(eta * V) - std::lgamma(lambda_total);
  }
  return score;
}

}  // namespace

TrainResult train(const std::vector<DocTermCounts>& docs, const Vocabulary& vocab,
                  int K, std::uint64_t seed, double alpha, double eta,
                  const TrainOptions& opts) {
  if (K < 2) throw std::invalid_argument("train requires K >= 2");
  const int V = static_cast<int>(vocab.size());
  if (V < 1) throw std::invalid_argument("train requires a non-empty vocabulary");

  TrainResult result;
  std::vector<DocTermCounts> trainable;
  trainable.reserve(docs.size());
  for (std::size_t d = 0; d < docs.size(); ++d) {
    if (docs[d].empty())
      result.skipped_docs.push_back(d);
    else
      trainable.push_back(docs[d]);
  }
  if (trainable.empty()) throw std::runtime_error("train: no documents with vocabulary terms");
  if (static_cast<std::size_t>(K) > trainable.size())
    throw std::runtime_error("train: K exceeds the number of trainable documents");

  const std::size_t KV = static_cast<std::size_t>(K) * V;
  std::vector<double> lambda(KV);
  std::mt19937_64 rng(seed);
  std::gamma_distribution<double> gamma_init(100.0, 0.01);
  for (std::size_t i = 0; i < KV; ++i) lambda[i] = gamma_init(rng);

  std::vector<std::vector<double>> gammas(trainable.size());
  for (std::size_t d = 0; d < trainable.size(); ++d) {
    long long n_d = 0;
    for (const auto& tc : trainable[d]) n_d += tc.count;
    gammas[d].assign(K, alpha + static_cast<double>(n_d) / K);
  }

  std::vector<double> elog_beta(KV), exp_elog_beta(KV), sstats(KV);
  EStepScratch scratch;
  double prev_elbo = 0.0;

  for (int iter = 0; iter < opts.max_iters; ++iter) {
    for (int k = 0; k < K; ++k)
      dirichlet_elog(&lambda[static_cast<std::size_t>(k) * V], V,
                     &elog_beta[static_cast<std::size_t>(k) * V]);
    for (std::size_t i = 0; i < KV; ++i) exp_elog_beta[i] = std::exp(elog_beta[i]);

    std::fill(sstats.begin(), sstats.end(), 0.0);
    for (std::size_t d = 0; d < trainable.size(); ++d)
      doc_e_step(trainable[d], exp_elog_beta.data(), K, V, alpha,
                 opts.doc_max_iters, opts.doc_tol, gammas[d], scratch, &sstats);

    for (std::size_t i = 0; i < KV; ++i) lambda[i] = eta + sstats[i];

    for (int k = 0; k < K; ++k)
      dirichlet_elog(&lambda[static_cast<std::size_t>(k) * V], V,
                     &elog_beta[static_cast<std::size_t>(k) * V]);
    const double elbo = compute_elbo(trainable, gammas, lambda, elog_beta, K, V, alpha, eta);
    result.elbo_trace.push_back(elbo);
    result.iterations = iter + 1;
    if (iter > 0) {
      const double rel = std::abs(elbo - prev_elbo) / (std::abs(prev_elbo) + 1e-100);
      if (rel < opts.tol) {
        result.converged = true;
        break;
      }
    }
    prev_elbo = elbo;
  }

  result.model.K = K;
  result.model.V = V;
  result.model.alpha = alpha;
  result.model.eta = eta;
  result.model.seed = seed;
  result.model.vocab_hash = vocab.checksum();
  result.model.phi.resize(KV);
  for (int k = 0; k < K; ++k) {
    double row_total = 0.0;
    for (int w = 0; w < V; ++w) row_total += lambda[static_cast<std::size_t>(k) * V + w];
    for (int w = 0; w < V; ++w)
      result.model.phi[static_cast<std::size_t>(k) * V + w] =
          lambda[static_cast<std::size_t>(k) * V + w] / row_total;
  }
  return result;
}

DocTopicInference infer(const TopicModel& model, const std::string& doc_id,
                        const DocTermCounts& counts, int max_iters, double tol) {
  DocTopicInference inf;
  inf.doc_id = doc_id;
  const int K = model.K;
  if (counts.empty()) {
    inf.theta.assign(K, 1.0 / K);
    inf.no_vocab_terms = true;
    return inf;
  }
  const int V = model.V;
  // The frozen model carries normalized phi, so log(phi) stands in for the
  // variational E[log beta] used during training.
  std::vector<double> exp_elog_beta(static_cast<std::size_t>(K) * V);
  for (std::size_t i = 0; i < exp_elog_beta.size(); ++i)
    exp_elog_beta[i] = std::max(model.phi[i], kProbFloor);

  long long n_d = 0;
  for (const auto& tc : counts) n_d += tc.count;
  std::vector<double> gamma(K, model.alpha + static_cast<double>(n_d) / K);
  EStepScratch scratch;
  doc_e_step(counts, exp_elog_beta.data(), K, V, model.alpha, max_iters, tol,
             gamma, scratch, nullptr);

  double total = std::accumulate(gamma.begin(), gamma.end(), 0.0);
  inf.theta.resize(K);
  for (int k = 0; k < K; ++k) inf.theta[k] = gamma[k] / total;
  return inf;
}

CoherenceResult umass_coherence(const TopicModel& model,
                                const std::vector<DocTermCounts>& docs, int top_m) {
  if (top_m < 2) throw std::invalid_argument("umass_coherence requires top_m >= 2");
  const int K = model.K;
  const int V = model.V;
  const int m = std::min(top_m, V);

  // Per-topic top terms ordered by descending phi, ties by term index.
  std::vector<std::vector<int>> tops(K);
  std::vector<int> order(V);
  for (int k = 0; k < K; ++k) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return model.phi_at(k, a) > model.phi_at(k, b);
    });
    tops[k].assign(order.begin(), order.begin() + m);
  }

  std::vector<long long> doc_freq(V, 0);
  std::map<std::pair<int, int>, long long> pair_freq;
  std::vector<int> present;
  for (const auto& doc : docs) {
    present.clear();
    for (const auto& tc : doc)
      if (tc.count > 0) present.push_back(tc.term);
    std::sort(present.begin(), present.end());
    for (std::size_t i = 0; i < present.size(); ++i) {
      doc_freq[present[i]] += 1;
      for (std::size_t j = i + 1; j < present.size(); ++j)
        pair_freq[{present[i], present[j]}] += 1;
    }
  }
  auto co_count = [&](int a, int b) -> long long {
    if (a > b) std::swap(a, b);
    auto it = pair_freq.find({a, b});
    return it == pair_freq.end() ? 0 : it->second;
  };

  CoherenceResult res;
  res.per_topic.resize(K, 0.0);
  for (int k = 0; k < K; ++k) {
    double c = 0.0;
    for (int i = 1; i < m; ++i)
      for (int j = 0; j < i; ++j) {
        // tops[k][j] is at least as probable as tops[k][i]
        const long long denom = doc_freq[tops[k][j]];
        if (denom == 0)
          throw std::runtime_error("umass_coherence: top term absent from corpus");
        c += std::log((static_cast<double>(co_count(tops[k][i], tops[k][j])) + 1.0) /
                      static_cast<double>(denom));
      }
    res.per_topic[k] = c;
    res.mean += c;
  }
  res.mean /= static_cast<double>(K);
  return res;
}

KSelection select_k(const std::vector<DocTermCounts>& docs, const Vocabulary& vocab,
                    const std::vector<int>& k_grid, std::uint64_t seed,
                    double alpha, double eta, const TrainOptions& opts, int top_m) {
  if (k_grid.empty()) throw std::invalid_argument("select_k requires a non-empty grid");
  KSelection sel;
  double best = -std::numeric_limits<double>::infinity();
  for (int K : k_grid) {
    auto trained = train(docs, vocab, K, seed, alpha, eta, opts);
    const double coherence = umass_coherence(trained.model, docs, top_m).mean;
    sel.curve.emplace_back(K, coherence);
    if (coherence > best || (coherence == best && K < sel.best_K)) {
      best = coherence;
      sel.best_K = K;
    }
  }
  return sel;
}

std::vector<double> corpus_term_probs(const std::vector<DocTermCounts>& docs, int V) {
  std::vector<double> probs(V, 0.0);
  double total = 0.0;
  for (const auto& doc : docs)
    for (const auto& tc : doc) {
      probs[tc.term] += static_cast<double>(tc.count);
      total += static_cast<double>(tc.count);
    }
  if (total > 0.0)
    for (auto& p : probs) p /= total;
  return probs;
}

std::vector<double> term_relevance(const TopicModel& model,
                                   const std::vector<double>& term_probs,
                                   double lambda) {
  if (lambda < 0.0 || lambda > 1.0)
    throw std::invalid_argument("relevance lambda must be in [0, 1]");
  if (static_cast<int>(term_probs.size()) != model.V)
    throw std::invalid_argument("term_probs size must match vocabulary");
  std::vector<double> rel(model.phi.size());
  for (int k = 0; k < model.K; ++k)
    for (int w = 0; w < model.V; ++w) {
      const std::size_t idx = static_cast<std::size_t>(k) * model.V + w;
      const double p_topic = std::max(model.phi[idx], kProbFloor);
      const double p_corpus = std::max(term_probs[w], kProbFloor);
      rel[idx] = lambda * std::log(p_topic) +
                 (1.0 - lambda) * std::log(p_topic / p_corpus);
    }
  return rel;
}

std::vector<std::vector<std::pair<int, double>>> strong_terms(
    const std::vector<double>& relevance, int K, int V, double threshold) {
  std::vector<std::vector<std::pair<int, double>>> out(K);
  for (int k = 0; k < K; ++k) {
    auto& list = out[k];
    for (int w = 0; w < V; ++w) {
      const double r = relevance[static_cast<std::size_t>(k) * V + w];
      if (r >= threshold) list.emplace_back(w, r);
    }
    std::stable_sort(list.begin(), list.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
  }
  return out;
}

std::vector<std::pair<std::string, double>> strong_docs(
    const std::vector<DocTopicInference>& inferences, int topic_id, double threshold) {
  std::vector<std::pair<std::string, double>> out;
  for (const auto& inf : inferences)
    if (inf.theta[topic_id] >= threshold)
      out.emplace_back(inf.doc_id, inf.theta[topic_id]);
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  return out;
}

std::vector<TopicSummary> summarize_topics(
    const TopicModel& model, const std::vector<double>& relevance,
    const std::vector<DocTopicInference>& inferences, const Vocabulary& vocab,
    double term_threshold, double doc_threshold) {
  auto terms = strong_terms(relevance, model.K, model.V, term_threshold);
  std::vector<TopicSummary> out(model.K);
  for (int k = 0; k < model.K; ++k) {
    out[k].topic_id = k;
    for (const auto& [w, r] : terms[k])
      out[k].strong_terms.emplace_back(vocab.terms[w], r);
    out[k].strong_docs = strong_docs(inferences, k, doc_threshold);
  }
  return out;
}

void write_model_json(const TopicModel& model, const std::filesystem::path& path) {
  nlohmann::json j;
  j["K"] = model.K;
  j["V"] = model.V;
  j["alpha"] = model.alpha;
  j["eta"] = model.eta;
  j["seed"] = model.seed;
  j["vocab_hash"] = model.vocab_hash;
  j["phi"] = model.phi;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write model file: " + path.string());
  out << j.dump();
  out << '\n';
}

TopicModel read_model_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file: " + path.string());
  nlohmann::json j;
  in >> j;
  TopicModel model;
  model.K = j.at("K").get<int>();
  model.V = j.at("V").get<int>();
  model.alpha = j.at("alpha").get<double>();
  model.eta = j.at("eta").get<double>();
  model.seed = j.at("seed").get<std::uint64_t>();
  model.vocab_hash = j.at("vocab_hash").get<std::uint64_t>();
  model.phi = j.at("phi").get<std::vector<double>>();
  if (model.phi.size() != static_cast<std::size_t>(model.K) * model.V)
    throw std::runtime_error("model file has inconsistent phi dimensions");
  return model;
}

void write_inference_csv(const std::vector<DocTopicInference>& inferences,
                         const std::filesystem::path& path) {
  int K = inferences.empty() ? 0 : static_cast<int>(inferences.front().theta.size());
  std::vector<std::string> header{"doc_id"};
  for (int k = 0; k < K; ++k) header.push_back("theta_" + std::to_string(k));
  CsvWriter csv(std::move(header));
  for (const auto& inf : inferences) {
    std::vector<std::string> row{inf.doc_id};
    for (double v : inf.theta) row.push_back(format_double(v));
    csv.add_row(std::move(row));
  }
  csv.save(path);
}

std::vector<DocTopicInference> read_inference_csv(const std::filesystem::path& path) {
  auto rows = read_csv(path);
  if (rows.empty() || rows[0].size() < 2 || rows[0][0] != "doc_id")
    throw std::runtime_error("malformed inference csv: " + path.string());
  const std::size_t K = rows[0].size() - 1;
  std::vector<DocTopicInference> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].size() != K + 1)
      throw std::runtime_error("malformed inference csv row");
    DocTopicInference inf;
    inf.doc_id = rows[i][0];
    for (std::size_t k = 0; k < K; ++k) inf.theta.push_back(std::stod(rows[i][k + 1]));
    out.push_back(std::move(inf));
  }
  return out;
}

}  // namespace litmine
