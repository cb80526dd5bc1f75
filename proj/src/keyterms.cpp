#include "litmine/keyterms.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <unordered_set>

#include "litmine/util.hpp"

namespace litmine {

namespace {

const std::unordered_map<std::string, std::string>& irregular_lemmas() {
  static const std::unordered_map<std::string, std::string> table = {
      {"supernovae", "supernova"}, {"nebulae", "nebula"},     {"nuclei", "nucleus"},
      {"phenomena", "phenomenon"}, {"spectra", "spectrum"},   {"maxima", "maximum"},
      {"minima", "minimum"},       {"criteria", "criterion"}, {"analyses", "analysis"},
      {"hypotheses", "hypothesis"},{"indices", "index"},      {"matrices", "matrix"},
      {"vertices", "vertex"},      {"axes", "axis"},          {"media", "medium"},
      {"halos", "halo"},           {"haloes", "halo"},        {"foci", "focus"},
      {"radii", "radius"},         {"corona", "corona"},      {"coronae", "corona"},
  };
  return table;
}

// singular words that would be mangled by the -s rules
const std::unordered_set<std::string>& protected_words() {
  static const std::unordered_set<std::string> table = {
      "gas", "lens", "bias", "chaos", "cosmos", "species", "series", "physics",
      "dynamics", "kinematics", "statistics",
  };
  return table;
}

const std::unordered_set<std::string>& stopwords() {
  static const std::unordered_set<std::string> table = {
      "a", "an", "the", "and", "or", "but", "if", "then", "than", "so", "as",
      "of", "in", "on", "at", "to", "for", "from", "by", "with", "within",
      "without", "about", "into", "onto", "over", "under", "between", "among",
      "through", "during", "before", "after", "above", "below", "up", "down",
      "out", "off", "again", "further", "here", "there", "where", "when",
      "why", "how", "what", "which", "who", "whom", "whose", "this", "that",
      "these", "those", "is", "are", "was", "were", "be", "been", "being",
      "am", "have", "has", "had", "having", "do", "does", "did", "doing",
      "will", "would", "shall", "should", "can", "could", "may", "might",
      "must", "not", "no", "nor", "only", "own", "same", "such", "too",
      "very", "also", "both", "each", "more", "most", "other", "some", "any",
      "all", "its", "it", "we", "our", "ours", "us", "they", "their", "them",
      "he", "she", "his", "her", "you", "your", "i", "me", "my", "one",
      "two", "three", "et", "al", "eg", "ie", "via", "per", "while", "whereas",
      "however", "therefore", "thus", "hence", "moreover", "furthermore",
      "respectively", "approximately", "using", "used", "use", "show", "shown",
      "shows", "find", "found", "present", "presented", "presents", "report",
      "reported", "discuss", "discussed", "describe", "described", "obtain",
      "obtained", "suggest", "suggests", "suggested", "based", "due",
  };
  return table;
}

// common short adjectives with no telltale suffix
const std::unordered_set<std::string>& common_adjectives() {
  static const std::unordered_set<std::string> table = {
      "new", "high", "low", "large", "small", "dark", "early", "late", "young",
      "old", "hot", "cold", "red", "blue", "bright", "faint", "strong", "weak",
      "long", "short", "deep", "broad", "narrow", "rapid", "slow", "recent",
      "several", "many", "few", "different", "similar", "possible", "likely",
      "mean", "first", "second", "good", "best", "main", "upper", "lower",
      "inner", "outer", "near", "far", "full", "half", "soft", "hard",
  };
  return table;
}

// nouns the -ate verb heuristic would otherwise misclassify
const std::unordered_set<std::string>& noun_exceptions() {
  static const std::unordered_set<std::string> table = {
      "candidate", "estimate", "coordinate", "substrate", "aggregate",
  };
  return table;
}

bool ends_with(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

bool all_digits(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) {
    return std::isdigit(c) != 0;
  });
}

WordClass classify(const std::string& lemma, const Lexicon& lexicon) {
  if (auto it = lexicon.entries.find(lemma); it != lexicon.entries.end()) return it->second;
  if (lemma.size() < 2 || all_digits(lemma)) return WordClass::Other;
  if (stopwords().count(lemma)) return WordClass::Other;
  if (noun_exceptions().count(lemma)) return WordClass::Noun;
  if (common_adjectives().count(lemma)) return WordClass::Adjective;
  for (std::string_view suf : {"al", "ic", "ous", "ive", "ary", "ful", "less", "able", "ible"})
    if (ends_with(lemma, suf) && lemma.size() > suf.size() + 2) return WordClass::Adjective;
  for (std::string_view suf : {"ize", "ise", "ify"})
    if (ends_with(lemma, suf) && lemma.size() > 4) return WordClass::Other;
  if (ends_with(lemma, "ate") && lemma.size() >= 8) return WordClass::Other;
  return WordClass::Noun;
}

}  // namespace

std::string lemmatize(const std::string& w) {
  if (w.size() < 4) return w;
  if (auto it = irregular_lemmas().find(w); it != irregular_lemmas().end()) return it->second;
  if (protected_words().count(w)) return w;

  if (ends_with(w, "sses")) return w.substr(0, w.size() - 2);
  if (ends_with(w, "ies") && w.size() > 4) return w.substr(0, w.size() - 3) + "y";
  for (std::string_view suf : {"xes", "ches", "shes", "zes", "oes"})
    if (ends_with(w, suf)) return w.substr(0, w.size() - 2);
  if (ends_with(w, "ied")) return w.substr(0, w.size() - 3) + "y";
  if (ends_with(w, "ing") && w.size() >= 7) {
    std::string stem = w.substr(0, w.size() - 3);
    for (std::string_view e : {"at", "iz", "is", "bl"})
      if (ends_with(stem, e)) return stem + "e";
    return stem;
  }
  if (ends_with(w, "ed") && w.size() >= 6) {
    std::string stem = w.substr(0, w.size() - 2);
    for (std::string_view e : {"at", "iz", "is", "bl"})
      if (ends_with(stem, e)) return stem + "e";
    return stem;
  }
  if (ends_with(w, "ss") || ends_with(w, "us") || ends_with(w, "is")) return w;
  if (ends_with(w, "s")) return w.substr(0, w.size() - 1);
  return w;
}

Lexicon Lexicon::load(const std::filesystem::path& path) {
  Lexicon lex;
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open lexicon file: " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    auto tab = t.find('\t');
    if (tab == std::string::npos)
      throw std::runtime_error("lexicon line " + std::to_string(line_no) +
                               ": expected `lemma<TAB>class`");
    std::string lemma = to_lower(trim(t.substr(0, tab)));
    std::string cls = to_lower(trim(t.substr(tab + 1)));
    WordClass wc;
    if (cls == "noun") wc = WordClass::Noun;
    else if (cls == "adjective" || cls == "adj") wc = WordClass::Adjective;
    else if (cls == "other") wc = WordClass::Other;
    else
      throw std::runtime_error("lexicon line " + std::to_string(line_no) +
                               ": unknown class \"" + cls + "\"");
    lex.entries[lemma] = wc;
  }
  return lex;
}

TokenizedDoc tokenize_lemmatize(const Document& doc, const Lexicon& lexicon) {
  TokenizedDoc out;
  out.doc_id = doc.id;

  const std::string text = doc.full_text();
  auto is_word_char = [](unsigned char c) { return std::isalnum(c) != 0; };

  size_t i = 0;
  while (i < text.size()) {
    if (!is_word_char(static_cast<unsigned char>(text[i]))) {
      ++i;
      continue;
    }
    size_t start = i;
    while (i < text.size() && is_word_char(static_cast<unsigned char>(text[i]))) ++i;
    // internal hyphens bind tokens together ("x-ray")
    while (i < text.size() && text[i] == '-' && i + 1 < text.size() &&
           is_word_char(static_cast<unsigned char>(text[i + 1]))) {
      ++i;
      while (i < text.size() && is_word_char(static_cast<unsigned char>(text[i]))) ++i;
    }
    Token tok;
    tok.surface = text.substr(start, i - start);
    tok.lemma = lemmatize(to_lower(tok.surface));
    tok.word_class = classify(tok.lemma, lexicon);
    out.tokens.push_back(std::move(tok));
  }
  return out;
}

double CooccurrenceGraph::weight(const std::string& a, const std::string& b) const {
  auto ia = index.find(a);
  auto ib = index.find(b);
  if (ia == index.end() || ib == index.end()) return 0.0;
  const auto& row = adjacency[ia->second];
  auto it = row.find(ib->second);
  return it == row.end() ? 0.0 : it->second;
}

CooccurrenceGraph build_cooccurrence_graph(const TokenizedDoc& doc, int window) {
  if (window < 2) throw std::invalid_argument("co-occurrence window must be >= 2");
  CooccurrenceGraph g;

  auto node_of = [&g](const std::string& lemma) {
    auto [it, inserted] = g.index.try_emplace(lemma, static_cast<int>(g.nodes.size()));
    if (inserted) {
      g.nodes.push_back(lemma);
      g.adjacency.emplace_back();
    }
    return it->second;
  };

  const auto& toks = doc.tokens;
  const auto n = static_cast<std::ptrdiff_t>(toks.size());
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    if (!toks[i].is_candidate()) continue;
    int a = node_of(toks[i].lemma);
    for (std::ptrdiff_t j = i + 1; j < n && j - i < window; ++j) {
      if (!toks[j].is_candidate()) continue;
      if (toks[j].lemma == toks[i].lemma) continue;
      int b = node_of(toks[j].lemma);
      g.adjacency[a][b] += 1.0;
      g.adjacency[b][a] += 1.0;
    }
  }
  return g;
}

std::map<std::string, double> singlerank_scores(const CooccurrenceGraph& graph,
                                                double damping, double tol,
                                                int max_iters) {
  const size_t n = graph.nodes.size();
  std::map<std::string, double> result;
  if (n == 0) return result;

  std::vector<double> out_weight(n, 0.0);
  for (size_t u = 0; u < n; ++u)
    for (const auto& [v, w] : graph.adjacency[u]) out_weight[u] += w;

  std::vector<double> score(n, 1.0 / static_cast<double>(n));
  std::vector<double> next(n, 0.0);
  for (int iter = 0; iter < max_iters; ++iter) {
    double dangling = 0.0;
    for (size_t u = 0; u < n; ++u)
      if (out_weight[u] == 0.0) dangling += score[u];

    const double base = (1.0 - damping) / static_cast<double>(n) +
                        damping * dangling / static_cast<double>(n);
    std::fill(next.begin(), next.end(), base);
    for (size_t u = 0; u < n; ++u) {
      if (out_weight[u] == 0.0) continue;
      const double share = damping * score[u] / out_weight[u];
      for (const auto& [v, w] : graph.adjacency[u]) next[v] += share * w;
    }

    double max_change = 0.0;
    for (size_t v = 0; v < n; ++v)
      max_change = std::max(max_change, std::fabs(next[v] - score[v]));
    score.swap(next);
    if (max_change < tol) break;
  }

  double total = 0.0;
  for (double s : score) total += s;
  for (size_t v = 0; v < n; ++v) result[graph.nodes[v]] = score[v] / total;
  return result;
}

namespace {

struct PhraseAccumulator {
  std::map<std::string, ScoredTerm> by_phrase;

  void add(const std::vector<const Token*>& run, const std::map<std::string, double>& scores,
           const std::string& doc_id) {
    // phrase head must be a noun; trailing modifiers are dropped
    size_t end = run.size();
    while (end > 0 && !run[end - 1]->is_noun_like()) --end;
    if (end == 0) return;

    std::string phrase;
    double score = 0.0;
    for (size_t i = 0; i < end; ++i) {
      if (i) phrase.push_back(' ');
      phrase += run[i]->lemma;
      auto it = scores.find(run[i]->lemma);
      score += it == scores.end() ? 0.0 : it->second;
    }
    auto [it, inserted] = by_phrase.try_emplace(phrase, ScoredTerm{phrase, score, doc_id, 1});
    if (!inserted) {
      it->second.score = std::max(it->second.score, score);
      it->second.occurrences += 1;
    }
  }
};

double window_score(const std::vector<const Token*>& run, size_t start, size_t len,
                    const std::map<std::string, double>& scores) {
  double s = 0.0;
  for (size_t i = start; i < start + len; ++i) {
    auto it = scores.find(run[i]->lemma);
    s += it == scores.end() ? 0.0 : it->second;
  }
  return s;
}

void emit_run(const std::vector<const Token*>& run, size_t max_len,
              const std::map<std::string, double>& scores, const std::string& doc_id,
              PhraseAccumulator& acc) {
  if (run.empty()) return;
  if (run.size() <= max_len) {
    acc.add(run, scores, doc_id);
    return;
  }
  // over-long run: take the highest-scoring window (ties: longer, then
  // earlier), then recurse on what remains either side
  size_t best_start = 0, best_len = 1;
  double best = -1.0;
  for (size_t len = 1; len <= max_len; ++len) {
    for (size_t start = 0; start + len <= run.size(); ++start) {
      double s = window_score(run, start, len, scores);
      bool better = s > best || (s == best && (len > best_len ||
                                 (len == best_len && start < best_start)));
      if (better) {
        best = s;
        best_start = start;
        best_len = len;
      }
    }
  }
  const std::vector<const Token*> chosen(run.begin() + best_start,
                                         run.begin() + best_start + best_len);
  const std::vector<const Token*> left(run.begin(), run.begin() + best_start);
  const std::vector<const Token*> right(run.begin() + best_start + best_len, run.end());
  acc.add(chosen, scores, doc_id);
  emit_run(left, max_len, scores, doc_id, acc);
  emit_run(right, max_len, scores, doc_id, acc);
}

}  // namespace

std::vector<ScoredTerm> extract_scored_terms(const TokenizedDoc& doc,
                                             const std::map<std::string, double>& scores,
                                             int max_phrase_len) {
  if (max_phrase_len < 1) throw std::invalid_argument("max_phrase_len must be >= 1");
  PhraseAccumulator acc;
  std::vector<const Token*> run;
  for (const auto& tok : doc.tokens) {
    if (tok.is_candidate()) {
      run.push_back(&tok);
    } else if (!run.empty()) {
      emit_run(run, static_cast<size_t>(max_phrase_len), scores, doc.doc_id, acc);
      run.clear();
    }
  }
  if (!run.empty()) emit_run(run, static_cast<size_t>(max_phrase_len), scores, doc.doc_id, acc);

  std::vector<ScoredTerm> out;
  out.reserve(acc.by_phrase.size());
  for (auto& [phrase, term] : acc.by_phrase) out.push_back(std::move(term));
  return out;
}

}  // namespace litmine
