#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "litmine/corpus.hpp"

namespace litmine {

enum class WordClass { Noun, Adjective, Other };

struct Token {
  std::string surface;
  std::string lemma;  // lowercase
  WordClass word_class = WordClass::Other;

  bool is_noun_like() const { return word_class == WordClass::Noun; }
  /// Nouns and adjectives enter the co-occurrence graph.
  bool is_candidate() const { return word_class != WordClass::Other; }
};

struct TokenizedDoc {
  std::string doc_id;
  std::vector<Token> tokens;
};

struct ScoredTerm {
  std::string lemma_phrase;  // 1..4 lemmas joined by single spaces
  double score = 0.0;        // sum of constituent word scores
  std::string doc_id;
  long long occurrences = 1;  // times the phrase was formed in this document
};

/// User overrides for the word-class heuristic: `lemma<TAB>noun|adjective|other`.
struct Lexicon {
  std::unordered_map<std::string, WordClass> entries;

  static Lexicon load(const std::filesystem::path& path);
};

/// Rule-based lemma for a lowercase word (regular plurals, light verbal
/// suffixes, irregular table).
std::string lemmatize(const std::string& lower_word);

/// Deterministic tokenizer + lemmatizer + word-class heuristic over the
/// document's title and body.
TokenizedDoc tokenize_lemmatize(const Document& doc, const Lexicon& lexicon = {});

struct CooccurrenceGraph {
  std::vector<std::string> nodes;  // candidate lemmas, first-appearance order
  std::unordered_map<std::string, int> index;
  std::vector<std::map<int, double>> adjacency;  // symmetric weights

  double weight(const std::string& a, const std::string& b) const;
};

/// Counts co-occurrences of candidate lemmas within `window` consecutive
/// tokens of the full token stream. No self-edges.
CooccurrenceGraph build_cooccurrence_graph(const TokenizedDoc& doc, int window = 10);

/// Weighted PageRank over the co-occurrence graph. Scores are normalized to
/// sum to 1; the empty graph yields an empty map.
std::map<std::string, double> singlerank_scores(const CooccurrenceGraph& graph,
                                                double damping = 0.85,
                                                double tol = 1e-6, int max_iters = 100);

/// Forms noun phrases from runs of consecutive candidate tokens (length <=
/// max_phrase_len, noun head) and scores each as the sum of its word scores.
/// Duplicate phrases within the document are merged keeping the max score.
std::vector<ScoredTerm> extract_scored_terms(const TokenizedDoc& doc,
                                             const std::map<std::string, double>& scores,
                                             int max_phrase_len = 4);

}  // namespace litmine
