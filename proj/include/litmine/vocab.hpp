#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "litmine/keyterms.hpp"

namespace litmine {

struct TermStats {
  std::string lemma_phrase;
  long long doc_frequency = 0;  // documents containing the term
  long long total_count = 0;    // total occurrences
  double mean_singlerank = 0.0; // mean score over documents containing the term
};

struct Vocabulary {
  std::vector<std::string> terms;  // lexicographic, dense indices 0..N-1
  std::map<std::string, TermStats> stats;
  std::unordered_map<std::string, int> index;

  int size() const { return static_cast<int>(terms.size()); }
  int index_of(const std::string& phrase) const;  // -1 when absent

  /// Checksum over the ordered term list; binds trained models to this
  /// vocabulary.
  std::uint64_t checksum() const;
};

std::map<std::string, TermStats> accumulate_stats(
    const std::vector<std::vector<ScoredTerm>>& per_doc_terms, std::size_t n_docs);

struct VocabFilters {
  double max_df_frac = 0.20;     // drop terms in more than this fraction of docs
  long long min_total = 300;     // drop terms occurring fewer times in total
  double min_mean_score = 0.015; // drop terms with lower mean SingleRank score
};

/// Applies the three automatic filters plus the blacklist. Throws when the
/// result is empty (topic modeling would be impossible).
Vocabulary apply_filters(const std::map<std::string, TermStats>& stats,
                         std::size_t n_docs, const VocabFilters& filters,
                         const std::set<std::string>& blacklist);

/// One phrase per line; '#' starts a comment. Phrases are lowercased and
/// whitespace-normalized.
std::set<std::string> load_blacklist(const std::filesystem::path& path);

void write_vocab_csv(const Vocabulary& vocab, const std::filesystem::path& path);
Vocabulary read_vocab_csv(const std::filesystem::path& path);

/// Sparse document encoding against a vocabulary: (term index, count) pairs
/// ordered by term index.
struct TermCount {
  int term = 0;
  long long count = 0;
};
using DocTermCounts = std::vector<TermCount>;

DocTermCounts encode_document(const std::vector<ScoredTerm>& terms, const Vocabulary& vocab);

}  // namespace litmine
