#include "litmine/vocab.hpp"

#include <fstream>
#include <stdexcept>

#include "litmine/util.hpp"

namespace litmine {

int Vocabulary::index_of(const std::string& phrase) const {
  auto it = index.find(phrase);
  return it == index.end() ? -1 : it->second;
}

std::uint64_t Vocabulary::checksum() const {
  std::string joined;
  for (const auto& t : terms) {
    joined += t;
    joined.push_back('\n');
  }
  return fnv1a64(joined);
}

std::map<std::string, TermStats> accumulate_stats(
    const std::vector<std::vector<ScoredTerm>>& per_doc_terms, std::size_t n_docs) {
  if (n_docs < 1) throw std::invalid_argument("accumulate_stats requires n_docs >= 1");
  std::map<std::string, TermStats> stats;
  for (const auto& doc_terms : per_doc_terms) {
    for (const auto& term : doc_terms) {
      auto& s = stats[term.lemma_phrase];
      if (s.lemma_phrase.empty()) s.lemma_phrase = term.lemma_phrase;
      s.doc_frequency += 1;  // term lists are per-document deduplicated
      s.total_count += term.occurrences;
      s.mean_singlerank += term.score;  // running sum, divided below
    }
  }
  for (auto& [phrase, s] : stats)
    s.mean_singlerank /= static_cast<double>(s.doc_frequency);
  return stats;
}

Vocabulary apply_filters(const std::map<std::string, TermStats>& stats,
                         std::size_t n_docs, const VocabFilters& filters,
                         const std::set<std::string>& blacklist) {
  if (!(filters.max_df_frac > 0.0 && filters.max_df_frac <= 1.0))
    throw std::invalid_argument("max_df_frac must be in (0, 1]");
  if (filters.min_total < 0) throw std::invalid_argument("min_total must be >= 0");

  Vocabulary vocab;
  for (const auto& [phrase, s] : stats) {
    const double df_frac = static_cast<double>(s.doc_frequency) / static_cast<double>(n_docs);
    if (df_frac > filters.max_df_frac) continue;
    if (s.total_count < filters.min_total) continue;
    if (s.mean_singlerank < filters.min_mean_score) continue;
    if (blacklist.count(phrase)) continue;
    vocab.terms.push_back(phrase);
    vocab.stats[phrase] = s;
  }
  if (vocab.terms.empty())
    throw std::runtime_error(
        "vocabulary filters removed every term (" + std::to_string(stats.size()) +
        " candidates); topic modeling is impossible with these thresholds");
  // std::map iteration already yields lexicographic order
  for (size_t i = 0; i < vocab.terms.size(); ++i)
    vocab.index[vocab.terms[i]] = static_cast<int>(i);
  return vocab;
}

std::set<std::string> load_blacklist(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open blacklist file: " + path.string());
  std::set<std::string> blacklist;
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::string phrase = collapse_whitespace(to_lower(line));
    if (!phrase.empty()) blacklist.insert(phrase);
  }
  return blacklist;
}

void write_vocab_csv(const Vocabulary& vocab, const std::filesystem::path& path) {
  CsvWriter csv({"index", "phrase", "doc_frequency", "total_count", "mean_singlerank"});
  for (size_t i = 0; i < vocab.terms.size(); ++i) {
    const auto& s = vocab.stats.at(vocab.terms[i]);
    csv.add_row({std::to_string(i), s.lemma_phrase, std::to_string(s.doc_frequency),
                 std::to_string(s.total_count), format_double(s.mean_singlerank)});
  }
  csv.save(path);
}

Vocabulary read_vocab_csv(const std::filesystem::path& path) {
  auto rows = read_csv(path);
  if (rows.empty() || rows[0].size() != 5)
    throw std::runtime_error("malformed vocabulary csv: " + path.string());
  Vocabulary vocab;
  for (size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.size() != 5) throw std::runtime_error("malformed vocabulary csv row");
    TermStats s;
    s.lemma_phrase = r[1];
    s.doc_frequency = std::stoll(r[2]);
    s.total_count = std::stoll(r[3]);
    s.mean_singlerank = std::stod(r[4]);
    vocab.terms.push_back(s.lemma_phrase);
    vocab.stats[s.lemma_phrase] = s;
    vocab.index[s.lemma_phrase] = static_cast<int>(vocab.terms.size()) - 1;
  }
  if (vocab.terms.empty()) throw std::runtime_error("empty vocabulary csv: " + path.string());
  return vocab;
}

DocTermCounts encode_document(const std::vector<ScoredTerm>& terms, const Vocabulary& vocab) {
  std::map<int, long long> counts;
  for (const auto& t : terms) {
    int idx = vocab.index_of(t.lemma_phrase);
    if (idx >= 0) counts[idx] += t.occurrences;
  }
  DocTermCounts out;
  out.reserve(counts.size());
  for (const auto& [idx, c] : counts) out.push_back({idx, c});
  return out;
}

}  // namespace litmine
