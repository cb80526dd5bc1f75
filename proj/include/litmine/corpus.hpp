#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace litmine {

/// One text block: a journal paper (title + abstract), a report paragraph,
/// or a whitepaper body.
struct Document {
  std::string id;
  std::string title;  // empty for paragraph corpora
  std::string body;
  int year = 0;
  std::optional<long long> citation_count;
  std::string corpus_tag;

  /// Title and body joined by a single space (just the body when no title).
  std::string full_text() const;
};

struct Corpus {
  std::vector<Document> documents;
  std::string tag;

  /// (first_year, last_year) over the documents; (0, 0) when empty.
  std::pair<int, int> year_range() const;
};

struct RejectedRecord {
  std::size_t line_no = 0;
  std::string reason;
};

struct ParseOptions {
  std::optional<int> year_min;  // records outside the range are rejected
  std::optional<int> year_max;
};

struct ParseResult {
  Corpus corpus;
  std::vector<RejectedRecord> rejects;
};

/// Reads newline-delimited JSON records (id, body, year required; title and
/// citation_count optional). Schema violations land in the rejects list with
/// their line number; a duplicate id or an unreadable file is fatal.
ParseResult parse_corpus(const std::filesystem::path& path, const std::string& tag,
                         const ParseOptions& opts = {});

/// Writes a corpus back to newline-delimited JSON (inverse of parse_corpus).
void write_corpus(const Corpus& corpus, const std::filesystem::path& path);

/// One `<line_no>\t<reason>` line per rejected record.
void write_rejects(const std::vector<RejectedRecord>& rejects,
                   const std::filesystem::path& path);

/// Strips control characters, drops page-header lines (bare page numbers,
/// "page N", lone roman numerals), and collapses whitespace. Idempotent.
std::string clean_text(const std::string& raw);

/// Cleans title and body of every document and keeps those whose cleaned
/// body is at least min_chars long.
Corpus clean_filter(const Corpus& corpus, std::size_t min_chars);

std::map<int, Corpus> partition_by_year(const Corpus& corpus);

/// Splits plain text into paragraphs on blank lines (for report chapters
/// arriving as one text file per chapter).
std::vector<std::string> split_paragraphs(const std::string& text);

}  // namespace litmine
