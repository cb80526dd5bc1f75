#include "litmine/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <regex>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "json.hpp"
#include "litmine/util.hpp"

namespace litmine {

std::string Document::full_text() const {
  if (title.empty()) return body;
  if (body.empty()) return title;
  return title + " " + body;
}

std::pair<int, int> Corpus::year_range() const {
  if (documents.empty()) return {0, 0};
  int lo = documents.front().year, hi = lo;
  for (const auto& d : documents) {
    lo = std::min(lo, d.year);
    hi = std::max(hi, d.year);
  }
  return {lo, hi};
}

ParseResult parse_corpus(const std::filesystem::path& path, const std::string& tag,
                         const ParseOptions& opts) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open corpus file: " + path.string());

  ParseResult result;
  result.corpus.tag = tag;
  std::unordered_set<std::string> seen_ids;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;

    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error&) {
      result.rejects.push_back({line_no, "invalid JSON"});
      continue;
    }
    if (!rec.is_object()) {
      result.rejects.push_back({line_no, "record is not a JSON object"});
      continue;
    }

    auto reject = [&](const std::string& why) { result.rejects.push_back({line_no, why}); };

    if (!rec.contains("id") || !rec["id"].is_string()) {
      reject("missing or non-string \"id\"");
      continue;
    }
    if (!rec.contains("body") || !rec["body"].is_string()) {
      reject("missing or non-string \"body\"");
      continue;
    }
    if (!rec.contains("year") || !rec["year"].is_number_integer()) {
      reject("missing or non-integer \"year\"");
      continue;
    }

    Document doc;
    doc.id = rec["id"].get<std::string>();
    doc.body = rec["body"].get<std::string>();
    doc.year = rec["year"].get<int>();
    doc.corpus_tag = tag;

    if (rec.contains("title")) {
      if (!rec["title"].is_string()) {
        reject("non-string \"title\"");
        continue;
      }
      doc.title = rec["title"].get<std::string>();
    }
    if (rec.contains("citation_count")) {
      if (!rec["citation_count"].is_number_integer() ||
          rec["citation_count"].get<long long>() < 0) {
        reject("\"citation_count\" must be a non-negative integer");
        continue;
      }
      doc.citation_count = rec["citation_count"].get<long long>();
    }

    if ((opts.year_min && doc.year < *opts.year_min) ||
        (opts.year_max && doc.year > *opts.year_max)) {
      reject("year " + std::to_string(doc.year) + " outside configured range");
      continue;
    }

    if (!seen_ids.insert(doc.id).second) {
      throw std::runtime_error("duplicate document id \"" + doc.id + "\" at line " +
                               std::to_string(line_no) + " of " + path.string());
    }
    result.corpus.documents.push_back(std::move(doc));
  }
  return result;
}

void write_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::string out;
  for (const auto& d : corpus.documents) {
    nlohmann::json rec;
    rec["id"] = d.id;
    if (!d.title.empty()) rec["title"] = d.title;
    rec["body"] = d.body;
    rec["year"] = d.year;
    if (d.citation_count) rec["citation_count"] = *d.citation_count;
    out += rec.dump();
    out += '\n';
  }
  write_file(path, out);
}

void write_rejects(const std::vector<RejectedRecord>& rejects,
                   const std::filesystem::path& path) {
  std::string out;
  for (const auto& r : rejects) {
    out += std::to_string(r.line_no);
    out += '\t';
    out += r.reason;
    out += '\n';
  }
  write_file(path, out);
}

namespace {

bool is_page_header_line(const std::string& line) {
  static const std::regex bare_number(R"(^\s*\d+\s*$)");
  static const std::regex page_n(R"(^\s*page\s+\d+(\s+of\s+\d+)?\s*$)", std::regex::icase);
  // roman numerals up to 39, the range seen as front-matter page numbers
  static const std::regex roman(R"(^\s*x{0,3}(ix|iv|v?i{0,3})\s*$)", std::regex::icase);
  if (trim(line).empty()) return false;
  return std::regex_match(line, bare_number) || std::regex_match(line, page_n) ||
         std::regex_match(line, roman);
}

}  // namespace

std::string clean_text(const std::string& raw) {
  // control characters become spaces; \n and \f survive as line breaks so the
  // page-header pass can see line boundaries
  std::string decontrolled;
  decontrolled.reserve(raw.size());
  for (unsigned char c : raw) {
    if (c == '\n' || c == '\f') {
      decontrolled.push_back('\n');
    } else if (c < 0x20 || c == 0x7f) {
      decontrolled.push_back(' ');
    } else {
      decontrolled.push_back(static_cast<char>(c));
    }
  }

  std::string kept;
  kept.reserve(decontrolled.size());
  for (const auto& line : split(decontrolled, '\n')) {
    if (is_page_header_line(line)) continue;
    kept += line;
    kept.push_back('\n');
  }
  return collapse_whitespace(kept);
}

Corpus clean_filter(const Corpus& corpus, std::size_t min_chars) {
  Corpus out;
  out.tag = corpus.tag;
  for (const auto& d : corpus.documents) {
    Document cleaned = d;
    cleaned.title = clean_text(d.title);
    cleaned.body = clean_text(d.body);
    if (cleaned.body.size() >= min_chars) out.documents.push_back(std::move(cleaned));
  }
  return out;
}

std::map<int, Corpus> partition_by_year(const Corpus& corpus) {
  std::map<int, Corpus> parts;
  for (const auto& d : corpus.documents) {
    auto& part = parts[d.year];
    if (part.tag.empty()) part.tag = corpus.tag;
    part.documents.push_back(d);
  }
  return parts;
}

std::vector<std::string> split_paragraphs(const std::string& text) {
  std::vector<std::string> paragraphs;
  std::string current;
  std::istringstream in(text);
  std::string line;
  auto flush = [&] {
    std::string t = trim(current);
    if (!t.empty()) paragraphs.push_back(std::move(t));
    current.clear();
  };
  while (std::getline(in, line)) {
    if (trim(line).empty()) {
      flush();
    } else {
      if (!current.empty()) current.push_back('\n');
      current += line;
    }
  }
  flush();
  return paragraphs;
}

}  // namespace litmine
