#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "techtrace/cpc.hpp"

namespace techtrace {

struct PatentRecord {
  std::string patent_id;
  std::string assignee_id;
  int filing_year = 0;
  std::vector<CpcCode> cpc_codes;   // non-empty, sorted, unique
  std::vector<std::string> tokens;  // lowercase title + abstract words
  bool text_missing = false;        // set iff tokens is empty
};

// Lowercase, replace ASCII punctuation with blanks, split on whitespace.
std::vector<std::string> tokenize(std::string_view text);

// Patent file: one JSON object per line with fields
//   patent_id (string), assignee (string, or array of strings), year (int),
//   cpc (array of strings), text (string).
// A multi-assignee row becomes one record per assignee with ids "<id>#<k>".
std::vector<PatentRecord> read_patent_file(const std::filesystem::path& path);
std::vector<PatentRecord> read_patent_stream(std::istream& in);
void write_patent_stream(std::ostream& out, std::span<const PatentRecord> records);

// Immutable company x technology x year index over a filtered patent set.
// Companies and technologies are ordered lexicographically; years are the
// contiguous calendar range spanned by the retained patents. Year arguments
// are calendar years; the "t" accessors take offsets 0..T-1.
class CorpusIndex {
 public:
  // Keeps companies with at least min_patents records in total and maps each
  // code onto the technology list at `level`. Codes coarser than `level`
  // contribute no technology. Throws EmptyCorpusError if nothing survives.
  CorpusIndex(std::vector<PatentRecord> records, CpcLevel level, int min_patents);

  int num_companies() const { return static_cast<int>(companies_.size()); }
  int num_technologies() const { return static_cast<int>(technologies_.size()); }
  int num_years() const { return last_year_ - first_year_ + 1; }
  int num_patents() const { return static_cast<int>(patents_.size()); }
  int first_year() const { return first_year_; }
  int last_year() const { return last_year_; }
  CpcLevel level() const { return level_; }
  int min_patents() const { return min_patents_; }

  const std::vector<std::string>& companies() const { return companies_; }
  const std::vector<CpcCode>& technologies() const { return technologies_; }
  const std::vector<PatentRecord>& patents() const { return patents_; }
  const PatentRecord& patent(int k) const { return patents_.at(static_cast<std::size_t>(k)); }

  // Throw IndexError when unknown.
  int company_index(std::string_view id) const;
  int technology_index(std::string_view code) const;
  int year_offset(int year) const;
  bool has_year(int year) const { return year >= first_year_ && year <= last_year_; }

  // Patent positions (into patents()), sorted ascending.
  std::span<const int> company_year(int i, int year) const { return company_year_t(i, year_offset(year)); }
  std::span<const int> tech_year(int j, int year) const { return tech_year_t(j, year_offset(year)); }
  std::span<const int> company_year_t(int i, int t) const;
  std::span<const int> tech_year_t(int j, int t) const;
  // All patents filed in year offset t.
  std::span<const int> year_patents_t(int t) const;

  int patent_company(int k) const { return patent_company_[static_cast<std::size_t>(k)]; }
  int patent_year_t(int k) const { return patent_year_[static_cast<std::size_t>(k)]; }
  // Technology indices of patent k, sorted, unique; may be empty.
  std::span<const int> patent_technologies(int k) const;

  // FNV-1a over the ordered company and technology lists.
  std::string ordering_hash() const;

 private:
  void check_company(int i) const;
  void check_tech(int j) const;
  void check_t(int t) const;

  CpcLevel level_;
  int min_patents_;
  int first_year_ = 0;
  int last_year_ = 0;
  std::vector<std::string> companies_;
  std::vector<CpcCode> technologies_;
  std::vector<PatentRecord> patents_;
  std::unordered_map<std::string, int> company_lookup_;
  std::unordered_map<std::string, int> tech_lookup_;
  std::vector<int> patent_company_;
  std::vector<int> patent_year_;
  std::vector<std::vector<int>> patent_techs_;
  std::vector<std::vector<int>> by_company_year_;  // [i * T + t]
  std::vector<std::vector<int>> by_tech_year_;     // [j * T + t]
  std::vector<std::vector<int>> by_year_;
};

CorpusIndex ingest(const std::filesystem::path& path, CpcLevel level, int min_patents);

// Corpus directory: patents.jsonl plus manifest.json (M, N, T, level,
// min_patents, year range, ordering hash).
void export_corpus(const CorpusIndex& index, const std::filesystem::path& dir);
// Re-ingests an exported directory and verifies the manifest.
CorpusIndex load_corpus(const std::filesystem::path& dir);

std::uint64_t fnv1a64(std::string_view data, std::uint64_t hash = 14695981039346656037ull);
std::string hex64(std::uint64_t value);

}  // namespace techtrace
