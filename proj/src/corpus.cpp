#include "techtrace/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "techtrace/error.hpp"

namespace techtrace {

using nlohmann::json;

std::uint64_t fnv1a64(std::string_view data, std::uint64_t hash) {
  for (unsigned char c : data) {
    hash ^= c;
    hash *= 1099511628211ull;
  }
  return hash;
}

std::string hex64(std::uint64_t value) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int k = 15; k >= 0; --k) {
    s[static_cast<std::size_t>(k)] = digits[value & 0xF];
    value >>= 4;
  }
  return s;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c) || (c < 0x80 && std::ispunct(c))) {
      if (!current.empty()) tokens.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(static_cast<char>(c < 0x80 ? std::tolower(c) : c));
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

namespace {

PatentRecord make_record(std::string id, std::string assignee, int year,
                         std::vector<CpcCode> codes, std::vector<std::string> tokens) {
  std::sort(codes.begin(), codes.end());
  codes.erase(std::unique(codes.begin(), codes.end()), codes.end());
  PatentRecord r;
  r.patent_id = std::move(id);
  r.assignee_id = std::move(assignee);
  r.filing_year = year;
  r.cpc_codes = std::move(codes);
  r.tokens = std::move(tokens);
  r.text_missing = r.tokens.empty();
  return r;
}

void parse_line(const std::string& line, long line_no, std::vector<PatentRecord>& out) {
  json obj;
  try {
    obj = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ParseError("json", std::string("malformed JSON: ") + e.what(), line_no);
  }
  if (!obj.is_object()) throw ParseError("json", "record must be a JSON object", line_no);

  auto require = [&](const char* key) -> const json& {
    auto it = obj.find(key);
    if (it == obj.end()) throw ParseError(key, std::string("missing field '") + key + "'", line_no);
    return *it;
  };

  const json& id = require("patent_id");
  if (!id.is_string() || id.get<std::string>().empty()) {
    throw ParseError("patent_id", "patent_id must be a non-empty string", line_no);
  }

  std::vector<std::string> assignees;
  const json& asg = require("assignee");
  if (asg.is_string()) {
    assignees.push_back(asg.get<std::string>());
  } else if (asg.is_array()) {
    for (const auto& a : asg) {
      if (!a.is_string()) throw ParseError("assignee", "assignee entries must be strings", line_no);
      assignees.push_back(a.get<std::string>());
    }
  } else {
    throw ParseError("assignee", "assignee must be a string or an array of strings", line_no);
  }
  if (assignees.empty() ||
      std::any_of(assignees.begin(), assignees.end(), [](const auto& a) { return a.empty(); })) {
    throw ParseError("assignee", "assignee must be non-empty", line_no);
  }

  const json& year = require("year");
  if (!year.is_number_integer()) throw ParseError("year", "year must be an integer", line_no);

  const json& cpc = require("cpc");
  if (!cpc.is_array() || cpc.empty()) {
    throw ParseError("cpc", "cpc must be a non-empty array of strings", line_no);
  }
  std::vector<CpcCode> codes;
  for (const auto& c : cpc) {
    if (!c.is_string()) throw ParseError("cpc", "cpc entries must be strings", line_no);
    try {
      codes.push_back(CpcCode::parse(c.get<std::string>()));
    } catch (const ParseError& e) {
      throw ParseError(e.field(), e.what(), line_no);
    }
  }

  std::vector<std::string> tokens;
  if (auto it = obj.find("text"); it != obj.end() && !it->is_null()) {
    if (!it->is_string()) throw ParseError("text", "text must be a string", line_no);
    tokens = tokenize(it->get<std::string>());
  }

  const std::string base_id = id.get<std::string>();
  for (std::size_t k = 0; k < assignees.size(); ++k) {
    std::string pid = assignees.size() == 1 ? base_id : base_id + "#" + std::to_string(k);
    out.push_back(make_record(std::move(pid), assignees[k], year.get<int>(), codes, tokens));
  }
}

std::string join_tokens(const std::vector<std::string>& tokens) {
  std::string s;
  for (const auto& t : tokens) {
    if (!s.empty()) s += ' ';
    s += t;
  }
  return s;
}

}  // namespace

std::vector<PatentRecord> read_patent_stream(std::istream& in) {
  std::vector<PatentRecord> records;
  std::set<std::string> seen;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const std::size_t before = records.size();
    parse_line(line, line_no, records);
    for (std::size_t k = before; k < records.size(); ++k) {
      if (!seen.insert(records[k].patent_id).second) {
        throw ParseError("patent_id", "duplicate patent_id '" + records[k].patent_id + "'", line_no);
      }
    }
  }
  return records;
}

std::vector<PatentRecord> read_patent_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open patent file " + path.string());
  return read_patent_stream(in);
}

void write_patent_stream(std::ostream& out, std::span<const PatentRecord> records) {
  for (const auto& r : records) {
    json obj;
    obj["patent_id"] = r.patent_id;
    obj["assignee"] = r.assignee_id;
    obj["year"] = r.filing_year;
    json codes = json::array();
    for (const auto& c : r.cpc_codes) codes.push_back(c.to_string());
    obj["cpc"] = std::move(codes);
    obj["text"] = join_tokens(r.tokens);
    out << obj.dump() << '\n';
  }
}

CorpusIndex::CorpusIndex(std::vector<PatentRecord> records, CpcLevel level, int min_patents)
    : level_(level), min_patents_(min_patents) {
  for (const auto& r : records) {
    if (r.cpc_codes.empty()) throw ValidationError("patent " + r.patent_id + " has no CPC codes");
    if (r.tokens.empty() != r.text_missing) {
      throw ValidationError("patent " + r.patent_id + " has inconsistent text_missing flag");
    }
  }

  std::map<std::string, int> totals;
  for (const auto& r : records) ++totals[r.assignee_id];
  for (const auto& [company, count] : totals) {
    if (count >= min_patents) companies_.push_back(company);
  }
  std::erase_if(records, [&](const PatentRecord& r) { return totals[r.assignee_id] < min_patents; });
  if (records.empty()) {
    throw EmptyCorpusError("no company has at least " + std::to_string(min_patents) + " patents");
  }

  std::sort(records.begin(), records.end(),
            [](const auto& a, const auto& b) { return a.patent_id < b.patent_id; });
  for (std::size_t k = 1; k < records.size(); ++k) {
    if (records[k].patent_id == records[k - 1].patent_id) {
      throw ValidationError("duplicate patent_id '" + records[k].patent_id + "'");
    }
  }
  patents_ = std::move(records);

  std::set<CpcCode> techs;
  first_year_ = patents_.front().filing_year;
  last_year_ = first_year_;
  for (const auto& r : patents_) {
    first_year_ = std::min(first_year_, r.filing_year);
    last_year_ = std::max(last_year_, r.filing_year);
    for (const auto& c : r.cpc_codes) {
      if (c.has_level(level)) techs.insert(c.truncate(level));
    }
  }
  if (techs.empty()) {
    throw EmptyCorpusError("no CPC code reaches level " + to_string(level));
  }
  technologies_.assign(techs.begin(), techs.end());

  for (int i = 0; i < num_companies(); ++i) company_lookup_.emplace(companies_[i], i);
  for (int j = 0; j < num_technologies(); ++j) tech_lookup_.emplace(technologies_[j].to_string(), j);

  const int T = num_years();
  by_company_year_.assign(static_cast<std::size_t>(num_companies() * T), {});
  by_tech_year_.assign(static_cast<std::size_t>(num_technologies() * T), {});
  by_year_.assign(static_cast<std::size_t>(T), {});
  patent_company_.resize(patents_.size());
  patent_year_.resize(patents_.size());
  patent_techs_.resize(patents_.size());

  // Patents are visited in ascending position, so every set stays sorted.
  for (int k = 0; k < num_patents(); ++k) {
    const auto& r = patents_[static_cast<std::size_t>(k)];
    const int i = company_lookup_.at(r.assignee_id);
    const int t = r.filing_year - first_year_;
    patent_company_[k] = i;
    patent_year_[k] = t;
    by_company_year_[i * T + t].push_back(k);
    by_year_[t].push_back(k);
    auto& tj = patent_techs_[k];
    for (const auto& c : r.cpc_codes) {
      if (c.has_level(level)) tj.push_back(tech_lookup_.at(c.truncate(level).to_string()));
    }
    std::sort(tj.begin(), tj.end());
    tj.erase(std::unique(tj.begin(), tj.end()), tj.end());
    for (int j : tj) by_tech_year_[j * T + t].push_back(k);
  }
}

void CorpusIndex::check_company(int i) const {
  if (i < 0 || i >= num_companies()) throw IndexError("company index " + std::to_string(i) + " out of range");
}

void CorpusIndex::check_tech(int j) const {
  if (j < 0 || j >= num_technologies()) {
    throw IndexError("technology index " + std::to_string(j) + " out of range");
  }
}

void CorpusIndex::check_t(int t) const {
  if (t < 0 || t >= num_years()) throw IndexError("year offset " + std::to_string(t) + " out of range");
}

int CorpusIndex::company_index(std::string_view id) const {
  auto it = company_lookup_.find(std::string(id));
  if (it == company_lookup_.end()) throw IndexError("unknown company '" + std::string(id) + "'");
  return it->second;
}

int CorpusIndex::technology_index(std::string_view code) const {
  auto it = tech_lookup_.find(CpcCode::parse(code).to_string());
  if (it == tech_lookup_.end()) throw IndexError("unknown technology '" + std::string(code) + "'");
  return it->second;
}

int CorpusIndex::year_offset(int year) const {
  if (!has_year(year)) {
    throw IndexError("year " + std::to_string(year) + " outside corpus range " +
                     std::to_string(first_year_) + "-" + std::to_string(last_year_));
  }
  return year - first_year_;
}

std::span<const int> CorpusIndex::company_year_t(int i, int t) const {
  check_company(i);
  check_t(t);
  return by_company_year_[static_cast<std::size_t>(i * num_years() + t)];
}

std::span<const int> CorpusIndex::tech_year_t(int j, int t) const {
  check_tech(j);
  check_t(t);
  return by_tech_year_[static_cast<std::size_t>(j * num_years() + t)];
}

std::span<const int> CorpusIndex::year_patents_t(int t) const {
  check_t(t);
  return by_year_[static_cast<std::size_t>(t)];
}

std::span<const int> CorpusIndex::patent_technologies(int k) const {
  return patent_techs_.at(static_cast<std::size_t>(k));
}

std::string CorpusIndex::ordering_hash() const {
  std::uint64_t h = fnv1a64("companies\n");
  for (const auto& c : companies_) h = fnv1a64(c + "\n", h);
  h = fnv1a64("technologies\n", h);
  for (const auto& t : technologies_) h = fnv1a64(t.to_string() + "\n", h);
  return hex64(h);
}

CorpusIndex ingest(const std::filesystem::path& path, CpcLevel level, int min_patents) {
  return CorpusIndex(read_patent_file(path), level, min_patents);
}

void export_corpus(const CorpusIndex& index, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "patents.jsonl");
    if (!out) throw IoError("cannot write " + (dir / "patents.jsonl").string());
    write_patent_stream(out, index.patents());
  }
  json manifest;
  manifest["format"] = "techtrace-corpus/1";
  manifest["M"] = index.num_companies();
  manifest["N"] = index.num_technologies();
  manifest["T"] = index.num_years();
  manifest["Q"] = index.num_patents();
  manifest["first_year"] = index.first_year();
  manifest["last_year"] = index.last_year();
  manifest["level"] = to_string(index.level());
  manifest["min_patents"] = index.min_patents();
  manifest["ordering_hash"] = index.ordering_hash();
  std::ofstream out(dir / "manifest.json");
  if (!out) throw IoError("cannot write " + (dir / "manifest.json").string());
  out << manifest.dump(2) << '\n';
}

CorpusIndex load_corpus(const std::filesystem::path& dir) {
  const auto manifest_path = dir / "manifest.json";
  std::ifstream in(manifest_path);
  if (!in) throw IoError("cannot open corpus manifest " + manifest_path.string());
  json manifest;
  try {
    manifest = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError("manifest", std::string("malformed corpus manifest: ") + e.what());
  }
  CpcLevel level;
  int min_patents;
  std::string hash;
  try {
    level = parse_cpc_level(manifest.at("level").get<std::string>());
    min_patents = manifest.at("min_patents").get<int>();
    hash = manifest.at("ordering_hash").get<std::string>();
  } catch (const json::exception& e) {
    throw ParseError("manifest", std::string("incomplete corpus manifest: ") + e.what());
  }
  CorpusIndex index = ingest(dir / "patents.jsonl", level, min_patents);
  if (index.ordering_hash() != hash) {
    throw ValidationError("corpus ordering hash mismatch in " + dir.string());
  }
  return index;
}

}  // namespace techtrace
