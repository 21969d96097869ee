#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "support.hpp"
#include "techtrace/corpus.hpp"
#include "techtrace/error.hpp"
#include "techtrace/stats.hpp"

using namespace techtrace;
namespace fs = std::filesystem;

namespace {

std::vector<PatentRecord> parse(const std::string& text) {
  std::istringstream in(text);
  return read_patent_stream(in);
}

const char* kThree =
    R"({"patent_id":"P1","assignee":"beta","year":2001,"cpc":["H04W72/04","G06F"],"text":"Radio, resource  scheduling!"})"
    "\n"
    R"({"patent_id":"P2","assignee":"alpha","year":2002,"cpc":["H04W"],"text":"Antenna array"})"
    "\n"
    R"({"patent_id":"P3","assignee":"beta","year":2003,"cpc":["G06F16/30"],"text":""})"
    "\n";

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("techtrace_corpus_test_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("tokenize lowercases and strips punctuation") {
  CHECK(tokenize("Radio, resource  scheduling!") == std::vector<std::string>{"radio", "resource", "scheduling"});
  CHECK(tokenize("  ").empty());
  CHECK(tokenize("a-b/c") == std::vector<std::string>{"a", "b", "c"});
}

TEST_CASE("records parse with every field") {
  const auto records = parse(kThree);
  REQUIRE(records.size() == 3);
  CHECK(records[0].patent_id == "P1");
  CHECK(records[0].assignee_id == "beta");
  CHECK(records[0].filing_year == 2001);
  REQUIRE(records[0].cpc_codes.size() == 2);
  CHECK(records[0].cpc_codes[0].to_string() == "G06F");
  CHECK(records[0].cpc_codes[1].to_string() == "H04W72");
  CHECK(records[0].tokens == std::vector<std::string>{"radio", "resource", "scheduling"});
  CHECK(records[2].text_missing);
  CHECK(records[2].tokens.empty());
}

TEST_CASE("malformed lines report line number and field") {
  auto error_of = [](const std::string& text) -> std::pair<long, std::string> {
    try {
      parse(text);
    } catch (const ParseError& e) {
      return {e.line(), e.field()};
    }
    return {0, "none"};
  };
  const std::string ok = R"({"patent_id":"A","assignee":"x","year":2000,"cpc":["A01B"],"text":"t"})"
                         "\n";
  CHECK(error_of(ok + "{not json\n") == std::pair<long, std::string>{2, "json"});
  CHECK(error_of(ok + "\n" + R"({"assignee":"x","year":2000,"cpc":["A01B"]})") ==
        std::pair<long, std::string>{3, "patent_id"});
  CHECK(error_of(R"({"patent_id":"A","assignee":"x","year":"2000","cpc":["A01B"]})") ==
        std::pair<long, std::string>{1, "year"});
  CHECK(error_of(R"({"patent_id":"A","assignee":"x","year":2000,"cpc":[]})") ==
        std::pair<long, std::string>{1, "cpc"});
  CHECK(error_of(R"({"patent_id":"A","assignee":"x","year":2000,"cpc":["K01A"]})") ==
        std::pair<long, std::string>{1, "section"});
  CHECK(error_of(R"({"patent_id":"A","assignee":"","year":2000,"cpc":["A01B"]})") ==
        std::pair<long, std::string>{1, "assignee"});
  CHECK(error_of(ok + ok) == std::pair<long, std::string>{2, "patent_id"});
}

TEST_CASE("multi-assignee rows split into one record per assignee") {
  const auto records = parse(R"({"patent_id":"P9","assignee":["a","b"],"year":2000,"cpc":["A01B"],"text":"x"})");
  REQUIRE(records.size() == 2);
  CHECK(records[0].patent_id == "P9#0");
  CHECK(records[0].assignee_id == "a");
  CHECK(records[1].patent_id == "P9#1");
  CHECK(records[1].assignee_id == "b");
}

TEST_CASE("index orders companies and filters by patent count") {
  const CorpusIndex index(parse(kThree), CpcLevel::Subclass, 1);
  CHECK(index.num_companies() == 2);
  CHECK(index.companies() == std::vector<std::string>{"alpha", "beta"});
  CHECK(index.num_technologies() == 2);
  CHECK(index.technologies()[0].to_string() == "G06F");
  CHECK(index.technologies()[1].to_string() == "H04W");
  CHECK(index.first_year() == 2001);
  CHECK(index.num_years() == 3);

  const CorpusIndex two(parse(kThree), CpcLevel::Subclass, 2);
  CHECK(two.companies() == std::vector<std::string>{"beta"});
  CHECK_THROWS_AS(CorpusIndex(parse(kThree), CpcLevel::Subclass, 3), EmptyCorpusError);
}

TEST_CASE("codes coarser than the level contribute no technology") {
  const auto records = parse(R"({"patent_id":"A","assignee":"x","year":2000,"cpc":["A01","B02C"],"text":"t"})");
  const CorpusIndex index(records, CpcLevel::Subclass, 1);
  CHECK(index.num_technologies() == 1);
  CHECK_THROWS_AS(CorpusIndex(parse(R"({"patent_id":"A","assignee":"x","year":2000,"cpc":["A01"]})"),
                              CpcLevel::Subclass, 1),
                  EmptyCorpusError);
  const CorpusIndex sections(records, CpcLevel::Section, 1);
  CHECK(sections.num_technologies() == 2);
}

TEST_CASE("index sets match brute-force filtering of the records") {
  Rng rng(3);
  for (int round = 0; round < 20; ++round) {
    const auto records = tt_test::micro_records(rng, 5, 6, 4);
    const CorpusIndex index(records, CpcLevel::Subclass, 1);
    const tt_test::SetOracle oracle{records};
    std::size_t company_total = 0, tech_total = 0;
    for (int t = 0; t < index.num_years(); ++t) {
      const int year = index.first_year() + t;
      for (int i = 0; i < index.num_companies(); ++i) {
        std::set<std::string> got;
        for (int k : index.company_year_t(i, t)) got.insert(index.patent(k).patent_id);
        CHECK(got == oracle.company_set(index.companies()[i], year));
        company_total += got.size();
      }
      for (int j = 0; j < index.num_technologies(); ++j) {
        std::set<std::string> got;
        for (int k : index.tech_year_t(j, t)) got.insert(index.patent(k).patent_id);
        CHECK(got == oracle.tech_set(index.technologies()[j].to_string(), year));
        tech_total += got.size();
      }
    }
    CHECK(company_total == records.size());
    CHECK(tech_total >= records.size());
  }
}

TEST_CASE("lookups reject unknown keys") {
  const CorpusIndex index(parse(kThree), CpcLevel::Subclass, 1);
  CHECK(index.company_index("beta") == 1);
  CHECK(index.technology_index("H04W") == 1);
  CHECK_THROWS_AS(index.company_index("gamma"), IndexError);
  CHECK_THROWS_AS(index.technology_index("A01B"), IndexError);
  CHECK_THROWS_AS(index.year_offset(1999), IndexError);
  CHECK_THROWS_AS(index.company_year_t(5, 0), IndexError);
  CHECK(index.company_year(0, 2001).empty());
}

TEST_CASE("export and reload reproduce the index") {
  Rng rng(8);
  const CorpusIndex index(tt_test::micro_records(rng, 4, 5, 3), CpcLevel::Subclass, 1);
  const fs::path dir = scratch("roundtrip");
  export_corpus(index, dir);
  const CorpusIndex back = load_corpus(dir);
  CHECK(back.ordering_hash() == index.ordering_hash());
  CHECK(back.num_patents() == index.num_patents());
  for (int k = 0; k < index.num_patents(); ++k) {
    CHECK(back.patent(k).patent_id == index.patent(k).patent_id);
    CHECK(back.patent(k).cpc_codes == index.patent(k).cpc_codes);
    CHECK(back.patent(k).tokens == index.patent(k).tokens);
  }

  // A tampered manifest is detected.
  std::ifstream in(dir / "manifest.json");
  std::stringstream text;
  text << in.rdbuf();
  in.close();
  std::string s = text.str();
  const auto pos = s.find(index.ordering_hash());
  s.replace(pos, 16, "0000000000000000");
  std::ofstream(dir / "manifest.json") << s;
  CHECK_THROWS_AS(load_corpus(dir), ValidationError);
  CHECK_THROWS_AS(load_corpus(scratch("missing")), IoError);
  fs::remove_all(dir);
}

TEST_CASE("stats: shares, empty years and growth") {
  const auto records = parse(
      R"({"patent_id":"1","assignee":"a","year":2000,"cpc":["H04W"],"text":"x"})"
      "\n"
      R"({"patent_id":"2","assignee":"a","year":2002,"cpc":["H04L","H01Q"],"text":"x"})"
      "\n"
      R"({"patent_id":"3","assignee":"b","year":2002,"cpc":["H04W"],"text":"x"})");
  const CorpusIndex index(records, CpcLevel::Subclass, 1);
  const StatsReport r = stats(index);
  const auto h = kCpcSections.find('H');
  REQUIRE(r.years == std::vector<int>{2000, 2001, 2002});
  CHECK(r.patents_per_year == std::vector<int>{1, 0, 2});
  for (int t : {0, 2}) CHECK(r.section_shares[t][h] == doctest::Approx(1.0));
  CHECK(r.section_counts[1][h] == 0);
  for (std::size_t i = 0; i < r.companies.size(); ++i) {
    for (std::size_t t = 0; t < r.years.size(); ++t) {
      double sum = 0;
      for (double v : r.company_section_shares[i][t]) sum += v;
      const bool filed = !index.company_year_t(static_cast<int>(i), static_cast<int>(t)).empty();
      CHECK(sum == doctest::Approx(filed ? 1.0 : 0.0));
    }
  }
  REQUIRE_FALSE(r.top_growing.empty());
  for (std::size_t k = 1; k < r.top_growing.size(); ++k) CHECK(r.top_growing[k - 1].delta >= r.top_growing[k].delta);

  std::ostringstream table, csv;
  write_stats_table(table, r);
  write_stats_csv(csv, r);
  CHECK_FALSE(table.str().empty());
  CHECK(csv.str().find("section_year") != std::string::npos);
}
