#include <map>

#include "doctest.h"
#include "techtrace/ctr.hpp"
#include "techtrace/error.hpp"
#include "techtrace/synth.hpp"

using namespace techtrace;

TEST_CASE("generation is deterministic per seed") {
  SynthConfig cfg;
  cfg.num_companies = 12;
  cfg.num_years = 4;
  const auto a = synthesize(cfg, 5);
  const auto b = synthesize(cfg, 5);
  const auto c = synthesize(cfg, 6);
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t k = 0; k < a.records.size(); ++k) {
    CHECK(a.records[k].patent_id == b.records[k].patent_id);
    CHECK(a.records[k].cpc_codes == b.records[k].cpc_codes);
    CHECK(a.records[k].tokens == b.records[k].tokens);
  }
  CHECK(planted_to_json(a.planted) == planted_to_json(b.planted));
  CHECK(planted_to_json(a.planted) != planted_to_json(c.planted));
}

TEST_CASE("default corpus has the expected shape") {
  const SynthConfig cfg;
  const auto r = synthesize(cfg, 11);
  const CorpusIndex index(r.records, CpcLevel::Subclass, 1);
  CHECK(index.num_companies() == cfg.num_companies);
  CHECK(index.num_years() == cfg.num_years);
  CHECK(index.num_technologies() <= cfg.num_technologies);
  const double mean = 0.5 * (cfg.patents_min + cfg.patents_max);
  const double expected = mean * cfg.num_companies * cfg.num_years;
  CHECK(static_cast<double>(r.records.size()) == doctest::Approx(expected).epsilon(0.05));
  for (int i = 0; i < index.num_companies(); ++i) {
    for (int t = 0; t < index.num_years(); ++t) {
      const auto n = static_cast<int>(index.company_year_t(i, t).size());
      CHECK(n >= cfg.patents_min);
      CHECK(n <= cfg.patents_max);
    }
  }
  for (const auto& g : r.planted.preference) {
    for (const auto& p : g) {
      double s = 0;
      for (double v : p) s += v;
      CHECK(s == doctest::Approx(1.0));
    }
  }
}

TEST_CASE("group mates share their technology mix") {
  const SynthConfig cfg;
  const auto r = synthesize(cfg, 11);
  const CorpusIndex index(r.records, CpcLevel::Subclass, 1);
  CHECK(min_group_cosine(index, r.planted) > cfg.group_similarity);
}

TEST_CASE("planted pairs carry the strongest co-occurrence") {
  const SynthConfig cfg;
  const auto r = synthesize(cfg, 11);
  const CorpusIndex index(r.records, CpcLevel::Subclass, 1);
  const int year = index.first_year() + 3;
  for (const auto& [a, b] : r.planted.collab_pairs) {
    const int ja = index.technology_index(a);
    const int jb = index.technology_index(b);
    const double planted = collab_weight(index, ja, jb, year);
    for (int j = 0; j < index.num_technologies(); ++j) {
      if (j != ja && j != jb) CHECK(collab_weight(index, ja, j, year) < planted);
    }
  }
}

TEST_CASE("drift moves preferences linearly") {
  SynthConfig cfg;
  cfg.drift = 0.1;
  const auto r = synthesize(cfg, 2);
  const auto& p = r.planted.preference[0];
  for (std::size_t j = 0; j < p[0].size(); ++j) {
    CHECK(p[2][j] - p[1][j] == doctest::Approx(p[1][j] - p[0][j]).epsilon(1e-9));
  }
}

TEST_CASE("invalid settings are rejected") {
  auto bad = [](auto mutate) {
    SynthConfig cfg;
    mutate(cfg);
    return cfg;
  };
  CHECK_THROWS_AS(bad([](SynthConfig& c) { c.num_companies = 0; }).validate(), ValidationError);
  CHECK_THROWS_AS(bad([](SynthConfig& c) { c.patents_min = 9; c.patents_max = 3; }).validate(), ValidationError);
  CHECK_THROWS_AS(bad([](SynthConfig& c) { c.focus_mass = 1.5; }).validate(), ValidationError);
  CHECK_THROWS_AS(bad([](SynthConfig& c) { c.collab_pairs = 30; }).validate(), ValidationError);
  CHECK_NOTHROW(SynthConfig{}.validate());
}
