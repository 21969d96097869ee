#include <cmath>

#include "doctest.h"
#include "support.hpp"
#include "techtrace/error.hpp"
#include "techtrace/pcr.hpp"
#include "techtrace/synth.hpp"

using namespace techtrace;

namespace {

struct NaiveIndicators {
  std::vector<double> i1, i2, i3;
};

NaiveIndicators naive(const CorpusIndex& index, const tt_test::SetOracle& oracle, int i, int year) {
  NaiveIndicators out;
  const auto sc = oracle.company_set(index.companies()[i], year);
  for (int j = 0; j < index.num_technologies(); ++j) {
    const auto st = oracle.tech_set(index.technologies()[j].to_string(), year);
    const double both = static_cast<double>(tt_test::SetOracle::intersection(sc, st));
    out.i1.push_back(both);
    out.i2.push_back(st.empty() ? 0.0 : both / st.size());
    out.i3.push_back(sc.empty() ? 0.0 : both / sc.size());
  }
  return out;
}

double naive_score(const NaiveIndicators& a, const NaiveIndicators& b, const IndicatorWeights& w) {
  double s = 0;
  for (std::size_t j = 0; j < a.i1.size(); ++j) {
    s += w[0] * std::pow(a.i1[j] - b.i1[j], 2) + w[1] * std::pow(a.i2[j] - b.i2[j], 2) +
         w[2] * std::pow(a.i3[j] - b.i3[j], 2);
  }
  return std::sqrt(s);
}

}  // namespace

TEST_CASE("indicators and scores match a direct computation") {
  Rng rng(21);
  for (int round = 0; round < 20; ++round) {
    const auto records = tt_test::micro_records(rng, 5, 6, 2);
    const CorpusIndex index(records, CpcLevel::Subclass, 1);
    const tt_test::SetOracle oracle{records};
    const int year = index.first_year() + 1;
    const IndicatorWeights w{0.3, 0.5, 0.7};
    for (int a = 0; a < index.num_companies(); ++a) {
      const auto na = naive(index, oracle, a, year);
      const auto ia = indicators(index, a, year);
      for (int j = 0; j < index.num_technologies(); ++j) {
        CHECK(ia.activity[j] == na.i1[j]);
        CHECK(ia.share[j] == doctest::Approx(na.i2[j]));
        CHECK(ia.emphasis[j] == doctest::Approx(na.i3[j]));
      }
      for (int b = 0; b < index.num_companies(); ++b) {
        const auto ib = indicators(index, b, year);
        CHECK(competitive_score(ia, ib, w) ==
              doctest::Approx(naive_score(na, naive(index, oracle, b, year), w)).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("score is a pseudo-metric") {
  Rng rng(5);
  const auto records = tt_test::micro_records(rng, 12, 8, 1);
  const CorpusIndex index(records, CpcLevel::Subclass, 1);
  const int year = index.first_year();
  std::vector<IndicatorVector> iv;
  for (int i = 0; i < index.num_companies(); ++i) iv.push_back(indicators(index, i, year));
  const IndicatorWeights w{0.2, 0.5, 0.5};
  const int m = index.num_companies();
  for (int trial = 0; trial < 1000; ++trial) {
    const auto& a = iv[techtrace::uniform_int(rng, 0, m - 1)];
    const auto& b = iv[techtrace::uniform_int(rng, 0, m - 1)];
    const auto& c = iv[techtrace::uniform_int(rng, 0, m - 1)];
    CHECK(competitive_score(a, a, w) == 0.0);
    CHECK(competitive_score(a, b, w) >= 0.0);
    CHECK(competitive_score(a, b, w) == competitive_score(b, a, w));
    CHECK(competitive_score(a, c, w) <= competitive_score(a, b, w) + competitive_score(b, c, w) + 1e-12);
  }
}

TEST_CASE("score rejects bad inputs") {
  IndicatorVector a, b;
  a.activity = a.share = a.emphasis = Eigen::VectorXd::Zero(3);
  b.activity = b.share = b.emphasis = Eigen::VectorXd::Zero(4);
  CHECK_THROWS_AS(competitive_score(a, b, {0, 0.5, 0.5}), DimensionError);
  CHECK_THROWS_AS(competitive_score(a, a, {0, -0.5, 0.5}), ArgumentError);
}

TEST_CASE("competitor lists are sorted, truncated and weighted") {
  Rng rng(9);
  const auto records = tt_test::micro_records(rng, 10, 6, 2);
  const CorpusIndex index(records, CpcLevel::Subclass, 1);
  PcrOptions opt;
  opt.m = 4;
  const int year = index.first_year();
  const auto lists = all_competitors(index, year, opt);
  for (int i = 0; i < index.num_companies(); ++i) {
    const auto single = top_competitors(index, i, year, opt);
    REQUIRE(single.entries.size() == lists[i].entries.size());
    if (index.company_year(i, year).empty()) {
      CHECK(single.entries.empty());
      continue;
    }
    CHECK(single.entries.size() <= 4);
    double total = 0;
    for (std::size_t k = 0; k < single.entries.size(); ++k) {
      const auto& e = single.entries[k];
      CHECK(e.company != i);
      CHECK_FALSE(index.company_year(e.company, year).empty());
      CHECK(e.company == lists[i].entries[k].company);
      if (k > 0) CHECK(single.entries[k - 1].score <= e.score);
      if (k > 0) CHECK(single.entries[k - 1].weight >= e.weight);
      total += e.weight;
    }
    if (!single.entries.empty()) CHECK(total == doctest::Approx(1.0));
  }
  opt.m = 0;
  CHECK_THROWS_AS(top_competitors(index, 0, year, opt), ArgumentError);
}

TEST_CASE("focal company without filings gets an empty list") {
  std::vector<PatentRecord> records(2);
  records[0] = {"a", "x", 2000, {parse_cpc("A01B")}, {"t"}, false};
  records[1] = {"b", "y", 2001, {parse_cpc("A01B")}, {"t"}, false};
  const CorpusIndex index(records, CpcLevel::Subclass, 1);
  CHECK(top_competitors(index, 0, 2001, {}).entries.empty());
  CHECK(top_competitors(index, 1, 2000, {}).entries.empty());
}

TEST_CASE("planted group mates are the closest competitors") {
  const auto r = synthesize(SynthConfig{}, 11);
  const CorpusIndex index(r.records, CpcLevel::Subclass, 1);
  PcrOptions opt;
  opt.m = 1;
  const int year = index.first_year() + 4;
  int hits = 0;
  for (int i = 0; i < index.num_companies(); ++i) {
    const auto list = top_competitors(index, i, year, opt);
    REQUIRE(list.entries.size() == 1);
    hits += r.planted.company_group[list.entries[0].company] == r.planted.company_group[i];
  }
  CHECK(hits == index.num_companies());
}
