#include "doctest.h"
#include "support.hpp"
#include "techtrace/distribution.hpp"
#include "techtrace/error.hpp"

using namespace techtrace;

TEST_CASE("distribution matches set arithmetic on random corpora") {
  Rng rng(17);
  for (int round = 0; round < 50; ++round) {
    const int m = techtrace::uniform_int(rng, 1, 6);
    const int n = techtrace::uniform_int(rng, 1, 8);
    const int t = techtrace::uniform_int(rng, 1, 4);
    const auto records = tt_test::micro_records(rng, m, n, t);
    const CorpusIndex index(records, CpcLevel::Subclass, 1);
    const tt_test::SetOracle oracle{records};
    const auto tensor = distribution_tensor(index);
    REQUIRE(static_cast<int>(tensor.size()) == index.num_years());
    for (int y = 0; y < index.num_years(); ++y) {
      const int year = index.first_year() + y;
      CHECK(tensor[y].year == year);
      for (int i = 0; i < index.num_companies(); ++i) {
        const auto sc = oracle.company_set(index.companies()[i], year);
        for (int j = 0; j < index.num_technologies(); ++j) {
          const auto st = oracle.tech_set(index.technologies()[j].to_string(), year);
          const double want =
              sc.empty() ? 0.0 : static_cast<double>(tt_test::SetOracle::intersection(sc, st)) / sc.size();
          CHECK(tensor[y].values(i, j) == doctest::Approx(want).epsilon(1e-12));
        }
        CHECK((distribution(index, i, year) - tensor[y].values.row(i).transpose()).norm() == 0.0);
      }
    }
  }
}

TEST_CASE("rows are bounded and not renormalized") {
  std::vector<PatentRecord> records(2);
  records[0] = {"a", "x", 2000, {parse_cpc("A01B"), parse_cpc("B01D")}, {"t"}, false};
  records[1] = {"b", "x", 2000, {parse_cpc("A01B")}, {"t"}, false};
  const CorpusIndex index(records, CpcLevel::Subclass, 1);
  const auto r = distribution(index, 0, 2000);
  CHECK(r[0] == 1.0);
  CHECK(r[1] == 0.5);
  CHECK(r.sum() == 1.5);
}

TEST_CASE("silent companies get zero rows") {
  std::vector<PatentRecord> records(2);
  records[0] = {"a", "x", 2000, {parse_cpc("A01B")}, {"t"}, false};
  records[1] = {"b", "y", 2001, {parse_cpc("A01B")}, {"t"}, false};
  const CorpusIndex index(records, CpcLevel::Subclass, 1);
  const auto d = distribution_matrix(index, 2001);
  CHECK(d.values.row(0).sum() == 0.0);
  CHECK(d.values(1, 0) == 1.0);
  CHECK_THROWS_AS(distribution(index, 0, 2005), IndexError);
  CHECK_THROWS_AS(distribution(index, 4, 2000), IndexError);
}

TEST_CASE("entries stay within [0, 1]") {
  Rng rng(4);
  const auto records = tt_test::micro_records(rng, 6, 8, 3);
  const CorpusIndex index(records, CpcLevel::Subclass, 1);
  for (const auto& d : distribution_tensor(index)) {
    CHECK(d.values.minCoeff() >= 0.0);
    CHECK(d.values.maxCoeff() <= 1.0);
  }
}
