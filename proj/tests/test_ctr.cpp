#include "doctest.h"
#include "support.hpp"
#include "techtrace/ctr.hpp"
#include "techtrace/error.hpp"
#include "techtrace/synth.hpp"

using namespace techtrace;

TEST_CASE("graph weights equal brute-force Jaccard") {
  Rng rng(31);
  for (int round = 0; round < 30; ++round) {
    const auto records = tt_test::micro_records(rng, 5, 7, 2);
    const CorpusIndex index(records, CpcLevel::Subclass, 1);
    const tt_test::SetOracle oracle{records};
    for (int y = 0; y < index.num_years(); ++y) {
      const int year = index.first_year() + y;
      const auto g = build_collab_graph(index, year);
      CHECK(g.year == year);
      const int n = index.num_technologies();
      for (int a = 0; a < n; ++a) {
        CHECK(g.weight(a, a) == 0.0);
        const auto sa = oracle.tech_set(index.technologies()[a].to_string(), year);
        for (int b = 0; b < n; ++b) {
          if (a == b) continue;
          const auto sb = oracle.tech_set(index.technologies()[b].to_string(), year);
          const auto u = tt_test::SetOracle::union_size(sa, sb);
          const double want = u == 0 ? 0.0 : static_cast<double>(tt_test::SetOracle::intersection(sa, sb)) / u;
          CHECK(g.weight(a, b) == doctest::Approx(want).epsilon(1e-12));
          CHECK(collab_weight(index, a, b, year) == doctest::Approx(want).epsilon(1e-12));
          CHECK(g.weight(a, b) == g.weight(b, a));
          CHECK(g.weight(a, b) >= 0.0);
          CHECK(g.weight(a, b) <= 1.0);
        }
      }
      for (int k = 0; k < g.weights.outerSize(); ++k) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(g.weights, k); it; ++it) CHECK(it.value() > 0.0);
      }
    }
  }
}

TEST_CASE("self pairs are rejected") {
  Rng rng(1);
  const CorpusIndex index(tt_test::micro_records(rng, 2, 3, 1), CpcLevel::Subclass, 1);
  CHECK_THROWS_AS(collab_weight(index, 0, 0, index.first_year()), ArgumentError);
}

TEST_CASE("top collaborators are sorted and positive") {
  Rng rng(12);
  const CorpusIndex index(tt_test::micro_records(rng, 8, 8, 1), CpcLevel::Subclass, 1);
  const auto g = build_collab_graph(index, index.first_year());
  for (int j = 0; j < index.num_technologies(); ++j) {
    const auto top = top_collaborators(g, j, 3);
    CHECK(top.size() <= 3);
    for (std::size_t k = 0; k < top.size(); ++k) {
      CHECK(top[k].technology != j);
      CHECK(top[k].weight > 0.0);
      CHECK(top[k].weight == g.weight(j, top[k].technology));
      if (k > 0) {
        CHECK(top[k - 1].weight >= top[k].weight);
        if (top[k - 1].weight == top[k].weight) CHECK(top[k - 1].technology < top[k].technology);
      }
    }
    // Nothing outside the list beats its last entry.
    if (top.size() == 3) {
      for (int o = 0; o < index.num_technologies(); ++o) {
        bool listed = o == j;
        for (const auto& c : top) listed = listed || c.technology == o;
        if (!listed) CHECK(g.weight(j, o) <= top.back().weight);
      }
    }
  }
}

TEST_CASE("planted pairs are each other's top collaborator") {
  const auto r = synthesize(SynthConfig{}, 11);
  const CorpusIndex index(r.records, CpcLevel::Subclass, 1);
  const auto g = build_collab_graph(index, index.last_year());
  for (const auto& [a, b] : r.planted.collab_pairs) {
    const int ja = index.technology_index(a);
    const int jb = index.technology_index(b);
    CHECK(top_collaborators(g, ja, 1).at(0).technology == jb);
    CHECK(top_collaborators(g, jb, 1).at(0).technology == ja);
  }
}
