#include <cmath>

#include "doctest.h"
#include "support.hpp"
#include "techtrace/error.hpp"
#include "techtrace/eval.hpp"
#include "techtrace/synth.hpp"

using namespace techtrace;

namespace {

// M companies, two technologies; company i files 100 single-code patents per
// year with (10 + 5 i + 5 t) of them in the first technology.
CorpusIndex linear_trend_corpus(int m, int years) {
  std::vector<PatentRecord> records;
  int id = 0;
  for (int i = 0; i < m; ++i) {
    for (int t = 0; t < years; ++t) {
      const int first = 10 + 5 * i + 5 * t;
      for (int k = 0; k < 100; ++k) {
        records.push_back({"p" + std::to_string(id++), tt_test::micro_company(i), 2000 + t,
                           {parse_cpc(k < first ? "A01B" : "B01D")}, {"w"}, false});
      }
    }
  }
  return CorpusIndex(records, CpcLevel::Subclass, 1);
}

}  // namespace

TEST_CASE("period parsing and split construction") {
  CHECK(parse_period("1995-2000") == std::pair<int, int>{1995, 2000});
  CHECK_THROWS_AS(parse_period("1995"), ParseError);
  CHECK_THROWS_AS(parse_period("a-b"), ParseError);
  const auto index = linear_trend_corpus(2, 6);
  const SplitSpec s = make_split(index, 2001, 2004);
  CHECK(s.train_inputs() == std::vector<int>{2001, 2002, 2003});
  CHECK(s.train_target == 2004);
  CHECK(s.test_inputs() == std::vector<int>{2002, 2003, 2004});
  CHECK(s.test_target == 2005);
  CHECK(s.input_length() == 3);
  CHECK_THROWS_AS(make_split(index, 2001, 2005), ValidationError);
  CHECK_THROWS_AS(make_split(index, 2003, 2003), ValidationError);
  CHECK_THROWS_AS(make_split(index, 1999, 2002), ValidationError);
  CHECK(make_splits(index, {{2000, 2002}, {2001, 2003}}).size() == 2);
}

TEST_CASE("ranking sorts descending with ties by technology") {
  Eigen::VectorXd s(5);
  s << 0.2, 0.9, 0.2, 0.5, 0.9;
  const auto r = rank_scores(s);
  std::vector<int> order;
  for (const auto& [j, v] : r) order.push_back(j);
  CHECK(order == std::vector<int>{1, 4, 3, 0, 2});
}

TEST_CASE("ndcg by hand") {
  Eigen::VectorXd truth(4);
  truth << 0.0, 3.0, 1.0, 2.0;
  const std::vector<int> ranked{0, 2, 1, 3};
  const double dcg = 0.0 + 1.0 / std::log2(3.0) + 3.0 / std::log2(4.0) + 2.0 / std::log2(5.0);
  const double idcg = 3.0 + 2.0 / std::log2(3.0) + 1.0 / std::log2(4.0);
  CHECK(ndcg_at_k(ranked, truth, 4) == doctest::Approx(dcg / idcg).epsilon(1e-14));
  CHECK(ndcg_at_k(ranked, truth, 1) == 0.0);
  CHECK(ndcg_at_k(std::vector<int>{1, 3, 2, 0}, truth, 2) == doctest::Approx(1.0));
  // K beyond N behaves like K = N.
  CHECK(ndcg_at_k(ranked, truth, 100) == doctest::Approx(dcg / idcg).epsilon(1e-14));
  CHECK_THROWS_AS(ndcg_at_k(ranked, truth, 0), ArgumentError);
  CHECK_THROWS_AS(ndcg_at_k(ranked, Eigen::VectorXd(Eigen::VectorXd::Zero(4)), 3), ArgumentError);
}

TEST_CASE("ndcg properties on random rows") {
  Rng rng(13);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = uniform_int(rng, 2, 12);
    Eigen::VectorXd truth(n), score(n);
    for (int j = 0; j < n; ++j) {
      truth[j] = bernoulli(rng, 0.4) ? 0.0 : uniform01(rng);
      score[j] = uniform01(rng);
    }
    truth[uniform_int(rng, 0, n - 1)] = 0.7;
    std::vector<int> order;
    for (const auto& [j, v] : rank_scores(score)) order.push_back(j);
    const int k = uniform_int(rng, 1, n);
    const double base = ndcg_at_k(order, truth, k);
    CHECK(base >= 0.0);
    CHECK(base <= 1.0 + 1e-12);
    // Scaling the truth leaves the value unchanged.
    CHECK(ndcg_at_k(order, Eigen::VectorXd(3.5 * truth), k) == doctest::Approx(base).epsilon(1e-12));
    // A strictly increasing transform of the scores keeps the ranking.
    std::vector<int> order2;
    for (const auto& [j, v] : rank_scores(Eigen::VectorXd(score.array().exp() * 2.0 + 1.0))) order2.push_back(j);
    CHECK(order2 == order);
    // Swapping an adjacent pair into truth order never lowers the value.
    for (int p = 0; p + 1 < n; ++p) {
      if (truth[order[p]] < truth[order[p + 1]]) {
        auto better = order;
        std::swap(better[p], better[p + 1]);
        CHECK(ndcg_at_k(better, truth, k) >= base - 1e-12);
        break;
      }
    }
    // Ranking by truth is ideal.
    std::vector<int> ideal;
    for (const auto& [j, v] : rank_scores(truth)) ideal.push_back(j);
    CHECK(ndcg_at_k(ideal, truth, k) == doctest::Approx(1.0));
  }
}

TEST_CASE("report excludes all-zero rows") {
  Eigen::MatrixXd scores(3, 3), truth(3, 3);
  scores << 1, 2, 3, 3, 2, 1, 0, 0, 1;
  truth << 0, 0, 1, 0, 0, 0, 1, 0, 0;
  const auto rep = ndcg_report(rank_all(scores, truth), {1, 3});
  CHECK(rep.excluded == 1);
  CHECK(rep.companies == std::vector<int>{0, 2});
  CHECK(rep.per_company(0, 0) == 1.0);
  CHECK(rep.per_company(1, 0) == 0.0);
  CHECK(rep.macro[0] == 0.5);
  CHECK(rep.per_company(1, 1) == doctest::Approx(1.0 / std::log2(3.0)));
  CHECK_THROWS_AS(rank_all(scores, Eigen::MatrixXd::Zero(2, 3)), DimensionError);
}

TEST_CASE("baselines on a planted corpus") {
  const auto r = synthesize(SynthConfig{}, 11);
  const CorpusIndex index(r.records, CpcLevel::Subclass, 1);
  const SplitSpec split = make_split(index, 2003, 2008);
  const std::vector<int> ks{10};
  const auto oracle = evaluate([](const auto& ix, const auto& s) { return oracle_scores(ix, s); }, index, split, ks);
  CHECK(oracle.macro[0] == 1.0);
  const auto persist =
      evaluate([](const auto& ix, const auto& s) { return persistence_scores(ix, s); }, index, split, ks);
  CHECK(persist.macro[0] > 0.9);
  const auto lr = evaluate([](const auto& ix, const auto& s) { return lr_scores(ix, s, 1e-3); }, index, split, ks);
  CHECK(lr.macro[0] > 0.8);
  const auto rnd =
      evaluate([](const auto& ix, const auto& s) { return random_scores(ix, s, 5); }, index, split, ks);
  CHECK(rnd.macro[0] < persist.macro[0]);
  CHECK(random_scores(index, split, 5) == random_scores(index, split, 5));
  CHECK(persistence_scores(index, split) == target_matrix(index, 2008));
}

TEST_CASE("LR baseline extrapolates an exact linear trend") {
  const CorpusIndex index = linear_trend_corpus(6, 5);
  const SplitSpec split = make_split(index, 2000, 2003);
  const Eigen::MatrixXd pred = lr_scores(index, split, 1e-9);
  const Eigen::MatrixXd truth = target_matrix(index, 2004);
  CHECK((pred - truth).cwiseAbs().maxCoeff() < 1e-6);
  CHECK_THROWS_AS(lr_scores(index, split, 0.0), ArgumentError);
  CHECK_THROWS_AS(lr_scores(index, make_split(index, 2002, 2003), 1e-3), ArgumentError);
}
