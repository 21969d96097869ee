#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "techtrace/corpus.hpp"

namespace techtrace {

// Temporal split of a period [y0, y1]: train on y0..y1-1 -> y1, test on the
// same window shifted forward one year, y0+1..y1 -> y1+1.
struct SplitSpec {
  int train_first = 0, train_last = 0, train_target = 0;
  int test_first = 0, test_last = 0, test_target = 0;

  std::vector<int> train_inputs() const;
  std::vector<int> test_inputs() const;
  int input_length() const { return train_last - train_first + 1; }
};

// Throws ValidationError when y1 <= y0 or when any year of the split,
// including the test target y1+1, lies outside the corpus.
SplitSpec make_split(const CorpusIndex& index, int y0, int y1);
std::vector<SplitSpec> make_splits(const CorpusIndex& index, const std::vector<std::pair<int, int>>& periods);

// "1995-2000" -> {1995, 2000}. Throws ParseError.
std::pair<int, int> parse_period(std::string_view text);

struct RankingResult {
  int company = 0;
  std::vector<std::pair<int, double>> ranked;  // (technology, score), best first
  Eigen::VectorXd truth;
};

// Descending score, ties by technology index (i.e. code order).
std::vector<std::pair<int, double>> rank_scores(const Eigen::VectorXd& scores);
std::vector<RankingResult> rank_all(const Eigen::MatrixXd& scores, const Eigen::MatrixXd& truth);

// Graded linear-gain NDCG:
//   DCG@K = sum_{p=1..K} truth[ranked[p]] / log2(p + 1), divided by the DCG of
//   truth sorted descending. Throws ArgumentError when k < 1 or truth has no
//   positive entry.
double ndcg_at_k(std::span<const int> ranked, const Eigen::VectorXd& truth, int k);
double ndcg_at_k(const RankingResult& result, int k);

struct NdcgReport {
  std::vector<int> ks;
  std::vector<int> companies;      // evaluated companies, ascending
  Eigen::MatrixXd per_company;     // companies.size() x ks.size()
  std::vector<double> macro;       // mean over evaluated companies, per K
  int excluded = 0;                // companies with an all-zero truth row
};

NdcgReport ndcg_report(const std::vector<RankingResult>& results, const std::vector<int>& ks);

// A forecaster maps (index, split) to an M x N score matrix for the split's
// test target year, using only years up to test_last.
using Forecaster = std::function<Eigen::MatrixXd(const CorpusIndex&, const SplitSpec&)>;

Eigen::MatrixXd target_matrix(const CorpusIndex& index, int year);

// Scores = distribution of the last test input year.
Eigen::MatrixXd persistence_scores(const CorpusIndex& index, const SplitSpec& split);

// Per technology: ridge regression across companies of the train target
// value on the company's train-window values of that technology (centered,
// unpenalized intercept), applied to the test window. Throws ArgumentError
// when reg <= 0 or the window has fewer than two years.
Eigen::MatrixXd lr_scores(const CorpusIndex& index, const SplitSpec& split, double reg);

// The test target itself.
Eigen::MatrixXd oracle_scores(const CorpusIndex& index, const SplitSpec& split);

// Independent uniform scores per company-technology.
Eigen::MatrixXd random_scores(const CorpusIndex& index, const SplitSpec& split, std::uint64_t seed);

std::vector<RankingResult> baseline_persistence(const CorpusIndex& index, const SplitSpec& split);
std::vector<RankingResult> baseline_lr(const CorpusIndex& index, const SplitSpec& split, double reg);

NdcgReport evaluate(const Forecaster& method, const CorpusIndex& index, const SplitSpec& split,
                    const std::vector<int>& ks);

}  // namespace techtrace
