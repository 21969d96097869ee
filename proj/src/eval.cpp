#include "techtrace/eval.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

#include "techtrace/distribution.hpp"
#include "techtrace/error.hpp"
#include "techtrace/random.hpp"

namespace techtrace {

std::vector<int> SplitSpec::train_inputs() const {
  std::vector<int> y;
  for (int t = train_first; t <= train_last; ++t) y.push_back(t);
  return y;
}

std::vector<int> SplitSpec::test_inputs() const {
  std::vector<int> y;
  for (int t = test_first; t <= test_last; ++t) y.push_back(t);
  return y;
}

SplitSpec make_split(const CorpusIndex& index, int y0, int y1) {
  const std::string period = std::to_string(y0) + "-" + std::to_string(y1);
  if (y1 <= y0) throw ValidationError("period " + period + " needs at least one input year before its target");
  if (!index.has_year(y0) || !index.has_year(y1 + 1)) {
    throw ValidationError("period " + period + " needs years " + std::to_string(y0) + ".." + std::to_string(y1 + 1) +
                          " but the corpus spans " + std::to_string(index.first_year()) + ".." +
                          std::to_string(index.last_year()));
  }
  return SplitSpec{y0, y1 - 1, y1, y0 + 1, y1, y1 + 1};
}

std::vector<SplitSpec> make_splits(const CorpusIndex& index, const std::vector<std::pair<int, int>>& periods) {
  std::vector<SplitSpec> out;
  for (const auto& [a, b] : periods) out.push_back(make_split(index, a, b));
  return out;
}

std::pair<int, int> parse_period(std::string_view text) {
  const auto dash = text.find('-');
  int a = 0, b = 0;
  auto parse = [](std::string_view s, int& v) {
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    return r.ec == std::errc{} && r.ptr == s.data() + s.size() && !s.empty();
  };
  if (dash == std::string_view::npos || !parse(text.substr(0, dash), a) || !parse(text.substr(dash + 1), b)) {
    throw ParseError("period", "period must look like 1995-2000, got '" + std::string(text) + "'");
  }
  return {a, b};
}

std::vector<std::pair<int, double>> rank_scores(const Eigen::VectorXd& scores) {
  std::vector<std::pair<int, double>> r;
  r.reserve(static_cast<std::size_t>(scores.size()));
  for (Eigen::Index j = 0; j < scores.size(); ++j) r.emplace_back(static_cast<int>(j), scores(j));
  std::stable_sort(r.begin(), r.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  return r;
}

std::vector<RankingResult> rank_all(const Eigen::MatrixXd& scores, const Eigen::MatrixXd& truth) {
  if (scores.rows() != truth.rows() || scores.cols() != truth.cols()) {
    throw DimensionError("score matrix and truth matrix differ in shape");
  }
  std::vector<RankingResult> out;
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    out.push_back({static_cast<int>(i), rank_scores(scores.row(i).transpose()), truth.row(i).transpose()});
  }
  return out;
}

namespace {

double dcg(const std::vector<double>& gains, int k) {
  double s = 0.0;
  const int n = std::min<int>(k, static_cast<int>(gains.size()));
  for (int p = 1; p <= n; ++p) s += gains[static_cast<std::size_t>(p - 1)] / std::log2(p + 1.0);
  return s;
}

}  // namespace

double ndcg_at_k(std::span<const int> ranked, const Eigen::VectorXd& truth, int k) {
  if (k < 1) throw ArgumentError("K must be >= 1");
  if (!(truth.maxCoeff() > 0.0)) throw ArgumentError("NDCG is undefined for an all-zero truth row");
  std::vector<double> gains, ideal(truth.data(), truth.data() + truth.size());
  for (int j : ranked) {
    if (j < 0 || j >= truth.size()) throw IndexError("ranked technology " + std::to_string(j) + " out of range");
    gains.push_back(truth(j));
  }
  std::sort(ideal.begin(), ideal.end(), std::greater<>());
  return dcg(gains, k) / dcg(ideal, k);
}

double ndcg_at_k(const RankingResult& result, int k) {
  std::vector<int> order;
  for (const auto& [j, s] : result.ranked) order.push_back(j);
  return ndcg_at_k(order, result.truth, k);
}

NdcgReport ndcg_report(const std::vector<RankingResult>& results, const std::vector<int>& ks) {
  NdcgReport rep;
  rep.ks = ks;
  for (const auto& r : results) {
    if (r.truth.size() > 0 && r.truth.maxCoeff() > 0.0) {
      rep.companies.push_back(r.company);
    } else {
      ++rep.excluded;
    }
  }
  rep.per_company.resize(static_cast<Eigen::Index>(rep.companies.size()), static_cast<Eigen::Index>(ks.size()));
  Eigen::Index row = 0;
  for (const auto& r : results) {
    if (!(r.truth.size() > 0 && r.truth.maxCoeff() > 0.0)) continue;
    for (std::size_t q = 0; q < ks.size(); ++q) rep.per_company(row, static_cast<Eigen::Index>(q)) = ndcg_at_k(r, ks[q]);
    ++row;
  }
  for (std::size_t q = 0; q < ks.size(); ++q) {
    rep.macro.push_back(rep.companies.empty() ? 0.0 : rep.per_company.col(static_cast<Eigen::Index>(q)).mean());
  }
  return rep;
}

Eigen::MatrixXd target_matrix(const CorpusIndex& index, int year) { return distribution_matrix(index, year).values; }

Eigen::MatrixXd persistence_scores(const CorpusIndex& index, const SplitSpec& split) {
  return target_matrix(index, split.test_last);
}

Eigen::MatrixXd lr_scores(const CorpusIndex& index, const SplitSpec& split, double reg) {
  if (!(reg > 0.0)) throw ArgumentError("LR regularization must be > 0");
  const int L = split.input_length();
  if (L < 2) throw ArgumentError("LR baseline needs at least two input years");
  const int M = index.num_companies(), N = index.num_technologies();
  std::vector<Eigen::MatrixXd> train_x, test_x;
  for (int y : split.train_inputs()) train_x.push_back(target_matrix(index, y));
  for (int y : split.test_inputs()) test_x.push_back(target_matrix(index, y));
  const Eigen::MatrixXd train_y = target_matrix(index, split.train_target);

  Eigen::MatrixXd out(M, N);
  Eigen::MatrixXd X(M, L), Z(M, L);
  for (int j = 0; j < N; ++j) {
    for (int l = 0; l < L; ++l) {
      X.col(l) = train_x[static_cast<std::size_t>(l)].col(j);
      Z.col(l) = test_x[static_cast<std::size_t>(l)].col(j);
    }
    const Eigen::RowVectorXd mean_x = X.colwise().mean();
    const double mean_y = train_y.col(j).mean();
    const Eigen::MatrixXd Xc = X.rowwise() - mean_x;
    const Eigen::VectorXd yc = train_y.col(j).array() - mean_y;
    Eigen::MatrixXd A = Xc.transpose() * Xc;
    A.diagonal().array() += reg;
    const Eigen::VectorXd w = A.ldlt().solve(Xc.transpose() * yc);
    out.col(j) = ((Z.rowwise() - mean_x) * w).array() + mean_y;
  }
  return out;
}

Eigen::MatrixXd oracle_scores(const CorpusIndex& index, const SplitSpec& split) {
  return target_matrix(index, split.test_target);
}

Eigen::MatrixXd random_scores(const CorpusIndex& index, const SplitSpec&, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd s(index.num_companies(), index.num_technologies());
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    for (Eigen::Index j = 0; j < s.cols(); ++j) s(i, j) = uniform01(rng);
  }
  return s;
}

std::vector<RankingResult> baseline_persistence(const CorpusIndex& index, const SplitSpec& split) {
  return rank_all(persistence_scores(index, split), target_matrix(index, split.test_target));
}

std::vector<RankingResult> baseline_lr(const CorpusIndex& index, const SplitSpec& split, double reg) {
  return rank_all(lr_scores(index, split, reg), target_matrix(index, split.test_target));
}

NdcgReport evaluate(const Forecaster& method, const CorpusIndex& index, const SplitSpec& split,
                    const std::vector<int>& ks) {
  const Eigen::MatrixXd scores = method(index, split);
  return ndcg_report(rank_all(scores, target_matrix(index, split.test_target)), ks);
}

}  // namespace techtrace
