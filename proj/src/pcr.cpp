#include "techtrace/pcr.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "techtrace/error.hpp"

namespace techtrace {

IndicatorVector indicators(const CorpusIndex& index, int company, int year) {
  const int t = index.year_offset(year);
  const auto own = index.company_year_t(company, t);
  const int N = index.num_technologies();
  IndicatorVector iv;
  iv.company = company;
  iv.year = year;
  iv.activity = Eigen::VectorXd::Zero(N);
  for (int k : own) {
    for (int j : index.patent_technologies(k)) iv.activity[j] += 1.0;
  }
  iv.share = Eigen::VectorXd::Zero(N);
  for (int j = 0; j < N; ++j) {
    const auto tech_size = index.tech_year_t(j, t).size();
    if (tech_size > 0) iv.share[j] = iv.activity[j] / static_cast<double>(tech_size);
  }
  iv.emphasis = own.empty() ? Eigen::VectorXd::Zero(N) : Eigen::VectorXd(iv.activity / static_cast<double>(own.size()));
  return iv;
}

double competitive_score(const IndicatorVector& a, const IndicatorVector& b, const IndicatorWeights& alpha) {
  const auto n = a.activity.size();
  if (a.share.size() != n || a.emphasis.size() != n || b.activity.size() != n || b.share.size() != n ||
      b.emphasis.size() != n) {
    throw DimensionError("indicator vectors have mismatched technology counts");
  }
  for (double w : alpha) {
    if (!(w >= 0.0)) throw ArgumentError("indicator weights must be non-negative");
  }
  const double sum = alpha[0] * (a.activity - b.activity).squaredNorm() +
                     alpha[1] * (a.share - b.share).squaredNorm() +
                     alpha[2] * (a.emphasis - b.emphasis).squaredNorm();
  return std::sqrt(sum);
}

namespace {

std::vector<IndicatorVector> year_indicators(const CorpusIndex& index, int year, const PcrOptions& options) {
  std::vector<IndicatorVector> all;
  all.reserve(static_cast<std::size_t>(index.num_companies()));
  double max_activity = 0.0;
  for (int i = 0; i < index.num_companies(); ++i) {
    all.push_back(indicators(index, i, year));
    max_activity = std::max(max_activity, all.back().activity.maxCoeff());
  }
  if (options.standardize_activity && options.alpha[0] > 0.0 && max_activity > 0.0) {
    for (auto& iv : all) iv.activity /= max_activity;
  }
  return all;
}

CompetitorList rank_competitors(const CorpusIndex& index, const std::vector<IndicatorVector>& all, int company,
                                int year, const PcrOptions& options) {
  if (options.m < 1) throw ArgumentError("m must be >= 1, got " + std::to_string(options.m));
  const int t = index.year_offset(year);
  CompetitorList list;
  list.company = company;
  list.year = year;
  if (index.company_year_t(company, t).empty()) return list;

  for (int other = 0; other < index.num_companies(); ++other) {
    if (other == company || index.company_year_t(other, t).empty()) continue;
    list.entries.push_back({other, competitive_score(all[company], all[other], options.alpha), 0.0});
  }
  std::sort(list.entries.begin(), list.entries.end(), [](const auto& a, const auto& b) {
    return a.score != b.score ? a.score < b.score : a.company < b.company;
  });
  if (static_cast<int>(list.entries.size()) > options.m) list.entries.resize(static_cast<std::size_t>(options.m));

  double total = 0.0;
  for (auto& e : list.entries) {
    e.weight = 1.0 / (1.0 + e.score);
    total += e.weight;
  }
  for (auto& e : list.entries) e.weight /= total;
  return list;
}

}  // namespace

CompetitorList top_competitors(const CorpusIndex& index, int company, int year, const PcrOptions& options) {
  if (company < 0 || company >= index.num_companies()) {
    throw IndexError("company index " + std::to_string(company) + " out of range");
  }
  return rank_competitors(index, year_indicators(index, year, options), company, year, options);
}

std::vector<CompetitorList> all_competitors(const CorpusIndex& index, int year, const PcrOptions& options) {
  const auto all = year_indicators(index, year, options);
  std::vector<CompetitorList> lists;
  lists.reserve(all.size());
  for (int i = 0; i < index.num_companies(); ++i) lists.push_back(rank_competitors(index, all, i, year, options));
  return lists;
}

}  // namespace techtrace
