#pragma once

#include <Eigen/Core>
#include <array>
#include <vector>

#include "techtrace/corpus.hpp"

namespace techtrace {

// Patent indicators of one company in one year, one entry per technology.
struct IndicatorVector {
  int company = 0;
  int year = 0;
  Eigen::VectorXd activity;  // I1: |S_company ∩ S_tech|
  Eigen::VectorXd share;     // I2: I1 / |S_tech|, 0 when the technology is empty
  Eigen::VectorXd emphasis;  // I3: I1 / |S_company|, 0 when the company filed nothing
};

using IndicatorWeights = std::array<double, 3>;

IndicatorVector indicators(const CorpusIndex& index, int company, int year);

// sqrt(sum_q alpha_q * ||I_q(a) - I_q(b)||^2). Smaller means closer competitors.
// Throws DimensionError on mismatched lengths and ArgumentError on negative weights.
double competitive_score(const IndicatorVector& a, const IndicatorVector& b, const IndicatorWeights& alpha);

struct CompetitorEntry {
  int company = 0;
  double score = 0.0;
  double weight = 0.0;  // 1/(1+score), normalized to sum to 1 over the list
};

struct CompetitorList {
  int company = 0;
  int year = 0;
  std::vector<CompetitorEntry> entries;  // ascending score, ties by company order
};

struct PcrOptions {
  int m = 5;
  IndicatorWeights alpha{0.0, 0.5, 0.5};
  // Divide I1 by the year's largest count before scoring (only matters when alpha[0] > 0).
  bool standardize_activity = true;
};

// Companies without filings in `year` are never candidates. A focal company
// without filings gets an empty list.
CompetitorList top_competitors(const CorpusIndex& index, int company, int year, const PcrOptions& options);

// Lists for every company in one year, sharing a single indicator pass.
std::vector<CompetitorList> all_competitors(const CorpusIndex& index, int year, const PcrOptions& options);

}  // namespace techtrace
