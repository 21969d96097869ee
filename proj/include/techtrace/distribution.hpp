#pragma once

#include <Eigen/Core>
#include <vector>

#include "techtrace/corpus.hpp"

namespace techtrace {

// Technology distribution of every company in one year:
//   values(i, j) = |S_company(i, year) ∩ S_tech(j, year)| / |S_company(i, year)|
// Rows of companies with no filings that year are zero. Rows are not
// renormalized, so multi-label patents can push a row sum above 1.
struct DistributionMatrix {
  int year = 0;
  Eigen::MatrixXd values;  // M x N
};

// Row for one company; throws IndexError for an unknown company or year.
Eigen::VectorXd distribution(const CorpusIndex& index, int company, int year);

DistributionMatrix distribution_matrix(const CorpusIndex& index, int year);

// One matrix per corpus year, in calendar order.
std::vector<DistributionMatrix> distribution_tensor(const CorpusIndex& index);

}  // namespace techtrace
