#include "techtrace/distribution.hpp"

namespace techtrace {

Eigen::VectorXd distribution(const CorpusIndex& index, int company, int year) {
  const auto patents = index.company_year(company, year);
  Eigen::VectorXd row = Eigen::VectorXd::Zero(index.num_technologies());
  if (patents.empty()) return row;
  for (int k : patents) {
    for (int j : index.patent_technologies(k)) row[j] += 1.0;
  }
  return row / static_cast<double>(patents.size());
}

DistributionMatrix distribution_matrix(const CorpusIndex& index, int year) {
  const int t = index.year_offset(year);
  DistributionMatrix d;
  d.year = year;
  d.values = Eigen::MatrixXd::Zero(index.num_companies(), index.num_technologies());
  for (int k : index.year_patents_t(t)) {
    const int i = index.patent_company(k);
    for (int j : index.patent_technologies(k)) d.values(i, j) += 1.0;
  }
  for (int i = 0; i < index.num_companies(); ++i) {
    const auto n = index.company_year_t(i, t).size();
    if (n > 0) d.values.row(i) /= static_cast<double>(n);
  }
  return d;
}

std::vector<DistributionMatrix> distribution_tensor(const CorpusIndex& index) {
  std::vector<DistributionMatrix> out;
  out.reserve(static_cast<std::size_t>(index.num_years()));
  for (int y = index.first_year(); y <= index.last_year(); ++y) out.push_back(distribution_matrix(index, y));
  return out;
}

}  // namespace techtrace
