#include "techtrace/ctr.hpp"

#include <algorithm>
#include <map>
#include <string>

#include "techtrace/error.hpp"

namespace techtrace {

double collab_weight(const CorpusIndex& index, int j1, int j2, int year) {
  if (j1 == j2) throw ArgumentError("collab_weight needs two distinct technologies");
  const auto a = index.tech_year(j1, year);
  const auto b = index.tech_year(j2, year);
  std::size_t common = 0;
  for (auto p = a.begin(), q = b.begin(); p != a.end() && q != b.end();) {
    if (*p < *q) {
      ++p;
    } else if (*q < *p) {
      ++q;
    } else {
      ++common, ++p, ++q;
    }
  }
  const std::size_t uni = a.size() + b.size() - common;
  return uni == 0 ? 0.0 : static_cast<double>(common) / static_cast<double>(uni);
}

CollabGraph build_collab_graph(const CorpusIndex& index, int year) {
  const int t = index.year_offset(year);
  const int N = index.num_technologies();
  std::map<std::pair<int, int>, int> pair_counts;
  for (int k : index.year_patents_t(t)) {
    const auto techs = index.patent_technologies(k);
    for (std::size_t a = 0; a < techs.size(); ++a) {
      for (std::size_t b = a + 1; b < techs.size(); ++b) ++pair_counts[{techs[a], techs[b]}];
    }
  }

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(2 * pair_counts.size());
  for (const auto& [pair, common] : pair_counts) {
    const auto [j1, j2] = pair;
    const auto n1 = index.tech_year_t(j1, t).size();
    const auto n2 = index.tech_year_t(j2, t).size();
    const double w = static_cast<double>(common) / static_cast<double>(n1 + n2 - static_cast<std::size_t>(common));
    triplets.emplace_back(j1, j2, w);
    triplets.emplace_back(j2, j1, w);
  }
  CollabGraph g;
  g.year = year;
  g.weights.resize(N, N);
  g.weights.setFromTriplets(triplets.begin(), triplets.end());
  g.weights.makeCompressed();
  return g;
}

std::vector<Collaborator> top_collaborators(const CollabGraph& graph, int j, int n) {
  if (j < 0 || j >= graph.weights.cols()) {
    throw IndexError("technology index " + std::to_string(j) + " out of range");
  }
  if (n < 1) throw ArgumentError("n must be >= 1, got " + std::to_string(n));
  std::vector<Collaborator> out;
  // The matrix is symmetric; column j lists the neighbours of j.
  for (Eigen::SparseMatrix<double>::InnerIterator it(graph.weights, j); it; ++it) {
    if (it.value() > 0.0) out.push_back({static_cast<int>(it.row()), it.value()});
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.weight != b.weight ? a.weight > b.weight : a.technology < b.technology;
  });
  if (static_cast<int>(out.size()) > n) out.resize(static_cast<std::size_t>(n));
  return out;
}

}  // namespace techtrace
