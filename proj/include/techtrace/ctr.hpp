#pragma once

#include <Eigen/SparseCore>
#include <vector>

#include "techtrace/corpus.hpp"

namespace techtrace {

// Weighted technology co-occurrence graph of one year. weights(j1, j2) is the
// Jaccard coefficient of the two technologies' patent sets; the matrix is
// symmetric with an empty diagonal and stores only positive weights.
struct CollabGraph {
  int year = 0;
  Eigen::SparseMatrix<double> weights;  // N x N

  double weight(int j1, int j2) const { return weights.coeff(j1, j2); }
};

// Jaccard weight by direct set arithmetic; 0 when both sets are empty.
// Throws ArgumentError when j1 == j2.
double collab_weight(const CorpusIndex& index, int j1, int j2, int year);

// Single pass over the year's patents accumulating pair co-occurrences.
CollabGraph build_collab_graph(const CorpusIndex& index, int year);

struct Collaborator {
  int technology = 0;
  double weight = 0.0;
};

// Up to n positive-weight neighbours of j, descending weight, ties by code order.
std::vector<Collaborator> top_collaborators(const CollabGraph& graph, int j, int n);

}  // namespace techtrace
