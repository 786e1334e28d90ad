#include "pas/graphdata/graph.hpp"

#include <string>

#include "pas/error.hpp"

namespace pas {

std::size_t Graph::num_edges() const {
  std::size_t e = 0;
  for (Eigen::Index i = 0; i < adj.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < adj.cols(); ++j) {
      if (adj(i, j) != 0.0) ++e;
    }
  }
  return e;
}

std::vector<int> Dataset::labels() const {
  std::vector<int> out;
  out.reserve(graphs.size());
  for (const auto& g : graphs) out.push_back(g.label);
  return out;
}

std::vector<int> Dataset::class_counts() const {
  std::vector<int> counts(static_cast<std::size_t>(num_classes), 0);
  for (const auto& g : graphs) ++counts[static_cast<std::size_t>(g.label)];
  return counts;
}

void validate_graph(const Graph& g, bool require_symmetric) {
  if (g.adj.rows() < 1) throw DataError("graph has no nodes");
  if (g.adj.rows() != g.adj.cols()) throw DataError("adjacency is not square");
  if (g.feat.rows() != g.adj.rows()) throw DataError("feature rows differ from node count");
  if (!g.adj.allFinite() || !g.feat.allFinite()) throw DataError("graph contains non-finite values");
  for (Eigen::Index i = 0; i < g.adj.rows(); ++i) {
    if (g.adj(i, i) != 0.0) throw DataError("adjacency diagonal must be zero (node " + std::to_string(i) + ")");
  }
  if (require_symmetric && g.adj != g.adj.transpose()) throw DataError("adjacency is not symmetric");
}

void validate_dataset(const Dataset& ds) {
  if (ds.graphs.empty()) throw DataError("dataset '" + ds.name + "' is empty");
  std::vector<int> seen(static_cast<std::size_t>(std::max(ds.num_classes, 0)), 0);
  for (std::size_t i = 0; i < ds.graphs.size(); ++i) {
    const Graph& g = ds.graphs[i];
    validate_graph(g);
    if (g.feature_dim() != ds.feature_dim) {
      throw DataError("graph " + std::to_string(i) + " has feature dimension " + std::to_string(g.feature_dim()) +
                      ", expected " + std::to_string(ds.feature_dim));
    }
    if (g.label < 0 || g.label >= ds.num_classes) {
      throw DataError("graph " + std::to_string(i) + " has label outside [0, " + std::to_string(ds.num_classes) + ")");
    }
    seen[static_cast<std::size_t>(g.label)] = 1;
  }
  for (std::size_t c = 0; c < seen.size(); ++c) {
    if (!seen[c]) throw DataError("class " + std::to_string(c) + " has no graphs");
  }
}

}  // namespace pas
