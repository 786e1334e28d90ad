#pragma once

#include <filesystem>
#include <string>

#include "pas/graphdata/graph.hpp"

namespace pas {

// Reads the TU benchmark text format from `dir`:
//   <name>_A.txt                 "i, j" per line, 1-indexed node ids
//   <name>_graph_indicator.txt   graph id (1-indexed) per node
//   <name>_graph_labels.txt      integer label per graph
//   <name>_node_labels.txt       optional, integer per node
//   <name>_node_attributes.txt   optional, comma-separated reals per node
// Node labels are one-hot encoded in ascending label order and placed before
// the attributes. Without either file every node gets the single feature 1.0.
// Graph labels are remapped to [0, C) in ascending order.
Dataset load_tu_dataset(const std::filesystem::path& dir, const std::string& name);

// Writes a dataset in the same format. Features go to
// <name>_node_attributes.txt printed with round-trip precision; edges are
// listed in both directions. Edge weights are not preserved.
void write_tu_dataset(const Dataset& ds, const std::filesystem::path& dir, const std::string& name);

}  // namespace pas
