/// Text file formats for graphs and edge labels.
///
///   edges         u<TAB>v                      one edge per line, '#' comments
///   features      #|f|=<int> header, then u<TAB>x_1,...,x_|f|
///   interactions  #|I|=<int> header, then u<TAB>v<TAB>c_1,...,c_|I|
///   edge labels   u<TAB>v<TAB>label
///
/// Ids are arbitrary non-negative integers; fields may also be separated by
/// spaces.

#pragma once

#include <string>
#include <vector>

#include "locec/graph.hpp"

namespace locec {

struct GraphPaths {
  std::string edges;
  std::string features;
  std::string interactions;
};

/// Parses and validates the three graph files. Errors carry the file path and
/// line number.
Graph load_graph(const GraphPaths& paths, bool normalize_features = true);

/// Writes the graph back using external ids; reloading yields an identical
/// graph.
void save_graph(const Graph& g, const GraphPaths& paths);

struct LabeledEdge {
  ExternalId u = 0;  // u < v
  ExternalId v = 0;
  std::string label;

  friend bool operator==(const LabeledEdge&, const LabeledEdge&) = default;
};

/// Reads an edge-label file; entries are canonicalised (u < v) and sorted.
/// Throws DataError on malformed lines or conflicting labels for one pair.
std::vector<LabeledEdge> read_edge_labels(const std::string& path);
void write_edge_labels(const std::string& path, const std::vector<LabeledEdge>& labels);

}  // namespace locec
