#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace nomlet {

// Simple undirected graph; vertices are indices into `names`.
struct Graph {
  std::vector<std::string> names;
  std::vector<std::pair<int, int>> edges;  // normalized a < b, deduplicated

  size_t num_vertices() const { return names.size(); }
  size_t num_edges() const { return edges.size(); }
};

// Edge-list format: one "v1 v2" pair per line, '#' starts a comment.
// Vertex names are arbitrary tokens; indices follow first appearance.
Graph parse_edge_list(std::string_view text);
std::string print_edge_list(const Graph& g);

std::vector<std::set<int>> adjacency(const Graph& g);
// Degree if the graph is regular.
std::optional<size_t> regular_degree(const Graph& g);

}  // namespace nomlet
