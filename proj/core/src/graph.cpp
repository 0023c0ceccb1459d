#include "nomlet/graph.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "nomlet/sexpr.hpp"

namespace nomlet {

Graph parse_edge_list(std::string_view text) {
  Graph g;
  std::map<std::string, int> index;
  auto vertex = [&](const std::string& name) {
    auto [it, inserted] = index.emplace(name, static_cast<int>(g.names.size()));
    if (inserted) g.names.push_back(name);
    return it->second;
  };
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  std::set<std::pair<int, int>> seen;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
    std::istringstream ls(line);
    std::string a, b, extra;
    if (!(ls >> a)) continue;  // blank line
    if (!(ls >> b) || (ls >> extra))
      throw ParseError("expected 'v1 v2'", lineno, 1);
    int va = vertex(a), vb = vertex(b);
    if (va == vb) throw ParseError("self loop", lineno, 1);
    auto e = std::minmax(va, vb);
    if (seen.insert({e.first, e.second}).second) g.edges.push_back({e.first, e.second});
  }
  return g;
}

std::string print_edge_list(const Graph& g) {
  std::string out;
  for (auto& [a, b] : g.edges) {
    out += g.names[a];
    out += ' ';
    out += g.names[b];
    out += '\n';
  }
  return out;
}

std::vector<std::set<int>> adjacency(const Graph& g) {
  std::vector<std::set<int>> adj(g.num_vertices());
  for (auto& [a, b] : g.edges) {
    adj[a].insert(b);
    adj[b].insert(a);
  }
  return adj;
}

std::optional<size_t> regular_degree(const Graph& g) {
  auto adj = adjacency(g);
  if (adj.empty()) return 0;
  size_t d = adj[0].size();
  for (const auto& nb : adj)
    if (nb.size() != d) return std::nullopt;
  return d;
}

}  // namespace nomlet
