#include "trasa/graph/session_graph.hpp"

#include <algorithm>
#include <map>
#include <queue>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>

#include "trasa/errors.hpp"

namespace trasa::graph {

std::string_view edge_type_name(EdgeType type) {
  switch (type) {
    case EdgeType::kNxt: return "NXT";
    case EdgeType::kPre: return "PRE";
    case EdgeType::kNpl: return "NPL";
    case EdgeType::kSelf: return "SELF";
  }
  return "?";
}

std::optional<EdgeType> SessionGraph::edge(std::size_t src, std::size_t dst) const {
  auto it = std::lower_bound(edges_.begin(), edges_.end(), std::pair{src, dst},
                             [](const TypedEdge& e, const std::pair<std::size_t, std::size_t>& k) {
                               return std::pair{e.src, e.dst} < k;
                             });
  if (it == edges_.end() || it->src != src || it->dst != dst) return std::nullopt;
  return it->type;
}

std::span<const std::size_t> SessionGraph::successors(std::size_t node) const {
  return successors_.at(node);
}

SessionGraph build_graph(std::span<const ItemId> session) {
  if (session.empty()) throw ContractError("cannot build a graph from an empty session");

  SessionGraph g;
  std::unordered_map<ItemId, std::size_t> node_of;
  g.position_to_node_.reserve(session.size());
  for (ItemId item : session) {
    auto [it, inserted] = node_of.try_emplace(item, g.nodes_.size());
    if (inserted) g.nodes_.push_back(item);
    g.position_to_node_.push_back(it->second);
  }

  std::set<std::pair<std::size_t, std::size_t>> adjacent;
  for (std::size_t t = 0; t + 1 < session.size(); ++t) {
    const std::size_t a = g.position_to_node_[t], b = g.position_to_node_[t + 1];
    if (a != b) adjacent.emplace(a, b);
  }

  std::map<std::pair<std::size_t, std::size_t>, EdgeType> typed;
  for (const auto& [a, b] : adjacent) {
    if (adjacent.contains({b, a})) {
      typed[{a, b}] = EdgeType::kNpl;
      typed[{b, a}] = EdgeType::kNpl;
    } else {
      typed[{a, b}] = EdgeType::kNxt;
      typed[{b, a}] = EdgeType::kPre;
    }
  }
  for (std::size_t v = 0; v < g.nodes_.size(); ++v) typed[{v, v}] = EdgeType::kSelf;

  g.successors_.assign(g.nodes_.size(), {});
  g.edges_.reserve(typed.size());
  for (const auto& [key, type] : typed) {
    g.edges_.push_back({key.first, key.second, type});
    if (type != EdgeType::kSelf) g.successors_[key.first].push_back(key.second);
  }
  return g;
}

const std::vector<std::size_t>& revert_mapping(const SessionGraph& graph) {
  return graph.position_to_node();
}

PathTable::PathTable(std::size_t node_count, std::vector<RelationPath> paths)
    : node_count_(node_count), paths_(std::move(paths)) {
  if (paths_.size() != node_count_ * (node_count_ + 1) / 2) {
    throw InvariantError("path table size does not match node count");
  }
}

std::size_t PathTable::pair_index(std::size_t i, std::size_t j, std::size_t node_count) {
  if (i > j) std::swap(i, j);
  // Rows 0..i-1 of the upper triangle hold (m) + (m-1) + ... entries.
  return i * node_count - i * (i - 1) / 2 + (j - i);
}

const RelationPath& PathTable::at(std::size_t i, std::size_t j) const {
  if (i >= node_count_ || j >= node_count_) {
    throw BoundsError("node pair (" + std::to_string(i) + ", " + std::to_string(j) +
                      ") out of range for " + std::to_string(node_count_) + " nodes");
  }
  return paths_[pair_index(i, j, node_count_)];
}

PathTable shortest_paths(const SessionGraph& graph, const PathOptions& options) {
  if (options.cap == 0) throw ContractError("path cap must be at least 1");
  const std::size_t m = graph.node_count();
  std::vector<RelationPath> paths(m * (m + 1) / 2);

  constexpr auto kUnseen = static_cast<std::size_t>(-1);
  std::vector<std::size_t> parent(m);
  std::vector<std::size_t> dist(m);
  for (std::size_t src = 0; src < m; ++src) {
    std::fill(parent.begin(), parent.end(), kUnseen);
    std::fill(dist.begin(), dist.end(), kUnseen);
    dist[src] = 0;
    std::queue<std::size_t> frontier;
    frontier.push(src);
    while (!frontier.empty()) {
      const std::size_t u = frontier.front();
      frontier.pop();
      for (std::size_t v : graph.successors(u)) {
        if (dist[v] != kUnseen) continue;
        if (!options.traverse_pre && graph.edge(u, v) == EdgeType::kPre) continue;
        dist[v] = dist[u] + 1;
        parent[v] = u;
        frontier.push(v);
      }
    }

    RelationPath& self = paths[PathTable::pair_index(src, src, m)];
    self.from = self.to = src;
    self.edge_types = {EdgeType::kSelf};
    self.length = 1;

    for (std::size_t dst = src + 1; dst < m; ++dst) {
      if (dist[dst] == kUnseen) {
        throw InvariantError("node " + std::to_string(dst) + " unreachable from node " +
                             std::to_string(src) + "; session graph is malformed");
      }
      RelationPath& path = paths[PathTable::pair_index(src, dst, m)];
      path.from = src;
      path.to = dst;
      path.length = dist[dst];
      std::vector<EdgeType> reversed;
      for (std::size_t v = dst; v != src && reversed.size() < options.cap; v = parent[v]) {
        reversed.push_back(*graph.edge(parent[v], v));
      }
      path.edge_types.assign(reversed.rbegin(), reversed.rend());
    }
  }
  return PathTable(m, std::move(paths));
}

}  // namespace trasa::graph
