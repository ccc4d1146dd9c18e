#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace trasa::graph {

/// Dense item index into the global vocabulary.
using ItemId = std::size_t;
/// Ordered item ids of one session (length >= 1).
using Session = std::vector<ItemId>;

/// Edge types. The integer codes index the edge-type embedding table and
/// must not change.
enum class EdgeType : std::uint8_t {
  kNxt = 0,   // next click
  kPre = 1,   // previous click
  kNpl = 2,   // both orders observed
  kSelf = 3,  // self loop
};

inline constexpr std::size_t kEdgeTypeCount = 4;

std::string_view edge_type_name(EdgeType type);

struct TypedEdge {
  std::size_t src = 0;
  std::size_t dst = 0;
  EdgeType type = EdgeType::kSelf;

  friend bool operator==(const TypedEdge&, const TypedEdge&) = default;
};

/// Typed directed graph over the unique items of one session. Nodes are
/// numbered by first occurrence; there is at most one edge per ordered
/// (src, dst) pair.
class SessionGraph {
 public:
  SessionGraph() = default;

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t session_length() const { return position_to_node_.size(); }
  /// Item id of every node, in first-occurrence order.
  const std::vector<ItemId>& nodes() const { return nodes_; }
  /// Node index of every session position.
  const std::vector<std::size_t>& position_to_node() const { return position_to_node_; }
  /// All edges sorted by (src, dst).
  const std::vector<TypedEdge>& edges() const { return edges_; }

  std::optional<EdgeType> edge(std::size_t src, std::size_t dst) const;
  /// Non-SELF successors of `node` in ascending node order.
  std::span<const std::size_t> successors(std::size_t node) const;

 private:
  friend SessionGraph build_graph(std::span<const ItemId> session);

  std::vector<ItemId> nodes_;
  std::vector<std::size_t> position_to_node_;
  std::vector<TypedEdge> edges_;
  std::vector<std::vector<std::size_t>> successors_;
};

/// NXT/PRE for every adjacency of distinct items, upgraded to NPL in both
/// directions when the reversed adjacency also occurs, plus one SELF loop
/// per node. Throws ContractError for an empty session.
SessionGraph build_graph(std::span<const ItemId> session);

/// Sequence position -> node index (the graph-to-sequence reversion).
const std::vector<std::size_t>& revert_mapping(const SessionGraph& graph);

struct PathOptions {
  /// Longer paths keep only their last `cap` edge types (nearest the target).
  std::size_t cap = 16;
  /// Also walk PRE edges. Off by default: paths follow click order.
  bool traverse_pre = false;
};

/// Shortest path between an unordered node pair, oriented from the lower
/// node index (`from`) to the higher (`to`).
struct RelationPath {
  std::size_t from = 0;
  std::size_t to = 0;
  std::vector<EdgeType> edge_types;
  /// Full BFS distance (1 for self pairs), before truncation.
  std::size_t length = 0;
};

/// One RelationPath per unordered node pair including self pairs, stored
/// row-major over the upper triangle.
class PathTable {
 public:
  PathTable() = default;
  PathTable(std::size_t node_count, std::vector<RelationPath> paths);

  std::size_t node_count() const { return node_count_; }
  std::size_t size() const { return paths_.size(); }
  /// Path for {i, j} in either argument order.
  const RelationPath& at(std::size_t i, std::size_t j) const;
  const std::vector<RelationPath>& paths() const { return paths_; }

  /// Slot of the canonical pair (min(i,j), max(i,j)).
  static std::size_t pair_index(std::size_t i, std::size_t j, std::size_t node_count);

 private:
  std::size_t node_count_ = 0;
  std::vector<RelationPath> paths_;
};

/// BFS from each node over non-SELF edges, expanding successors in
/// ascending index order, so among equal-length paths the lexicographically
/// smallest node sequence wins. Throws InvariantError if a canonical target
/// is unreachable.
PathTable shortest_paths(const SessionGraph& graph, const PathOptions& options = {});

}  // namespace trasa::graph
