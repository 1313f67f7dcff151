#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ctrkit/corpus.hpp"

namespace ctrkit {

/// Closed interval of instants.
struct TimeWindow {
  Timestamp start{};
  Timestamp end{};

  bool contains(Timestamp ts) const { return start <= ts && ts <= end; }
  friend bool operator==(const TimeWindow&, const TimeWindow&) = default;
};

/// Weighted undirected hashtag graph. Edges are stored once, keyed (a, b)
/// with a < b, and every endpoint is a node.
class CooccurrenceGraph {
 public:
  using Edge = std::pair<std::string, std::string>;

  void add_node(std::string_view item, std::int64_t occurrences = 1);
  /// Canonicalizes the pair; self-loops are rejected with DomainError.
  void add_edge(std::string_view a, std::string_view b, std::int64_t weight = 1);
  void merge(const CooccurrenceGraph& other);

  std::int64_t prevalence(std::string_view item) const;
  std::int64_t weight(std::string_view a, std::string_view b) const;
  bool has_node(std::string_view item) const { return nodes_.find(item) != nodes_.end(); }
  /// Sum of incident edge weights, the alternate render-size metric.
  std::int64_t weighted_degree(std::string_view item) const;
  std::vector<std::string> neighbors(std::string_view item) const;

  const std::map<std::string, std::int64_t, std::less<>>& nodes() const { return nodes_; }
  const std::map<Edge, std::int64_t>& edges() const { return edges_; }

  std::optional<TimeWindow> window;
  std::optional<std::string> seed_term;

  friend bool operator==(const CooccurrenceGraph&, const CooccurrenceGraph&) = default;

 private:
  std::map<std::string, std::int64_t, std::less<>> nodes_;
  std::map<Edge, std::int64_t> edges_;
};

/// Within-post co-occurrence of distinct items over a list of item sets.
CooccurrenceGraph build_graph_from_items(std::span<const std::vector<std::string>> item_sets);

/// Hashtag co-occurrence over posts whose timestamp lies inside `window`
/// (all posts when no window is given).
CooccurrenceGraph build_graph(std::span<const Post> posts,
                              std::optional<TimeWindow> window = std::nullopt);

inline constexpr std::int64_t kDefaultMinWeight = 50;

/// Keeps edges with weight strictly greater than min_weight, then drops
/// nodes left without edges (the seed term is always kept).
CooccurrenceGraph prune(const CooccurrenceGraph& graph, std::int64_t min_weight);

/// Induced subgraph of nodes within `depth` hops of `seed`. Throws
/// NotFoundError when the seed is not a node.
CooccurrenceGraph neighborhood(const CooccurrenceGraph& graph, std::string_view seed,
                               std::size_t depth);

/// `{nodes:[{id,prevalence}], edges:[{a,b,w}], seed, window}`.
std::string graph_to_json(const CooccurrenceGraph& graph);
std::string graph_to_dot(const CooccurrenceGraph& graph);

}  // namespace ctrkit
