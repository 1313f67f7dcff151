#include "ctrkit/cooccur.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ctrkit/errors.hpp"

namespace ctrkit {

using json = nlohmann::json;

namespace {

CooccurrenceGraph::Edge canonical(std::string_view a, std::string_view b) {
  if (b < a) std::swap(a, b);
  return {std::string(a), std::string(b)};
}

std::string dot_id(std::string_view id) {
  std::string out = "\"";
  for (char c : id) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace

void CooccurrenceGraph::add_node(std::string_view item, std::int64_t occurrences) {
  auto it = nodes_.find(item);
  if (it == nodes_.end()) {
    nodes_.emplace(std::string(item), occurrences);
  } else {
    it->second += occurrences;
  }
}

void CooccurrenceGraph::add_edge(std::string_view a, std::string_view b, std::int64_t weight) {
  if (a == b) throw DomainError("self-loop on '" + std::string(a) + "'");
  if (weight < 1) throw DomainError("edge weight must be at least 1");
  if (!has_node(a)) add_node(a, 0);
  if (!has_node(b)) add_node(b, 0);
  edges_[canonical(a, b)] += weight;
}

void CooccurrenceGraph::merge(const CooccurrenceGraph& other) {
  for (const auto& [item, count] : other.nodes_) add_node(item, count);
  for (const auto& [edge, weight] : other.edges_) edges_[edge] += weight;
}

std::int64_t CooccurrenceGraph::prevalence(std::string_view item) const {
  auto it = nodes_.find(item);
  return it == nodes_.end() ? 0 : it->second;
}

std::int64_t CooccurrenceGraph::weight(std::string_view a, std::string_view b) const {
  if (a == b) return 0;
  auto it = edges_.find(canonical(a, b));
  return it == edges_.end() ? 0 : it->second;
}

std::int64_t CooccurrenceGraph::weighted_degree(std::string_view item) const {
  std::int64_t total = 0;
  for (const auto& [edge, w] : edges_) {
    if (edge.first == item || edge.second == item) total += w;
  }
  return total;
}

std::vector<std::string> CooccurrenceGraph::neighbors(std::string_view item) const {
  std::vector<std::string> out;
  for (const auto& [edge, w] : edges_) {
    if (edge.first == item) out.push_back(edge.second);
    if (edge.second == item) out.push_back(edge.first);
  }
  std::sort(out.begin(), out.end());
  return out;
}

CooccurrenceGraph build_graph_from_items(std::span<const std::vector<std::string>> item_sets) {
  CooccurrenceGraph graph;
  std::vector<std::string> distinct;
  for (const auto& items : item_sets) {
    distinct.assign(items.begin(), items.end());
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    for (const auto& item : distinct) graph.add_node(item);
    for (std::size_t i = 0; i < distinct.size(); ++i) {
      for (std::size_t j = i + 1; j < distinct.size(); ++j) graph.add_edge(distinct[i], distinct[j]);
    }
  }
  return graph;
}

CooccurrenceGraph build_graph(std::span<const Post> posts, std::optional<TimeWindow> window) {
  std::vector<std::vector<std::string>> item_sets;
  item_sets.reserve(posts.size());
  for (const auto& post : posts) {
    if (window && !window->contains(post.timestamp)) continue;
    item_sets.push_back(post.hashtags);
  }
  CooccurrenceGraph graph = build_graph_from_items(item_sets);
  graph.window = window;
  return graph;
}

CooccurrenceGraph prune(const CooccurrenceGraph& graph, std::int64_t min_weight) {
  if (min_weight < 0) throw DomainError("min_weight must be non-negative");
  CooccurrenceGraph pruned;
  pruned.window = graph.window;
  pruned.seed_term = graph.seed_term;
  std::set<std::string_view> connected;
  for (const auto& [edge, w] : graph.edges()) {
    if (w > min_weight) {
      connected.insert(edge.first);
      connected.insert(edge.second);
    }
  }
  for (const auto& [item, count] : graph.nodes()) {
    if (connected.contains(item) || (graph.seed_term && *graph.seed_term == item)) {
      pruned.add_node(item, count);
    }
  }
  for (const auto& [edge, w] : graph.edges()) {
    if (w > min_weight) pruned.add_edge(edge.first, edge.second, w);
  }
  return pruned;
}

CooccurrenceGraph neighborhood(const CooccurrenceGraph& graph, std::string_view seed,
                               std::size_t depth) {
  if (!graph.has_node(seed)) throw NotFoundError("seed '" + std::string(seed) + "' not in graph");

  std::map<std::string_view, std::vector<std::string_view>> adjacency;
  for (const auto& [edge, w] : graph.edges()) {
    adjacency[edge.first].push_back(edge.second);
    adjacency[edge.second].push_back(edge.first);
  }
  std::map<std::string_view, std::size_t> distance;
  std::deque<std::string_view> frontier;
  std::string_view seed_key = graph.nodes().find(seed)->first;
  distance[seed_key] = 0;
  frontier.push_back(seed_key);
  while (!frontier.empty()) {
    std::string_view current = frontier.front();
    frontier.pop_front();
    std::size_t d = distance[current];
    if (d == depth) continue;
    for (std::string_view next : adjacency[current]) {
      if (distance.emplace(next, d + 1).second) frontier.push_back(next);
    }
  }

  CooccurrenceGraph sub;
  sub.window = graph.window;
  sub.seed_term = std::string(seed);
  for (const auto& [item, d] : distance) sub.add_node(item, graph.prevalence(item));
  for (const auto& [edge, w] : graph.edges()) {
    if (distance.contains(edge.first) && distance.contains(edge.second)) {
      sub.add_edge(edge.first, edge.second, w);
    }
  }
  return sub;
}

std::string graph_to_json(const CooccurrenceGraph& graph) {
  json nodes = json::array();
  for (const auto& [item, count] : graph.nodes()) nodes.push_back({{"id", item}, {"prevalence", count}});
  json edges = json::array();
  for (const auto& [edge, w] : graph.edges()) {
    edges.push_back({{"a", edge.first}, {"b", edge.second}, {"w", w}});
  }
  json out = {{"nodes", nodes}, {"edges", edges}};
  out["seed"] = graph.seed_term ? json(*graph.seed_term) : json(nullptr);
  if (graph.window) {
    out["window"] = {{"start", format_rfc3339(graph.window->start)},
                     {"end", format_rfc3339(graph.window->end)}};
  } else {
    out["window"] = nullptr;
  }
  return out.dump();
}

std::string graph_to_dot(const CooccurrenceGraph& graph) {
  std::ostringstream out;
  out << "graph cooccurrence {\n";
  for (const auto& [item, count] : graph.nodes()) {
    out << "  " << dot_id(item) << " [prevalence=" << count;
    if (graph.seed_term && *graph.seed_term == item) out << ", shape=star";
    out << "];\n";
  }
  for (const auto& [edge, w] : graph.edges()) {
    out << "  " << dot_id(edge.first) << " -- " << dot_id(edge.second) << " [weight=" << w
        << "];\n";
  }
  out << "}\n";
  return out.str();
}

}  // namespace ctrkit
