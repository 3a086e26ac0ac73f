#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "jacpair/errors.hpp"
#include "jacpair/matrix.hpp"
#include "jacpair/rng.hpp"

namespace jacpair {

/// Simple undirected graph on vertices 0..n-1.  Edges are stored as (u, v)
/// with u < v, sorted and duplicate-free.
class Graph {
 public:
  Graph() = default;
  Graph(int n, std::vector<std::pair<int, int>> edges) : n_(n), edges_(std::move(edges)) {
    if (n < 0) throw std::invalid_argument("negative vertex count");
    for (auto& [u, v] : edges_) {
      if (u == v) throw std::invalid_argument("self-loop in graph");
      if (u < 0 || v < 0 || u >= n || v >= n) throw std::invalid_argument("edge endpoint out of range");
      if (u > v) std::swap(u, v);
    }
    std::sort(edges_.begin(), edges_.end());
    if (std::adjacent_find(edges_.begin(), edges_.end()) != edges_.end())
      throw std::invalid_argument("duplicate edge");
  }

  static Graph complete(int n) {
    std::vector<std::pair<int, int>> e;
    for (int u = 0; u < n; ++u)
      for (int v = u + 1; v < n; ++v) e.emplace_back(u, v);
    return Graph(n, std::move(e));
  }
  static Graph path(int n) {
    std::vector<std::pair<int, int>> e;
    for (int u = 0; u + 1 < n; ++u) e.emplace_back(u, u + 1);
    return Graph(n, std::move(e));
  }
  static Graph cycle(int n) {
    std::vector<std::pair<int, int>> e;
    for (int u = 0; u < n; ++u) e.emplace_back(u, (u + 1) % n);
    return Graph(n, std::move(e));
  }

  [[nodiscard]] int vertex_count() const { return n_; }
  [[nodiscard]] std::size_t edge_count() const { return edges_.size(); }
  [[nodiscard]] const std::vector<std::pair<int, int>>& edges() const { return edges_; }

  friend bool operator==(const Graph&, const Graph&) = default;

 private:
  int n_ = 0;
  std::vector<std::pair<int, int>> edges_;
};

inline void to_json(nlohmann::json& j, const Graph& g) {
  j = nlohmann::json{{"n", g.vertex_count()}, {"edges", g.edges()}};
}

/// Accepts {"n": k, "edges": [[u,v],...]} or a bare edge array (n inferred).
inline void from_json(const nlohmann::json& j, Graph& g) {
  std::vector<std::pair<int, int>> edges;
  int n = 0;
  const nlohmann::json& arr = j.is_array() ? j : j.at("edges");
  for (const auto& e : arr) {
    int u = e.at(0).get<int>(), v = e.at(1).get<int>();
    edges.emplace_back(u, v);
    n = std::max({n, u + 1, v + 1});
  }
  if (j.is_object() && j.contains("n")) n = j.at("n").get<int>();
  g = Graph(n, std::move(edges));
}

struct GraphSampleConfig {
  int n = 0;
  double q = 0.5;
  std::uint64_t seed = 0;
  bool connected_only = true;

  void validate() const {
    if (n < 1) throw ConfigError("graph size n must be >= 1");
    if (!(q > 0.0 && q < 1.0)) throw ConfigError("edge probability q must lie in (0,1)");
  }
};

/// An edge is kept when a uniform 64-bit draw is below this threshold, i.e.
/// with probability threshold / 2^64 (q rounded to a 53-bit dyadic rational).
inline std::uint64_t edge_threshold(double q) {
  if (q <= 0.0) return 0;
  long double t = std::ldexp(static_cast<long double>(q), 64);
  if (t >= std::ldexp(1.0L, 64)) return std::numeric_limits<std::uint64_t>::max();
  return static_cast<std::uint64_t>(t);
}

/// One G(n, q) draw from an arbitrary 64-bit source.  Edges are visited in
/// lexicographic order (0,1), (0,2), ..., (n-2,n-1).
template <class Engine>
Graph sample_gnq_from(int n, std::uint64_t threshold, Engine& eng) {
  std::vector<std::pair<int, int>> e;
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v)
      if (static_cast<std::uint64_t>(eng()) < threshold) e.emplace_back(u, v);
  return Graph(n, std::move(e));
}

inline bool is_connected(const Graph& g) {
  const int n = g.vertex_count();
  if (n <= 1) return true;
  std::vector<std::vector<int>> adj(n);
  for (auto [u, v] : g.edges()) {
    adj[u].push_back(v);
    adj[v].push_back(u);
  }
  std::vector<char> seen(n, 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  int count = 1;
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    for (int w : adj[u])
      if (!seen[w]) {
        seen[w] = 1;
        ++count;
        stack.push_back(w);
      }
  }
  return count == n;
}

/// Result of a connected-only draw; `attempts` counts every graph drawn,
/// including the discarded disconnected ones.
struct GraphSample {
  Graph graph;
  std::uint64_t attempts = 1;
};

inline constexpr std::uint64_t kMaxConnectivityAttempts = 1u << 20;

/// Draw for trial `trial_index`.  Attempt k of the trial uses the stream keyed
/// by (seed, trial_index, k); with connected_only, attempts continue until a
/// connected graph appears.
inline GraphSample sample_gnq_counted(const GraphSampleConfig& cfg, std::uint64_t trial_index) {
  const std::uint64_t threshold = edge_threshold(cfg.q);
  for (std::uint64_t attempt = 0; attempt < kMaxConnectivityAttempts; ++attempt) {
    auto eng = make_stream(cfg.seed, stream_domain::kGraph, trial_index, attempt);
    Graph g = sample_gnq_from(cfg.n, threshold, eng);
    if (!cfg.connected_only || is_connected(g)) return {std::move(g), attempt + 1};
  }
  throw Error("no connected graph after maximum number of attempts");
}

inline Graph sample_gnq(const GraphSampleConfig& cfg, std::uint64_t trial_index) {
  return sample_gnq_counted(cfg, trial_index).graph;
}

/// Combinatorial Laplacian Deg - Adj.
inline IntMatrix laplacian(const Graph& g) {
  const auto n = static_cast<std::size_t>(g.vertex_count());
  IntMatrix l(n, n);
  for (auto [u, v] : g.edges()) {
    l(u, u) += 1;
    l(v, v) += 1;
    l(u, v) -= 1;
    l(v, u) -= 1;
  }
  return l;
}

/// Laplacian with row and column `delete_vertex` removed (default: last vertex).
inline IntMatrix reduced_laplacian(const Graph& g, int delete_vertex = -1) {
  if (delete_vertex < 0) delete_vertex = g.vertex_count() - 1;
  if (delete_vertex >= g.vertex_count()) throw std::out_of_range("deleted vertex out of range");
  return laplacian(g).without_row_col(static_cast<std::size_t>(delete_vertex));
}

}  // namespace jacpair
