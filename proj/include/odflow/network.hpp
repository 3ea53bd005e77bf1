#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include "odflow/core.hpp"
#include "odflow/error.hpp"
#include "odflow/stats.hpp"

namespace odflow {

enum class WeightKind { DistanceKm, FlowVolume };

// City graph with positive edge weights.  Shortest-path length per edge is
// the weight itself for distances and 1/weight for flows, so that a heavier
// flow makes two cities "closer".
struct WeightedGraph {
  struct Edge {
    std::size_t u, v;
    double w;
  };

  std::vector<std::string> nodes;
  std::vector<Edge> edges;
  bool directed = false;
  WeightKind weight_kind = WeightKind::DistanceKm;

  std::size_t size() const { return nodes.size(); }
  double edge_length(double w) const {
    return weight_kind == WeightKind::DistanceKm ? w : 1.0 / w;
  }
  int index(const std::string& id) const {
    const auto it = std::lower_bound(nodes.begin(), nodes.end(), id);
    if (it == nodes.end() || *it != id) return -1;
    return static_cast<int>(it - nodes.begin());
  }
  void add_edge(std::size_t u, std::size_t v, double w) {
    if (u == v) throw Error(ErrorCode::DomainError, "self-loop edge");
    if (!(w > 0.0)) throw Error(ErrorCode::DomainError, "edge weight must be > 0");
    if (u >= size() || v >= size())
      throw Error(ErrorCode::DomainError, "edge endpoint out of range");
    edges.push_back({u, v, w});
  }
};

// Complete undirected graph over the distance matrix.
inline WeightedGraph build_distance_graph(const DistanceMatrix& dist) {
  WeightedGraph g;
  g.nodes = dist.cities;
  g.directed = false;
  g.weight_kind = WeightKind::DistanceKm;
  for (std::size_t i = 0; i < dist.size(); ++i)
    for (std::size_t j = i + 1; j < dist.size(); ++j) {
      if (!(dist.at(i, j) > 0.0))
        throw Error(ErrorCode::ValidationError,
                    "missing distance " + dist.cities[i] + "-" + dist.cities[j]);
      g.add_edge(i, j, dist.at(i, j));
    }
  return g;
}

// Directed graph of positive off-diagonal flows.
inline WeightedGraph build_flow_graph(const FlowMatrix& flows) {
  WeightedGraph g;
  g.nodes = flows.cities;
  g.directed = true;
  g.weight_kind = WeightKind::FlowVolume;
  for (std::size_t i = 0; i < flows.size(); ++i)
    for (std::size_t j = 0; j < flows.size(); ++j)
      if (i != j && flows.at(i, j) > 0.0) g.add_edge(i, j, flows.at(i, j));
  return g;
}

namespace detail {

struct Adjacency {
  std::vector<std::vector<std::pair<std::size_t, double>>> out;  // (node, length)
};

inline Adjacency adjacency(const WeightedGraph& g) {
  Adjacency a;
  a.out.resize(g.size());
  for (const auto& e : g.edges) {
    const double len = g.edge_length(e.w);
    a.out[e.u].push_back({e.v, len});
    if (!g.directed) a.out[e.v].push_back({e.u, len});
  }
  return a;
}

struct ShortestPaths {
  std::vector<double> dist;           // infinity when unreachable
  std::vector<double> sigma;          // shortest-path counts
  std::vector<std::vector<std::size_t>> pred;
  std::vector<std::size_t> order;     // settled order, non-decreasing dist
};

inline ShortestPaths dijkstra(const Adjacency& a, std::size_t s) {
  const std::size_t n = a.out.size();
  ShortestPaths sp;
  sp.dist.assign(n, std::numeric_limits<double>::infinity());
  sp.sigma.assign(n, 0.0);
  sp.pred.assign(n, {});
  sp.dist[s] = 0.0;
  sp.sigma[s] = 1.0;
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  pq.push({0.0, s});
  std::vector<bool> done(n, false);
  while (!pq.empty()) {
    const auto [d, u] = pq.top();
    pq.pop();
    if (done[u]) continue;
    done[u] = true;
    sp.order.push_back(u);
    for (const auto& [v, len] : a.out[u]) {
      const double nd = sp.dist[u] + len;
      if (nd < sp.dist[v]) {
        sp.dist[v] = nd;
        sp.sigma[v] = sp.sigma[u];
        sp.pred[v] = {u};
        pq.push({nd, v});
      } else if (nd == sp.dist[v]) {
        sp.sigma[v] += sp.sigma[u];
        sp.pred[v].push_back(u);
      }
    }
  }
  return sp;
}

}  // namespace detail

// Brandes betweenness with all equal-length shortest paths counted.
// Undirected graphs count each pair {j,k} once; directed graphs count
// ordered pairs.  Unreachable pairs contribute zero; their count is exposed
// through `unreachable_pairs` instead of an error.
inline std::map<std::string, double> betweenness(
    const WeightedGraph& g, std::size_t* unreachable_pairs = nullptr) {
  const auto adj = detail::adjacency(g);
  const std::size_t n = g.size();
  std::vector<double> score(n, 0.0);
  std::size_t missing = 0;
  for (std::size_t s = 0; s < n; ++s) {
    const auto sp = detail::dijkstra(adj, s);
    for (std::size_t t = 0; t < n; ++t)
      if (t != s && !std::isfinite(sp.dist[t])) ++missing;
    std::vector<double> delta(n, 0.0);
    for (auto it = sp.order.rbegin(); it != sp.order.rend(); ++it) {
      const std::size_t w = *it;
      for (const std::size_t v : sp.pred[w])
        delta[v] += sp.sigma[v] / sp.sigma[w] * (1.0 + delta[w]);
      if (w != s) score[w] += delta[w];
    }
  }
  if (!g.directed) {
    for (double& v : score) v /= 2.0;
    missing /= 2;
  }
  if (unreachable_pairs) *unreachable_pairs = missing;
  std::map<std::string, double> out;
  for (std::size_t i = 0; i < n; ++i) out[g.nodes[i]] = score[i];
  return out;
}

// Clos(i) = 1 / sum_j d_ij over shortest-path distances.
inline std::map<std::string, double> closeness(const WeightedGraph& g) {
  const auto adj = detail::adjacency(g);
  const std::size_t n = g.size();
  if (n < 2)
    throw Error(ErrorCode::InsufficientData, "closeness needs >= 2 nodes");
  std::map<std::string, double> out;
  for (std::size_t s = 0; s < n; ++s) {
    const auto sp = detail::dijkstra(adj, s);
    double total = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      if (t == s) continue;
      if (!std::isfinite(sp.dist[t]))
        throw Error(ErrorCode::UnreachableNode,
                    g.nodes[t] + " unreachable from " + g.nodes[s]);
      total += sp.dist[t];
    }
    out[g.nodes[s]] = 1.0 / total;
  }
  return out;
}

// Weighted PageRank: transition j -> i with probability w(j->i) / out-weight(j),
// damping d, dangling mass spread uniformly.  Power iteration from the
// uniform vector until the L1 change drops below tol.
inline std::map<std::string, double> pagerank(const WeightedGraph& g,
                                              double damping = 0.85,
                                              double tol = 1e-12) {
  if (!(damping > 0.0 && damping < 1.0))
    throw Error(ErrorCode::DomainError, "damping must be in (0,1)");
  const std::size_t n = g.size();
  if (n == 0) throw Error(ErrorCode::InsufficientData, "empty graph");

  // In-edges with weights normalized by the source's total out-weight.
  std::vector<double> out_weight(n, 0.0);
  for (const auto& e : g.edges) {
    out_weight[e.u] += e.w;
    if (!g.directed) out_weight[e.v] += e.w;
  }
  std::vector<std::vector<std::pair<std::size_t, double>>> in(n);
  for (const auto& e : g.edges) {
    in[e.v].push_back({e.u, e.w / out_weight[e.u]});
    if (!g.directed) in[e.u].push_back({e.v, e.w / out_weight[e.v]});
  }

  std::vector<double> pr(n, 1.0 / static_cast<double>(n)), next(n);
  constexpr int kMaxIterations = 100000;
  for (int iter = 0; iter < kMaxIterations; ++iter) {
    double dangling = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if (out_weight[i] == 0.0) dangling += pr[i];
    const double base =
        (1.0 - damping + damping * dangling) / static_cast<double>(n);
    double diff = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for (const auto& [j, p] : in[i]) acc += pr[j] * p;
      next[i] = base + damping * acc;
      diff += std::abs(next[i] - pr[i]);
    }
    pr.swap(next);
    if (diff < tol) {
      std::map<std::string, double> out;
      for (std::size_t i = 0; i < n; ++i) out[g.nodes[i]] = pr[i];
      return out;
    }
  }
  throw Error(ErrorCode::Unconverged,
              "pagerank did not converge in " +
                  std::to_string(kMaxIterations) + " iterations");
}

struct NetworkMetrics {
  std::map<std::string, double> betweenness;
  std::map<std::string, double> closeness;
  std::map<std::string, double> pagerank;
  std::size_t unreachable_pairs = 0;
};

inline NetworkMetrics compute_metrics(const WeightedGraph& g,
                                      double damping = 0.85) {
  NetworkMetrics m;
  m.betweenness = betweenness(g, &m.unreachable_pairs);
  m.closeness = closeness(g);
  m.pagerank = pagerank(g, damping);
  return m;
}

// Pearson correlation of each metric against per-city GDP.  A metric (or
// GDP) with no variation across cities yields NaN rather than an error, so
// symmetric layouts still produce a report.
inline std::map<std::string, double> correlate_with_gdp(
    const NetworkMetrics& metrics, const std::map<std::string, double>& gdp) {
  const auto correlate = [&](const std::map<std::string, double>& metric) {
    std::vector<double> a, b;
    for (const auto& [city, value] : metric) {
      const auto it = gdp.find(city);
      if (it == gdp.end())
        throw Error(ErrorCode::DomainError, "no gdp for city " + city);
      a.push_back(value);
      b.push_back(it->second);
    }
    if (a.size() < 3)
      throw Error(ErrorCode::InsufficientData,
                  "correlation needs >= 3 cities");
    try {
      return pearson(a, b);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::UndefinedCorrelation)
        return std::numeric_limits<double>::quiet_NaN();
      throw;
    }
  };
  return {{"betweenness", correlate(metrics.betweenness)},
          {"closeness", correlate(metrics.closeness)},
          {"pagerank", correlate(metrics.pagerank)}};
}

}  // namespace odflow
