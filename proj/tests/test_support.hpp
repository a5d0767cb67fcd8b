// Shared fixtures and brute-force oracles for the test suites. Oracles here
// are written independently of the library code paths they check.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "locec/graph.hpp"

namespace locec::testing {

/// Graph over external ids 0..n-1 (so internal id == external id), with
/// constant features and optional interaction counts.
inline Graph make_graph(std::size_t n, const std::vector<std::pair<ExternalId, ExternalId>>& edges,
                        std::size_t feature_dim = 1, std::size_t interaction_dim = 1,
                        const std::map<std::pair<ExternalId, ExternalId>, std::vector<Count>>& counts = {}) {
  GraphBuilder b(feature_dim, interaction_dim);
  for (ExternalId v = 0; v < n; ++v) b.add_node(v);
  for (const auto& [u, v] : edges) b.add_edge(u, v);
  for (const auto& [pair, c] : counts) b.set_interactions(pair.first, pair.second, c);
  return std::move(b).build(false);
}

inline std::vector<std::pair<ExternalId, ExternalId>> clique_edges(ExternalId first, ExternalId size) {
  std::vector<std::pair<ExternalId, ExternalId>> out;
  for (ExternalId a = first; a < first + size; ++a) {
    for (ExternalId b = a + 1; b < first + size; ++b) out.emplace_back(a, b);
  }
  return out;
}

/// The running example network: ego U1 with friends U2..U6, where
/// {U2,U3,U4} is a triangle, U4-U6 and U5-U6 are edges, and U7 is a friend
/// of U2 and U5 outside U1's ego network. Node Ui has id i (id 0 unused but
/// present as an isolated node so that ids line up).
inline Graph running_example(std::size_t interaction_dim = 1,
                             const std::map<std::pair<ExternalId, ExternalId>, std::vector<Count>>& counts = {}) {
  std::vector<std::pair<ExternalId, ExternalId>> edges = {
      {1, 2}, {1, 3}, {1, 4}, {1, 5}, {1, 6},  // ego edges
      {2, 3}, {2, 4}, {3, 4},                  // C1 triangle
      {4, 6}, {5, 6},                          // bridge and C2
      {2, 7}, {5, 7}};
  return make_graph(8, edges, 1, interaction_dim, counts);
}

/// Two k-cliques {0..k-1} and {k..2k-1} joined by the bridge (k-1, k).
inline Graph two_cliques_with_bridge(ExternalId k, ExternalId extra_ego = 0) {
  auto edges = clique_edges(0, k);
  auto second = clique_edges(k, k);
  edges.insert(edges.end(), second.begin(), second.end());
  edges.emplace_back(k - 1, k);
  if (extra_ego) {
    for (ExternalId v = 0; v < 2 * k; ++v) edges.emplace_back(v, extra_ego);
  }
  return make_graph(extra_ego ? extra_ego + 1 : 2 * k, edges);
}

/// Erdos-Renyi graph on n nodes with edge probability p.
inline std::vector<std::pair<ExternalId, ExternalId>> random_edges(std::size_t n, double p, std::mt19937_64& rng) {
  std::bernoulli_distribution coin(p);
  std::vector<std::pair<ExternalId, ExternalId>> edges;
  for (ExternalId a = 0; a < n; ++a) {
    for (ExternalId b = a + 1; b < n; ++b) {
      if (coin(rng)) edges.emplace_back(a, b);
    }
  }
  return edges;
}

/// Ego network over all nodes of a graph: adds a hub adjacent to every node
/// and extracts the hub's ego network, which reproduces the original graph.
inline EgoNetwork as_ego_network(std::size_t n, std::vector<std::pair<ExternalId, ExternalId>> edges) {
  for (ExternalId v = 0; v < n; ++v) edges.emplace_back(v, n);
  const auto g = make_graph(n + 1, edges);
  return ego_network(g, static_cast<NodeId>(n));
}

/// Edge betweenness by explicit enumeration of every shortest path between
/// every unordered pair. Keys are local (a, b) with a < b.
inline std::map<std::pair<std::uint32_t, std::uint32_t>, double> brute_force_betweenness(const EgoNetwork& net) {
  const std::size_t n = net.size();
  std::vector<std::set<std::uint32_t>> adj(n);
  for (const auto& [a, b] : net.member_edges) {
    adj[a].insert(b);
    adj[b].insert(a);
  }
  std::map<std::pair<std::uint32_t, std::uint32_t>, double> result;
  for (const auto& e : net.member_edges) result[e] = 0.0;

  for (std::uint32_t s = 0; s < n; ++s) {
    // BFS distances from s.
    std::vector<int> dist(n, -1);
    std::vector<std::uint32_t> queue{s};
    dist[s] = 0;
    for (std::size_t h = 0; h < queue.size(); ++h) {
      for (auto w : adj[queue[h]]) {
        if (dist[w] < 0) {
          dist[w] = dist[queue[h]] + 1;
          queue.push_back(w);
        }
      }
    }
    for (std::uint32_t t = s + 1; t < n; ++t) {
      if (dist[t] < 0) continue;
      std::vector<std::vector<std::uint32_t>> paths;
      std::vector<std::uint32_t> path{s};
      std::function<void(std::uint32_t)> walk = [&](std::uint32_t v) {
        if (v == t) {
          paths.push_back(path);
          return;
        }
        for (auto w : adj[v]) {
          if (dist[w] == dist[v] + 1) {
            path.push_back(w);
            walk(w);
            path.pop_back();
          }
        }
      };
      walk(s);
      for (const auto& p : paths) {
        for (std::size_t i = 0; i + 1 < p.size(); ++i) {
          result[{std::min(p[i], p[i + 1]), std::max(p[i], p[i + 1])}] += 1.0 / static_cast<double>(paths.size());
        }
      }
    }
  }
  return result;
}

/// Modularity in adjacency-matrix form:
/// Q = 1/(2m) sum_ij [A_ij - k_i k_j / 2m] delta(c_i, c_j).
inline double brute_force_modularity(const EgoNetwork& net, const std::vector<std::uint32_t>& labels) {
  const std::size_t n = net.size();
  const double m = static_cast<double>(net.num_edges());
  if (m == 0) return 0.0;
  std::vector<std::vector<int>> a(n, std::vector<int>(n, 0));
  for (const auto& [x, y] : net.member_edges) a[x][y] = a[y][x] = 1;
  double q = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (labels[i] != labels[j]) continue;
      const double ki = static_cast<double>(net.degree(static_cast<std::uint32_t>(i)));
      const double kj = static_cast<double>(net.degree(static_cast<std::uint32_t>(j)));
      q += a[i][j] - ki * kj / (2.0 * m);
    }
  }
  return q / (2.0 * m);
}

inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("locec_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream(path, std::ios::binary) << text;
}

/// Largest relative error between an analytic gradient and central finite
/// differences of `loss` (step h), perturbing each coordinate in place. The
/// denominator is max(|analytic|, |numeric|, floor) so that coordinates with
/// vanishing gradient are compared absolutely.
inline double max_gradient_error(const std::vector<double*>& coords, const std::vector<double>& analytic,
                                 const std::function<double()>& loss, double h = 1e-5, double floor = 1e-6) {
  double worst = 0.0;
  for (std::size_t i = 0; i < coords.size(); ++i) {
    const double saved = *coords[i];
    *coords[i] = saved + h;
    const double up = loss();
    *coords[i] = saved - h;
    const double down = loss();
    *coords[i] = saved;
    const double numeric = (up - down) / (2 * h);
    const double scale = std::max({std::abs(analytic[i]), std::abs(numeric), floor});
    worst = std::max(worst, std::abs(analytic[i] - numeric) / scale);
  }
  return worst;
}

}  // namespace locec::testing
