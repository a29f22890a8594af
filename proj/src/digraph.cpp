#include "dgopt/digraph.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

namespace dgopt {

Digraph::Digraph(int n, std::vector<Edge> edges)
    : n_(n), edges_(std::move(edges)), out_(n > 0 ? n : 0), in_(n > 0 ? n : 0) {
  if (n < 1) throw std::invalid_argument("digraph needs at least one node");
  for (const Edge& e : edges_) {
    if (e.from < 0 || e.from >= n || e.to < 0 || e.to >= n) {
      throw std::invalid_argument("edge " + std::to_string(e.from) + "->" +
                                  std::to_string(e.to) + " out of range for n=" +
                                  std::to_string(n));
    }
    if (e.from == e.to) {
      throw std::invalid_argument("explicit self-loop at node " + std::to_string(e.from) +
                                  " (self-loops are implied)");
    }
  }
  std::sort(edges_.begin(), edges_.end());
  auto dup = std::adjacent_find(edges_.begin(), edges_.end());
  if (dup != edges_.end()) {
    throw std::invalid_argument("duplicate edge " + std::to_string(dup->from) + "->" +
                                std::to_string(dup->to));
  }
  for (int i = 0; i < n; ++i) {
    out_[i].push_back(i);
    in_[i].push_back(i);
  }
  for (const Edge& e : edges_) {
    out_[e.from].push_back(e.to);
    in_[e.to].push_back(e.from);
  }
  for (int i = 0; i < n; ++i) {
    std::sort(out_[i].begin(), out_[i].end());
    std::sort(in_[i].begin(), in_[i].end());
  }
}

bool Digraph::has_edge(int from, int to) const {
  return std::binary_search(edges_.begin(), edges_.end(), Edge{from, to});
}

namespace {

std::size_t reach_count(const Digraph& g, bool forward) {
  std::vector<char> seen(g.size(), 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  std::size_t count = 1;
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    const auto& next = forward ? g.out_neighbors(u) : g.in_neighbors(u);
    for (int v : next) {
      if (!seen[v]) {
        seen[v] = 1;
        ++count;
        stack.push_back(v);
      }
    }
  }
  return count;
}

}  // namespace

bool is_strongly_connected(const Digraph& g) {
  const auto n = static_cast<std::size_t>(g.size());
  return reach_count(g, true) == n && reach_count(g, false) == n;
}

bool is_subgraph(const Digraph& sub, const Digraph& super) {
  if (sub.size() != super.size()) return false;
  return std::includes(super.edges().begin(), super.edges().end(), sub.edges().begin(),
                       sub.edges().end());
}

Digraph fig1_graph() {
  // Transcribed topology; uniform weights on it give tau ~ 1.25, eps ~ 1.10,
  // sup y ~ 1.97 and sup 1/y ~ 2.19.
  return Digraph(10, {{0, 2}, {0, 5}, {1, 4}, {1, 7}, {1, 9}, {2, 1}, {2, 4}, {2, 5}, {3, 7},
                      {4, 0}, {4, 6}, {5, 2}, {5, 3}, {6, 1}, {7, 1}, {8, 2}, {9, 4}, {9, 8}});
}

Digraph ring_graph(int n) {
  std::vector<Edge> edges;
  if (n > 1) {
    for (int i = 0; i < n; ++i) edges.push_back({i, (i + 1) % n});
  }
  return Digraph(n, std::move(edges));
}

Digraph complete_graph(int n) {
  std::vector<Edge> edges;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      if (i != j) edges.push_back({j, i});
    }
  }
  return Digraph(n, std::move(edges));
}

namespace {

std::vector<Edge> random_cycle(int n, std::mt19937_64& rng) {
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<Edge> edges;
  if (n > 1) {
    for (int k = 0; k < n; ++k) edges.push_back({order[k], order[(k + 1) % n]});
  }
  return edges;
}

}  // namespace

Digraph random_strongly_connected(int n, double edge_prob, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("random graph needs n >= 1");
  if (edge_prob < 0.0 || edge_prob > 1.0) {
    throw std::invalid_argument("edge probability must lie in [0, 1]");
  }
  std::mt19937_64 rng(seed);
  std::vector<Edge> edges = random_cycle(n, rng);
  std::vector<char> used(static_cast<std::size_t>(n) * n, 0);
  for (const Edge& e : edges) used[e.from * n + e.to] = 1;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      if (i == j || used[j * n + i]) continue;
      if (unit(rng) < edge_prob) edges.push_back({j, i});
    }
  }
  return Digraph(n, std::move(edges));
}

std::vector<Digraph> nested_chain(int n, const std::vector<int>& extra_edges,
                                  std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("nested chain needs n >= 2");
  std::mt19937_64 rng(seed);
  std::vector<Edge> edges = random_cycle(n, rng);
  std::vector<Edge> missing;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      if (i != j && std::find(edges.begin(), edges.end(), Edge{j, i}) == edges.end()) {
        missing.push_back({j, i});
      }
    }
  }
  std::shuffle(missing.begin(), missing.end(), rng);

  std::vector<Digraph> chain;
  chain.emplace_back(n, edges);
  std::size_t next = 0;
  for (int extra : extra_edges) {
    if (extra < 0) throw std::invalid_argument("nested chain increments must be >= 0");
    for (int k = 0; k < extra && next < missing.size(); ++k) edges.push_back(missing[next++]);
    chain.emplace_back(n, edges);
  }
  return chain;
}

}  // namespace dgopt
