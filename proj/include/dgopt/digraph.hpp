#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace dgopt {

/// A directed communication link: agent `from` can send to agent `to`.
struct Edge {
  int from = 0;
  int to = 0;

  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Directed topology over agents 0..n-1.
///
/// Every node is implicitly its own in- and out-neighbour, so the explicit
/// edge list never contains self-loops. Duplicate edges and explicit
/// self-loops are rejected at construction. Immutable afterwards.
class Digraph {
 public:
  Digraph(int n, std::vector<Edge> edges);

  int size() const { return n_; }

  /// Explicit edges (no self-loops), sorted by (from, to).
  const std::vector<Edge>& edges() const { return edges_; }
  std::size_t edge_count() const { return edges_.size(); }

  /// Out-neighbourhood of `node`, including `node` itself, sorted.
  const std::vector<int>& out_neighbors(int node) const { return out_.at(node); }
  /// In-neighbourhood of `node`, including `node` itself, sorted.
  const std::vector<int>& in_neighbors(int node) const { return in_.at(node); }
  int out_degree(int node) const { return static_cast<int>(out_.at(node).size()); }

  bool has_edge(int from, int to) const;

  friend bool operator==(const Digraph& a, const Digraph& b) {
    return a.n_ == b.n_ && a.edges_ == b.edges_;
  }

 private:
  int n_;
  std::vector<Edge> edges_;
  std::vector<std::vector<int>> out_;
  std::vector<std::vector<int>> in_;
};

/// True iff every ordered node pair is joined by a directed path.
bool is_strongly_connected(const Digraph& g);

/// True iff every edge of `sub` is an edge of `super` (same node count).
bool is_subgraph(const Digraph& sub, const Digraph& super);

// Built-in and generated topologies.

/// Ten-agent reference topology used by the experiment presets.
Digraph fig1_graph();
/// Directed cycle 0 -> 1 -> ... -> n-1 -> 0.
Digraph ring_graph(int n);
/// Every ordered pair connected.
Digraph complete_graph(int n);
/// Random strongly-connected digraph: a randomly permuted directed cycle plus
/// every remaining ordered pair with probability `edge_prob`.
Digraph random_strongly_connected(int n, double edge_prob, std::uint64_t seed);

/// Nested chain G_0 ⊂ G_1 ⊂ ... of strongly-connected digraphs. The first
/// graph is a random directed cycle; each later graph adds
/// `extra_edges[i]` edges drawn uniformly from the missing ones.
std::vector<Digraph> nested_chain(int n, const std::vector<int>& extra_edges,
                                  std::uint64_t seed);

// Text format: first non-comment line `n`, then one `j i` line per edge
// j -> i (0-based). `#` starts a comment. Self-loops are implied.

Digraph parse_graph(std::istream& in);
Digraph load_graph(const std::filesystem::path& path);
void write_graph(std::ostream& out, const Digraph& g);

/// Resolves a graph source string: `fig1`, `ring:N`, `complete:N`,
/// `random:N:P:SEED`, or otherwise a path to a graph file.
Digraph resolve_graph(std::string_view source);

}  // namespace dgopt
