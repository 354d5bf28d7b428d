#pragma once

#include <algorithm>
#include <cstddef>
#include <deque>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "causalid/error.hpp"

namespace causalid {

/// Vertex sets at API boundaries are sets of names; iteration is lexicographic.
using VarSet = std::set<std::string>;

inline bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  auto alpha = [](char c) { return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_'; };
  auto digit = [](char c) { return c >= '0' && c <= '9'; };
  if (!alpha(s.front())) return false;
  return std::all_of(s.begin() + 1, s.end(), [&](char c) { return alpha(c) || digit(c); });
}

/// Acyclic directed mixed graph. Vertices keep insertion order, which every
/// algorithm in the library uses as its deterministic tie-break.
class Admg {
 public:
  using Edge = std::pair<std::size_t, std::size_t>;

  /// Returns the index of `name`, adding it if absent.
  std::size_t add_vertex(std::string_view name) {
    if (auto it = index_.find(std::string(name)); it != index_.end()) return it->second;
    if (!is_identifier(name)) throw GraphError("invalid vertex name '" + std::string(name) + "'");
    const std::size_t v = names_.size();
    names_.emplace_back(name);
    index_.emplace(names_.back(), v);
    parents_.emplace_back();
    children_.emplace_back();
    siblings_.emplace_back();
    return v;
  }

  void add_directed(std::string_view parent, std::string_view child) {
    add_directed(add_vertex(parent), add_vertex(child));
  }

  void add_directed(std::size_t parent, std::size_t child) {
    check_index(parent);
    check_index(child);
    if (parent == child) throw GraphError("self-loop on '" + names_[parent] + "'");
    if (directed_.count({parent, child}))
      throw GraphError("duplicate edge " + names_[parent] + " -> " + names_[child]);
    if (reaches(child, parent))
      throw GraphError("edge " + names_[parent] + " -> " + names_[child] + " creates a directed cycle");
    directed_.emplace(parent, child);
    insert_sorted(children_[parent], child);
    insert_sorted(parents_[child], parent);
  }

  void add_bidirected(std::string_view a, std::string_view b) {
    add_bidirected(add_vertex(a), add_vertex(b));
  }

  void add_bidirected(std::size_t a, std::size_t b) {
    check_index(a);
    check_index(b);
    if (a == b) throw GraphError("self-loop on '" + names_[a] + "'");
    const Edge e = std::minmax(a, b);
    if (bidirected_.count(e))
      throw GraphError("duplicate edge " + names_[e.first] + " <-> " + names_[e.second]);
    bidirected_.insert(e);
    insert_sorted(siblings_[a], b);
    insert_sorted(siblings_[b], a);
  }

  std::size_t size() const noexcept { return names_.size(); }
  const std::vector<std::string>& vertices() const noexcept { return names_; }
  const std::string& name(std::size_t v) const { return names_.at(v); }

  bool contains(std::string_view name) const { return index_.count(std::string(name)) > 0; }

  std::size_t index(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) throw GraphError("unknown vertex '" + std::string(name) + "'");
    return it->second;
  }

  bool has_directed(std::size_t parent, std::size_t child) const { return directed_.count({parent, child}) > 0; }
  bool has_bidirected(std::size_t a, std::size_t b) const { return bidirected_.count(std::minmax(a, b)) > 0; }

  const std::vector<std::size_t>& parents(std::size_t v) const { return parents_.at(v); }
  const std::vector<std::size_t>& children(std::size_t v) const { return children_.at(v); }
  const std::vector<std::size_t>& siblings(std::size_t v) const { return siblings_.at(v); }

  /// Ordered (parent, child) pairs.
  const std::set<Edge>& directed_edges() const noexcept { return directed_; }
  /// Unordered pairs stored as (min index, max index).
  const std::set<Edge>& bidirected_edges() const noexcept { return bidirected_; }

  friend bool operator==(const Admg& a, const Admg& b) {
    return a.names_ == b.names_ && a.directed_ == b.directed_ && a.bidirected_ == b.bidirected_;
  }

 private:
  void check_index(std::size_t v) const {
    if (v >= names_.size()) throw GraphError("vertex index out of range");
  }

  static void insert_sorted(std::vector<std::size_t>& xs, std::size_t v) {
    xs.insert(std::lower_bound(xs.begin(), xs.end(), v), v);
  }

  bool reaches(std::size_t from, std::size_t to) const {
    std::vector<char> seen(names_.size(), 0);
    std::vector<std::size_t> stack{from};
    while (!stack.empty()) {
      const std::size_t v = stack.back();
      stack.pop_back();
      if (v == to) return true;
      if (seen[v]) continue;
      seen[v] = 1;
      for (std::size_t c : children_[v]) stack.push_back(c);
    }
    return false;
  }

  std::vector<std::string> names_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::vector<std::size_t>> parents_, children_, siblings_;
  std::set<Edge> directed_, bidirected_;
};

/// DAG over observed and latent vertices. Vertex order is shared between the
/// two kinds; `observed()` and `latent()` filter it.
class LatentDag {
 public:
  std::size_t add_vertex(std::string_view name, bool latent = false) {
    const std::size_t v = graph_.add_vertex(name);
    if (v == latent_.size()) latent_.push_back(latent ? 1 : 0);
    else if (latent) latent_[v] = 1;
    return v;
  }

  void set_latent(std::string_view name) { latent_.at(graph_.index(name)) = 1; }

  void add_edge(std::string_view parent, std::string_view child) {
    add_vertex(parent);
    add_vertex(child);
    graph_.add_directed(parent, child);
  }

  /// Directed structure over all vertices; never carries bidirected edges.
  const Admg& graph() const noexcept { return graph_; }
  bool is_latent(std::size_t v) const { return latent_.at(v) != 0; }

  std::vector<std::string> observed() const { return filtered(false); }
  std::vector<std::string> latent() const { return filtered(true); }

  friend bool operator==(const LatentDag& a, const LatentDag& b) {
    return a.graph_ == b.graph_ && a.latent_ == b.latent_;
  }

 private:
  std::vector<std::string> filtered(bool want_latent) const {
    std::vector<std::string> out;
    for (std::size_t v = 0; v < graph_.size(); ++v)
      if ((latent_[v] != 0) == want_latent) out.push_back(graph_.name(v));
    return out;
  }

  Admg graph_;
  std::vector<char> latent_;
};

namespace detail {

inline std::vector<char> membership(const Admg& g, const VarSet& s) {
  std::vector<char> in(g.size(), 0);
  for (const auto& name : s) in[g.index(name)] = 1;
  return in;
}

inline VarSet names_of(const Admg& g, const std::vector<char>& in) {
  VarSet out;
  for (std::size_t v = 0; v < g.size(); ++v)
    if (in[v]) out.insert(g.name(v));
  return out;
}

inline std::vector<char> closure(const Admg& g, std::vector<char> in, bool upward) {
  std::vector<std::size_t> stack;
  for (std::size_t v = 0; v < g.size(); ++v)
    if (in[v]) stack.push_back(v);
  while (!stack.empty()) {
    const std::size_t v = stack.back();
    stack.pop_back();
    for (std::size_t w : upward ? g.parents(v) : g.children(v)) {
      if (!in[w]) {
        in[w] = 1;
        stack.push_back(w);
      }
    }
  }
  return in;
}

}  // namespace detail

/// Reflexive ancestors of `s`.
inline VarSet ancestors(const Admg& g, const VarSet& s) {
  return detail::names_of(g, detail::closure(g, detail::membership(g, s), true));
}

/// Reflexive descendants of `s`.
inline VarSet descendants(const Admg& g, const VarSet& s) {
  return detail::names_of(g, detail::closure(g, detail::membership(g, s), false));
}

inline VarSet all_vertices(const Admg& g) { return VarSet(g.vertices().begin(), g.vertices().end()); }

/// Topological order of the directed part. Among ready vertices the one
/// declared first goes first, so the order is a function of the graph alone.
inline std::vector<std::string> topological_order(const Admg& g) {
  std::vector<std::size_t> pending(g.size());
  std::set<std::size_t> ready;
  for (std::size_t v = 0; v < g.size(); ++v) {
    pending[v] = g.parents(v).size();
    if (pending[v] == 0) ready.insert(v);
  }
  std::vector<std::string> order;
  order.reserve(g.size());
  while (!ready.empty()) {
    const std::size_t v = *ready.begin();
    ready.erase(ready.begin());
    order.push_back(g.name(v));
    for (std::size_t c : g.children(v))
      if (--pending[c] == 0) ready.insert(c);
  }
  return order;
}

/// Subgraph induced on `keep`, preserving relative vertex order.
inline Admg induced_subgraph(const Admg& g, const VarSet& keep) {
  const auto in = detail::membership(g, keep);
  Admg out;
  for (std::size_t v = 0; v < g.size(); ++v)
    if (in[v]) out.add_vertex(g.name(v));
  for (auto [a, b] : g.directed_edges())
    if (in[a] && in[b]) out.add_directed(g.name(a), g.name(b));
  for (auto [a, b] : g.bidirected_edges())
    if (in[a] && in[b]) out.add_bidirected(g.name(a), g.name(b));
  return out;
}

/// Connected components of the bidirected skeleton, ordered by least member.
inline std::vector<VarSet> districts(const Admg& g) {
  std::vector<VarSet> out;
  std::vector<char> seen(g.size(), 0);
  for (std::size_t root = 0; root < g.size(); ++root) {
    if (seen[root]) continue;
    VarSet block;
    std::vector<std::size_t> stack{root};
    seen[root] = 1;
    while (!stack.empty()) {
      const std::size_t v = stack.back();
      stack.pop_back();
      block.insert(g.name(v));
      for (std::size_t s : g.siblings(v)) {
        if (!seen[s]) {
          seen[s] = 1;
          stack.push_back(s);
        }
      }
    }
    out.push_back(std::move(block));
  }
  std::sort(out.begin(), out.end(), [](const VarSet& a, const VarSet& b) { return *a.begin() < *b.begin(); });
  return out;
}

/// m-separation of `x` and `y` given `z`. Implemented as a reachability search
/// over (vertex, arrived-through-arrowhead) states: a vertex entered and left
/// through arrowheads is a collider and passes only if it has a descendant in
/// `z`; any other vertex passes only if it is not in `z`.
inline bool m_separated(const Admg& g, const VarSet& x, const VarSet& y, const VarSet& z) {
  const auto in_x = detail::membership(g, x);
  const auto in_y = detail::membership(g, y);
  const auto in_z = detail::membership(g, z);
  for (std::size_t v = 0; v < g.size(); ++v)
    if (in_x[v] + in_y[v] + in_z[v] > 1)
      throw QueryError("separation sets overlap at '" + g.name(v) + "'");
  if (x.empty() || y.empty()) return true;

  const auto an_z = detail::closure(g, in_z, true);
  // state index: 2 * v + (arrived with arrowhead at v)
  std::vector<char> visited(2 * g.size(), 0);
  std::deque<std::pair<std::size_t, bool>> queue;
  for (std::size_t v = 0; v < g.size(); ++v) {
    if (!in_x[v]) continue;
    // Leaving a source vertex is never blocked; seeding both states allows
    // every edge type out of it.
    visited[2 * v] = visited[2 * v + 1] = 1;
    queue.emplace_back(v, false);
  }
  auto visit = [&](std::size_t w, bool head) {
    if (visited[2 * w + (head ? 1 : 0)]) return;
    visited[2 * w + (head ? 1 : 0)] = 1;
    queue.emplace_back(w, head);
  };
  while (!queue.empty()) {
    auto [v, arrived_head] = queue.front();
    queue.pop_front();
    if (in_y[v]) return false;
    const bool source = in_x[v] != 0;
    auto may_leave = [&](bool leaves_through_head) {
      if (source) return true;
      if (arrived_head && leaves_through_head) return an_z[v] != 0;
      return in_z[v] == 0;
    };
    if (may_leave(false))
      for (std::size_t c : g.children(v)) visit(c, true);
    if (may_leave(true)) {
      for (std::size_t p : g.parents(v)) visit(p, false);
      for (std::size_t s : g.siblings(v)) visit(s, true);
    }
  }
  return true;
}

/// Graph surgery: drops directed edges into `cut_incoming`, directed edges out
/// of `cut_outgoing`, and bidirected edges touching `cut_incoming`.
inline Admg mutilate(const Admg& g, const VarSet& cut_incoming, const VarSet& cut_outgoing) {
  const auto in_cut = detail::membership(g, cut_incoming);
  const auto out_cut = detail::membership(g, cut_outgoing);
  Admg out;
  for (const auto& name : g.vertices()) out.add_vertex(name);
  for (auto [a, b] : g.directed_edges())
    if (!in_cut[b] && !out_cut[a]) out.add_directed(a, b);
  for (auto [a, b] : g.bidirected_edges())
    if (!in_cut[a] && !in_cut[b]) out.add_bidirected(a, b);
  return out;
}

/// Projects out the latent vertices. X -> Y survives when a directed path
/// connects them through latents only; X <-> Y appears when some latent
/// reaches both through latent-only directed paths.
inline Admg latent_project(const LatentDag& dag) {
  const Admg& g = dag.graph();
  Admg out;
  for (std::size_t v = 0; v < g.size(); ++v)
    if (!dag.is_latent(v)) out.add_vertex(g.name(v));

  // Observed vertices reachable from `start` through latent-only intermediates.
  auto observed_reach = [&](std::size_t start) {
    std::vector<char> seen(g.size(), 0);
    std::vector<std::size_t> stack(g.children(start).begin(), g.children(start).end());
    std::vector<std::size_t> hits;
    while (!stack.empty()) {
      const std::size_t v = stack.back();
      stack.pop_back();
      if (seen[v]) continue;
      seen[v] = 1;
      if (!dag.is_latent(v)) {
        hits.push_back(v);
        continue;
      }
      for (std::size_t c : g.children(v)) stack.push_back(c);
    }
    std::sort(hits.begin(), hits.end());
    return hits;
  };

  for (std::size_t v = 0; v < g.size(); ++v) {
    const auto hits = observed_reach(v);
    if (!dag.is_latent(v)) {
      for (std::size_t h : hits) out.add_directed(g.name(v), g.name(h));
      continue;
    }
    for (std::size_t i = 0; i < hits.size(); ++i) {
      for (std::size_t j = i + 1; j < hits.size(); ++j) {
        const auto a = out.index(g.name(hits[i]));
        const auto b = out.index(g.name(hits[j]));
        if (!out.has_bidirected(a, b)) out.add_bidirected(a, b);
      }
    }
  }
  return out;
}

/// Replaces every bidirected edge X <-> Y with a fresh latent parent U_XY.
/// Observed vertices come first in the result, then latents in edge order.
inline LatentDag canonical_dag(const Admg& g) {
  LatentDag out;
  for (const auto& name : g.vertices()) out.add_vertex(name);
  for (auto [a, b] : g.directed_edges()) out.add_edge(g.name(a), g.name(b));
  for (auto [a, b] : g.bidirected_edges()) {
    std::string latent = "U_" + g.name(a) + g.name(b);
    while (out.graph().contains(latent)) latent += "_";
    out.add_vertex(latent, true);
    out.add_edge(latent, g.name(a));
    out.add_edge(latent, g.name(b));
  }
  return out;
}

}  // namespace causalid
