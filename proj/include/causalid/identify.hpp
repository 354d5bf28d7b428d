#pragma once

#include <algorithm>
#include <iterator>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "causalid/error.hpp"
#include "causalid/estimand.hpp"
#include "causalid/graph.hpp"

namespace causalid {

/// p(outcomes(treatments)): treatment values stay symbolic, so one
/// identification serves every value assignment.
struct Query {
  std::vector<std::string> treatments;
  std::vector<std::string> outcomes;
};

/// Nested districts witnessing non-identifiability; `inner` is a proper
/// subset of `outer`.
struct Hedge {
  VarSet inner;
  VarSet outer;

  friend bool operator==(const Hedge&, const Hedge&) = default;
};

struct IdentifyResult {
  std::optional<Estimand> estimand;
  std::optional<Hedge> hedge;

  bool identifiable() const noexcept { return estimand.has_value(); }
};

inline void validate_query(const Admg& g, const Query& q) {
  if (q.outcomes.empty()) throw QueryError("query needs at least one outcome");
  VarSet seen;
  for (const auto* list : {&q.treatments, &q.outcomes}) {
    for (const auto& v : *list) {
      if (!g.contains(v)) throw QueryError("unknown variable '" + v + "'");
      if (!seen.insert(v).second) throw QueryError("variable '" + v + "' listed twice or as both treatment and outcome");
    }
  }
}

namespace detail {

/// Members of `s` in the graph's topological order.
inline std::vector<std::string> in_topological_order(const Admg& g, const VarSet& s) {
  std::vector<std::string> out;
  for (const auto& v : topological_order(g))
    if (s.count(v)) out.push_back(v);
  return out;
}

inline VarSet set_minus(const VarSet& a, const VarSet& b) {
  VarSet out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::inserter(out, out.end()));
  return out;
}

inline VarSet set_union(const VarSet& a, const VarSet& b) {
  VarSet out = a;
  out.insert(b.begin(), b.end());
  return out;
}

inline bool is_subset(const VarSet& a, const VarSet& b) { return std::includes(b.begin(), b.end(), a.begin(), a.end()); }

/// The distribution the recursion works on. `observational` means the
/// marginal of the observed joint over the current graph's vertices, whose
/// conditionals are plain p(.|.) terms; otherwise `expr` is an estimand whose
/// free variables are the current vertices plus outer context.
struct Distribution {
  bool observational = true;
  std::optional<Estimand> expr;
};

class IdRecursion {
 public:
  using Outcome = std::variant<Estimand, Hedge>;

  Outcome run(const VarSet& y, const VarSet& x, const Distribution& p, const Admg& g) {
    const VarSet v = all_vertices(g);

    // 1: nothing to intervene on.
    if (x.empty()) return marginal_over(p, g, y);

    // 2: prune non-ancestors of the outcome.
    const VarSet an_y = ancestors(g, y);
    if (an_y != v) {
      return run(y, intersection(x, an_y), restrict(p, g, an_y), induced_subgraph(g, an_y));
    }

    // 3: intervening on vertices that cannot reach y once x is cut is free.
    const VarSet an_cut = ancestors(mutilate(g, x, {}), y);
    const VarSet w = set_minus(set_minus(v, x), an_cut);
    if (!w.empty()) {
      auto sub = run(y, set_union(x, w), p, g);
      if (std::holds_alternative<Hedge>(sub)) return sub;
      // P_{x,w}(y) does not depend on w; values of w left free in the
      // result are averaged out under P(w) so the estimand stays closed.
      const VarSet used = intersection(free_variables(std::get<Estimand>(sub)), w);
      if (used.empty()) return sub;
      return sum_over(in_topological_order(g, used), product({marginal_over(p, g, used), std::get<Estimand>(sub)}));
    }

    const auto c_rest = districts(induced_subgraph(g, set_minus(v, x)));

    // 4: factorize over the districts of G \ X.
    if (c_rest.size() > 1) {
      std::vector<Estimand> factors;
      for (const auto& s : c_rest) {
        auto sub = run(s, set_minus(v, s), p, g);
        if (std::holds_alternative<Hedge>(sub)) return sub;
        factors.push_back(std::get<Estimand>(std::move(sub)));
      }
      return sum_over(in_topological_order(g, set_minus(v, set_union(y, x))), product(factors));
    }

    const VarSet& s = c_rest.front();
    const auto c_all = districts(g);

    // 5: G is a single district: hedge.
    if (c_all.size() == 1) return Hedge{s, v};

    const auto order = topological_order(g);

    // 6: S is itself a district of G.
    if (std::find(c_all.begin(), c_all.end(), s) != c_all.end()) {
      std::vector<Estimand> factors;
      for (std::size_t i = 0; i < order.size(); ++i)
        if (s.count(order[i])) factors.push_back(conditional(p, order, i));
      return sum_over(in_topological_order(g, set_minus(s, y)), product(factors));
    }

    // 7: S sits inside a larger district S'; recurse on S' with the
    // distribution re-expressed as S' given its predecessors.
    for (const auto& s_prime : c_all) {
      if (!is_subset(s, s_prime)) continue;
      std::vector<Estimand> factors;
      for (std::size_t i = 0; i < order.size(); ++i)
        if (s_prime.count(order[i])) factors.push_back(conditional(p, order, i));
      Distribution next{false, product(factors)};
      return run(y, intersection(x, s_prime), next, induced_subgraph(g, s_prime));
    }
    throw Error("identification: district of G \\ X not contained in a district of G");
  }

 private:
  static VarSet intersection(const VarSet& a, const VarSet& b) {
    VarSet out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::inserter(out, out.end()));
    return out;
  }

  /// Sum of P over everything in G except `keep`.
  static Estimand marginal_over(const Distribution& p, const Admg& g, const VarSet& keep) {
    if (p.observational) return prob(in_topological_order(g, keep));
    return sum_over(in_topological_order(g, set_minus(all_vertices(g), keep)), *p.expr);
  }

  static Distribution restrict(const Distribution& p, const Admg& g, const VarSet& keep) {
    if (p.observational) return p;
    return Distribution{false, marginal_over(p, g, keep)};
  }

  /// P(order[i] | order[0..i)).
  static Estimand conditional(const Distribution& p, const std::vector<std::string>& order, std::size_t i) {
    const std::vector<std::string> before(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(i));
    if (p.observational) return prob({order[i]}, before);
    const std::vector<std::string> after(order.begin() + static_cast<std::ptrdiff_t>(i) + 1, order.end());
    const std::vector<std::string> from_i(order.begin() + static_cast<std::ptrdiff_t>(i), order.end());
    auto numerator = sum_over(after, *p.expr);
    if (before.empty()) return numerator;
    return quotient(numerator, sum_over(from_i, *p.expr));
  }
};

}  // namespace detail

/// General identification of p(Y(x)) in an ADMG. Returns an estimand over
/// observational conditionals or a hedge; output is a function of the input.
inline IdentifyResult id_algorithm(const Admg& g, const Query& q) {
  validate_query(g, q);
  const VarSet x(q.treatments.begin(), q.treatments.end());
  const VarSet y(q.outcomes.begin(), q.outcomes.end());
  auto outcome = detail::IdRecursion{}.run(y, x, detail::Distribution{}, g);
  if (auto* hedge = std::get_if<Hedge>(&outcome)) return IdentifyResult{std::nullopt, std::move(*hedge)};
  return IdentifyResult{fix(x, std::get<Estimand>(outcome)), std::nullopt};
}

namespace detail {

/// Calls `fn` on subsets of `pool` by size, then lexicographically, until it
/// returns true.
template <typename Fn>
bool for_each_subset(const std::vector<std::string>& pool, std::size_t min_size, Fn&& fn) {
  for (std::size_t k = min_size; k <= pool.size(); ++k) {
    std::vector<std::size_t> idx(k);
    for (std::size_t i = 0; i < k; ++i) idx[i] = i;
    while (true) {
      VarSet subset;
      for (auto i : idx) subset.insert(pool[i]);
      if (fn(subset)) return true;
      std::size_t j = k;
      while (j > 0 && idx[j - 1] == pool.size() - k + (j - 1)) --j;
      if (j == 0) break;
      ++idx[j - 1];
      for (std::size_t i = j; i < k; ++i) idx[i] = idx[i - 1] + 1;
    }
  }
  return false;
}

inline std::vector<std::string> in_vertex_order(const Admg& g, const VarSet& s) {
  std::vector<std::string> out;
  for (const auto& v : g.vertices())
    if (s.count(v)) out.push_back(v);
  return out;
}

}  // namespace detail

struct Adjustment {
  VarSet set;
  Estimand estimand;
};

/// Smallest back-door adjustment set for a single treatment, emitted as
/// sum_z p(Y | a, z) p(z).
inline std::optional<Adjustment> backdoor_adjustment(const Admg& g, const Query& q) {
  validate_query(g, q);
  if (q.treatments.size() != 1) throw QueryError("back-door adjustment takes exactly one treatment");
  const std::string& a = q.treatments.front();
  const VarSet y(q.outcomes.begin(), q.outcomes.end());

  VarSet excluded = descendants(g, {a});
  excluded.insert(y.begin(), y.end());
  const auto pool = detail::set_minus(all_vertices(g), excluded);
  const Admg cut = mutilate(g, {}, {a});

  std::optional<VarSet> found;
  detail::for_each_subset({pool.begin(), pool.end()}, 0, [&](const VarSet& z) {
    if (!m_separated(cut, {a}, y, z)) return false;
    found = z;
    return true;
  });
  if (!found) return std::nullopt;

  const auto ys = detail::in_vertex_order(g, y);
  const auto zs = detail::in_vertex_order(g, *found);
  std::vector<std::string> given{a};
  given.insert(given.end(), zs.begin(), zs.end());
  Estimand body = zs.empty() ? prob(ys, given) : product({prob(ys, given), prob(zs)});
  return Adjustment{*found, fix({a}, sum_over(zs, body))};
}

struct FrontDoor {
  VarSet mediators;
  Estimand estimand;
};

/// Smallest mediator set satisfying the front-door conditions, emitted as
/// sum_w p(w | a) sum_a' p(Y | w, a') p(a').
inline std::optional<FrontDoor> frontdoor(const Admg& g, const Query& q) {
  validate_query(g, q);
  if (q.treatments.size() != 1 || q.outcomes.size() != 1)
    throw QueryError("front-door search takes exactly one treatment and one outcome");
  const std::string& a = q.treatments.front();
  const std::string& y = q.outcomes.front();
  const auto pool = detail::set_minus(all_vertices(g), {a, y});
  const Admg a_cut = mutilate(g, {}, {a});

  std::optional<VarSet> found;
  detail::for_each_subset({pool.begin(), pool.end()}, 1, [&](const VarSet& w) {
    const Admg without_w = induced_subgraph(g, detail::set_minus(all_vertices(g), w));
    if (descendants(without_w, {a}).count(y)) return false;
    if (!m_separated(a_cut, {a}, w, {})) return false;
    if (!m_separated(mutilate(g, {}, w), w, {y}, {a})) return false;
    found = w;
    return true;
  });
  if (!found) return std::nullopt;

  const auto ws = detail::in_vertex_order(g, *found);
  std::vector<std::string> given = ws;
  given.push_back(a);
  Estimand inner = sum_over({a}, product({prob({y}, given), prob({a})}));
  return FrontDoor{*found, fix({a}, sum_over(ws, product({prob(ws, {a}), inner})))};
}

/// Parents Z of `treatment` that are m-separated from `outcome` once the
/// treatment's outgoing edges are cut. Diagnostic only.
inline std::vector<std::string> instrument_candidates(const Admg& g, const std::string& treatment,
                                                      const std::string& outcome) {
  std::vector<std::string> out;
  const Admg cut = mutilate(g, {}, {treatment});
  for (std::size_t p : g.parents(g.index(treatment))) {
    const auto& z = g.name(p);
    if (z == outcome) continue;
    if (m_separated(cut, {z}, {outcome}, {})) out.push_back(z);
  }
  return out;
}

}  // namespace causalid
