#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "causalid/error.hpp"
#include "causalid/estimand.hpp"
#include "causalid/graph.hpp"
#include "causalid/graph_io.hpp"
#include "causalid/identify.hpp"
#include "causalid/joint.hpp"
#include "causalid/rng.hpp"

namespace causalid {

inline constexpr double kPositivityFloor = 1e-3;
inline constexpr int kDefaultCardinality = 2;

/// Discrete structural causal model over a LatentDag. `rows(v)[k]` is the
/// distribution of v given the k-th assignment of its parents, parents taken
/// in vertex order with the last parent varying fastest.
class DiscreteScm {
 public:
  DiscreteScm(LatentDag dag, std::vector<int> cardinalities, std::vector<std::vector<std::vector<double>>> rows)
      : dag_(std::move(dag)), cards_(std::move(cardinalities)), rows_(std::move(rows)) {
    const Admg& g = dag_.graph();
    if (cards_.size() != g.size() || rows_.size() != g.size())
      throw Error("scm: one cardinality and one CPT per vertex required");
    for (std::size_t v = 0; v < g.size(); ++v) {
      if (cards_[v] < 2) throw Error("scm: cardinality of '" + g.name(v) + "' must be >= 2");
      std::size_t expected_rows = 1;
      for (std::size_t p : g.parents(v)) expected_rows *= static_cast<std::size_t>(cards_[p]);
      if (rows_[v].size() != expected_rows)
        throw Error("scm: CPT of '" + g.name(v) + "' needs " + std::to_string(expected_rows) + " rows");
      for (const auto& row : rows_[v]) {
        if (row.size() != static_cast<std::size_t>(cards_[v]))
          throw Error("scm: CPT row of '" + g.name(v) + "' has the wrong length");
        double total = 0.0;
        for (double x : row) {
          if (!(x >= 0.0)) throw Error("scm: negative probability in CPT of '" + g.name(v) + "'");
          total += x;
        }
        if (std::abs(total - 1.0) > kNormalizationTolerance)
          throw Error("scm: CPT row of '" + g.name(v) + "' sums to " + std::to_string(total));
      }
    }
  }

  const LatentDag& dag() const noexcept { return dag_; }
  const Admg& graph() const noexcept { return dag_.graph(); }
  int cardinality(std::size_t v) const { return cards_.at(v); }
  const std::vector<int>& cardinalities() const noexcept { return cards_; }
  const std::vector<std::vector<double>>& rows(std::size_t v) const { return rows_.at(v); }

  /// Row index of v's CPT for a full assignment (indexed by vertex).
  std::size_t row_index(std::size_t v, const std::vector<int>& values) const {
    std::size_t k = 0;
    for (std::size_t p : graph().parents(v)) k = k * static_cast<std::size_t>(cards_[p]) + static_cast<std::size_t>(values[p]);
    return k;
  }

  friend bool operator==(const DiscreteScm&, const DiscreteScm&) = default;

 private:
  LatentDag dag_;
  std::vector<int> cards_;
  std::vector<std::vector<std::vector<double>>> rows_;
};

namespace detail {

/// Truncated factorization: clamps `intervention`, drops those factors, and
/// sums over every vertex not kept. Summation order is the fixed mixed-radix
/// order over free vertices, so results are reproducible bit for bit.
inline JointTable truncated_joint(const DiscreteScm& m, const Assignment& intervention, bool keep_latent) {
  const Admg& g = m.graph();
  std::vector<int> clamp(g.size(), -1);
  for (const auto& [name, value] : intervention) {
    const std::size_t v = g.index(name);
    if (m.dag().is_latent(v)) throw QueryError("cannot intervene on latent '" + name + "'");
    if (value < 0 || value >= m.cardinality(v)) throw QueryError("intervention value out of range for '" + name + "'");
    clamp[v] = value;
  }
  std::vector<std::size_t> free_vertices, kept;
  std::vector<int> free_cards, kept_cards;
  std::vector<std::string> kept_names;
  for (std::size_t v = 0; v < g.size(); ++v) {
    if (clamp[v] >= 0) continue;
    free_vertices.push_back(v);
    free_cards.push_back(m.cardinality(v));
    if (keep_latent || !m.dag().is_latent(v)) {
      kept.push_back(v);
      kept_cards.push_back(m.cardinality(v));
      kept_names.push_back(g.name(v));
    }
  }
  std::size_t cells = 1, out_cells = 1;
  for (int c : free_cards) cells *= static_cast<std::size_t>(c);
  for (int c : kept_cards) out_cells *= static_cast<std::size_t>(c);

  std::vector<double> mass(out_cells, 0.0);
  std::vector<int> values(g.size());
  for (std::size_t v = 0; v < g.size(); ++v)
    if (clamp[v] >= 0) values[v] = clamp[v];
  for (std::size_t cell = 0; cell < cells; ++cell) {
    const auto free_values = decode_index(cell, free_cards);
    for (std::size_t i = 0; i < free_vertices.size(); ++i) values[free_vertices[i]] = free_values[i];
    double p = 1.0;
    for (std::size_t v : free_vertices) p *= m.rows(v)[m.row_index(v, values)][static_cast<std::size_t>(values[v])];
    std::size_t target = 0;
    for (std::size_t i = 0; i < kept.size(); ++i)
      target = target * static_cast<std::size_t>(kept_cards[i]) + static_cast<std::size_t>(values[kept[i]]);
    mass[target] += p;
  }
  return JointTable(std::move(kept_names), std::move(kept_cards), std::move(mass));
}

}  // namespace detail

/// Exact joint over the observed variables, latents summed out.
inline JointTable observational_joint(const DiscreteScm& m) { return detail::truncated_joint(m, {}, false); }

/// Exact joint over the observed, non-intervened variables under do(intervention).
inline JointTable interventional_joint(const DiscreteScm& m, const Assignment& intervention) {
  return detail::truncated_joint(m, intervention, false);
}

/// As interventional_joint, but latents are kept as table variables.
inline JointTable full_joint(const DiscreteScm& m, const Assignment& intervention = {}) {
  return detail::truncated_joint(m, intervention, true);
}

/// Seeded random SCM. Each vertex draws its CPT rows from its own stream
/// keyed by (seed, name): rows are flat-Dirichlet draws mixed with the
/// uniform row so every entry is at least kPositivityFloor.
inline DiscreteScm random_scm(const LatentDag& dag, std::uint64_t seed, const std::map<std::string, int>& cards = {}) {
  const Admg& g = dag.graph();
  std::vector<int> card(g.size(), kDefaultCardinality);
  for (const auto& [name, c] : cards) card.at(g.index(name)) = c;
  std::vector<std::vector<std::vector<double>>> rows(g.size());
  for (std::size_t v = 0; v < g.size(); ++v) {
    std::size_t n_rows = 1;
    for (std::size_t p : g.parents(v)) n_rows *= static_cast<std::size_t>(card[p]);
    SplitMix64 rng = substream(seed, g.name(v));
    const double scale = 1.0 - kPositivityFloor * card[v];
    for (std::size_t r = 0; r < n_rows; ++r) {
      std::vector<double> row(static_cast<std::size_t>(card[v]));
      double total = 0.0;
      for (auto& x : row) total += (x = rng.exponential());
      for (auto& x : row) x = kPositivityFloor + scale * x / total;
      rows[v].push_back(std::move(row));
    }
  }
  return DiscreteScm(dag, std::move(card), std::move(rows));
}

struct VerifyReport {
  double max_abs_error = 0.0;
  bool pass = false;
};

/// Compares `e` evaluated on the observational joint of `m` with the true
/// interventional distribution, for every assignment of the treatments.
inline VerifyReport verify(const Estimand& e, const DiscreteScm& m, const Query& q, double tol) {
  const JointTable observed = observational_joint(m);
  std::vector<int> cards;
  for (const auto& t : q.treatments) cards.push_back(observed.cardinality(t));
  const VarSet outcome_set(q.outcomes.begin(), q.outcomes.end());
  VerifyReport report;
  for (const auto& values : enumerate_assignments(q.treatments, cards)) {
    const JointTable truth = marginalize(interventional_joint(m, values), outcome_set);
    const auto estimate = evaluate(e, observed, values, truth.variables());
    report.max_abs_error = std::max(report.max_abs_error, sup_distance(estimate, truth.mass()));
  }
  report.pass = report.max_abs_error <= tol;
  return report;
}

/// I(X; Y | Z) in nats.
inline double conditional_mutual_information(const JointTable& joint, const VarSet& x, const VarSet& y,
                                             const VarSet& z) {
  auto u = [](VarSet a, const VarSet& b) {
    a.insert(b.begin(), b.end());
    return a;
  };
  const JointTable pxyz = marginalize(joint, u(u(x, y), z));
  const JointTable pxz = marginalize(joint, u(x, z));
  const JointTable pyz = marginalize(joint, u(y, z));
  const JointTable pz = marginalize(joint, z);
  // Each smaller table's variables are a subsequence of pxyz's, so a cell of
  // pxyz maps to a cell of each by dropping digits.
  auto index_in = [&](const JointTable& t, const std::vector<int>& values) {
    std::size_t index = 0, k = 0;
    for (std::size_t i = 0; i < pxyz.variables().size() && k < t.variables().size(); ++i) {
      if (pxyz.variables()[i] != t.variables()[k]) continue;
      index = index * static_cast<std::size_t>(t.cardinalities()[k]) + static_cast<std::size_t>(values[i]);
      ++k;
    }
    return index;
  };
  double out = 0.0;
  for (std::size_t cell = 0; cell < pxyz.size(); ++cell) {
    const double p = pxyz.mass()[cell];
    if (p <= 0.0) continue;
    const auto values = decode_index(cell, pxyz.cardinalities());
    out += p * std::log(p * pz.mass()[index_in(pz, values)] /
                        (pxz.mass()[index_in(pxz, values)] * pyz.mass()[index_in(pyz, values)]));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Fixture file format
// ---------------------------------------------------------------------------
//
//   scm v1
//   <graph statements>
//   card X 3
//   cpt X : 0.2 0.3 0.5              (root)
//   cpt Y | pa=0,1 : 0.25 0.75       (one line per parent assignment)
//
// Parent values follow the graph's vertex order. A graph with bidirected
// edges is read through its canonical DAG, so CPTs then name U_XY latents.

inline DiscreteScm parse_scm(std::string_view text) {
  const auto lines = detail::split_lines(text);
  std::string graph_text;
  struct CardLine { std::string var; int card; std::size_t line, column; };
  struct CptLine { std::string var; std::vector<int> parents; std::vector<double> row; std::size_t line, column; };
  std::vector<CardLine> card_lines;
  std::vector<CptLine> cpt_lines;
  bool header = false;

  auto parse_int = [](const detail::Token& t, std::size_t line) {
    char* end = nullptr;
    const long v = std::strtol(t.text.c_str(), &end, 10);
    if (t.text.empty() || *end != '\0' || v < 0 || v > 1'000'000) throw ParseError("expected a non-negative integer, found '" + t.text + "'", line, t.column);
    return static_cast<int>(v);
  };

  for (std::size_t n = 0; n < lines.size(); ++n) {
    const std::size_t line = n + 1;
    const auto tokens = detail::tokenize_line(lines[n]);
    if (tokens.empty()) {
      graph_text += "\n";
      continue;
    }
    if (!header) {
      if (tokens.size() != 2 || tokens[0].text != "scm" || tokens[1].text != "v1")
        throw ParseError("expected header 'scm v1'", line, tokens[0].column);
      header = true;
      graph_text += "\n";
      continue;
    }
    if (tokens[0].text == "card") {
      if (tokens.size() != 3) throw ParseError("expected 'card NAME N'", line, tokens[0].column);
      card_lines.push_back({tokens[1].text, parse_int(tokens[2], line), line, tokens[1].column});
      graph_text += "\n";
      continue;
    }
    if (tokens[0].text == "cpt") {
      if (tokens.size() < 3) throw ParseError("expected 'cpt NAME [| pa=...] : p...'", line, tokens[0].column);
      CptLine cpt{tokens[1].text, {}, {}, line, tokens[1].column};
      std::size_t i = 2;
      if (tokens[i].text == "|") {
        if (i + 1 >= tokens.size() || tokens[i + 1].text.rfind("pa=", 0) != 0)
          throw ParseError("expected 'pa=' after '|'", line, tokens[i].column);
        const auto& pa = tokens[i + 1];
        std::string_view list = std::string_view(pa.text).substr(3);
        std::size_t offset = 3;
        while (!list.empty()) {
          const std::size_t comma = list.find(',');
          const std::string item(list.substr(0, comma));
          cpt.parents.push_back(parse_int({item, pa.column + offset}, line));
          if (comma == std::string_view::npos) break;
          list.remove_prefix(comma + 1);
          offset += comma + 1;
        }
        i += 2;
      }
      if (i >= tokens.size() || tokens[i].text != ":") throw ParseError("expected ':'", line, i < tokens.size() ? tokens[i].column : lines[n].size() + 1);
      for (++i; i < tokens.size(); ++i) {
        char* end = nullptr;
        const double x = std::strtod(tokens[i].text.c_str(), &end);
        if (*end != '\0') throw ParseError("expected a probability, found '" + tokens[i].text + "'", line, tokens[i].column);
        cpt.row.push_back(x);
      }
      cpt_lines.push_back(std::move(cpt));
      graph_text += "\n";
      continue;
    }
    graph_text += std::string(lines[n]) + "\n";
  }
  if (!header) throw ParseError("expected header 'scm v1'", 1, 0);

  const ParsedGraph parsed = parse_graph(graph_text);
  LatentDag dag;
  if (const auto* d = std::get_if<LatentDag>(&parsed)) dag = *d;
  else dag = canonical_dag(std::get<Admg>(parsed));
  const Admg& g = dag.graph();

  std::vector<int> cards(g.size(), kDefaultCardinality);
  for (const auto& c : card_lines) {
    if (!g.contains(c.var)) throw ParseError("unknown variable '" + c.var + "'", c.line, c.column);
    if (c.card < 2) throw ParseError("cardinality must be >= 2", c.line, c.column);
    cards[g.index(c.var)] = c.card;
  }
  std::vector<std::vector<std::vector<double>>> rows(g.size());
  std::vector<std::vector<char>> filled(g.size());
  for (std::size_t v = 0; v < g.size(); ++v) {
    std::size_t n_rows = 1;
    for (std::size_t p : g.parents(v)) n_rows *= static_cast<std::size_t>(cards[p]);
    rows[v].resize(n_rows);
    filled[v].assign(n_rows, 0);
  }
  for (const auto& c : cpt_lines) {
    if (!g.contains(c.var)) throw ParseError("unknown variable '" + c.var + "'", c.line, c.column);
    const std::size_t v = g.index(c.var);
    const auto& parents = g.parents(v);
    if (c.parents.size() != parents.size())
      throw ParseError("'" + c.var + "' has " + std::to_string(parents.size()) + " parents", c.line, c.column);
    std::size_t k = 0;
    for (std::size_t i = 0; i < parents.size(); ++i) {
      if (c.parents[i] >= cards[parents[i]]) throw ParseError("parent value out of range", c.line, c.column);
      k = k * static_cast<std::size_t>(cards[parents[i]]) + static_cast<std::size_t>(c.parents[i]);
    }
    if (filled[v][k]) throw ParseError("duplicate CPT row for '" + c.var + "'", c.line, c.column);
    filled[v][k] = 1;
    rows[v][k] = c.row;
  }
  for (std::size_t v = 0; v < g.size(); ++v)
    for (char f : filled[v])
      if (!f) throw ParseError("missing CPT rows for '" + g.name(v) + "'", lines.size(), 0);
  return DiscreteScm(std::move(dag), std::move(cards), std::move(rows));
}

inline DiscreteScm read_scm_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open SCM file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_scm(buffer.str());
}

/// Text form with every probability printed to 17 significant digits, which
/// round-trips doubles exactly.
inline std::string print_scm(const DiscreteScm& m) {
  const Admg& g = m.graph();
  std::string out = "scm v1\n" + print_graph(m.dag());
  for (std::size_t v = 0; v < g.size(); ++v) out += "card " + g.name(v) + " " + std::to_string(m.cardinality(v)) + "\n";
  char buf[32];
  for (std::size_t v = 0; v < g.size(); ++v) {
    std::vector<int> parent_cards;
    for (std::size_t p : g.parents(v)) parent_cards.push_back(m.cardinality(p));
    for (std::size_t k = 0; k < m.rows(v).size(); ++k) {
      out += "cpt " + g.name(v);
      if (!parent_cards.empty()) {
        out += " | pa=";
        const auto values = decode_index(k, parent_cards);
        for (std::size_t i = 0; i < values.size(); ++i) out += (i ? "," : "") + std::to_string(values[i]);
      }
      out += " :";
      for (double x : m.rows(v)[k]) {
        std::snprintf(buf, sizeof buf, " %.17g", x);
        out += buf;
      }
      out += "\n";
    }
  }
  return out;
}

}  // namespace causalid
