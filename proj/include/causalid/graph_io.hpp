#pragma once

#include <cstddef>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "causalid/error.hpp"
#include "causalid/graph.hpp"

namespace causalid {

/// Result of parsing graph text: a file with any `latent` line is a LatentDag.
using ParsedGraph = std::variant<Admg, LatentDag>;

struct ParseOptions {
  /// When set, every vertex must be introduced by `node` or `latent` before
  /// an edge mentions it.
  bool strict_declarations = false;
};

namespace detail {

struct Token {
  std::string text;
  std::size_t column;  // 1-based
};

/// Splits one line into whitespace-separated tokens, dropping `#` comments.
inline std::vector<Token> tokenize_line(std::string_view line) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    const char c = line[i];
    if (c == '#') break;
    if (c == ' ' || c == '\t') {
      ++i;
      continue;
    }
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '#') ++i;
    out.push_back({std::string(line.substr(start, i - start)), start + 1});
  }
  return out;
}

/// Splits text into lines accepting LF or CRLF; strips a leading UTF-8 BOM.
inline std::vector<std::string_view> split_lines(std::string_view text) {
  if (text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    if (end == text.size()) break;
    start = end + 1;
  }
  return lines;
}

inline void expect_identifier(const Token& t, std::size_t line) {
  if (!is_identifier(t.text)) throw ParseError("expected a vertex name, found '" + t.text + "'", line, t.column);
}

}  // namespace detail

inline ParsedGraph parse_graph(std::string_view text, const ParseOptions& options = {}) {
  enum class Kind { Node, Latent, Directed, Bidirected };
  struct Statement {
    Kind kind;
    std::string a, b;
    std::size_t line;
    std::size_t column;
  };

  std::vector<Statement> statements;
  std::vector<std::string> order;
  VarSet mentioned, declared, latent;
  auto mention = [&](const std::string& name) {
    if (mentioned.insert(name).second) order.push_back(name);
  };

  const auto lines = detail::split_lines(text);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    const std::size_t line = n + 1;
    const auto tokens = detail::tokenize_line(lines[n]);
    if (tokens.empty()) continue;

    const auto& head = tokens[0];
    if (head.text == "node" || head.text == "latent") {
      if (tokens.size() != 2) {
        const std::size_t col = tokens.size() < 2 ? lines[n].size() + 1 : tokens[2].column;
        throw ParseError("'" + head.text + "' takes exactly one vertex name", line, col);
      }
      detail::expect_identifier(tokens[1], line);
      const bool is_latent = head.text == "latent";
      const std::string& name = tokens[1].text;
      if (is_latent ? latent.count(name) > 0 : (declared.count(name) > 0 && !latent.count(name)))
        throw ParseError("duplicate declaration of '" + name + "'", line, tokens[1].column);
      declared.insert(name);
      if (is_latent) latent.insert(name);
      mention(name);
      statements.push_back({is_latent ? Kind::Latent : Kind::Node, name, {}, line, head.column});
      continue;
    }

    detail::expect_identifier(head, line);
    if (tokens.size() == 1) throw ParseError("expected '->' or '<->' after '" + head.text + "'", line, lines[n].size() + 1);
    const auto& arrow = tokens[1];
    if (arrow.text != "->" && arrow.text != "<->")
      throw ParseError("expected '->' or '<->', found '" + arrow.text + "'", line, arrow.column);
    if (tokens.size() == 2) throw ParseError("missing edge target", line, lines[n].size() + 1);
    if (tokens.size() > 3) throw ParseError("unexpected token '" + tokens[3].text + "'", line, tokens[3].column);
    detail::expect_identifier(tokens[2], line);
    if (options.strict_declarations) {
      for (const auto* t : {&tokens[0], &tokens[2]})
        if (!declared.count(t->text))
          throw ParseError("undeclared vertex '" + t->text + "'", line, t->column);
    }
    mention(tokens[0].text);
    mention(tokens[2].text);
    statements.push_back({arrow.text == "->" ? Kind::Directed : Kind::Bidirected, tokens[0].text, tokens[2].text,
                          line, arrow.column});
  }

  auto add_edges = [&](auto&& add_directed, auto&& add_bidirected) {
    for (const auto& s : statements) {
      try {
        if (s.kind == Kind::Directed) add_directed(s.a, s.b);
        else if (s.kind == Kind::Bidirected) add_bidirected(s.a, s.b);
      } catch (const GraphError& e) {
        throw ParseError(e.what(), s.line, s.column);
      }
    }
  };

  if (!latent.empty()) {
    LatentDag dag;
    for (const auto& name : order) dag.add_vertex(name, latent.count(name) > 0);
    add_edges([&](const std::string& a, const std::string& b) { dag.add_edge(a, b); },
              [&](const std::string&, const std::string&) {
                throw GraphError("bidirected edges are not allowed in a graph with latent vertices");
              });
    return dag;
  }
  Admg g;
  for (const auto& name : order) g.add_vertex(name);
  add_edges([&](const std::string& a, const std::string& b) { g.add_directed(a, b); },
            [&](const std::string& a, const std::string& b) { g.add_bidirected(a, b); });
  return g;
}

inline ParsedGraph read_graph_file(const std::string& path, const ParseOptions& options = {}) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open graph file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_graph(buffer.str(), options);
}

/// Graph text with explicit declarations first, so vertex order and isolated
/// vertices survive a round trip.
inline std::string print_graph(const Admg& g) {
  std::string out;
  for (const auto& name : g.vertices()) out += "node " + name + "\n";
  for (auto [a, b] : g.directed_edges()) out += g.name(a) + " -> " + g.name(b) + "\n";
  for (auto [a, b] : g.bidirected_edges()) out += g.name(a) + " <-> " + g.name(b) + "\n";
  return out;
}

inline std::string print_graph(const LatentDag& dag) {
  const Admg& g = dag.graph();
  std::string out;
  for (std::size_t v = 0; v < g.size(); ++v) out += (dag.is_latent(v) ? "latent " : "node ") + g.name(v) + "\n";
  for (auto [a, b] : g.directed_edges()) out += g.name(a) + " -> " + g.name(b) + "\n";
  return out;
}

/// The ADMG a parsed file denotes: latent graphs are projected.
inline Admg as_admg(const ParsedGraph& parsed) {
  if (const auto* dag = std::get_if<LatentDag>(&parsed)) return latent_project(*dag);
  return std::get<Admg>(parsed);
}

}  // namespace causalid
