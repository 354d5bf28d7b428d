#pragma once

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "causalid/error.hpp"
#include "causalid/graph.hpp"
#include "causalid/joint.hpp"
#include "causalid/rng.hpp"

namespace causalid {

// ---------------------------------------------------------------------------
// Expression tree
// ---------------------------------------------------------------------------

/// How a variable occurrence obtains its value:
///  - Free: from the outcome assignment being evaluated (or, inside the
///    identification recursion, from whatever scope later closes over it);
///  - Fixed: from the treatment assignment supplied at evaluation time;
///  - Bound: from the enclosing summation that introduced `binder`.
enum class RefKind { Free, Fixed, Bound };

struct Term {
  std::string variable;
  RefKind kind = RefKind::Free;
  std::uint64_t binder = 0;

  friend bool operator==(const Term&, const Term&) = default;
};

/// A summation index. Ids are unique per process, so nested sums over the
/// same variable (the primed copies in front-door style formulas) can never
/// capture each other.
struct Binder {
  std::uint64_t id;
  std::string variable;
};

inline std::uint64_t fresh_binder_id() {
  static std::atomic<std::uint64_t> next{1};
  return next.fetch_add(1, std::memory_order_relaxed);
}

struct Node;

/// Immutable handle to an expression node; copies share structure.
class Estimand {
 public:
  explicit Estimand(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  const Node& node() const noexcept { return *node_; }

 private:
  std::shared_ptr<const Node> node_;
};

struct Conditional {
  std::vector<Term> targets;
  std::vector<Term> given;
};

struct Marginal {
  std::vector<Binder> binders;
  Estimand body;
};

struct Product {
  std::vector<Estimand> factors;
};

struct Quotient {
  Estimand numerator;
  Estimand denominator;
};

struct Node {
  std::variant<Conditional, Marginal, Product, Quotient> value;
};

// ---------------------------------------------------------------------------
// Builders
// ---------------------------------------------------------------------------

inline Term free_term(std::string variable) { return Term{std::move(variable), RefKind::Free, 0}; }

inline Estimand make_conditional(std::vector<Term> targets, std::vector<Term> given) {
  if (targets.empty()) throw Error("conditional needs at least one target");
  return Estimand(std::make_shared<const Node>(Node{Conditional{std::move(targets), std::move(given)}}));
}

/// p(targets | given) over free variables.
inline Estimand prob(const std::vector<std::string>& targets, const std::vector<std::string>& given = {}) {
  std::vector<Term> t, g;
  for (const auto& v : targets) t.push_back(free_term(v));
  for (const auto& v : given) g.push_back(free_term(v));
  return make_conditional(std::move(t), std::move(g));
}

/// Product with nested products flattened; a single factor is returned as is.
inline Estimand product(const std::vector<Estimand>& factors) {
  std::vector<Estimand> flat;
  for (const auto& f : factors) {
    if (const auto* p = std::get_if<Product>(&f.node().value))
      flat.insert(flat.end(), p->factors.begin(), p->factors.end());
    else
      flat.push_back(f);
  }
  if (flat.size() == 1) return flat.front();
  return Estimand(std::make_shared<const Node>(Node{Product{std::move(flat)}}));
}

inline Estimand quotient(Estimand numerator, Estimand denominator) {
  return Estimand(std::make_shared<const Node>(Node{Quotient{std::move(numerator), std::move(denominator)}}));
}

/// Summation over explicit binders; `body` must already refer to them.
inline Estimand make_marginal(std::vector<Binder> binders, Estimand body) {
  if (binders.empty()) return body;
  return Estimand(std::make_shared<const Node>(Node{Marginal{std::move(binders), std::move(body)}}));
}

namespace detail {

/// Rewrites free occurrences of the variables in `remap` with the given term.
inline Estimand rebind(const Estimand& e, const std::map<std::string, Term>& remap) {
  auto term = [&](const Term& t) {
    if (t.kind != RefKind::Free) return t;
    auto it = remap.find(t.variable);
    return it == remap.end() ? t : it->second;
  };
  return std::visit(
      [&](const auto& n) -> Estimand {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Conditional>) {
          Conditional c;
          for (const auto& t : n.targets) c.targets.push_back(term(t));
          for (const auto& t : n.given) c.given.push_back(term(t));
          return Estimand(std::make_shared<const Node>(Node{std::move(c)}));
        } else if constexpr (std::is_same_v<T, Marginal>) {
          return make_marginal(n.binders, rebind(n.body, remap));
        } else if constexpr (std::is_same_v<T, Product>) {
          std::vector<Estimand> fs;
          for (const auto& f : n.factors) fs.push_back(rebind(f, remap));
          return Estimand(std::make_shared<const Node>(Node{Product{std::move(fs)}}));
        } else {
          return quotient(rebind(n.numerator, remap), rebind(n.denominator, remap));
        }
      },
      e.node().value);
}

inline void collect_terms(const Estimand& e, const std::function<void(const Term&)>& fn) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Conditional>) {
          for (const auto& t : n.targets) fn(t);
          for (const auto& t : n.given) fn(t);
        } else if constexpr (std::is_same_v<T, Marginal>) {
          collect_terms(n.body, fn);
        } else if constexpr (std::is_same_v<T, Product>) {
          for (const auto& f : n.factors) collect_terms(f, fn);
        } else {
          collect_terms(n.numerator, fn);
          collect_terms(n.denominator, fn);
        }
      },
      e.node().value);
}

}  // namespace detail

/// Sums `body` over `variables`, turning their free occurrences into bound
/// references to fresh binders.
inline Estimand sum_over(const std::vector<std::string>& variables, const Estimand& body) {
  if (variables.empty()) return body;
  std::vector<Binder> binders;
  std::map<std::string, Term> remap;
  for (const auto& v : variables) {
    if (remap.count(v)) continue;
    Binder b{fresh_binder_id(), v};
    remap.emplace(v, Term{v, RefKind::Bound, b.id});
    binders.push_back(std::move(b));
  }
  return make_marginal(std::move(binders), detail::rebind(body, remap));
}

/// Marks free occurrences of `variables` as fixed treatment values.
inline Estimand fix(const VarSet& variables, const Estimand& body) {
  std::map<std::string, Term> remap;
  for (const auto& v : variables) remap.emplace(v, Term{v, RefKind::Fixed, 0});
  return detail::rebind(body, remap);
}

inline VarSet free_variables(const Estimand& e) {
  VarSet out;
  detail::collect_terms(e, [&](const Term& t) {
    if (t.kind == RefKind::Free) out.insert(t.variable);
  });
  return out;
}

inline VarSet fixed_variables(const Estimand& e) {
  VarSet out;
  detail::collect_terms(e, [&](const Term& t) {
    if (t.kind == RefKind::Fixed) out.insert(t.variable);
  });
  return out;
}

/// Every variable mentioned anywhere, including summation indices.
inline VarSet mentioned_variables(const Estimand& e) {
  VarSet out;
  detail::collect_terms(e, [&](const Term& t) { out.insert(t.variable); });
  return out;
}

/// Structural equality up to renaming of binders.
inline bool structurally_equal(const Estimand& a, const Estimand& b) {
  std::map<std::uint64_t, std::uint64_t> renaming;
  std::function<bool(const Estimand&, const Estimand&)> eq = [&](const Estimand& x, const Estimand& y) -> bool {
    if (x.node().value.index() != y.node().value.index()) return false;
    auto terms_eq = [&](const std::vector<Term>& s, const std::vector<Term>& t) {
      if (s.size() != t.size()) return false;
      for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i].variable != t[i].variable || s[i].kind != t[i].kind) return false;
        if (s[i].kind == RefKind::Bound) {
          auto it = renaming.find(s[i].binder);
          if (it == renaming.end() || it->second != t[i].binder) return false;
        }
      }
      return true;
    };
    if (const auto* c = std::get_if<Conditional>(&x.node().value)) {
      const auto& d = std::get<Conditional>(y.node().value);
      return terms_eq(c->targets, d.targets) && terms_eq(c->given, d.given);
    }
    if (const auto* m = std::get_if<Marginal>(&x.node().value)) {
      const auto& n = std::get<Marginal>(y.node().value);
      if (m->binders.size() != n.binders.size()) return false;
      for (std::size_t i = 0; i < m->binders.size(); ++i) {
        if (m->binders[i].variable != n.binders[i].variable) return false;
        renaming[m->binders[i].id] = n.binders[i].id;
      }
      return eq(m->body, n.body);
    }
    if (const auto* p = std::get_if<Product>(&x.node().value)) {
      const auto& q = std::get<Product>(y.node().value);
      if (p->factors.size() != q.factors.size()) return false;
      for (std::size_t i = 0; i < p->factors.size(); ++i)
        if (!eq(p->factors[i], q.factors[i])) return false;
      return true;
    }
    const auto& p = std::get<Quotient>(x.node().value);
    const auto& q = std::get<Quotient>(y.node().value);
    return eq(p.numerator, q.numerator) && eq(p.denominator, q.denominator);
  };
  return eq(a, b);
}

// ---------------------------------------------------------------------------
// Text form
// ---------------------------------------------------------------------------
//
//   expr    := factor+ | '1'
//   factor  := 'p(' args [ '|' args ] ')'
//            | 'sum_{' binder {',' binder} '}' expr        (extends rightwards)
//            | '(' expr ')' [ '/' '(' expr ')' ]
//   arg     := NAME | NAME '=' SYMBOL
//   binder  := SYMBOL | NAME '=' SYMBOL
//
// Value symbols are the lower-cased variable name plus primes (`a`, `a'`).
// A bare symbol is resolved through that convention against the variable
// vocabulary; the explicit `NAME=SYMBOL` form is printed only when the
// convention is ambiguous. An argument naming a variable is a free
// occurrence; a symbol not introduced by an enclosing sum is a fixed value.

namespace detail {

inline std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

/// The variable a bare symbol denotes, when exactly one candidate exists.
inline std::optional<std::string> resolve_symbol(std::string_view symbol, const VarSet& vocabulary) {
  std::string_view base = symbol;
  while (!base.empty() && base.back() == '\'') base.remove_suffix(1);
  std::optional<std::string> found;
  for (const auto& v : vocabulary) {
    if (ascii_lower(v) != base) continue;
    if (found) return std::nullopt;
    found = v;
  }
  return found;
}

class Printer {
 public:
  Printer(const Estimand& e, const VarSet& vocabulary) : vocabulary_(vocabulary) {
    for (const auto& v : mentioned_variables(e)) vocabulary_.insert(v);
    collect_terms(e, [&](const Term& t) {
      if (t.kind != RefKind::Fixed || fixed_.count(t.variable)) return;
      const auto sym = fresh(t.variable);
      fixed_.emplace(t.variable, sym);
      in_use_.insert(sym);
    });
  }

  std::string print(const Estimand& e) {
    return std::visit(
        [&](const auto& n) -> std::string {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, Conditional>) {
            std::string out = "p(" + terms(n.targets);
            if (!n.given.empty()) out += " | " + terms(n.given);
            return out + ")";
          } else if constexpr (std::is_same_v<T, Marginal>) {
            std::string out = "sum_{";
            std::vector<std::string> pushed;
            for (std::size_t i = 0; i < n.binders.size(); ++i) {
              const auto sym = fresh(n.binders[i].variable);
              in_use_.insert(sym);
              pushed.push_back(sym);
              bound_[n.binders[i].id] = sym;
              if (i > 0) out += ", ";
              out += resolve_symbol(sym, vocabulary_) == n.binders[i].variable ? sym
                                                                               : n.binders[i].variable + "=" + sym;
            }
            out += "} " + print(n.body);
            for (const auto& s : pushed) in_use_.erase(s);
            return out;
          } else if constexpr (std::is_same_v<T, Product>) {
            if (n.factors.empty()) return "1";
            std::string out;
            for (std::size_t i = 0; i < n.factors.size(); ++i) {
              if (i > 0) out += " ";
              const bool wrap =
                  i + 1 < n.factors.size() && std::holds_alternative<Marginal>(n.factors[i].node().value);
              out += wrap ? "(" + print(n.factors[i]) + ")" : print(n.factors[i]);
            }
            return out;
          } else {
            return "(" + print(n.numerator) + ") / (" + print(n.denominator) + ")";
          }
        },
        e.node().value);
  }

 private:
  std::string fresh(const std::string& variable) const {
    std::string sym = ascii_lower(variable);
    while (in_use_.count(sym) || vocabulary_.count(sym)) sym += "'";
    return sym;
  }

  std::string terms(const std::vector<Term>& ts) {
    std::string out;
    for (std::size_t i = 0; i < ts.size(); ++i) {
      if (i > 0) out += ", ";
      const Term& t = ts[i];
      switch (t.kind) {
        case RefKind::Free:
          out += t.variable;
          break;
        case RefKind::Bound:
          out += bound_.at(t.binder);
          break;
        case RefKind::Fixed: {
          const auto& sym = fixed_.at(t.variable);
          out += resolve_symbol(sym, vocabulary_) == t.variable ? sym : t.variable + "=" + sym;
          break;
        }
      }
    }
    return out;
  }

  VarSet vocabulary_;
  std::map<std::string, std::string> fixed_;
  std::map<std::uint64_t, std::string> bound_;
  std::set<std::string> in_use_;
};

class EstimandParser {
 public:
  EstimandParser(std::string_view text, const VarSet& vocabulary) : text_(text), vocabulary_(vocabulary) {}

  Estimand parse() {
    auto e = expr();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, 1, pos_ + 1); }

  void skip_space() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) ++pos_;
  }

  bool peek(char c) {
    skip_space();
    return pos_ < text_.size() && text_[pos_] == c;
  }

  void expect(char c) {
    if (!peek(c)) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  std::string name(bool allow_primes) {
    skip_space();
    const std::size_t start = pos_;
    auto word = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; };
    if (pos_ < text_.size() && (std::isalpha(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      while (pos_ < text_.size() && word(text_[pos_])) ++pos_;
      if (allow_primes)
        while (pos_ < text_.size() && text_[pos_] == '\'') ++pos_;
    }
    if (pos_ == start) fail("expected a name");
    return std::string(text_.substr(start, pos_ - start));
  }

  bool at_keyword(std::string_view kw) {
    skip_space();
    return text_.substr(pos_, kw.size()) == kw;
  }

  Estimand expr() {
    std::vector<Estimand> factors;
    while (true) {
      skip_space();
      if (pos_ == text_.size() || text_[pos_] == ')') break;
      factors.push_back(factor());
    }
    if (factors.empty()) fail("expected an expression");
    return product(factors);
  }

  Estimand factor() {
    if (at_keyword("1") && (pos_ + 1 == text_.size() || !std::isalnum(static_cast<unsigned char>(text_[pos_ + 1])))) {
      ++pos_;
      return Estimand(std::make_shared<const Node>(Node{Product{}}));
    }
    if (at_keyword("sum_{")) return summation();
    if (at_keyword("p(")) return conditional();
    if (peek('(')) {
      ++pos_;
      auto inner = expr();
      expect(')');
      if (!peek('/')) return inner;
      ++pos_;
      expect('(');
      auto den = expr();
      expect(')');
      return quotient(std::move(inner), std::move(den));
    }
    fail("expected 'p(', 'sum_{' or '('");
  }

  Estimand summation() {
    pos_ += 5;
    std::vector<Binder> binders;
    std::size_t pushed = 0;
    do {
      const std::size_t at = pos_;
      auto first = name(true);
      std::string variable, sym;
      if (peek('=')) {
        ++pos_;
        variable = first;
        sym = name(true);
        if (!vocabulary_.count(variable)) {
          pos_ = at;
          fail("unknown variable '" + variable + "'");
        }
      } else {
        sym = first;
        auto resolved = resolve_symbol(sym, vocabulary_);
        if (!resolved) {
          pos_ = at;
          fail("cannot infer the variable of summation index '" + sym + "'");
        }
        variable = *resolved;
      }
      if (vocabulary_.count(sym)) {
        pos_ = at;
        fail("summation index '" + sym + "' clashes with a variable name");
      }
      Binder b{fresh_binder_id(), variable};
      scope_.emplace_back(sym, b);
      ++pushed;
      binders.push_back(std::move(b));
      skip_space();
    } while (peek(',') && (++pos_, true));
    expect('}');
    auto body = expr();
    scope_.resize(scope_.size() - pushed);
    return make_marginal(std::move(binders), std::move(body));
  }

  Estimand conditional() {
    pos_ += 2;
    auto targets = args();
    std::vector<Term> given;
    if (peek('|')) {
      ++pos_;
      given = args();
    }
    expect(')');
    return make_conditional(std::move(targets), std::move(given));
  }

  std::vector<Term> args() {
    std::vector<Term> out;
    do {
      out.push_back(arg());
    } while (peek(',') && (++pos_, true));
    return out;
  }

  const Binder* lookup(const std::string& sym) const {
    for (auto it = scope_.rbegin(); it != scope_.rend(); ++it)
      if (it->first == sym) return &it->second;
    return nullptr;
  }

  Term fixed_term(const std::string& variable, const std::string& sym, std::size_t at) {
    auto [it, inserted] = fixed_.emplace(sym, variable);
    if (!inserted && it->second != variable) {
      pos_ = at;
      fail("symbol '" + sym + "' used for both '" + it->second + "' and '" + variable + "'");
    }
    return Term{variable, RefKind::Fixed, 0};
  }

  Term arg() {
    const std::size_t at = (skip_space(), pos_);
    auto first = name(true);
    if (peek('=')) {
      ++pos_;
      auto sym = name(true);
      if (!vocabulary_.count(first)) {
        pos_ = at;
        fail("unknown variable '" + first + "'");
      }
      if (const auto* b = lookup(sym)) {
        if (b->variable != first) {
          pos_ = at;
          fail("summation index '" + sym + "' belongs to '" + b->variable + "'");
        }
        return Term{first, RefKind::Bound, b->id};
      }
      return fixed_term(first, sym, at);
    }
    if (const auto* b = lookup(first)) return Term{b->variable, RefKind::Bound, b->id};
    if (vocabulary_.count(first)) return free_term(first);
    if (auto it = fixed_.find(first); it != fixed_.end()) return Term{it->second, RefKind::Fixed, 0};
    if (auto resolved = resolve_symbol(first, vocabulary_)) return fixed_term(*resolved, first, at);
    pos_ = at;
    fail("unbound symbol '" + first + "'");
  }

  std::string_view text_;
  const VarSet& vocabulary_;
  std::size_t pos_ = 0;
  std::vector<std::pair<std::string, Binder>> scope_;
  std::map<std::string, std::string> fixed_;
};

}  // namespace detail

/// Deterministic text form. `vocabulary` lists variables that must not be
/// mistaken for value symbols; variables mentioned in `e` are always included.
inline std::string print_estimand(const Estimand& e, const VarSet& vocabulary = {}) {
  return detail::Printer(e, vocabulary).print(e);
}

/// Inverse of print_estimand for the same vocabulary.
inline Estimand parse_estimand(std::string_view text, const VarSet& vocabulary) {
  return detail::EstimandParser(text, vocabulary).parse();
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

namespace detail {

class Evaluator {
 public:
  Evaluator(const JointTable& joint, const Assignment& fixed) : joint_(joint), fixed_(fixed) {}

  void set_free(const std::string& variable, int value) { free_[variable] = value; }

  double eval(const Estimand& e) {
    return std::visit(
        [&](const auto& n) -> double {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, Conditional>) {
            return conditional(n, e);
          } else if constexpr (std::is_same_v<T, Marginal>) {
            return marginal(n, 0);
          } else if constexpr (std::is_same_v<T, Product>) {
            double out = 1.0;
            for (const auto& f : n.factors) out *= eval(f);
            return out;
          } else {
            const double den = eval(n.denominator);
            if (den == 0.0)
              throw EvaluationError("zero denominator in " + print_estimand(e) + " at " + describe_state());
            return eval(n.numerator) / den;
          }
        },
        e.node().value);
  }

 private:
  double marginal(const Marginal& m, std::size_t k) {
    if (k == m.binders.size()) return eval(m.body);
    const auto& b = m.binders[k];
    const int card = cardinality(b.variable);
    double total = 0.0;
    for (int v = 0; v < card; ++v) {
      bound_[b.id] = v;
      total += marginal(m, k + 1);
    }
    bound_.erase(b.id);
    return total;
  }

  int cardinality(const std::string& variable) const {
    auto pos = joint_.position(variable);
    if (!pos) throw EvaluationError("variable '" + variable + "' is not in the joint table");
    return joint_.cardinalities()[*pos];
  }

  int value_of(const Term& t) const {
    switch (t.kind) {
      case RefKind::Free: {
        auto it = free_.find(t.variable);
        if (it == free_.end()) throw EvaluationError("unbound free variable '" + t.variable + "'");
        return it->second;
      }
      case RefKind::Fixed: {
        auto it = fixed_.find(t.variable);
        if (it == fixed_.end()) throw EvaluationError("no fixed value supplied for '" + t.variable + "'");
        return it->second;
      }
      case RefKind::Bound: {
        auto it = bound_.find(t.binder);
        if (it == bound_.end()) throw EvaluationError("summation index of '" + t.variable + "' used out of scope");
        return it->second;
      }
    }
    return 0;
  }

  /// Marginal of the joint over `positions` (ascending), cached.
  const std::vector<double>& marginal_table(const std::vector<std::size_t>& positions) {
    auto it = tables_.find(positions);
    if (it != tables_.end()) return it->second;
    VarSet keep;
    for (auto p : positions) keep.insert(joint_.variables()[p]);
    return tables_.emplace(positions, marginalize(joint_, keep).mass()).first->second;
  }

  double mass(const std::vector<std::pair<std::size_t, int>>& event) {
    std::vector<std::size_t> positions;
    for (const auto& [p, v] : event) positions.push_back(p);
    const auto& table = marginal_table(positions);
    std::size_t index = 0;
    for (const auto& [p, v] : event)
      index = index * static_cast<std::size_t>(joint_.cardinalities()[p]) + static_cast<std::size_t>(v);
    return table[index];
  }

  double conditional(const Conditional& c, const Estimand& node) {
    std::vector<std::pair<std::size_t, int>> all, given;
    auto add = [&](const Term& t, bool is_given) {
      auto pos = joint_.position(t.variable);
      if (!pos) throw EvaluationError("variable '" + t.variable + "' is not in the joint table");
      const int v = value_of(t);
      if (v < 0 || v >= joint_.cardinalities()[*pos])
        throw EvaluationError("value of '" + t.variable + "' out of range");
      all.emplace_back(*pos, v);
      if (is_given) given.emplace_back(*pos, v);
    };
    for (const auto& t : c.targets) add(t, false);
    for (const auto& t : c.given) add(t, true);
    std::sort(all.begin(), all.end());
    std::sort(given.begin(), given.end());
    for (std::size_t i = 1; i < all.size(); ++i)
      if (all[i].first == all[i - 1].first)
        throw EvaluationError("variable repeated in " + print_estimand(node));
    const double num = mass(all);
    if (given.empty()) return num;
    const double den = mass(given);
    if (den == 0.0)
      throw EvaluationError("conditioning event has zero probability in " + print_estimand(node) + " at " +
                            describe_state());
    return num / den;
  }

  std::string describe_state() const {
    std::string out = "{";
    bool first = true;
    auto item = [&](const std::string& k, int v) {
      out += (first ? "" : ", ") + k + "=" + std::to_string(v);
      first = false;
    };
    for (const auto& [k, v] : fixed_) item(k, v);
    for (const auto& [k, v] : free_) item(k, v);
    return out + "}";
  }

  const JointTable& joint_;
  const Assignment& fixed_;
  std::map<std::string, int> free_;
  std::map<std::uint64_t, int> bound_;
  std::map<std::vector<std::size_t>, std::vector<double>> tables_;
};

}  // namespace detail

/// Exact value of `e` for every assignment of `outcomes` (mixed radix over
/// `outcomes`, last fastest). `fixed` supplies treatment values.
inline std::vector<double> evaluate(const Estimand& e, const JointTable& joint, const Assignment& fixed,
                                    const std::vector<std::string>& outcomes) {
  for (const auto& v : free_variables(e))
    if (std::find(outcomes.begin(), outcomes.end(), v) == outcomes.end())
      throw EvaluationError("unbound symbol: free variable '" + v + "' is not an outcome");
  std::vector<int> cards;
  for (const auto& o : outcomes) {
    auto pos = joint.position(o);
    if (!pos) throw EvaluationError("outcome '" + o + "' is not in the joint table");
    cards.push_back(joint.cardinalities()[*pos]);
  }
  std::size_t cells = 1;
  for (int c : cards) cells *= static_cast<std::size_t>(c);
  detail::Evaluator ev(joint, fixed);
  std::vector<double> out(cells);
  for (std::size_t cell = 0; cell < cells; ++cell) {
    const auto values = decode_index(cell, cards);
    for (std::size_t i = 0; i < outcomes.size(); ++i) ev.set_free(outcomes[i], values[i]);
    out[cell] = ev.eval(e);
  }
  return out;
}

/// Every assignment of `variables` with the given cardinalities, last fastest.
inline std::vector<Assignment> enumerate_assignments(const std::vector<std::string>& variables,
                                                     const std::vector<int>& cards) {
  std::size_t cells = 1;
  for (int c : cards) cells *= static_cast<std::size_t>(c);
  std::vector<Assignment> out;
  out.reserve(cells);
  for (std::size_t cell = 0; cell < cells; ++cell) {
    const auto values = decode_index(cell, cards);
    Assignment a;
    for (std::size_t i = 0; i < variables.size(); ++i) a[variables[i]] = values[i];
    out.push_back(std::move(a));
  }
  return out;
}

/// Produces the joint table for one trial from a trial seed.
using JointSampler = std::function<JointTable(std::uint64_t)>;

/// Flat-Dirichlet draw over all cells of the joint, mixed with the uniform
/// table so every cell keeps at least `floor` mass.
inline JointTable random_positive_joint(const std::vector<std::string>& variables, const std::vector<int>& cards,
                                        std::uint64_t seed, double floor = 1e-3) {
  std::size_t cells = 1;
  for (int c : cards) cells *= static_cast<std::size_t>(c);
  SplitMix64 rng = substream(seed, "joint");
  std::vector<double> mass(cells);
  double total = 0.0;
  for (auto& m : mass) total += (m = rng.exponential());
  const double scale = 1.0 - floor * static_cast<double>(cells);
  for (auto& m : mass) m = floor + scale * m / total;
  return JointTable(variables, cards, std::move(mass));
}

inline JointSampler unrestricted_sampler(std::vector<std::string> variables, std::vector<int> cards) {
  return [variables = std::move(variables), cards = std::move(cards)](std::uint64_t seed) {
    return random_positive_joint(variables, cards, seed, 1e-4);
  };
}

/// True iff `a` and `b` agree within 1e-9 sup-norm for every assignment of
/// `fixed` on `trials` sampled joints.
inline bool estimands_equal_numerically(const Estimand& a, const Estimand& b, const JointSampler& sampler,
                                        const std::vector<std::string>& fixed,
                                        const std::vector<std::string>& outcomes, int trials, std::uint64_t seed) {
  SplitMix64 seeds(seed);
  for (int t = 0; t < trials; ++t) {
    const JointTable joint = sampler(seeds.next());
    std::vector<int> cards;
    for (const auto& f : fixed) cards.push_back(joint.cardinality(f));
    for (const auto& values : enumerate_assignments(fixed, cards)) {
      if (sup_distance(evaluate(a, joint, values, outcomes), evaluate(b, joint, values, outcomes)) >
          kDistributionTolerance)
        return false;
    }
  }
  return true;
}

}  // namespace causalid
