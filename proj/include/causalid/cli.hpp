#pragma once

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "causalid/error.hpp"
#include "causalid/estimand.hpp"
#include "causalid/graph.hpp"
#include "causalid/graph_io.hpp"
#include "causalid/identify.hpp"
#include "causalid/oracle.hpp"

namespace causalid {

/// Process exit codes.
enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitNegative = 3 };

struct CliConfig {
  std::string subcommand;
  std::string graph_path;
  std::string scm_path;
  std::vector<std::string> treatments;  // VAR or VAR=value
  std::vector<std::string> outcomes;
  std::vector<std::string> x, y, z;
  std::uint64_t seed = 0;
  int trials = 100;
  double tolerance = 1e-9;
  int cardinality = 2;
  std::string format = "text";
};

namespace cli_detail {

using nlohmann::json;

struct Treatment {
  std::string variable;
  std::optional<int> value;
};

inline std::vector<Treatment> parse_treatments(const std::vector<std::string>& raw) {
  std::vector<Treatment> out;
  for (const auto& item : raw) {
    const auto eq = item.find('=');
    Treatment t{item.substr(0, eq), std::nullopt};
    if (eq != std::string::npos) {
      const std::string rhs = item.substr(eq + 1);
      if (rhs.empty()) throw QueryError("empty value in treatment '" + item + "'");
      if (std::isdigit(static_cast<unsigned char>(rhs[0]))) {
        std::size_t used = 0;
        const int v = std::stoi(rhs, &used);
        if (used != rhs.size()) throw QueryError("bad treatment value '" + rhs + "'");
        t.value = v;
      }
    }
    out.push_back(std::move(t));
  }
  return out;
}

inline std::string braces(const VarSet& s) {
  std::string out = "{";
  for (const auto& v : s) out += (out.size() > 1 ? ", " : "") + v;
  return out + "}";
}

inline std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

inline Query make_query(const std::vector<Treatment>& treatments, const std::vector<std::string>& outcomes) {
  Query q;
  for (const auto& t : treatments) q.treatments.push_back(t.variable);
  q.outcomes = outcomes;
  return q;
}

inline int cmd_identify(const CliConfig& c, std::ostream& out, std::ostream& err) {
  const Admg g = as_admg(read_graph_file(c.graph_path));
  const Query q = make_query(parse_treatments(c.treatments), c.outcomes);
  const IdentifyResult r = id_algorithm(g, q);
  const VarSet vocabulary = all_vertices(g);

  std::vector<std::string> instruments;
  if (!r.identifiable() && q.treatments.size() == 1 && q.outcomes.size() == 1)
    instruments = instrument_candidates(g, q.treatments[0], q.outcomes[0]);
  std::string verdict = "not identifiable";
  if (!instruments.empty()) {
    verdict += "; graph contains instrument candidate";
    for (const auto& z : instruments) verdict += " " + z;
  }

  if (c.format == "json") {
    json doc;
    doc["identifiable"] = r.identifiable();
    if (r.identifiable()) doc["estimand"] = print_estimand(*r.estimand, vocabulary);
    else {
      doc["hedge"] = {{"inner", std::vector<std::string>(r.hedge->inner.begin(), r.hedge->inner.end())},
                      {"outer", std::vector<std::string>(r.hedge->outer.begin(), r.hedge->outer.end())}};
      if (!instruments.empty()) err << verdict << "\n";
    }
    out << doc.dump() << "\n";
  } else if (r.identifiable()) {
    out << "identifiable\n" << "estimand: " << print_estimand(*r.estimand, vocabulary) << "\n";
  } else {
    out << verdict << "\n"
        << "hedge: inner=" << braces(r.hedge->inner) << " outer=" << braces(r.hedge->outer) << "\n";
  }
  return r.identifiable() ? kExitOk : kExitNegative;
}

/// On a latent DAG the query runs on the full DAG, so latents may be named;
/// for observed sets this agrees with m-separation in the projection.
inline int cmd_dsep(const CliConfig& c, std::ostream& out, std::ostream&) {
  const ParsedGraph parsed = read_graph_file(c.graph_path);
  const Admg g = std::holds_alternative<LatentDag>(parsed) ? std::get<LatentDag>(parsed).graph() : std::get<Admg>(parsed);
  auto set = [](const std::vector<std::string>& v) { return VarSet(v.begin(), v.end()); };
  const bool separated = m_separated(g, set(c.x), set(c.y), set(c.z));
  if (c.format == "json") out << json{{"separated", separated}}.dump() << "\n";
  else out << (separated ? "true" : "false") << "\n";
  return separated ? kExitOk : kExitNegative;
}

inline int cmd_verify(const CliConfig& c, std::ostream& out, std::ostream& err) {
  std::optional<DiscreteScm> fixed_model;
  LatentDag dag;
  if (!c.scm_path.empty()) {
    fixed_model = read_scm_file(c.scm_path);
    dag = fixed_model->dag();
  } else {
    if (c.graph_path.empty()) throw QueryError("verify needs --graph or --scm");
    const ParsedGraph parsed = read_graph_file(c.graph_path);
    if (const auto* d = std::get_if<LatentDag>(&parsed)) dag = *d;
    else dag = canonical_dag(std::get<Admg>(parsed));
  }
  const Admg g = latent_project(dag);
  const auto treatments = parse_treatments(c.treatments);
  const Query q = make_query(treatments, c.outcomes);
  const IdentifyResult r = id_algorithm(g, q);
  if (!r.identifiable()) {
    err << "not identifiable: hedge inner=" << braces(r.hedge->inner) << " outer=" << braces(r.hedge->outer) << "\n";
    if (c.format == "json") out << json{{"identifiable", false}}.dump() << "\n";
    else out << "not identifiable\n";
    return kExitNegative;
  }
  const std::string text = print_estimand(*r.estimand, all_vertices(g));

  // Numeric treatment values restrict verification to that assignment.
  std::optional<Assignment> requested;
  if (!treatments.empty() && std::all_of(treatments.begin(), treatments.end(), [](const Treatment& t) { return t.value.has_value(); })) {
    requested.emplace();
    for (const auto& t : treatments) (*requested)[t.variable] = *t.value;
  }

  std::map<std::string, int> cards;
  for (const auto& name : dag.graph().vertices()) cards[name] = c.cardinality;
  const int n_trials = fixed_model ? 1 : c.trials;
  std::vector<double> errors;
  std::optional<std::vector<double>> distribution;
  std::vector<std::string> outcome_order;
  const VarSet outcome_set(q.outcomes.begin(), q.outcomes.end());
  auto trial_error = [&](const DiscreteScm& m, bool record) {
    if (!requested) return verify(*r.estimand, m, q, c.tolerance).max_abs_error;
    const JointTable truth = marginalize(interventional_joint(m, *requested), outcome_set);
    const auto estimate = evaluate(*r.estimand, observational_joint(m), *requested, truth.variables());
    if (record) {
      distribution = estimate;
      outcome_order = truth.variables();
    }
    return sup_distance(estimate, truth.mass());
  };
  for (int t = 0; t < n_trials; ++t) {
    const std::uint64_t trial_seed = c.seed + static_cast<std::uint64_t>(t);
    const DiscreteScm m = fixed_model ? *fixed_model : random_scm(dag, trial_seed, cards);
    try {
      errors.push_back(trial_error(m, t == 0));
    } catch (const EvaluationError& e) {
      if (fixed_model) throw;
      throw EvaluationError(std::string(e.what()) + " (SCM seed " + std::to_string(trial_seed) + ")");
    }
  }
  double max_error = 0.0;
  for (double e : errors) max_error = std::max(max_error, e);
  const bool pass = max_error <= c.tolerance;

  if (c.format == "json") {
    json doc{{"identifiable", true}, {"estimand", text}, {"trials", n_trials}, {"seed", c.seed},
             {"tolerance", c.tolerance}, {"max_abs_error", max_error}, {"pass", pass}, {"errors", errors}};
    if (distribution) doc["distribution"] = {{"outcomes", outcome_order}, {"mass", *distribution}};
    out << doc.dump() << "\n";
  } else {
    out << "estimand: " << text << "\n"
        << "trials: " << n_trials << "\n"
        << "max_abs_error: " << format_double(max_error) << "\n";
    if (distribution) {
      out << "distribution:";
      for (double x : *distribution) out << " " << format_double(x);
      out << "\n";
    }
    out << "result: " << (pass ? "pass" : "fail") << "\n";
  }
  return pass ? kExitOk : kExitNegative;
}

inline int cmd_districts(const CliConfig& c, std::ostream& out, std::ostream&) {
  const auto blocks = districts(as_admg(read_graph_file(c.graph_path)));
  if (c.format == "json") {
    json doc = json::array();
    for (const auto& b : blocks) doc.push_back(std::vector<std::string>(b.begin(), b.end()));
    out << doc.dump() << "\n";
  } else {
    for (const auto& b : blocks) out << braces(b) << "\n";
  }
  return kExitOk;
}

inline int cmd_print_canonical(const CliConfig& c, std::ostream& out, std::ostream&) {
  const std::string text = print_graph(canonical_dag(as_admg(read_graph_file(c.graph_path))));
  if (c.format == "json") out << json{{"graph", text}}.dump() << "\n";
  else out << text;
  return kExitOk;
}

}  // namespace cli_detail

/// Entry point shared by the executable and the tests.
inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Causal identification engine for acyclic directed mixed graphs"};
  app.require_subcommand(1);
  CliConfig c;

  auto add_format = [&](CLI::App* sub) {
    sub->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"text", "json"}))->capture_default_str();
  };
  auto add_graph = [&](CLI::App* sub, bool required) {
    auto* opt = sub->add_option("--graph", c.graph_path, "Graph file in the line-oriented DSL");
    if (required) opt->required();
  };
  auto add_query = [&](CLI::App* sub) {
    sub->add_option("--treatment", c.treatments, "Treatments, comma-separated; VAR or VAR=value")->delimiter(',');
    sub->add_option("--outcome", c.outcomes, "Outcomes, comma-separated")->delimiter(',')->required();
  };

  auto* identify = app.add_subcommand("identify", "Decide identifiability of p(Y(a)) and print the estimand");
  add_graph(identify, true);
  add_query(identify);
  add_format(identify);

  auto* dsep = app.add_subcommand("dsep", "Test m-separation of X and Y given Z");
  add_graph(dsep, true);
  dsep->add_option("--x", c.x, "First set, comma-separated")->delimiter(',')->required();
  dsep->add_option("--y", c.y, "Second set, comma-separated")->delimiter(',')->required();
  dsep->add_option("--z", c.z, "Conditioning set, comma-separated")->delimiter(',');
  add_format(dsep);

  auto* verify_cmd = app.add_subcommand("verify", "Check the identified estimand against seeded random SCMs");
  add_graph(verify_cmd, false);
  verify_cmd->add_option("--scm", c.scm_path, "Verify against one SCM fixture file instead of random models");
  add_query(verify_cmd);
  verify_cmd->add_option("--trials", c.trials, "Number of seeded SCMs")->check(CLI::PositiveNumber)->capture_default_str();
  verify_cmd->add_option("--seed", c.seed, "Seed of the first trial; trial i uses seed + i")->capture_default_str();
  verify_cmd->add_option("--tol", c.tolerance, "Sup-norm tolerance")->check(CLI::PositiveNumber)->capture_default_str();
  verify_cmd->add_option("--card", c.cardinality, "Cardinality of every variable")->check(CLI::Range(2, 16))->capture_default_str();
  add_format(verify_cmd);

  auto* districts_cmd = app.add_subcommand("districts", "List the districts (c-components)");
  add_graph(districts_cmd, true);
  add_format(districts_cmd);

  auto* canonical = app.add_subcommand("print-canonical", "Print the canonical latent DAG");
  add_graph(canonical, true);
  add_format(canonical);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (identify->parsed()) return cli_detail::cmd_identify(c, out, err);
    if (dsep->parsed()) return cli_detail::cmd_dsep(c, out, err);
    if (verify_cmd->parsed()) return cli_detail::cmd_verify(c, out, err);
    if (districts_cmd->parsed()) return cli_detail::cmd_districts(c, out, err);
    if (canonical->parsed()) return cli_detail::cmd_print_canonical(c, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace causalid
