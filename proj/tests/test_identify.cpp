#include <gtest/gtest.h>

#include <numeric>

#include "test_support.hpp"

using namespace causalid;
using namespace causalid::testing;

namespace {

Query query(std::vector<std::string> treatments, std::vector<std::string> outcomes) {
  return Query{std::move(treatments), std::move(outcomes)};
}

Estimand identified(const Admg& g, const Query& q) {
  const auto r = id_algorithm(g, q);
  if (!r.identifiable()) throw std::runtime_error("expected an identifiable query");
  return *r.estimand;
}

/// Random query on `g`: one or two treatments, one or two outcomes.
Query random_query(SplitMix64& rng, const Admg& g) {
  std::vector<std::string> names = g.vertices();
  for (std::size_t i = names.size(); i > 1; --i) std::swap(names[i - 1], names[rng.next() % i]);
  const std::size_t n_out = std::min<std::size_t>(names.size(), 1 + rng.next() % 2);
  const std::size_t n_treat = std::min<std::size_t>(names.size() - n_out, 1 + rng.next() % 2);
  Query q;
  q.outcomes.assign(names.begin(), names.begin() + static_cast<std::ptrdiff_t>(n_out));
  q.treatments.assign(names.begin() + static_cast<std::ptrdiff_t>(n_out),
                      names.begin() + static_cast<std::ptrdiff_t>(n_out + n_treat));
  return q;
}

}  // namespace

// ---------------------------------------------------------------------------
// id_algorithm
// ---------------------------------------------------------------------------

TEST(IdAlgorithm, UnconfoundedEdge) {
  const Admg g = admg_from("A -> Y");
  const Estimand e = identified(g, query({"A"}, {"Y"}));
  EXPECT_TRUE(structurally_equal(e, fix({"A"}, prob({"Y"}, {"A"}))));
  EXPECT_EQ(print_estimand(e), "p(Y | a)");
}

TEST(IdAlgorithm, ObservedConfounderMatchesAdjustment) {
  const Admg g = observed_confounder();
  const Estimand e = identified(g, query({"A"}, {"Y"}));
  EXPECT_TRUE(estimands_equal_numerically(e, adjustment_formula(), model_sampler(g), {"A"}, {"Y"}, 100, 1));
  for (std::uint64_t seed = 0; seed < 10; ++seed)
    EXPECT_TRUE(verify(e, random_scm(canonical_dag(g), seed), query({"A"}, {"Y"}), 1e-9).pass);
}

TEST(IdAlgorithm, FrontDoorGraphMatchesFrontDoorFormula) {
  const Admg g = front_door_admg();
  const Estimand e = identified(g, query({"A"}, {"Y"}));
  EXPECT_TRUE(estimands_equal_numerically(e, frontdoor_formula(), model_sampler(g), {"A"}, {"Y"}, 100, 2));
  for (std::uint64_t seed = 0; seed < 10; ++seed)
    EXPECT_TRUE(verify(e, random_scm(front_door_dag(), seed), query({"A"}, {"Y"}), 1e-9).pass);
}

TEST(IdAlgorithm, LongitudinalGraphMatchesIdentity) {
  const Admg g = longitudinal();
  const Estimand e = identified(g, query({"B", "D"}, {"Y"}));
  EXPECT_EQ(fixed_variables(e), (VarSet{"B", "D"}));
  EXPECT_EQ(free_variables(e), VarSet{"Y"});
  EXPECT_TRUE(estimands_equal_numerically(e, longitudinal_formula(), model_sampler(g), {"B", "D"}, {"Y"}, 100, 3));
  // Both expressions are the same functional, so they agree off the model too.
  EXPECT_TRUE(estimands_equal_numerically(e, longitudinal_formula(), unrestricted_sampler(g.vertices(), {2, 2, 2, 2, 2}),
                                          {"B", "D"}, {"Y"}, 20, 4));
}

TEST(IdAlgorithm, BowYieldsHedge) {
  const auto r = id_algorithm(bow(), query({"A"}, {"Y"}));
  ASSERT_FALSE(r.identifiable());
  ASSERT_TRUE(r.hedge);
  EXPECT_EQ(*r.hedge, (Hedge{{"Y"}, {"A", "Y"}}));
}

TEST(IdAlgorithm, InstrumentGraphIsNotIdentified) {
  const Admg g = latent_project(instrument_dag());
  const auto r = id_algorithm(g, query({"A"}, {"Y"}));
  EXPECT_FALSE(r.identifiable());
  EXPECT_EQ(instrument_candidates(g, "A", "Y"), (std::vector<std::string>{"Z"}));
  EXPECT_TRUE(instrument_candidates(observed_confounder(), "A", "Y").empty());
}

TEST(IdAlgorithm, QueryValidation) {
  EXPECT_THROW(id_algorithm(observed_confounder(), query({"A"}, {})), QueryError);
  EXPECT_THROW(id_algorithm(observed_confounder(), query({"Q"}, {"Y"})), QueryError);
  EXPECT_THROW(id_algorithm(observed_confounder(), query({"A"}, {"A"})), QueryError);
  EXPECT_THROW(id_algorithm(observed_confounder(), query({"A", "A"}, {"Y"})), QueryError);
  // An empty treatment set is the observational marginal.
  EXPECT_TRUE(structurally_equal(identified(observed_confounder(), query({}, {"Y"})), prob({"Y"})));
}

TEST(IdAlgorithm, Deterministic) {
  const std::string text = print_graph(longitudinal());
  const auto first = print_estimand(identified(admg_from(text), query({"B", "D"}, {"Y"})));
  for (int i = 0; i < 5; ++i)
    EXPECT_EQ(print_estimand(identified(admg_from(text), query({"B", "D"}, {"Y"}))), first);
}

TEST(IdAlgorithm, IrrelevantCauseIsAveragedOut) {
  // V3 reaches the outcomes only through the treatment, so the recursion
  // intervenes on it as well; its value must not stay free in the result.
  const Admg g = admg_from("V3 -> V0\nV0 -> V1\nV1 <-> V2");
  const Query q{{"V0"}, {"V1", "V2"}};
  const Estimand e = identified(g, q);
  EXPECT_EQ(free_variables(e), (VarSet{"V1", "V2"}));
  for (std::uint64_t seed = 0; seed < 10; ++seed) EXPECT_TRUE(verify(e, random_scm(canonical_dag(g), seed), q, 1e-9).pass);
}

TEST(IdAlgorithm, SoundOnRandomGraphs) {
  SplitMix64 rng(77);
  int identifiable = 0, hedges = 0;
  for (int trial = 0; trial < 250; ++trial) {
    const Admg g = random_admg(rng, 5);
    if (g.size() < 2) continue;
    const Query q = random_query(rng, g);
    const auto r = id_algorithm(g, q);
    if (!r.identifiable()) {
      ++hedges;
      ASSERT_TRUE(r.hedge);
      const auto& h = *r.hedge;
      EXPECT_TRUE(std::includes(h.outer.begin(), h.outer.end(), h.inner.begin(), h.inner.end()));
      EXPECT_LT(h.inner.size(), h.outer.size());
      EXPECT_FALSE(h.inner.empty());
      continue;
    }
    ++identifiable;
    const LatentDag dag = canonical_dag(g);
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      const DiscreteScm m = random_scm(dag, rng.next());
      const auto report = verify(*r.estimand, m, q, 1e-9);
      ASSERT_TRUE(report.pass) << print_graph(g) << print_estimand(*r.estimand) << " error " << report.max_abs_error;
      // Output is a distribution over the outcomes.
      const JointTable obs = observational_joint(m);
      std::vector<int> cards(q.treatments.size(), 2);
      for (const auto& fixed : enumerate_assignments(q.treatments, cards)) {
        const auto out = evaluate(*r.estimand, obs, fixed, q.outcomes);
        EXPECT_NEAR(std::accumulate(out.begin(), out.end(), 0.0), 1.0, 1e-9);
      }
    }
  }
  EXPECT_GT(identifiable, 50);
  EXPECT_GT(hedges, 10);
}

TEST(IdAlgorithm, SoundWithLargerCardinalities) {
  const Admg g = longitudinal();
  const LatentDag dag = canonical_dag(g);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const DiscreteScm m = random_scm(dag, seed, {{"B", 3}, {"C", 3}, {"Y", 3}, {"U_AD", 3}});
    EXPECT_TRUE(verify(identified(g, query({"B", "D"}, {"Y"})), m, query({"B", "D"}, {"Y"}), 1e-9).pass);
    EXPECT_TRUE(verify(identified(g, query({"B"}, {"Y", "D"})), m, query({"B"}, {"Y", "D"}), 1e-9).pass);
  }
}

TEST(IdAlgorithm, IsolatedVertexChangesNothing) {
  SplitMix64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const Admg g = random_admg(rng, 4);
    if (g.size() < 2) continue;
    const Query q = random_query(rng, g);
    Admg h = g;
    h.add_vertex("Iso");
    const auto rg = id_algorithm(g, q);
    const auto rh = id_algorithm(h, q);
    ASSERT_EQ(rg.identifiable(), rh.identifiable()) << print_graph(g);
    if (!rg.identifiable()) continue;
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      const JointTable wide = observational_joint(random_scm(canonical_dag(h), rng.next()));
      const JointTable narrow = marginalize(wide, all_vertices(g));
      std::vector<int> cards(q.treatments.size(), 2);
      for (const auto& fixed : enumerate_assignments(q.treatments, cards))
        EXPECT_LE(sup_distance(evaluate(*rg.estimand, narrow, fixed, q.outcomes),
                               evaluate(*rh.estimand, wide, fixed, q.outcomes)),
                  1e-9);
    }
  }
}

// ---------------------------------------------------------------------------
// backdoor_adjustment
// ---------------------------------------------------------------------------

TEST(Backdoor, ObservedConfounder) {
  const auto adj = backdoor_adjustment(observed_confounder(), query({"A"}, {"Y"}));
  ASSERT_TRUE(adj);
  EXPECT_EQ(adj->set, VarSet{"C"});
  EXPECT_TRUE(structurally_equal(adj->estimand, adjustment_formula()));
}

TEST(Backdoor, BowHasNoAdjustmentSet) { EXPECT_FALSE(backdoor_adjustment(bow(), query({"A"}, {"Y"}))); }

TEST(Backdoor, UnconfoundedEdgeNeedsNothing) {
  const auto adj = backdoor_adjustment(admg_from("A -> Y"), query({"A"}, {"Y"}));
  ASSERT_TRUE(adj);
  EXPECT_TRUE(adj->set.empty());
  EXPECT_EQ(print_estimand(adj->estimand), "p(Y | a)");
}

TEST(Backdoor, SmallestSetLexicographicTieBreak) {
  // B and C each block A <- B <- C -> Y on their own; B comes first.
  const auto adj = backdoor_adjustment(admg_from("C -> B\nB -> A\nC -> Y\nA -> Y"), query({"A"}, {"Y"}));
  ASSERT_TRUE(adj);
  EXPECT_EQ(adj->set, VarSet{"B"});
  // Descendants of the treatment are never used.
  EXPECT_FALSE(backdoor_adjustment(admg_from("A -> M\nM -> Y\nA <-> M\nM <-> Y"), query({"A"}, {"Y"})));
}

TEST(Backdoor, Errors) {
  EXPECT_THROW(backdoor_adjustment(longitudinal(), query({"B", "D"}, {"Y"})), QueryError);
  EXPECT_THROW(backdoor_adjustment(observed_confounder(), query({"Q"}, {"Y"})), QueryError);
}

// ---------------------------------------------------------------------------
// frontdoor
// ---------------------------------------------------------------------------

TEST(Frontdoor, ProjectedMediatorGraph) {
  const auto fd = frontdoor(front_door_admg(), query({"A"}, {"Y"}));
  ASSERT_TRUE(fd);
  EXPECT_EQ(fd->mediators, VarSet{"W"});
  EXPECT_TRUE(structurally_equal(fd->estimand, frontdoor_formula()));
  EXPECT_EQ(print_estimand(fd->estimand), "sum_{w} p(w | a) sum_{a'} p(Y | w, a') p(a')");
}

TEST(Frontdoor, DirectEdgeDefeatsInterception) { EXPECT_FALSE(frontdoor(observed_confounder(), query({"A"}, {"Y"}))); }

TEST(Frontdoor, SkyrNarrative) {
  const Admg g = latent_project(std::get<LatentDag>(read_graph_file(fixture("skyr.g"))));
  const auto fd = frontdoor(g, query({"Skyr"}, {"Cancer"}));
  ASSERT_TRUE(fd);
  EXPECT_EQ(fd->mediators, VarSet{"Flora"});
  EXPECT_EQ(print_estimand(fd->estimand), "sum_{flora} p(flora | skyr) sum_{skyr'} p(Cancer | flora, skyr') p(skyr')");
  const Estimand id = identified(g, query({"Skyr"}, {"Cancer"}));
  EXPECT_TRUE(estimands_equal_numerically(fd->estimand, id, model_sampler(g), {"Skyr"}, {"Cancer"}, 100, 8));
}

TEST(Frontdoor, Errors) {
  EXPECT_THROW(frontdoor(longitudinal(), query({"B", "D"}, {"Y"})), QueryError);
  EXPECT_THROW(frontdoor(longitudinal(), query({"B"}, {"D", "Y"})), QueryError);
}

// ---------------------------------------------------------------------------
// Agreement between the special-case finders and the general algorithm
// ---------------------------------------------------------------------------

TEST(Agreement, SpecialCasesImplyIdentifiability) {
  SplitMix64 rng(99);
  int backdoor_hits = 0, frontdoor_hits = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const Admg g = random_admg(rng, 5);
    if (g.size() < 2) continue;
    const auto& names = g.vertices();
    const std::string a = names[rng.next() % names.size()];
    std::string y = a;
    while (y == a) y = names[rng.next() % names.size()];
    const Query q = query({a}, {y});
    const auto id = id_algorithm(g, q);
    const auto sampler = model_sampler(g);
    if (auto adj = backdoor_adjustment(g, q)) {
      ++backdoor_hits;
      ASSERT_TRUE(id.identifiable()) << print_graph(g);
      EXPECT_TRUE(estimands_equal_numerically(adj->estimand, *id.estimand, sampler, {a}, {y}, 10, rng.next()))
          << print_graph(g);
    }
    if (auto fd = frontdoor(g, q)) {
      ++frontdoor_hits;
      ASSERT_TRUE(id.identifiable()) << print_graph(g);
      EXPECT_TRUE(estimands_equal_numerically(fd->estimand, *id.estimand, sampler, {a}, {y}, 10, rng.next()))
          << print_graph(g);
    }
  }
  EXPECT_GT(backdoor_hits, 50);
  EXPECT_GT(frontdoor_hits, 5);
}

TEST(Agreement, FixtureGraphsOverOneHundredTrials) {
  const auto adj = backdoor_adjustment(observed_confounder(), query({"A"}, {"Y"}));
  ASSERT_TRUE(adj);
  EXPECT_TRUE(estimands_equal_numerically(adj->estimand, identified(observed_confounder(), query({"A"}, {"Y"})),
                                          model_sampler(observed_confounder()), {"A"}, {"Y"}, 100, 10));
  const auto fd = frontdoor(front_door_admg(), query({"A"}, {"Y"}));
  ASSERT_TRUE(fd);
  EXPECT_TRUE(estimands_equal_numerically(fd->estimand, identified(front_door_admg(), query({"A"}, {"Y"})),
                                          model_sampler(front_door_admg()), {"A"}, {"Y"}, 100, 11));
}
