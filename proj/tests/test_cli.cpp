#include <gtest/gtest.h>

#include <sstream>

#include <json.hpp>

#include "causalid/cli.hpp"
#include "test_support.hpp"

using namespace causalid;
using namespace causalid::testing;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "causalid");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

}  // namespace

// ---------------------------------------------------------------------------
// identify
// ---------------------------------------------------------------------------

TEST(CliIdentify, ObservedConfounder) {
  const auto r = run({"identify", "--graph", fixture("observed_confounder.g"), "--treatment", "A", "--outcome", "Y"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out.rfind("identifiable\nestimand: ", 0), 0u) << r.out;
  const std::string text = r.out.substr(r.out.find(": ") + 2, r.out.size() - r.out.find(": ") - 3);
  const Estimand e = parse_estimand(text, all_vertices(observed_confounder()));
  EXPECT_TRUE(estimands_equal_numerically(e, adjustment_formula(), model_sampler(observed_confounder()), {"A"}, {"Y"}, 20, 1));
}

TEST(CliIdentify, BowIsNegative) {
  const auto r = run({"identify", "--graph", fixture("bow.g"), "--treatment", "A", "--outcome", "Y"});
  EXPECT_EQ(r.code, 3);
  EXPECT_EQ(r.out, "not identifiable\nhedge: inner={Y} outer={A, Y}\n");
}

TEST(CliIdentify, InstrumentDiagnostic) {
  const auto r = run({"identify", "--graph", fixture("instrument.g"), "--treatment", "A", "--outcome", "Y"});
  EXPECT_EQ(r.code, 3);
  EXPECT_EQ(r.out.rfind("not identifiable; graph contains instrument candidate Z\n", 0), 0u) << r.out;
}

TEST(CliIdentify, LongitudinalJsonRoundTrip) {
  const auto r = run({"identify", "--graph", fixture("longitudinal.g"), "--treatment", "B,D", "--outcome", "Y", "--format",
                      "json"});
  EXPECT_EQ(r.code, 0);
  const auto doc = nlohmann::json::parse(r.out);
  EXPECT_TRUE(doc.at("identifiable").get<bool>());
  EXPECT_FALSE(doc.contains("hedge"));
  const Estimand parsed = parse_estimand(doc.at("estimand").get<std::string>(), all_vertices(longitudinal()));
  const Estimand direct = *id_algorithm(longitudinal(), Query{{"B", "D"}, {"Y"}}).estimand;
  EXPECT_TRUE(structurally_equal(parsed, direct));
  EXPECT_TRUE(estimands_equal_numerically(parsed, longitudinal_formula(), model_sampler(longitudinal()), {"B", "D"}, {"Y"},
                                          20, 2));
}

TEST(CliIdentify, HedgeJson) {
  const auto r = run({"identify", "--graph", fixture("bow.g"), "--treatment", "A", "--outcome", "Y", "--format", "json"});
  EXPECT_EQ(r.code, 3);
  EXPECT_EQ(r.out, "{\"hedge\":{\"inner\":[\"Y\"],\"outer\":[\"A\",\"Y\"]},\"identifiable\":false}\n");
}

TEST(CliIdentify, UsageAndParseErrors) {
  EXPECT_EQ(run({"identify", "--graph", fixture("observed_confounder.g"), "--treatment", "Q", "--outcome", "Y"}).code, 1);
  EXPECT_EQ(run({"identify", "--graph", fixture("observed_confounder.g"), "--treatment", "A"}).code, 1);
  EXPECT_EQ(run({"identify", "--graph", fixture("missing.g"), "--outcome", "Y"}).code, 1);
  EXPECT_EQ(run({}).code, 1);
  EXPECT_EQ(run({"frobnicate"}).code, 1);
  EXPECT_EQ(run({"--help"}).code, 0);

  const std::string bad = ::testing::TempDir() + "bad_graph.g";
  std::ofstream(bad) << "A -> B\nB => C\n";
  const auto r = run({"identify", "--graph", bad, "--outcome", "B"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("line 2, column 3"), std::string::npos) << r.err;
}

TEST(CliIdentify, HelpStatesDefaults) {
  const auto r = run({"verify", "--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("100"), std::string::npos);
  EXPECT_NE(r.out.find("1e-09"), std::string::npos);
}

// ---------------------------------------------------------------------------
// dsep
// ---------------------------------------------------------------------------

TEST(CliDsep, Examples) {
  auto r = run({"dsep", "--graph", fixture("chain.g"), "--x", "A", "--y", "C", "--z", "B"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "true\n");
  r = run({"dsep", "--graph", fixture("collider.g"), "--x", "A", "--y", "C", "--z", "B"});
  EXPECT_EQ(r.code, 3);
  EXPECT_EQ(r.out, "false\n");
  r = run({"dsep", "--graph", fixture("instrument.g"), "--x", "Z", "--y", "C"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "true\n");
  r = run({"dsep", "--graph", fixture("chain.g"), "--x", "A", "--y", "C", "--format", "json"});
  EXPECT_EQ(r.code, 3);
  EXPECT_EQ(r.out, "{\"separated\":false}\n");
}

TEST(CliDsep, OverlapIsUsageError) {
  const auto r = run({"dsep", "--graph", fixture("chain.g"), "--x", "A,B", "--y", "B"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("error: "), std::string::npos);
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

TEST(CliVerify, FrontDoorPasses) {
  const auto r = run({"verify", "--graph", fixture("front_door.g"), "--treatment", "A", "--outcome", "Y", "--trials", "100",
                      "--seed", "7", "--tol", "1e-9"});
  EXPECT_EQ(r.code, 0) << r.out << r.err;
  EXPECT_NE(r.out.find("trials: 100\n"), std::string::npos);
  EXPECT_NE(r.out.find("result: pass\n"), std::string::npos);
}

TEST(CliVerify, LongitudinalPasses) {
  const auto r = run({"verify", "--graph", fixture("longitudinal.g"), "--treatment", "B,D", "--outcome", "Y", "--trials", "100"});
  EXPECT_EQ(r.code, 0) << r.out << r.err;
  EXPECT_NE(r.out.find("result: pass\n"), std::string::npos);
}

TEST(CliVerify, NonIdentifiableStopsBeforeTrials) {
  const auto r = run({"verify", "--graph", fixture("bow.g"), "--treatment", "A", "--outcome", "Y"});
  EXPECT_EQ(r.code, 3);
  EXPECT_EQ(r.out, "not identifiable\n");
  EXPECT_EQ(r.out.find("trials"), std::string::npos);
}

TEST(CliVerify, NumericTreatmentValue) {
  const auto r = run({"verify", "--graph", fixture("observed_confounder.g"), "--treatment", "A=1", "--outcome", "Y", "--trials", "5",
                      "--format", "json"});
  EXPECT_EQ(r.code, 0) << r.err;
  const auto doc = nlohmann::json::parse(r.out);
  EXPECT_TRUE(doc.at("pass").get<bool>());
  EXPECT_EQ(doc.at("trials").get<int>(), 5);
  EXPECT_EQ(doc.at("errors").size(), 5u);
  const auto mass = doc.at("distribution").at("mass").get<std::vector<double>>();
  ASSERT_EQ(mass.size(), 2u);
  EXPECT_NEAR(mass[0] + mass[1], 1.0, 1e-9);
  // The reported distribution is the trial-0 model's p(Y(1)).
  const DiscreteScm m = random_scm(canonical_dag(observed_confounder()), 0);
  EXPECT_LE(sup_distance(mass, marginalize(interventional_joint(m, {{"A", 1}}), {"Y"}).mass()), 1e-9);
}

TEST(CliVerify, FixedScmFile) {
  const auto r = run({"verify", "--scm", fixture("bow_unconfounded.scm"), "--treatment", "A", "--outcome", "Y"});
  EXPECT_EQ(r.code, 3);  // the fixture still carries its latent, so the query is a hedge
  const auto g = run({"verify", "--scm", fixture("golden_observed_confounder_seed7.scm"), "--treatment", "A", "--outcome", "Y"});
  EXPECT_EQ(g.code, 0) << g.err;
  EXPECT_NE(g.out.find("trials: 1\n"), std::string::npos);
}

TEST(CliVerify, BadFlags) {
  EXPECT_EQ(run({"verify", "--graph", fixture("observed_confounder.g"), "--treatment", "A", "--outcome", "Y", "--trials", "0"}).code, 1);
  EXPECT_EQ(run({"verify", "--graph", fixture("observed_confounder.g"), "--treatment", "A", "--outcome", "Y", "--tol", "-1"}).code, 1);
  EXPECT_EQ(run({"verify", "--treatment", "A", "--outcome", "Y"}).code, 1);
  EXPECT_EQ(run({"verify", "--graph", fixture("observed_confounder.g"), "--treatment", "A=7", "--outcome", "Y"}).code, 1);
}

// ---------------------------------------------------------------------------
// districts / print-canonical / determinism
// ---------------------------------------------------------------------------

TEST(CliMisc, Districts) {
  auto r = run({"districts", "--graph", fixture("longitudinal.g")});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "{A, C, D, Y}\n{B}\n");
  r = run({"districts", "--graph", fixture("front_door.g"), "--format", "json"});
  EXPECT_EQ(r.out, "[[\"A\",\"Y\"],[\"W\"]]\n");
}

TEST(CliMisc, PrintCanonical) {
  const auto r = run({"print-canonical", "--graph", fixture("bow.g")});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(std::get<LatentDag>(parse_graph(r.out)), canonical_dag(bow()));
  const auto j = run({"print-canonical", "--graph", fixture("longitudinal.g"), "--format", "json"});
  const auto doc = nlohmann::json::parse(j.out);
  EXPECT_EQ(latent_project(std::get<LatentDag>(parse_graph(doc.at("graph").get<std::string>()))), longitudinal());
}

TEST(CliMisc, ByteIdenticalOutput) {
  const std::vector<std::vector<std::string>> invocations{
      {"identify", "--graph", fixture("longitudinal.g"), "--treatment", "B,D", "--outcome", "Y"},
      {"verify", "--graph", fixture("front_door.g"), "--treatment", "A", "--outcome", "Y", "--trials", "10", "--format", "json"},
      {"districts", "--graph", fixture("longitudinal.g")},
  };
  for (const auto& args : invocations) {
    const auto a = run(args), b = run(args);
    EXPECT_EQ(a.code, b.code);
    EXPECT_EQ(a.out, b.out);
  }
}
