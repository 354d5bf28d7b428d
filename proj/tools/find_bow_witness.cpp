// Grid search for two SCMs on the bow graph (A -> Y, A <-> Y) that share an
// observational joint but disagree on p(Y(a)).
//
// The confounded model draws U, then A | U and Y | A, U from a coarse grid.
// Its partner ignores the latent: A keeps the marginal p(a) and Y | A is the
// observed conditional p(y | a), so both models produce the same p(a, y)
// while only the first one is confounded.
//
// usage: find_bow_witness <out_dir>   (writes bow_confounded.scm, bow_unconfounded.scm)

#include <algorithm>
#include <array>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "causalid/causalid.hpp"

using namespace causalid;

namespace {

DiscreteScm bow_scm(double pu, std::array<double, 2> pa_given_u, std::array<double, 4> py_given_au) {
  LatentDag dag;
  dag.add_vertex("A");
  dag.add_vertex("Y");
  dag.add_vertex("U_AY", true);
  dag.add_edge("A", "Y");
  dag.add_edge("U_AY", "A");
  dag.add_edge("U_AY", "Y");
  // Parents in vertex order: A has {U_AY}; Y has {A, U_AY}.
  std::vector<std::vector<std::vector<double>>> rows(3);
  for (double p : pa_given_u) rows[0].push_back({1.0 - p, p});
  for (double p : py_given_au) rows[1].push_back({1.0 - p, p});
  rows[2].push_back({1.0 - pu, pu});
  return DiscreteScm(dag, {2, 2, 2}, rows);
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: find_bow_witness <out_dir>\n";
    return 1;
  }
  const std::array<double, 5> grid{0.1, 0.3, 0.5, 0.7, 0.9};
  double best = -1.0;
  std::optional<DiscreteScm> best_confounded, best_plain;

  for (double pu : grid)
    for (double a0 : grid)
      for (double a1 : grid)
        for (double y00 : grid)
          for (double y01 : grid)
            for (double y10 : grid)
              for (double y11 : grid) {
                const auto m1 = bow_scm(pu, {a0, a1}, {y00, y01, y10, y11});
                const JointTable obs = observational_joint(m1);  // over A, Y
                const double pa1 = obs.mass()[2] + obs.mass()[3];
                const double y_given_a0 = obs.mass()[1] / (1.0 - pa1);
                const double y_given_a1 = obs.mass()[3] / pa1;
                const auto m2 = bow_scm(0.5, {pa1, pa1}, {y_given_a0, y_given_a0, y_given_a1, y_given_a1});
                double gap = 0.0;
                for (int a = 0; a < 2; ++a)
                  gap = std::max(gap, sup_distance(interventional_joint(m1, {{"A", a}}).mass(),
                                                   interventional_joint(m2, {{"A", a}}).mass()));
                if (gap > best + 1e-12) {
                  best = gap;
                  best_confounded = m1;
                  best_plain = m2;
                }
              }

  const std::string dir = argv[1];
  std::ofstream(dir + "/bow_confounded.scm") << "# Confounded bow model found by tools/find_bow_witness\n"
                                             << print_scm(*best_confounded);
  std::ofstream(dir + "/bow_unconfounded.scm") << "# Latent-free partner with the same observational joint\n"
                                               << print_scm(*best_plain);
  std::cout << "max interventional gap: " << best << "\n";
  return 0;
}
