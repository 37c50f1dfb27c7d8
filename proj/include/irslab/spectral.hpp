#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "irslab/subgroup.hpp"

namespace irslab {

// Labeled 2k-regular multigraph on cosets: one vertex permutation per
// positive generator, base vertex 0, connected.
struct SchreierGraph {
  int k = 0;
  int n = 0;
  std::vector<std::vector<int>> gen;      // generator permutations
  std::vector<std::vector<int>> gen_inv;  // their inverses

  int step(int v, int letter) const {
    const auto& p = (letter % 2 == 0) ? gen[static_cast<std::size_t>(letter / 2)]
                                      : gen_inv[static_cast<std::size_t>(letter / 2)];
    return p[static_cast<std::size_t>(v)];
  }
};

// Validates bijectivity and connectivity from vertex 0.
SchreierGraph make_schreier_graph(int k, std::vector<std::vector<int>> gen_perms);

// Coset graph of a finite-index subgroup of a free marked group.
SchreierGraph schreier_graph(const Subgroup& h);

// The subgroup whose coset table the graph is, based at vertex 0.
Subgroup subgroup_of_graph(const MarkedGroup& free_parent, const SchreierGraph& g);

// Length of the shortest cycle (reduced relation) if it is <= cap, else cap+1.
int graph_girth(const SchreierGraph& g, int cap = 16);

// Seeded random 2k-regular Schreier graph on n vertices, connected, with
// girth at least min_girth (local edge-swap repair; redraws when stuck).
SchreierGraph random_schreier_graph(int k, int n, std::uint64_t seed, int min_girth = 0);

// Spectral radius of the Markov averaging operator restricted to the
// orthogonal complement of constants. Dense symmetric eigendecomposition for
// n <= 2000, deflated power iteration beyond. n = 1 has no such complement
// and raises GraphTooSmall.
double markov_spectral_radius_rho0(const SchreierGraph& g, double tolerance = 1e-10);
double markov_rho0_dense(const SchreierGraph& g);
double markov_rho0_power(const SchreierGraph& g, double tolerance);

struct SpectralInterval {
  double lower = 0;
  double upper = 0;
};

// Two-sided enclosure of the spectral radius of the Cayley graph of the free
// group of rank k >= 2: lower from the Rayleigh quotient of the radius-R
// truncated operator (reduced to the radial chain) and the 2R-step return
// probability; upper from the optimal exponential test function.
SpectralInterval cayley_spectral_radius_estimate(const MarkedGroup& free_g, int R);

// <M^(2m) delta_e, delta_e> on the Cayley graph of the rank-k free group.
Rat free_return_probability(int k, int m);

// Distribution of rooted labeled R-balls over a uniform random vertex.
struct LocalBallStatistics {
  int radius = 0;
  std::vector<std::pair<std::string, Rat>> classes;  // canonical key -> frequency
};

LocalBallStatistics bs_local_statistics(const SchreierGraph& g, int R);
std::string rooted_ball_key(const SchreierGraph& g, int root, int R);
std::string tree_ball_key(int k, int R);

// 1 - frequency of the tree R-ball: total-variation distance to the Cayley
// point mass at this radius.
Rat bs_distance_to_cayley(const LocalBallStatistics& stats, const MarkedGroup& free_g);

struct LocalApproxRow {
  long index = 0;
  bool rho0_defined = false;
  double rho0 = 0;
  Rat bs_distance;
};

struct LocalApproxReport {
  int radius = 0;
  double tolerance = 0;
  int trailing_window = 3;
  SpectralInterval cayley;
  std::vector<LocalApproxRow> rows;
  bool hypothesis_observed = false;  // trailing rho0 within cayley upper + tolerance
  bool conclusion_observed = false;  // bs distances nonincreasing and ending <= tolerance
  bool theorem_consistent = false;   // !hypothesis_observed || conclusion_observed
};

// Empirical check of "small rho0 along the family forces local convergence
// to the Cayley graph" on an increasing-index family of subgroups.
LocalApproxReport local_approximation_report(const std::vector<Subgroup>& family, int R,
                                             double tolerance);

std::string local_report_csv(const LocalApproxReport& report);

// DOT text with one labeled undirected edge per generator and source vertex.
std::string graph_to_dot(const SchreierGraph& g, const std::vector<std::string>& labels);

}  // namespace irslab
