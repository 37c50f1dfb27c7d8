#pragma once

#include <optional>
#include <string>
#include <vector>

#include "irslab/subgroup.hpp"

namespace irslab {

struct IrsAtom {
  Subgroup subgroup;
  Rat weight;
};

// Finitely supported probability measure on the subgroups of a marked group.
// Atoms are pairwise distinct with positive weights summing to exactly one,
// kept sorted by canonical subgroup key.
class IrsDistribution {
 public:
  static IrsDistribution from_atoms(const MarkedGroup& parent, std::vector<IrsAtom> atoms);
  static IrsDistribution dirac(const Subgroup& h);
  // Uniform measure over the conjugation orbit of h; the orbit must close
  // within orbit_cap distinct subgroups (always true for finite parents).
  static IrsDistribution uniform_on_conjugates(const Subgroup& h,
                                               std::size_t orbit_cap = 10000);

  const MarkedGroup& parent() const { return parent_; }
  const std::vector<IrsAtom>& atoms() const { return atoms_; }
  // Weight of the atom equal to h, zero when absent.
  Rat weight_of(const Subgroup& h) const;

 private:
  IrsDistribution(MarkedGroup parent, std::vector<IrsAtom> atoms)
      : parent_(std::move(parent)), atoms_(std::move(atoms)) {}
  MarkedGroup parent_;
  std::vector<IrsAtom> atoms_;
};

// Measure-preserving action on finitely many weighted points, given by one
// permutation per positive generator. Inverse letters act by the inverse
// permutations; for finite parents the letter action must factor through the
// group (checked element by element).
class FinitePmpAction {
 public:
  static FinitePmpAction from_generator_maps(const MarkedGroup& parent,
                                             std::vector<std::vector<int>> gen_images,
                                             std::vector<Rat> weights);
  // Left translation on the coset space of a finite-index subgroup, uniform
  // weights. Cosets are numbered in discovery order from the subgroup itself.
  static FinitePmpAction coset_action(const Subgroup& h);
  static FinitePmpAction disjoint_union(const std::vector<FinitePmpAction>& parts,
                                        const std::vector<Rat>& part_weights);

  const MarkedGroup& parent() const { return parent_; }
  int points() const { return npoints_; }
  const std::vector<Rat>& weights() const { return weights_; }
  int act_letter(int letter, int x) const;
  int act(const Elem& g, int x) const;
  Subgroup stabilizer(int x) const;

 private:
  FinitePmpAction(MarkedGroup parent) : parent_(std::move(parent)) {}
  MarkedGroup parent_;
  int npoints_ = 0;
  std::vector<std::vector<int>> letter_images_;  // one permutation per letter
  std::vector<Rat> weights_;
  std::vector<std::vector<int>> elem_images_;  // finite parents: one per element
};

// Distribution of the point stabilizer under the action's measure.
IrsDistribution stabilizer_pushforward(const FinitePmpAction& action);

struct InvarianceCheck {
  bool invariant = false;
  // Populated on failure: a positive generator s and an atom H whose
  // conjugate sHs^-1 is missing or carries a different weight.
  std::optional<Elem> witness_generator;
  std::optional<Subgroup> witness_atom;
  std::string detail;
};

// Verifies invariance of the measure under conjugation by each positive
// generator; generators suffice because conjugation is multiplicative.
InvarianceCheck check_conjugation_invariance(const IrsDistribution& mu);

// mu{H : h in H}, exact.
Rat inclusion_probability(const IrsDistribution& mu, const Elem& h);

// Subgroup generated by every element with positive inclusion probability;
// for an invariant measure this is the minimal subgroup carrying the measure
// and it is normal. Free parents must stay within index_bound.
Subgroup irs_normal_closure(const IrsDistribution& mu, long index_bound = 100000);

bool is_spanning(const IrsDistribution& mu, long index_bound = 100000);

struct ErgodicComponent {
  IrsDistribution distribution;  // normalized restriction to one orbit
  Rat weight;                    // total original mass of the orbit
};

// Partition of the atoms into conjugation orbits; requires an invariant
// measure. Components are ordered by their smallest atom.
std::vector<ErgodicComponent> ergodic_components(const IrsDistribution& mu);

struct AmenableIrsReport {
  bool is_amenable_irs = false;     // every atom flagged amenable
  Subgroup radical;                 // amenable radical of the parent
  bool contained_in_radical = false;
  bool theorem_consistent = false;  // !is_amenable_irs || contained_in_radical
};

AmenableIrsReport amenable_irs_radical_check(const IrsDistribution& mu);

std::string serialize_irs(const IrsDistribution& mu);
IrsDistribution parse_irs(const MarkedGroup& parent, const std::string& text);
IrsDistribution parse_irs(const MarkedGroup& parent, std::istream& in);

}  // namespace irslab
