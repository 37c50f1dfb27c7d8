#pragma once

#include <optional>
#include <string>
#include <vector>

#include "irslab/group.hpp"
#include "irslab/rational.hpp"

namespace irslab {

// Subgroup of a truncated rooted-tree group, stored as its sorted element
// list. Truncations are finite, so closed subgroups are just subgroups; the
// element cap keeps enumeration within the 2^15 budget.
class TreeSubgroup {
 public:
  static constexpr std::size_t kElemCap = std::size_t{1} << 15;

  static TreeSubgroup whole(const MarkedGroup& g);
  static TreeSubgroup trivial(const MarkedGroup& g);
  // Validates closure; the witness of a missing product is reported.
  static TreeSubgroup from_elements(const MarkedGroup& g, const std::vector<Elem>& elems);
  static TreeSubgroup generated_by(const MarkedGroup& g, const std::vector<Elem>& gens);

  const MarkedGroup& parent() const { return parent_; }
  const std::vector<Portrait>& elements() const { return elems_; }
  long order() const { return static_cast<long>(elems_.size()); }
  bool contains(const Portrait& p) const;
  bool contains(const Elem& g) const;
  TreeSubgroup intersect(const TreeSubgroup& other) const;
  // Conjugation by every marked generator of the parent stays inside.
  bool normal_in_parent() const;

 private:
  TreeSubgroup(MarkedGroup parent, std::vector<Portrait> elems);
  MarkedGroup parent_;
  std::vector<Portrait> elems_;  // sorted, distinct, identity included
};

// V_i = automorphisms acting trivially on levels <= i, i.e. portraits with
// identity labels at every node of level < i. V_0 is the whole group, V_D
// trivial; the chain is the van Dantzig basis of the truncation.
struct LevelStabilizer {
  TreeSubgroup subgroup;
  bool normal = false;  // recomputed from the generators, not assumed
};

LevelStabilizer level_stabilizer(const MarkedGroup& g, int i);

// Number of internal nodes at levels < i (portrait prefix length at level i).
int level_prefix_nodes(const MarkedGroup& g, int i);

// |V_i| as an exact integer (no enumeration).
mpz_class level_stabilizer_order(const MarkedGroup& g, int i);

// Finite disjoint union of left V_i-cosets. A coset w V_i is the set of
// portraits sharing w's prefix below level i, so the canonical representative
// is that prefix with identity labels on the tail.
struct CosetUnion {
  MarkedGroup parent;
  int level = 0;
  std::vector<Portrait> reps;  // canonical, sorted, pairwise distinct cosets
};

// Canonicalizes arbitrary representatives, deduplicating cosets.
CosetUnion make_coset_union(const MarkedGroup& g, int level, const std::vector<Elem>& reps);

// Exact cover check: members must be a disjoint union of whole V_i-cosets;
// the NotACosetUnion error names a witness element of a partial coset.
CosetUnion coset_decomposition(const MarkedGroup& g, const std::vector<Elem>& members,
                               int level);

CosetUnion left_translate(const Elem& g, const CosetUnion& o);

std::vector<Portrait> coset_union_elements(const CosetUnion& o,
                                           std::size_t cap = std::size_t{1} << 20);

// mu(O)/mu(L) = |W|/|K| after refining both unions to the finer level.
// Counts cosets exactly; nothing is enumerated.
Rat haar_ratio(const CosetUnion& o, const CosetUnion& l);

// Deterministic enumeration of the subgroup in portrait-lex order: the
// finite-depth stand-in for a dense selector sequence.
std::vector<Elem> dense_selector(const TreeSubgroup& c);

// U = union of h (C cap V_level) over h in reps; worst_ratio is the exact
// maximum of mu(q U delta U)/mu(U) over q in Q, attained at worst_rep.
struct FolnerCertificate {
  int level = 0;
  std::vector<Portrait> reps;
  Rat worst_ratio;
  Portrait worst_rep;
};

struct FolnerOutcome {
  std::optional<FolnerCertificate> certificate;  // empty = exhausted search space
  long candidates_checked = 0;
};

// Breadth-first over (level from min_level up, then selector-prefix unions);
// first candidate with worst ratio <= 1/n wins. Q realizes the Borel Folner
// test set: the union of q (C cap V_0) over the given representatives, which
// at finite depth is all of C (V_0 is the whole truncation). A certificate
// always exists here since U = C has ratio 0; min_level forces the deeper,
// nontrivial searches.
FolnerOutcome folner_search(const TreeSubgroup& c, const std::vector<Elem>& q_reps, int n,
                            int min_level = 0);

// Recomputes every ratio from scratch (coset_decomposition + haar_ratio at
// the singleton level); true iff all are <= 1/n.
bool folner_certificate_check(const FolnerCertificate& cert, const TreeSubgroup& c,
                              const std::vector<Elem>& q_reps, int n);

}  // namespace irslab
