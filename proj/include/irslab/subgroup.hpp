#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "irslab/group.hpp"
#include "irslab/rational.hpp"

namespace irslab {

// Membership bit-vector over ball(parent, R) in canonical element order.
struct Fingerprint {
  int radius = 0;
  std::vector<bool> bits;

  std::string hex() const;
  std::string serialize() const;  // "R nbits hex"
  static Fingerprint parse(const std::string& text);
  friend bool operator==(const Fingerprint& a, const Fingerprint& b) {
    return a.radius == b.radius && a.bits == b.bits;
  }
};

// Complete transitive action of the letters on right cosets, base coset 0.
struct CosetTable {
  int k = 0;              // positive generators
  std::vector<int> next;  // rows * 2k entries
  int rows() const { return k == 0 ? 0 : static_cast<int>(next.size()) / (2 * k); }
  int step(int v, int letter) const {
    return next[static_cast<std::size_t>(v) * (2 * k) + static_cast<std::size_t>(letter)];
  }
};

// Folded core graph of a finitely generated subgroup of a free group.
// next entries are -1 where no edge exists.
struct CoreGraph {
  int k = 0;
  int base = 0;
  std::vector<int> next;  // rows * 2k entries
  int rows() const { return k == 0 ? 0 : static_cast<int>(next.size()) / (2 * k); }
  int step(int v, int letter) const {
    return next[static_cast<std::size_t>(v) * (2 * k) + static_cast<std::size_t>(letter)];
  }
  bool complete() const;
};

class Subgroup {
 public:
  struct ElementSet {
    std::vector<int> idx;  // sorted element indices
  };
  using Rep = std::variant<ElementSet, CosetTable, CoreGraph>;

  static constexpr long kIndexCap = 1000000;

  // Finite parents.
  static Subgroup from_elements(const MarkedGroup& parent, const std::vector<Elem>& elems);
  static Subgroup from_indices(const MarkedGroup& parent, std::vector<int> idx);

  // Any parent: subgroup generated by the given elements (closure for finite
  // parents, folded core graph for free parents).
  static Subgroup generated_by(const MarkedGroup& parent, const std::vector<Elem>& gens);

  static Subgroup from_coset_table(const MarkedGroup& parent, CosetTable table);
  static Subgroup kernel_of_hom(const MarkedGroup& src, const MarkedGroup& target,
                                const std::vector<Elem>& images);
  static Subgroup trivial(const MarkedGroup& parent);
  static Subgroup whole(const MarkedGroup& parent);

  const MarkedGroup& parent() const { return parent_; }
  const Rep& rep() const { return rep_; }
  const char* rep_tag() const;  // "element-set" | "coset-table" | "core-graph"

  bool contains(const Elem& g) const;
  Fingerprint fingerprint(int R, std::size_t cap = MarkedGroup::kBallCap) const;
  Subgroup conjugated(const Elem& g) const;
  bool is_normal() const;

  long order() const;   // element count; FamilyMismatch when infinite
  long index() const;   // index in parent; -1 when infinite
  int core_rank() const;  // free rank of a free-parent subgroup (E - V + 1)

  std::vector<Elem> elements() const;        // finite reps only
  std::vector<Word> generator_words() const; // free parents: Nielsen-Schreier basis
  bool contains_subgroup(const Subgroup& other) const;

  const std::string& canonical_key() const;
  friend bool operator==(const Subgroup& a, const Subgroup& b) {
    return a.parent_.same_group(b.parent_) && a.canonical_key() == b.canonical_key();
  }

 private:
  Subgroup(MarkedGroup parent, Rep rep) : parent_(std::move(parent)), rep_(std::move(rep)) {}
  MarkedGroup parent_;
  Rep rep_;
  mutable std::string key_;
};

struct ChabautyResult {
  Rat value;       // 2^{-r}, or 0 when indistinguishable up to R_max
  int agree_radius = 0;
  bool indistinguishable = false;
  double value_double() const { return rat_to_double(value); }
};

ChabautyResult chabauty_distance(const Subgroup& h1, const Subgroup& h2, int r_max,
                                 std::size_t cap = MarkedGroup::kBallCap);

// Smallest normal subgroup containing T. Free parents need a finite-index
// result under index_bound; otherwise ClosureExceedsBound.
Subgroup normal_closure_of_set(const MarkedGroup& g, const std::vector<Elem>& t,
                               long index_bound = 100000);

Subgroup intersect_with(const Subgroup& h, const Subgroup& k,
                        long index_cap = Subgroup::kIndexCap);

struct Quotient {
  MarkedGroup original;
  MarkedGroup group;          // G/N
  std::vector<int> coset_of;  // element index -> quotient index
  std::vector<int> rep_of;    // quotient index -> representative element index
};

Quotient quotient_by(const MarkedGroup& g, const Subgroup& n);

struct ProjectedSubgroup {
  Quotient quotient;
  Subgroup image;
};

ProjectedSubgroup project_subgroup(const Subgroup& h, const Subgroup& n);
Subgroup preimage_subgroup(const Quotient& q, const Subgroup& hbar);

std::vector<Subgroup> enumerate_subgroups(const MarkedGroup& g);

bool amenable_flag(const Subgroup& h);
Subgroup amenable_radical(const MarkedGroup& g);

std::string serialize_subgroup(const Subgroup& h);
Subgroup parse_subgroup(const MarkedGroup& parent, const std::string& text);
Subgroup parse_subgroup(const MarkedGroup& parent, std::istream& in);

}  // namespace irslab
