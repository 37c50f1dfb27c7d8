#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "irslab/error.hpp"

namespace irslab {

enum class Family { Finite, Free, Tree };

// Reduced word in a free group, stored as letter codes: code 2i is generator i,
// code 2i+1 its inverse. Lexicographic order on codes is the canonical letter
// order (a, a', b, b', ...).
using Word = std::vector<int>;

// Automorphism of the truncated rooted d-ary tree: one permutation id per
// internal node, level order (root first). Ids index the lex enumeration of
// Sym(d) one-line images.
using Portrait = std::vector<std::uint8_t>;

struct Elem {
  std::variant<int, Word, Portrait> v;
};

inline bool operator==(const Elem& a, const Elem& b) { return a.v == b.v; }
inline bool operator!=(const Elem& a, const Elem& b) { return !(a.v == b.v); }
inline bool operator<(const Elem& a, const Elem& b) { return a.v < b.v; }

struct GroupImpl;

// A group together with a finite symmetric marked generating set. Letters are
// indexed 0..2k-1: letter 2i is generator i, letter 2i+1 its inverse (labels
// get a trailing apostrophe). Copies share the backend.
class MarkedGroup {
 public:
  static constexpr std::size_t kBallCap = 10'000'000;
  static constexpr long kOrderCap = 5000;

  static MarkedGroup free_group(int rank);
  static MarkedGroup free_group(const std::vector<std::string>& labels);

  // table is row-major order n*n of 0-based indices; names may be empty
  // (defaults to g0..g{n-1} with table[0] forced to be checked as identity).
  static MarkedGroup finite_from_table(std::vector<int> table,
                                       std::vector<std::string> names,
                                       std::vector<int> gen_indices,
                                       std::vector<std::string> gen_labels);
  // CSV of index triples with header line "i,j,k".
  static MarkedGroup finite_from_csv(const std::string& path,
                                     std::vector<int> gen_indices,
                                     std::vector<std::string> gen_labels);
  // Closure of permutations on 0..degree-1; element names use cycle notation,
  // element indices follow the lex order of one-line images.
  static MarkedGroup finite_from_perms(int degree,
                                       const std::vector<std::vector<int>>& gen_perms,
                                       const std::vector<std::string>& gen_labels);

  static MarkedGroup cyclic_group(int n);
  static MarkedGroup symmetric_group(int n);
  static MarkedGroup alternating_group(int n);
  static MarkedGroup dihedral_group(int n);        // order 2n
  static MarkedGroup elementary_abelian_2(int n);  // (Z/2)^n
  static MarkedGroup wreath_c2_cyclic(int m);      // Z/2 wr Z/m

  // Automorphisms of the d-ary rooted tree truncated at depth D, marked by
  // per-node standard generators of Sym(d).
  static MarkedGroup tree_group(int arity, int depth);

  Family family() const;
  int rank() const;  // number of positive generators k
  int letter_count() const { return 2 * rank(); }

  Elem identity() const;
  bool is_identity(const Elem& g) const;
  Elem multiply(const Elem& a, const Elem& b) const;
  Elem inverse(const Elem& g) const;
  Elem conjugate(const Elem& g, const Elem& h) const;  // g h g^-1
  Elem generator(int i) const;
  Elem letter_elem(int letter) const;
  Elem apply_letter(const Elem& g, int letter) const;
  Elem word_apply(const Word& w) const;  // product of letters in this group

  std::string letter_label(int letter) const;
  std::optional<int> letter_by_label(const std::string& label) const;

  long order() const;  // Finite only
  int elem_index(const Elem& g) const;
  Elem elem_at(int index) const;

  std::string name(const Elem& g) const;
  Elem parse_elem(const std::string& token) const;

  // Elements of word length <= R over the marked letters, in canonical order:
  // length-lex (free), index order (finite), portrait-lex (tree).
  std::vector<Elem> ball(int R, std::size_t cap = kBallCap) const;

  // Canonical element order used for sets and serialization.
  bool elem_less(const Elem& a, const Elem& b) const;

  bool same_group(const MarkedGroup& other) const;

  int tree_arity() const;
  int tree_depth() const;
  int tree_nodes() const;  // internal nodes carrying a permutation
  // Permutation id applied by portrait g at a node, and the node action.
  int tree_node_image(const Elem& g, int node) const;
  const std::vector<std::vector<std::uint8_t>>& tree_sym() const;

  const GroupImpl* impl() const { return impl_.get(); }

 private:
  explicit MarkedGroup(std::shared_ptr<const GroupImpl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<const GroupImpl> impl_;
};

// Image of w under the homomorphism sending generator i of the free group src
// to images[i]. Fails with UnsupportedSource unless src is free.
Elem evaluate_hom(const MarkedGroup& src, const MarkedGroup& target,
                  const std::vector<Elem>& images, const Elem& w);

// Label-keyed variant: primed labels, when present, must agree with the
// inverse of the unprimed image (NotAHomomorphism otherwise).
Elem evaluate_hom(const MarkedGroup& src, const MarkedGroup& target,
                  const std::map<std::string, Elem>& images, const Elem& w);

Word word_inverse(const Word& w);
Word word_concat_reduce(const Word& a, const Word& b);

// |ball(R)| of the free group of rank k, saturating at cap+1.
std::size_t free_ball_size(int k, int R, std::size_t cap);

}  // namespace irslab
