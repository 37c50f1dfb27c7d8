#include "irslab/tree_group.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace irslab {

namespace {

const Portrait& as_tree_elem(const MarkedGroup& g, const Elem& e) {
  const Portrait* p = std::get_if<Portrait>(&e.v);
  require(p != nullptr && static_cast<int>(p->size()) == g.tree_nodes(), Errc::FamilyMismatch,
          "element is not a portrait of this tree group");
  return *p;
}

Portrait zero_tail(const Portrait& p, int keep) {
  Portrait out = p;
  std::fill(out.begin() + keep, out.end(), std::uint8_t{0});
  return out;
}

int sym_order(const MarkedGroup& g) { return static_cast<int>(g.tree_sym().size()); }

// All portraits with the given fixed prefix, ascending portrait-lex.
std::vector<Portrait> enumerate_tail(const MarkedGroup& g, const Portrait& prefix, int keep) {
  const int nodes = g.tree_nodes();
  const int ns = sym_order(g);
  std::vector<Portrait> out;
  Portrait cur(static_cast<std::size_t>(nodes), 0);
  std::copy(prefix.begin(), prefix.begin() + keep, cur.begin());
  while (true) {
    out.push_back(cur);
    int pos = nodes - 1;
    while (pos >= keep && cur[static_cast<std::size_t>(pos)] == ns - 1)
      cur[static_cast<std::size_t>(pos--)] = 0;
    if (pos < keep) break;
    ++cur[static_cast<std::size_t>(pos)];
  }
  return out;
}

}  // namespace

TreeSubgroup::TreeSubgroup(MarkedGroup parent, std::vector<Portrait> elems)
    : parent_(std::move(parent)), elems_(std::move(elems)) {}

bool TreeSubgroup::contains(const Portrait& p) const {
  return std::binary_search(elems_.begin(), elems_.end(), p);
}

bool TreeSubgroup::contains(const Elem& g) const { return contains(as_tree_elem(parent_, g)); }

TreeSubgroup TreeSubgroup::whole(const MarkedGroup& g) {
  require(g.family() == Family::Tree, Errc::FamilyMismatch, "tree subgroups need a tree parent");
  long n = g.order();
  require(n <= static_cast<long>(kElemCap), Errc::GroupTooLarge,
          "truncation too large to enumerate");
  return TreeSubgroup(g, enumerate_tail(g, Portrait(), 0));
}

TreeSubgroup TreeSubgroup::trivial(const MarkedGroup& g) {
  require(g.family() == Family::Tree, Errc::FamilyMismatch, "tree subgroups need a tree parent");
  return TreeSubgroup(g, {std::get<Portrait>(g.identity().v)});
}

TreeSubgroup TreeSubgroup::generated_by(const MarkedGroup& g, const std::vector<Elem>& gens) {
  require(g.family() == Family::Tree, Errc::FamilyMismatch, "tree subgroups need a tree parent");
  std::set<Portrait> have{std::get<Portrait>(g.identity().v)};
  std::vector<Portrait> queue(have.begin(), have.end());
  std::vector<Portrait> gset;
  for (const Elem& e : gens) gset.push_back(as_tree_elem(g, e));
  for (std::size_t h = 0; h < queue.size(); ++h)
    for (const Portrait& s : gset) {
      Elem t = g.multiply(Elem{queue[h]}, Elem{s});
      if (have.insert(std::get<Portrait>(t.v)).second) {
        require(have.size() <= kElemCap, Errc::GroupTooLarge,
                "generated subgroup exceeds the enumeration cap");
        queue.push_back(std::get<Portrait>(std::move(t.v)));
      }
    }
  return TreeSubgroup(g, std::vector<Portrait>(have.begin(), have.end()));
}

TreeSubgroup TreeSubgroup::from_elements(const MarkedGroup& g, const std::vector<Elem>& elems) {
  require(g.family() == Family::Tree, Errc::FamilyMismatch, "tree subgroups need a tree parent");
  std::vector<Portrait> sorted;
  for (const Elem& e : elems) sorted.push_back(as_tree_elem(g, e));
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  require(!sorted.empty(), Errc::InvalidSubgroup, "a subgroup cannot be empty");
  Portrait id = std::get<Portrait>(g.identity().v);
  require(std::binary_search(sorted.begin(), sorted.end(), id), Errc::InvalidSubgroup,
          "identity is missing");
  auto inside = [&](const Portrait& p) {
    return std::binary_search(sorted.begin(), sorted.end(), p);
  };
  // Incremental generating-set closure: each new generator at least doubles
  // the closed part, so this stays near-linear instead of |S|^2.
  std::set<Portrait> have{id};
  std::vector<Portrait> gens;
  for (const Portrait& s : sorted) {
    if (have.count(s)) continue;
    gens.push_back(s);
    std::vector<Portrait> queue(have.begin(), have.end());
    for (std::size_t h = 0; h < queue.size(); ++h)
      for (const Portrait& x : gens) {
        Elem t = g.multiply(Elem{queue[h]}, Elem{x});
        const Portrait& tp = std::get<Portrait>(t.v);
        require(inside(tp), Errc::InvalidSubgroup,
                "set is not closed: missing " + g.name(t));
        if (have.insert(tp).second) queue.push_back(tp);
      }
  }
  return TreeSubgroup(g, std::move(sorted));
}

TreeSubgroup TreeSubgroup::intersect(const TreeSubgroup& other) const {
  require(parent_.same_group(other.parent_), Errc::FamilyMismatch,
          "intersection needs a common parent");
  std::vector<Portrait> out;
  std::set_intersection(elems_.begin(), elems_.end(), other.elems_.begin(), other.elems_.end(),
                        std::back_inserter(out));
  return TreeSubgroup(parent_, std::move(out));
}

bool TreeSubgroup::normal_in_parent() const {
  for (int i = 0; i < parent_.rank(); ++i) {
    Elem s = parent_.letter_elem(2 * i);
    for (const Portrait& p : elems_)
      if (!contains(parent_.conjugate(s, Elem{p}))) return false;
  }
  return true;
}

int level_prefix_nodes(const MarkedGroup& g, int i) {
  require(g.family() == Family::Tree, Errc::FamilyMismatch, "not a tree group");
  require(i >= 0 && i <= g.tree_depth(), Errc::DepthOutOfRange, "level out of range");
  int nodes = 0, width = 1;
  for (int l = 0; l < i; ++l) {
    nodes += width;
    width *= g.tree_arity();
  }
  return nodes;
}

mpz_class level_stabilizer_order(const MarkedGroup& g, int i) {
  int tail = g.tree_nodes() - level_prefix_nodes(g, i);
  mpz_class out;
  mpz_ui_pow_ui(out.get_mpz_t(), static_cast<unsigned long>(sym_order(g)),
                static_cast<unsigned long>(tail));
  return out;
}

LevelStabilizer level_stabilizer(const MarkedGroup& g, int i) {
  int keep = level_prefix_nodes(g, i);
  require(level_stabilizer_order(g, i) <= static_cast<unsigned long>(TreeSubgroup::kElemCap),
          Errc::GroupTooLarge, "stabilizer too large to enumerate");
  std::vector<Elem> elems;
  for (Portrait& p : enumerate_tail(g, Portrait(static_cast<std::size_t>(keep), 0), keep))
    elems.push_back(Elem{std::move(p)});
  TreeSubgroup sub = TreeSubgroup::from_elements(g, elems);
  bool normal = sub.normal_in_parent();
  return LevelStabilizer{std::move(sub), normal};
}

CosetUnion make_coset_union(const MarkedGroup& g, int level, const std::vector<Elem>& reps) {
  int keep = level_prefix_nodes(g, level);
  std::vector<Portrait> canon;
  for (const Elem& e : reps) canon.push_back(zero_tail(as_tree_elem(g, e), keep));
  std::sort(canon.begin(), canon.end());
  canon.erase(std::unique(canon.begin(), canon.end()), canon.end());
  return CosetUnion{g, level, std::move(canon)};
}

CosetUnion coset_decomposition(const MarkedGroup& g, const std::vector<Elem>& members,
                               int level) {
  int keep = level_prefix_nodes(g, level);
  require(!members.empty(), Errc::EmptySet, "empty set has no coset decomposition");
  std::vector<Portrait> elems;
  for (const Elem& e : members) elems.push_back(as_tree_elem(g, e));
  std::sort(elems.begin(), elems.end());
  elems.erase(std::unique(elems.begin(), elems.end()), elems.end());
  mpz_class coset_size = level_stabilizer_order(g, level);
  std::map<Portrait, unsigned long> count;
  for (const Portrait& p : elems) ++count[zero_tail(p, keep)];
  std::vector<Portrait> reps;
  for (const auto& [rep, c] : count) {
    require(coset_size == c, Errc::NotACosetUnion,
            "coset of " + g.name(Elem{rep}) + " is only partially covered");
    reps.push_back(rep);
  }
  return CosetUnion{g, level, std::move(reps)};
}

CosetUnion left_translate(const Elem& g, const CosetUnion& o) {
  int keep = level_prefix_nodes(o.parent, o.level);
  (void)as_tree_elem(o.parent, g);
  std::vector<Portrait> reps;
  for (const Portrait& w : o.reps)
    reps.push_back(zero_tail(
        std::get<Portrait>(o.parent.multiply(g, Elem{w}).v), keep));
  std::sort(reps.begin(), reps.end());
  return CosetUnion{o.parent, o.level, std::move(reps)};
}

std::vector<Portrait> coset_union_elements(const CosetUnion& o, std::size_t cap) {
  int keep = level_prefix_nodes(o.parent, o.level);
  mpz_class total = level_stabilizer_order(o.parent, o.level) * o.reps.size();
  require(total <= static_cast<unsigned long>(cap), Errc::BallTooLarge,
          "coset union too large to enumerate");
  std::vector<Portrait> out;
  for (const Portrait& w : o.reps)
    for (Portrait& p : enumerate_tail(o.parent, w, keep)) out.push_back(std::move(p));
  std::sort(out.begin(), out.end());
  return out;
}

Rat haar_ratio(const CosetUnion& o, const CosetUnion& l) {
  require(o.parent.same_group(l.parent), Errc::FamilyMismatch,
          "coset unions live in different groups");
  require(!o.reps.empty() && !l.reps.empty(), Errc::EmptySet,
          "haar ratio needs nonempty unions");
  int i = std::max(o.level, l.level);
  // Refining w V_j to level i splits each coset into |Sym|^(nodes gained).
  const unsigned long ns = static_cast<unsigned long>(sym_order(o.parent));
  auto refined = [&](const CosetUnion& u) {
    mpz_class f;
    mpz_ui_pow_ui(f.get_mpz_t(), ns,
                  static_cast<unsigned long>(level_prefix_nodes(o.parent, i) -
                                             level_prefix_nodes(o.parent, u.level)));
    return mpz_class(f * u.reps.size());
  };
  Rat q(refined(o), refined(l));
  q.canonicalize();
  return q;
}

std::vector<Elem> dense_selector(const TreeSubgroup& c) {
  std::vector<Elem> out;
  for (const Portrait& p : c.elements()) out.push_back(Elem{p});
  return out;
}

namespace {

// Cosets of C cap V_i in C correspond to truncated portraits (level < i
// prefixes); left multiplication factors through that quotient, so Folner
// ratios over Q = C only depend on coset data.
struct LevelQuotient {
  int keep = 0;
  std::vector<Portrait> cosets;        // sorted distinct prefixes of C
  std::vector<int> coset_of_elem;      // element index -> coset index
  std::vector<int> first_elem;         // coset index -> first element index
  std::optional<MarkedGroup> quotient; // tree group of depth i (empty for i = 0)

  int mult(int qi, int ui) const {
    if (!quotient) return 0;
    Elem p = quotient->multiply(Elem{cosets[static_cast<std::size_t>(qi)]},
                                Elem{cosets[static_cast<std::size_t>(ui)]});
    auto it = std::lower_bound(cosets.begin(), cosets.end(), std::get<Portrait>(p.v));
    return static_cast<int>(it - cosets.begin());
  }
};

LevelQuotient build_quotient(const TreeSubgroup& c, int i) {
  LevelQuotient q;
  q.keep = level_prefix_nodes(c.parent(), i);
  const auto& sel = c.elements();
  std::vector<Portrait> prefixes;
  for (const Portrait& p : sel)
    prefixes.push_back(Portrait(p.begin(), p.begin() + q.keep));
  q.cosets = prefixes;
  std::sort(q.cosets.begin(), q.cosets.end());
  q.cosets.erase(std::unique(q.cosets.begin(), q.cosets.end()), q.cosets.end());
  q.coset_of_elem.resize(sel.size());
  q.first_elem.assign(q.cosets.size(), -1);
  for (std::size_t e = 0; e < sel.size(); ++e) {
    auto it = std::lower_bound(q.cosets.begin(), q.cosets.end(), prefixes[e]);
    int ci = static_cast<int>(it - q.cosets.begin());
    q.coset_of_elem[e] = ci;
    if (q.first_elem[static_cast<std::size_t>(ci)] == -1)
      q.first_elem[static_cast<std::size_t>(ci)] = static_cast<int>(e);
  }
  if (i >= 1) q.quotient = MarkedGroup::tree_group(c.parent().tree_arity(), i);
  return q;
}

}  // namespace

FolnerOutcome folner_search(const TreeSubgroup& c, const std::vector<Elem>& q_reps, int n,
                            int min_level) {
  const MarkedGroup& g = c.parent();
  const int depth = g.tree_depth();
  require(n >= 1, Errc::ConfigInvalid, "Folner quality n must be at least 1");
  require(min_level >= 0 && min_level <= depth, Errc::DepthOutOfRange,
          "search level out of range");
  require(!q_reps.empty(), Errc::ConfigInvalid, "need at least one test representative");
  for (const Elem& e : q_reps)
    require(c.contains(e), Errc::RepNotInSubgroup,
            "representative " + g.name(e) + " lies outside the subgroup");

  const auto& sel = c.elements();
  const Rat bound = rat(1, n);
  FolnerOutcome outcome;
  for (int i = min_level; i <= depth; ++i) {
    LevelQuotient quot = build_quotient(c, i);
    std::vector<int> ubar;  // sorted coset indices of the current candidate
    std::vector<Portrait> reps;
    for (std::size_t m = 0; m < sel.size(); ++m) {
      int ci = quot.coset_of_elem[m];
      auto pos = std::lower_bound(ubar.begin(), ubar.end(), ci);
      if (pos != ubar.end() && *pos == ci) continue;  // same union as last time
      ubar.insert(pos, ci);
      reps.push_back(sel[m]);
      ++outcome.candidates_checked;

      Rat worst(0);
      int worst_coset = -1;
      bool feasible = true;
      std::vector<int> moved;
      for (std::size_t qi = 0; qi < quot.cosets.size() && feasible; ++qi) {
        moved.clear();
        for (int ui : ubar) moved.push_back(quot.mult(static_cast<int>(qi), ui));
        std::sort(moved.begin(), moved.end());
        std::size_t common = 0, a = 0, b = 0;
        while (a < moved.size() && b < ubar.size()) {
          if (moved[a] == ubar[b]) ++common, ++a, ++b;
          else if (moved[a] < ubar[b]) ++a;
          else ++b;
        }
        Rat ratio = rat(static_cast<long>(2 * (ubar.size() - common)),
                        static_cast<long>(ubar.size()));
        if (ratio > worst) {
          worst = ratio;
          worst_coset = static_cast<int>(qi);
          if (worst > bound) feasible = false;
        }
      }
      if (feasible) {
        FolnerCertificate cert;
        cert.level = i;
        cert.reps = reps;
        cert.worst_ratio = worst;
        cert.worst_rep =
            worst_coset < 0
                ? std::get<Portrait>(g.identity().v)
                : sel[static_cast<std::size_t>(
                      quot.first_elem[static_cast<std::size_t>(worst_coset)])];
        outcome.certificate = std::move(cert);
        return outcome;
      }
    }
  }
  return outcome;  // unreachable for valid input: U = C always certifies
}

bool folner_certificate_check(const FolnerCertificate& cert, const TreeSubgroup& c,
                              const std::vector<Elem>& q_reps, int n) {
  const MarkedGroup& g = c.parent();
  require(n >= 1, Errc::ConfigInvalid, "Folner quality n must be at least 1");
  require(cert.level >= 0 && cert.level <= g.tree_depth(), Errc::MalformedCertificate,
          "certificate level out of range");
  require(!cert.reps.empty(), Errc::MalformedCertificate, "certificate has no cosets");
  for (const Portrait& p : cert.reps)
    require(c.contains(p), Errc::MalformedCertificate,
            "certificate coset representative outside the subgroup");
  for (const Elem& e : q_reps)
    require(c.contains(e), Errc::RepNotInSubgroup,
            "representative " + g.name(e) + " lies outside the subgroup");

  // C cap V_level, by filtering the subgroup on identity prefixes.
  const int keep = level_prefix_nodes(g, cert.level);
  std::vector<Portrait> core;
  for (const Portrait& p : c.elements())
    if (std::all_of(p.begin(), p.begin() + keep, [](std::uint8_t x) { return x == 0; }))
      core.push_back(p);

  std::vector<Portrait> u;
  for (const Portrait& h : cert.reps)
    for (const Portrait& v : core)
      u.push_back(std::get<Portrait>(g.multiply(Elem{h}, Elem{v}).v));
  std::sort(u.begin(), u.end());
  u.erase(std::unique(u.begin(), u.end()), u.end());
  std::vector<Elem> u_elems;
  for (const Portrait& p : u) u_elems.push_back(Elem{p});
  CosetUnion u_union = coset_decomposition(g, u_elems, g.tree_depth());

  // Q = union of q (C cap V_0) = C; the ratio only depends on the coset of q
  // mod C cap V_level, so one representative per coset suffices.
  std::set<Portrait> coset_seen;
  const Rat bound = rat(1, n);
  for (const Portrait& q : c.elements()) {
    if (!coset_seen.insert(Portrait(q.begin(), q.begin() + keep)).second) continue;
    std::vector<Portrait> qu;
    for (const Portrait& x : u)
      qu.push_back(std::get<Portrait>(g.multiply(Elem{q}, Elem{x}).v));
    std::sort(qu.begin(), qu.end());
    std::vector<Elem> diff;
    std::size_t a = 0, b = 0;
    while (a < qu.size() || b < u.size()) {
      if (a < qu.size() && (b == u.size() || qu[a] < u[b])) diff.push_back(Elem{qu[a++]});
      else if (b < u.size() && (a == qu.size() || u[b] < qu[a])) diff.push_back(Elem{u[b++]});
      else ++a, ++b;
    }
    if (diff.empty()) continue;  // exact invariance under this q
    Rat ratio = haar_ratio(coset_decomposition(g, diff, g.tree_depth()), u_union);
    if (ratio > bound) return false;
  }
  return true;
}

}  // namespace irslab
