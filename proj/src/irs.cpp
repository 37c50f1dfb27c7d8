#include "irslab/irs.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

namespace irslab {

namespace {

void sort_atoms(std::vector<IrsAtom>& atoms) {
  std::sort(atoms.begin(), atoms.end(), [](const IrsAtom& a, const IrsAtom& b) {
    return a.subgroup.canonical_key() < b.subgroup.canonical_key();
  });
}

}  // namespace

IrsDistribution IrsDistribution::from_atoms(const MarkedGroup& parent,
                                            std::vector<IrsAtom> atoms) {
  require(!atoms.empty(), Errc::EmptyMeasure, "a distribution needs at least one atom");
  Rat total = 0;
  for (const IrsAtom& a : atoms) {
    require(a.subgroup.parent().same_group(parent), Errc::FamilyMismatch,
            "atom subgroup belongs to a different parent");
    require(a.weight > 0, Errc::InvalidMeasure, "atom weights must be positive");
    total += a.weight;
  }
  require(total == 1, Errc::InvalidMeasure, "atom weights must sum to one");
  sort_atoms(atoms);
  for (std::size_t i = 1; i < atoms.size(); ++i)
    require(atoms[i - 1].subgroup.canonical_key() != atoms[i].subgroup.canonical_key(),
            Errc::InvalidMeasure, "duplicate atom");
  return IrsDistribution(parent, std::move(atoms));
}

IrsDistribution IrsDistribution::dirac(const Subgroup& h) {
  return from_atoms(h.parent(), {{h, Rat(1)}});
}

IrsDistribution IrsDistribution::uniform_on_conjugates(const Subgroup& h,
                                                       std::size_t orbit_cap) {
  const MarkedGroup& g = h.parent();
  std::map<std::string, Subgroup> orbit;
  std::vector<const Subgroup*> queue;
  orbit.emplace(h.canonical_key(), h);
  queue.push_back(&orbit.begin()->second);
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const Subgroup* cur = queue[head];  // map nodes are stable
    for (int i = 0; i < g.rank(); ++i) {
      Subgroup next = cur->conjugated(g.generator(i));
      std::string key = next.canonical_key();
      auto [it, fresh] = orbit.emplace(std::move(key), std::move(next));
      if (fresh) {
        require(orbit.size() <= orbit_cap, Errc::GroupTooLarge,
                "conjugation orbit did not close within the cap");
        queue.push_back(&it->second);
      }
    }
  }
  std::vector<IrsAtom> atoms;
  Rat w = rat(1, static_cast<long>(orbit.size()));
  for (auto& [key, sub] : orbit) atoms.push_back({sub, w});
  return from_atoms(g, std::move(atoms));
}

Rat IrsDistribution::weight_of(const Subgroup& h) const {
  const std::string& key = h.canonical_key();
  for (const IrsAtom& a : atoms_)
    if (a.subgroup.canonical_key() == key) return a.weight;
  return Rat(0);
}

FinitePmpAction FinitePmpAction::from_generator_maps(const MarkedGroup& parent,
                                                     std::vector<std::vector<int>> gen_images,
                                                     std::vector<Rat> weights) {
  require(parent.family() != Family::Tree, Errc::FamilyMismatch,
          "point actions support finite and free parents");
  const int k = parent.rank();
  require(static_cast<int>(gen_images.size()) == k, Errc::ActionNotWellDefined,
          "one permutation per positive generator required");
  const int n = static_cast<int>(weights.size());
  require(n > 0, Errc::EmptyMeasure, "action needs at least one point");

  FinitePmpAction a(parent);
  a.npoints_ = n;
  a.weights_ = std::move(weights);
  a.letter_images_.assign(static_cast<std::size_t>(2 * k), {});
  for (int i = 0; i < k; ++i) {
    const std::vector<int>& p = gen_images[static_cast<std::size_t>(i)];
    require(static_cast<int>(p.size()) == n, Errc::ActionNotWellDefined,
            "generator image has the wrong number of points");
    std::vector<int> inv(static_cast<std::size_t>(n), -1);
    for (int x = 0; x < n; ++x) {
      require(p[static_cast<std::size_t>(x)] >= 0 && p[static_cast<std::size_t>(x)] < n,
              Errc::ActionNotWellDefined, "generator image out of range");
      require(inv[static_cast<std::size_t>(p[static_cast<std::size_t>(x)])] == -1,
              Errc::ActionNotWellDefined, "generator image is not a bijection");
      inv[static_cast<std::size_t>(p[static_cast<std::size_t>(x)])] = x;
    }
    a.letter_images_[static_cast<std::size_t>(2 * i)] = p;
    a.letter_images_[static_cast<std::size_t>(2 * i + 1)] = std::move(inv);
  }

  Rat total = 0;
  for (const Rat& w : a.weights_) {
    require(w >= 0, Errc::InvalidMeasure, "point weights must be nonnegative");
    total += w;
  }
  require(total == 1, Errc::InvalidMeasure, "point weights must sum to one");
  for (int l = 0; l < 2 * k; ++l)
    for (int x = 0; x < n; ++x)
      require(a.weights_[static_cast<std::size_t>(a.act_letter(l, x))] ==
                  a.weights_[static_cast<std::size_t>(x)],
              Errc::NotInvariantMeasure, "point weights are not preserved");

  if (parent.family() == Family::Finite) {
    // The letter maps define an action of the free group on the letters; make
    // sure it factors through the multiplication table.
    const long order = parent.order();
    require(order * n <= 10'000'000, Errc::GroupTooLarge, "action table too large");
    a.elem_images_.assign(static_cast<std::size_t>(order), {});
    std::vector<int> idperm(static_cast<std::size_t>(n));
    for (int x = 0; x < n; ++x) idperm[static_cast<std::size_t>(x)] = x;
    int id = parent.elem_index(parent.identity());
    a.elem_images_[static_cast<std::size_t>(id)] = idperm;
    std::vector<int> queue{id};
    std::vector<bool> seen(static_cast<std::size_t>(order), false);
    seen[static_cast<std::size_t>(id)] = true;
    for (std::size_t head = 0; head < queue.size(); ++head) {
      int e = queue[head];
      const std::vector<int>& pe = a.elem_images_[static_cast<std::size_t>(e)];
      for (int l = 0; l < 2 * k; ++l) {
        int f = parent.elem_index(parent.multiply(parent.letter_elem(l), parent.elem_at(e)));
        std::vector<int> pf(static_cast<std::size_t>(n));
        for (int x = 0; x < n; ++x)
          pf[static_cast<std::size_t>(x)] =
              a.act_letter(l, pe[static_cast<std::size_t>(x)]);
        if (!seen[static_cast<std::size_t>(f)]) {
          seen[static_cast<std::size_t>(f)] = true;
          a.elem_images_[static_cast<std::size_t>(f)] = std::move(pf);
          queue.push_back(f);
        } else {
          require(a.elem_images_[static_cast<std::size_t>(f)] == pf,
                  Errc::ActionNotWellDefined,
                  "letter action does not factor through the group");
        }
      }
    }
  }
  return a;
}

FinitePmpAction FinitePmpAction::coset_action(const Subgroup& h) {
  const MarkedGroup& g = h.parent();
  if (g.family() == Family::Free) {
    long idx = h.index();
    require(idx > 0, Errc::IndexOverflow, "coset action needs a finite-index subgroup");
    // Rows of the right-coset table; g acts on Hx by Hx g^-1, a left action.
    CosetTable t;
    if (const auto* ct = std::get_if<CosetTable>(&h.rep())) {
      t = *ct;
    } else {
      fail(Errc::IncompleteTable, "subgroup has no complete coset table");
    }
    int n = t.rows();
    std::vector<std::vector<int>> gens;
    for (int i = 0; i < g.rank(); ++i) {
      std::vector<int> p(static_cast<std::size_t>(n));
      for (int v = 0; v < n; ++v) p[static_cast<std::size_t>(v)] = t.step(v, 2 * i + 1);
      gens.push_back(std::move(p));
    }
    std::vector<Rat> w(static_cast<std::size_t>(n), rat(1, n));
    return from_generator_maps(g, std::move(gens), std::move(w));
  }
  require(g.family() == Family::Finite, Errc::FamilyMismatch,
          "coset actions support finite and free parents");
  const long order = g.order();
  const auto& members = std::get<Subgroup::ElementSet>(h.rep()).idx;
  std::vector<int> coset_of(static_cast<std::size_t>(order), -1);
  std::vector<int> rep;
  for (int x = 0; x < order; ++x) {
    if (coset_of[static_cast<std::size_t>(x)] != -1) continue;
    int c = static_cast<int>(rep.size());
    rep.push_back(x);
    for (int m : members) {
      int y = g.elem_index(g.multiply(g.elem_at(x), g.elem_at(m)));
      coset_of[static_cast<std::size_t>(y)] = c;
    }
  }
  int n = static_cast<int>(rep.size());
  std::vector<std::vector<int>> gens;
  for (int i = 0; i < g.rank(); ++i) {
    std::vector<int> p(static_cast<std::size_t>(n));
    for (int c = 0; c < n; ++c) {
      int y = g.elem_index(g.multiply(g.generator(i), g.elem_at(rep[static_cast<std::size_t>(c)])));
      p[static_cast<std::size_t>(c)] = coset_of[static_cast<std::size_t>(y)];
    }
    gens.push_back(std::move(p));
  }
  std::vector<Rat> w(static_cast<std::size_t>(n), rat(1, n));
  return from_generator_maps(g, std::move(gens), std::move(w));
}

FinitePmpAction FinitePmpAction::disjoint_union(const std::vector<FinitePmpAction>& parts,
                                                const std::vector<Rat>& part_weights) {
  require(!parts.empty(), Errc::EmptyMeasure, "union of zero actions");
  require(parts.size() == part_weights.size(), Errc::InvalidMeasure,
          "one weight per action required");
  const MarkedGroup& g = parts.front().parent();
  int total_points = 0;
  for (const FinitePmpAction& p : parts) {
    require(p.parent().same_group(g), Errc::FamilyMismatch,
            "actions have different parents");
    total_points += p.points();
  }
  std::vector<std::vector<int>> gens(static_cast<std::size_t>(g.rank()));
  for (auto& p : gens) p.assign(static_cast<std::size_t>(total_points), 0);
  std::vector<Rat> weights;
  int base = 0;
  for (std::size_t pi = 0; pi < parts.size(); ++pi) {
    const FinitePmpAction& p = parts[pi];
    require(part_weights[pi] > 0, Errc::InvalidMeasure, "part weights must be positive");
    for (int i = 0; i < g.rank(); ++i)
      for (int x = 0; x < p.points(); ++x)
        gens[static_cast<std::size_t>(i)][static_cast<std::size_t>(base + x)] =
            base + p.act_letter(2 * i, x);
    for (int x = 0; x < p.points(); ++x)
      weights.push_back(part_weights[pi] * p.weights()[static_cast<std::size_t>(x)]);
    base += p.points();
  }
  return from_generator_maps(g, std::move(gens), std::move(weights));
}

int FinitePmpAction::act_letter(int letter, int x) const {
  return letter_images_[static_cast<std::size_t>(letter)][static_cast<std::size_t>(x)];
}

int FinitePmpAction::act(const Elem& g, int x) const {
  if (parent_.family() == Family::Finite)
    return elem_images_[static_cast<std::size_t>(parent_.elem_index(g))]
                       [static_cast<std::size_t>(x)];
  const Word& w = std::get<Word>(g.v);
  for (auto it = w.rbegin(); it != w.rend(); ++it) x = act_letter(*it, x);
  return x;
}

Subgroup FinitePmpAction::stabilizer(int x) const {
  require(x >= 0 && x < npoints_, Errc::EmptySet, "point out of range");
  if (parent_.family() == Family::Finite) {
    std::vector<int> idx;
    for (int e = 0; e < static_cast<int>(elem_images_.size()); ++e)
      if (elem_images_[static_cast<std::size_t>(e)][static_cast<std::size_t>(x)] == x)
        idx.push_back(e);
    return Subgroup::from_indices(parent_, std::move(idx));
  }
  // Stabilizers in a free group: the coset table of the orbit, based at x.
  // Rows index orbit points, row 0 is x; letter l of the table moves Hv to
  // Hvl, which matches acting by l^-1 on points.
  std::vector<int> pos(static_cast<std::size_t>(npoints_), -1);
  std::vector<int> orbit{x};
  pos[static_cast<std::size_t>(x)] = 0;
  for (std::size_t head = 0; head < orbit.size(); ++head) {
    int v = orbit[head];
    for (int l = 0; l < 2 * parent_.rank(); ++l) {
      int u = act_letter(l, v);
      if (pos[static_cast<std::size_t>(u)] == -1) {
        pos[static_cast<std::size_t>(u)] = static_cast<int>(orbit.size());
        orbit.push_back(u);
      }
    }
  }
  CosetTable t;
  t.k = parent_.rank();
  t.next.assign(orbit.size() * static_cast<std::size_t>(2 * t.k), -1);
  for (std::size_t v = 0; v < orbit.size(); ++v)
    for (int l = 0; l < 2 * t.k; ++l)
      t.next[v * static_cast<std::size_t>(2 * t.k) + static_cast<std::size_t>(l)] =
          pos[static_cast<std::size_t>(act_letter(l ^ 1, orbit[v]))];
  return Subgroup::from_coset_table(parent_, std::move(t));
}

IrsDistribution stabilizer_pushforward(const FinitePmpAction& action) {
  std::map<std::string, IrsAtom> fibers;
  for (int x = 0; x < action.points(); ++x) {
    const Rat& w = action.weights()[static_cast<std::size_t>(x)];
    if (w == 0) continue;
    Subgroup st = action.stabilizer(x);
    std::string key = st.canonical_key();
    auto it = fibers.find(key);
    if (it == fibers.end())
      fibers.emplace(std::move(key), IrsAtom{std::move(st), w});
    else
      it->second.weight += w;
  }
  std::vector<IrsAtom> atoms;
  for (auto& [key, atom] : fibers) atoms.push_back(std::move(atom));
  return IrsDistribution::from_atoms(action.parent(), std::move(atoms));
}

InvarianceCheck check_conjugation_invariance(const IrsDistribution& mu) {
  const MarkedGroup& g = mu.parent();
  std::map<std::string, Rat> weight_by_key;
  for (const IrsAtom& a : mu.atoms()) weight_by_key[a.subgroup.canonical_key()] = a.weight;
  for (int i = 0; i < g.rank(); ++i) {
    Elem s = g.generator(i);
    for (const IrsAtom& a : mu.atoms()) {
      Subgroup conj = a.subgroup.conjugated(s);
      auto it = weight_by_key.find(conj.canonical_key());
      if (it == weight_by_key.end() || it->second != a.weight) {
        InvarianceCheck out;
        out.invariant = false;
        out.witness_generator = s;
        out.witness_atom = a.subgroup;
        out.detail = it == weight_by_key.end()
                         ? "conjugate of an atom leaves the support"
                         : "conjugate atom carries a different weight";
        return out;
      }
    }
  }
  InvarianceCheck out;
  out.invariant = true;
  out.detail = "pushforward by every generator preserves the measure";
  return out;
}

Rat inclusion_probability(const IrsDistribution& mu, const Elem& h) {
  Rat total = 0;
  for (const IrsAtom& a : mu.atoms())
    if (a.subgroup.contains(h)) total += a.weight;
  return total;
}

Subgroup irs_normal_closure(const IrsDistribution& mu, long index_bound) {
  const MarkedGroup& g = mu.parent();
  std::vector<Elem> gens;
  if (g.family() == Family::Finite) {
    std::set<int> idx;
    for (const IrsAtom& a : mu.atoms())
      for (const Elem& e : a.subgroup.elements()) idx.insert(g.elem_index(e));
    for (int i : idx) gens.push_back(g.elem_at(i));
    return Subgroup::generated_by(g, gens);
  }
  require(g.family() == Family::Free, Errc::FamilyMismatch,
          "closure needs a finite or free parent");
  for (const IrsAtom& a : mu.atoms())
    for (const Word& w : a.subgroup.generator_words()) gens.push_back(Elem{w});
  Subgroup join = Subgroup::generated_by(g, gens);
  if (join.core_rank() == 0) return join;  // trivial subgroup
  long idx = join.index();
  require(idx >= 0 && idx <= index_bound, Errc::ClosureExceedsBound,
          "closure exceeds the index bound");
  return join;
}

bool is_spanning(const IrsDistribution& mu, long index_bound) {
  Subgroup n = irs_normal_closure(mu, index_bound);
  if (mu.parent().family() == Family::Finite) return n.order() == mu.parent().order();
  return n.index() == 1;
}

std::vector<ErgodicComponent> ergodic_components(const IrsDistribution& mu) {
  InvarianceCheck inv = check_conjugation_invariance(mu);
  require(inv.invariant, Errc::NotInvariantMeasure,
          "ergodic decomposition needs an invariant measure: " + inv.detail);
  const MarkedGroup& g = mu.parent();
  const auto& atoms = mu.atoms();
  std::map<std::string, std::size_t> index_of;
  for (std::size_t i = 0; i < atoms.size(); ++i)
    index_of[atoms[i].subgroup.canonical_key()] = i;
  std::vector<int> comp(atoms.size(), -1);
  std::vector<ErgodicComponent> out;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (comp[i] != -1) continue;
    int c = static_cast<int>(out.size());
    std::vector<std::size_t> queue{i};
    comp[i] = c;
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const Subgroup& cur = atoms[queue[head]].subgroup;
      for (int gi = 0; gi < g.rank(); ++gi) {
        std::size_t j = index_of.at(cur.conjugated(g.generator(gi)).canonical_key());
        if (comp[j] == -1) {
          comp[j] = c;
          queue.push_back(j);
        }
      }
    }
    Rat total = 0;
    for (std::size_t j : queue) total += atoms[j].weight;
    std::vector<IrsAtom> restricted;
    for (std::size_t j : queue)
      restricted.push_back({atoms[j].subgroup, atoms[j].weight / total});
    out.push_back({IrsDistribution::from_atoms(g, std::move(restricted)), total});
  }
  return out;
}

AmenableIrsReport amenable_irs_radical_check(const IrsDistribution& mu) {
  bool all_amenable = true;
  for (const IrsAtom& a : mu.atoms())
    if (!amenable_flag(a.subgroup)) all_amenable = false;
  Subgroup radical = amenable_radical(mu.parent());
  bool contained = true;
  for (const IrsAtom& a : mu.atoms())
    if (!radical.contains_subgroup(a.subgroup)) contained = false;
  return AmenableIrsReport{all_amenable, radical, contained, !all_amenable || contained};
}

std::string serialize_irs(const IrsDistribution& mu) {
  std::ostringstream out;
  out << "irs v1\n";
  out << "atoms " << mu.atoms().size() << "\n";
  for (const IrsAtom& a : mu.atoms()) {
    out << "weight " << rat_str(a.weight) << "\n";
    out << serialize_subgroup(a.subgroup);
  }
  return out.str();
}

IrsDistribution parse_irs(const MarkedGroup& parent, std::istream& in) {
  std::string line;
  auto next_line = [&]() {
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) return true;
    }
    return false;
  };
  require(next_line() && line == "irs v1", Errc::ParseError, "expected 'irs v1' header");
  require(next_line() && line.rfind("atoms ", 0) == 0, Errc::ParseError,
          "expected atom count");
  long count = std::stol(line.substr(6));
  require(count > 0, Errc::EmptyMeasure, "a distribution needs at least one atom");
  std::vector<IrsAtom> atoms;
  for (long i = 0; i < count; ++i) {
    require(next_line() && line.rfind("weight ", 0) == 0, Errc::ParseError,
            "expected atom weight");
    Rat w = rat_parse(line.substr(7));
    atoms.push_back({parse_subgroup(parent, in), w});
  }
  return IrsDistribution::from_atoms(parent, std::move(atoms));
}

IrsDistribution parse_irs(const MarkedGroup& parent, const std::string& text) {
  std::istringstream in(text);
  return parse_irs(parent, in);
}

}  // namespace irslab
