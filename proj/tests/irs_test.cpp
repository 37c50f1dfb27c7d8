#include "irslab/irs.hpp"

#include <random>

#include "doctest.h"

using namespace irslab;

namespace {

bool same_dist(const IrsDistribution& a, const IrsDistribution& b) {
  if (a.atoms().size() != b.atoms().size()) return false;
  for (std::size_t i = 0; i < a.atoms().size(); ++i) {
    if (!(a.atoms()[i].subgroup == b.atoms()[i].subgroup)) return false;
    if (a.atoms()[i].weight != b.atoms()[i].weight) return false;
  }
  return true;
}

FinitePmpAction natural_s3() {
  MarkedGroup s3 = MarkedGroup::symmetric_group(3);
  return FinitePmpAction::from_generator_maps(
      s3, {{1, 0, 2}, {1, 2, 0}}, {rat(1, 3), rat(1, 3), rat(1, 3)});
}

// Smallest normal subgroup containing every atom, from the full lattice.
Subgroup brute_min_normal(const IrsDistribution& mu) {
  auto subs = enumerate_subgroups(mu.parent());
  const Subgroup* best = nullptr;
  for (const Subgroup& n : subs) {
    if (!n.is_normal()) continue;
    bool all = true;
    for (const IrsAtom& a : mu.atoms())
      if (!n.contains_subgroup(a.subgroup)) {
        all = false;
        break;
      }
    if (all && (best == nullptr || n.order() < best->order())) best = &n;
  }
  REQUIRE(best != nullptr);
  return *best;
}

// Mixture that merges colliding atoms, for building random invariant measures.
IrsDistribution mix(const MarkedGroup& g,
                    const std::vector<std::pair<IrsDistribution, Rat>>& parts) {
  std::vector<IrsAtom> atoms;
  for (const auto& [dist, scale] : parts)
    for (const IrsAtom& a : dist.atoms()) {
      bool merged = false;
      for (IrsAtom& out : atoms)
        if (out.subgroup == a.subgroup) {
          out.weight += scale * a.weight;
          merged = true;
          break;
        }
      if (!merged) atoms.push_back({a.subgroup, scale * a.weight});
    }
  return IrsDistribution::from_atoms(g, atoms);
}

}  // namespace

TEST_CASE("stabilizers of the natural action push to the transposition class") {
  MarkedGroup s3 = MarkedGroup::symmetric_group(3);
  IrsDistribution mu = stabilizer_pushforward(natural_s3());
  REQUIRE(mu.atoms().size() == 3);
  for (const IrsAtom& a : mu.atoms()) {
    CHECK(a.weight == rat(1, 3));
    CHECK(a.subgroup.order() == 2);
  }
  CHECK(same_dist(mu, IrsDistribution::uniform_on_conjugates(
                          Subgroup::generated_by(s3, {s3.parse_elem("(0 1)")}))));
  CHECK(check_conjugation_invariance(mu).invariant);
}

TEST_CASE("degenerate actions push to dirac measures") {
  MarkedGroup s3 = MarkedGroup::symmetric_group(3);
  auto trivial_point = FinitePmpAction::from_generator_maps(s3, {{0}, {0}}, {rat(1)});
  IrsDistribution whole = stabilizer_pushforward(trivial_point);
  CHECK(same_dist(whole, IrsDistribution::dirac(Subgroup::whole(s3))));

  MarkedGroup z2 = MarkedGroup::cyclic_group(2);
  auto free_action = FinitePmpAction::from_generator_maps(
      z2, {{1, 0}}, {rat(1, 2), rat(1, 2)});
  IrsDistribution triv = stabilizer_pushforward(free_action);
  CHECK(same_dist(triv, IrsDistribution::dirac(Subgroup::trivial(z2))));
}

TEST_CASE("actions reject non-bijections, bad measures and fake actions") {
  MarkedGroup s3 = MarkedGroup::symmetric_group(3);
  try {
    FinitePmpAction::from_generator_maps(s3, {{0, 0, 2}, {1, 2, 0}},
                                         {rat(1, 3), rat(1, 3), rat(1, 3)});
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::ActionNotWellDefined);
  }
  CHECK_THROWS_AS(FinitePmpAction::from_generator_maps(
                      s3, {{1, 0, 2}, {1, 2, 0}}, {rat(1, 2), rat(1, 4), rat(1, 4)}),
                  Error);
  // order-3 generator forced onto an order-2 permutation
  try {
    FinitePmpAction::from_generator_maps(s3, {{1, 0}, {1, 0}}, {rat(1, 2), rat(1, 2)});
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::ActionNotWellDefined);
  }
}

TEST_CASE("coset actions recover uniform conjugate measures") {
  for (MarkedGroup g : {MarkedGroup::symmetric_group(4), MarkedGroup::dihedral_group(4),
                        MarkedGroup::alternating_group(4)}) {
    for (const Subgroup& h : enumerate_subgroups(g)) {
      IrsDistribution push = stabilizer_pushforward(FinitePmpAction::coset_action(h));
      CHECK(same_dist(push, IrsDistribution::uniform_on_conjugates(h)));
    }
  }
}

TEST_CASE("free-group coset actions yield subgroup stabilizers") {
  MarkedGroup f2 = MarkedGroup::free_group(2);
  MarkedGroup z2 = MarkedGroup::cyclic_group(2);
  Subgroup ker = Subgroup::kernel_of_hom(f2, z2, {z2.parse_elem("1"), z2.parse_elem("0")});
  FinitePmpAction act = FinitePmpAction::coset_action(ker);
  CHECK(act.points() == 2);
  CHECK(act.stabilizer(0) == ker);
  IrsDistribution push = stabilizer_pushforward(act);
  CHECK(same_dist(push, IrsDistribution::dirac(ker)));  // kernel is normal

  // Point stabilizers of a transitive action on three points: conjugate
  // index-3 subgroups, none of them normal.
  FinitePmpAction three = FinitePmpAction::from_generator_maps(
      f2, {{1, 0, 2}, {1, 2, 0}}, {rat(1, 3), rat(1, 3), rat(1, 3)});
  IrsDistribution mu = stabilizer_pushforward(three);
  REQUIRE(mu.atoms().size() == 3);
  for (const IrsAtom& a : mu.atoms()) {
    CHECK(a.subgroup.index() == 3);
    CHECK(!a.subgroup.is_normal());
    CHECK(a.weight == rat(1, 3));
  }
  CHECK(check_conjugation_invariance(mu).invariant);
}

TEST_CASE("invariance certificates and witnesses") {
  MarkedGroup s3 = MarkedGroup::symmetric_group(3);
  Subgroup a3 = Subgroup::generated_by(s3, {s3.parse_elem("(0 1 2)")});
  CHECK(check_conjugation_invariance(IrsDistribution::dirac(a3)).invariant);

  Subgroup h = Subgroup::generated_by(s3, {s3.parse_elem("(0 1)")});
  CHECK(check_conjugation_invariance(IrsDistribution::uniform_on_conjugates(h)).invariant);

  IrsDistribution bad = IrsDistribution::from_atoms(
      s3, {{h, rat(1, 2)}, {a3, rat(1, 2)}});
  InvarianceCheck check = check_conjugation_invariance(bad);
  REQUIRE(!check.invariant);
  REQUIRE(check.witness_atom.has_value());
  CHECK(*check.witness_atom == h);
  CHECK(s3.name(*check.witness_generator) == "(0 1 2)");
}

TEST_CASE("inclusion probabilities sum atom weights exactly") {
  MarkedGroup s3 = MarkedGroup::symmetric_group(3);
  IrsDistribution mu = stabilizer_pushforward(natural_s3());
  CHECK(inclusion_probability(mu, s3.identity()) == 1);
  CHECK(inclusion_probability(mu, s3.parse_elem("(0 1)")) == rat(1, 3));
  CHECK(inclusion_probability(mu, s3.parse_elem("(0 1 2)")) == 0);
}

TEST_CASE("copies of Z/2 weighted by inverse squares") {
  // Truncation at three copies: weights proportional to 1, 1/4, 1/9.
  MarkedGroup g = MarkedGroup::elementary_abelian_2(3);
  std::vector<IrsAtom> atoms;
  Rat norm = rat(1) + rat(1, 4) + rat(1, 9);
  for (int n = 1; n <= 3; ++n)
    atoms.push_back({Subgroup::generated_by(g, {g.generator(n - 1)}),
                     rat(1, static_cast<long>(n) * n) / norm});
  IrsDistribution mu = IrsDistribution::from_atoms(g, atoms);
  CHECK(check_conjugation_invariance(mu).invariant);
  CHECK(inclusion_probability(mu, g.generator(1)) == rat(9, 49));
  CHECK(inclusion_probability(mu, g.generator(0)) == rat(36, 49));
  CHECK(is_spanning(mu));
  CHECK(ergodic_components(mu).size() == 3);
}

TEST_CASE("normal closure of a measure follows the positive-inclusion formula") {
  MarkedGroup s3 = MarkedGroup::symmetric_group(3);
  IrsDistribution stab = stabilizer_pushforward(natural_s3());
  CHECK(irs_normal_closure(stab).order() == 6);
  CHECK(is_spanning(stab));

  Subgroup a3 = Subgroup::generated_by(s3, {s3.parse_elem("(0 1 2)")});
  CHECK(irs_normal_closure(IrsDistribution::dirac(a3)) == a3);
  CHECK(!is_spanning(IrsDistribution::dirac(a3)));
  CHECK(irs_normal_closure(IrsDistribution::dirac(Subgroup::trivial(s3))).order() == 1);
  CHECK(is_spanning(IrsDistribution::dirac(Subgroup::whole(s3))));
}

TEST_CASE("closure formula matches the minimal normal subgroup on the lattice") {
  std::mt19937_64 rng(11);
  for (MarkedGroup g : {MarkedGroup::symmetric_group(3), MarkedGroup::dihedral_group(4),
                        MarkedGroup::cyclic_group(4)}) {
    auto subs = enumerate_subgroups(g);
    for (int trial = 0; trial < 12; ++trial) {
      int picks = 1 + static_cast<int>(rng() % 3);
      std::vector<std::pair<IrsDistribution, Rat>> parts;
      std::vector<long> raw;
      long total = 0;
      for (int p = 0; p < picks; ++p) {
        raw.push_back(1 + static_cast<long>(rng() % 5));
        total += raw.back();
      }
      for (int p = 0; p < picks; ++p) {
        const Subgroup& h = subs[rng() % subs.size()];
        parts.push_back({IrsDistribution::uniform_on_conjugates(h),
                         rat(raw[static_cast<std::size_t>(p)], total)});
      }
      IrsDistribution mu = mix(g, parts);
      REQUIRE(check_conjugation_invariance(mu).invariant);
      CHECK(irs_normal_closure(mu) == brute_min_normal(mu));
    }
  }
}

TEST_CASE("ergodic components are single conjugation orbits") {
  MarkedGroup s3 = MarkedGroup::symmetric_group(3);
  Subgroup h = Subgroup::generated_by(s3, {s3.parse_elem("(0 1)")});
  Subgroup a3 = Subgroup::generated_by(s3, {s3.parse_elem("(0 1 2)")});
  IrsDistribution cls = IrsDistribution::uniform_on_conjugates(h);
  CHECK(ergodic_components(cls).size() == 1);
  CHECK(ergodic_components(IrsDistribution::dirac(Subgroup::whole(s3))).size() == 1);

  IrsDistribution mixed = mix(s3, {{IrsDistribution::dirac(a3), rat(1, 2)},
                                   {cls, rat(1, 2)}});
  auto comps = ergodic_components(mixed);
  REQUIRE(comps.size() == 2);
  CHECK(comps[0].weight == rat(1, 2));
  CHECK(comps[1].weight == rat(1, 2));

  // Exact reconstruction: the weighted sum of components is the measure.
  std::vector<std::pair<IrsDistribution, Rat>> back;
  for (const auto& c : comps) back.push_back({c.distribution, c.weight});
  CHECK(same_dist(mix(s3, back), mixed));

  IrsDistribution bad = IrsDistribution::from_atoms(
      s3, {{h, rat(1, 2)}, {a3, rat(1, 2)}});
  CHECK_THROWS_AS(ergodic_components(bad), Error);
}

TEST_CASE("pushforwards of random unions of coset actions stay invariant") {
  std::mt19937_64 rng(23);
  for (MarkedGroup g : {MarkedGroup::symmetric_group(4), MarkedGroup::dihedral_group(4)}) {
    auto subs = enumerate_subgroups(g);
    for (int trial = 0; trial < 20; ++trial) {
      int picks = 1 + static_cast<int>(rng() % 3);
      std::vector<FinitePmpAction> parts;
      std::vector<Rat> weights;
      long total = 0;
      std::vector<long> raw;
      for (int p = 0; p < picks; ++p) {
        raw.push_back(1 + static_cast<long>(rng() % 7));
        total += raw.back();
      }
      for (int p = 0; p < picks; ++p) {
        parts.push_back(FinitePmpAction::coset_action(subs[rng() % subs.size()]));
        weights.push_back(rat(raw[static_cast<std::size_t>(p)], total));
      }
      FinitePmpAction u = FinitePmpAction::disjoint_union(parts, weights);
      IrsDistribution mu = stabilizer_pushforward(u);
      CHECK(check_conjugation_invariance(mu).invariant);
      CHECK(irs_normal_closure(mu) == brute_min_normal(mu));
    }
  }
}

TEST_CASE("amenability reports against the radical") {
  MarkedGroup s4 = MarkedGroup::symmetric_group(4);
  IrsDistribution any = IrsDistribution::uniform_on_conjugates(
      Subgroup::generated_by(s4, {s4.parse_elem("(0 1)")}));
  AmenableIrsReport rep = amenable_irs_radical_check(any);
  CHECK(rep.is_amenable_irs);
  CHECK(rep.radical.order() == 24);
  CHECK(rep.contained_in_radical);
  CHECK(rep.theorem_consistent);

  MarkedGroup f2 = MarkedGroup::free_group(2);
  MarkedGroup z2 = MarkedGroup::cyclic_group(2);
  Subgroup ker = Subgroup::kernel_of_hom(f2, z2, {z2.parse_elem("1"), z2.parse_elem("0")});
  AmenableIrsReport free_rep =
      amenable_irs_radical_check(IrsDistribution::uniform_on_conjugates(ker));
  CHECK(!free_rep.is_amenable_irs);
  CHECK(!free_rep.contained_in_radical);
  CHECK(free_rep.theorem_consistent);  // vacuously

  AmenableIrsReport triv_rep =
      amenable_irs_radical_check(IrsDistribution::dirac(Subgroup::trivial(f2)));
  CHECK(triv_rep.is_amenable_irs);
  CHECK(triv_rep.contained_in_radical);
  CHECK(triv_rep.theorem_consistent);

  // A nontrivial cyclic atom is never conjugation-invariant as a Dirac.
  Subgroup cyc = Subgroup::generated_by(f2, {f2.parse_elem("ab")});
  CHECK(!check_conjugation_invariance(IrsDistribution::dirac(cyc)).invariant);
  CHECK_THROWS_AS(IrsDistribution::uniform_on_conjugates(cyc, 50), Error);
}

TEST_CASE("measure text blocks round-trip") {
  MarkedGroup s3 = MarkedGroup::symmetric_group(3);
  IrsDistribution mu = stabilizer_pushforward(natural_s3());
  IrsDistribution back = parse_irs(s3, serialize_irs(mu));
  CHECK(same_dist(back, mu));

  MarkedGroup f2 = MarkedGroup::free_group(2);
  MarkedGroup z2 = MarkedGroup::cyclic_group(2);
  Subgroup ker = Subgroup::kernel_of_hom(f2, z2, {z2.parse_elem("1"), z2.parse_elem("1")});
  IrsDistribution free_mu = mix(
      f2, {{IrsDistribution::dirac(ker), rat(2, 5)},
           {IrsDistribution::dirac(Subgroup::trivial(f2)), rat(3, 5)}});
  CHECK(same_dist(parse_irs(f2, serialize_irs(free_mu)), free_mu));

  CHECK_THROWS_AS(parse_irs(s3, "irs v1\natoms 0\n"), Error);
  CHECK_THROWS_AS(
      parse_irs(s3, "irs v1\natoms 1\nweight 2/3\n" +
                        serialize_subgroup(Subgroup::whole(s3))),
      Error);
}
