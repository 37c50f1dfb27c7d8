#include "irslab/acceptance.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <tuple>

#include "irslab/cone.hpp"
#include "irslab/irs.hpp"
#include "irslab/spectral.hpp"
#include "irslab/tree_group.hpp"

namespace irslab {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_s(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string f17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string frac(const Rat& q) {
  return q.get_num().get_str() + "/" + q.get_den().get_str();
}

// Tracks the verdict and remembers the first thing that went wrong.
struct Gate {
  bool pass = true;
  std::string first_failure;
  void check(bool ok, const std::string& what) {
    if (!ok && pass) first_failure = what;
    if (!ok) pass = false;
  }
};

std::string with_failure(const Gate& gate, const std::string& summary) {
  if (gate.pass) return summary;
  return summary + "; first failure: " + gate.first_failure;
}

// Cycle fixture shared with the runner: a rotates the n-cycle, b is trivial.
SchreierGraph cycle_graph(int n) {
  std::vector<int> rot(static_cast<std::size_t>(n)), id(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    rot[static_cast<std::size_t>(i)] = (i + 1) % n;
    id[static_cast<std::size_t>(i)] = i;
  }
  return make_schreier_graph(2, {rot, id});
}

// ---- criterion 1: cycle-family spectra ------------------------------------

CriterionResult criterion_cycle_spectra() {
  auto start = Clock::now();
  Gate gate;
  std::ostringstream payload;
  double worst = 0;
  for (int n : {4, 8, 16, 32, 64}) {
    double rho = markov_spectral_radius_rho0(cycle_graph(n));
    double expect = (1.0 + std::cos(2.0 * M_PI / n)) / 2.0;
    double dev = std::fabs(rho - expect);
    worst = std::max(worst, dev);
    payload << "n=" << n << " rho0=" << f17(rho) << " closed_form=" << f17(expect) << "\n";
    gate.check(dev <= 1e-9, "n=" + std::to_string(n) + " deviates by " + f17(dev));
  }
  double two = markov_spectral_radius_rho0(cycle_graph(2));
  payload << "two_vertex_rho0=" << f17(two) << "\n";
  gate.check(std::fabs(two) <= 1e-12, "two-vertex rho0 = " + f17(two));

  CriterionResult r;
  r.seconds = elapsed_s(start);
  gate.check(r.seconds < 1.0, "runtime exceeded 1 s");
  r.pass = gate.pass;
  r.detail = with_failure(gate, "max closed-form deviation " + f17(worst) +
                                    ", two-vertex rho0 " + f17(two));
  r.payload = payload.str();
  return r;
}

// ---- criterion 2: Cayley interval ------------------------------------------

CriterionResult criterion_cayley_interval() {
  auto start = Clock::now();
  Gate gate;
  std::ostringstream payload;
  MarkedGroup f2 = MarkedGroup::free_group(2);
  const double target = std::sqrt(3.0) / 2.0;
  double prev_width = 2.0;
  SpectralInterval last{};
  for (int R = 4; R <= 14; ++R) {
    SpectralInterval iv = cayley_spectral_radius_estimate(f2, R);
    double width = iv.upper - iv.lower;
    payload << "R=" << R << " lower=" << f17(iv.lower) << " upper=" << f17(iv.upper)
            << "\n";
    gate.check(width <= prev_width + 1e-15,
               "width grew at R=" + std::to_string(R) + " (" + f17(width) + " after " +
                   f17(prev_width) + ")");
    prev_width = width;
    last = iv;
  }
  gate.check(last.lower <= target && target <= last.upper,
             "interval at R=14 misses sqrt(3)/2");
  gate.check(last.upper - last.lower <= 0.04,
             "width at R=14 is " + f17(last.upper - last.lower));

  CriterionResult r;
  r.seconds = elapsed_s(start);
  gate.check(r.seconds < 10.0, "runtime exceeded 10 s");
  r.pass = gate.pass;
  r.detail = with_failure(gate, "R=14 interval [" + f17(last.lower) + ", " +
                                    f17(last.upper) + "], width " +
                                    f17(last.upper - last.lower));
  r.payload = payload.str();
  return r;
}

// ---- criterion 3: random Schreier family -----------------------------------

CriterionResult criterion_random_family() {
  auto start = Clock::now();
  Gate gate;
  std::ostringstream payload;
  MarkedGroup f2 = MarkedGroup::free_group(2);
  // Girth 6 = 2R+2 makes every radius-2 ball an honest tree ball; shorter
  // girths leave relation cycles visible inside the ball.
  const int min_girth = 6;

  int rho_ok = 0, consistent = 0;
  std::vector<Rat> dists;
  for (int seed = 1; seed <= 20; ++seed) {
    SchreierGraph g = random_schreier_graph(2, 200, static_cast<std::uint64_t>(seed),
                                            min_girth);
    double rho = markov_spectral_radius_rho0(g);
    Rat bs = bs_distance_to_cayley(bs_local_statistics(g, 2), f2);
    dists.push_back(bs);
    if (rho <= 0.95) ++rho_ok;
    LocalApproxReport rep = local_approximation_report({subgroup_of_graph(f2, g)}, 2, 0.1);
    if (rep.theorem_consistent) ++consistent;
    payload << "seed=" << seed << " rho0=" << f17(rho) << " bs=" << frac(bs)
            << " consistent=" << (rep.theorem_consistent ? 1 : 0) << "\n";
  }
  std::vector<Rat> sorted = dists;
  std::sort(sorted.begin(), sorted.end());
  Rat median = (sorted[9] + sorted[10]) * rat(1, 2);
  payload << "median_bs=" << frac(median) << " rho_ok=" << rho_ok << "\n";
  gate.check(rho_ok >= 18, "rho0 <= 0.95 in only " + std::to_string(rho_ok) + "/20");
  gate.check(median <= rat(1, 10), "median bs distance " + frac(median));
  gate.check(consistent == 20,
             "theorem_consistent failed on " + std::to_string(20 - consistent) + " trials");

  std::vector<Subgroup> cycles;
  for (int n : {4, 8, 16, 32, 64}) cycles.push_back(subgroup_of_graph(f2, cycle_graph(n)));
  LocalApproxReport cyc = local_approximation_report(cycles, 2, 0.1);
  payload << "cycle_hypothesis=" << (cyc.hypothesis_observed ? 1 : 0)
          << " cycle_consistent=" << (cyc.theorem_consistent ? 1 : 0) << "\n";
  gate.check(!cyc.hypothesis_observed, "cycle family unexpectedly satisfies the bound");
  gate.check(cyc.theorem_consistent, "cycle family report inconsistent");

  CriterionResult r;
  r.seconds = elapsed_s(start);
  gate.check(r.seconds < 60.0, "runtime exceeded 60 s");
  r.pass = gate.pass;
  r.detail = with_failure(gate, "rho0 <= 0.95 in " + std::to_string(rho_ok) +
                                    "/20, median bs " + frac(median) + ", " +
                                    std::to_string(consistent) + "/20 trials consistent");
  r.payload = payload.str();
  return r;
}

// ---- criterion 4: Haar ratios ----------------------------------------------

CriterionResult criterion_haar_ratios() {
  auto start = Clock::now();
  Gate gate;
  std::ostringstream payload;
  // Every truncation with at most 2^15 elements (arity capped at 4).
  const std::vector<std::pair<int, int>> shapes = {{2, 1}, {2, 2}, {2, 3}, {2, 4},
                                                   {3, 1}, {3, 2}, {4, 1}};
  const long fact[5] = {1, 1, 2, 6, 24};
  std::vector<MarkedGroup> groups;
  for (auto [a, d] : shapes) groups.push_back(MarkedGroup::tree_group(a, d));

  std::mt19937_64 rng(401);
  auto rand_union = [&](const MarkedGroup& t) {
    int level = static_cast<int>(rng() % static_cast<std::uint64_t>(t.tree_depth() + 1));
    int count = 1 + static_cast<int>(rng() % 3);
    std::vector<Elem> reps;
    for (int i = 0; i < count; ++i) {
      Portrait p(static_cast<std::size_t>(t.tree_nodes()));
      for (auto& x : p)
        x = static_cast<std::uint8_t>(rng() % static_cast<std::uint64_t>(fact[t.tree_arity()]));
      reps.push_back(Elem{std::move(p)});
    }
    return make_coset_union(t, level, reps);
  };

  int checked = 0;
  std::vector<int> per_shape(shapes.size(), 0);
  while (checked < 500) {
    for (std::size_t s = 0; s < shapes.size() && checked < 500; ++s) {
      const MarkedGroup& t = groups[s];
      CosetUnion o = rand_union(t), l = rand_union(t), m = rand_union(t);
      Rat ratio = haar_ratio(o, l);
      Rat by_count = rat(static_cast<long>(coset_union_elements(o).size()),
                         static_cast<long>(coset_union_elements(l).size()));
      gate.check(ratio == by_count, "count mismatch on pair " + std::to_string(checked));
      gate.check(ratio * haar_ratio(l, m) == haar_ratio(o, m),
                 "cocycle identity failed on pair " + std::to_string(checked));
      if (checked % 25 == 0)
        payload << "pair=" << checked << " shape=" << t.tree_arity() << ","
                << t.tree_depth() << " ratio=" << frac(ratio) << "\n";
      ++per_shape[s];
      ++checked;
    }
  }
  for (std::size_t s = 0; s < shapes.size(); ++s)
    payload << "shape=" << shapes[s].first << "," << shapes[s].second
            << " pairs=" << per_shape[s] << "\n";

  CriterionResult r;
  r.seconds = elapsed_s(start);
  r.pass = gate.pass;
  r.detail = with_failure(gate, std::to_string(checked) +
                                    " seeded pairs across 7 truncations, all exact");
  r.payload = payload.str();
  return r;
}

// ---- criterion 5: Folner certificates --------------------------------------

Rat brute_worst_ratio(const MarkedGroup& g, const std::vector<Portrait>& all,
                      const std::vector<Portrait>& u) {
  Rat worst(0);
  for (const Portrait& q : all) {
    std::vector<Portrait> moved;
    for (const Portrait& x : u)
      moved.push_back(std::get<Portrait>(g.multiply(Elem{q}, Elem{x}).v));
    std::sort(moved.begin(), moved.end());
    std::vector<Portrait> common;
    std::set_intersection(moved.begin(), moved.end(), u.begin(), u.end(),
                          std::back_inserter(common));
    worst = std::max(worst, rat(static_cast<long>(2 * (u.size() - common.size())),
                                static_cast<long>(u.size())));
  }
  return worst;
}

CriterionResult criterion_folner() {
  auto start = Clock::now();
  Gate gate;
  std::ostringstream payload;
  const long fact[5] = {1, 1, 2, 6, 24};
  // (arity, depth, deepest min_level worth forcing).
  const std::vector<std::tuple<int, int, int>> shapes = {
      {2, 2, 2}, {2, 3, 3}, {3, 1, 1}, {3, 2, 2}, {4, 1, 1}, {2, 4, 1}};
  std::vector<MarkedGroup> groups;
  for (auto [a, d, ml] : shapes) groups.push_back(MarkedGroup::tree_group(a, d));

  std::mt19937_64 rng(501);
  auto rand_elem = [&](const MarkedGroup& t) {
    Portrait p(static_cast<std::size_t>(t.tree_nodes()));
    for (auto& x : p)
      x = static_cast<std::uint8_t>(rng() % static_cast<std::uint64_t>(fact[t.tree_arity()]));
    return Elem{std::move(p)};
  };

  int checked = 0;
  while (checked < 100) {
    for (std::size_t s = 0; s < shapes.size() && checked < 100; ++s) {
      const MarkedGroup& t = groups[s];
      std::vector<Elem> gens{rand_elem(t)};
      if (rng() % 2) gens.push_back(rand_elem(t));
      TreeSubgroup c = TreeSubgroup::generated_by(t, gens);
      std::vector<Elem> q;
      int nq = 1 + static_cast<int>(rng() % 2);
      for (int i = 0; i < nq; ++i)
        q.push_back(Elem{c.elements()[rng() % c.elements().size()]});
      int n = 1 + static_cast<int>(rng() % 6);
      int min_level = static_cast<int>(rng() % static_cast<std::uint64_t>(
                                                   std::get<2>(shapes[s]) + 1));
      FolnerOutcome out = folner_search(c, q, n, min_level);
      bool ok = out.certificate.has_value() && out.certificate->level >= min_level &&
                out.certificate->worst_ratio <= rat(1, n) &&
                folner_certificate_check(*out.certificate, c, q, n);
      gate.check(ok, "instance " + std::to_string(checked) + " failed recheck");
      if (checked % 10 == 0 && out.certificate)
        payload << "instance=" << checked << " level=" << out.certificate->level
                << " ratio=" << frac(out.certificate->worst_ratio)
                << " cosets=" << out.certificate->reps.size() << "\n";
      ++checked;
    }
  }

  // With Q = C the whole subgroup is exactly invariant, so the first level-0
  // candidate already certifies ratio 0.
  int full_ok = 0;
  for (std::size_t s = 0; s + 2 < shapes.size(); ++s) {  // skip the 2^15 truncation
    const MarkedGroup& t = groups[s];
    for (int i = 0; i < 3; ++i) {
      TreeSubgroup c = TreeSubgroup::generated_by(t, {rand_elem(t), rand_elem(t)});
      if (c.order() > 1300) continue;  // keep |Q| x |U| within budget
      std::vector<Elem> q;
      for (const Portrait& p : c.elements()) q.push_back(Elem{p});
      FolnerOutcome out = folner_search(c, q, 2, 0);
      bool ok = out.certificate.has_value() && out.certificate->worst_ratio == rat(0);
      gate.check(ok, "full test set missed the ratio-0 certificate");
      if (ok) ++full_ok;
    }
  }
  payload << "full_testset_instances=" << full_ok << "\n";

  // Diagonal fixture: exhaustive search over <= 8 singleton cosets, in the
  // search's own priority order, must land on the returned certificate.
  MarkedGroup t3 = MarkedGroup::tree_group(2, 3);
  std::vector<Elem> diag_gens = {
      Elem{Portrait{0, 1, 1, 0, 0, 0, 0}}, Elem{Portrait{0, 0, 0, 1, 0, 1, 0}},
      Elem{Portrait{0, 0, 0, 0, 1, 0, 1}}};
  TreeSubgroup diag = TreeSubgroup::generated_by(t3, diag_gens);
  FolnerOutcome deep = folner_search(diag, diag_gens, 2, 3);
  gate.check(deep.certificate.has_value() && deep.certificate->reps.size() == 7 &&
                 deep.certificate->worst_ratio == rat(2, 7),
             "diagonal fixture certificate changed");
  const std::vector<Portrait>& all = diag.elements();
  std::optional<std::vector<Portrait>> best;
  Rat best_ratio(0);
  for (std::size_t size = 1; size <= all.size() && !best; ++size)
    for (unsigned mask = 0; mask < 256 && !best; ++mask) {
      if (std::popcount(mask) != size) continue;
      std::vector<Portrait> u;
      for (std::size_t i = 0; i < all.size(); ++i)
        if (mask & (1u << i)) u.push_back(all[i]);
      Rat worst = brute_worst_ratio(t3, all, u);
      if (worst <= rat(1, 2)) {
        best = u;
        best_ratio = worst;
      }
    }
  gate.check(best.has_value() && deep.certificate.has_value() &&
                 *best == deep.certificate->reps && best_ratio == rat(2, 7),
             "brute-force certificate disagrees on the diagonal fixture");
  payload << "diagonal_brute_ratio=" << frac(best_ratio)
          << " cosets=" << (best ? best->size() : 0) << "\n";

  CriterionResult r;
  r.seconds = elapsed_s(start);
  r.pass = gate.pass;
  r.detail = with_failure(gate, std::to_string(checked) + " seeded searches rechecked, " +
                                    std::to_string(full_ok) +
                                    " full-test-set runs at ratio 0, diagonal brute force " +
                                    frac(best_ratio));
  r.payload = payload.str();
  return r;
}

// ---- criterion 6: IRS normal closure oracle --------------------------------

CriterionResult criterion_irs_closure() {
  auto start = Clock::now();
  Gate gate;
  std::ostringstream payload;
  std::vector<std::pair<std::string, MarkedGroup>> fixture;
  fixture.emplace_back("S3", MarkedGroup::symmetric_group(3));
  fixture.emplace_back("S4", MarkedGroup::symmetric_group(4));
  fixture.emplace_back("D4", MarkedGroup::dihedral_group(4));
  fixture.emplace_back("Z4", MarkedGroup::cyclic_group(4));
  fixture.emplace_back("A4", MarkedGroup::alternating_group(4));
  fixture.emplace_back("V4", MarkedGroup::elementary_abelian_2(2));
  std::vector<std::vector<Subgroup>> subs;
  for (auto& [nm, g] : fixture) subs.push_back(enumerate_subgroups(g));

  std::mt19937_64 rng(601);
  int measures = 0;
  while (measures < 200) {
    for (std::size_t s = 0; s < fixture.size() && measures < 200; ++s) {
      const MarkedGroup& g = fixture[s].second;
      // Mix one to three conjugation orbits with random rational weights;
      // the result is invariant by construction.
      int parts = 1 + static_cast<int>(rng() % 3);
      std::vector<long> raw;
      long total = 0;
      for (int i = 0; i < parts; ++i) {
        raw.push_back(1 + static_cast<long>(rng() % 4));
        total += raw.back();
      }
      std::map<std::string, IrsAtom> agg;
      for (int i = 0; i < parts; ++i) {
        const Subgroup& h = subs[s][rng() % subs[s].size()];
        IrsDistribution orbit = IrsDistribution::uniform_on_conjugates(h);
        for (const IrsAtom& atom : orbit.atoms()) {
          Rat w = atom.weight * rat(raw[static_cast<std::size_t>(i)], total);
          auto it = agg.find(atom.subgroup.canonical_key());
          if (it == agg.end())
            agg.emplace(atom.subgroup.canonical_key(), IrsAtom{atom.subgroup, w});
          else
            it->second.weight += w;
        }
      }
      std::vector<IrsAtom> atoms;
      for (auto& [key, atom] : agg) atoms.push_back(atom);
      IrsDistribution mu = IrsDistribution::from_atoms(g, std::move(atoms));
      gate.check(check_conjugation_invariance(mu).invariant,
                 "orbit mixture not invariant on " + fixture[s].first);

      Subgroup closure = irs_normal_closure(mu);
      // Brute force: the containment-minimal subgroup containing every atom.
      std::optional<Subgroup> minimal;
      int candidates = 0;
      for (const Subgroup& n : subs[s]) {
        bool covers = true;
        for (const IrsAtom& atom : mu.atoms())
          if (!n.contains_subgroup(atom.subgroup)) {
            covers = false;
            break;
          }
        if (!covers) continue;
        ++candidates;
        if (!minimal || minimal->contains_subgroup(n)) minimal = n;
      }
      bool unique_min = minimal.has_value();
      if (minimal)
        for (const Subgroup& n : subs[s]) {
          bool covers = true;
          for (const IrsAtom& atom : mu.atoms())
            if (!n.contains_subgroup(atom.subgroup)) {
              covers = false;
              break;
            }
          if (covers && !n.contains_subgroup(*minimal)) unique_min = false;
        }
      gate.check(unique_min, "carrier minimum not unique on " + fixture[s].first);
      gate.check(minimal && *minimal == closure,
                 "closure mismatch on " + fixture[s].first + " measure " +
                     std::to_string(measures));
      gate.check(closure.is_normal(), "closure not normal on " + fixture[s].first);
      if (measures % 20 == 0)
        payload << "measure=" << measures << " group=" << fixture[s].first
                << " atoms=" << mu.atoms().size() << " closure_order=" << closure.order()
                << " candidates=" << candidates << "\n";
      ++measures;
    }
  }

  int actions = 0;
  while (actions < 500) {
    for (std::size_t s = 0; s < fixture.size() && actions < 500; ++s) {
      int parts = 1 + static_cast<int>(rng() % 2);
      std::vector<FinitePmpAction> acts;
      for (int i = 0; i < parts; ++i)
        acts.push_back(FinitePmpAction::coset_action(subs[s][rng() % subs[s].size()]));
      FinitePmpAction action =
          parts == 1 ? acts[0]
                     : FinitePmpAction::disjoint_union(
                           acts, {rat(1, 2), rat(1, 2)});
      IrsDistribution mu = stabilizer_pushforward(action);
      gate.check(check_conjugation_invariance(mu).invariant,
                 "pushforward not invariant on action " + std::to_string(actions));
      if (actions % 50 == 0)
        payload << "action=" << actions << " group=" << fixture[s].first
                << " points=" << action.points() << " atoms=" << mu.atoms().size() << "\n";
      ++actions;
    }
  }

  CriterionResult r;
  r.seconds = elapsed_s(start);
  r.pass = gate.pass;
  r.detail = with_failure(gate, "200 orbit mixtures matched the brute-force minimum, " +
                                    std::to_string(actions) +
                                    " stabilizer pushforwards invariant");
  r.payload = payload.str();
  return r;
}

// ---- criterion 7: convex-cone identities -----------------------------------

Vec rand_point(std::mt19937_64& rng, int d) {
  Vec v;
  for (int i = 0; i < d; ++i)
    v.emplace_back(rat(static_cast<long>(rng() % 9) - 4, 8));
  return v;
}

ConvexBody rand_body(std::mt19937_64& rng, int d) {
  int count = 1 + static_cast<int>(rng() % 5);
  std::vector<Vec> pts;
  for (int i = 0; i < count; ++i) pts.push_back(rand_point(rng, d));
  return convex_body(d, pts);
}

Vec rand_inside(std::mt19937_64& rng, const ConvexBody& c) {
  std::vector<Rat> w;
  Rat total(0);
  for (std::size_t i = 0; i < c.verts.size(); ++i) {
    w.push_back(rat(static_cast<long>(rng() % 5)));
    total += w.back();
  }
  if (total == 0) {
    w[0] = 1;
    total = 1;
  }
  Vec p(static_cast<std::size_t>(c.d), Quad(rat(0)));
  for (std::size_t i = 0; i < c.verts.size(); ++i)
    for (std::size_t j = 0; j < p.size(); ++j)
      p[j] = p[j] + Quad(w[i] / total) * c.verts[i][j];
  return p;
}

ConvexBody rand_subbody(std::mt19937_64& rng, const ConvexBody& c) {
  int count = 1 + static_cast<int>(rng() % 3);
  std::vector<Vec> pts;
  for (int i = 0; i < count; ++i) pts.push_back(rand_inside(rng, c));
  return convex_body(c.d, pts);
}

Mat signed_perm(std::mt19937_64& rng, int d) {
  std::vector<int> perm(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) perm[static_cast<std::size_t>(i)] = i;
  std::shuffle(perm.begin(), perm.end(), rng);
  Mat m(static_cast<std::size_t>(d), Vec(static_cast<std::size_t>(d), Quad(rat(0))));
  for (int i = 0; i < d; ++i)
    m[static_cast<std::size_t>(i)][static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])] =
        Quad(rat(rng() % 2 ? 1 : -1));
  return m;
}

CriterionResult criterion_cone_identities() {
  auto start = Clock::now();
  Gate gate;
  std::ostringstream payload;
  std::mt19937_64 rng(701);
  const Rat h = rat(1, 2);

  auto exact_dirs = [](int d) {
    std::vector<Vec> dirs;
    if (d == 2) {
      dirs.push_back({Quad(1), Quad(0)});
      dirs.push_back({Quad(0), Quad(1)});
      dirs.push_back({Quad(1), Quad(1)});
      dirs.push_back({Quad(-1), Quad(2)});
    } else {
      dirs.push_back({Quad(1), Quad(0), Quad(0)});
      dirs.push_back({Quad(0), Quad(1), Quad(0)});
      dirs.push_back({Quad(0), Quad(0), Quad(1)});
      dirs.push_back({Quad(1), Quad(1), Quad(1)});
      dirs.push_back({Quad(-1), Quad(2), Quad(0)});
    }
    return dirs;
  };

  for (int i = 0; i < 500; ++i) {
    int d = 2 + (i % 2);
    // Support additivity of the weighted Minkowski sum.
    long la = static_cast<long>(rng() % 5);
    long lb = static_cast<long>(rng() % static_cast<std::uint64_t>(9 - la));
    Rat lambda = rat(la, 8), mu = rat(lb, 8);
    ConvexBody a = rand_body(rng, d), b = rand_body(rng, d);
    ConvexBody sum = minkowski_sum(a, b, lambda, mu);
    for (const Vec& dir : exact_dirs(d))
      gate.check(support_plus(sum, dir) ==
                     Quad(lambda) * support_plus(a, dir) + Quad(mu) * support_plus(b, dir),
                 "support additivity failed on instance " + std::to_string(i));

    // Barycenter equivariance under an exact orthogonal action.
    int atoms = 1 + static_cast<int>(rng() % 3);
    std::vector<BodyAtom> raw;
    for (int j = 0; j < atoms; ++j)
      raw.push_back({rand_body(rng, d), rat(1, atoms)});
    raw.back().weight = rat(1) - rat(atoms - 1, atoms);
    BodyMeasure nu = make_body_measure(d, raw);
    Mat u = signed_perm(rng, d);
    std::vector<BodyAtom> mapped;
    for (const BodyAtom& atom : nu.atoms) mapped.push_back({apply_action(u, atom.body), atom.weight});
    gate.check(apply_action(u, barycenter(nu)) == barycenter(make_body_measure(d, mapped)),
               "barycenter equivariance failed on instance " + std::to_string(i));

    // Fix sets: antitone in the generator set, equivariant under conjugation.
    ConvexBody c = rand_body(rng, d);
    Mat g1 = signed_perm(rng, d), g2 = signed_perm(rng, d);
    auto f1 = fix_set({g1}, c);
    auto f12 = fix_set({g1, g2}, c);
    if (f1 && f12)
      gate.check(body_contains_body(*f1, *f12),
                 "fix-set antitonicity failed on instance " + std::to_string(i));
    gate.check(!(f12 && !f1), "fix-set antitonicity (existence) failed on instance " +
                                  std::to_string(i));
    Mat conj = mat_mul(mat_mul(u, g1), mat_transpose(u));
    auto fc = fix_set({conj}, apply_action(u, c));
    gate.check(f1.has_value() == fc.has_value() &&
                   (!f1 || apply_action(u, *f1) == *fc),
               "fix-set equivariance failed on instance " + std::to_string(i));

    // Extreme-point forcing on sub-bodies.
    gate.check(extreme_point_check(c, rand_subbody(rng, c), rand_subbody(rng, c)),
               "extreme-point implication failed on instance " + std::to_string(i));
    if (i % 50 == 0)
      payload << "instance=" << i << " d=" << d << " verts=" << c.verts.size()
              << " lambda=" << frac(lambda) << " mu=" << frac(mu) << "\n";
  }

  DirectionSet flat = make_direction_set(2, 0.2);
  DirectionSet solid = make_direction_set(3, 0.3);
  int verdict_counts[3] = {0, 0, 0};
  for (int i = 0; i < 300; ++i) {
    int d = 2 + (i % 2);
    ConvexBody c = rand_body(rng, d);
    int atoms = 1 + static_cast<int>(rng() % 3);
    std::vector<BodyAtom> raw;
    for (int j = 0; j < atoms; ++j) raw.push_back({rand_subbody(rng, c), rat(1, atoms)});
    raw.back().weight = rat(1) - rat(atoms - 1, atoms);
    BodyMeasure nu = make_body_measure(d, raw);
    InvariantMeasureReport rep = invariant_measure_test(nu, c, d == 2 ? flat : solid);
    ++verdict_counts[static_cast<int>(rep.verdict)];
    gate.check(rep.verdict != InvariantVerdict::Violated,
               "Violated verdict on sweep " + std::to_string(i));
  }
  payload << "verdicts consistent=" << verdict_counts[0]
          << " violated=" << verdict_counts[1]
          << " barycenter_proper=" << verdict_counts[2] << "\n";

  // The (1/2, 1/2) Minkowski square, exactly, via both constructions.
  ConvexBody seg_x = convex_body(2, {{Quad(0), Quad(0)}, {Quad(1), Quad(0)}});
  ConvexBody seg_y = convex_body(2, {{Quad(0), Quad(0)}, {Quad(0), Quad(1)}});
  ConvexBody half_square = convex_body(
      2, {{Quad(0), Quad(0)}, {Quad(h), Quad(0)}, {Quad(0), Quad(h)}, {Quad(h), Quad(h)}});
  gate.check(minkowski_sum(seg_x, seg_y, h, h) == half_square,
             "Minkowski square mismatch");
  gate.check(barycenter(make_body_measure(2, {{seg_x, h}, {seg_y, h}})) == half_square,
             "barycenter square mismatch");
  payload << "minkowski_square_exact=1\n";

  CriterionResult r;
  r.seconds = elapsed_s(start);
  r.pass = gate.pass;
  r.detail = with_failure(
      gate, "500 identity instances exact; 300 sweeps with no Violated verdict (" +
                std::to_string(verdict_counts[0]) + " consistent, " +
                std::to_string(verdict_counts[2]) + " proper); Minkowski square exact");
  r.payload = payload.str();
  return r;
}

// ---- criterion 8: Klein group on the square --------------------------------

CriterionResult criterion_klein_pipeline() {
  auto start = Clock::now();
  Gate gate;
  std::ostringstream payload;
  const Rat h = rat(1, 2);
  const Rat q = rat(1, 4);

  MarkedGroup kg = MarkedGroup::elementary_abelian_2(2);
  Mat ra = {{Quad(1), Quad(0)}, {Quad(0), Quad(-1)}};
  Mat rb = {{Quad(-1), Quad(0)}, {Quad(0), Quad(1)}};
  MatrixRep rep = matrix_rep(kg, {ra, rb});
  gate.check(rep.images.size() == 4, "representation has wrong size");

  Subgroup sa = Subgroup::generated_by(kg, {kg.generator(0)});
  Subgroup sb = Subgroup::generated_by(kg, {kg.generator(1)});
  IrsDistribution mu = IrsDistribution::from_atoms(kg, {{sa, h}, {sb, h}});
  InvarianceCheck inv = check_conjugation_invariance(mu);
  gate.check(inv.invariant, "subgroup distribution not invariant");
  payload << "mu_invariant=" << (inv.invariant ? 1 : 0) << "\n";

  ConvexBody square = convex_body(2, {{Quad(h), Quad(h)},
                                      {Quad(h), Quad(-h)},
                                      {Quad(-h), Quad(h)},
                                      {Quad(-h), Quad(-h)}});
  BodyMeasure nu = pushforward_fix(mu, rep, square);
  ConvexBody hseg = convex_body(2, {{Quad(-h), Quad(0)}, {Quad(h), Quad(0)}});
  ConvexBody vseg = convex_body(2, {{Quad(0), Quad(-h)}, {Quad(0), Quad(h)}});
  gate.check(nu.atoms.size() == 2, "pushforward atom count");
  if (nu.atoms.size() == 2) {
    gate.check(nu.atoms[0].body == hseg && nu.atoms[0].weight == h,
               "first pushforward atom is not the horizontal chord");
    gate.check(nu.atoms[1].body == vseg && nu.atoms[1].weight == h,
               "second pushforward atom is not the vertical chord");
  }
  for (const BodyAtom& atom : nu.atoms) {
    payload << "atom weight=" << frac(atom.weight) << " verts=";
    for (const Vec& v : atom.body.verts)
      payload << " (" << quad_str(v[0]) << "," << quad_str(v[1]) << ")";
    payload << "\n";
  }

  // The image measure is invariant: every group element permutes the atoms.
  for (const Mat& image : rep.images) {
    std::vector<BodyAtom> mapped;
    for (const BodyAtom& atom : nu.atoms)
      mapped.push_back({apply_action(image, atom.body), atom.weight});
    BodyMeasure moved = make_body_measure(2, mapped);
    bool same = moved.atoms.size() == nu.atoms.size();
    for (std::size_t i = 0; same && i < nu.atoms.size(); ++i)
      same = moved.atoms[i].body == nu.atoms[i].body &&
             moved.atoms[i].weight == nu.atoms[i].weight;
    gate.check(same, "pushforward measure moved under the action");
  }

  ConvexBody bary = barycenter(nu);
  ConvexBody expected = convex_body(2, {{Quad(q), Quad(q)},
                                        {Quad(q), Quad(-q)},
                                        {Quad(-q), Quad(q)},
                                        {Quad(-q), Quad(-q)}});
  gate.check(bary == expected, "barycenter is not the quarter square");
  payload << "barycenter verts=";
  for (const Vec& v : bary.verts)
    payload << " (" << quad_str(v[0]) << "," << quad_str(v[1]) << ")";
  payload << "\n";

  for (const Mat& image : rep.images)
    gate.check(apply_action(image, bary) == bary, "barycenter is not fixed by the action");

  // Proper barycenter: nu is carried by proper sub-bodies of the square.
  InvariantMeasureReport imt = invariant_measure_test(nu, square, make_direction_set(2, 0.2));
  gate.check(imt.verdict == InvariantVerdict::BarycenterProper,
             "mechanism verdict is not BarycenterProper");
  payload << "verdict_gap=" << f17(imt.support_gap) << "\n";

  CriterionResult r;
  r.seconds = elapsed_s(start);
  r.pass = gate.pass;
  r.detail = with_failure(gate,
                          "invariant chord measure, barycenter = quarter square, fixed "
                          "by all four isometries");
  r.payload = payload.str();
  return r;
}

// ---- criterion 9: Chabauty metric ------------------------------------------

CriterionResult criterion_chabauty() {
  auto start = Clock::now();
  Gate gate;
  std::ostringstream payload;

  // n!Z converges to the trivial subgroup: fingerprints agree exactly below
  // radius n! and differ from there on.
  MarkedGroup z = MarkedGroup::free_group(1);
  Subgroup zero = Subgroup::trivial(z);
  long factorial = 1;
  for (int n = 1; n <= 5; ++n) {
    factorial *= n;
    Subgroup hn = Subgroup::generated_by(z, {z.word_apply(Word(
                                                static_cast<std::size_t>(factorial), 0))});
    for (int radius = 1; radius <= 24; ++radius) {
      bool equal = hn.fingerprint(radius) == zero.fingerprint(radius);
      gate.check(equal == (radius < factorial),
                 "fingerprint boundary off at n=" + std::to_string(n) +
                     " radius=" + std::to_string(radius));
    }
    ChabautyResult d = chabauty_distance(hn, zero, 24);
    if (factorial <= 24) {
      gate.check(!d.indistinguishable && d.agree_radius == static_cast<int>(factorial) - 1,
                 "agreement radius wrong at n=" + std::to_string(n));
      gate.check(d.value == rat(1, 1L << (factorial - 1)),
                 "distance value wrong at n=" + std::to_string(n));
    } else {
      gate.check(d.indistinguishable && d.value == 0,
                 "deep subgroup should be indistinguishable at radius 24");
    }
    payload << "n=" << n << " agree=" << d.agree_radius << " value=" << frac(d.value)
            << " indist=" << (d.indistinguishable ? 1 : 0) << "\n";
  }

  MarkedGroup f2 = MarkedGroup::free_group(2);
  MarkedGroup s4 = MarkedGroup::symmetric_group(4);
  MarkedGroup d4 = MarkedGroup::dihedral_group(4);
  std::mt19937_64 rng(901);
  auto rand_subgroup = [&](int which) {
    if (which == 0) {
      std::vector<Elem> gens;
      int ng = 1 + static_cast<int>(rng() % 3);
      for (int i = 0; i < ng; ++i) {
        Word w(1 + rng() % 4);
        for (int& letter : w) letter = static_cast<int>(rng() % 4);
        gens.push_back(f2.word_apply(w));
      }
      return Subgroup::generated_by(f2, gens);
    }
    const MarkedGroup& g = which == 1 ? s4 : d4;
    std::vector<Elem> gens;
    int ng = 1 + static_cast<int>(rng() % 2);
    for (int i = 0; i < ng; ++i)
      gens.push_back(g.elem_at(static_cast<int>(rng() % static_cast<std::uint64_t>(g.order()))));
    return Subgroup::generated_by(g, gens);
  };

  for (int t = 0; t < 200; ++t) {
    int which = t % 3;
    Subgroup h1 = rand_subgroup(which);
    Subgroup h2 = rand_subgroup(which);
    Subgroup h3 = rand_subgroup(which);
    ChabautyResult d12 = chabauty_distance(h1, h2, 8);
    ChabautyResult d21 = chabauty_distance(h2, h1, 8);
    ChabautyResult d13 = chabauty_distance(h1, h3, 8);
    ChabautyResult d23 = chabauty_distance(h2, h3, 8);
    gate.check(d12.value == d21.value && d12.agree_radius == d21.agree_radius,
               "symmetry failed on triple " + std::to_string(t));
    gate.check(d13.value <= std::max(d12.value, d23.value),
               "ultrametric inequality failed on triple " + std::to_string(t));
    ChabautyResult self = chabauty_distance(h1, h1, 8);
    gate.check(self.indistinguishable && self.value == 0,
               "self distance nonzero on triple " + std::to_string(t));
    if (t % 25 == 0)
      payload << "triple=" << t << " d12=" << frac(d12.value) << " d13=" << frac(d13.value)
              << " d23=" << frac(d23.value) << "\n";
  }

  CriterionResult r;
  r.seconds = elapsed_s(start);
  r.pass = gate.pass;
  r.detail = with_failure(gate,
                          "factorial chain stabilizes at exact radii; 200 seeded triples "
                          "satisfy the ultrametric inequality");
  r.payload = payload.str();
  return r;
}

// ---- assembly ----------------------------------------------------------------

struct CriterionSpec {
  int number;
  const char* module;
  const char* name;
  CriterionResult (*run)();
};

const CriterionSpec kCriteria[9] = {
    {1, "spectral", "cycle-family spectra match closed forms", criterion_cycle_spectra},
    {2, "spectral", "Cayley interval brackets sqrt(3)/2", criterion_cayley_interval},
    {3, "spectral", "random Schreier family is locally tree-like", criterion_random_family},
    {4, "tdlc", "Haar ratios equal exhaustive coset counts", criterion_haar_ratios},
    {5, "tdlc", "Folner certificates survive independent recheck", criterion_folner},
    {6, "irs", "IRS normal closure matches the brute-force minimum", criterion_irs_closure},
    {7, "convex-cone", "support-function identities hold exactly", criterion_cone_identities},
    {8, "convex-cone", "Klein-group square pipeline is exact", criterion_klein_pipeline},
    {9, "subgroup-space", "Chabauty distance is an exact ultrametric", criterion_chabauty},
};

std::vector<CriterionResult> run_nine() {
  std::vector<CriterionResult> results;
  for (const CriterionSpec& spec : kCriteria) {
    CriterionResult r = spec.run();
    r.number = spec.number;
    r.module = spec.module;
    r.name = spec.name;
    results.push_back(std::move(r));
  }
  return results;
}

}  // namespace

std::string acceptance_payload(const std::vector<CriterionResult>& results) {
  std::ostringstream out;
  for (const CriterionResult& r : results) {
    out << "criterion " << r.number << " [" << r.module << "] " << r.name << "\n";
    out << "pass " << (r.pass ? "true" : "false") << "\n";
    out << r.detail << "\n";
    out << r.payload << "---\n";
  }
  return out.str();
}

std::vector<CriterionResult> acceptance_criteria(const std::string& filter) {
  static const char* kModules[] = {"spectral", "tdlc", "irs", "convex-cone",
                                   "subgroup-space", "cli"};
  if (!filter.empty()) {
    bool known = false;
    for (const char* m : kModules) known = known || filter == m;
    require(known, Errc::ConfigInvalid,
            "unknown selftest filter '" + filter +
                "' (expected spectral, tdlc, irs, convex-cone, subgroup-space or cli)");
  }

  bool want_cli = filter.empty() || filter == "cli";
  std::vector<CriterionResult> reported;
  if (want_cli) {
    auto start = Clock::now();
    std::vector<CriterionResult> first = run_nine();
    std::string pay1 = acceptance_payload(first);
    std::string pay2 = acceptance_payload(run_nine());
    CriterionResult det;
    det.number = 10;
    det.module = "cli";
    det.name = "selftest output is deterministic";
    det.pass = pay1 == pay2;
    det.seconds = elapsed_s(start);
    det.detail = det.pass ? "two full passes produced identical timing-free reports"
                          : "the two passes differ";
    det.payload = "bytes=" + std::to_string(pay1.size()) +
                  " identical=" + (det.pass ? "true" : "false") + "\n";
    for (CriterionResult& r : first)
      if (filter.empty() || filter == r.module) reported.push_back(std::move(r));
    reported.push_back(std::move(det));
  } else {
    for (const CriterionSpec& spec : kCriteria) {
      if (filter != spec.module) continue;
      CriterionResult r = spec.run();
      r.number = spec.number;
      r.module = spec.module;
      r.name = spec.name;
      reported.push_back(std::move(r));
    }
  }
  return reported;
}

}  // namespace irslab
