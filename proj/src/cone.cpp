#include "irslab/cone.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace irslab {

namespace {

Vec vec_comb(const Quad& x, const Vec& a, const Quad& y, const Vec& b) {
  Vec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = x * a[i] + y * b[i];
  return out;
}

bool vec_eq(const Vec& a, const Vec& b) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] != b[i]) return false;
  return true;
}

bool vec_less(const Vec& a, const Vec& b) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    int c = quad_sgn(a[i] - b[i]);
    if (c != 0) return c < 0;
  }
  return false;
}

// Exact feasibility of p in conv(pts): phase-1 simplex with Bland's rule over
// the quadratic field, one artificial variable per row.
bool in_hull(const std::vector<Vec>& pts, const Vec& p) {
  if (pts.empty()) return false;
  const int n = static_cast<int>(pts.size());
  const int d = static_cast<int>(p.size());
  const int r = d + 1;
  const int cols = n + r;  // structural + artificial; rhs kept separately
  std::vector<Vec> t(static_cast<std::size_t>(r), Vec(static_cast<std::size_t>(cols)));
  Vec rhs(static_cast<std::size_t>(r));
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < n; ++j)
      t[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
          pts[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)];
    rhs[static_cast<std::size_t>(i)] = p[static_cast<std::size_t>(i)];
  }
  for (int j = 0; j < n; ++j) t[static_cast<std::size_t>(d)][static_cast<std::size_t>(j)] = Quad(1);
  rhs[static_cast<std::size_t>(d)] = Quad(1);
  for (int i = 0; i < r; ++i) {
    if (quad_sgn(rhs[static_cast<std::size_t>(i)]) < 0) {
      for (auto& v : t[static_cast<std::size_t>(i)]) v = -v;
      rhs[static_cast<std::size_t>(i)] = -rhs[static_cast<std::size_t>(i)];
    }
    t[static_cast<std::size_t>(i)][static_cast<std::size_t>(n + i)] = Quad(1);
  }
  // w = sum of artificials, expressed through nonbasic variables.
  Vec w(static_cast<std::size_t>(cols));
  Quad w_rhs;
  for (int i = 0; i < r; ++i) {
    for (int j = 0; j < n; ++j)
      w[static_cast<std::size_t>(j)] =
          w[static_cast<std::size_t>(j)] - t[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    w_rhs = w_rhs + rhs[static_cast<std::size_t>(i)];
  }
  std::vector<int> basis(static_cast<std::size_t>(r));
  for (int i = 0; i < r; ++i) basis[static_cast<std::size_t>(i)] = n + i;

  for (int guard = 0; guard < 100000; ++guard) {
    int enter = -1;
    for (int j = 0; j < cols; ++j)
      if (quad_sgn(w[static_cast<std::size_t>(j)]) < 0) {
        enter = j;
        break;
      }
    if (enter < 0) return quad_sgn(w_rhs) == 0;
    int leave = -1;
    Quad best;
    for (int i = 0; i < r; ++i) {
      const Quad& coef = t[static_cast<std::size_t>(i)][static_cast<std::size_t>(enter)];
      if (quad_sgn(coef) <= 0) continue;
      Quad ratio = rhs[static_cast<std::size_t>(i)] / coef;
      if (leave < 0 || ratio < best ||
          (ratio == best && basis[static_cast<std::size_t>(i)] < basis[static_cast<std::size_t>(leave)]))
        leave = i, best = ratio;
    }
    require(leave >= 0, Errc::NoConvergence, "phase-1 simplex became unbounded");
    Vec& prow = t[static_cast<std::size_t>(leave)];
    Quad pv = prow[static_cast<std::size_t>(enter)];
    for (auto& v : prow) v = v / pv;
    rhs[static_cast<std::size_t>(leave)] = rhs[static_cast<std::size_t>(leave)] / pv;
    for (int i = 0; i < r; ++i) {
      if (i == leave) continue;
      Quad f = t[static_cast<std::size_t>(i)][static_cast<std::size_t>(enter)];
      if (quad_sgn(f) == 0) continue;
      for (int j = 0; j < cols; ++j)
        t[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
            t[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] -
            f * prow[static_cast<std::size_t>(j)];
      rhs[static_cast<std::size_t>(i)] =
          rhs[static_cast<std::size_t>(i)] - f * rhs[static_cast<std::size_t>(leave)];
    }
    Quad fw = w[static_cast<std::size_t>(enter)];
    if (quad_sgn(fw) != 0) {
      for (int j = 0; j < cols; ++j)
        w[static_cast<std::size_t>(j)] =
            w[static_cast<std::size_t>(j)] - fw * prow[static_cast<std::size_t>(j)];
      w_rhs = w_rhs + fw * rhs[static_cast<std::size_t>(leave)];
    }
    basis[static_cast<std::size_t>(leave)] = enter;
  }
  fail(Errc::NoConvergence, "phase-1 simplex exceeded the pivot budget");
}

// Distinct extreme points of the input set; removals never change the hull.
std::vector<Vec> hull_extreme(std::vector<Vec> pts) {
  std::sort(pts.begin(), pts.end(), vec_less);
  pts.erase(std::unique(pts.begin(), pts.end(), vec_eq), pts.end());
  std::size_t i = 0;
  while (i < pts.size() && pts.size() > 1) {
    std::vector<Vec> others;
    for (std::size_t j = 0; j < pts.size(); ++j)
      if (j != i) others.push_back(pts[j]);
    if (in_hull(others, pts[i]))
      pts.erase(pts.begin() + static_cast<std::ptrdiff_t>(i));
    else
      ++i;
  }
  return pts;
}

void check_direction_dim(const ConvexBody& c, std::size_t n) {
  require(static_cast<std::size_t>(c.d) == n, Errc::DimensionMismatch,
          "direction dimension does not match the body");
}

std::vector<std::vector<double>> probe_sphere(int d, int count);

double min_angle_to(const std::vector<double>& u, const std::vector<std::vector<double>>& dirs) {
  double best = 4.0;
  for (const auto& b : dirs) {
    double dp = 0;
    for (std::size_t i = 0; i < u.size(); ++i) dp += u[i] * b[i];
    best = std::min(best, std::acos(std::clamp(dp, -1.0, 1.0)));
  }
  return best;
}

std::vector<std::vector<double>> fib_sphere(int n, double offset) {
  const double ga = M_PI * (3.0 - std::sqrt(5.0));
  std::vector<std::vector<double>> out;
  for (int k = 0; k < n; ++k) {
    double z = 1.0 - 2.0 * (k + offset) / n;
    double rad = std::sqrt(std::max(0.0, 1.0 - z * z));
    out.push_back({rad * std::cos(ga * k), rad * std::sin(ga * k), z});
  }
  return out;
}

std::vector<std::vector<double>> probe_sphere(int d, int count) {
  std::vector<std::vector<double>> probes;
  if (d == 2) {
    for (int k = 0; k < count; ++k) {
      double ang = 2.0 * M_PI * (k + 0.5) / count;
      probes.push_back({std::cos(ang), std::sin(ang)});
    }
  } else {
    probes = fib_sphere(count, 0.25);
  }
  return probes;
}

double estimate_covering(int d, const std::vector<std::vector<double>>& dirs) {
  double worst = 0.0;
  for (const auto& u : probe_sphere(d, d == 2 ? 4096 : 8192))
    worst = std::max(worst, min_angle_to(u, dirs));
  return worst;
}

Mat elementwise_minus_identity(const Mat& g) {
  Mat m = g;
  for (std::size_t i = 0; i < m.size(); ++i) m[i][i] = m[i][i] - Quad(1);
  return m;
}

void check_action_matrix(const Mat& g, int d) {
  require(static_cast<int>(g.size()) == d, Errc::DimensionMismatch,
          "matrix does not match the body dimension");
  for (const Vec& row : g)
    require(static_cast<int>(row.size()) == d, Errc::DimensionMismatch,
            "matrix is not square");
  require(is_orthogonal(g), Errc::NotOrthogonal, "matrix is not orthogonal");
}

bool mat_less(const Mat& x, const Mat& y) {
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < x[i].size(); ++j) {
      int c = quad_sgn(x[i][j] - y[i][j]);
      if (c != 0) return c < 0;
    }
  return false;
}

}  // namespace

ConvexBody convex_body(int d, const std::vector<Vec>& points) {
  require(d >= 1, Errc::DimensionMismatch, "dimension must be positive");
  require(!points.empty(), Errc::EmptySet, "a convex body needs at least one point");
  for (const Vec& p : points)
    require(static_cast<int>(p.size()) == d, Errc::DimensionMismatch,
            "point dimension mismatch");
  ConvexBody out;
  out.d = d;
  out.verts = hull_extreme(points);
  for (const Vec& v : out.verts) {
    Quad norm2;
    for (const Quad& x : v) norm2 = norm2 + x * x;
    require(norm2 <= Quad(1), Errc::LeavesUnitBall, "vertex outside the unit ball");
  }
  return out;
}

bool operator==(const ConvexBody& x, const ConvexBody& y) {
  if (x.d != y.d || x.verts.size() != y.verts.size()) return false;
  for (std::size_t i = 0; i < x.verts.size(); ++i)
    if (!vec_eq(x.verts[i], y.verts[i])) return false;
  return true;
}

bool operator!=(const ConvexBody& x, const ConvexBody& y) { return !(x == y); }

bool body_less(const ConvexBody& x, const ConvexBody& y) {
  if (x.d != y.d) return x.d < y.d;
  for (std::size_t i = 0; i < std::min(x.verts.size(), y.verts.size()); ++i) {
    if (vec_less(x.verts[i], y.verts[i])) return true;
    if (vec_less(y.verts[i], x.verts[i])) return false;
  }
  return x.verts.size() < y.verts.size();
}

bool body_contains(const ConvexBody& c, const Vec& p) {
  require(static_cast<int>(p.size()) == c.d, Errc::DimensionMismatch,
          "point dimension mismatch");
  return in_hull(c.verts, p);
}

bool body_contains_body(const ConvexBody& c, const ConvexBody& a) {
  require(c.d == a.d, Errc::DimensionMismatch, "body dimension mismatch");
  for (const Vec& v : a.verts)
    if (!in_hull(c.verts, v)) return false;
  return true;
}

Quad support_plus(const ConvexBody& c, const Vec& b) {
  check_direction_dim(c, b.size());
  Quad best = dot(b, c.verts[0]);
  for (std::size_t i = 1; i < c.verts.size(); ++i) best = std::max(best, dot(b, c.verts[i]));
  return best;
}

Quad support_minus(const ConvexBody& c, const Vec& b) {
  check_direction_dim(c, b.size());
  Quad best = dot(b, c.verts[0]);
  for (std::size_t i = 1; i < c.verts.size(); ++i) best = std::min(best, dot(b, c.verts[i]));
  return best;
}

SupportValues support_eval(const ConvexBody& c, const std::vector<double>& b) {
  check_direction_dim(c, b.size());
  SupportValues out;
  bool first = true;
  for (const Vec& v : c.verts) {
    double s = 0;
    for (std::size_t i = 0; i < b.size(); ++i) s += b[i] * quad_double(v[i]);
    if (first) {
      out.plus = out.minus = s;
      first = false;
    } else {
      out.plus = std::max(out.plus, s);
      out.minus = std::min(out.minus, s);
    }
  }
  return out;
}

std::vector<double> support_table(const ConvexBody& c, const DirectionSet& dirs) {
  require(dirs.d == c.d, Errc::DimensionMismatch, "direction set dimension mismatch");
  std::vector<double> out;
  for (const auto& b : dirs.dirs) out.push_back(support_eval(c, b).plus);
  return out;
}

ConvexBody minkowski_sum(const ConvexBody& a, const ConvexBody& b, const Rat& lambda,
                         const Rat& mu) {
  require(a.d == b.d, Errc::DimensionMismatch, "summands have different dimensions");
  require(lambda >= 0 && mu >= 0, Errc::ConfigInvalid, "cone coefficients must be nonnegative");
  std::vector<Vec> pts;
  for (const Vec& va : a.verts)
    for (const Vec& vb : b.verts) pts.push_back(vec_comb(Quad(lambda), va, Quad(mu), vb));
  return convex_body(a.d, pts);
}

double cone_metric(const ConvexBody& a, const ConvexBody& b, const DirectionSet& dirs) {
  require(a.d == b.d && dirs.d == a.d, Errc::DimensionMismatch,
          "metric needs one common dimension");
  double out = 0;
  for (const auto& dir : dirs.dirs)
    out = std::max(out, std::abs(support_eval(a, dir).plus - support_eval(b, dir).plus));
  return out;
}

BodyMeasure make_body_measure(int d, std::vector<BodyAtom> atoms) {
  require(!atoms.empty(), Errc::EmptyMeasure, "measure needs at least one atom");
  for (auto& atom : atoms) {
    require(atom.body.d == d, Errc::DimensionMismatch, "atom dimension mismatch");
    atom.weight.canonicalize();
    require(atom.weight > 0, Errc::InvalidMeasure, "weights must be positive");
  }
  std::sort(atoms.begin(), atoms.end(),
            [](const BodyAtom& x, const BodyAtom& y) { return body_less(x.body, y.body); });
  std::vector<BodyAtom> merged;
  for (auto& atom : atoms) {
    if (!merged.empty() && merged.back().body == atom.body)
      merged.back().weight += atom.weight;
    else
      merged.push_back(std::move(atom));
  }
  Rat total(0);
  for (const auto& atom : merged) total += atom.weight;
  require(total == 1, Errc::InvalidMeasure, "weights must sum to one");
  BodyMeasure out;
  out.d = d;
  out.atoms = std::move(merged);
  return out;
}

ConvexBody barycenter(const BodyMeasure& nu) {
  require(!nu.atoms.empty(), Errc::EmptyMeasure, "barycenter of an empty measure");
  ConvexBody acc = minkowski_sum(nu.atoms[0].body, nu.atoms[0].body, nu.atoms[0].weight, Rat(0));
  for (std::size_t i = 1; i < nu.atoms.size(); ++i)
    acc = minkowski_sum(acc, nu.atoms[i].body, Rat(1), nu.atoms[i].weight);
  return acc;
}

bool extreme_point_check(const ConvexBody& c, const ConvexBody& a, const ConvexBody& b) {
  require(body_contains_body(c, a), Errc::NotContained, "first body is not inside");
  require(body_contains_body(c, b), Errc::NotContained, "second body is not inside");
  ConvexBody mid = minkowski_sum(a, b, Rat(1, 2), Rat(1, 2));
  if (mid != c) return true;  // implication is vacuous
  return a == c && b == c;
}

ConvexBody apply_action(const Mat& g, const ConvexBody& c) {
  check_action_matrix(g, c.d);
  std::vector<Vec> pts;
  for (const Vec& v : c.verts) pts.push_back(mat_vec(g, v));
  // Isometries map extreme points to extreme points; only the order changes.
  std::sort(pts.begin(), pts.end(), vec_less);
  ConvexBody out;
  out.d = c.d;
  out.verts = std::move(pts);
  return out;
}

std::vector<Mat> matrix_group_closure(const std::vector<Mat>& gens, std::size_t cap) {
  require(!gens.empty(), Errc::ConfigInvalid, "need at least one generator");
  int d = static_cast<int>(gens[0].size());
  for (const Mat& g : gens) check_action_matrix(g, d);
  std::vector<Mat> have{mat_identity(d)};
  std::vector<Mat> queue = have;
  while (!queue.empty()) {
    Mat x = std::move(queue.back());
    queue.pop_back();
    for (const Mat& g : gens) {
      Mat y = mat_mul(x, g);
      auto it = std::lower_bound(have.begin(), have.end(), y, mat_less);
      if (it != have.end() && mat_eq(*it, y)) continue;
      require(have.size() < cap, Errc::GroupTooLarge, "matrix group exceeds the closure cap");
      have.insert(it, y);
      queue.push_back(std::move(y));
    }
  }
  return have;
}

std::optional<ConvexBody> fix_set(const std::vector<Mat>& gens, const ConvexBody& c) {
  for (const Mat& g : gens) check_action_matrix(g, c.d);
  // Row basis of the stacked (g - I): the fixed space is its kernel.
  std::vector<Vec> funcs;
  for (const Mat& g : gens) {
    for (Vec row : elementwise_minus_identity(g)) {
      for (const Vec& f : funcs) {
        std::size_t pc = 0;
        while (pc < f.size() && quad_sgn(f[pc]) == 0) ++pc;
        if (pc < f.size() && quad_sgn(row[pc]) != 0) {
          Quad factor = row[pc] / f[pc];
          for (std::size_t j = 0; j < row.size(); ++j) row[j] = row[j] - factor * f[j];
        }
      }
      if (std::any_of(row.begin(), row.end(), [](const Quad& q) { return quad_sgn(q) != 0; }))
        funcs.push_back(std::move(row));
    }
  }
  std::vector<Vec> pts = c.verts;
  for (const Vec& f : funcs) {
    std::vector<Quad> vals;
    for (const Vec& p : pts) vals.push_back(dot(f, p));
    std::vector<Vec> next;
    for (std::size_t i = 0; i < pts.size(); ++i)
      if (quad_sgn(vals[i]) == 0) next.push_back(pts[i]);
    for (std::size_t i = 0; i < pts.size(); ++i)
      for (std::size_t j = i + 1; j < pts.size(); ++j) {
        if (quad_sgn(vals[i]) * quad_sgn(vals[j]) != -1) continue;
        Quad t = vals[j] / (vals[j] - vals[i]);
        next.push_back(vec_comb(t, pts[i], Quad(1) - t, pts[j]));
      }
    if (next.empty()) return std::nullopt;
    pts = hull_extreme(std::move(next));
  }
  ConvexBody out;
  out.d = c.d;
  out.verts = std::move(pts);
  return out;
}

const Mat& MatrixRep::image_of(const Elem& g) const {
  const int* idx = std::get_if<int>(&g.v);
  require(idx != nullptr && *idx >= 0 && static_cast<std::size_t>(*idx) < images.size(),
          Errc::FamilyMismatch, "element is not from the represented group");
  return images[static_cast<std::size_t>(*idx)];
}

MatrixRep matrix_rep(const MarkedGroup& parent, const std::vector<Mat>& generator_images) {
  require(parent.family() == Family::Finite, Errc::Unsupported,
          "matrix realizations need a finite parent");
  require(static_cast<int>(generator_images.size()) == parent.rank(), Errc::ConfigInvalid,
          "need one matrix per positive generator");
  require(!generator_images.empty(), Errc::ConfigInvalid, "need at least one generator");
  int d = static_cast<int>(generator_images[0].size());
  std::vector<Mat> letter(2 * generator_images.size());
  for (std::size_t i = 0; i < generator_images.size(); ++i) {
    check_action_matrix(generator_images[i], d);
    letter[2 * i] = generator_images[i];
    letter[2 * i + 1] = mat_transpose(generator_images[i]);  // exact inverse
  }
  long order = parent.order();
  std::vector<Mat> images(static_cast<std::size_t>(order));
  std::vector<bool> seen(static_cast<std::size_t>(order), false);
  auto idx = [&](const Elem& e) { return static_cast<std::size_t>(std::get<int>(e.v)); };
  Elem id = parent.identity();
  images[idx(id)] = mat_identity(d);
  seen[idx(id)] = true;
  std::vector<Elem> queue{id};
  for (std::size_t h = 0; h < queue.size(); ++h)
    for (int l = 0; l < parent.letter_count(); ++l) {
      Elem y = parent.multiply(queue[h], parent.letter_elem(l));
      Mat m = mat_mul(images[idx(queue[h])], letter[static_cast<std::size_t>(l)]);
      if (!seen[idx(y)]) {
        images[idx(y)] = std::move(m);
        seen[idx(y)] = true;
        queue.push_back(std::move(y));
      } else {
        require(mat_eq(images[idx(y)], m), Errc::NotAHomomorphism,
                "generator images do not respect the relations");
      }
    }
  require(std::all_of(seen.begin(), seen.end(), [](bool b) { return b; }), Errc::Unsupported,
          "marked generators do not reach every element");
  return MatrixRep{parent, d, std::move(images)};
}

BodyMeasure pushforward_fix(const IrsDistribution& mu, const MatrixRep& rep,
                            const ConvexBody& c) {
  require(mu.parent().same_group(rep.parent), Errc::FamilyMismatch,
          "distribution and representation disagree on the group");
  require(rep.d == c.d, Errc::DimensionMismatch, "representation dimension mismatch");
  InvarianceCheck inv = check_conjugation_invariance(mu);
  require(inv.invariant, Errc::NotInvariantMeasure,
          "pushforward needs a conjugation-invariant distribution: " + inv.detail);

  std::vector<ConvexBody> fixes;
  std::vector<BodyAtom> atoms;
  for (const IrsAtom& atom : mu.atoms()) {
    std::vector<Mat> mats;
    for (const Elem& e : atom.subgroup.elements()) mats.push_back(rep.image_of(e));
    std::optional<ConvexBody> fs = fix_set(mats, c);
    require(fs.has_value(), Errc::EmptySet,
            "a fixed slice misses the body; center the body at the origin");
    fixes.push_back(*fs);
    atoms.push_back(BodyAtom{std::move(*fs), atom.weight});
  }

  // Equivariance of H -> Fix(H), atom by atom over the marked generators.
  for (int i = 0; i < rep.parent.rank(); ++i) {
    Elem s = rep.parent.letter_elem(2 * i);
    const Mat& m = rep.image_of(s);
    for (std::size_t j = 0; j < mu.atoms().size(); ++j) {
      Subgroup conj = mu.atoms()[j].subgroup.conjugated(s);
      std::size_t tgt = 0;
      while (tgt < mu.atoms().size() && !(mu.atoms()[tgt].subgroup == conj)) ++tgt;
      require(tgt < mu.atoms().size(), Errc::NotInvariantMeasure,
              "conjugate atom missing despite the invariance check");
      require(apply_action(m, fixes[j]) == fixes[tgt], Errc::ActionNotWellDefined,
              "fix-set equivariance failed on an atom");
    }
  }
  return make_body_measure(c.d, std::move(atoms));
}

InvariantMeasureReport invariant_measure_test(const BodyMeasure& nu, const ConvexBody& c,
                                              const DirectionSet& dirs) {
  require(nu.d == c.d && dirs.d == c.d, Errc::DimensionMismatch,
          "measure, body and directions must share a dimension");
  for (const BodyAtom& atom : nu.atoms)
    require(body_contains_body(c, atom.body), Errc::AtomNotContained,
            "an atom is not contained in the reference body");
  InvariantMeasureReport out;
  ConvexBody bary = barycenter(nu);
  if (bary == c) {
    out.verdict =
        nu.atoms.size() == 1 ? InvariantVerdict::Consistent : InvariantVerdict::Violated;
    return out;
  }
  out.verdict = InvariantVerdict::BarycenterProper;
  for (const auto& b : dirs.dirs) {
    double gap = std::abs(support_eval(c, b).plus - support_eval(bary, b).plus);
    if (gap >= out.support_gap) {
      out.support_gap = gap;
      out.witness = b;
    }
  }
  return out;
}

DirectionSet make_direction_set(int d, double covering_radius) {
  require(d == 2 || d == 3, Errc::Unsupported, "direction sets exist for d = 2, 3");
  require(covering_radius > 0.005 && covering_radius <= 1.0, Errc::ConfigInvalid,
          "covering radius out of range");
  DirectionSet out;
  out.d = d;
  if (d == 2) {
    int count = std::max(4, static_cast<int>(std::ceil(M_PI / covering_radius)));
    for (int k = 0; k < count; ++k) {
      double ang = 2.0 * M_PI * k / count;
      out.dirs.push_back({std::cos(ang), std::sin(ang)});
    }
    out.covering_radius = M_PI / count;
    return out;
  }
  int n = std::max(32, static_cast<int>(std::ceil(10.0 / (covering_radius * covering_radius))));
  for (int attempt = 0; attempt < 40; ++attempt) {
    out.dirs = fib_sphere(n, 0.5);
    out.covering_radius = estimate_covering(3, out.dirs);
    if (out.covering_radius <= covering_radius) return out;
    n += n / 4 + 1;
  }
  fail(Errc::NoConvergence, "could not reach the requested covering radius");
}

DirectionSet direction_set_from(int d, std::vector<std::vector<double>> dirs) {
  require(d == 2 || d == 3, Errc::Unsupported, "direction sets exist for d = 2, 3");
  require(!dirs.empty(), Errc::ConfigInvalid, "need at least one direction");
  for (const auto& b : dirs) {
    require(static_cast<int>(b.size()) == d, Errc::DimensionMismatch,
            "direction dimension mismatch");
    double norm2 = 0;
    for (double x : b) norm2 += x * x;
    require(std::abs(std::sqrt(norm2) - 1.0) <= 1e-12, Errc::ConfigInvalid,
            "directions must have unit norm");
  }
  for (const auto& u : probe_sphere(d, d == 2 ? 1024 : 4096)) {
    double best = -1;
    for (const auto& b : dirs) {
      double dp = 0;
      for (std::size_t i = 0; i < u.size(); ++i) dp += u[i] * b[i];
      best = std::max(best, dp);
    }
    require(best > 1e-9, Errc::ConfigInvalid, "directions do not positively span");
  }
  DirectionSet out;
  out.d = d;
  out.covering_radius = estimate_covering(d, dirs);
  out.dirs = std::move(dirs);
  return out;
}

std::string body_to_text(const ConvexBody& c) {
  std::ostringstream out;
  out << "convex-body v1\n";
  out << "dim " << c.d << "\n";
  for (const Vec& v : c.verts) {
    out << "vertex";
    for (const Quad& x : v) out << " " << quad_str(x);
    out << "\n";
  }
  out << "end\n";
  return out.str();
}

namespace {

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

std::vector<std::string> text_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

ConvexBody body_from_lines(const std::vector<std::string>& lines, std::size_t& pos) {
  require(pos < lines.size() && lines[pos] == "convex-body v1", Errc::ParseError,
          "expected 'convex-body v1'");
  ++pos;
  auto dim_parts = pos < lines.size() ? split_ws(lines[pos]) : std::vector<std::string>{};
  require(dim_parts.size() == 2 && dim_parts[0] == "dim", Errc::ParseError,
          "expected 'dim <d>'");
  int d = 0;
  try {
    d = std::stoi(dim_parts[1]);
  } catch (const std::exception&) {
    fail(Errc::ParseError, "bad dimension '" + dim_parts[1] + "'");
  }
  ++pos;
  std::vector<Vec> pts;
  while (pos < lines.size() && lines[pos] != "end") {
    auto parts = split_ws(lines[pos]);
    require(!parts.empty() && parts[0] == "vertex", Errc::ParseError,
            "expected 'vertex ...' or 'end'");
    require(static_cast<int>(parts.size()) == d + 1, Errc::ParseError,
            "vertex has the wrong number of coordinates");
    Vec v;
    for (std::size_t i = 1; i < parts.size(); ++i) v.push_back(quad_parse(parts[i]));
    pts.push_back(std::move(v));
    ++pos;
  }
  require(pos < lines.size(), Errc::ParseError, "missing 'end'");
  ++pos;
  return convex_body(d, pts);
}

}  // namespace

ConvexBody body_from_text(const std::string& text) {
  std::vector<std::string> lines = text_lines(text);
  std::size_t pos = 0;
  ConvexBody out = body_from_lines(lines, pos);
  while (pos < lines.size()) {
    require(lines[pos].empty(), Errc::ParseError, "trailing content after 'end'");
    ++pos;
  }
  return out;
}

std::string measure_to_text(const BodyMeasure& nu) {
  std::ostringstream out;
  out << "body-measure v1\n";
  out << "dim " << nu.d << "\n";
  for (const BodyAtom& atom : nu.atoms) {
    out << "atom " << rat_str(atom.weight) << "\n";
    out << body_to_text(atom.body);
  }
  out << "end\n";
  return out.str();
}

BodyMeasure measure_from_text(const std::string& text) {
  std::vector<std::string> lines = text_lines(text);
  std::size_t pos = 0;
  require(pos < lines.size() && lines[pos] == "body-measure v1", Errc::ParseError,
          "expected 'body-measure v1'");
  ++pos;
  auto dim_parts = pos < lines.size() ? split_ws(lines[pos]) : std::vector<std::string>{};
  require(dim_parts.size() == 2 && dim_parts[0] == "dim", Errc::ParseError,
          "expected 'dim <d>'");
  int d = 0;
  try {
    d = std::stoi(dim_parts[1]);
  } catch (const std::exception&) {
    fail(Errc::ParseError, "bad dimension '" + dim_parts[1] + "'");
  }
  ++pos;
  std::vector<BodyAtom> atoms;
  while (pos < lines.size() && lines[pos] != "end") {
    auto parts = split_ws(lines[pos]);
    require(parts.size() == 2 && parts[0] == "atom", Errc::ParseError,
            "expected 'atom <weight>' or 'end'");
    Rat w = rat_parse(parts[1]);
    ++pos;
    ConvexBody body = body_from_lines(lines, pos);
    atoms.push_back(BodyAtom{std::move(body), std::move(w)});
  }
  require(pos < lines.size(), Errc::ParseError, "missing 'end'");
  ++pos;
  while (pos < lines.size()) {
    require(lines[pos].empty(), Errc::ParseError, "trailing content after 'end'");
    ++pos;
  }
  return make_body_measure(d, std::move(atoms));
}

}  // namespace irslab
