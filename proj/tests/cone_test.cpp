#include "irslab/cone.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <vector>

#include "doctest.h"

using namespace irslab;

namespace {

template <class F>
std::optional<Errc> thrown_code(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

Vec qv(std::initializer_list<Rat> vals) {
  Vec v;
  for (const Rat& r : vals) v.push_back(Quad(r));
  return v;
}

const Rat h = rat(1, 2);

// Axis-aligned square with corners (+-1/2, +-1/2).
ConvexBody square_half() {
  return convex_body(2, {qv({-h, -h}), qv({-h, h}), qv({h, -h}), qv({h, h})});
}

ConvexBody origin2() { return convex_body(2, {qv({0, 0})}); }

// Horizontal and vertical mid-segments of square_half().
ConvexBody hseg() { return convex_body(2, {qv({-h, 0}), qv({h, 0})}); }
ConvexBody vseg() { return convex_body(2, {qv({0, -h}), qv({0, h})}); }

Mat m2(Rat a, Rat b, Rat c, Rat d) {
  return Mat{{Quad(a), Quad(b)}, {Quad(c), Quad(d)}};
}

// Rotation by 2*pi/3, exact over sqrt(3).
Mat rot3() {
  Quad r = quad_sqrt(3) / Quad(2);
  return Mat{{Quad(-h), -r}, {r, Quad(-h)}};
}

// Equilateral triangle inscribed in the unit circle with a vertex at (1, 0).
ConvexBody triangle3() {
  Quad r = quad_sqrt(3) / Quad(2);
  return convex_body(2, {Vec{Quad(1), Quad(0)}, Vec{Quad(-h), r}, Vec{Quad(-h), -r}});
}

// Random rational point with |coords| <= 1/2 on an eighth grid.
Vec rand_point(std::mt19937_64& rng, int d) {
  std::uniform_int_distribution<int> coord(-4, 4);
  Vec p;
  for (int i = 0; i < d; ++i) p.push_back(Quad(rat(coord(rng), 8)));
  return p;
}

ConvexBody rand_body(std::mt19937_64& rng, int d, int max_pts = 5) {
  std::uniform_int_distribution<int> cnt(1, max_pts);
  std::vector<Vec> pts;
  int n = cnt(rng);
  for (int i = 0; i < n; ++i) pts.push_back(rand_point(rng, d));
  return convex_body(d, pts);
}

// Random convex combination of the vertices of c; lands inside c exactly.
Vec rand_inside(std::mt19937_64& rng, const ConvexBody& c) {
  std::uniform_int_distribution<int> wdist(0, 4);
  std::vector<long> w(c.verts.size());
  long total = 0;
  for (auto& x : w) total += (x = wdist(rng));
  if (total == 0) {
    w[0] = 1;
    total = 1;
  }
  Vec p(c.verts.size() ? c.verts[0].size() : 0, Quad(0));
  for (std::size_t i = 0; i < c.verts.size(); ++i)
    for (std::size_t j = 0; j < p.size(); ++j)
      p[j] = p[j] + Quad(rat(w[i], total)) * c.verts[i][j];
  return p;
}

ConvexBody rand_subbody(std::mt19937_64& rng, const ConvexBody& c) {
  std::uniform_int_distribution<int> cnt(1, 3);
  std::vector<Vec> pts;
  int n = cnt(rng);
  for (int i = 0; i < n; ++i) pts.push_back(rand_inside(rng, c));
  return convex_body(c.d, pts);
}

// Signed permutation matrices are exactly the rational orthogonal pool we
// need for seeded equivariance sweeps.
Mat signed_perm(std::mt19937_64& rng, int d) {
  std::vector<int> perm(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) perm[static_cast<std::size_t>(i)] = i;
  std::shuffle(perm.begin(), perm.end(), rng);
  std::uniform_int_distribution<int> coin(0, 1);
  Mat m(static_cast<std::size_t>(d), Vec(static_cast<std::size_t>(d), Quad(0)));
  for (int i = 0; i < d; ++i)
    m[static_cast<std::size_t>(i)][static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])] =
        Quad(coin(rng) ? 1 : -1);
  return m;
}

}  // namespace

TEST_CASE("quadratic scalars stay exact through arithmetic and text") {
  CHECK(quad_sqrt(0) == Quad(0));
  CHECK(quad_sqrt(1) == Quad(1));
  CHECK(quad_sqrt(4) == Quad(2));
  CHECK(quad_sqrt(8) == quad_make(rat(0), rat(2), 2));
  CHECK(quad_sqrt(12) == quad_make(rat(0), rat(2), 3));
  CHECK(quad_sqrt(2) * quad_sqrt(2) == Quad(2));
  CHECK(thrown_code([] { (void)quad_sqrt(-1); }) == Errc::FieldMismatch);
  CHECK(thrown_code([] { (void)quad_make(rat(1), rat(1), 4); }) == Errc::FieldMismatch);

  Quad golden = quad_make(rat(1), rat(1), 2);  // 1 + sqrt(2)
  CHECK(golden * quad_make(rat(1), rat(-1), 2) == Quad(-1));
  CHECK(golden / golden == Quad(1));
  Quad q = quad_make(rat(3), rat(1), 5) / quad_make(rat(2), rat(-1), 5);
  CHECK(q * quad_make(rat(2), rat(-1), 5) == quad_make(rat(3), rat(1), 5));

  // Sign decisions cross the rational approximations of sqrt(2).
  CHECK(quad_sqrt(2) < Quad(rat(3, 2)));
  CHECK(quad_sqrt(2) > Quad(rat(7, 5)));
  CHECK(golden > Quad(rat(12, 5)));
  CHECK(golden < Quad(rat(29, 12)));
  CHECK(quad_sgn(quad_make(rat(0), rat(-1), 7)) == -1);
  CHECK(quad_sgn(Quad(0)) == 0);

  CHECK(thrown_code([] { (void)(quad_sqrt(2) + quad_sqrt(3)); }) == Errc::FieldMismatch);
  CHECK(quad_sqrt(2) + Quad(1) == quad_make(rat(1), rat(1), 2));

  CHECK(quad_double(quad_sqrt(2)) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));

  for (const char* text : {"3/4", "-2", "0", "(1+1*sqrt(2))/2", "(0+1*sqrt(2))/2",
                           "(1-2*sqrt(3))/4", "(-3+2*sqrt(5))/1"}) {
    Quad v = quad_parse(text);
    CHECK(quad_str(v) == text);
    CHECK(quad_parse(quad_str(v)) == v);
  }
  CHECK(quad_parse("+5") == Quad(5));
  CHECK(thrown_code([] { (void)quad_parse("x"); }) == Errc::ParseError);
  CHECK(thrown_code([] { (void)quad_parse("(1+2*sqrt(2)"); }) == Errc::ParseError);
  CHECK(thrown_code([] { (void)quad_parse("1/0"); }) == Errc::ParseError);
  CHECK(thrown_code([] { (void)quad_parse("(1+1*sqrt(4))/2"); }) == Errc::FieldMismatch);
}

TEST_CASE("convex bodies canonicalize to their extreme points") {
  ConvexBody sq = square_half();
  REQUIRE(sq.verts.size() == 4);
  CHECK(sq.verts[0] == qv({-h, -h}));
  CHECK(sq.verts[3] == qv({h, h}));

  // Interior points, edge midpoints and duplicates all drop out.
  ConvexBody again = convex_body(
      2, {qv({-h, -h}), qv({-h, h}), qv({h, -h}), qv({h, h}), qv({0, 0}), qv({0, h}),
          qv({rat(1, 4), rat(-1, 4)}), qv({h, h})});
  CHECK(again == sq);

  ConvexBody seg = convex_body(2, {qv({0, 0}), qv({rat(1, 4), 0}), qv({h, 0})});
  CHECK(seg.verts.size() == 2);

  ConvexBody point = convex_body(3, {qv({0, 0, rat(1, 3)})});
  CHECK(point.verts.size() == 1);

  CHECK(thrown_code([] { (void)convex_body(2, {}); }) == Errc::EmptySet);
  CHECK(thrown_code([] { (void)convex_body(2, {qv({1, 1})}); }) == Errc::LeavesUnitBall);
  CHECK(thrown_code([] { (void)convex_body(2, {qv({0, 0, 0})}); }) == Errc::DimensionMismatch);
  CHECK(thrown_code([] { (void)convex_body(0, {Vec{}}); }) == Errc::DimensionMismatch);
  // Norm exactly one stays legal.
  CHECK(convex_body(2, {qv({1, 0})}).verts.size() == 1);

  CHECK(body_contains(sq, qv({0, 0})));
  CHECK(body_contains(sq, qv({h, h})));
  CHECK(body_contains(sq, qv({rat(1, 3), rat(-1, 2)})));
  CHECK_FALSE(body_contains(sq, qv({rat(5, 8), 0})));
  CHECK(thrown_code([&] { (void)body_contains(sq, qv({0, 0, 0})); }) == Errc::DimensionMismatch);

  CHECK(body_contains_body(sq, seg));
  CHECK(body_contains_body(sq, sq));
  CHECK_FALSE(body_contains_body(seg, sq));
  CHECK(body_less(hseg(), vseg()));
  CHECK_FALSE(body_less(vseg(), hseg()));
}

TEST_CASE("support values match the square and segment fixtures") {
  ConvexBody sq = square_half();
  CHECK(support_plus(sq, qv({1, 0})) == Quad(h));
  CHECK(support_minus(sq, qv({1, 0})) == Quad(-h));
  CHECK(support_plus(sq, qv({1, 1})) == Quad(1));
  CHECK(support_minus(sq, qv({1, 1})) == Quad(-1));

  SupportValues sv = support_eval(sq, {1.0, 0.0});
  CHECK(sv.plus == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(sv.minus == doctest::Approx(-0.5).epsilon(1e-14));

  ConvexBody unit_seg = convex_body(2, {qv({0, 0}), qv({1, 0})});
  Quad inv_sqrt2 = quad_sqrt(2) / Quad(2);
  CHECK(support_plus(unit_seg, Vec{inv_sqrt2, inv_sqrt2}) == inv_sqrt2);
  CHECK(support_minus(unit_seg, Vec{inv_sqrt2, inv_sqrt2}) == Quad(0));
  double is2 = 1.0 / std::sqrt(2.0);
  CHECK(support_eval(unit_seg, {is2, is2}).plus == doctest::Approx(is2).epsilon(1e-12));

  Vec p = qv({rat(1, 3), rat(-1, 4)});
  ConvexBody single = convex_body(2, {p});
  Vec b = qv({2, 5});
  CHECK(support_plus(single, b) == dot(b, p));
  CHECK(support_plus(single, b) == support_minus(single, b));

  CHECK(thrown_code([&] { (void)support_plus(sq, qv({1, 0, 0})); }) == Errc::DimensionMismatch);

  DirectionSet dirs = make_direction_set(2, 0.2);
  std::vector<double> table = support_table(sq, dirs);
  CHECK(table.size() == dirs.dirs.size());
  CHECK(table[0] == doctest::Approx(0.5).epsilon(1e-14));  // first direction is (1, 0)
}

TEST_CASE("minkowski sums reproduce the exact half-square example") {
  ConvexBody a = convex_body(2, {qv({0, 0}), qv({1, 0})});
  ConvexBody b = convex_body(2, {qv({0, 0}), qv({0, 1})});
  ConvexBody sum = minkowski_sum(a, b, h, h);
  CHECK(sum == convex_body(2, {qv({0, 0}), qv({h, 0}), qv({0, h}), qv({h, h})}));

  CHECK(minkowski_sum(a, b, rat(1), rat(0)) == a);
  CHECK(minkowski_sum(a, a, h, h) == a);
  ConvexBody sq = square_half();
  CHECK(minkowski_sum(sq, sq, h, h) == sq);

  // Support additivity, exact, on mixed directions.
  for (const Vec& dir : {qv({1, 0}), qv({0, 1}), qv({3, -2}), qv({rat(-1, 2), rat(5, 3)})}) {
    CHECK(support_plus(sum, dir) ==
          Quad(h) * support_plus(a, dir) + Quad(h) * support_plus(b, dir));
  }

  CHECK(thrown_code([&] { (void)minkowski_sum(a, b, rat(-1, 2), h); }) == Errc::ConfigInvalid);
  CHECK(thrown_code([&] { (void)minkowski_sum(a, b, rat(1), rat(1)); }) == Errc::LeavesUnitBall);
  ConvexBody p3 = convex_body(3, {qv({0, 0, 0})});
  CHECK(thrown_code([&] { (void)minkowski_sum(a, p3, h, h); }) == Errc::DimensionMismatch);
}

TEST_CASE("direction sets cover the sphere and validate input lists") {
  DirectionSet flat = make_direction_set(2, 0.2);
  CHECK(flat.dirs.size() == 16);
  CHECK(flat.covering_radius == doctest::Approx(M_PI / 16).epsilon(1e-12));
  for (const auto& dir : flat.dirs) {
    CHECK(std::abs(std::hypot(dir[0], dir[1]) - 1.0) <= 1e-12);
  }

  DirectionSet solid = make_direction_set(3, 0.25);
  CHECK(solid.d == 3);
  CHECK(solid.dirs.size() >= 32);
  CHECK(solid.covering_radius <= 0.25);
  for (const auto& dir : solid.dirs) {
    double n2 = dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2];
    CHECK(std::abs(std::sqrt(n2) - 1.0) <= 1e-9);
  }

  CHECK(thrown_code([] { (void)make_direction_set(4, 0.2); }) == Errc::Unsupported);
  CHECK(thrown_code([] { (void)make_direction_set(2, 0.0); }) == Errc::ConfigInvalid);
  CHECK(thrown_code([] { (void)make_direction_set(2, 1.5); }) == Errc::ConfigInvalid);

  DirectionSet copy = direction_set_from(2, flat.dirs);
  CHECK(copy.dirs.size() == flat.dirs.size());
  CHECK(copy.covering_radius <= 0.2 + 1e-9);
  CHECK(thrown_code([] { (void)direction_set_from(2, {{0.5, 0.0}}); }) == Errc::ConfigInvalid);
  CHECK(thrown_code([] {
          (void)direction_set_from(2, {{1.0, 0.0}, {0.0, 1.0}});
        }) == Errc::ConfigInvalid);  // never points left: no positive spanning
  CHECK(thrown_code([] { (void)direction_set_from(2, {{1.0, 0.0, 0.0}}); }) ==
        Errc::DimensionMismatch);
}

TEST_CASE("the cone metric is the largest support gap over the directions") {
  DirectionSet dirs = make_direction_set(2, 0.2);
  ConvexBody sq = square_half();
  CHECK(cone_metric(sq, sq, dirs) == 0.0);

  ConvexBody stub = convex_body(2, {qv({0, 0}), qv({rat(3, 4), 0})});
  double d1 = cone_metric(origin2(), stub, dirs);
  CHECK(d1 == doctest::Approx(0.75).epsilon(1e-14));  // realized at direction (1, 0)
  CHECK(cone_metric(stub, origin2(), dirs) == d1);

  ConvexBody quarter = convex_body(
      2, {qv({rat(-1, 4), rat(-1, 4)}), qv({rat(-1, 4), rat(1, 4)}), qv({rat(1, 4), rat(-1, 4)}),
          qv({rat(1, 4), rat(1, 4)})});
  double gap = cone_metric(sq, quarter, dirs);
  CHECK(gap == doctest::Approx(std::sqrt(2.0) / 4).epsilon(1e-12));
  CHECK(cone_metric(sq, quarter, dirs) <=
        cone_metric(sq, origin2(), dirs) + cone_metric(origin2(), quarter, dirs) + 1e-15);
}

TEST_CASE("body measures aggregate atoms and the barycenter interpolates") {
  ConvexBody sq = square_half();
  BodyMeasure dirac = make_body_measure(2, {{sq, rat(1)}});
  CHECK(dirac.atoms.size() == 1);
  CHECK(barycenter(dirac) == sq);

  // Equal bodies merge into one atom.
  BodyMeasure merged = make_body_measure(2, {{sq, h}, {square_half(), h}});
  CHECK(merged.atoms.size() == 1);
  CHECK(merged.atoms[0].weight == 1);

  BodyMeasure two = make_body_measure(2, {{hseg(), h}, {vseg(), h}});
  CHECK(two.atoms.size() == 2);
  CHECK(two.atoms[0].body == hseg());  // canonical order
  ConvexBody bary = barycenter(two);
  Rat q = rat(1, 4);
  CHECK(bary == convex_body(2, {qv({-q, -q}), qv({-q, q}), qv({q, -q}), qv({q, q})}));

  // Three point masses average like vectors.
  ConvexBody pa = convex_body(2, {qv({h, 0})});
  ConvexBody pb = convex_body(2, {qv({0, h})});
  ConvexBody pc = convex_body(2, {qv({-h, -h})});
  BodyMeasure three =
      make_body_measure(2, {{pa, rat(1, 3)}, {pb, rat(1, 3)}, {pc, rat(1, 3)}});
  CHECK(barycenter(three) == convex_body(2, {qv({0, rat(0)})}));

  ConvexBody face = convex_body(2, {qv({-h, -h}), qv({h, -h})});
  BodyMeasure tilted = make_body_measure(2, {{sq, rat(9, 10)}, {face, rat(1, 10)}});
  ConvexBody tbary = barycenter(tilted);
  Rat t = rat(2, 5);
  CHECK(tbary == convex_body(2, {qv({-h, -h}), qv({-h, t}), qv({h, -h}), qv({h, t})}));

  CHECK(thrown_code([] { (void)make_body_measure(2, {}); }) == Errc::EmptyMeasure);
  CHECK(thrown_code([&] { (void)make_body_measure(2, {{sq, rat(1, 2)}}); }) ==
        Errc::InvalidMeasure);
  CHECK(thrown_code([&] {
          (void)make_body_measure(2, {{sq, rat(3, 2)}, {face, rat(-1, 2)}});
        }) == Errc::InvalidMeasure);
  CHECK(thrown_code([&] { (void)make_body_measure(3, {{sq, rat(1)}}); }) ==
        Errc::DimensionMismatch);
}

TEST_CASE("extreme point forcing holds for bodies inside bodies") {
  ConvexBody sq = square_half();
  CHECK(extreme_point_check(sq, sq, sq));
  ConvexBody face = convex_body(2, {qv({-h, -h}), qv({h, -h})});
  CHECK(extreme_point_check(sq, sq, face));  // midpoint shrinks: vacuous
  CHECK(extreme_point_check(sq, face, face));
  CHECK(extreme_point_check(sq, origin2(), sq));

  ConvexBody wide = convex_body(2, {qv({-1, 0}), qv({1, 0})});
  CHECK(thrown_code([&] { (void)extreme_point_check(sq, wide, sq); }) == Errc::NotContained);
  CHECK(thrown_code([&] { (void)extreme_point_check(sq, sq, wide); }) == Errc::NotContained);

  std::mt19937_64 rng(411);
  for (int trial = 0; trial < 40; ++trial) {
    int d = trial % 2 ? 3 : 2;
    ConvexBody c = rand_body(rng, d);
    ConvexBody a = rand_subbody(rng, c);
    ConvexBody b = rand_subbody(rng, c);
    CHECK(extreme_point_check(c, a, b));
  }
}

TEST_CASE("orthogonal actions move bodies exactly") {
  ConvexBody sq = square_half();
  CHECK(apply_action(mat_identity(2), sq) == sq);

  Mat quarter_turn = m2(rat(0), rat(-1), rat(1), rat(0));
  CHECK(apply_action(quarter_turn, sq) == sq);
  ConvexBody a = convex_body(2, {qv({0, 0}), qv({1, 0})});
  CHECK(apply_action(quarter_turn, a) == convex_body(2, {qv({0, 0}), qv({0, 1})}));

  Mat flip_x = m2(rat(-1), rat(0), rat(0), rat(1));
  CHECK(apply_action(flip_x, a) == convex_body(2, {qv({-1, 0}), qv({0, 0})}));

  ConvexBody tri = triangle3();
  CHECK(apply_action(rot3(), tri) == tri);
  Mat mirror = m2(rat(1), rat(0), rat(0), rat(-1));
  CHECK(apply_action(mirror, tri) == tri);

  // Support covariance: the support of g C in direction b reads C at g^T b.
  Mat gt = mat_transpose(rot3());
  for (const Vec& dir : {qv({1, 0}), qv({2, -3}), Vec{quad_sqrt(3), Quad(1)}}) {
    CHECK(support_plus(apply_action(rot3(), tri), dir) == support_plus(tri, mat_vec(gt, dir)));
  }

  CHECK(thrown_code([&] { (void)apply_action(m2(rat(1), rat(1), rat(0), rat(1)), sq); }) ==
        Errc::NotOrthogonal);
  CHECK(thrown_code([&] { (void)apply_action(mat_identity(3), sq); }) ==
        Errc::DimensionMismatch);
}

TEST_CASE("matrix group closures enumerate the small isometry groups") {
  Mat ra = m2(rat(1), rat(0), rat(0), rat(-1));
  Mat rb = m2(rat(-1), rat(0), rat(0), rat(1));
  CHECK(matrix_group_closure({ra, rb}).size() == 4);  // Klein four-group

  Mat quarter_turn = m2(rat(0), rat(-1), rat(1), rat(0));
  CHECK(matrix_group_closure({quarter_turn}).size() == 4);
  CHECK(matrix_group_closure({quarter_turn, ra}).size() == 8);  // full square symmetries
  CHECK(matrix_group_closure({rot3()}).size() == 3);
  CHECK(matrix_group_closure({mat_identity(2)}).size() == 1);

  CHECK(thrown_code([&] { (void)matrix_group_closure({quarter_turn, ra}, 5); }) ==
        Errc::GroupTooLarge);
  CHECK(thrown_code([] { (void)matrix_group_closure({}); }) == Errc::ConfigInvalid);
}

TEST_CASE("fix sets slice bodies along fixed subspaces") {
  ConvexBody sq = square_half();
  CHECK(*fix_set({}, sq) == sq);
  CHECK(*fix_set({mat_identity(2)}, sq) == sq);

  Mat neg = m2(rat(-1), rat(0), rat(0), rat(-1));
  CHECK(*fix_set({neg}, sq) == origin2());

  Mat mirror = m2(rat(1), rat(0), rat(0), rat(-1));
  CHECK(*fix_set({mirror}, sq) == hseg());
  CHECK(*fix_set({m2(rat(-1), rat(0), rat(0), rat(1))}, sq) == vseg());

  // Mirror across the diagonal: the fixed chord of the triangle.
  Mat swap = m2(rat(0), rat(1), rat(1), rat(0));
  CHECK(*fix_set({swap}, sq) == convex_body(2, {qv({-h, -h}), qv({h, h})}));

  // Two reflections together cut down to the origin.
  CHECK(*fix_set({mirror, swap}, sq) == origin2());
  CHECK(body_contains_body(*fix_set({mirror}, sq), *fix_set({mirror, swap}, sq)));

  // Rotation about the z axis fixes the vertical diagonal of the octahedron.
  ConvexBody oct = convex_body(3, {qv({h, 0, 0}), qv({-h, 0, 0}), qv({0, h, 0}),
                                   qv({0, -h, 0}), qv({0, 0, h}), qv({0, 0, -h})});
  Mat zrot = Mat{{Quad(0), Quad(-1), Quad(0)}, {Quad(1), Quad(0), Quad(0)},
                 {Quad(0), Quad(0), Quad(1)}};
  CHECK(*fix_set({zrot}, oct) == convex_body(3, {qv({0, 0, -h}), qv({0, 0, h})}));

  // The slice misses bodies that avoid the fixed subspace.
  ConvexBody off = convex_body(2, {qv({h, rat(1, 4)})});
  CHECK_FALSE(fix_set({neg}, off).has_value());
  CHECK_FALSE(fix_set({mirror}, off).has_value());

  // Equivariance under conjugation: Fix(g H g^-1) on g C is g Fix(H) on C.
  Mat quarter_turn = m2(rat(0), rat(-1), rat(1), rat(0));
  Mat conj = mat_mul(mat_mul(quarter_turn, mirror), mat_transpose(quarter_turn));
  ConvexBody lhs = *fix_set({conj}, apply_action(quarter_turn, sq));
  CHECK(lhs == apply_action(quarter_turn, *fix_set({mirror}, sq)));

  CHECK(thrown_code([&] {
          (void)fix_set({m2(rat(1), rat(1), rat(0), rat(1))}, sq);
        }) == Errc::NotOrthogonal);
}

TEST_CASE("matrix representations extend generator images along the table") {
  MarkedGroup klein = MarkedGroup::elementary_abelian_2(2);
  Mat ra = m2(rat(1), rat(0), rat(0), rat(-1));
  Mat rb = m2(rat(-1), rat(0), rat(0), rat(1));
  MatrixRep rep = matrix_rep(klein, {ra, rb});
  CHECK(rep.d == 2);
  CHECK(rep.images.size() == 4);
  CHECK(mat_eq(rep.image_of(klein.identity()), mat_identity(2)));
  Elem ab = klein.multiply(klein.letter_elem(0), klein.letter_elem(2));
  CHECK(mat_eq(rep.image_of(ab), m2(rat(-1), rat(0), rat(0), rat(-1))));

  // The dihedral realization of the symmetric group on three letters.
  MarkedGroup s3 = MarkedGroup::symmetric_group(3);
  Mat mirror = m2(rat(1), rat(0), rat(0), rat(-1));
  MatrixRep dihedral = matrix_rep(s3, {mirror, rot3()});
  CHECK(dihedral.images.size() == 6);
  for (const Mat& m : dihedral.images) CHECK(is_orthogonal(m));
  Elem s = s3.letter_elem(0), c = s3.letter_elem(2);
  CHECK(mat_eq(dihedral.image_of(s3.multiply(s, c)),
               mat_mul(dihedral.image_of(s), dihedral.image_of(c))));
  CHECK_FALSE(mat_eq(mat_mul(dihedral.image_of(s), dihedral.image_of(c)),
                     mat_mul(dihedral.image_of(c), dihedral.image_of(s))));

  // A quarter turn has order four, not three: the relations reject it.
  Mat quarter_turn = m2(rat(0), rat(-1), rat(1), rat(0));
  CHECK(thrown_code([&] { (void)matrix_rep(s3, {mirror, quarter_turn}); }) ==
        Errc::NotAHomomorphism);
  CHECK(thrown_code([&] { (void)matrix_rep(s3, {mirror}); }) == Errc::ConfigInvalid);
  CHECK(thrown_code([&] {
          (void)matrix_rep(MarkedGroup::free_group(1), {mirror});
        }) == Errc::Unsupported);
  CHECK(thrown_code([&] {
          (void)rep.image_of(MarkedGroup::free_group(1).identity());
        }) == Errc::FamilyMismatch);
}

TEST_CASE("the fix pushforward turns invariant subgroup measures into body measures") {
  MarkedGroup klein = MarkedGroup::elementary_abelian_2(2);
  Mat ra = m2(rat(1), rat(0), rat(0), rat(-1));
  Mat rb = m2(rat(-1), rat(0), rat(0), rat(1));
  MatrixRep rep = matrix_rep(klein, {ra, rb});
  ConvexBody sq = square_half();

  BodyMeasure whole_c = pushforward_fix(IrsDistribution::dirac(Subgroup::trivial(klein)), rep, sq);
  CHECK(whole_c.atoms.size() == 1);
  CHECK(whole_c.atoms[0].body == sq);

  BodyMeasure origin_only =
      pushforward_fix(IrsDistribution::dirac(Subgroup::whole(klein)), rep, sq);
  CHECK(origin_only.atoms.size() == 1);
  CHECK(origin_only.atoms[0].body == origin2());

  Subgroup ha = Subgroup::generated_by(klein, {klein.letter_elem(0)});
  Subgroup hb = Subgroup::generated_by(klein, {klein.letter_elem(2)});
  IrsDistribution mu = IrsDistribution::from_atoms(klein, {{ha, h}, {hb, h}});
  BodyMeasure nu = pushforward_fix(mu, rep, sq);
  REQUIRE(nu.atoms.size() == 2);
  CHECK(nu.atoms[0].body == hseg());
  CHECK(nu.atoms[1].body == vseg());
  CHECK(nu.atoms[0].weight == h);

  // The barycenter is a fixed body of the whole action.
  ConvexBody bary = barycenter(nu);
  Rat q = rat(1, 4);
  CHECK(bary == convex_body(2, {qv({-q, -q}), qv({-q, q}), qv({q, -q}), qv({q, q})}));
  for (const Mat& m : rep.images) CHECK(apply_action(m, bary) == bary);

  ConvexBody off = convex_body(2, {qv({h, rat(1, 4)})});
  CHECK(thrown_code([&] { (void)pushforward_fix(IrsDistribution::dirac(ha), rep, off); }) ==
        Errc::EmptySet);
  CHECK(thrown_code([&] {
          (void)pushforward_fix(mu, rep, convex_body(3, {qv({0, 0, 0})}));
        }) == Errc::DimensionMismatch);

  // Nonabelian run: the orbit of a reflection subgroup of the dihedral group.
  MarkedGroup s3 = MarkedGroup::symmetric_group(3);
  Mat mirror = m2(rat(1), rat(0), rat(0), rat(-1));
  MatrixRep dihedral = matrix_rep(s3, {mirror, rot3()});
  ConvexBody tri = triangle3();
  Subgroup refl = Subgroup::generated_by(s3, {s3.letter_elem(0)});

  CHECK(thrown_code([&] {
          (void)pushforward_fix(IrsDistribution::dirac(refl), dihedral, tri);
        }) == Errc::NotInvariantMeasure);

  IrsDistribution orbit = IrsDistribution::uniform_on_conjugates(refl);
  REQUIRE(orbit.atoms().size() == 3);
  BodyMeasure mirrors = pushforward_fix(orbit, dihedral, tri);
  CHECK(mirrors.atoms.size() == 3);
  ConvexBody chord = convex_body(2, {qv({-h, 0}), qv({1, 0})});
  bool found_chord = false;
  for (const BodyAtom& atom : mirrors.atoms) {
    CHECK(atom.weight == rat(1, 3));
    CHECK(atom.body.verts.size() == 2);
    if (atom.body == chord) found_chord = true;
  }
  CHECK(found_chord);
  ConvexBody tri_bary = barycenter(mirrors);
  CHECK(apply_action(rot3(), tri_bary) == tri_bary);
  CHECK(apply_action(mirror, tri_bary) == tri_bary);
  CHECK(body_contains_body(tri, tri_bary));
  CHECK(tri_bary != tri);
}

TEST_CASE("the invariant measure test grades barycenters against the reference body") {
  DirectionSet dirs = make_direction_set(2, 0.2);
  ConvexBody sq = square_half();

  InvariantMeasureReport ok =
      invariant_measure_test(make_body_measure(2, {{sq, rat(1)}}), sq, dirs);
  CHECK(ok.verdict == InvariantVerdict::Consistent);
  CHECK(ok.support_gap == 0.0);

  ConvexBody face = convex_body(2, {qv({-h, -h}), qv({h, -h})});
  InvariantMeasureReport proper = invariant_measure_test(
      make_body_measure(2, {{sq, rat(9, 10)}, {face, rat(1, 10)}}), sq, dirs);
  CHECK(proper.verdict == InvariantVerdict::BarycenterProper);
  CHECK(proper.support_gap == doctest::Approx(0.1).epsilon(1e-12));
  REQUIRE(proper.witness.size() == 2);
  CHECK(proper.witness[0] == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(proper.witness[1] == doctest::Approx(1.0).epsilon(1e-12));

  BodyMeasure split = make_body_measure(2, {{hseg(), h}, {vseg(), h}});
  InvariantMeasureReport mid = invariant_measure_test(split, sq, dirs);
  CHECK(mid.verdict == InvariantVerdict::BarycenterProper);
  CHECK(mid.support_gap == doctest::Approx(std::sqrt(2.0) / 4).epsilon(1e-12));

  ConvexBody wide = convex_body(2, {qv({-1, 0}), qv({1, 0})});
  CHECK(thrown_code([&] {
          (void)invariant_measure_test(make_body_measure(2, {{wide, rat(1)}}), sq, dirs);
        }) == Errc::AtomNotContained);
  CHECK(thrown_code([&] {
          (void)invariant_measure_test(split, convex_body(3, {qv({0, 0, 0})}), dirs);
        }) == Errc::DimensionMismatch);
}

TEST_CASE("bodies and measures round trip through their text forms") {
  Quad r = quad_sqrt(2) / Quad(2);
  ConvexBody diamond = convex_body(2, {Vec{r, Quad(0)}, Vec{-r, Quad(0)}, Vec{Quad(0), r},
                                       Vec{Quad(0), -r}});
  std::string text = body_to_text(diamond);
  CHECK(body_from_text(text) == diamond);
  CHECK(body_to_text(body_from_text(text)) == text);
  CHECK(text.substr(0, 14) == "convex-body v1");

  BodyMeasure nu = make_body_measure(
      2, {{diamond, rat(2, 3)}, {convex_body(2, {qv({0, 0})}), rat(1, 3)}});
  std::string mtext = measure_to_text(nu);
  BodyMeasure back = measure_from_text(mtext);
  CHECK(back.atoms.size() == 2);
  CHECK(measure_to_text(back) == mtext);
  CHECK(back.atoms[0].body == nu.atoms[0].body);
  CHECK(back.atoms[0].weight == nu.atoms[0].weight);
  CHECK(barycenter(back) == barycenter(nu));

  CHECK(thrown_code([] { (void)body_from_text("square v1\nend\n"); }) == Errc::ParseError);
  CHECK(thrown_code([] { (void)body_from_text("convex-body v1\ndim 2\nvertex 0\nend\n"); }) ==
        Errc::ParseError);
  CHECK(thrown_code([] {
          (void)body_from_text("convex-body v1\ndim 2\nvertex 0 0\n");
        }) == Errc::ParseError);
  CHECK(thrown_code([&] { (void)body_from_text(text + "extra\n"); }) == Errc::ParseError);
  CHECK(thrown_code([] {
          (void)measure_from_text("body-measure v1\ndim 2\natom x\nend\n");
        }) == Errc::ParseError);
  CHECK(body_from_text(text + "\n\n") == diamond);  // trailing blank lines are fine
}

TEST_CASE("seeded sweeps keep the exact cone identities") {
  std::mt19937_64 rng(2026);
  std::uniform_int_distribution<int> wdist(0, 3);
  DirectionSet flat = make_direction_set(2, 0.2);
  DirectionSet solid = make_direction_set(3, 0.3);
  for (int trial = 0; trial < 30; ++trial) {
    int d = trial % 2 ? 3 : 2;
    ConvexBody a = rand_body(rng, d);
    ConvexBody b = rand_body(rng, d);

    // Support additivity for a random cone combination with lambda + mu <= 1.
    Rat lambda = rat(wdist(rng), 6), mu = rat(wdist(rng), 6);
    ConvexBody sum = minkowski_sum(a, b, lambda, mu);
    for (int k = 0; k < 3; ++k) {
      Vec dir = rand_point(rng, d);
      CHECK(support_plus(sum, dir) == Quad(lambda) * support_plus(a, dir) +
                                          Quad(mu) * support_plus(b, dir));
    }

    // Barycenter equivariance under a random signed permutation.
    Mat g = signed_perm(rng, d);
    BodyMeasure nu = make_body_measure(d, {{a, rat(1, 3)}, {b, rat(2, 3)}});
    BodyMeasure moved = make_body_measure(
        d, {{apply_action(g, a), rat(1, 3)}, {apply_action(g, b), rat(2, 3)}});
    CHECK(barycenter(moved) == apply_action(g, barycenter(nu)));

    // Fix sets shrink as the generating set grows, equivariantly.
    Mat g2 = signed_perm(rng, d);
    std::optional<ConvexBody> small = fix_set({g}, a);
    std::optional<ConvexBody> both = fix_set({g, g2}, a);
    if (both.has_value()) {
      REQUIRE(small.has_value());
      CHECK(body_contains_body(*small, *both));
    }
    if (small.has_value()) {
      Mat conj = mat_mul(mat_mul(g2, g), mat_transpose(g2));
      std::optional<ConvexBody> moved_fix = fix_set({conj}, apply_action(g2, a));
      REQUIRE(moved_fix.has_value());
      CHECK(*moved_fix == apply_action(g2, *small));
    }

    // No random measure over sub-bodies of c is ever graded Violated.
    ConvexBody c = rand_body(rng, d);
    BodyMeasure inner = make_body_measure(
        d, {{rand_subbody(rng, c), h}, {rand_subbody(rng, c), rat(1, 4)}, {c, rat(1, 4)}});
    CHECK(invariant_measure_test(inner, c, d == 2 ? flat : solid).verdict !=
          InvariantVerdict::Violated);
  }
}
