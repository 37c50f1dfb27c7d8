#pragma once

#include <optional>
#include <string>
#include <vector>

#include "irslab/irs.hpp"
#include "irslab/quad.hpp"

namespace irslab {

// Finite stand-in for a dense set of test directions on the unit sphere:
// every unit vector lies within covering_radius (radians) of some entry.
struct DirectionSet {
  int d = 0;
  std::vector<std::vector<double>> dirs;
  double covering_radius = 0.0;
};
DirectionSet make_direction_set(int d, double covering_radius = 0.2);
// Validates unit norms and positive spanning, estimates the covering radius.
DirectionSet direction_set_from(int d, std::vector<std::vector<double>> dirs);

// Polytope inside the closed unit ball, held as its extreme points with exact
// coordinates, lexicographically sorted. Equality is exact vertex equality.
struct ConvexBody {
  int d = 0;
  std::vector<Vec> verts;
};
// Canonicalizes: deduplicates, drops non-extreme points, checks the ball.
ConvexBody convex_body(int d, const std::vector<Vec>& points);
bool operator==(const ConvexBody& x, const ConvexBody& y);
bool operator!=(const ConvexBody& x, const ConvexBody& y);
bool body_less(const ConvexBody& x, const ConvexBody& y);

bool body_contains(const ConvexBody& c, const Vec& p);
bool body_contains_body(const ConvexBody& c, const ConvexBody& a);

Quad support_plus(const ConvexBody& c, const Vec& b);
Quad support_minus(const ConvexBody& c, const Vec& b);
struct SupportValues {
  double plus = 0.0;
  double minus = 0.0;
};
SupportValues support_eval(const ConvexBody& c, const std::vector<double>& b);
// One support value per direction, fixed order (the cacheable table).
std::vector<double> support_table(const ConvexBody& c, const DirectionSet& dirs);

// lambda*A + mu*B with vertex arithmetic and hull filtering.
ConvexBody minkowski_sum(const ConvexBody& a, const ConvexBody& b, const Rat& lambda,
                         const Rat& mu);
double cone_metric(const ConvexBody& a, const ConvexBody& b, const DirectionSet& dirs);

struct BodyAtom {
  ConvexBody body;
  Rat weight;
};
// Atoms pairwise distinct (aggregated on construction), weights positive and
// summing to one, sorted canonically.
struct BodyMeasure {
  int d = 0;
  std::vector<BodyAtom> atoms;
};
BodyMeasure make_body_measure(int d, std::vector<BodyAtom> atoms);
ConvexBody barycenter(const BodyMeasure& nu);

// Verifies the extreme-point implication: if (A+B)/2 = C for A, B inside C,
// then A = B = C. Returns the truth of the implication for this triple.
bool extreme_point_check(const ConvexBody& c, const ConvexBody& a, const ConvexBody& b);

ConvexBody apply_action(const Mat& g, const ConvexBody& c);
std::vector<Mat> matrix_group_closure(const std::vector<Mat>& gens, std::size_t cap = 4096);

// C intersected with the common fixed subspace of the given orthogonal
// matrices; empty only when that slice misses C entirely.
std::optional<ConvexBody> fix_set(const std::vector<Mat>& gens, const ConvexBody& c);

// Orthogonal matrix realization of a finite marked group, one image per
// element index, extended from generator images along the multiplication
// table (checked to be a homomorphism).
struct MatrixRep {
  MarkedGroup parent;
  int d = 0;
  std::vector<Mat> images;
  const Mat& image_of(const Elem& g) const;
};
MatrixRep matrix_rep(const MarkedGroup& parent, const std::vector<Mat>& generator_images);

// Image of a conjugation-invariant subgroup distribution under H -> Fix(H)^C;
// aggregates equal bodies and verifies equivariance atom by atom.
BodyMeasure pushforward_fix(const IrsDistribution& mu, const MatrixRep& rep,
                            const ConvexBody& c);

enum class InvariantVerdict { Consistent, Violated, BarycenterProper };
struct InvariantMeasureReport {
  InvariantVerdict verdict = InvariantVerdict::Consistent;
  std::vector<double> witness;  // direction of the largest support gap
  double support_gap = 0.0;
};
// Checks the mechanism "barycenter(nu) = C forces nu = delta_C": returns
// Consistent or Violated when the barycenter equals C, else BarycenterProper.
InvariantMeasureReport invariant_measure_test(const BodyMeasure& nu, const ConvexBody& c,
                                              const DirectionSet& dirs);

std::string body_to_text(const ConvexBody& c);
ConvexBody body_from_text(const std::string& text);
std::string measure_to_text(const BodyMeasure& nu);
BodyMeasure measure_from_text(const std::string& text);

}  // namespace irslab
