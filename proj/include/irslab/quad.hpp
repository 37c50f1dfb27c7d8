#pragma once

#include <string>
#include <vector>

#include "irslab/error.hpp"
#include "irslab/rational.hpp"

namespace irslab {

// Exact scalar a + b*sqrt(s) with rational a, b and a square-free radicand
// s >= 2; rational values are normalized to b = 0, s = 0. Values from
// different radicands may be mixed only when one side is rational.
struct Quad {
  Rat a;
  Rat b;
  long s = 0;

  Quad() : a(0), b(0) {}
  Quad(long v) : a(v), b(0) {}  // NOLINT: implicit by design, mirrors Rat
  Quad(Rat v) : a(std::move(v)), b(0) {}
};

// sqrt(n) for n >= 0 with the square part extracted exactly.
Quad quad_sqrt(long n);
Quad quad_make(Rat a, Rat b, long s);

Quad operator+(const Quad& x, const Quad& y);
Quad operator-(const Quad& x, const Quad& y);
Quad operator-(const Quad& x);
Quad operator*(const Quad& x, const Quad& y);
Quad operator/(const Quad& x, const Quad& y);

int quad_sgn(const Quad& x);
bool operator==(const Quad& x, const Quad& y);
bool operator!=(const Quad& x, const Quad& y);
bool operator<(const Quad& x, const Quad& y);
bool operator<=(const Quad& x, const Quad& y);
bool operator>(const Quad& x, const Quad& y);
bool operator>=(const Quad& x, const Quad& y);

double quad_double(const Quad& x);
// Canonical text: "p/q" or "p" for rationals, "(a+b*sqrt(s))/q" otherwise.
std::string quad_str(const Quad& x);
Quad quad_parse(const std::string& text);

using Vec = std::vector<Quad>;
using Mat = std::vector<Vec>;  // rows

Quad dot(const Vec& x, const Vec& y);
Vec mat_vec(const Mat& m, const Vec& x);
Mat mat_mul(const Mat& x, const Mat& y);
Mat mat_transpose(const Mat& m);
Mat mat_identity(int d);
bool mat_eq(const Mat& x, const Mat& y);
// Exact check of m^T m = I for a square matrix.
bool is_orthogonal(const Mat& m);

}  // namespace irslab
