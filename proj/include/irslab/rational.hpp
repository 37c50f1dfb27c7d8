#pragma once

#include <gmpxx.h>

#include <string>

#include "irslab/error.hpp"

namespace irslab {

// Exact rational scalar used for all measure weights, Haar ratios and
// return probabilities. Backed by GMP.
using Rat = mpq_class;

inline Rat rat(long num, long den = 1) {
  require(den != 0, Errc::ParseError, "zero denominator");
  Rat q(num, den);
  q.canonicalize();
  return q;
}

inline std::string rat_str(const Rat& q) { return q.get_str(); }

// Parses "p", "p/q" or a decimal like "0.25" (finite expansion only).
Rat rat_parse(const std::string& s);

inline double rat_to_double(const Rat& q) { return q.get_d(); }

}  // namespace irslab
