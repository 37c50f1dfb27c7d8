#include "irslab/quad.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>

namespace irslab {

namespace {

Quad normalized(Rat a, Rat b, long s) {
  Quad q;
  q.a = std::move(a);
  q.b = std::move(b);
  q.a.canonicalize();
  q.b.canonicalize();
  q.s = q.b == 0 ? 0 : s;
  return q;
}

// Common radicand for a binary operation; rational operands are flexible.
long joint_radicand(const Quad& x, const Quad& y) {
  if (x.s == 0) return y.s;
  if (y.s == 0) return x.s;
  require(x.s == y.s, Errc::FieldMismatch,
          "cannot mix sqrt(" + std::to_string(x.s) + ") with sqrt(" + std::to_string(y.s) + ")");
  return x.s;
}

}  // namespace

Quad quad_make(Rat a, Rat b, long s) {
  if (b != 0) {
    require(s >= 2, Errc::FieldMismatch, "radicand must be at least 2");
    for (long f = 2; f * f <= s; ++f)
      require(s % (f * f) != 0, Errc::FieldMismatch, "radicand must be square-free");
  }
  return normalized(std::move(a), std::move(b), s);
}

Quad quad_sqrt(long n) {
  require(n >= 0, Errc::FieldMismatch, "negative radicand");
  long outside = 1, inside = n;
  for (long f = 2; f * f <= inside;) {
    if (inside % (f * f) == 0) {
      outside *= f;
      inside /= f * f;
    } else {
      ++f;
    }
  }
  if (inside <= 1) return Quad(Rat(outside * inside));
  return normalized(Rat(0), Rat(outside), inside);
}

Quad operator+(const Quad& x, const Quad& y) {
  long s = joint_radicand(x, y);
  return normalized(x.a + y.a, x.b + y.b, s);
}

Quad operator-(const Quad& x, const Quad& y) {
  long s = joint_radicand(x, y);
  return normalized(x.a - y.a, x.b - y.b, s);
}

Quad operator-(const Quad& x) { return normalized(-x.a, -x.b, x.s); }

Quad operator*(const Quad& x, const Quad& y) {
  long s = joint_radicand(x, y);
  return normalized(x.a * y.a + x.b * y.b * s, x.a * y.b + x.b * y.a, s);
}

Quad operator/(const Quad& x, const Quad& y) {
  require(quad_sgn(y) != 0, Errc::FieldMismatch, "division by zero");
  long s = joint_radicand(x, y);
  Rat norm = y.a * y.a - y.b * y.b * s;  // nonzero: sqrt(s) is irrational
  return normalized((x.a * y.a - x.b * y.b * s) / norm, (x.b * y.a - x.a * y.b) / norm, s);
}

int quad_sgn(const Quad& x) {
  int sa = sgn(x.a), sb = sgn(x.b);
  if (sb == 0) return sa;
  if (sa == 0) return sb;
  if (sa == sb) return sa;
  // Opposite signs: compare a^2 against b^2 s.
  int c = cmp(x.a * x.a, x.b * x.b * x.s);
  if (c == 0) return 0;
  return c > 0 ? sa : sb;
}

bool operator==(const Quad& x, const Quad& y) { return quad_sgn(x - y) == 0; }
bool operator!=(const Quad& x, const Quad& y) { return quad_sgn(x - y) != 0; }
bool operator<(const Quad& x, const Quad& y) { return quad_sgn(x - y) < 0; }
bool operator<=(const Quad& x, const Quad& y) { return quad_sgn(x - y) <= 0; }
bool operator>(const Quad& x, const Quad& y) { return quad_sgn(x - y) > 0; }
bool operator>=(const Quad& x, const Quad& y) { return quad_sgn(x - y) >= 0; }

double quad_double(const Quad& x) {
  return x.a.get_d() + x.b.get_d() * std::sqrt(static_cast<double>(x.s));
}

std::string quad_str(const Quad& x) {
  if (x.b == 0) {
    std::string out = x.a.get_num().get_str();
    if (x.a.get_den() != 1) out += "/" + x.a.get_den().get_str();
    return out;
  }
  mpz_class q = lcm(x.a.get_den(), x.b.get_den());
  mpz_class alpha = x.a.get_num() * (q / x.a.get_den());
  mpz_class beta = x.b.get_num() * (q / x.b.get_den());
  std::string out = "(" + alpha.get_str();
  out += beta < 0 ? "-" : "+";
  out += mpz_class(abs(beta)).get_str() + "*sqrt(" + std::to_string(x.s) + "))/" + q.get_str();
  return out;
}

Quad quad_parse(const std::string& text) {
  require(!text.empty(), Errc::ParseError, "empty scalar");
  auto as_int = [&](std::string part) {
    require(!part.empty(), Errc::ParseError, "bad integer in '" + text + "'");
    if (part[0] == '+') part.erase(0, 1);  // mpz rejects a leading plus
    require(!part.empty(), Errc::ParseError, "bad integer in '" + text + "'");
    std::size_t i = part[0] == '-' ? 1 : 0;
    require(i < part.size(), Errc::ParseError, "bad integer in '" + text + "'");
    for (; i < part.size(); ++i)
      require(std::isdigit(static_cast<unsigned char>(part[i])), Errc::ParseError,
              "bad integer in '" + text + "'");
    return mpz_class(part, 10);
  };
  if (text[0] != '(') {
    std::size_t slash = text.find('/');
    mpz_class num = as_int(slash == std::string::npos ? text : text.substr(0, slash));
    mpz_class den =
        slash == std::string::npos ? mpz_class(1) : as_int(text.substr(slash + 1));
    require(den > 0, Errc::ParseError, "nonpositive denominator in '" + text + "'");
    Rat r(num, den);
    r.canonicalize();
    return Quad(r);
  }
  std::size_t close = text.find(')');
  std::size_t mark = text.find("*sqrt(");
  std::size_t tail = text.rfind("))/");
  require(close != std::string::npos && mark != std::string::npos &&
              tail != std::string::npos && mark < tail,
          Errc::ParseError, "bad quadratic scalar '" + text + "'");
  // (alpha[+-]beta*sqrt(s))/q with the sign attached to beta.
  std::size_t sign_pos = std::string::npos;
  for (std::size_t i = mark; i > 1; --i) {
    if (text[i - 1] == '+' || text[i - 1] == '-') {
      sign_pos = i - 1;
      break;
    }
  }
  require(sign_pos != std::string::npos && sign_pos > 1, Errc::ParseError,
          "bad quadratic scalar '" + text + "'");
  mpz_class alpha = as_int(text.substr(1, sign_pos - 1));
  mpz_class beta = as_int(text.substr(sign_pos, mark - sign_pos));
  std::string s_part = text.substr(mark + 6, tail - (mark + 6));
  mpz_class s = as_int(s_part);
  mpz_class q = as_int(text.substr(tail + 3));
  require(q > 0, Errc::ParseError, "nonpositive denominator in '" + text + "'");
  require(s.fits_slong_p(), Errc::ParseError, "radicand too large in '" + text + "'");
  Rat ra(alpha, q), rb(beta, q);
  ra.canonicalize();
  rb.canonicalize();
  return quad_make(ra, rb, s.get_si());
}

Quad dot(const Vec& x, const Vec& y) {
  require(x.size() == y.size(), Errc::DimensionMismatch, "dot of unequal lengths");
  Quad out;
  for (std::size_t i = 0; i < x.size(); ++i) out = out + x[i] * y[i];
  return out;
}

Vec mat_vec(const Mat& m, const Vec& x) {
  Vec out;
  for (const Vec& row : m) out.push_back(dot(row, x));
  return out;
}

Mat mat_mul(const Mat& x, const Mat& y) {
  require(!x.empty() && !y.empty() && x[0].size() == y.size(), Errc::DimensionMismatch,
          "matrix product shape");
  Mat out(x.size(), Vec(y[0].size()));
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < y[0].size(); ++j) {
      Quad acc;
      for (std::size_t k = 0; k < y.size(); ++k) acc = acc + x[i][k] * y[k][j];
      out[i][j] = acc;
    }
  return out;
}

Mat mat_transpose(const Mat& m) {
  if (m.empty()) return {};
  Mat out(m[0].size(), Vec(m.size()));
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < m[0].size(); ++j) out[j][i] = m[i][j];
  return out;
}

Mat mat_identity(int d) {
  Mat out(static_cast<std::size_t>(d), Vec(static_cast<std::size_t>(d)));
  for (int i = 0; i < d; ++i) out[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = Quad(1);
  return out;
}

bool mat_eq(const Mat& x, const Mat& y) {
  if (x.size() != y.size()) return false;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i].size() != y[i].size()) return false;
    for (std::size_t j = 0; j < x[i].size(); ++j)
      if (x[i][j] != y[i][j]) return false;
  }
  return true;
}

bool is_orthogonal(const Mat& m) {
  if (m.empty() || m.size() != m[0].size()) return false;
  return mat_eq(mat_mul(mat_transpose(m), m), mat_identity(static_cast<int>(m.size())));
}

}  // namespace irslab
