#include "irslab/spectral.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <random>
#include <sstream>

namespace irslab {

namespace {

void check_connected(const SchreierGraph& g) {
  std::vector<bool> seen(static_cast<std::size_t>(g.n), false);
  std::vector<int> queue{0};
  seen[0] = true;
  for (std::size_t head = 0; head < queue.size(); ++head)
    for (int l = 0; l < 2 * g.k; ++l) {
      int u = g.step(queue[head], l);
      if (!seen[static_cast<std::size_t>(u)]) {
        seen[static_cast<std::size_t>(u)] = true;
        queue.push_back(u);
      }
    }
  require(static_cast<int>(queue.size()) == g.n, Errc::InvalidGraph,
          "graph is not connected from the base vertex");
}

// Shortest cycle of length <= cap over all BFS roots; optionally reports one
// non-tree edge (vertex, letter) lying on such a cycle. With first_hit the
// scan stops at the first short cycle found (repair loops only need some
// witness, not a minimal one).
int girth_impl(const SchreierGraph& g, int cap, int* witness_v, int* witness_l,
               bool first_hit = false) {
  int best = cap + 1;
  std::vector<int> dist(static_cast<std::size_t>(g.n));
  std::vector<int> parent_letter(static_cast<std::size_t>(g.n));
  for (int root = 0; root < g.n; ++root) {
    std::fill(dist.begin(), dist.end(), -1);
    std::vector<int> queue{root};
    dist[static_cast<std::size_t>(root)] = 0;
    parent_letter[static_cast<std::size_t>(root)] = -1;
    for (std::size_t head = 0; head < queue.size(); ++head) {
      int v = queue[head];
      if (2 * dist[static_cast<std::size_t>(v)] >= best) break;
      for (int l = 0; l < 2 * g.k; ++l) {
        if (parent_letter[static_cast<std::size_t>(v)] == (l ^ 1)) continue;
        int u = g.step(v, l);
        if (dist[static_cast<std::size_t>(u)] == -1) {
          dist[static_cast<std::size_t>(u)] = dist[static_cast<std::size_t>(v)] + 1;
          parent_letter[static_cast<std::size_t>(u)] = l;
          queue.push_back(u);
        } else {
          int len = dist[static_cast<std::size_t>(v)] + dist[static_cast<std::size_t>(u)] + 1;
          if (len < best) {
            best = len;
            if (witness_v != nullptr) {
              *witness_v = v;
              *witness_l = l;
            }
            if (first_hit) return best;
          }
        }
      }
    }
  }
  return best;
}

// Partial deterministic transition table of a rooted ball, local vertex ids.
struct BallTable {
  int letters = 0;
  std::vector<int> next;  // rows * letters, -1 where the edge leaves the ball
  int rows() const { return letters == 0 ? 0 : static_cast<int>(next.size()) / letters; }
  int at(int v, int l) const {
    return next[static_cast<std::size_t>(v) * letters + static_cast<std::size_t>(l)];
  }
};

// Root-first BFS renumbering; deterministic transitions leave no labeling
// choice, so equal keys characterize rooted labeled isomorphism.
std::string canonical_ball_key(const BallTable& t, int root) {
  std::vector<int> canon(static_cast<std::size_t>(t.rows()), -1);
  std::vector<int> order{root};
  canon[static_cast<std::size_t>(root)] = 0;
  for (std::size_t head = 0; head < order.size(); ++head)
    for (int l = 0; l < t.letters; ++l) {
      int u = t.at(order[head], l);
      if (u != -1 && canon[static_cast<std::size_t>(u)] == -1) {
        canon[static_cast<std::size_t>(u)] = static_cast<int>(order.size());
        order.push_back(u);
      }
    }
  std::ostringstream out;
  out << t.letters << ';';
  for (int v : order) {
    for (int l = 0; l < t.letters; ++l) {
      int u = t.at(v, l);
      out << (u == -1 ? -1 : canon[static_cast<std::size_t>(u)]) << ' ';
    }
    out << '|';
  }
  return out.str();
}

BallTable extract_ball(const SchreierGraph& g, int root, int R) {
  std::vector<int> dist(static_cast<std::size_t>(g.n), -1);
  std::vector<int> members{root};
  std::vector<int> local(static_cast<std::size_t>(g.n), -1);
  dist[static_cast<std::size_t>(root)] = 0;
  local[static_cast<std::size_t>(root)] = 0;
  for (std::size_t head = 0; head < members.size(); ++head) {
    int v = members[head];
    if (dist[static_cast<std::size_t>(v)] == R) continue;
    for (int l = 0; l < 2 * g.k; ++l) {
      int u = g.step(v, l);
      if (dist[static_cast<std::size_t>(u)] == -1) {
        dist[static_cast<std::size_t>(u)] = dist[static_cast<std::size_t>(v)] + 1;
        local[static_cast<std::size_t>(u)] = static_cast<int>(members.size());
        members.push_back(u);
      }
    }
  }
  BallTable t;
  t.letters = 2 * g.k;
  t.next.assign(members.size() * static_cast<std::size_t>(t.letters), -1);
  for (std::size_t i = 0; i < members.size(); ++i)
    for (int l = 0; l < t.letters; ++l) {
      int u = g.step(members[i], l);
      t.next[i * t.letters + static_cast<std::size_t>(l)] = local[static_cast<std::size_t>(u)];
    }
  return t;
}

}  // namespace

SchreierGraph make_schreier_graph(int k, std::vector<std::vector<int>> gen_perms) {
  require(k >= 1, Errc::InvalidGraph, "at least one generator required");
  require(static_cast<int>(gen_perms.size()) == k, Errc::InvalidGraph,
          "one permutation per generator required");
  const int n = static_cast<int>(gen_perms.front().size());
  require(n >= 1, Errc::InvalidGraph, "graph needs at least one vertex");
  SchreierGraph g;
  g.k = k;
  g.n = n;
  for (auto& p : gen_perms) {
    require(static_cast<int>(p.size()) == n, Errc::InvalidGraph,
            "permutations have unequal sizes");
    std::vector<int> inv(static_cast<std::size_t>(n), -1);
    for (int v = 0; v < n; ++v) {
      int u = p[static_cast<std::size_t>(v)];
      require(u >= 0 && u < n, Errc::InvalidGraph, "permutation entry out of range");
      require(inv[static_cast<std::size_t>(u)] == -1, Errc::InvalidGraph,
              "generator map is not a bijection");
      inv[static_cast<std::size_t>(u)] = v;
    }
    g.gen.push_back(std::move(p));
    g.gen_inv.push_back(std::move(inv));
  }
  check_connected(g);
  return g;
}

SchreierGraph schreier_graph(const Subgroup& h) {
  require(h.parent().family() == Family::Free, Errc::FamilyMismatch,
          "coset graphs live over free parents");
  const auto* t = std::get_if<CosetTable>(&h.rep());
  require(t != nullptr, Errc::IncompleteTable,
          "subgroup has no complete coset table (infinite index?)");
  std::vector<std::vector<int>> perms;
  for (int i = 0; i < t->k; ++i) {
    std::vector<int> p(static_cast<std::size_t>(t->rows()));
    for (int v = 0; v < t->rows(); ++v) p[static_cast<std::size_t>(v)] = t->step(v, 2 * i);
    perms.push_back(std::move(p));
  }
  return make_schreier_graph(t->k, std::move(perms));
}

Subgroup subgroup_of_graph(const MarkedGroup& free_parent, const SchreierGraph& g) {
  require(free_parent.family() == Family::Free && free_parent.rank() == g.k,
          Errc::FamilyMismatch, "parent rank does not match the graph");
  CosetTable t;
  t.k = g.k;
  t.next.assign(static_cast<std::size_t>(g.n) * (2 * g.k), -1);
  for (int v = 0; v < g.n; ++v)
    for (int l = 0; l < 2 * g.k; ++l)
      t.next[static_cast<std::size_t>(v) * (2 * g.k) + static_cast<std::size_t>(l)] =
          g.step(v, l);
  return Subgroup::from_coset_table(free_parent, std::move(t));
}

int graph_girth(const SchreierGraph& g, int cap) { return girth_impl(g, cap, nullptr, nullptr); }

SchreierGraph random_schreier_graph(int k, int n, std::uint64_t seed, int min_girth) {
  require(k >= 1 && n >= 1, Errc::InvalidGraph, "need k >= 1 generators and n >= 1 vertices");
  std::mt19937_64 rng(seed);
  auto rnd = [&](int m) { return static_cast<int>(rng() % static_cast<std::uint64_t>(m)); };
  for (int attempt = 0; attempt < 64; ++attempt) {
    std::vector<std::vector<int>> perms(static_cast<std::size_t>(k),
                                        std::vector<int>(static_cast<std::size_t>(n)));
    for (auto& p : perms) {
      for (int i = 0; i < n; ++i) p[static_cast<std::size_t>(i)] = i;
      for (int i = n - 1; i > 0; --i) std::swap(p[static_cast<std::size_t>(i)],
                                                p[static_cast<std::size_t>(rnd(i + 1))]);
    }
    SchreierGraph g;
    g.k = k;
    g.n = n;
    g.gen = perms;
    auto rebuild_inverses = [&]() {
      g.gen_inv.assign(static_cast<std::size_t>(k),
                       std::vector<int>(static_cast<std::size_t>(n)));
      for (int i = 0; i < k; ++i)
        for (int v = 0; v < n; ++v)
          g.gen_inv[static_cast<std::size_t>(i)]
                   [static_cast<std::size_t>(g.gen[static_cast<std::size_t>(i)]
                                                  [static_cast<std::size_t>(v)])] = v;
    };
    rebuild_inverses();
    long budget = 600L * n + 600;
    while (budget-- > 0) {
      // connectivity first
      std::vector<bool> seen(static_cast<std::size_t>(n), false);
      std::vector<int> queue{0};
      seen[0] = true;
      for (std::size_t head = 0; head < queue.size(); ++head)
        for (int l = 0; l < 2 * k; ++l) {
          int u = g.step(queue[head], l);
          if (!seen[static_cast<std::size_t>(u)]) {
            seen[static_cast<std::size_t>(u)] = true;
            queue.push_back(u);
          }
        }
      if (static_cast<int>(queue.size()) != n) {
        int outside = 0;
        while (seen[static_cast<std::size_t>(outside)]) ++outside;
        int inside = queue[static_cast<std::size_t>(rnd(static_cast<int>(queue.size())))];
        auto& p = g.gen[0];
        std::swap(p[static_cast<std::size_t>(inside)], p[static_cast<std::size_t>(outside)]);
        rebuild_inverses();
        continue;
      }
      if (min_girth <= 1) return g;
      int wv = -1, wl = -1;
      if (girth_impl(g, min_girth - 1, &wv, &wl, true) >= min_girth) return g;
      int i = wl / 2;
      int src = (wl % 2 == 0) ? wv : g.step(wv, wl);
      int other = rnd(n);
      if (other == src) other = (other + 1) % n;
      auto& p = g.gen[static_cast<std::size_t>(i)];
      std::swap(p[static_cast<std::size_t>(src)], p[static_cast<std::size_t>(other)]);
      rebuild_inverses();
    }
  }
  fail(Errc::NoConvergence, "girth repair did not converge; try another seed");
}

double markov_rho0_dense(const SchreierGraph& g) {
  require(g.n >= 2, Errc::GraphTooSmall,
          "one-vertex graphs have an empty complement of constants");
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(g.n, g.n);
  const double w = 1.0 / (2 * g.k);
  for (int v = 0; v < g.n; ++v)
    for (int l = 0; l < 2 * g.k; ++l) m(v, g.step(v, l)) += w;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m, Eigen::EigenvaluesOnly);
  const auto& ev = solver.eigenvalues();
  return std::max(std::abs(ev(0)), std::abs(ev(g.n - 2)));
}

double markov_rho0_power(const SchreierGraph& g, double tolerance) {
  require(g.n >= 2, Errc::GraphTooSmall,
          "one-vertex graphs have an empty complement of constants");
  require(tolerance > 0, Errc::ConfigInvalid, "tolerance must be positive");
  const std::size_t n = static_cast<std::size_t>(g.n);
  const double w = 1.0 / (2 * g.k);
  std::vector<double> x(n), y(n);
  std::uint64_t s = 0x2545f4914f6cdd1dULL;
  for (std::size_t i = 0; i < n; ++i) {
    s ^= s << 13;
    s ^= s >> 7;
    s ^= s << 17;
    x[i] = static_cast<double>(s % 1000003) / 1000003.0 - 0.5;
  }
  auto deflate = [&](std::vector<double>& v) {
    double mean = 0;
    for (double t : v) mean += t;
    mean /= static_cast<double>(n);
    for (double& t : v) t -= mean;
  };
  auto norm = [&](const std::vector<double>& v) {
    double s2 = 0;
    for (double t : v) s2 += t * t;
    return std::sqrt(s2);
  };
  deflate(x);
  double nx = norm(x);
  require(nx > 0, Errc::NoConvergence, "degenerate start vector");
  for (double& t : x) t /= nx;

  std::deque<double> window;
  for (long it = 0; it < 100000; ++it) {
    std::fill(y.begin(), y.end(), 0.0);
    for (int v = 0; v < g.n; ++v) {
      double acc = 0;
      for (int l = 0; l < 2 * g.k; ++l) acc += x[static_cast<std::size_t>(g.step(v, l))];
      y[static_cast<std::size_t>(v)] = acc * w;
    }
    deflate(y);
    double est = norm(y);  // |M x| with |x| = 1: converges to rho0
    if (est < 1e-14) return 0.0;
    for (std::size_t i = 0; i < n; ++i) x[i] = y[i] / est;
    window.push_back(est);
    if (window.size() > 10) {
      window.pop_front();
      double lo = *std::min_element(window.begin(), window.end());
      double hi = *std::max_element(window.begin(), window.end());
      if (hi - lo <= tolerance * hi) return est;
    }
  }
  fail(Errc::NoConvergence, "power iteration hit the iteration cap");
}

double markov_spectral_radius_rho0(const SchreierGraph& g, double tolerance) {
  if (g.n <= 2000) return markov_rho0_dense(g);
  return markov_rho0_power(g, tolerance);
}

Rat free_return_probability(int k, int m) {
  require(k >= 1 && m >= 0, Errc::ConfigInvalid, "need k >= 1 and m >= 0");
  const int steps = 2 * m;
  std::vector<mpz_class> cur(static_cast<std::size_t>(steps + 2), 0);
  std::vector<mpz_class> nxt(cur.size(), 0);
  cur[0] = 1;
  for (int s = 0; s < steps; ++s) {
    for (auto& z : nxt) z = 0;
    for (int d = 0; d <= s; ++d) {
      if (cur[static_cast<std::size_t>(d)] == 0) continue;
      if (d == 0) {
        nxt[1] += cur[0] * (2 * k);
      } else {
        nxt[static_cast<std::size_t>(d + 1)] +=
            cur[static_cast<std::size_t>(d)] * (2 * k - 1);
        nxt[static_cast<std::size_t>(d - 1)] += cur[static_cast<std::size_t>(d)];
      }
    }
    std::swap(cur, nxt);
  }
  mpz_class den;
  mpz_ui_pow_ui(den.get_mpz_t(), static_cast<unsigned long>(2 * k),
                static_cast<unsigned long>(steps));
  Rat p(cur[0], den);
  p.canonicalize();
  return p;
}

SpectralInterval cayley_spectral_radius_estimate(const MarkedGroup& free_g, int R) {
  require(free_g.family() == Family::Free, Errc::FamilyMismatch,
          "estimates target free Cayley graphs");
  const int k = free_g.rank();
  require(k >= 2, Errc::Unsupported, "rank one has spectral radius 1; nothing to estimate");
  require(R >= 1 && R <= 4096, Errc::ConfigInvalid, "radius out of range");

  // The Perron vector of the ball-truncated operator is radial, so the
  // Rayleigh maximization reduces to the weighted chain over distances
  // 0..R with couplings 1/sqrt(2k) at the root and sqrt(2k-1)/(2k) beyond.
  const std::size_t m = static_cast<std::size_t>(R) + 1;
  std::vector<double> off(m - 1, std::sqrt(2.0 * k - 1.0) / (2 * k));
  off[0] = 1.0 / std::sqrt(2.0 * k);
  std::vector<double> x(m, 1.0), y(m);
  double rayleigh = 0;
  for (int it = 0; it < 20000; ++it) {
    for (std::size_t i = 0; i < m; ++i) {
      double acc = 0;
      if (i > 0) acc += off[i - 1] * x[i - 1];
      if (i + 1 < m) acc += off[i] * x[i + 1];
      y[i] = acc;
    }
    double num = 0, den = 0;
    for (std::size_t i = 0; i < m; ++i) {
      num += x[i] * y[i];
      den += x[i] * x[i];
    }
    double next = num / den;
    double scale = std::sqrt(den);
    for (std::size_t i = 0; i < m; ++i) x[i] = y[i] / scale;
    if (it > 50 && std::abs(next - rayleigh) < 1e-15) {
      rayleigh = next;
      break;
    }
    rayleigh = next;
  }

  double ret = std::pow(rat_to_double(free_return_probability(k, R)),
                        1.0 / (2.0 * R));
  SpectralInterval out;
  out.lower = std::max(rayleigh, ret);
  // Exponential test function t^{|x|}: M h <= lambda h with
  // lambda = max(t, 1/(2kt) + (2k-1)t/(2k)), minimized at t = 1/sqrt(2k-1).
  double t = 1.0 / std::sqrt(2.0 * k - 1.0);
  double lam = std::max(t, 1.0 / (2 * k * t) + (2.0 * k - 1.0) * t / (2 * k));
  out.upper = lam + 1e-9;
  require(out.lower <= out.upper, Errc::NoConvergence, "estimate interval collapsed");
  return out;
}

std::string rooted_ball_key(const SchreierGraph& g, int root, int R) {
  require(root >= 0 && root < g.n, Errc::InvalidGraph, "root out of range");
  require(R >= 0, Errc::ConfigInvalid, "radius must be nonnegative");
  BallTable t = extract_ball(g, root, R);
  return canonical_ball_key(t, 0);
}

std::string tree_ball_key(int k, int R) {
  MarkedGroup f = MarkedGroup::free_group(k);
  std::vector<Elem> ball = f.ball(R);
  std::map<Word, int> index;
  for (std::size_t i = 0; i < ball.size(); ++i)
    index[std::get<Word>(ball[i].v)] = static_cast<int>(i);
  BallTable t;
  t.letters = 2 * k;
  t.next.assign(ball.size() * static_cast<std::size_t>(t.letters), -1);
  for (std::size_t i = 0; i < ball.size(); ++i) {
    const Word& w = std::get<Word>(ball[i].v);
    for (int l = 0; l < t.letters; ++l) {
      Word u = word_concat_reduce(w, Word{l});
      auto it = index.find(u);
      if (it != index.end())
        t.next[i * t.letters + static_cast<std::size_t>(l)] = it->second;
    }
  }
  return canonical_ball_key(t, 0);
}

LocalBallStatistics bs_local_statistics(const SchreierGraph& g, int R) {
  require(R >= 0, Errc::ConfigInvalid, "radius must be nonnegative");
  std::map<std::string, long> counts;
  for (int v = 0; v < g.n; ++v) ++counts[rooted_ball_key(g, v, R)];
  LocalBallStatistics stats;
  stats.radius = R;
  for (const auto& [key, c] : counts)
    stats.classes.push_back({key, rat(c, g.n)});
  return stats;
}

Rat bs_distance_to_cayley(const LocalBallStatistics& stats, const MarkedGroup& free_g) {
  require(free_g.family() == Family::Free, Errc::FamilyMismatch,
          "comparison target is a free Cayley graph");
  std::string tree = tree_ball_key(free_g.rank(), stats.radius);
  for (const auto& [key, freq] : stats.classes)
    if (key == tree) return Rat(1) - freq;
  return Rat(1);
}

LocalApproxReport local_approximation_report(const std::vector<Subgroup>& family, int R,
                                             double tolerance) {
  require(!family.empty(), Errc::ConfigInvalid, "empty family");
  require(tolerance > 0, Errc::ConfigInvalid, "tolerance must be positive");
  const MarkedGroup& g = family.front().parent();
  require(g.family() == Family::Free, Errc::FamilyMismatch,
          "families live over a free marked group");
  LocalApproxReport report;
  report.radius = R;
  report.tolerance = tolerance;
  report.cayley = cayley_spectral_radius_estimate(g, 10);
  long prev_index = 0;
  for (const Subgroup& h : family) {
    require(h.parent().same_group(g), Errc::FamilyMismatch,
            "family members have different parents");
    long idx = h.index();
    require(idx > 0, Errc::IncompleteTable, "family members must have finite index");
    require(idx > prev_index, Errc::ConfigInvalid, "indices must be strictly increasing");
    prev_index = idx;
    SchreierGraph graph = schreier_graph(h);
    LocalApproxRow row;
    row.index = idx;
    try {
      row.rho0 = markov_spectral_radius_rho0(graph);
      row.rho0_defined = true;
    } catch (const Error& e) {
      if (e.code() != Errc::GraphTooSmall) throw;
      row.rho0_defined = false;
    }
    row.bs_distance = bs_distance_to_cayley(bs_local_statistics(graph, R), g);
    report.rows.push_back(std::move(row));
  }

  const std::size_t window = std::min<std::size_t>(
      static_cast<std::size_t>(report.trailing_window), report.rows.size());
  bool any = false;
  double trailing_max = 0;
  for (std::size_t i = report.rows.size() - window; i < report.rows.size(); ++i) {
    if (!report.rows[i].rho0_defined) continue;
    trailing_max = any ? std::max(trailing_max, report.rows[i].rho0) : report.rows[i].rho0;
    any = true;
  }
  report.hypothesis_observed = any && trailing_max <= report.cayley.upper + tolerance;

  bool nonincreasing = true;
  for (std::size_t i = 1; i < report.rows.size(); ++i)
    if (report.rows[i].bs_distance > report.rows[i - 1].bs_distance) nonincreasing = false;
  report.conclusion_observed =
      nonincreasing && rat_to_double(report.rows.back().bs_distance) <= tolerance;
  report.theorem_consistent = !report.hypothesis_observed || report.conclusion_observed;
  return report;
}

std::string local_report_csv(const LocalApproxReport& report) {
  std::ostringstream out;
  out << "index,rho0,bs_distance_R" << report.radius << "\n";
  out.precision(12);
  for (const LocalApproxRow& row : report.rows) {
    out << row.index << ',';
    if (row.rho0_defined)
      out << row.rho0;
    else
      out << "undefined";
    out << ',' << rat_to_double(row.bs_distance) << "\n";
  }
  return out.str();
}

std::string graph_to_dot(const SchreierGraph& g, const std::vector<std::string>& labels) {
  require(static_cast<int>(labels.size()) == g.k, Errc::ConfigInvalid,
          "one label per generator required");
  std::ostringstream out;
  out << "graph schreier {\n  node [shape=circle];\n";
  for (int i = 0; i < g.k; ++i)
    for (int v = 0; v < g.n; ++v)
      out << "  " << v << " -- " << g.gen[static_cast<std::size_t>(i)][static_cast<std::size_t>(v)]
          << " [label=\"" << labels[static_cast<std::size_t>(i)] << "\"];\n";
  out << "}\n";
  return out.str();
}

}  // namespace irslab
