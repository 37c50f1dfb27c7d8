#include "irslab/group.hpp"

#include "irslab/rational.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace irslab {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d4a23d8ca5763fULL;
  return x ^ (x >> 31);
}

std::string cycle_notation(const std::vector<int>& p) {
  std::string out;
  std::vector<bool> seen(p.size(), false);
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (seen[i] || p[i] == static_cast<int>(i)) continue;
    out += '(';
    std::size_t j = i;
    bool first = true;
    while (!seen[j]) {
      seen[j] = true;
      if (!first) out += ' ';
      out += std::to_string(j);
      first = false;
      j = static_cast<std::size_t>(p[j]);
    }
    out += ')';
  }
  return out.empty() ? "e" : out;
}

std::vector<std::string> default_labels(int k) {
  std::vector<std::string> out;
  for (int i = 0; i < k; ++i) out.push_back(std::string(1, static_cast<char>('a' + i)));
  return out;
}

}  // namespace

struct GroupImpl {
  Family family = Family::Free;
  int rank = 0;
  std::vector<std::string> gen_labels;

  // Finite backend.
  long n = 0;
  std::vector<int> table;  // row-major n*n
  std::vector<int> inv;
  int id_idx = 0;
  std::vector<std::string> names;
  std::map<std::string, int> name_index;
  std::vector<int> letter_idx;  // element index per letter, size 2k

  // Tree backend.
  int arity = 0, depth = 0, nnodes = 0;
  std::vector<std::vector<std::uint8_t>> sym;  // one-line images, lex order, id first
  std::vector<std::vector<std::uint8_t>> sym_mul;
  std::vector<std::uint8_t> sym_inv;
  std::vector<Portrait> tree_letters;  // size 2k
  std::vector<long> level_offset;      // size depth+1

  int mul(int a, int b) const { return table[static_cast<std::size_t>(a) * n + b]; }
};

Word word_inverse(const Word& w) {
  Word out(w.rbegin(), w.rend());
  for (int& l : out) l ^= 1;
  return out;
}

Word word_concat_reduce(const Word& a, const Word& b) {
  Word out(a);
  for (int l : b) {
    if (!out.empty() && out.back() == (l ^ 1))
      out.pop_back();
    else
      out.push_back(l);
  }
  return out;
}

std::size_t free_ball_size(int k, int R, std::size_t cap) {
  std::size_t total = 1, layer = 1;
  for (int r = 1; r <= R; ++r) {
    layer = (r == 1) ? static_cast<std::size_t>(2 * k)
                     : layer * static_cast<std::size_t>(2 * k - 1);
    if (layer > cap || total > cap - std::min(layer, cap)) return cap + 1;
    total += layer;
    if (total > cap) return cap + 1;
  }
  return total;
}

namespace {

const Word& as_word(const Elem& e) {
  const Word* p = std::get_if<Word>(&e.v);
  require(p != nullptr, Errc::FamilyMismatch, "element is not a free-group word");
  return *p;
}

int as_index(const Elem& e) {
  const int* p = std::get_if<int>(&e.v);
  require(p != nullptr, Errc::FamilyMismatch, "element is not a finite-group index");
  return *p;
}

const Portrait& as_portrait(const Elem& e) {
  const Portrait* p = std::get_if<Portrait>(&e.v);
  require(p != nullptr, Errc::FamilyMismatch, "element is not a tree portrait");
  return *p;
}

void build_letters_finite(GroupImpl& g, const std::vector<int>& gen_indices,
                          std::vector<std::string> labels) {
  require(!gen_indices.empty(), Errc::InvalidSubgroup, "marked generating set is empty");
  if (labels.empty()) labels = default_labels(static_cast<int>(gen_indices.size()));
  require(labels.size() == gen_indices.size(), Errc::ConfigInvalid,
          "generator label count mismatch");
  g.rank = static_cast<int>(gen_indices.size());
  g.gen_labels = labels;
  g.letter_idx.clear();
  for (int idx : gen_indices) {
    require(idx >= 0 && idx < g.n, Errc::UnknownGenerator,
            "generator index out of range: " + std::to_string(idx));
    g.letter_idx.push_back(idx);
    g.letter_idx.push_back(g.inv[idx]);
  }
  // The marking must generate: BFS closure over letters.
  std::vector<char> seen(static_cast<std::size_t>(g.n), 0);
  std::vector<int> queue{g.id_idx};
  seen[static_cast<std::size_t>(g.id_idx)] = 1;
  for (std::size_t h = 0; h < queue.size(); ++h)
    for (int li : g.letter_idx) {
      int t = g.mul(queue[h], li);
      if (!seen[static_cast<std::size_t>(t)]) {
        seen[static_cast<std::size_t>(t)] = 1;
        queue.push_back(t);
      }
    }
  require(queue.size() == static_cast<std::size_t>(g.n), Errc::InvalidSubgroup,
          "marked generators do not generate the group");
}

void finish_finite(GroupImpl& g) {
  if (g.names.empty()) {
    for (long i = 0; i < g.n; ++i) g.names.push_back("g" + std::to_string(i));
    g.names[static_cast<std::size_t>(g.id_idx)] = "e";
  }
  require(static_cast<long>(g.names.size()) == g.n, Errc::ConfigInvalid,
          "element name count mismatch");
  for (long i = 0; i < g.n; ++i) {
    auto [it, fresh] = g.name_index.emplace(g.names[static_cast<std::size_t>(i)],
                                            static_cast<int>(i));
    require(fresh, Errc::ConfigInvalid, "duplicate element name " + it->first);
  }
  g.name_index.emplace("e", g.id_idx);
}

void validate_table(GroupImpl& g) {
  long n = g.n;
  require(n >= 1 && n <= MarkedGroup::kOrderCap, Errc::GroupTooLarge,
          "finite group order must be in [1, 5000]");
  require(static_cast<long>(g.table.size()) == n * n, Errc::IncompleteTable,
          "multiplication table has missing entries");
  for (int v : g.table)
    require(v >= 0 && v < n, Errc::IncompleteTable, "table entry out of range");
  // Latin square.
  std::vector<char> mark(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) {
    std::fill(mark.begin(), mark.end(), 0);
    for (long j = 0; j < n; ++j) mark[static_cast<std::size_t>(g.mul(i, j))] = 1;
    for (char m : mark)
      require(m, Errc::IncompleteTable, "row " + std::to_string(i) + " is not a bijection");
    std::fill(mark.begin(), mark.end(), 0);
    for (long j = 0; j < n; ++j) mark[static_cast<std::size_t>(g.mul(j, i))] = 1;
    for (char m : mark)
      require(m, Errc::IncompleteTable, "column " + std::to_string(i) + " is not a bijection");
  }
  // Two-sided identity.
  int id = -1;
  for (long e = 0; e < n && id < 0; ++e) {
    bool ok = true;
    for (long j = 0; j < n && ok; ++j)
      ok = g.mul(e, j) == j && g.mul(j, e) == j;
    if (ok) id = static_cast<int>(e);
  }
  require(id >= 0, Errc::IncompleteTable, "table has no identity");
  g.id_idx = id;
  // Inverses.
  g.inv.assign(static_cast<std::size_t>(n), -1);
  for (long i = 0; i < n; ++i) {
    for (long j = 0; j < n; ++j)
      if (g.mul(i, j) == id && g.mul(j, i) == id) {
        g.inv[static_cast<std::size_t>(i)] = static_cast<int>(j);
        break;
      }
    require(g.inv[static_cast<std::size_t>(i)] >= 0, Errc::IncompleteTable,
            "element " + std::to_string(i) + " has no inverse");
  }
  // Associativity: exhaustive for small n, seeded sample otherwise.
  if (n <= 128) {
    for (long a = 0; a < n; ++a)
      for (long b = 0; b < n; ++b)
        for (long c = 0; c < n; ++c)
          require(g.mul(g.mul(a, b), c) == g.mul(a, g.mul(b, c)), Errc::IncompleteTable,
                  "table is not associative");
  } else {
    std::uint64_t s = 0x5eed;
    for (int t = 0; t < 20000; ++t) {
      int a = static_cast<int>((s = splitmix64(s)) % static_cast<std::uint64_t>(n));
      int b = static_cast<int>((s = splitmix64(s)) % static_cast<std::uint64_t>(n));
      int c = static_cast<int>((s = splitmix64(s)) % static_cast<std::uint64_t>(n));
      require(g.mul(g.mul(a, b), c) == g.mul(a, g.mul(b, c)), Errc::IncompleteTable,
              "table is not associative");
    }
  }
}

std::vector<int> compose_perm(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<int> out(a.size());
  for (std::size_t x = 0; x < a.size(); ++x)
    out[x] = a[static_cast<std::size_t>(b[x])];
  return out;
}

}  // namespace

MarkedGroup MarkedGroup::free_group(int rank) { return free_group(default_labels(rank)); }

MarkedGroup MarkedGroup::free_group(const std::vector<std::string>& labels) {
  require(!labels.empty() && labels.size() <= 26, Errc::ConfigInvalid,
          "free rank must be in [1, 26]");
  auto impl = std::make_shared<GroupImpl>();
  impl->family = Family::Free;
  impl->rank = static_cast<int>(labels.size());
  std::set<std::string> seen;
  for (const auto& l : labels) {
    require(l.size() == 1 && std::isalpha(static_cast<unsigned char>(l[0])),
            Errc::ConfigInvalid, "free generator labels must be single letters");
    require(seen.insert(l).second, Errc::ConfigInvalid, "duplicate generator label " + l);
  }
  impl->gen_labels = labels;
  return MarkedGroup(impl);
}

MarkedGroup MarkedGroup::finite_from_table(std::vector<int> table,
                                           std::vector<std::string> names,
                                           std::vector<int> gen_indices,
                                           std::vector<std::string> gen_labels) {
  auto impl = std::make_shared<GroupImpl>();
  impl->family = Family::Finite;
  long n = static_cast<long>(names.empty()
                                 ? static_cast<std::size_t>(std::lround(std::sqrt(
                                       static_cast<double>(table.size()))))
                                 : names.size());
  impl->n = n;
  impl->table = std::move(table);
  impl->names = std::move(names);
  validate_table(*impl);
  finish_finite(*impl);
  build_letters_finite(*impl, gen_indices, std::move(gen_labels));
  return MarkedGroup(impl);
}

MarkedGroup MarkedGroup::finite_from_csv(const std::string& path,
                                         std::vector<int> gen_indices,
                                         std::vector<std::string> gen_labels) {
  std::ifstream in(path);
  require(in.good(), Errc::IoError, "cannot open " + path);
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), Errc::ParseError, "empty table file");
  // Header "i,j,k" required.
  {
    std::string h = line;
    h.erase(std::remove_if(h.begin(), h.end(), [](char c) { return std::isspace(static_cast<unsigned char>(c)); }), h.end());
    require(h == "i,j,k", Errc::ParseError, "expected header i,j,k in " + path);
  }
  std::vector<std::array<long, 3>> rows;
  long maxi = -1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::array<long, 3> t{};
    char c1 = 0, c2 = 0;
    std::istringstream ls(line);
    ls >> t[0] >> c1 >> t[1] >> c2 >> t[2];
    require(!ls.fail() && c1 == ',' && c2 == ',', Errc::ParseError,
            "bad table row: " + line);
    for (long v : t) {
      require(v >= 0, Errc::ParseError, "negative index in table row");
      maxi = std::max(maxi, v);
    }
    rows.push_back(t);
  }
  long n = maxi + 1;
  require(n >= 1 && n <= kOrderCap, Errc::GroupTooLarge, "table order exceeds 5000");
  std::vector<int> table(static_cast<std::size_t>(n) * n, -1);
  for (const auto& t : rows) {
    int& cell = table[static_cast<std::size_t>(t[0]) * n + t[1]];
    require(cell == -1 || cell == t[2], Errc::ParseError, "conflicting table entries");
    cell = static_cast<int>(t[2]);
  }
  for (int v : table)
    require(v >= 0, Errc::IncompleteTable, "multiplication table has missing entries");
  return finite_from_table(std::move(table), {}, std::move(gen_indices),
                           std::move(gen_labels));
}

MarkedGroup MarkedGroup::finite_from_perms(int degree,
                                           const std::vector<std::vector<int>>& gen_perms,
                                           const std::vector<std::string>& gen_labels) {
  require(degree >= 1, Errc::ConfigInvalid, "degree must be positive");
  require(!gen_perms.empty(), Errc::InvalidSubgroup, "no generator permutations");
  for (const auto& p : gen_perms) {
    require(static_cast<int>(p.size()) == degree, Errc::ConfigInvalid,
            "permutation length mismatch");
    std::vector<char> mark(static_cast<std::size_t>(degree), 0);
    for (int v : p) {
      require(v >= 0 && v < degree, Errc::ConfigInvalid, "permutation value out of range");
      require(!mark[static_cast<std::size_t>(v)], Errc::ConfigInvalid,
              "permutation is not a bijection");
      mark[static_cast<std::size_t>(v)] = 1;
    }
  }
  std::vector<int> id(static_cast<std::size_t>(degree));
  for (int i = 0; i < degree; ++i) id[static_cast<std::size_t>(i)] = i;
  std::set<std::vector<int>> elems{id};
  std::vector<std::vector<int>> queue{id};
  for (std::size_t h = 0; h < queue.size(); ++h)
    for (const auto& s : gen_perms) {
      auto t = compose_perm(queue[h], s);
      if (elems.insert(t).second) {
        require(elems.size() <= static_cast<std::size_t>(kOrderCap), Errc::GroupTooLarge,
                "permutation closure exceeds 5000 elements");
        queue.push_back(std::move(t));
      }
    }
  std::vector<std::vector<int>> sorted(elems.begin(), elems.end());
  std::map<std::vector<int>, int> idx;
  for (std::size_t i = 0; i < sorted.size(); ++i) idx[sorted[i]] = static_cast<int>(i);
  long n = static_cast<long>(sorted.size());
  std::vector<int> table(static_cast<std::size_t>(n) * n);
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < n; ++j)
      table[static_cast<std::size_t>(i) * n + j] =
          idx.at(compose_perm(sorted[static_cast<std::size_t>(i)],
                              sorted[static_cast<std::size_t>(j)]));
  std::vector<std::string> names;
  for (const auto& p : sorted) names.push_back(cycle_notation(p));
  std::vector<int> gen_indices;
  for (const auto& p : gen_perms) gen_indices.push_back(idx.at(p));
  return finite_from_table(std::move(table), std::move(names), std::move(gen_indices),
                           gen_labels);
}

MarkedGroup MarkedGroup::cyclic_group(int n) {
  require(n >= 1 && n <= kOrderCap, Errc::GroupTooLarge, "cyclic order out of range");
  std::vector<int> table(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      table[static_cast<std::size_t>(i) * n + j] = (i + j) % n;
  std::vector<std::string> names;
  for (int i = 0; i < n; ++i) names.push_back(std::to_string(i));
  return finite_from_table(std::move(table), std::move(names), {n == 1 ? 0 : 1}, {"t"});
}

MarkedGroup MarkedGroup::symmetric_group(int n) {
  require(n >= 2 && n <= 7, Errc::GroupTooLarge, "symmetric degree out of range");
  std::vector<int> swap01(static_cast<std::size_t>(n)), cyc(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    swap01[static_cast<std::size_t>(i)] = i;
    cyc[static_cast<std::size_t>(i)] = (i + 1) % n;
  }
  std::swap(swap01[0], swap01[1]);
  if (n == 2) return finite_from_perms(n, {swap01}, {"s"});
  return finite_from_perms(n, {swap01, cyc}, {"s", "c"});
}

MarkedGroup MarkedGroup::alternating_group(int n) {
  require(n >= 3 && n <= 7, Errc::GroupTooLarge, "alternating degree out of range");
  std::vector<int> three(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) three[static_cast<std::size_t>(i)] = i;
  three[0] = 1; three[1] = 2; three[2] = 0;
  if (n == 3) return finite_from_perms(n, {three}, {"x"});
  std::vector<int> other(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) other[static_cast<std::size_t>(i)] = i;
  if (n % 2 == 0) {
    // (0 1)(2 3) together with the 3-cycle generates A_n for even n >= 4.
    other[0] = 1; other[1] = 0; other[2] = 3; other[3] = 2;
  } else {
    for (int i = 0; i < n; ++i) other[static_cast<std::size_t>(i)] = (i + 1) % n;
  }
  return finite_from_perms(n, {three, other}, {"x", "y"});
}

MarkedGroup MarkedGroup::dihedral_group(int n) {
  require(n >= 3 && 2 * n <= kOrderCap, Errc::GroupTooLarge, "dihedral order out of range");
  std::vector<int> rot(static_cast<std::size_t>(n)), refl(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    rot[static_cast<std::size_t>(i)] = (i + 1) % n;
    refl[static_cast<std::size_t>(i)] = (n - i) % n;
  }
  return finite_from_perms(n, {rot, refl}, {"r", "f"});
}

MarkedGroup MarkedGroup::elementary_abelian_2(int n) {
  require(n >= 1 && n <= 11, Errc::GroupTooLarge, "(Z/2)^n order out of range");
  std::vector<std::vector<int>> gens;
  std::vector<std::string> labels;
  for (int g = 0; g < n; ++g) {
    std::vector<int> p(static_cast<std::size_t>(2 * n));
    for (int i = 0; i < 2 * n; ++i) p[static_cast<std::size_t>(i)] = i;
    std::swap(p[static_cast<std::size_t>(2 * g)], p[static_cast<std::size_t>(2 * g + 1)]);
    gens.push_back(std::move(p));
    labels.push_back(std::string(1, static_cast<char>('a' + g)));
  }
  return finite_from_perms(2 * n, gens, labels);
}

MarkedGroup MarkedGroup::wreath_c2_cyclic(int m) {
  require(m >= 1 && m * (1L << m) <= kOrderCap, Errc::GroupTooLarge,
          "wreath product order out of range");
  std::vector<int> shift(static_cast<std::size_t>(2 * m)), flip(static_cast<std::size_t>(2 * m));
  for (int j = 0; j < m; ++j)
    for (int b = 0; b < 2; ++b)
      shift[static_cast<std::size_t>(2 * j + b)] = 2 * ((j + 1) % m) + b;
  for (int i = 0; i < 2 * m; ++i) flip[static_cast<std::size_t>(i)] = i;
  std::swap(flip[0], flip[1]);
  if (m == 1) return finite_from_perms(2, {flip}, {"t"});
  return finite_from_perms(2 * m, {shift, flip}, {"s", "t"});
}

MarkedGroup MarkedGroup::tree_group(int arity, int depth) {
  require(arity >= 2 && arity <= 4, Errc::ConfigInvalid, "tree arity must be 2..4");
  require(depth >= 1 && depth <= 8, Errc::DepthOutOfRange, "tree depth must be 1..8");
  auto impl = std::make_shared<GroupImpl>();
  impl->family = Family::Tree;
  impl->arity = arity;
  impl->depth = depth;
  impl->level_offset.assign(static_cast<std::size_t>(depth) + 1, 0);
  long nodes = 0, width = 1;
  for (int l = 0; l < depth; ++l) {
    impl->level_offset[static_cast<std::size_t>(l)] = nodes;
    nodes += width;
    width *= arity;
  }
  impl->level_offset[static_cast<std::size_t>(depth)] = nodes;
  require(nodes <= 100000, Errc::GroupTooLarge, "tree has too many nodes");
  impl->nnodes = static_cast<int>(nodes);

  // Sym(arity) in lex order of one-line images; identity is id 0.
  std::vector<std::uint8_t> base(static_cast<std::size_t>(arity));
  for (int i = 0; i < arity; ++i) base[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(i);
  std::vector<std::vector<std::uint8_t>> sym;
  std::vector<std::uint8_t> cur = base;
  do {
    sym.push_back(cur);
  } while (std::next_permutation(cur.begin(), cur.end()));
  std::map<std::vector<std::uint8_t>, std::uint8_t> sidx;
  for (std::size_t i = 0; i < sym.size(); ++i) sidx[sym[i]] = static_cast<std::uint8_t>(i);
  int ns = static_cast<int>(sym.size());
  impl->sym = sym;
  impl->sym_mul.assign(static_cast<std::size_t>(ns),
                       std::vector<std::uint8_t>(static_cast<std::size_t>(ns)));
  impl->sym_inv.assign(static_cast<std::size_t>(ns), 0);
  for (int a = 0; a < ns; ++a) {
    for (int b = 0; b < ns; ++b) {
      std::vector<std::uint8_t> c(static_cast<std::size_t>(arity));
      for (int x = 0; x < arity; ++x)
        c[static_cast<std::size_t>(x)] =
            sym[static_cast<std::size_t>(a)][sym[static_cast<std::size_t>(b)][static_cast<std::size_t>(x)]];
    impl->sym_mul[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = sidx.at(c);
    }
    std::vector<std::uint8_t> iv(static_cast<std::size_t>(arity));
    for (int x = 0; x < arity; ++x)
      iv[sym[static_cast<std::size_t>(a)][static_cast<std::size_t>(x)]] = static_cast<std::uint8_t>(x);
    impl->sym_inv[static_cast<std::size_t>(a)] = sidx.at(iv);
  }

  // One marked generator per node: the (0 1) transposition, plus the full
  // arity-cycle when arity >= 3 so each local Sym is generated.
  std::vector<std::uint8_t> swap01 = base;
  std::swap(swap01[0], swap01[1]);
  std::vector<std::uint8_t> cyc(static_cast<std::size_t>(arity));
  for (int i = 0; i < arity; ++i)
    cyc[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>((i + 1) % arity);
  std::uint8_t swap_id = sidx.at(swap01);
  std::uint8_t cyc_id = sidx.at(cyc);
  std::uint8_t cyc_inv = impl->sym_inv[cyc_id];
  for (int u = 0; u < impl->nnodes; ++u) {
    Portrait t(static_cast<std::size_t>(impl->nnodes), 0);
    t[static_cast<std::size_t>(u)] = swap_id;
    impl->tree_letters.push_back(t);
    impl->tree_letters.push_back(t);  // involution: inverse letter repeats it
    impl->gen_labels.push_back("t" + std::to_string(u));
    if (arity >= 3) {
      Portrait c(static_cast<std::size_t>(impl->nnodes), 0);
      c[static_cast<std::size_t>(u)] = cyc_id;
      impl->tree_letters.push_back(c);
      Portrait ci(static_cast<std::size_t>(impl->nnodes), 0);
      ci[static_cast<std::size_t>(u)] = cyc_inv;
      impl->tree_letters.push_back(ci);
      impl->gen_labels.push_back("c" + std::to_string(u));
    }
  }
  impl->rank = static_cast<int>(impl->gen_labels.size());
  return MarkedGroup(impl);
}

Family MarkedGroup::family() const { return impl_->family; }
int MarkedGroup::rank() const { return impl_->rank; }

Elem MarkedGroup::identity() const {
  switch (impl_->family) {
    case Family::Free: return Elem{Word{}};
    case Family::Finite: return Elem{impl_->id_idx};
    case Family::Tree: return Elem{Portrait(static_cast<std::size_t>(impl_->nnodes), 0)};
  }
  fail(Errc::FamilyMismatch, "unreachable");
}

bool MarkedGroup::is_identity(const Elem& g) const { return g == identity(); }

namespace {

// Image of node position pos (at the given level) under portrait g.
long portrait_pos_image(const GroupImpl& im, const Portrait& g, int level, long pos) {
  // Decompose pos into base-d digits, most significant first.
  int d = im.arity;
  std::vector<int> digits(static_cast<std::size_t>(level));
  long p = pos;
  for (int i = level - 1; i >= 0; --i) {
    digits[static_cast<std::size_t>(i)] = static_cast<int>(p % d);
    p /= d;
  }
  long out = 0;
  long node = 0;  // current node index walking from the root
  long level_pos = 0;
  for (int i = 0; i < level; ++i) {
    int digit = digits[static_cast<std::size_t>(i)];
    int image = im.sym[g[static_cast<std::size_t>(node)]][static_cast<std::size_t>(digit)];
    out = out * d + image;
    level_pos = level_pos * d + digit;
    node = im.level_offset[static_cast<std::size_t>(i + 1)] + level_pos;
  }
  return out;
}

long portrait_node_image_impl(const GroupImpl& im, const Portrait& g, int node) {
  int level = 0;
  while (im.level_offset[static_cast<std::size_t>(level + 1)] <= node) ++level;
  long pos = node - im.level_offset[static_cast<std::size_t>(level)];
  return im.level_offset[static_cast<std::size_t>(level)] + portrait_pos_image(im, g, level, pos);
}

Portrait portrait_multiply(const GroupImpl& im, const Portrait& a, const Portrait& b) {
  // (a*b) acts as b first: (a*b)_u = a_{b(u)} . b_u
  Portrait out(static_cast<std::size_t>(im.nnodes));
  for (int u = 0; u < im.nnodes; ++u) {
    long bu = portrait_node_image_impl(im, b, u);
    out[static_cast<std::size_t>(u)] =
        im.sym_mul[a[static_cast<std::size_t>(bu)]][b[static_cast<std::size_t>(u)]];
  }
  return out;
}

Portrait portrait_inverse(const GroupImpl& im, const Portrait& g) {
  Portrait out(static_cast<std::size_t>(im.nnodes));
  for (int u = 0; u < im.nnodes; ++u) {
    long gu = portrait_node_image_impl(im, g, u);
    out[static_cast<std::size_t>(gu)] = im.sym_inv[g[static_cast<std::size_t>(u)]];
  }
  return out;
}

}  // namespace

Elem MarkedGroup::multiply(const Elem& a, const Elem& b) const {
  switch (impl_->family) {
    case Family::Free: return Elem{word_concat_reduce(as_word(a), as_word(b))};
    case Family::Finite: return Elem{impl_->mul(as_index(a), as_index(b))};
    case Family::Tree: return Elem{portrait_multiply(*impl_, as_portrait(a), as_portrait(b))};
  }
  fail(Errc::FamilyMismatch, "unreachable");
}

Elem MarkedGroup::inverse(const Elem& g) const {
  switch (impl_->family) {
    case Family::Free: return Elem{word_inverse(as_word(g))};
    case Family::Finite: return Elem{impl_->inv[static_cast<std::size_t>(as_index(g))]};
    case Family::Tree: return Elem{portrait_inverse(*impl_, as_portrait(g))};
  }
  fail(Errc::FamilyMismatch, "unreachable");
}

Elem MarkedGroup::conjugate(const Elem& g, const Elem& h) const {
  return multiply(multiply(g, h), inverse(g));
}

Elem MarkedGroup::generator(int i) const { return letter_elem(2 * i); }

Elem MarkedGroup::letter_elem(int letter) const {
  require(letter >= 0 && letter < letter_count(), Errc::UnknownGenerator,
          "letter index out of range");
  switch (impl_->family) {
    case Family::Free: return Elem{Word{letter}};
    case Family::Finite: return Elem{impl_->letter_idx[static_cast<std::size_t>(letter)]};
    case Family::Tree: return Elem{impl_->tree_letters[static_cast<std::size_t>(letter)]};
  }
  fail(Errc::FamilyMismatch, "unreachable");
}

Elem MarkedGroup::apply_letter(const Elem& g, int letter) const {
  return multiply(g, letter_elem(letter));
}

Elem MarkedGroup::word_apply(const Word& w) const {
  Elem acc = identity();
  for (int l : w) acc = apply_letter(acc, l);
  return acc;
}

std::string MarkedGroup::letter_label(int letter) const {
  require(letter >= 0 && letter < letter_count(), Errc::UnknownGenerator,
          "letter index out of range");
  std::string base = impl_->gen_labels[static_cast<std::size_t>(letter / 2)];
  return (letter & 1) ? base + "'" : base;
}

std::optional<int> MarkedGroup::letter_by_label(const std::string& label) const {
  for (int l = 0; l < letter_count(); ++l)
    if (letter_label(l) == label) return l;
  return std::nullopt;
}

long MarkedGroup::order() const {
  switch (impl_->family) {
    case Family::Finite: return impl_->n;
    case Family::Tree: {
      long ns = static_cast<long>(impl_->sym.size());
      long out = 1;
      for (int u = 0; u < impl_->nnodes; ++u) {
        require(out <= (1L << 62) / ns, Errc::GroupTooLarge, "tree group order overflows");
        out *= ns;
      }
      return out;
    }
    case Family::Free: fail(Errc::FamilyMismatch, "free groups are infinite");
  }
  fail(Errc::FamilyMismatch, "unreachable");
}

int MarkedGroup::elem_index(const Elem& g) const {
  require(impl_->family == Family::Finite, Errc::FamilyMismatch, "indices need a finite group");
  int i = as_index(g);
  require(i >= 0 && i < impl_->n, Errc::FamilyMismatch, "element index out of range");
  return i;
}

Elem MarkedGroup::elem_at(int index) const {
  require(impl_->family == Family::Finite, Errc::FamilyMismatch, "indices need a finite group");
  require(index >= 0 && index < impl_->n, Errc::FamilyMismatch, "element index out of range");
  return Elem{index};
}

std::string MarkedGroup::name(const Elem& g) const {
  switch (impl_->family) {
    case Family::Finite: return impl_->names[static_cast<std::size_t>(as_index(g))];
    case Family::Free: {
      const Word& w = as_word(g);
      if (w.empty()) return "e";
      std::string out;
      for (int l : w) out += letter_label(l);
      return out;
    }
    case Family::Tree: {
      const Portrait& p = as_portrait(g);
      std::string out;
      for (std::size_t u = 0; u < p.size(); ++u) {
        if (u) out += '.';
        for (std::uint8_t img : impl_->sym[p[u]]) out += static_cast<char>('0' + img);
      }
      return out;
    }
  }
  fail(Errc::FamilyMismatch, "unreachable");
}

Elem MarkedGroup::parse_elem(const std::string& token) const {
  switch (impl_->family) {
    case Family::Finite: {
      auto it = impl_->name_index.find(token);
      require(it != impl_->name_index.end(), Errc::ParseError, "unknown element " + token);
      return Elem{it->second};
    }
    case Family::Free: {
      if (token == "e") return Elem{Word{}};
      Word w;
      for (std::size_t i = 0; i < token.size();) {
        std::string base(1, token[i]);
        auto l = letter_by_label(base);
        require(l.has_value(), Errc::UnknownGenerator, "unknown generator " + base);
        ++i;
        int code = *l;
        if (i < token.size() && token[i] == '\'') {
          code ^= 1;
          ++i;
        }
        w = word_concat_reduce(w, Word{code});
      }
      return Elem{w};
    }
    case Family::Tree: {
      Portrait p;
      std::size_t i = 0;
      auto& sym = impl_->sym;
      while (i <= token.size()) {
        std::size_t j = token.find('.', i);
        if (j == std::string::npos) j = token.size();
        std::string piece = token.substr(i, j - i);
        require(static_cast<int>(piece.size()) == impl_->arity, Errc::ParseError,
                "portrait node " + piece + " has wrong arity");
        std::vector<std::uint8_t> img;
        for (char c : piece) {
          require(c >= '0' && c < '0' + impl_->arity, Errc::ParseError,
                  "bad digit in portrait " + piece);
          img.push_back(static_cast<std::uint8_t>(c - '0'));
        }
        auto it = std::find(sym.begin(), sym.end(), img);
        require(it != sym.end(), Errc::ParseError, "portrait node is not a permutation");
        p.push_back(static_cast<std::uint8_t>(it - sym.begin()));
        i = j + 1;
        if (j == token.size()) break;
      }
      require(static_cast<int>(p.size()) == impl_->nnodes, Errc::ParseError,
              "portrait has wrong node count");
      return Elem{p};
    }
  }
  fail(Errc::FamilyMismatch, "unreachable");
}

std::vector<Elem> MarkedGroup::ball(int R, std::size_t cap) const {
  require(R >= 0, Errc::ConfigInvalid, "ball radius must be nonnegative");
  cap = std::min(cap, kBallCap);
  switch (impl_->family) {
    case Family::Free: {
      require(free_ball_size(rank(), R, cap) <= cap, Errc::BallTooLarge,
              "free ball exceeds the element cap");
      std::vector<Word> layer{Word{}};
      std::vector<Elem> out{Elem{Word{}}};
      for (int r = 1; r <= R; ++r) {
        std::vector<Word> next;
        for (const Word& w : layer)
          for (int l = 0; l < letter_count(); ++l) {
            if (!w.empty() && w.back() == (l ^ 1)) continue;
            Word x = w;
            x.push_back(l);
            next.push_back(std::move(x));
          }
        for (const Word& w : next) out.push_back(Elem{w});
        layer = std::move(next);
      }
      return out;
    }
    case Family::Finite: {
      std::vector<char> dist(static_cast<std::size_t>(impl_->n), 0);
      std::vector<int> queue{impl_->id_idx}, depth{0};
      dist[static_cast<std::size_t>(impl_->id_idx)] = 1;
      std::vector<int> found{impl_->id_idx};
      for (std::size_t h = 0; h < queue.size(); ++h) {
        if (depth[h] == R) continue;
        for (int li : impl_->letter_idx) {
          int t = impl_->mul(queue[h], li);
          if (!dist[static_cast<std::size_t>(t)]) {
            dist[static_cast<std::size_t>(t)] = 1;
            queue.push_back(t);
            depth.push_back(depth[h] + 1);
            found.push_back(t);
          }
        }
      }
      std::sort(found.begin(), found.end());
      std::vector<Elem> out;
      for (int i : found) out.push_back(Elem{i});
      return out;
    }
    case Family::Tree: {
      std::set<Portrait> seen{as_portrait(identity())};
      std::vector<Portrait> queue{as_portrait(identity())};
      std::vector<int> depth{0};
      for (std::size_t h = 0; h < queue.size(); ++h) {
        if (depth[h] == R) continue;
        for (const Portrait& s : impl_->tree_letters) {
          Portrait t = portrait_multiply(*impl_, queue[h], s);
          if (seen.insert(t).second) {
            require(seen.size() <= cap, Errc::BallTooLarge, "tree ball exceeds the element cap");
            queue.push_back(std::move(t));
            depth.push_back(depth[h] + 1);
          }
        }
      }
      std::vector<Elem> out;
      for (const Portrait& p : seen) out.push_back(Elem{p});
      return out;
    }
  }
  fail(Errc::FamilyMismatch, "unreachable");
}

bool MarkedGroup::elem_less(const Elem& a, const Elem& b) const {
  if (impl_->family == Family::Free) {
    const Word& x = as_word(a);
    const Word& y = as_word(b);
    if (x.size() != y.size()) return x.size() < y.size();
    return x < y;
  }
  return a < b;
}

bool MarkedGroup::same_group(const MarkedGroup& other) const {
  if (impl_ == other.impl_) return true;
  const GroupImpl& a = *impl_;
  const GroupImpl& b = *other.impl_;
  if (a.family != b.family || a.rank != b.rank || a.gen_labels != b.gen_labels)
    return false;
  switch (a.family) {
    case Family::Free:
      return true;
    case Family::Finite:
      return a.n == b.n && a.letter_idx == b.letter_idx && a.names == b.names &&
             a.table == b.table;
    case Family::Tree:
      return a.arity == b.arity && a.depth == b.depth;
  }
  return false;
}

int MarkedGroup::tree_arity() const {
  require(impl_->family == Family::Tree, Errc::FamilyMismatch, "not a tree group");
  return impl_->arity;
}

int MarkedGroup::tree_depth() const {
  require(impl_->family == Family::Tree, Errc::FamilyMismatch, "not a tree group");
  return impl_->depth;
}

int MarkedGroup::tree_nodes() const {
  require(impl_->family == Family::Tree, Errc::FamilyMismatch, "not a tree group");
  return impl_->nnodes;
}

int MarkedGroup::tree_node_image(const Elem& g, int node) const {
  require(impl_->family == Family::Tree, Errc::FamilyMismatch, "not a tree group");
  return static_cast<int>(portrait_node_image_impl(*impl_, as_portrait(g), node));
}

const std::vector<std::vector<std::uint8_t>>& MarkedGroup::tree_sym() const {
  require(impl_->family == Family::Tree, Errc::FamilyMismatch, "not a tree group");
  return impl_->sym;
}

Elem evaluate_hom(const MarkedGroup& src, const MarkedGroup& target,
                  const std::vector<Elem>& images, const Elem& w) {
  require(src.family() == Family::Free, Errc::UnsupportedSource,
          "homomorphism evaluation needs a free source");
  require(static_cast<int>(images.size()) == src.rank(), Errc::NotAHomomorphism,
          "need one image per generator");
  const Word* word = std::get_if<Word>(&w.v);
  require(word != nullptr, Errc::FamilyMismatch, "element does not belong to the source");
  Elem acc = target.identity();
  for (int l : *word) {
    const Elem& img = images[static_cast<std::size_t>(l / 2)];
    acc = target.multiply(acc, (l & 1) ? target.inverse(img) : img);
  }
  return acc;
}

Elem evaluate_hom(const MarkedGroup& src, const MarkedGroup& target,
                  const std::map<std::string, Elem>& images, const Elem& w) {
  require(src.family() == Family::Free, Errc::UnsupportedSource,
          "homomorphism evaluation needs a free source");
  std::vector<Elem> by_gen;
  for (int i = 0; i < src.rank(); ++i) {
    auto it = images.find(src.letter_label(2 * i));
    require(it != images.end(), Errc::UnknownGenerator,
            "missing image for generator " + src.letter_label(2 * i));
    by_gen.push_back(it->second);
    auto primed = images.find(src.letter_label(2 * i + 1));
    if (primed != images.end())
      require(primed->second == target.inverse(it->second), Errc::NotAHomomorphism,
              "image map is not symmetric on " + src.letter_label(2 * i));
  }
  for (const auto& [label, img] : images) {
    (void)img;
    require(src.letter_by_label(label).has_value(), Errc::UnknownGenerator,
            "unknown generator " + label);
  }
  return evaluate_hom(src, target, by_gen, w);
}

const char* errc_name(Errc c) {
  switch (c) {
    case Errc::UnknownGenerator: return "UnknownGenerator";
    case Errc::FamilyMismatch: return "FamilyMismatch";
    case Errc::BallTooLarge: return "BallTooLarge";
    case Errc::GroupTooLarge: return "GroupTooLarge";
    case Errc::NotAHomomorphism: return "NotAHomomorphism";
    case Errc::UnsupportedSource: return "UnsupportedSource";
    case Errc::IncompleteTable: return "IncompleteTable";
    case Errc::InvalidSubgroup: return "InvalidSubgroup";
    case Errc::ClosureExceedsBound: return "ClosureExceedsBound";
    case Errc::IndexOverflow: return "IndexOverflow";
    case Errc::NotNormal: return "NotNormal";
    case Errc::Undecided: return "Undecided";
    case Errc::Unsupported: return "Unsupported";
    case Errc::InvalidMeasure: return "InvalidMeasure";
    case Errc::NotInvariantMeasure: return "NotInvariantMeasure";
    case Errc::ActionNotWellDefined: return "ActionNotWellDefined";
    case Errc::NoConvergence: return "NoConvergence";
    case Errc::InvalidGraph: return "InvalidGraph";
    case Errc::GraphTooSmall: return "GraphTooSmall";
    case Errc::DepthOutOfRange: return "DepthOutOfRange";
    case Errc::NotACosetUnion: return "NotACosetUnion";
    case Errc::EmptySet: return "EmptySet";
    case Errc::RepNotInSubgroup: return "RepNotInSubgroup";
    case Errc::MalformedCertificate: return "MalformedCertificate";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::FieldMismatch: return "FieldMismatch";
    case Errc::LeavesUnitBall: return "LeavesUnitBall";
    case Errc::NotOrthogonal: return "NotOrthogonal";
    case Errc::EmptyMeasure: return "EmptyMeasure";
    case Errc::NotContained: return "NotContained";
    case Errc::AtomNotContained: return "AtomNotContained";
    case Errc::ConfigInvalid: return "ConfigInvalid";
    case Errc::IoError: return "IoError";
    case Errc::ParseError: return "ParseError";
  }
  return "Error";
}

Rat rat_parse(const std::string& s) {
  require(!s.empty(), Errc::ParseError, "empty rational");
  auto dot = s.find('.');
  try {
    if (dot != std::string::npos) {
      std::string digits = s.substr(0, dot) + s.substr(dot + 1);
      require(!digits.empty() && digits.find_first_not_of("-0123456789") == std::string::npos,
              Errc::ParseError, "bad rational " + s);
      Rat q{mpz_class(digits, 10)};
      Rat den(1);
      for (std::size_t i = dot + 1; i < s.size(); ++i) den *= 10;
      q /= den;
      q.canonicalize();
      return q;
    }
    Rat q(s);
    q.canonicalize();
    require(q.get_den() > 0, Errc::ParseError, "bad rational " + s);
    return q;
  } catch (const std::invalid_argument&) {
    fail(Errc::ParseError, "bad rational " + s);
  }
}

}  // namespace irslab
