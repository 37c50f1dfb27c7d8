#include "irslab/subgroup.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

namespace irslab {

namespace {

void append_int(std::string& s, int v) {
  s += std::to_string(v);
  s += ',';
}

}  // namespace

// ---------------------------------------------------------------------------
// Fingerprint

std::string Fingerprint::hex() const {
  static const char* digits = "0123456789abcdef";
  std::string out;
  for (std::size_t byte = 0; byte * 8 < bits.size(); ++byte) {
    unsigned v = 0;
    for (unsigned j = 0; j < 8 && byte * 8 + j < bits.size(); ++j)
      if (bits[byte * 8 + j]) v |= 1u << j;
    out += digits[v >> 4];
    out += digits[v & 15];
  }
  return out;
}

std::string Fingerprint::serialize() const {
  return std::to_string(radius) + " " + std::to_string(bits.size()) + " " + hex();
}

Fingerprint Fingerprint::parse(const std::string& text) {
  std::istringstream in(text);
  int radius = 0;
  std::size_t nbits = 0;
  std::string hexstr;
  in >> radius >> nbits >> hexstr;
  require(!in.fail(), Errc::ParseError, "bad fingerprint: " + text);
  require(hexstr.size() == 2 * ((nbits + 7) / 8), Errc::ParseError,
          "fingerprint hex length mismatch");
  Fingerprint fp;
  fp.radius = radius;
  fp.bits.assign(nbits, false);
  auto nib = [](char c) -> unsigned {
    if (c >= '0' && c <= '9') return static_cast<unsigned>(c - '0');
    if (c >= 'a' && c <= 'f') return static_cast<unsigned>(c - 'a' + 10);
    fail(Errc::ParseError, "bad hex digit in fingerprint");
  };
  for (std::size_t byte = 0; byte * 8 < nbits; ++byte) {
    unsigned v = (nib(hexstr[2 * byte]) << 4) | nib(hexstr[2 * byte + 1]);
    for (unsigned j = 0; j < 8 && byte * 8 + j < nbits; ++j)
      fp.bits[byte * 8 + j] = (v >> j) & 1;
  }
  return fp;
}

bool CoreGraph::complete() const {
  if (rows() == 0) return false;
  return std::find(next.begin(), next.end(), -1) == next.end();
}

// ---------------------------------------------------------------------------
// Folded graph construction

namespace {

class FoldBuilder {
 public:
  explicit FoldBuilder(int k) : k_(k) { add_vertex(); }

  int k() const { return k_; }
  int base() { return find(0); }

  int add_vertex() {
    nxt_.emplace_back(static_cast<std::size_t>(2 * k_), -1);
    uf_.push_back(static_cast<int>(uf_.size()));
    return static_cast<int>(uf_.size()) - 1;
  }

  int find(int v) {
    while (uf_[static_cast<std::size_t>(v)] != v) {
      uf_[static_cast<std::size_t>(v)] = uf_[static_cast<std::size_t>(uf_[static_cast<std::size_t>(v)])];
      v = uf_[static_cast<std::size_t>(v)];
    }
    return v;
  }

  int step(int v, int l) {
    int t = nxt_[static_cast<std::size_t>(find(v))][static_cast<std::size_t>(l)];
    return t == -1 ? -1 : find(t);
  }

  void merge(int a, int b) {
    std::vector<std::pair<int, int>> work{{a, b}};
    while (!work.empty()) {
      auto [x, y] = work.back();
      work.pop_back();
      x = find(x);
      y = find(y);
      if (x == y) continue;
      if (y < x) std::swap(x, y);
      uf_[static_cast<std::size_t>(y)] = x;
      auto& rx = nxt_[static_cast<std::size_t>(x)];
      auto& ry = nxt_[static_cast<std::size_t>(y)];
      for (int l = 0; l < 2 * k_; ++l) {
        int t = ry[static_cast<std::size_t>(l)];
        if (t == -1) continue;
        ry[static_cast<std::size_t>(l)] = -1;
        if (rx[static_cast<std::size_t>(l)] == -1)
          rx[static_cast<std::size_t>(l)] = t;
        else
          work.emplace_back(rx[static_cast<std::size_t>(l)], t);
      }
    }
  }

  void add_arc(int u, int l, int v) {
    for (;;) {
      u = find(u);
      v = find(v);
      int w = step(u, l);
      if (w != -1) {
        if (w == v) return;
        merge(w, v);
        continue;
      }
      int w2 = step(v, l ^ 1);
      if (w2 != -1) {
        merge(w2, u);
        continue;
      }
      nxt_[static_cast<std::size_t>(u)][static_cast<std::size_t>(l)] = v;
      nxt_[static_cast<std::size_t>(v)][static_cast<std::size_t>(l ^ 1)] = u;
      return;
    }
  }

  void add_loop_word(const Word& w) {
    int cur = base();
    for (std::size_t i = 0; i < w.size(); ++i) {
      int l = w[i];
      int t = step(cur, l);
      if (t != -1) {
        cur = t;
        continue;
      }
      int target = (i + 1 == w.size()) ? base() : add_vertex();
      add_arc(cur, l, target);
      cur = step(cur, l);
    }
    if (!w.empty()) merge(cur, base());
  }

  // Materializes the reachable component from base as a CoreGraph with
  // degree-1 trimming (base excepted) and BFS renumbering.
  CoreGraph extract() {
    int b = base();
    std::map<int, int> live;  // root id -> dense id
    std::vector<int> order;
    live[b] = 0;
    order.push_back(b);
    for (std::size_t h = 0; h < order.size(); ++h)
      for (int l = 0; l < 2 * k_; ++l) {
        int t = step(order[h], l);
        if (t != -1 && !live.count(t)) {
          live[t] = static_cast<int>(order.size());
          order.push_back(t);
        }
      }
    int n = static_cast<int>(order.size());
    std::vector<int> next(static_cast<std::size_t>(n) * (2 * k_), -1);
    for (int v = 0; v < n; ++v)
      for (int l = 0; l < 2 * k_; ++l) {
        int t = step(order[static_cast<std::size_t>(v)], l);
        if (t != -1) next[static_cast<std::size_t>(v) * (2 * k_) + l] = live.at(t);
      }
    // Trim hanging trees.
    std::vector<int> degree(static_cast<std::size_t>(n), 0);
    std::vector<char> dead(static_cast<std::size_t>(n), 0);
    for (int v = 0; v < n; ++v)
      for (int l = 0; l < 2 * k_; ++l)
        if (next[static_cast<std::size_t>(v) * (2 * k_) + l] != -1)
          ++degree[static_cast<std::size_t>(v)];
    std::vector<int> queue;
    for (int v = 1; v < n; ++v)
      if (degree[static_cast<std::size_t>(v)] <= 1) queue.push_back(v);
    while (!queue.empty()) {
      int v = queue.back();
      queue.pop_back();
      if (dead[static_cast<std::size_t>(v)]) continue;
      dead[static_cast<std::size_t>(v)] = 1;
      for (int l = 0; l < 2 * k_; ++l) {
        int t = next[static_cast<std::size_t>(v) * (2 * k_) + l];
        if (t == -1) continue;
        next[static_cast<std::size_t>(v) * (2 * k_) + l] = -1;
        next[static_cast<std::size_t>(t) * (2 * k_) + (l ^ 1)] = -1;
        if (--degree[static_cast<std::size_t>(t)] <= 1 && t != 0 && !dead[static_cast<std::size_t>(t)])
          queue.push_back(t);
      }
    }
    // BFS renumber over survivors.
    std::vector<int> id(static_cast<std::size_t>(n), -1);
    std::vector<int> bfs{0};
    id[0] = 0;
    for (std::size_t h = 0; h < bfs.size(); ++h)
      for (int l = 0; l < 2 * k_; ++l) {
        int t = next[static_cast<std::size_t>(bfs[h]) * (2 * k_) + l];
        if (t != -1 && id[static_cast<std::size_t>(t)] == -1) {
          id[static_cast<std::size_t>(t)] = static_cast<int>(bfs.size());
          bfs.push_back(t);
        }
      }
    CoreGraph g;
    g.k = k_;
    g.base = 0;
    g.next.assign(bfs.size() * static_cast<std::size_t>(2 * k_), -1);
    for (std::size_t v = 0; v < bfs.size(); ++v)
      for (int l = 0; l < 2 * k_; ++l) {
        int t = next[static_cast<std::size_t>(bfs[v]) * (2 * k_) + l];
        if (t != -1)
          g.next[v * static_cast<std::size_t>(2 * k_) + static_cast<std::size_t>(l)] =
              id[static_cast<std::size_t>(t)];
      }
    return g;
  }

 private:
  int k_;
  std::vector<std::vector<int>> nxt_;
  std::vector<int> uf_;
};

std::vector<Word> words_from_graph(int k, const std::vector<int>& next, int base) {
  int rows = k == 0 ? 0 : static_cast<int>(next.size()) / (2 * k);
  auto step = [&](int v, int l) { return next[static_cast<std::size_t>(v) * (2 * k) + l]; };
  std::vector<int> parent(static_cast<std::size_t>(rows), -2), via(static_cast<std::size_t>(rows), -1);
  std::vector<char> tree(next.size(), 0);
  std::vector<int> queue{base};
  parent[static_cast<std::size_t>(base)] = -1;
  for (std::size_t h = 0; h < queue.size(); ++h)
    for (int l = 0; l < 2 * k; ++l) {
      int v = queue[h];
      int t = step(v, l);
      if (t != -1 && parent[static_cast<std::size_t>(t)] == -2) {
        parent[static_cast<std::size_t>(t)] = v;
        via[static_cast<std::size_t>(t)] = l;
        tree[static_cast<std::size_t>(v) * (2 * k) + l] = 1;
        tree[static_cast<std::size_t>(t) * (2 * k) + (l ^ 1)] = 1;
        queue.push_back(t);
      }
    }
  std::vector<Word> path(static_cast<std::size_t>(rows));
  for (int v : queue) {
    if (v == base) continue;
    path[static_cast<std::size_t>(v)] = path[static_cast<std::size_t>(parent[static_cast<std::size_t>(v)])];
    path[static_cast<std::size_t>(v)].push_back(via[static_cast<std::size_t>(v)]);
  }
  std::vector<Word> out;
  for (int v = 0; v < rows; ++v) {
    if (parent[static_cast<std::size_t>(v)] == -2) continue;  // unreachable
    for (int l = 0; l < 2 * k; l += 2) {
      int t = step(v, l);
      if (t == -1 || tree[static_cast<std::size_t>(v) * (2 * k) + l]) continue;
      Word w = path[static_cast<std::size_t>(v)];
      w = word_concat_reduce(w, Word{l});
      w = word_concat_reduce(w, word_inverse(path[static_cast<std::size_t>(t)]));
      out.push_back(std::move(w));
    }
  }
  return out;
}

CoreGraph core_from_words(int k, const std::vector<Word>& words) {
  FoldBuilder b(k);
  for (const Word& w : words) b.add_loop_word(w);
  return b.extract();
}

CosetTable table_from_complete_core(const CoreGraph& g) {
  CosetTable t;
  t.k = g.k;
  t.next = g.next;  // core graphs are produced BFS-renumbered with base 0
  return t;
}

CosetTable standardize_table(const CosetTable& t, int new_base) {
  int rows = t.rows();
  std::vector<int> id(static_cast<std::size_t>(rows), -1);
  std::vector<int> order{new_base};
  id[static_cast<std::size_t>(new_base)] = 0;
  for (std::size_t h = 0; h < order.size(); ++h)
    for (int l = 0; l < 2 * t.k; ++l) {
      int x = t.step(order[h], l);
      if (id[static_cast<std::size_t>(x)] == -1) {
        id[static_cast<std::size_t>(x)] = static_cast<int>(order.size());
        order.push_back(x);
      }
    }
  require(static_cast<int>(order.size()) == rows, Errc::IncompleteTable,
          "coset table is not transitive");
  CosetTable out;
  out.k = t.k;
  out.next.assign(t.next.size(), -1);
  for (int v = 0; v < rows; ++v)
    for (int l = 0; l < 2 * t.k; ++l)
      out.next[static_cast<std::size_t>(id[static_cast<std::size_t>(v)]) * (2 * t.k) + l] =
          id[static_cast<std::size_t>(t.step(v, l))];
  return out;
}

int trace_table(const CosetTable& t, int from, const Word& w) {
  int cur = from;
  for (int l : w) cur = t.step(cur, l);
  return cur;
}

// -1 when the trace leaves the graph.
int trace_core(const CoreGraph& g, int from, const Word& w) {
  int cur = from;
  for (int l : w) {
    cur = g.step(cur, l);
    if (cur == -1) return -1;
  }
  return cur;
}

}  // namespace

// ---------------------------------------------------------------------------
// Subgroup construction

namespace {

Subgroup::Rep promote(CoreGraph g) {
  if (g.complete()) return table_from_complete_core(g);
  return g;
}

std::vector<int> close_indices(const MarkedGroup& g, std::vector<int> seed) {
  std::set<int> members{g.elem_index(g.identity())};
  std::vector<int> queue(members.begin(), members.end());
  auto push = [&](int x) {
    if (members.insert(x).second) queue.push_back(x);
  };
  for (int s : seed) push(s);
  std::vector<int> snapshot;
  for (std::size_t h = 0; h < queue.size(); ++h) {
    int x = queue[h];
    snapshot.assign(queue.begin(), queue.end());
    for (int y : snapshot) {
      push(g.elem_index(g.multiply(g.elem_at(x), g.elem_at(y))));
      push(g.elem_index(g.multiply(g.elem_at(y), g.elem_at(x))));
    }
  }
  return std::vector<int>(members.begin(), members.end());
}

}  // namespace

Subgroup Subgroup::from_indices(const MarkedGroup& parent, std::vector<int> idx) {
  require(parent.family() == Family::Finite, Errc::FamilyMismatch,
          "element-set subgroups need a finite parent");
  std::sort(idx.begin(), idx.end());
  idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
  require(!idx.empty(), Errc::InvalidSubgroup, "subgroup must contain the identity");
  require(std::binary_search(idx.begin(), idx.end(), parent.elem_index(parent.identity())),
          Errc::InvalidSubgroup, "subgroup must contain the identity");
  for (int a : idx) {
    require(a >= 0 && a < parent.order(), Errc::InvalidSubgroup, "element index out of range");
    require(std::binary_search(idx.begin(), idx.end(),
                               parent.elem_index(parent.inverse(parent.elem_at(a)))),
            Errc::InvalidSubgroup, "set is not closed under inversion");
    for (int b : idx)
      require(std::binary_search(idx.begin(), idx.end(),
                                 parent.elem_index(parent.multiply(parent.elem_at(a),
                                                                   parent.elem_at(b)))),
              Errc::InvalidSubgroup, "set is not closed under multiplication");
  }
  return Subgroup(parent, ElementSet{std::move(idx)});
}

Subgroup Subgroup::from_elements(const MarkedGroup& parent, const std::vector<Elem>& elems) {
  std::vector<int> idx;
  for (const Elem& e : elems) idx.push_back(parent.elem_index(e));
  return from_indices(parent, std::move(idx));
}

Subgroup Subgroup::generated_by(const MarkedGroup& parent, const std::vector<Elem>& gens) {
  switch (parent.family()) {
    case Family::Finite: {
      std::vector<int> seed;
      for (const Elem& e : gens) seed.push_back(parent.elem_index(e));
      return Subgroup(parent, ElementSet{close_indices(parent, std::move(seed))});
    }
    case Family::Free: {
      std::vector<Word> words;
      for (const Elem& e : gens) {
        const Word* w = std::get_if<Word>(&e.v);
        require(w != nullptr, Errc::FamilyMismatch, "generator is not a word");
        words.push_back(*w);
      }
      return Subgroup(parent, promote(core_from_words(parent.rank(), words)));
    }
    case Family::Tree:
      fail(Errc::FamilyMismatch, "tree subgroups live in the tree-group module");
  }
  fail(Errc::FamilyMismatch, "unreachable");
}

Subgroup Subgroup::from_coset_table(const MarkedGroup& parent, CosetTable table) {
  require(parent.family() == Family::Free, Errc::FamilyMismatch,
          "coset tables need a free parent");
  require(table.k == parent.rank(), Errc::FamilyMismatch, "coset table rank mismatch");
  int rows = table.rows();
  require(rows >= 1, Errc::IncompleteTable, "coset table is empty");
  require(static_cast<int>(table.next.size()) == rows * 2 * table.k, Errc::IncompleteTable,
          "coset table shape mismatch");
  for (int v = 0; v < rows; ++v)
    for (int l = 0; l < 2 * table.k; ++l) {
      int t = table.step(v, l);
      require(t >= 0 && t < rows, Errc::IncompleteTable, "coset table has missing entries");
      require(table.step(t, l ^ 1) == v, Errc::IncompleteTable,
              "inverse letter is not the inverse permutation");
    }
  return Subgroup(parent, standardize_table(table, 0));
}

Subgroup Subgroup::kernel_of_hom(const MarkedGroup& src, const MarkedGroup& target,
                                 const std::vector<Elem>& images) {
  require(src.family() == Family::Free, Errc::UnsupportedSource,
          "kernels are built from free sources");
  require(static_cast<int>(images.size()) == src.rank(), Errc::NotAHomomorphism,
          "need one image per generator");
  std::map<Elem, int> id;
  std::vector<Elem> order{target.identity()};
  id[target.identity()] = 0;
  std::vector<int> next;
  for (std::size_t h = 0; h < order.size(); ++h) {
    for (int l = 0; l < 2 * src.rank(); ++l) {
      const Elem& img = images[static_cast<std::size_t>(l / 2)];
      Elem t = target.multiply(order[h], (l & 1) ? target.inverse(img) : img);
      auto [it, fresh] = id.emplace(t, static_cast<int>(order.size()));
      if (fresh) {
        require(order.size() < static_cast<std::size_t>(kIndexCap), Errc::IndexOverflow,
                "kernel index exceeds the cap");
        order.push_back(t);
      }
      next.push_back(it->second);
    }
  }
  CosetTable table;
  table.k = src.rank();
  table.next = std::move(next);
  return from_coset_table(src, std::move(table));
}

Subgroup Subgroup::trivial(const MarkedGroup& parent) {
  switch (parent.family()) {
    case Family::Finite:
      return Subgroup(parent, ElementSet{{parent.elem_index(parent.identity())}});
    case Family::Free: {
      CoreGraph g;
      g.k = parent.rank();
      g.base = 0;
      g.next.assign(static_cast<std::size_t>(2 * g.k), -1);
      return Subgroup(parent, g);
    }
    case Family::Tree:
      fail(Errc::FamilyMismatch, "tree subgroups live in the tree-group module");
  }
  fail(Errc::FamilyMismatch, "unreachable");
}

Subgroup Subgroup::whole(const MarkedGroup& parent) {
  switch (parent.family()) {
    case Family::Finite: {
      std::vector<int> idx(static_cast<std::size_t>(parent.order()));
      for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
      return Subgroup(parent, ElementSet{std::move(idx)});
    }
    case Family::Free: {
      CosetTable t;
      t.k = parent.rank();
      t.next.assign(static_cast<std::size_t>(2 * t.k), 0);
      return Subgroup(parent, t);
    }
    case Family::Tree:
      fail(Errc::FamilyMismatch, "tree subgroups live in the tree-group module");
  }
  fail(Errc::FamilyMismatch, "unreachable");
}

const char* Subgroup::rep_tag() const {
  if (std::holds_alternative<ElementSet>(rep_)) return "element-set";
  if (std::holds_alternative<CosetTable>(rep_)) return "coset-table";
  return "core-graph";
}

// ---------------------------------------------------------------------------
// Queries

bool Subgroup::contains(const Elem& g) const {
  if (const auto* es = std::get_if<ElementSet>(&rep_)) {
    int i = parent_.elem_index(g);
    return std::binary_search(es->idx.begin(), es->idx.end(), i);
  }
  const Word* w = std::get_if<Word>(&g.v);
  require(w != nullptr, Errc::FamilyMismatch, "element does not belong to the parent");
  if (const auto* t = std::get_if<CosetTable>(&rep_)) return trace_table(*t, 0, *w) == 0;
  const auto& cg = std::get<CoreGraph>(rep_);
  return trace_core(cg, cg.base, *w) == cg.base;
}

Fingerprint Subgroup::fingerprint(int R, std::size_t cap) const {
  Fingerprint fp;
  fp.radius = R;
  for (const Elem& e : parent_.ball(R, cap)) fp.bits.push_back(contains(e));
  return fp;
}

Subgroup Subgroup::conjugated(const Elem& g) const {
  if (const auto* es = std::get_if<ElementSet>(&rep_)) {
    std::vector<int> out;
    for (int i : es->idx)
      out.push_back(parent_.elem_index(parent_.conjugate(g, parent_.elem_at(i))));
    std::sort(out.begin(), out.end());
    return Subgroup(parent_, ElementSet{std::move(out)});
  }
  const Word* w = std::get_if<Word>(&g.v);
  require(w != nullptr, Errc::FamilyMismatch, "element does not belong to the parent");
  if (const auto* t = std::get_if<CosetTable>(&rep_)) {
    // Cosets of gHg^-1 are cosets of H rebased at the coset of g^-1.
    int nb = trace_table(*t, 0, word_inverse(*w));
    return Subgroup(parent_, standardize_table(*t, nb));
  }
  std::vector<Word> words;
  for (const Word& u : generator_words())
    words.push_back(word_concat_reduce(word_concat_reduce(*w, u), word_inverse(*w)));
  return Subgroup(parent_, promote(core_from_words(parent_.rank(), words)));
}

bool Subgroup::is_normal() const {
  for (int i = 0; i < parent_.rank(); ++i)
    if (!(conjugated(parent_.generator(i)) == *this)) return false;
  return true;
}

long Subgroup::order() const {
  if (const auto* es = std::get_if<ElementSet>(&rep_)) return static_cast<long>(es->idx.size());
  if (std::holds_alternative<CoreGraph>(rep_) && core_rank() == 0) return 1;
  fail(Errc::FamilyMismatch, "subgroup is infinite");
}

long Subgroup::index() const {
  if (const auto* es = std::get_if<ElementSet>(&rep_))
    return parent_.order() / static_cast<long>(es->idx.size());
  if (const auto* t = std::get_if<CosetTable>(&rep_)) return t->rows();
  return -1;
}

int Subgroup::core_rank() const {
  int k = parent_.rank();
  if (const auto* t = std::get_if<CosetTable>(&rep_))
    return t->rows() * (k - 1) + 1;
  const auto* cg = std::get_if<CoreGraph>(&rep_);
  require(cg != nullptr, Errc::FamilyMismatch, "rank needs a free-parent subgroup");
  int edges = 0;
  for (int v = 0; v < cg->rows(); ++v)
    for (int l = 0; l < 2 * k; l += 2)
      if (cg->step(v, l) != -1) ++edges;
  return edges - cg->rows() + 1;
}

std::vector<Elem> Subgroup::elements() const {
  if (const auto* es = std::get_if<ElementSet>(&rep_)) {
    std::vector<Elem> out;
    for (int i : es->idx) out.push_back(parent_.elem_at(i));
    return out;
  }
  if (order() == 1) return {parent_.identity()};
  fail(Errc::FamilyMismatch, "cannot list an infinite subgroup");
}

std::vector<Word> Subgroup::generator_words() const {
  if (const auto* t = std::get_if<CosetTable>(&rep_))
    return words_from_graph(t->k, t->next, 0);
  const auto* cg = std::get_if<CoreGraph>(&rep_);
  require(cg != nullptr, Errc::FamilyMismatch, "generator words need a free-parent subgroup");
  return words_from_graph(cg->k, cg->next, cg->base);
}

bool Subgroup::contains_subgroup(const Subgroup& other) const {
  require(parent_.same_group(other.parent_), Errc::FamilyMismatch, "different parents");
  if (const auto* es = std::get_if<Subgroup::ElementSet>(&other.rep_)) {
    for (int i : es->idx)
      if (!contains(parent_.elem_at(i))) return false;
    return true;
  }
  for (const Word& w : other.generator_words())
    if (!contains(Elem{w})) return false;
  return true;
}

const std::string& Subgroup::canonical_key() const {
  if (!key_.empty()) return key_;
  std::string key;
  if (const auto* es = std::get_if<ElementSet>(&rep_)) {
    key = "E|";
    for (int i : es->idx) append_int(key, i);
  } else if (const auto* t = std::get_if<CosetTable>(&rep_)) {
    key = "T|";
    for (int v : t->next) append_int(key, v);
  } else {
    const auto& cg = std::get<CoreGraph>(rep_);
    key = "C|";
    for (int v : cg.next) append_int(key, v);
  }
  key_ = std::move(key);
  return key_;
}

// ---------------------------------------------------------------------------
// Chabauty distance

namespace {

struct DepthBall {
  std::vector<Elem> elems;  // BFS order, depth nondecreasing
  std::vector<int> depth;
};

DepthBall ball_with_depth(const MarkedGroup& g, int R, std::size_t cap) {
  if (g.family() == Family::Free)
    require(free_ball_size(g.rank(), R, cap) <= cap, Errc::BallTooLarge,
            "ball exceeds the element cap");
  DepthBall out;
  std::set<Elem> seen;
  out.elems.push_back(g.identity());
  out.depth.push_back(0);
  seen.insert(g.identity());
  for (std::size_t h = 0; h < out.elems.size(); ++h) {
    if (out.depth[h] == R) continue;
    for (int l = 0; l < g.letter_count(); ++l) {
      Elem t = g.apply_letter(out.elems[h], l);
      if (seen.insert(t).second) {
        require(out.elems.size() < cap, Errc::BallTooLarge, "ball exceeds the element cap");
        out.elems.push_back(std::move(t));
        out.depth.push_back(out.depth[h] + 1);
      }
    }
  }
  return out;
}

}  // namespace

ChabautyResult chabauty_distance(const Subgroup& h1, const Subgroup& h2, int r_max,
                                 std::size_t cap) {
  require(h1.parent().same_group(h2.parent()), Errc::FamilyMismatch,
          "subgroups have different parents");
  require(r_max >= 1, Errc::ConfigInvalid, "R_max must be at least 1");
  DepthBall ball = ball_with_depth(h1.parent(), r_max, cap);
  for (std::size_t i = 0; i < ball.elems.size(); ++i) {
    if (h1.contains(ball.elems[i]) != h2.contains(ball.elems[i])) {
      int r = ball.depth[i] - 1;
      ChabautyResult res;
      res.agree_radius = r;
      res.indistinguishable = false;
      mpz_class den = 1;
      mpz_mul_2exp(den.get_mpz_t(), den.get_mpz_t(), static_cast<unsigned long>(r));
      res.value = Rat(1, den);
      res.value.canonicalize();
      return res;
    }
  }
  ChabautyResult res;
  res.agree_radius = r_max;
  res.indistinguishable = true;
  res.value = 0;
  return res;
}

// ---------------------------------------------------------------------------
// Normal closure, intersection, quotients

Subgroup normal_closure_of_set(const MarkedGroup& g, const std::vector<Elem>& t,
                               long index_bound) {
  if (t.empty()) return Subgroup::trivial(g);
  if (g.family() == Family::Finite) {
    std::set<int> members{g.elem_index(g.identity())};
    std::vector<int> queue(members.begin(), members.end());
    auto push = [&](int x) {
      if (members.insert(x).second) queue.push_back(x);
    };
    for (const Elem& e : t) push(g.elem_index(e));
    for (std::size_t h = 0; h < queue.size(); ++h) {
      int x = queue[h];
      for (int l = 0; l < g.letter_count(); ++l)
        push(g.elem_index(g.conjugate(g.letter_elem(l), g.elem_at(x))));
      std::vector<int> snapshot(queue.begin(), queue.end());
      for (int y : snapshot) {
        push(g.elem_index(g.multiply(g.elem_at(x), g.elem_at(y))));
        push(g.elem_index(g.multiply(g.elem_at(y), g.elem_at(x))));
      }
    }
    return Subgroup::from_indices(g, std::vector<int>(members.begin(), members.end()));
  }
  require(g.family() == Family::Free, Errc::FamilyMismatch,
          "normal closure needs a finite or free parent");
  std::vector<Word> base_words;
  for (const Elem& e : t) {
    const Word* w = std::get_if<Word>(&e.v);
    require(w != nullptr, Errc::FamilyMismatch, "element does not belong to the parent");
    if (!w->empty()) base_words.push_back(*w);
  }
  if (base_words.empty()) return Subgroup::trivial(g);
  // Certificate before any saturation work: the quotient surjects onto Z^k
  // modulo the exponent-sum lattice of T, so the closure index is at least
  // that lattice's index (infinite when the lattice is degenerate).
  {
    const int k = g.rank();
    std::vector<std::vector<mpz_class>> rows;
    for (const Word& w : base_words) {
      std::vector<mpz_class> row(static_cast<std::size_t>(k));
      for (int l : w) row[static_cast<std::size_t>(l / 2)] += (l % 2 == 0) ? 1 : -1;
      rows.push_back(std::move(row));
    }
    std::size_t pivot = 0;
    mpz_class lattice_index = 1;
    for (int col = 0; col < k && pivot < rows.size(); ++col) {
      auto at = [&](std::size_t r, int c) -> mpz_class& {
        return rows[r][static_cast<std::size_t>(c)];
      };
      for (std::size_t r = pivot + 1; r < rows.size(); ++r) {
        while (at(r, col) != 0) {
          if (at(pivot, col) == 0) {
            std::swap(rows[pivot], rows[r]);
            continue;
          }
          mpz_class q = at(r, col) / at(pivot, col);
          if (q != 0)
            for (int c = col; c < k; ++c) at(r, c) -= q * at(pivot, c);
          if (at(r, col) != 0) std::swap(rows[pivot], rows[r]);
        }
      }
      if (at(pivot, col) != 0) {
        lattice_index *= abs(at(pivot, col));
        ++pivot;
      }
    }
    require(pivot == static_cast<std::size_t>(k), Errc::ClosureExceedsBound,
            "normal closure has infinite index: exponent sums do not span");
    require(lattice_index <= index_bound, Errc::ClosureExceedsBound,
            "abelianized quotient alone exceeds the index bound");
  }
  constexpr int kMaxConjugatorRadius = 12;
  for (int L = 0; L <= kMaxConjugatorRadius; ++L) {
    std::vector<Word> words;
    std::size_t cap = 4u * static_cast<std::size_t>(index_bound) + 4096;
    if (free_ball_size(g.rank(), L, cap) > cap)
      fail(Errc::ClosureExceedsBound, "conjugator ball exceeds the index bound");
    for (const Elem& c : g.ball(L)) {
      const Word& w = std::get<Word>(c.v);
      for (const Word& b : base_words)
        words.push_back(word_concat_reduce(word_concat_reduce(w, b), word_inverse(w)));
    }
    Subgroup h(Subgroup::generated_by(g, [&] {
      std::vector<Elem> es;
      for (Word& w : words) es.push_back(Elem{std::move(w)});
      return es;
    }()));
    if (h.is_normal()) {
      long idx = h.index();
      require(idx >= 0 && idx <= index_bound, Errc::ClosureExceedsBound,
              "normal closure index exceeds the bound");
      return h;
    }
  }
  fail(Errc::ClosureExceedsBound, "normal closure saturation did not stabilize");
}

Subgroup intersect_with(const Subgroup& h, const Subgroup& k, long index_cap) {
  require(h.parent().same_group(k.parent()), Errc::FamilyMismatch,
          "subgroups have different parents");
  const MarkedGroup& g = h.parent();
  if (g.family() == Family::Finite) {
    const auto& a = std::get<Subgroup::ElementSet>(h.rep()).idx;
    const auto& b = std::get<Subgroup::ElementSet>(k.rep()).idx;
    std::vector<int> out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return Subgroup::from_indices(g, std::move(out));
  }
  // Fiber product of the two graphs from the pair of base points.
  auto graph_of = [&](const Subgroup& s) -> std::pair<const std::vector<int>*, std::pair<int, int>> {
    if (const auto* t = std::get_if<CosetTable>(&s.rep()))
      return {&t->next, {t->rows(), 0}};
    const auto& cg = std::get<CoreGraph>(s.rep());
    return {&cg.next, {cg.rows(), cg.base}};
  };
  auto [na, pa] = graph_of(h);
  auto [nb, pb] = graph_of(k);
  int kk = g.rank();
  auto step = [&](const std::vector<int>& next, int v, int l) {
    return next[static_cast<std::size_t>(v) * (2 * kk) + l];
  };
  std::map<std::pair<int, int>, int> id;
  std::vector<std::pair<int, int>> order{{pa.second, pb.second}};
  id[order[0]] = 0;
  std::vector<int> next;
  for (std::size_t hh = 0; hh < order.size(); ++hh) {
    for (int l = 0; l < 2 * kk; ++l) {
      int x = step(*na, order[hh].first, l);
      int y = step(*nb, order[hh].second, l);
      if (x == -1 || y == -1) {
        next.push_back(-1);
        continue;
      }
      auto [it, fresh] = id.emplace(std::make_pair(x, y), static_cast<int>(order.size()));
      if (fresh) {
        require(static_cast<long>(order.size()) < index_cap, Errc::IndexOverflow,
                "fiber product exceeds the index cap");
        order.push_back({x, y});
      }
      next.push_back(it->second);
    }
  }
  // Rebuild through generator words so the result is a genuine core graph.
  std::vector<Word> words = words_from_graph(kk, next, 0);
  return Subgroup::generated_by(g, [&] {
    std::vector<Elem> es;
    for (Word& w : words) es.push_back(Elem{std::move(w)});
    return es;
  }());
}

Quotient quotient_by(const MarkedGroup& g, const Subgroup& n) {
  require(g.family() == Family::Finite, Errc::FamilyMismatch,
          "quotients need a finite parent");
  require(n.parent().same_group(g), Errc::FamilyMismatch, "subgroup of a different group");
  require(n.is_normal(), Errc::NotNormal, "subgroup is not normal");
  const auto& nidx = std::get<Subgroup::ElementSet>(n.rep()).idx;
  long order = g.order();
  std::vector<int> coset_of(static_cast<std::size_t>(order), -1);
  std::vector<int> rep_of;
  for (long e = 0; e < order; ++e) {
    if (coset_of[static_cast<std::size_t>(e)] != -1) continue;
    int q = static_cast<int>(rep_of.size());
    rep_of.push_back(static_cast<int>(e));
    for (int x : nidx)
      coset_of[static_cast<std::size_t>(
          g.elem_index(g.multiply(g.elem_at(static_cast<int>(e)), g.elem_at(x))))] = q;
  }
  long qn = static_cast<long>(rep_of.size());
  std::vector<int> table(static_cast<std::size_t>(qn) * qn);
  for (long a = 0; a < qn; ++a)
    for (long b = 0; b < qn; ++b)
      table[static_cast<std::size_t>(a) * qn + b] = coset_of[static_cast<std::size_t>(
          g.elem_index(g.multiply(g.elem_at(rep_of[static_cast<std::size_t>(a)]),
                                  g.elem_at(rep_of[static_cast<std::size_t>(b)]))))];
  std::vector<std::string> names;
  for (long q = 0; q < qn; ++q)
    names.push_back("[" + g.name(g.elem_at(rep_of[static_cast<std::size_t>(q)])) + "]");
  std::vector<int> gen_indices;
  std::vector<std::string> gen_labels;
  for (int i = 0; i < g.rank(); ++i) {
    gen_indices.push_back(coset_of[static_cast<std::size_t>(g.elem_index(g.generator(i)))]);
    gen_labels.push_back(g.letter_label(2 * i));
  }
  Quotient out{g, MarkedGroup::finite_from_table(std::move(table), std::move(names),
                                                 std::move(gen_indices), std::move(gen_labels)),
               std::move(coset_of), std::move(rep_of)};
  return out;
}

ProjectedSubgroup project_subgroup(const Subgroup& h, const Subgroup& n) {
  Quotient q = quotient_by(h.parent(), n);
  const auto& hidx = std::get<Subgroup::ElementSet>(h.rep()).idx;
  std::vector<int> img;
  for (int e : hidx) img.push_back(q.coset_of[static_cast<std::size_t>(e)]);
  std::sort(img.begin(), img.end());
  img.erase(std::unique(img.begin(), img.end()), img.end());
  Subgroup image = Subgroup::from_indices(q.group, std::move(img));
  return ProjectedSubgroup{std::move(q), std::move(image)};
}

Subgroup preimage_subgroup(const Quotient& q, const Subgroup& hbar) {
  require(hbar.parent().same_group(q.group), Errc::FamilyMismatch,
          "subgroup does not live in the quotient");
  const auto& bidx = std::get<Subgroup::ElementSet>(hbar.rep()).idx;
  std::set<int> quotient_set(bidx.begin(), bidx.end());
  std::vector<int> out;
  for (std::size_t e = 0; e < q.coset_of.size(); ++e)
    if (quotient_set.count(q.coset_of[e])) out.push_back(static_cast<int>(e));
  return Subgroup::from_indices(q.original, std::move(out));
}

std::vector<Subgroup> enumerate_subgroups(const MarkedGroup& g) {
  require(g.family() == Family::Finite, Errc::FamilyMismatch,
          "enumeration needs a finite parent");
  require(g.order() <= 200, Errc::GroupTooLarge, "enumeration capped at order 200");
  std::map<std::string, Subgroup> found;
  Subgroup triv = Subgroup::trivial(g);
  found.emplace(triv.canonical_key(), triv);
  std::vector<Subgroup> queue{triv};
  for (std::size_t h = 0; h < queue.size(); ++h) {
    const auto& cur = std::get<Subgroup::ElementSet>(queue[h].rep()).idx;
    for (long e = 0; e < g.order(); ++e) {
      if (std::binary_search(cur.begin(), cur.end(), static_cast<int>(e))) continue;
      std::vector<int> seed = cur;
      seed.push_back(static_cast<int>(e));
      Subgroup k(Subgroup::from_indices(g, close_indices(g, std::move(seed))));
      auto [it, fresh] = found.emplace(k.canonical_key(), k);
      if (fresh) queue.push_back(it->second);
    }
  }
  std::vector<Subgroup> out;
  for (auto& [key, sub] : found) out.push_back(sub);
  std::sort(out.begin(), out.end(), [](const Subgroup& a, const Subgroup& b) {
    const auto& ia = std::get<Subgroup::ElementSet>(a.rep()).idx;
    const auto& ib = std::get<Subgroup::ElementSet>(b.rep()).idx;
    if (ia.size() != ib.size()) return ia.size() < ib.size();
    return ia < ib;
  });
  return out;
}

bool amenable_flag(const Subgroup& h) {
  switch (h.parent().family()) {
    case Family::Finite: return true;
    case Family::Free: {
      if (h.parent().rank() == 1) return true;
      return h.core_rank() <= 1;
    }
    default: fail(Errc::Undecided, "no amenability rule for this family");
  }
}

Subgroup amenable_radical(const MarkedGroup& g) {
  switch (g.family()) {
    case Family::Finite: return Subgroup::whole(g);
    case Family::Free:
      return g.rank() == 1 ? Subgroup::whole(g) : Subgroup::trivial(g);
    default: fail(Errc::Unsupported, "no amenable radical rule for this family");
  }
}

// ---------------------------------------------------------------------------
// Serialization

std::string serialize_subgroup(const Subgroup& h) {
  std::ostringstream out;
  out << "subgroup v1\n";
  if (const auto* es = std::get_if<Subgroup::ElementSet>(&h.rep())) {
    out << "rep element-set\n";
    out << "count " << es->idx.size() << "\n";
    for (int i : es->idx) out << h.parent().name(h.parent().elem_at(i)) << "\n";
  } else if (const auto* t = std::get_if<CosetTable>(&h.rep())) {
    out << "rep coset-table\n";
    out << "rows " << t->rows() << " letters " << 2 * t->k << "\n";
    for (int v = 0; v < t->rows(); ++v) {
      for (int l = 0; l < 2 * t->k; ++l) {
        if (l) out << ' ';
        out << t->step(v, l);
      }
      out << "\n";
    }
  } else {
    out << "rep core-graph\n";
    std::vector<Word> words = h.generator_words();
    out << "words " << words.size() << "\n";
    for (const Word& w : words) out << h.parent().name(Elem{w}) << "\n";
  }
  out << "end\n";
  return out.str();
}

Subgroup parse_subgroup(const MarkedGroup& parent, std::istream& in) {
  std::string line;
  auto next_line = [&]() {
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) return true;
    }
    return false;
  };
  require(next_line() && line == "subgroup v1", Errc::ParseError,
          "expected 'subgroup v1' header");
  require(next_line() && line.rfind("rep ", 0) == 0, Errc::ParseError, "expected rep tag");
  std::string tag = line.substr(4);
  if (tag == "element-set") {
    require(next_line() && line.rfind("count ", 0) == 0, Errc::ParseError, "expected count");
    long count = std::stol(line.substr(6));
    std::vector<Elem> elems;
    for (long i = 0; i < count; ++i) {
      require(next_line(), Errc::ParseError, "truncated element list");
      elems.push_back(parent.parse_elem(line));
    }
    require(next_line() && line == "end", Errc::ParseError, "expected end");
    return Subgroup::from_elements(parent, elems);
  }
  if (tag == "coset-table") {
    require(next_line() && line.rfind("rows ", 0) == 0, Errc::ParseError, "expected rows");
    std::istringstream hs(line);
    std::string w1, w2;
    int rows = 0, letters = 0;
    hs >> w1 >> rows >> w2 >> letters;
    require(!hs.fail() && w2 == "letters", Errc::ParseError, "bad coset-table header");
    require(letters == 2 * parent.rank(), Errc::ParseError, "letter count mismatch");
    CosetTable t;
    t.k = parent.rank();
    for (int v = 0; v < rows; ++v) {
      require(next_line(), Errc::ParseError, "truncated coset table");
      std::istringstream rs(line);
      for (int l = 0; l < letters; ++l) {
        int x = -1;
        rs >> x;
        require(!rs.fail(), Errc::ParseError, "bad coset table row");
        t.next.push_back(x);
      }
    }
    require(next_line() && line == "end", Errc::ParseError, "expected end");
    return Subgroup::from_coset_table(parent, std::move(t));
  }
  if (tag == "core-graph") {
    require(next_line() && line.rfind("words ", 0) == 0, Errc::ParseError, "expected words");
    long count = std::stol(line.substr(6));
    std::vector<Elem> gens;
    for (long i = 0; i < count; ++i) {
      require(next_line(), Errc::ParseError, "truncated word list");
      gens.push_back(parent.parse_elem(line));
    }
    require(next_line() && line == "end", Errc::ParseError, "expected end");
    return Subgroup::generated_by(parent, gens);
  }
  fail(Errc::ParseError, "unknown representation tag " + tag);
}

Subgroup parse_subgroup(const MarkedGroup& parent, const std::string& text) {
  std::istringstream in(text);
  return parse_subgroup(parent, in);
}

}  // namespace irslab
