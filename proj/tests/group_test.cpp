#include "irslab/group.hpp"

#include <fstream>
#include <set>

#include "doctest.h"
#include "irslab/rational.hpp"

using namespace irslab;

TEST_CASE("free group balls follow the closed-form count") {
  MarkedGroup f2 = MarkedGroup::free_group(2);
  // 1 + sum 2k(2k-1)^(r-1)
  CHECK(f2.ball(0).size() == 1);
  CHECK(f2.ball(1).size() == 5);
  CHECK(f2.ball(2).size() == 17);
  CHECK(f2.ball(3).size() == 53);
  CHECK(f2.ball(4).size() == 161);
  CHECK(free_ball_size(2, 8, MarkedGroup::kBallCap) == 13121);

  auto b1 = f2.ball(1);
  CHECK(f2.name(b1[0]) == "e");
  CHECK(f2.name(b1[1]) == "a");
  CHECK(f2.name(b1[2]) == "a'");
  CHECK(f2.name(b1[3]) == "b");
  CHECK(f2.name(b1[4]) == "b'");
}

TEST_CASE("free group ball cap raises BallTooLarge") {
  MarkedGroup f2 = MarkedGroup::free_group(2);
  CHECK_THROWS_AS(f2.ball(3, 10), Error);
  try {
    f2.ball(3, 10);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::BallTooLarge);
  }
}

TEST_CASE("free words reduce and parse") {
  MarkedGroup f2 = MarkedGroup::free_group(2);
  Elem w = f2.parse_elem("aba'");
  CHECK(f2.name(w) == "aba'");
  CHECK(f2.name(f2.multiply(w, f2.parse_elem("ab'a'"))) == "e");
  CHECK(f2.name(f2.multiply(w, f2.parse_elem("aab'a'"))) == "abab'a'");
  Elem prod = f2.multiply(f2.parse_elem("ab"), f2.parse_elem("b'a"));
  CHECK(f2.name(prod) == "aa");
  CHECK(f2.is_identity(f2.multiply(w, f2.inverse(w))));
  CHECK(f2.name(f2.parse_elem("aa'")) == "e");
}

TEST_CASE("finite groups from permutations have correct orders") {
  CHECK(MarkedGroup::symmetric_group(3).order() == 6);
  CHECK(MarkedGroup::symmetric_group(4).order() == 24);
  CHECK(MarkedGroup::alternating_group(4).order() == 12);
  CHECK(MarkedGroup::dihedral_group(4).order() == 8);
  CHECK(MarkedGroup::cyclic_group(12).order() == 12);
  CHECK(MarkedGroup::elementary_abelian_2(2).order() == 4);
  CHECK(MarkedGroup::elementary_abelian_2(3).order() == 8);
  CHECK(MarkedGroup::wreath_c2_cyclic(2).order() == 8);
  CHECK(MarkedGroup::wreath_c2_cyclic(3).order() == 24);
}

TEST_CASE("group axioms hold on sampled triples") {
  for (MarkedGroup g : {MarkedGroup::symmetric_group(4), MarkedGroup::dihedral_group(6),
                        MarkedGroup::wreath_c2_cyclic(3)}) {
    long n = g.order();
    for (long a = 0; a < n; a += 3)
      for (long b = 0; b < n; b += 5) {
        Elem x = g.elem_at(static_cast<int>(a)), y = g.elem_at(static_cast<int>(b));
        CHECK(g.multiply(g.multiply(x, y), g.inverse(y)) == x);
      }
  }
}

TEST_CASE("cycle notation names round-trip") {
  MarkedGroup s4 = MarkedGroup::symmetric_group(4);
  std::set<std::string> names;
  for (long i = 0; i < s4.order(); ++i) names.insert(s4.name(s4.elem_at(static_cast<int>(i))));
  CHECK(names.size() == 24);
  CHECK(names.count("e") == 1);
  CHECK(names.count("(0 1)") == 1);
  CHECK(names.count("(0 1)(2 3)") == 1);
  CHECK(names.count("(0 1 2 3)") == 1);
  Elem g = s4.parse_elem("(0 1 2)");
  CHECK(s4.name(g) == "(0 1 2)");
  CHECK(s4.name(s4.multiply(g, g)) == "(0 2 1)");
  CHECK(s4.is_identity(s4.multiply(g, s4.multiply(g, g))));
}

TEST_CASE("finite ball respects word length") {
  MarkedGroup s3 = MarkedGroup::symmetric_group(3);
  CHECK(s3.ball(0).size() == 1);
  // letters: s, s', c, c' with s=(0 1), c=(0 1 2): radius 1 reaches s, c, c'
  CHECK(s3.ball(1).size() == 4);
  CHECK(s3.ball(2).size() == 6);
}

TEST_CASE("homomorphism evaluation on free sources") {
  MarkedGroup f2 = MarkedGroup::free_group(2);
  MarkedGroup z2 = MarkedGroup::cyclic_group(2);
  std::vector<Elem> images{z2.parse_elem("1"), z2.parse_elem("0")};
  CHECK(z2.is_identity(evaluate_hom(f2, z2, images, f2.parse_elem("b"))));
  CHECK(!z2.is_identity(evaluate_hom(f2, z2, images, f2.parse_elem("a"))));
  CHECK(z2.is_identity(evaluate_hom(f2, z2, images, f2.parse_elem("abab'"))));

  std::map<std::string, Elem> by_label{{"a", z2.parse_elem("1")}, {"b", z2.parse_elem("0")}};
  CHECK(!z2.is_identity(evaluate_hom(f2, z2, by_label, f2.parse_elem("ab"))));
  by_label["a'"] = z2.parse_elem("0");  // wrong: must be inverse of image(a)
  CHECK_THROWS_AS(evaluate_hom(f2, z2, by_label, f2.parse_elem("a")), Error);

  MarkedGroup s3 = MarkedGroup::symmetric_group(3);
  CHECK_THROWS_AS(evaluate_hom(s3, z2, images, s3.identity()), Error);
}

TEST_CASE("multiplication table loads from csv triples") {
  std::string path = "ztable_test.csv";
  {
    std::ofstream out(path);
    out << "i,j,k\n";
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) out << i << "," << j << "," << (i + j) % 4 << "\n";
  }
  MarkedGroup z4 = MarkedGroup::finite_from_csv(path, {1}, {"t"});
  CHECK(z4.order() == 4);
  CHECK(z4.name(z4.multiply(z4.elem_at(3), z4.elem_at(2))) == "g1");

  {
    std::ofstream out(path);
    out << "i,j,k\n0,0,0\n0,1,1\n1,0,1\n";  // missing 1,1
  }
  try {
    MarkedGroup::finite_from_csv(path, {1}, {"t"});
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::IncompleteTable);
  }
}

TEST_CASE("non-generating marked sets are rejected") {
  std::vector<int> table(16);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) table[static_cast<std::size_t>(i) * 4 + j] = (i + j) % 4;
  CHECK_THROWS_AS(MarkedGroup::finite_from_table(table, {}, {2}, {"u"}), Error);
  CHECK_NOTHROW(MarkedGroup::finite_from_table(table, {}, {1}, {"t"}));
}

TEST_CASE("tree group composes portraits level by level") {
  MarkedGroup t = MarkedGroup::tree_group(2, 2);
  CHECK(t.tree_nodes() == 3);
  CHECK(t.order() == 8);
  Elem root = t.parse_elem("10.01.01");
  CHECK(t.is_identity(t.multiply(root, root)));
  // Root swap sends node 1 (left child) to node 2 (right child).
  CHECK(t.tree_node_image(root, 1) == 2);
  CHECK(t.tree_node_image(root, 0) == 0);
  // Swap below the left child, conjugated by the root swap, acts below the right child.
  Elem left = t.parse_elem("01.10.01");
  Elem moved = t.conjugate(root, left);
  CHECK(t.name(moved) == "01.01.10");
  // Composition applies the right factor first.
  CHECK(t.name(t.multiply(root, left)) == "10.10.01");
  CHECK(t.name(t.multiply(left, root)) == "10.01.10");
  CHECK(t.multiply(root, left) != t.multiply(left, root));
}

TEST_CASE("tree group ball generates the whole truncated group") {
  MarkedGroup t = MarkedGroup::tree_group(2, 2);
  CHECK(t.ball(6).size() == 8);
  MarkedGroup t3 = MarkedGroup::tree_group(3, 1);
  CHECK(t3.order() == 6);
  CHECK(t3.ball(3).size() == 6);
}

TEST_CASE("rationals parse from fraction and decimal forms") {
  CHECK(rat_parse("3/4") == Rat(3, 4));
  CHECK(rat_parse("0.25") == Rat(1, 4));
  CHECK(rat_parse("-2") == Rat(-2));
  CHECK(rat_str(rat_parse("6/8")) == "3/4");
  CHECK_THROWS_AS(rat_parse("x"), Error);
}
