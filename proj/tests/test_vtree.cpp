#include "support.hpp"

#include "wmcvar/error.hpp"
#include "wmcvar/vtree.hpp"

#include <doctest.h>

using namespace wmcvar;

TEST_SUITE("vtree") {

TEST_CASE("single leaf") {
  auto vt = parse_vtree("vtree 1\nL 0 1\n");
  CHECK(vt.num_vars() == 1);
  CHECK(vt.num_vnodes() == 1);
  CHECK(vt.is_leaf(vt.root()));
  CHECK(vt.var(vt.root()) == 1);
  CHECK(vt.lca(vt.root(), kBottom) == vt.root());
}

TEST_CASE("two-variable balanced vtree") {
  auto vt = parse_vtree("vtree 3\nL 0 1\nL 1 2\nI 2 0 1");
  CHECK(vt.num_vars() == 2);
  VnodeId r = vt.root();
  CHECK(vt.file_id(r) == 2);
  CHECK(vt.scope(r).count() == 2);
  CHECK(vt.lca(vt.leaf_of(1), vt.leaf_of(2)) == r);
  CHECK(vt.depth(r) == 0);
  CHECK(vt.depth(vt.leaf_of(2)) == 1);
}

TEST_CASE("parse errors") {
  CHECK_THROWS_AS(parse_vtree("vtree 3\nL 0 1\nL 1 1\nI 2 0 1"), ParseError);
  CHECK_THROWS_WITH_AS(parse_vtree("vtree 3\nL 0 1\nL 1 2\nI 2 0 7"),
                       doctest::Contains("line 4"), ParseError);
  CHECK_THROWS_AS(parse_vtree("vtree 4\nL 0 1\nL 1 2\nI 2 0 1\nL 3 3"),
                  ParseError);
  CHECK_THROWS_AS(parse_vtree("vtre 1\nL 0 1"), ParseError);
  CHECK_THROWS_AS(parse_vtree("vtree 2\nL 0 1"), ParseError);
  CHECK_THROWS_AS(parse_vtree("vtree 1\nL 0 x"), ParseError);
  CHECK_THROWS_AS(parse_vtree("vtree 2\nL 0 1\nL 0 2"), ParseError);
  // variable ids must be dense
  CHECK_THROWS_AS(parse_vtree("vtree 3\nL 0 1\nL 1 3\nI 2 0 1"), ParseError);
}

TEST_CASE("comments and blank lines") {
  auto vt = parse_vtree("c hello\n\nvtree 3\nc mid\nL 0 1\nL 1 2\nI 2 0 1\n");
  CHECK(vt.num_vars() == 2);
}

TEST_CASE("lca on four-leaf balanced vtree") {
  auto vt = testing::three_model_vtree();
  VnodeId a = vt->leaf_of(1), b = vt->leaf_of(2), c = vt->leaf_of(3),
          d = vt->leaf_of(4);
  CHECK(vt->lca(a, d) == vt->root());
  CHECK(vt->lca(a, b) == vt->parent(a));
  CHECK(vt->lca(c, d) == vt->parent(d));
  CHECK(vt->lca(a, a) == a);
  CHECK(vt->lca(kBottom, c) == c);
  CHECK(vt->lca(c, kBottom) == c);
  CHECK(vt->lca(kBottom, kBottom) == kBottom);
  CHECK(vt->is_ancestor_or_self(vt->root(), a));
  CHECK(vt->is_ancestor_or_self(a, kBottom));
  CHECK_FALSE(vt->is_ancestor_or_self(a, b));
}

TEST_CASE("lca agrees with ancestor-set intersection") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    auto vt = testing::random_vtree(1 + trial % 13, rng);
    const VnodeId m = static_cast<VnodeId>(vt.num_vnodes());
    for (VnodeId v = 1; v <= m; ++v)
      for (VnodeId w = 1; w <= m; ++w) {
        std::vector<VnodeId> anc;
        for (VnodeId x = v; x != kBottom; x = vt.parent(x))
          anc.push_back(x);
        VnodeId expect = kBottom;
        for (VnodeId y = w; y != kBottom && expect == kBottom;
             y = vt.parent(y))
          if (std::find(anc.begin(), anc.end(), y) != anc.end())
            expect = y;
        REQUIRE(vt.lca(v, w) == expect);
        CHECK(vt.is_ancestor_or_self(v, w) ==
              vt.scope(w).is_subset_of(vt.scope(v)));
      }
  }
}

TEST_CASE("scopes are disjoint unions") {
  std::mt19937_64 rng(11);
  auto vt = testing::random_vtree(9, rng);
  for (VnodeId v : vt.postorder()) {
    if (vt.is_leaf(v)) {
      CHECK(vt.scope(v).count() == 1);
      continue;
    }
    CHECK_FALSE(vt.scope(vt.left(v)).intersects(vt.scope(vt.right(v))));
    CHECK((vt.scope(vt.left(v)) | vt.scope(vt.right(v))) == vt.scope(v));
  }
  CHECK(vt.postorder().back() == vt.root());
}

TEST_CASE("print then parse round trip") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    auto vt = testing::random_vtree(2 + trial, rng);
    auto text = print_vtree(vt);
    auto back = parse_vtree(text);
    CHECK(back.same_structure(vt));
    CHECK(print_vtree(back) == text);
  }
}

TEST_CASE("shape constructors") {
  std::vector<Var> order{3, 1, 2, 4};
  auto rl = Vtree::right_linear(order);
  CHECK(rl.var(rl.left(rl.root())) == 3);
  CHECK(rl.depth(rl.leaf_of(4)) == 3);
  auto ll = Vtree::left_linear(order);
  CHECK(ll.var(ll.right(ll.root())) == 4);
  auto bal = Vtree::balanced(order);
  CHECK(bal.depth(bal.leaf_of(3)) == 2);
  CHECK(bal.num_vnodes() == 7);
}

} // TEST_SUITE
