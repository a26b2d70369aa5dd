#include "doctest.h"

#include "streamline/assertions/linear.hpp"
#include "formula_gen.hpp"

#include <algorithm>
#include <random>

using namespace streamline;

namespace {

bool holds(const std::string &text, const RegFile &r, const HeapView &h, const Witness &w) {
  return eval_formula(r, h, w, parse_formula(text));
}

} // namespace

TEST_CASE("buffer fact holds when the buffer caches the head element") {
  MapHeap h;
  h.set("a", 3, 42);
  RegFile r{{"b", 42}};
  Witness w{{"a", {3, 4}}};
  CHECK(holds("b == a[hd(idx(a))]", r, h, w));
  r["b"] = 41;
  CHECK_FALSE(holds("b == a[hd(idx(a))]", r, h, w));
}

TEST_CASE("head of the empty sequence makes the atom false") {
  MapHeap h;
  RegFile r{{"x", 0}};
  Witness w;
  CHECK_FALSE(holds("hd(idx(a)) == x", r, h, w));
  CHECK_FALSE(holds("hd(idx(a)) != x", r, h, w) == false);
  CHECK_FALSE(holds("x == 1 / 0", r, h, w));
  CHECK_FALSE(holds("x == a[0]", r, h, w));
}

TEST_CASE("range membership examples") {
  MapHeap h;
  Witness w;
  CHECK(holds("x in [0, 6; 2]", {{"x", 4}}, h, w));
  CHECK_FALSE(holds("x in [0, 6; 2]", {{"x", 3}}, h, w));
  CHECK_FALSE(holds("x in [0, 6; 2]", {{"x", 8}}, h, w));
  CHECK(holds("x in [6, 0; -3]", {{"x", 3}}, h, w));
  for (int v = -5; v <= 10; ++v) CHECK(holds("x notin [5, 3; 1]", {{"x", v}}, h, w));
  CHECK(holds("idx(a) == [1, 3; 1]", {}, h, {{"a", {1, 2, 3}}}));
  CHECK_FALSE(holds("idx(a) == [1, 3; 1]", {}, h, {{"a", {1, 2}}}));
  CHECK_FALSE(holds("x in [0, 6; 0]", {{"x", 0}}, h, w));
}

TEST_CASE("sequence operators") {
  MapHeap h;
  Witness w{{"a", {5, 6, 7}}};
  CHECK(holds("tl(idx(a)) == [6, 7; 1]", {}, h, w));
  CHECK(holds("cons(4, idx(a)) == [4, 7; 1]", {}, h, w));
  CHECK(holds("snoc(idx(a), 8) == [5, 8; 1]", {}, h, w));
  CHECK(holds("hd(tl(tl(idx(a)))) == 7", {}, h, w));
  CHECK_FALSE(holds("tl(nil) == nil", {}, h, w));
  CHECK(holds("a{1 -> 9}[1] == 9", {}, h, w));
  h.set("a", 2, 3);
  CHECK(holds("a{1 -> 9}[2] == 3", {}, h, w));
}

TEST_CASE("restricted assertion for the filter loop head") {
  // Loop head after buffering in[x] into b0: in is pending from x+1 on.
  std::string text = "idx(in) == [x + 1, N - 1; 1] && idx(out) == [0, x - 1; 1] && "
                     "b0 == in[x] && 0 <= x && x <= N - 1";
  Form f = parse_formula(text);
  auto ra = restricted_from_formula(f, {"b0"});
  REQUIRE(ra);
  CHECK(ra->ranges.size() == 2);
  CHECK(ra->ranges.at("in").lo == LinExpr::var("x") + LinExpr(1));
  CHECK(ra->buffer_facts.size() == 1);
  CHECK(ra->buffer_facts[0].arr == "in");
  CHECK(ra->loop_facts.size() == 2);
  CHECK(str(normalize(restricted_to_formula(*ra))) == str(normalize(f)));

  MapHeap h;
  for (int i = 0; i < 4; ++i) h.set("in", i, i * 10);
  RegFile r{{"x", 1}, {"N", 4}, {"b0", 10}};
  Witness w{{"in", {2, 3}}, {"out", {0}}};
  CHECK(eval_formula(r, h, w, f));
  w["out"] = {};
  CHECK_FALSE(eval_formula(r, h, w, f));

  CHECK_FALSE(restricted_from_formula(parse_formula("x == in[0] && x <= 1"), {}));
}

TEST_CASE("printer and parser agree") {
  for (auto s : {"x + 1 <= y", "a{i -> v}[j] == 3", "x notin [0, N - 1; 2]",
                 "!(x == 1 && y == 2)", "x - (y - z) == 0", "(x + y) * 2 == z",
                 "lt(x, y) == 1", "?c0 * N <= ?c1", "x == -3", "in[x + 1] == y"}) {
    Form f = parse_formula(s);
    CHECK(str(f) == s);
  }
  CHECK(str(parse_formula("x > y")) == "y < x");
  CHECK(str(parse_formula("x >= y")) == "y <= x");
  CHECK(str(parse_formula("buf(b) = a[e]")) == "b == a[e]");
  CHECK_THROWS_AS(parse_formula("x == "), Error);
  CHECK_THROWS_AS(parse_formula("a{1 -> 2} == 1"), Error);
}

TEST_CASE("normalize canonical form") {
  CHECK(str(normalize(parse_formula("true && (y <= 2 + 1 && x == x) && y <= 3 && !(!(x == x))"))) ==
        "x == x && y <= 3");
  CHECK(str(normalize(parse_formula("z == 1 + x - 2 + 2 * x"))) == "z == 3 * x - 1");
  CHECK(str(normalize(parse_formula("true && true"))) == "true");
  CHECK(str(normalize(parse_formula("b + a == 7 / 2"))) == "a + b == 3");
}

TEST_CASE("linear expressions") {
  LinExpr e = LinExpr::var("x", 2) + LinExpr::var("y", -1) + LinExpr(5);
  CHECK(e.str() == "2 * x - y + 5");
  CHECK((e - e).is_const());
  CHECK(e.subst("x", LinExpr::var("y")).str() == "y + 5");
  CHECK(*e.eval({{"x", 1}, {"y", 3}}) == 4);
  CHECK_FALSE(e.eval({{"x", 1}}));
  CHECK(linearize(parse_term("3 * (x - 1) + x")) == LinExpr::var("x", 4) + LinExpr(-3));
  CHECK_FALSE(linearize(parse_term("x * y")));
  CHECK_FALSE(linearize(parse_term("x / 2")));
}

TEST_CASE("range_to_formula agrees with enumeration") {
  MapHeap h;
  Witness w;
  int checked = 0;
  for (int lo = -6; lo <= 6; ++lo)
    for (int hi = -6; hi <= 6; ++hi)
      for (int st : {-3, -2, -1, 1, 2, 3}) {
        IndexRange r{LinExpr(lo), LinExpr(hi), LinExpr(st)};
        auto elems = *range_denotation(lo, hi, st);
        REQUIRE(elems.size() <= 64);
        Form in = range_to_formula(T::var("x"), r, Polarity::In);
        Form out = range_to_formula(T::var("x"), r, Polarity::NotIn);
        for (int x = -9; x <= 9; ++x) {
          bool member = std::find(elems.begin(), elems.end(), Int(x)) != elems.end();
          RegFile regs{{"x", x}};
          CHECK(eval_formula(regs, h, w, in) == member);
          CHECK(eval_formula(regs, h, w, out) == !member);
          CHECK(eval_formula(regs, h, w, T::mem(T::var("x"), r.term())) == member);
          ++checked;
        }
      }
  CHECK(checked > 10000);
  CHECK_THROWS_AS(range_to_formula(T::var("x"), {LinExpr(0), LinExpr(1), LinExpr::var("s")},
                                   Polarity::In),
                  Error);
}

// ---- random formulas ----

using streamline::testing::FGen;

TEST_CASE("text round trip on random formulas") {
  for (uint64_t s = 0; s < 1000; ++s) {
    FGen g(s);
    Form f = g.form(3);
    std::string t = str(f);
    Form back = parse_formula(t);
    if (!equal(f, back)) MESSAGE(t);
    REQUIRE(equal(f, back));
  }
}

TEST_CASE("normalize preserves meaning") {
  for (uint64_t s = 0; s < 1000; ++s) {
    FGen g(s);
    Form f = g.form(3);
    Form n = normalize(f);
    CHECK(str(normalize(n)) == str(n));
    RegFile r = g.regs();
    MapHeap h = g.heap();
    Witness w = g.wit();
    CHECK(eval_formula(r, h, w, f) == eval_formula(r, h, w, n));
  }
}

TEST_CASE("substituting an integer term matches updating the register") {
  for (uint64_t s = 0; s < 1000; ++s) {
    FGen g(s);
    Form f = g.form(3);
    IntT e = g.term(2);
    RegFile r = g.regs();
    MapHeap h = g.heap();
    Witness w = g.wit();
    EvalCtx c{r, h, w};
    auto v = eval_int(c, e);
    if (!v) continue;
    Subst sb;
    sb.ints["x"] = e;
    RegFile r2 = r;
    r2["x"] = *v;
    CHECK(eval_formula(r, h, w, subst(f, sb)) == eval_formula(r2, h, w, f));
  }
}

TEST_CASE("substituting an update matches writing the heap") {
  for (uint64_t s = 0; s < 1000; ++s) {
    FGen g(s);
    Form f = g.form(3);
    IntT i = g.term(1), v = g.term(1);
    RegFile r = g.regs();
    MapHeap h = g.heap();
    Witness w = g.wit();
    EvalCtx c{r, h, w};
    auto iv = eval_int(c, i);
    auto vv = eval_int(c, v);
    if (!iv || !vv) continue;
    Subst sb;
    sb.arrs["a"] = T::upd(T::avar("a"), i, v);
    MapHeap h2 = h;
    h2.set("a", *iv, *vv);
    CHECK(eval_formula(r, h, w, subst(f, sb)) == eval_formula(r, h2, w, f));
  }
}

TEST_CASE("substituting a sequence matches replacing the witness") {
  for (uint64_t s = 0; s < 1000; ++s) {
    FGen g(s);
    Form f = g.form(3);
    RegFile r = g.regs();
    MapHeap h = g.heap();
    Witness w = g.wit();
    EvalCtx c{r, h, w};
    SeqT q = g.pick(2) ? T::tl(T::svar("a")) : T::snoc(T::svar("a"), g.term(1));
    auto qv = eval_seq(c, q);
    if (!qv) continue;
    Subst sb;
    sb.seqs["a"] = q;
    Witness w2 = w;
    w2["a"] = *qv;
    CHECK(eval_formula(r, h, w, subst(f, sb)) == eval_formula(r, h, w2, f));
  }
}

TEST_CASE("seeded heap is deterministic and honours writes") {
  SeededHeap h1(3), h2(3), h3(4);
  int differ = 0;
  for (int i = 0; i < 50; ++i) {
    CHECK(*h1.get("a", i) == *h2.get("a", i));
    differ += *h1.get("a", i) != *h3.get("a", i);
  }
  CHECK(differ > 40);
  h1.set("a", 7, 123);
  CHECK(*h1.get("a", 7) == 123);
}
