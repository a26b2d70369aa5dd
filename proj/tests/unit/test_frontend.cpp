#include "doctest.h"

#include "streamline/frontend/parser.hpp"
#include "streamline/frontend/typecheck.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>

using namespace streamline;

static std::string slurp(const std::string &path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST_CASE("read statement parses to ReadArr") {
  Program p = parse_program("int x, i; rarr a; x := a[i];");
  auto &items = seq_items(p.main);
  REQUIRE(items.size() == 1);
  auto r = items[0]->as<ReadArr>();
  REQUIRE(r);
  CHECK(r->x == "x");
  CHECK(r->a == "a");
  CHECK(r->idx == Expr::var("i"));
}

TEST_CASE("filter example parses to the expected shape") {
  Program p = parse_program(slurp(STREAMLINE_CORPUS_DIR "/filter.hdsl"));
  auto &top = seq_items(p.main);
  REQUIRE(top.size() == 2);
  auto host = top[0]->as<For>();
  REQUIRE(host);
  CHECK(host->init == Expr::constant(0));
  CHECK(host->bound == Expr::var("N"));
  auto k = top[1]->as<Kernel>();
  REQUIRE(k);
  auto &kb = seq_items(k->body);
  REQUIRE(kb.size() == 1);
  auto loop = kb[0]->as<For>();
  REQUIRE(loop);
  CHECK(loop->x == "x");
  CHECK(loop->init == Expr::constant(0));
  CHECK(loop->bound == Expr::bin(BinOp::Sub, Atom::var("N"), Atom::lit(1)));
  CHECK(loop->step == 1);
  auto &body = seq_items(loop->body);
  REQUIRE(body.size() == 5);
  auto r0 = body[0]->as<ReadArr>();
  auto r1 = body[1]->as<ReadArr>();
  REQUIRE((r0 && r1));
  CHECK(r0->idx == Expr::var("x"));
  CHECK(r1->idx == Expr::bin(BinOp::Add, Atom::var("x"), Atom::lit(1)));
  CHECK(body[2]->as<Assign>()->e == Expr::bin(BinOp::Add, Atom::var("y0"), Atom::var("y1")));
  CHECK(body[3]->as<Assign>()->e == Expr::bin(BinOp::Div, Atom::var("z0"), Atom::lit(2)));
  auto w = body[4]->as<WriteArr>();
  REQUIRE(w);
  CHECK(w->a == "out");
  CHECK(w->x == "z1");
  // no temporaries were needed
  CHECK(p.decls.size() == 8);
}

TEST_CASE("nested kernel is rejected") {
  CHECK_THROWS_AS(parse_program("kernel { kernel { } }"), ParseError);
}

TEST_CASE("syntax errors carry line and column") {
  try {
    parse_program("int x;\nx = ;\n");
    FAIL("expected error");
  } catch (const ParseError &e) {
    CHECK(e.loc.line == 2);
    CHECK(e.loc.col == 5);
  }
  CHECK_THROWS_AS(parse_program("int for;"), ParseError);
  CHECK_THROWS_AS(parse_program("int x; x = 1"), ParseError);
}

TEST_CASE("nested expressions are lowered through temporaries") {
  Program p = parse_program("int z; rarr in; int x; z = (in[x] + in[x + 1]) / 2;");
  auto &items = seq_items(p.main);
  REQUIRE(items.size() == 4);
  CHECK(items[0]->is<ReadArr>());
  CHECK(items[1]->is<ReadArr>());
  CHECK(items[2]->is<Assign>());
  auto last = items[3]->as<Assign>();
  REQUIRE(last);
  CHECK(last->x == "z");
  CHECK(last->e.op == BinOp::Div);
  // temporaries are declared after user declarations
  CHECK(p.decls.back().name.rfind("__t", 0) == 0);
  // printing and reparsing introduces nothing new
  Program q = parse_program(print_program(p));
  CHECK(program_equal(p, q));
}

TEST_CASE("comparison sugar") {
  Program p = parse_program("int a, b, c; c = a > b; c = a >= b; c = a != b;");
  auto &it = seq_items(p.main);
  REQUIRE(it.size() == 4);
  CHECK(it[0]->as<Assign>()->e == Expr::bin(BinOp::Lt, Atom::var("b"), Atom::var("a")));
  CHECK(it[1]->as<Assign>()->e == Expr::bin(BinOp::Le, Atom::var("b"), Atom::var("a")));
  CHECK(it[3]->as<Assign>()->e.op == BinOp::Eq);
}

TEST_CASE("inline: no calls is identity") {
  Program p = parse_program(slurp(STREAMLINE_CORPUS_DIR "/filter.hdsl"));
  Program q = inline_calls(p);
  CHECK(program_equal(p, q));
}

TEST_CASE("inline: locals are renamed per call") {
  Program p = parse_program("void f() { int y; y = 1; } f(); f();");
  Program q = inline_calls(p);
  auto &items = seq_items(q.main);
  REQUIRE(items.size() == 2);
  auto a0 = items[0]->as<Assign>();
  auto a1 = items[1]->as<Assign>();
  REQUIRE((a0 && a1));
  CHECK(a0->x != a1->x);
  CHECK(a0->x != "y");
  CHECK(q.has_decl(a0->x));
  CHECK(q.has_decl(a1->x));
  CHECK(q.funcs.empty());
}

TEST_CASE("inline: recursion is an error") {
  CHECK_THROWS_AS(inline_calls(parse_program("void f() { g(); } void g() { f(); } f();")), Error);
  CHECK_THROWS_AS(inline_calls(parse_program("void f() { f(); }")), Error);
  CHECK_THROWS_AS(inline_calls(parse_program("h();")), Error);
}

TEST_CASE("typecheck: filter environment") {
  auto c = load_program(slurp(STREAMLINE_CORPUS_DIR "/filter.hdsl"));
  CHECK(c.env.is("in", Ty::RARR));
  CHECK(c.env.is("out", Ty::WARR));
  for (auto v : {"x", "y0", "y1", "z0", "z1", "N"}) CHECK(c.env.is(v, Ty::INT));
  CHECK(c.env.is_param("N"));
  CHECK(c.env.params.at("N").min == Int(1));
}

TEST_CASE("typecheck: errors") {
  auto bad = [](const char *src) {
    try {
      load_program(src);
    } catch (const TypeError &e) {
      return e.diagnostics;
    }
    return std::vector<std::string>{};
  };
  CHECK(!bad("int x; x = y;").empty());
  CHECK(!bad("arr a; int x; kernel { x = a[0]; a[1] = x; }").empty());
  CHECK(!bad("rarr a; int x; kernel { a[0] = x; }").empty());
  CHECK(!bad("warr a; int x; kernel { x = a[0]; }").empty());
  CHECK(!bad("rarr a; int x; x = a[0];").empty()); // host sees a as WARR
  CHECK(!bad("buf b; int x; x = b + 1;").empty());
  CHECK(!bad("param N; N = 1;").empty());
  CHECK(!bad("int x, i; for (i = 0; i != 3; i += 1) { i = 2; }").empty());
  CHECK(!bad("int i; for (i = 0; i != i; i += 1) { }").empty());
  CHECK(bad("buf b; int x; x = b;").empty());
}

TEST_CASE("typecheck: empty program") {
  auto c = load_program("");
  CHECK(c.env.bindings.empty());
  CHECK(c.env.params.empty());
}

TEST_CASE("typecheck: inferred orientation and flip") {
  auto c = load_program("arr a, b; int x; a[0] = x; kernel { x = a[0]; b[0] = x; } x = b[0];");
  CHECK(c.env.is("a", Ty::RARR));
  CHECK(c.env.is("b", Ty::WARR));
  TypeEnv f = flip(c.env);
  CHECK(f.is("a", Ty::WARR));
  CHECK(f.is("b", Ty::RARR));
  CHECK(f.is("x", Ty::INT));
  CHECK(flip(f) == c.env);
}

TEST_CASE("typecheck is order independent") {
  std::string base = slurp(STREAMLINE_CORPUS_DIR "/filter.hdsl");
  auto c = load_program(base);
  Program p = c.prog;
  std::mt19937 rng(7);
  for (int i = 0; i < 10; ++i) {
    std::shuffle(p.decls.begin(), p.decls.end(), rng);
    CHECK(typecheck(p) == c.env);
  }
}

// ---- random AST round trip ----

namespace {

struct Gen {
  std::mt19937_64 rng;
  explicit Gen(uint64_t s) : rng(s) {}
  int pick(int n) { return static_cast<int>(rng() % n); }
  std::string scalar() {
    static const char *v[] = {"x", "y", "z", "w", "N"};
    return v[pick(5)];
  }
  std::string target() {
    static const char *v[] = {"x", "y", "z", "w"};
    return v[pick(4)];
  }
  std::string array() { return pick(2) ? "a" : "b"; }
  Atom atom() {
    if (pick(3) == 0) return Atom::lit(Int(pick(21) - 10));
    return Atom::var(scalar());
  }
  Expr expr() {
    switch (pick(3)) {
    case 0: return Expr::constant(Int(pick(41) - 20));
    case 1: return Expr::var(scalar());
    default: return Expr::bin(static_cast<BinOp>(pick(8)), atom(), atom());
    }
  }
  StmtPtr block(int depth, bool in_kernel) {
    std::vector<StmtPtr> items;
    int n = pick(4);
    for (int i = 0; i < n; ++i) items.push_back(stmt(depth, in_kernel));
    return seq(items);
  }
  StmtPtr stmt(int depth, bool in_kernel) {
    int k = pick(depth > 0 ? 10 : 6);
    switch (k) {
    case 0: return mk(ReadArr{target(), array(), expr()});
    case 1: return mk(WriteArr{array(), expr(), scalar()});
    case 2: return mk(ReadStream{target(), array()});
    case 3: return mk(WriteStream{array(), scalar()});
    case 4:
    case 5: return mk(Assign{target(), expr()});
    case 6:
    case 7: return mk(If{scalar(), block(depth - 1, in_kernel), block(depth - 1, in_kernel)});
    case 8: {
      Int step = pick(2) ? Int(pick(3) + 1) : Int(-(pick(3) + 1));
      std::string ann = pick(3) == 0 ? "idx(a) = [x, N - 1; 1] && x <= N" : "";
      return mk(For{"i", expr(), expr(), step, block(depth - 1, in_kernel), ann});
    }
    default:
      if (in_kernel) return mk(Assign{target(), expr()});
      return mk(Kernel{block(depth - 1, true)});
    }
  }
};

} // namespace

TEST_CASE("parse(print(p)) == p on random programs") {
  for (uint64_t s = 0; s < 300; ++s) {
    Gen g(s);
    Program p;
    p.decls = {{DeclKind::Param, "N", Int(1), std::nullopt},
               {DeclKind::Int, "x", {}, {}},
               {DeclKind::Int, "y", {}, {}},
               {DeclKind::Int, "z", {}, {}},
               {DeclKind::Int, "w", {}, {}},
               {DeclKind::Int, "i", {}, {}},
               {DeclKind::Buf, "bb", {}, {}},
               {DeclKind::Arr, "a", {}, {}},
               {DeclKind::Arr, "b", {}, {}}};
    p.main = g.block(3, false);
    std::string text = print_program(p);
    Program q = parse_program(text);
    bool same = program_equal(p, q);
    if (!same) MESSAGE(text);
    REQUIRE(same);
    CHECK(print_program(q) == text);
  }
}
