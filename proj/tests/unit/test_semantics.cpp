#include "doctest.h"

#include "streamline/frontend/parser.hpp"
#include "streamline/semantics/machine.hpp"

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

static ExecInput with_n(long long n) {
  ExecInput in;
  in.params["N"] = n;
  return in;
}

static Int reg(const ExecReport &r, const std::string &x) { return r.final_state.regs.at(x); }

static const char *kFilterTarget = R"(
param N >= 1;
rarr in;
warr out;
int x, y0, y1, z0, z1;
buf b0;
for (x = 0; x != N; x += 1) {
  in.write(x);
}
kernel {
  b0 = in.read();
  for (x = 0; x != N - 1; x += 1) {
    y0 = b0;
    b0 = in.read();
    y1 = b0;
    z0 = y0 + y1;
    z1 = z0 / 2;
    out.write(z1);
  }
}
)";

// ---- one directed test per reduction rule ----

TEST_CASE("R-Const") {
  CHECK(*eval_expr({}, Expr::constant(7)) == 7);
  auto r = run_program(parse_program("int x; x = 7;"), {});
  CHECK(reg(r, "x") == 7);
}

TEST_CASE("R-Var") {
  CHECK(*eval_expr({{"y", 5}}, Expr::var("y")) == 5);
  CHECK_FALSE(eval_expr({}, Expr::var("y")));
  auto r = run_program(parse_program("int x, y; y = 5; x = y;"), {});
  CHECK(reg(r, "x") == 5);
}

TEST_CASE("R-Op") {
  RegFile r{{"x", 3}, {"y", 4}};
  CHECK(*eval_expr(r, Expr::bin(BinOp::Add, Atom::var("x"), Atom::var("y"))) == 7);
  CHECK(*eval_expr(r, Expr::bin(BinOp::Lt, Atom::var("x"), Atom::var("y"))) == 1);
  CHECK(*eval_expr(r, Expr::bin(BinOp::Eq, Atom::var("x"), Atom::var("y"))) == 0);
  CHECK(*eval_expr(r, Expr::bin(BinOp::Le, Atom::var("y"), Atom::var("x"))) == 0);
  CHECK(*eval_expr({{"x", 7}, {"y", 2}}, Expr::bin(BinOp::Div, Atom::var("x"), Atom::var("y"))) == 3);
  CHECK_FALSE(eval_expr({{"x", 7}, {"y", 0}}, Expr::bin(BinOp::Div, Atom::var("x"), Atom::var("y"))));
  CHECK_FALSE(eval_expr({{"x", 7}, {"y", 0}}, Expr::bin(BinOp::Mod, Atom::var("x"), Atom::var("y"))));
}

TEST_CASE("division and remainder match native truncating arithmetic") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 5000; ++i) {
    long long x = static_cast<long long>(rng() % 2001) - 1000;
    long long y = static_cast<long long>(rng() % 41) - 20;
    if (y == 0) continue;
    RegFile r{{"x", x}, {"y", y}};
    CHECK(*eval_expr(r, Expr::bin(BinOp::Div, Atom::var("x"), Atom::var("y"))) == x / y);
    CHECK(*eval_expr(r, Expr::bin(BinOp::Mod, Atom::var("x"), Atom::var("y"))) == x % y);
  }
}

TEST_CASE("R-ReadArray") {
  ExecInput in;
  in.heap.set("a", 2, 40);
  auto r = run_program(parse_program("int x, i; rarr a; i = 2; kernel { x = a[i]; }"), in);
  CHECK(r.status == ExecStatus::Ok);
  CHECK(reg(r, "x") == 40);
  CHECK(r.kernel("a").heap_reads == 1);

  auto s = run_program(parse_program("int x;\nrarr a;\nkernel {\n  x = a[0];\n}\n"), {});
  CHECK(s.status == ExecStatus::Stuck);
  CHECK(s.stuck_loc.line == 4);
  CHECK(s.stuck_reason.find("a[0]") != std::string::npos);
}

TEST_CASE("R-WriteArray") {
  auto r = run_program(parse_program("int x; warr a; x = 9; kernel { a[3] = x; }"), {});
  CHECK(*r.final_state.heap.get("a", 3) == 9);
  CHECK(r.kernel("a").heap_writes == 1);
}

TEST_CASE("R-Assign") {
  auto r = run_program(parse_program("int x, y; y = 3; x = y * 5;"), {});
  CHECK(reg(r, "x") == 15);
}

TEST_CASE("R-Seq") {
  auto r = run_program(parse_program("int x; x = 1; x = x + 1; x = x * 10;"), {});
  CHECK(reg(r, "x") == 20);
}

TEST_CASE("R-IfTrue") {
  auto r = run_program(parse_program("int c, x; c = 2; if (c) { x = 1; } else { x = 2; }"), {});
  CHECK(reg(r, "x") == 1);
}

TEST_CASE("R-IfFalse") {
  auto r = run_program(parse_program("int c, x; c = 0; if (c) { x = 1; } else { x = 2; }"), {});
  CHECK(reg(r, "x") == 2);
}

TEST_CASE("R-ForLoop") {
  auto r = run_program(parse_program("int x, s; for (x = 0; x != 10; x += 2) { s = s + x; }"), {});
  CHECK(reg(r, "s") == 20);
  CHECK(reg(r, "x") == 10);
  auto d = run_program(parse_program("int x, s; for (x = 9; x != -3; x -= 3) { s = s + x; }"), {});
  CHECK(reg(d, "s") == 18);
}

TEST_CASE("R-ForExit binds the loop variable") {
  auto r = run_program(parse_program("int x, s; x = 100; for (x = 5; x != 5; x += 1) { s = 1; }"), {});
  CHECK(reg(r, "x") == 5);
  CHECK(reg(r, "s") == 0);
}

TEST_CASE("R-CallKer") {
  auto r = run_program(parse_program("int x; warr a; x = 1; kernel { a[0] = x; x = 2; } x = x + 1;"), {});
  CHECK(reg(r, "x") == 3);
  CHECK(r.kernel("a").heap_writes == 1);
  CHECK(r.host("a").heap_writes == 0);
}

TEST_CASE("R-Read") {
  ExecInput in;
  in.streams["a"] = {4, 9};
  auto r = run_program(parse_program("int x; rarr a; kernel { x = a.read(); }"), in);
  CHECK(reg(r, "x") == 4);
  CHECK(r.final_state.streams.at("a") == std::deque<Int>{9});
  auto s = run_program(parse_program("int x; rarr a; kernel { x = a.read(); }"), {});
  CHECK(s.status == ExecStatus::Stuck);
}

TEST_CASE("R-Write") {
  auto r = run_program(parse_program("int x; warr a; x = 7; kernel { a.write(x); }"), {});
  CHECK(r.final_state.streams.at("a") == std::deque<Int>{7});
  CHECK(r.kernel("a").stream_writes == 1);
}

// ---- whole programs ----

TEST_CASE("source filter with N = 4") {
  Program p = parse_program(slurp(STREAMLINE_CORPUS_DIR "/filter.hdsl"));
  auto r = run_source(p, with_n(4));
  REQUIRE(r.status == ExecStatus::Ok);
  auto &out = r.final_state.heap.cells.at("out");
  CHECK(out == std::map<Int, Int>{{0, 0}, {1, 1}, {2, 2}});
}

TEST_CASE("target filter with N = 4") {
  auto r = run_target(parse_program(kFilterTarget), with_n(4));
  REQUIRE(r.status == ExecStatus::Ok);
  CHECK(r.final_state.streams.at("out") == std::deque<Int>{0, 1, 2});
  CHECK(r.final_state.streams.at("in").empty());
  CHECK_THROWS_AS(run_source(parse_program(kFilterTarget), with_n(4)), Error);
}

TEST_CASE("filter access counters") {
  Program src = parse_program(slurp(STREAMLINE_CORPUS_DIR "/filter.hdsl"));
  Program tgt = parse_program(kFilterTarget);
  for (int n = 1; n <= 20; ++n) {
    auto a = run_source(src, with_n(n));
    auto b = run_target(tgt, with_n(n));
    CHECK(a.kernel("in").heap_reads == uint64_t(2 * (n - 1)));
    CHECK(a.kernel("out").heap_writes == uint64_t(n - 1));
    CHECK(b.kernel("in").stream_reads == uint64_t(n));
    CHECK(b.kernel("out").stream_writes == uint64_t(n - 1));
    CHECK(reg(a, "z1") == reg(b, "z1"));
  }
}

TEST_CASE("fuel exhaustion is distinct from stuck") {
  RunOptions o;
  o.fuel = 1000;
  auto r = run_program(parse_program("int x; for (x = 0; x != -1; x += 1) { }"), {}, o);
  CHECK(r.status == ExecStatus::OutOfFuel);
  CHECK(r.steps == 1000);
}

TEST_CASE("params are validated") {
  Program p = parse_program(slurp(STREAMLINE_CORPUS_DIR "/filter.hdsl"));
  CHECK_THROWS_AS(run_source(p, {}), Error);
  CHECK_THROWS_AS(run_source(p, with_n(0)), Error);
  ExecInput bad = with_n(2);
  bad.params["M"] = 1;
  CHECK_THROWS_AS(run_source(p, bad), Error);
}

TEST_CASE("input and report JSON") {
  auto j = nlohmann::json::parse(R"({"params":{"N":8},"heap":{"a":{"0":5,"-2":"7"}},"streams":{"a":[1,2]}})");
  ExecInput in = parse_input(j);
  CHECK(in.params.at("N") == 8);
  CHECK(*in.heap.get("a", -2) == 7);
  CHECK(in.streams.at("a").size() == 2);
  CHECK(parse_input(nlohmann::json::parse(input_to_json(in).dump())).heap == in.heap);
  CHECK_THROWS_AS(parse_input(nlohmann::json::parse(R"({"params":{"N":"x"}})")), Error);
  CHECK_THROWS_AS(parse_input(nlohmann::json::parse(R"({"bogus":1})")), Error);

  RunOptions o;
  o.trace = true;
  auto r = run_target(parse_program(kFilterTarget), with_n(3), o);
  auto rj = r.to_json();
  CHECK(rj["status"] == "ok");
  CHECK(rj["counters"]["kernel"]["in"]["stream_reads"] == 3);
  CHECK(rj["state"]["streams"]["out"].size() == 2);
  CHECK(!r.trace.empty());
  CHECK(rj.dump() == run_target(parse_program(kFilterTarget), with_n(3), o).to_json().dump());
}

// ---- simulation relation ----

TEST_CASE("simulation relation") {
  TypeEnv g;
  g.bindings = {{"a", Ty::RARR}, {"x", Ty::INT}};
  MachineState e1, e2;
  CHECK(check_sim_relation(e1, e2, {}, T::tru(), {}));

  MachineState src, tgt;
  src.heap.set("a", 1, 2);
  src.heap.set("a", 0, 3);
  tgt.streams["a"] = {2, 3};
  Witness I{{"a", {1, 0}}};
  CHECK(check_sim_relation(src, tgt, g, T::tru(), I));

  tgt.streams["a"] = {3, 2};
  std::string why;
  CHECK_FALSE(check_sim_relation(src, tgt, g, T::tru(), I, &why));
  CHECK(why.find("element") != std::string::npos);

  tgt.streams["a"] = {2, 3};
  src.regs["x"] = 1;
  tgt.regs["x"] = 2;
  CHECK_FALSE(check_sim_relation(src, tgt, g, T::tru(), I));
  tgt.regs["x"] = 1;
  CHECK(check_sim_relation(src, tgt, g, parse_formula("x == a[hd(idx(a))] - 1"), I));
  CHECK_FALSE(check_sim_relation(src, tgt, g, parse_formula("x == a[hd(idx(a))]"), I));
  CHECK_FALSE(check_sim_relation(src, tgt, g, T::tru(), {{"a", {1, 5}}}));
  CHECK_FALSE(check_sim_relation(src, tgt, g, T::tru(), {{"a", {1, 1}}}));
  CHECK_FALSE(check_sim_relation(src, tgt, g, T::tru(), {{"a", {1}}}));

  // unconverted arrays compare heap contents
  MachineState s2, t2;
  s2.heap.set("a", 0, 1);
  CHECK_FALSE(check_sim_relation(s2, t2, g, T::tru(), {}));
  t2.heap.set("a", 0, 1);
  CHECK(check_sim_relation(s2, t2, g, T::tru(), {}));
}

TEST_CASE("filter end states are related") {
  auto a = run_source(parse_program(slurp(STREAMLINE_CORPUS_DIR "/filter.hdsl")), with_n(5));
  auto b = run_target(parse_program(kFilterTarget), with_n(5));
  TypeEnv g = load_program(slurp(STREAMLINE_CORPUS_DIR "/filter.hdsl")).env;
  Witness I{{"in", {}}, {"out", {0, 1, 2, 3}}};
  CHECK(check_sim_relation(a.final_state, b.final_state, g,
                           parse_formula("idx(out) == [0, x - 1; 1] && x == N - 1"), I));
}
