#include "doctest.h"

#include "streamline/bufferpass/plan.hpp"
#include "streamline/frontend/parser.hpp"
#include "streamline/semantics/machine.hpp"

#include <fstream>
#include <sstream>

using namespace streamline;

static std::string slurp(const std::string &path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

static Checked filter() { return load_program(slurp(STREAMLINE_CORPUS_DIR "/filter.hdsl")); }

static std::set<Int> offsets(const std::vector<AccessSite> &sites, const std::string &a) {
  std::set<Int> out;
  for (auto &s : sites)
    if (s.array == a && s.loop == 1) {
      REQUIRE(s.idx);
      out.insert(s.idx->c0);
      CHECK(s.idx->coeff("x") == 1);
    }
  return out;
}

TEST_CASE("access indices of the running example") {
  auto c = filter();
  auto sites = collect_access_indices(c.prog);
  CHECK(offsets(sites, "in") == std::set<Int>{0, 1});
  CHECK(offsets(sites, "out") == std::set<Int>{0});
  auto loops = collect_loops(c.prog);
  REQUIRE(loops.size() == 2);
  CHECK_FALSE(loops[0].in_kernel);
  CHECK(loops[1].in_kernel);
}

TEST_CASE("indices through temporaries are tracked symbolically") {
  auto c = load_program(R"(
    param N >= 1; rarr a; warr o; int i, t, u, y;
    kernel { for (i = 0; i != N; i += 1) { t = 2 * i; u = t + 3; y = a[u]; o[i] = y; } }
  )");
  auto sites = collect_access_indices(c.prog);
  REQUIRE(sites.size() == 2);
  CHECK(sites[0].idx->str() == "2 * i + 3");
}

TEST_CASE("running example skeleton") {
  auto c = filter();
  BufferPlan plan = plan_buffers(c);
  CHECK(plan.candidates == std::set<std::string>{"in", "out"});
  REQUIRE(plan.windows.size() == 1);
  const WindowPlan &w = plan.windows[0];
  CHECK(w.array == "in");
  CHECK(w.width == 2);
  CHECK_FALSE(w.end_rotation);
  CHECK(w.bufs == std::vector<std::string>{"b0"});
  auto facts = plan.buffer_facts(1, plan.candidates);
  REQUIRE(facts.size() == 1);
  CHECK(facts[0].idx.str() == "x");

  Program t = plan.target(plan.candidates);
  Program want = parse_program(R"(
    param N >= 1; rarr in; warr out; int x, y0, y1, z0, z1; buf b0, b1, b2;
    for (x = 0; x != N; x += 1) { b1 = x; in.write(b1); }
    kernel {
      b0 = in.read();
      for (x = 0; x != N - 1; x += 1) {
        y0 = b0; b0 = in.read(); y1 = b0; z0 = y0 + y1; z1 = z0 / 2; b2 = z1; out.write(b2);
      }
    }
  )");
  CHECK(print_program(t) == print_program(want));
  CHECK(stmt_equal(project_source(plan.rel), c.prog.main));
}

TEST_CASE("partial conversion keeps the other array in memory") {
  auto c = filter();
  BufferPlan plan = plan_buffers(c);
  Program t = plan.target({"out"});
  std::string txt = print_program(t);
  CHECK(txt.find("in.read") == std::string::npos);
  CHECK(txt.find("out.write") != std::string::npos);
  CHECK(txt.find("b0") == std::string::npos);
}

static void same_results(const Checked &c, const std::string &out, int nmax, int nmin = 1) {
  BufferPlan plan = plan_buffers(c);
  Program t = plan.target(plan.candidates);
  for (int n = nmin; n <= nmax; ++n) {
    ExecInput in;
    in.params["N"] = n;
    auto rs = run_source(c.prog, in);
    auto rt = run_target(t, in);
    REQUIRE(rs.status == ExecStatus::Ok);
    REQUIRE(rt.status == ExecStatus::Ok);
    std::vector<Int> want;
    for (auto &kv : rs.final_state.heap.cells[out]) want.push_back(kv.second);
    auto &got = rt.final_state.streams[out];
    CHECK(std::vector<Int>(got.begin(), got.end()) == want);
  }
}

TEST_CASE("skeleton agrees with the source") {
  same_results(filter(), "out", 12);
}

TEST_CASE("dilated window") {
  auto c = load_program(R"(
    param N >= 1; rarr in; warr out; int x, y0, y1, y2, z;
    for (x = 0; x != N + 4; x += 1) { in[x] = x; }
    kernel {
      for (x = 0; x != N; x += 1) {
        y0 = in[x]; y1 = in[x + 2]; y2 = in[x + 4]; z = y0 + y1; z = z + y2; out[x] = z;
      }
    }
  )");
  BufferPlan plan = plan_buffers(c);
  REQUIRE(plan.windows.size() == 1);
  CHECK(plan.windows[0].width == 5);
  CHECK(plan.windows[0].end_rotation == false);
  auto sites = collect_access_indices(c.prog);
  std::set<Int> offs;
  for (auto &s : sites)
    if (s.array == "in" && s.loop == 1) offs.insert(s.idx->c0);
  CHECK(offs == std::set<Int>{0, 2, 4});
  same_results(c, "out", 10);
}

TEST_CASE("descending window reads the smallest index fresh") {
  auto c = load_program(R"(
    param N >= 2; rarr in; warr out; int x, y0, y1, z;
    for (x = N - 1; x != -1; x += -1) { in[x] = x; }
    kernel {
      for (x = N - 1; x != 0; x += -1) { y0 = in[x]; y1 = in[x - 1]; z = y0 - y1; out[x] = z; }
    }
  )");
  BufferPlan plan = plan_buffers(c);
  REQUIRE(plan.windows.size() == 1);
  CHECK(plan.windows[0].width == 2);
  CHECK(plan.windows[0].first.str() == "0");
  same_results(c, "out", 10, 2);
}

TEST_CASE("slot 0 used after the fresh read rotates at the end") {
  auto c = load_program(R"(
    param N >= 1; rarr in; warr out; int x, y0, y1, z;
    for (x = 0; x != N + 1; x += 1) { in[x] = x; }
    kernel {
      for (x = 0; x != N; x += 1) { y1 = in[x + 1]; y0 = in[x]; z = y1 - y0; z = z + y0; out[x] = z; }
    }
  )");
  BufferPlan plan = plan_buffers(c);
  REQUIRE(plan.windows.size() == 1);
  CHECK(plan.windows[0].end_rotation);
  same_results(c, "out", 10);
}

TEST_CASE("indirect indexing is unplannable") {
  auto c = load_program(R"(
    param N >= 1; rarr a, b; warr o; int i, t, y;
    for (i = 0; i != N; i += 1) { a[i] = i; b[i] = i; }
    kernel { for (i = 0; i != N; i += 1) { t = b[i]; y = a[t]; o[i] = y; } }
  )");
  BufferPlan plan = plan_buffers(c);
  CHECK(plan.unplannable.count("a"));
  CHECK(plan.candidates.count("b"));
  CHECK(plan.candidates.count("o"));
  same_results(c, "o", 8);
}
