#include "doctest.h"

#include "streamline/emit/emit.hpp"
#include "streamline/frontend/parser.hpp"
#include "streamline/translate/translate.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

using namespace streamline;
namespace fs = std::filesystem;

static std::string slurp(const std::string &path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

static fs::path workdir() {
  static fs::path d = [] {
    fs::path p = fs::path(STREAMLINE_TEST_TMP) / "emit";
    fs::create_directories(p);
    std::ofstream(p / "hls_stream.h") << hls_stream_stub();
    return p;
  }();
  return d;
}

static void put(const fs::path &p, const std::string &text) { std::ofstream(p) << text; }

static bool compile(const std::vector<fs::path> &srcs, const fs::path &exe) {
  std::string cmd = std::string(STREAMLINE_CXX) + " -std=c++17 -O0 -w -I" + workdir().string();
  for (auto &s : srcs) cmd += " " + s.string();
  cmd += " -o " + exe.string() + " 2>" + (exe.string() + ".log");
  return std::system(cmd.c_str()) == 0;
}

static std::string run(const fs::path &exe, const std::string &args, const std::string &stdin_text) {
  put(exe.string() + ".in", stdin_text);
  std::string cmd = exe.string() + " " + args + " <" + exe.string() + ".in";
  FILE *f = popen(cmd.c_str(), "r");
  REQUIRE(f);
  std::string out;
  char buf[4096];
  size_t n;
  while ((n = fread(buf, 1, sizeof buf, f)) > 0) out.append(buf, n);
  pclose(f);
  return out;
}

static std::string heap_lines(const ExecInput &in) {
  std::ostringstream o;
  for (auto &[a, cells] : in.heap.cells)
    for (auto &[i, v] : cells) o << a << " " << i << " " << v << "\n";
  return o.str();
}

// What the emitted host prints for a finished interpreter run.
static std::string expected(const Program &p, const ExecReport &r, long dump) {
  std::ostringstream o;
  std::string text = print_program(p);
  for (auto &d : p.decls)
    if (d.kind == DeclKind::Int || d.kind == DeclKind::Param) {
      auto it = r.final_state.regs.find(d.name);
      o << d.name << " " << (it == r.final_state.regs.end() ? Int(0) : it->second) << "\n";
    }
  for (auto &d : p.decls) {
    if (d.kind != DeclKind::Arr && d.kind != DeclKind::RArr && d.kind != DeclKind::WArr) continue;
    std::regex op("\\b" + d.name + "\\.(read|write)\\(");
    if (std::regex_search(text, op)) {
      o << "stream " << d.name << ":";
      auto s = r.final_state.streams.find(d.name);
      if (s != r.final_state.streams.end())
        for (auto &v : s->second) o << " " << v;
      o << "\n";
    } else if (dump > 0) {
      for (long i = 0; i < dump; ++i) {
        Int v = 0;
        auto a = r.final_state.heap.cells.find(d.name);
        if (a != r.final_state.heap.cells.end()) {
          auto c = a->second.find(Int(i));
          if (c != a->second.end()) v = c->second;
        }
        o << d.name << "[" << i << "] " << v << "\n";
      }
    }
  }
  return o.str();
}

static const char *kPrograms[] = {"filter",      "filter-rev",   "filter-skip",         "filter-dilated",
                                  "filter-dilated-rev", "filter-dilated-skip", "divide", "divide-rev",
                                  "divide-skip", "matadd",       "matadd-rev",          "matadd-skip",
                                  "kmp",         "merge"};

TEST_CASE("emitted target and baseline agree with the interpreter") {
  EmitConfig cfg;
  cfg.width = 64;
  std::mt19937_64 rng(11);
  for (const char *name : kPrograms) {
    std::string prog = name;
    CAPTURE(prog);
    Translation t = translate_text(slurp(std::string(STREAMLINE_CORPUS_DIR "/") + name + ".hdsl"));
    REQUIRE(t.report.derivation_ok);
    fs::path dir = workdir() / name;
    fs::create_directories(dir);
    cfg.name = "k";
    put(dir / "kernel.cpp", emit_kernel(t.target, cfg));
    put(dir / "host.cpp", emit_host(t.target, cfg));
    put(dir / "baseline.cpp", emit_baseline(t.source, cfg));
    REQUIRE(compile({dir / "kernel.cpp", dir / "host.cpp"}, dir / "target"));
    REQUIRE(compile({dir / "baseline.cpp"}, dir / "baseline"));

    int compared = 0;
    for (int n : {1, 2, 3, 5, 8}) {
      std::map<std::string, Int> params;
      for (auto &d : t.source.decls)
        if (d.kind == DeclKind::Param) params[d.name] = d.min ? std::max(Int(n), *d.min) : Int(n);
      ExecInput in = sample_input(t.source, params, rng);
      ExecReport src = run_program(t.source, in);
      ExecReport tgt = run_program(t.target, in);
      if (src.status != ExecStatus::Ok || tgt.status != ExecStatus::Ok) continue;
      std::string args;
      for (auto &[k, v] : params) args += k + "=" + to_string(v) + " ";
      long dump = 2 * n + 3;
      CHECK(run(dir / "target", args, heap_lines(in)) == expected(t.target, tgt, 0));
      CHECK(run(dir / "baseline", args + "dump=" + std::to_string(dump), heap_lines(in)) ==
            expected(t.source, src, dump));
      ++compared;
    }
    CHECK(compared > 0);
  }
}

TEST_CASE("emission is deterministic and names kernels in order") {
  Program p = parse_program(R"(
param N >= 1;
rarr a;
warr o;
int x, v, new;
for (x = 0; x != N; x += 1) { a.write(x); }
kernel { for (x = 0; x != N; x += 1) { v = a.read(); new = v; o.write(new); } }
kernel { x = 0; }
)");
  EmitConfig cfg;
  cfg.name = "top";
  std::string k = emit_kernel(p, cfg);
  CHECK(k == emit_kernel(p, cfg));
  CHECK(k.find("void top(") != std::string::npos);
  CHECK(k.find("void top_1(word_t &x)") != std::string::npos);
  CHECK(k.find("new_ = v;") != std::string::npos);
  CHECK(k.find("typedef int32_t word_t;") != std::string::npos);
  cfg.depth = 16;
  CHECK(emit_kernel(p, cfg).find("#pragma HLS STREAM variable=a depth=16") != std::string::npos);
  std::string h = emit_host(p, cfg);
  CHECK(h.find("top(N, a, o, x, v, new_);") != std::string::npos);
  CHECK(h.find("top_1(x);") != std::string::npos);
}

TEST_CASE("streams filled by descending host loops are noted") {
  Translation t = translate_text(slurp(STREAMLINE_CORPUS_DIR "/filter-rev.hdsl"));
  CHECK(emit_host(t.target, {}).find("descending index order") != std::string::npos);
  Translation f = translate_text(slurp(STREAMLINE_CORPUS_DIR "/filter.hdsl"));
  CHECK(emit_host(f.target, {}).find("descending index order") == std::string::npos);
}

TEST_CASE("programs without kernels and bad configurations") {
  Program p = parse_program("int x; x = 3;");
  std::string k = emit_kernel(p, {});
  CHECK(k.find("void kernel() {}") != std::string::npos);
  fs::path dir = workdir() / "nokernel";
  fs::create_directories(dir);
  put(dir / "b.cpp", emit_baseline(p, {}));
  REQUIRE(compile({dir / "b.cpp"}, dir / "b"));
  CHECK(run(dir / "b", "", "") == "x 3\n");

  EmitConfig bad;
  bad.width = 12;
  CHECK_THROWS_AS(emit_kernel(p, bad), Error);
  Program mixed = parse_program("arr a; int x; a[0] = x; a.write(x);");
  CHECK_THROWS_AS(emit_host(mixed, {}), Error);
}
