// One pass/fail line per acceptance criterion; exit status 1 if any fails.
#include "formula_gen.hpp"

#include "streamline/frontend/parser.hpp"
#include "streamline/translate/translate.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <regex>
#include <sstream>
#include <sys/wait.h>

using namespace streamline;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Verdict {
  bool ok = true;
  std::string detail;
};

std::string slurp(const std::string &path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

const std::vector<std::string> kCorpus = {
    "filter",     "filter-rev", "filter-skip", "filter-dilated", "filter-dilated-rev",
    "filter-dilated-skip", "divide", "divide-rev", "divide-skip", "matadd",
    "matadd-rev", "matadd-skip", "merge", "kmp"};

struct Entry {
  Translation t;
  double seconds = 0;
};

std::map<std::string, Entry> &corpus() {
  static std::map<std::string, Entry> c = [] {
    std::map<std::string, Entry> m;
    for (auto &name : kCorpus) {
      std::string text = slurp(std::string(STREAMLINE_CORPUS_DIR "/") + name + ".hdsl");
      auto t0 = Clock::now();
      Translation t = translate_text(text);
      m[name] = Entry{std::move(t), since(t0)};
    }
    return m;
  }();
  return c;
}

Int reg(const ExecReport &r, const std::string &x) {
  auto it = r.final_state.regs.find(x);
  return it == r.final_state.regs.end() ? Int(-999999) : it->second;
}

// ---- 1: one directed run per reduction rule ----

Verdict semantics_rules() {
  std::vector<std::pair<std::string, std::function<bool()>>> rules;
  auto run = [](const char *text, ExecInput in = {}) { return run_program(parse_program(text), in); };
  rules.push_back({"R-Const", [&] { return reg(run("int x; x = 7;"), "x") == 7; }});
  rules.push_back({"R-Var", [&] { return reg(run("int x, y; y = 5; x = y;"), "x") == 5; }});
  rules.push_back({"R-Op", [&] {
                     auto r = run("int x, y, a, b, c, d; x = 7; y = -2; a = x / y; b = x % y; c = x < y; d = y <= x;");
                     return reg(r, "a") == -3 && reg(r, "b") == 1 && reg(r, "c") == 0 && reg(r, "d") == 1;
                   }});
  rules.push_back({"R-ReadArray", [&] {
                     ExecInput in;
                     in.heap.set("a", 2, 40);
                     auto r = run("int x, i; rarr a; i = 2; kernel { x = a[i]; }", in);
                     auto s = run("int x; rarr a; kernel { x = a[0]; }");
                     return reg(r, "x") == 40 && s.status == ExecStatus::Stuck;
                   }});
  rules.push_back({"R-WriteArray", [&] {
                     auto r = run("int x; warr a; x = 9; kernel { a[3] = x; }");
                     auto v = r.final_state.heap.get("a", 3);
                     return v && *v == 9;
                   }});
  rules.push_back({"R-Assign", [&] { return reg(run("int x, y; y = 3; x = y * 5;"), "x") == 15; }});
  rules.push_back({"R-Seq", [&] { return reg(run("int x; x = 1; x = x + 1; x = x * 10;"), "x") == 20; }});
  rules.push_back({"R-IfTrue", [&] {
                     return reg(run("int c, x; c = -4; if (c) { x = 1; } else { x = 2; }"), "x") == 1;
                   }});
  rules.push_back({"R-IfFalse", [&] {
                     return reg(run("int c, x; c = 0; if (c) { x = 1; } else { x = 2; }"), "x") == 2;
                   }});
  rules.push_back({"R-ForLoop", [&] {
                     auto r = run("int x, s; for (x = 9; x != -3; x -= 3) { s = s + x; }");
                     return reg(r, "s") == 9 + 6 + 3 + 0;
                   }});
  rules.push_back({"R-ForExit", [&] {
                     // zero iterations: x is bound to the bound value, body untouched
                     auto r = run("int x, s, m; m = 5; x = 100; for (x = 5; x != m; x += 1) { s = 1; }");
                     auto q = run("int x; for (x = 0; x != 4; x += 2) { }");
                     return reg(r, "x") == 5 && reg(r, "s") == 0 && reg(q, "x") == 4;
                   }});
  rules.push_back({"R-CallKer", [&] {
                     auto r = run("int x; warr a; x = 1; kernel { a[0] = x; x = 2; } x = x + 1;");
                     return reg(r, "x") == 3 && r.kernel("a").heap_writes == 1 && r.host("a").heap_writes == 0;
                   }});
  rules.push_back({"R-Read", [&] {
                     ExecInput in;
                     in.streams["a"] = {4, 9};
                     auto r = run("int x; rarr a; kernel { x = a.read(); }", in);
                     auto s = run("int x; rarr a; kernel { x = a.read(); }");
                     return reg(r, "x") == 4 && r.final_state.streams.at("a") == std::deque<Int>{9} &&
                            s.status == ExecStatus::Stuck;
                   }});
  rules.push_back({"R-Write", [&] {
                     ExecInput in;
                     in.streams["a"] = {1};
                     auto r = run("int x; warr a; x = 7; kernel { a.write(x); }", in);
                     return r.final_state.streams.at("a") == std::deque<Int>{1, 7};
                   }});
  Verdict v;
  int passed = 0;
  for (auto &[name, f] : rules) {
    bool ok = false;
    try {
      ok = f();
    } catch (const std::exception &) {
    }
    if (ok) ++passed;
    else v.detail += " " + name;
  }
  v.ok = passed == static_cast<int>(rules.size());
  v.detail = std::to_string(passed) + "/" + std::to_string(rules.size()) + " rules" +
             (v.ok ? "" : ", failing:" + v.detail);
  return v;
}

// ---- 2: differential suite ----

std::map<std::string, Int> params_for(const Program &p, int n) {
  std::map<std::string, Int> ps;
  for (auto &d : p.decls)
    if (d.kind == DeclKind::Param) {
      Int v = n;
      if (d.min && v < *d.min) v = *d.min;
      if (d.max && v > *d.max) v = *d.max;
      ps[d.name] = v;
    }
  return ps;
}

Verdict diff_suite(const std::string &only = "") {
  auto t0 = Clock::now();
  Verdict v;
  size_t cases = 0;
  for (auto &name : kCorpus) {
    if (!only.empty() && name != only) continue;
    const Translation &t = corpus().at(name).t;
    std::mt19937_64 rng(std::hash<std::string>{}(name));
    for (int k = 0; k < 200; ++k) {
      int n = 1 + static_cast<int>(rng() % 32);
      ExecInput in = sample_input(t.source, params_for(t.source, n), rng);
      SimResult r = simulate_pair(t, in);
      ++cases;
      if (!r.ok && v.ok) {
        v.ok = false;
        v.detail = name + " N=" + std::to_string(n) + ": " + r.why + "; ";
      }
    }
  }
  double s = since(t0);
  if (only.empty() && s >= 60) {
    v.ok = false;
    v.detail += "too slow; ";
  }
  std::ostringstream o;
  o << v.detail << cases << " cases in " << s << " s";
  v.detail = o.str();
  return v;
}

// ---- 3: filter invariant and target ----

const char *kFig5 = R"(
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

Verdict filter_invariant() {
  const Translation &t = corpus().at("filter").t;
  Verdict v;
  // c_{i,0} is the part without x, c_{i,1} the coefficient of x, for
  // (lo, hi, step) of in and then of out
  const std::vector<std::pair<std::string, std::string>> want = {
      {"1", "1"}, {"N - 1", "0"}, {"1", "0"}, {"0", "0"}, {"-1", "1"}, {"1", "0"}};
  auto it = t.infer.invs.loops.find(1);
  if (it == t.infer.invs.loops.end()) return {false, "no invariant for the kernel loop"};
  const PointInv &inv = it->second;
  int i = 0;
  for (const char *a : {"in", "out"}) {
    auto r = inv.ranges.find(a);
    if (r == inv.ranges.end()) return {false, std::string("no range for ") + a};
    for (const IntT *part : {&r->second.lo, &r->second.hi, &r->second.step}) {
      auto l = linearize(*part);
      std::string c0 = "?", c1 = "?";
      if (l) {
        Int slope = l->coeff("x");
        LinExpr rest = *l - LinExpr::var("x", slope);
        c0 = rest.str();
        c1 = to_string(slope);
      }
      if (c0 != want[i].first || c1 != want[i].second) {
        v.ok = false;
        v.detail += "c" + std::to_string(i) + "0=" + c0 + " c" + std::to_string(i) + "1=" + c1 + "; ";
      }
      ++i;
    }
  }
  bool target = program_equal(t.target, parse_program(kFig5));
  if (!target) {
    v.ok = false;
    v.detail += "target differs from the expected listing; ";
  }
  if (v.ok)
    v.detail = "idx(in) = [x + 1, N - 1; 1], idx(out) = [0, x - 1; 1], target matches";
  return v;
}

// ---- 4: derivation soundness ----

void nodes_of(DNode &n, std::vector<DNode *> &out) {
  out.push_back(&n);
  for (auto &p : n.premises) nodes_of(p, out);
}

const std::vector<std::string> kRules = {
    rule::ReadMem, rule::WriteMem, rule::Assign, rule::Seq,     rule::Skip,    rule::If,
    rule::For,     rule::InsertL,  rule::InsertR, rule::InsRBuf, rule::InsWBuf, rule::InsMove,
    rule::Conseq,  rule::InsConseq, rule::Kernel, rule::Keep};

// Adds or subtracts one at one component of one index range in `f`.
bool perturb_range(Form &f, std::mt19937_64 &rng) {
  std::string text = str(f);
  static const std::regex range(R"(\[([^\[\];,]+), ([^\[\];,]+); ([^\[\];,\]]+)\])");
  std::vector<std::smatch> ms;
  for (auto i = std::sregex_iterator(text.begin(), text.end(), range); i != std::sregex_iterator(); ++i)
    ms.push_back(*i);
  if (ms.empty()) return false;
  const std::smatch &m = ms[rng() % ms.size()];
  int which = 1 + static_cast<int>(rng() % 3);
  std::string comp = m[which].str() + (rng() % 2 ? " + 1" : " - 1");
  std::string parts[3] = {m[1].str(), m[2].str(), m[3].str()};
  parts[which - 1] = comp;
  std::string repl = "[" + parts[0] + ", " + parts[1] + "; " + parts[2] + "]";
  text.replace(static_cast<size_t>(m.position(0)), static_cast<size_t>(m.length(0)), repl);
  f = parse_formula(text);
  return true;
}

// Applies mutation `k` of the given kind; false if the derivation offers no site.
bool mutate(Derivation &d, int kind, std::mt19937_64 &rng, std::string &what) {
  std::vector<DNode *> ns;
  nodes_of(d.root, ns);
  if (kind == 0) {
    std::vector<std::pair<DNode *, Form *>> sites;
    for (auto *n : ns)
      for (Form *f : {&n->j.pre, &n->j.post, &n->inv})
        if (*f && str(*f).find("idx(") != std::string::npos) sites.push_back({n, f});
    if (sites.empty()) return false;
    auto [n, f] = sites[rng() % sites.size()];
    what = "coefficient at " + n->rule;
    return perturb_range(*f, rng);
  }
  if (kind == 1) {
    DNode *n = ns[rng() % ns.size()];
    std::string r;
    do r = kRules[rng() % kRules.size()];
    while (r == n->rule);
    what = "rule " + n->rule + " -> " + r;
    n->rule = r;
    return true;
  }
  // midpoint of a sequence: drop a conjunct that occurs once (dropping one
  // copy of a repeated conjunct leaves an equivalent assertion), or add a
  // false one to a single fact
  std::vector<DNode *> seqs;
  for (auto *n : ns)
    if (n->rule == rule::Seq && n->premises.size() >= 2) seqs.push_back(n);
  if (seqs.empty()) return false;
  DNode *s = seqs[rng() % seqs.size()];
  size_t i = rng() % (s->premises.size() - 1);
  Form mid = s->premises[i].j.post;
  auto cs = conjuncts(mid);
  std::vector<size_t> once;
  for (size_t k = 0; k < cs.size(); ++k) {
    int copies = 0;
    for (auto &c : cs) copies += equal(c, cs[k]);
    if (copies == 1) once.push_back(k);
  }
  Form edited;
  if (cs.size() >= 2 && !once.empty()) {
    size_t drop = once[rng() % once.size()];
    what = "dropped " + str(cs[drop]) + " between " + s->premises[i].rule + " and " +
           s->premises[i + 1].rule + ", ";
    cs.erase(cs.begin() + static_cast<long>(drop));
    edited = T::tru();
    for (auto &c : cs) edited = T::conj(edited, c);
    edited = normalize(edited);
  } else {
    edited = T::conj(mid, T::eq(T::num(0), T::num(1)));
  }
  s->premises[i].j.post = edited;
  s->premises[i + 1].j.pre = edited;
  what += "midpoint " + std::to_string(i) + " of a sequence";
  return true;
}

Verdict derivation_soundness() {
  auto t0 = Clock::now();
  Verdict v;
  int accepted = 0;
  for (auto &name : kCorpus) {
    const Translation &t = corpus().at(name).t;
    CheckResult c = check_derivation(t.derivation, {}, &t.source, &t.target_twostep);
    if (!c.ok || !t.report.derivation_ok) {
      v.ok = false;
      v.detail += name + " rejected at " + c.path + "; ";
    } else {
      ++accepted;
    }
  }
  std::mt19937_64 rng(2024);
  int made = 0, rejected = 0;
  std::string survivors;
  while (made < 100) {
    const std::string &name = kCorpus[rng() % kCorpus.size()];
    const Translation &t = corpus().at(name).t;
    Derivation d = t.derivation;
    std::string what;
    if (!mutate(d, made % 3, rng, what)) continue;
    ++made;
    CheckResult c = check_derivation(d, {}, &t.source, &t.target_twostep);
    if (!c.ok) ++rejected;
    else survivors += " [" + name + ": " + what + "]";
  }
  double s = since(t0);
  bool enough = rejected >= 95;
  if (!enough || s >= 120) v.ok = false;
  std::ostringstream o;
  o << v.detail << accepted << "/" << kCorpus.size() << " derivations accepted, " << rejected << "/" << made
    << " mutations rejected in " << s << " s";
  if (!survivors.empty()) o << "; accepted mutants:" << survivors;
  v.detail = o.str();
  return v;
}

// ---- 5: access counters on filter ----

Verdict filter_counters() {
  const Translation &t = corpus().at("filter").t;
  Verdict v;
  for (int n = 2; n <= 64; ++n) {
    ExecInput in;
    in.params["N"] = n;
    ExecReport s = run_source(t.source, in);
    ExecReport g = run_target(t.target, in);
    AccessCounters si = s.kernel("in"), so = s.kernel("out"), gi = g.kernel("in"), go = g.kernel("out");
    bool ok = si.heap_reads == static_cast<uint64_t>(2 * (n - 1)) && so.heap_writes == static_cast<uint64_t>(n - 1) &&
              si.stream_reads == 0 && so.stream_writes == 0 && gi.stream_reads == static_cast<uint64_t>(n) &&
              go.stream_writes == static_cast<uint64_t>(n - 1) && gi.heap_reads == 0 && go.heap_writes == 0;
    if (!ok) {
      v.ok = false;
      v.detail = "N=" + std::to_string(n) + ": source " + std::to_string(si.heap_reads) + "/" +
                 std::to_string(so.heap_writes) + " heap, target " + std::to_string(gi.stream_reads) + "/" +
                 std::to_string(go.stream_writes) + " stream";
      return v;
    }
  }
  v.detail = "N = 2..64: N stream reads, N-1 stream writes vs 2(N-1) heap reads, N-1 heap writes";
  return v;
}

// ---- 6: give-up on data-dependent indices ----

Verdict give_up() {
  const Translation &t = corpus().at("kmp").t;
  Verdict v;
  if (t.report.given_up.count("text") == 0 || t.report.conv.count("text")) {
    v.ok = false;
    v.detail += "text was converted; ";
  }
  fs::path out = fs::temp_directory_path() / "streamline-acceptance";
  std::string cmd = std::string(STREAMLINE_CLI) + " translate " + STREAMLINE_CORPUS_DIR "/kmp.hdsl -o " +
                    out.string() + " >/dev/null 2>&1";
  int rc = std::system(cmd.c_str());
  int code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  if (code != 0) {
    v.ok = false;
    v.detail += "translate exited with " + std::to_string(code) + "; ";
  }
  Verdict d = diff_suite("kmp");
  if (!d.ok) v.ok = false;
  v.detail += "kept {text}, converted {";
  std::string sep;
  for (auto &a : t.report.conv) {
    v.detail += sep + a;
    sep = ", ";
  }
  v.detail += "}, exit " + std::to_string(code) + ", diff: " + d.detail;
  return v;
}

// ---- 7: substitution lemmas ----

Verdict substitution_lemmas() {
  using streamline::testing::FGen;
  int done[3] = {0, 0, 0}, failed[3] = {0, 0, 0};
  for (uint64_t s = 0; done[0] < 1000 || done[1] < 1000 || done[2] < 1000; ++s) {
    FGen g(s * 7919 + 13);
    Form f = g.form(3);
    RegFile r = g.regs();
    MapHeap h = g.heap();
    Witness w = g.wit();
    EvalCtx c{r, h, w};
    int lemma = static_cast<int>(s % 3);
    if (done[lemma] >= 1000) continue;
    Subst sb;
    bool lhs = false, rhs = false;
    if (lemma == 0) {
      IntT e = g.term(2);
      auto v = eval_int(c, e);
      if (!v) continue;
      sb.ints[g.ivar()] = e;
      RegFile r2 = r;
      r2[sb.ints.begin()->first] = *v;
      lhs = eval_formula(r, h, w, subst(f, sb));
      rhs = eval_formula(r2, h, w, f);
    } else if (lemma == 1) {
      IntT i = g.term(1), e = g.term(1);
      auto iv = eval_int(c, i), ev = eval_int(c, e);
      if (!iv || !ev) continue;
      std::string a = g.arr();
      sb.arrs[a] = T::upd(T::avar(a), i, e);
      MapHeap h2 = h;
      h2.set(a, *iv, *ev);
      lhs = eval_formula(r, h, w, subst(f, sb));
      rhs = eval_formula(r, h2, w, f);
    } else {
      std::string a = g.arr();
      SeqT q = g.pick(2) ? T::tl(T::svar(a)) : T::snoc(T::svar(a), g.term(1));
      auto qv = eval_seq(c, q);
      if (!qv) continue;
      sb.seqs[a] = q;
      Witness w2 = w;
      w2[a] = *qv;
      lhs = eval_formula(r, h, w, subst(f, sb));
      rhs = eval_formula(r, h, w2, f);
    }
    ++done[lemma];
    if (lhs != rhs) ++failed[lemma];
  }
  Verdict v;
  v.ok = failed[0] + failed[1] + failed[2] == 0;
  v.detail = "registers " + std::to_string(done[0] - failed[0]) + "/1000, heap " +
             std::to_string(done[1] - failed[1]) + "/1000, index sequences " +
             std::to_string(done[2] - failed[2]) + "/1000";
  return v;
}

// ---- 8: translation time ----

Verdict translation_time() {
  Verdict v;
  double worst = 0;
  std::string slowest;
  for (auto &name : kCorpus) {
    double s = corpus().at(name).seconds;
    if (s > worst) {
      worst = s;
      slowest = name;
    }
    if (s >= 5) v.ok = false;
  }
  std::ostringstream o;
  o << kCorpus.size() << " programs, slowest " << slowest << " at " << worst << " s";
  v.detail = o.str();
  return v;
}

} // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"semantics rules", semantics_rules},
      {"differential suite", [] { return diff_suite(); }},
      {"filter invariant and target", filter_invariant},
      {"derivation soundness", derivation_soundness},
      {"filter access counts", filter_counters},
      {"give-up on data-dependent indices", give_up},
      {"substitution lemmas", substitution_lemmas},
      {"translation time", translation_time},
  };
  int failed = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception &e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    if (!v.ok) ++failed;
    std::cout << (v.ok ? "PASS" : "FAIL") << " " << (i + 1) << " " << criteria[i].first << ": " << v.detail
              << std::endl;
  }
  return failed ? 1 : 0;
}
