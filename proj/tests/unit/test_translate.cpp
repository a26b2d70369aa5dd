#include "doctest.h"

#include "streamline/frontend/parser.hpp"
#include "streamline/translate/translate.hpp"

#include <fstream>
#include <sstream>

using namespace streamline;

static std::string slurp(const std::string &path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

static const Translation &filter() {
  static Translation t = translate_text(slurp(STREAMLINE_CORPUS_DIR "/filter.hdsl"));
  return t;
}

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

static std::vector<std::string> rules_of(const DNode &n) {
  std::vector<std::string> out{n.rule};
  for (auto &p : n.premises)
    for (auto &r : rules_of(p)) out.push_back(r);
  return out;
}

static DNode *find_rule(DNode &n, const std::string &rule) {
  if (n.rule == rule) return &n;
  for (auto &p : n.premises)
    if (auto r = find_rule(p, rule)) return r;
  return nullptr;
}

TEST_CASE("running example translates to the expected target") {
  const Translation &t = filter();
  CHECK(t.report.conv == std::set<std::string>{"in", "out"});
  CHECK(t.report.given_up.empty());
  CHECK(t.report.derivation_ok);
  CHECK(program_equal(t.target, parse_program(kFilterTarget)));
  // two-step form keeps the write buffers
  CHECK(print_program(t.target_twostep).find("b1 = x;") != std::string::npos);
  CHECK(print_program(t.target_twostep).find("out.write(b2);") != std::string::npos);
}

TEST_CASE("derivation survives a JSON round trip and is re-checked") {
  const Translation &t = filter();
  std::string js = derivation_to_json(t.derivation);
  Derivation d = derivation_from_json(js);
  CHECK(derivation_to_json(d) == js);
  CheckResult c = check_derivation(d, {}, &t.source, &t.target_twostep);
  CHECK_MESSAGE(c.ok, c.path << ": " << c.message);
  CHECK(c.nodes == derivation_size(d.root));
  CHECK(c.sampled > 0);

  auto rules = rules_of(d.root);
  for (const char *r : {rule::Kernel, rule::For, rule::ReadMem, rule::WriteMem, rule::InsRBuf,
                        rule::InsWBuf, rule::InsertL, rule::InsertR, rule::Seq, rule::Conseq})
    CHECK_MESSAGE(std::count(rules.begin(), rules.end(), r) > 0, r);
}

TEST_CASE("checker rejects the target of a different program") {
  const Translation &t = filter();
  Program other = parse_program(kFilterTarget);
  CheckResult c = check_derivation(t.derivation, {}, &t.source, &other);
  CHECK_FALSE(c.ok);
  CHECK(c.message.find("root target") != std::string::npos);
}

TEST_CASE("a perturbed invariant coefficient fails at inductiveness") {
  // c40 := 0 turns ι_out = [0, x - 1; 1] at the kernel loop head into [0, x; 1]
  const Translation &t = filter();
  InvariantSet invs = t.infer.invs;
  invs.loops.at(1).ranges.at("out").hi = T::var("x");
  BuildResult b = build_derivation(t.plan, t.report.conv, invs, {});
  CHECK_FALSE(b.failures.empty());
  CheckResult c = check_derivation(b.d, {}, &t.source, &t.target_twostep);
  CHECK_FALSE(c.ok);
  bool inductive = false;
  for (auto &[path, msg] : c.failures)
    if (path.find("Tr-Kernel") != std::string::npos && path.size() > 16 &&
        path.compare(path.size() - 16, 16, "Tr-For/Tr-Conseq") == 0 &&
        msg.rfind("pre entailment", 0) == 0)
      inductive = true;
  CHECK(inductive);
}

TEST_CASE("single Tr-Assign derivation") {
  Derivation d;
  d.envs = {TypeEnv{{{"x", Ty::INT}}, {}}};
  Form post = parse_formula("x == 1");
  Subst s;
  s.ints["x"] = T::num(1);
  StmtPtr st = mk(Assign{"x", Expr::constant(1)});
  d.root.rule = rule::Assign;
  d.root.j = Judgment{0, subst(post, s), st, st, post};
  CheckResult c = check_derivation(d);
  CHECK_MESSAGE(c.ok, c.message);
  CHECK(c.nodes == 1);

  d.root.j.pre = post; // not [1/x]Φ
  CHECK_FALSE(check_derivation(d).ok);
  d.root.j.pre = subst(post, s);
  d.root.j.tgt = mk(Assign{"x", Expr::constant(2)});
  CHECK_FALSE(check_derivation(d).ok);
}

TEST_CASE("structural mutations are rejected") {
  const Translation &t = filter();
  auto rejected = [&](auto mutate) {
    Derivation d = t.derivation;
    mutate(d);
    return !check_derivation(d, {}, &t.source, &t.target_twostep).ok;
  };
  CHECK(rejected([](Derivation &d) { find_rule(d.root, rule::ReadMem)->rule = rule::Keep; }));
  CHECK(rejected([](Derivation &d) { find_rule(d.root, rule::InsRBuf)->rule = rule::InsMove; }));
  CHECK(rejected([](Derivation &d) {
    DNode *n = find_rule(d.root, rule::InsWBuf);
    n->j.pre = conjuncts(n->j.pre).back();
  }));
  CHECK(rejected([](Derivation &d) {
    DNode *n = find_rule(d.root, rule::For);
    n->inv = T::conj(n->inv, parse_formula("x <= 0"));
  }));
  CHECK(rejected([](Derivation &d) { d.conv.erase("out"); }));
  CHECK(rejected([](Derivation &d) { d.envs[1] = d.envs[0]; }));
  CHECK(rejected([](Derivation &d) {
    DNode *n = find_rule(d.root, rule::Seq);
    std::swap(n->premises[0], n->premises[1]);
  }));
  CHECK(rejected([](Derivation &d) { find_rule(d.root, rule::Kernel)->premises[0].j.env = 0; }));
}

TEST_CASE("source and target simulate each other") {
  const Translation &t = filter();
  std::mt19937_64 rng(7);
  for (int n = 1; n <= 16; ++n) {
    ExecInput in = sample_input(t.source, {{"N", n}}, rng);
    for (bool simplified : {true, false}) {
      SimResult r = simulate_pair(t, in, simplified);
      CHECK_MESSAGE(r.ok, "N=" << n << ": " << r.why);
    }
  }
}

TEST_CASE("a broken target is caught by simulation") {
  const Translation &t = filter();
  std::string txt = print_program(t.target);
  // drop the in-loop refill of b0: the buffer goes stale
  size_t at = txt.find("    b0 = in.read();\n");
  REQUIRE(at != std::string::npos);
  txt.erase(at, std::string("    b0 = in.read();\n").size());
  Program broken = parse_program(txt);
  std::mt19937_64 rng(1);
  SimResult r = simulate_pair(t.source, broken, t.derivation.envs[0], t.derivation.root.j.post,
                              t.report.conv, sample_input(t.source, {{"N", 3}}, rng));
  CHECK_FALSE(r.ok);
}

TEST_CASE("translating a translated program converts nothing") {
  const Translation &t = filter();
  Translation again = translate(Checked{t.target, typecheck(t.target)});
  CHECK(again.report.candidates.empty());
  CHECK(again.report.conv.empty());
  CHECK(program_equal(again.target, t.target));
}

TEST_CASE("data-dependent indices stay arrays") {
  Translation t = translate_text(R"(
param N >= 1;
rarr a, p;
warr o;
int x, i, v;
kernel {
  for (x = 0; x != N; x += 1) {
    i = p[x];
    v = a[i];
    o[x] = v;
  }
}
)");
  CHECK(t.report.conv.count("a") == 0);
  CHECK(t.report.given_up.count("a") == 1);
  CHECK(t.report.derivation_ok);
  CHECK(print_program(t.target).find("a[i]") != std::string::npos);
}

TEST_CASE("simplification only touches single-use buffers") {
  Program p = parse_program(R"(
rarr a; warr o; int x, y; buf b0, b1, b2;
b0 = a.read(); x = b0;
b1 = a.read(); y = b1; x = b1;
b2 = y; o.write(b2);
)");
  std::string s = print_program(simplify_target(p));
  CHECK(s.find("x = a.read();") != std::string::npos);
  CHECK(s.find("b1 = a.read();") != std::string::npos);
  CHECK(s.find("o.write(y);") != std::string::npos);
  CHECK(s.find("b0") == std::string::npos);
  CHECK(s.find("b2") == std::string::npos);
}

TEST_CASE("buffer-only mode converts every candidate without a derivation") {
  TranslateConfig cfg;
  cfg.buffer_only = true;
  cfg.simplify = false;
  Translation t = translate_text(slurp(STREAMLINE_CORPUS_DIR "/filter.hdsl"), cfg);
  CHECK(t.report.conv == t.report.candidates);
  CHECK(t.report.mode == "buffer-only");
  CHECK(program_equal(t.target, t.plan.target(t.report.conv)));
}
