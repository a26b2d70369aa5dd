#include "CLI11.hpp"
#include "json.hpp"

#include "streamline/emit/emit.hpp"
#include "streamline/frontend/parser.hpp"
#include "streamline/translate/translate.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace streamline;
namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

// exit codes
constexpr int kOk = 0, kInput = 1, kVerify = 2, kMismatch = 3, kStuck = 4;

std::string slurp(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path &p, const std::string &text) {
  std::ofstream out(p);
  if (!out) throw Error("cannot write " + p.string());
  out << text;
  if (!text.empty() && text.back() != '\n') out << "\n";
}

struct SolverOpts {
  bool smt = false;
  std::string path;
  int timeout_ms = 10000;
  std::string dump;

  void add(CLI::App *c) {
    c->add_flag("--smt", smt, "Re-verify with the external solver ($STREAMLINE_SOLVER or z3)");
    c->add_option("--solver-path", path, "Solver binary; implies --smt");
    c->add_option("--solver-timeout-ms", timeout_ms, "Per-query solver timeout")->capture_default_str();
    c->add_option("--dump-smt", dump, "Write every solver query to this directory");
  }
  std::optional<SmtConfig> config() const {
    if (!smt && path.empty() && dump.empty()) return std::nullopt;
    SmtConfig s;
    s.solver_path = path;
    s.timeout_ms = timeout_ms;
    s.dump_dir = dump;
    if (!dump.empty()) fs::create_directories(dump);
    return s;
  }
};

struct TranslateOpts {
  bool buffer_only = false, no_simplify = false;
  int coeff_range = 2;
  std::string annotate;
  uint64_t seed = 0;
  SolverOpts solver;

  void add(CLI::App *c) {
    c->add_flag("--buffer-only", buffer_only, "Stop after buffer insertion; no invariants, no derivation");
    c->add_flag("--no-simplify", no_simplify, "Keep the two-step buffer form in the target");
    c->add_option("--coeff-range", coeff_range, "Integer template coefficients range over [-R, R]")
        ->check(CLI::Range(1, 8))
        ->capture_default_str();
    c->add_option("--annotate", annotate, "File of 'L<loop>: <formula>' invariant hints");
    c->add_option("--seed", seed, "Seed of the sampled validity check")->capture_default_str();
    solver.add(c);
  }
  TranslateConfig config() const {
    TranslateConfig cfg;
    cfg.buffer_only = buffer_only;
    cfg.simplify = !no_simplify;
    cfg.infer.coeff_range = coeff_range;
    cfg.infer.sample.seed = seed;
    cfg.infer.smt = solver.config();
    return cfg;
  }
  Checked load(const std::string &path) const {
    Checked c = load_program(slurp(path));
    if (!annotate.empty()) {
      Program p = annotate_loops(c.prog, parse_annotations(slurp(annotate)));
      c = Checked{p, typecheck(p)};
    }
    return c;
  }
};

ojson counters(const std::map<std::string, AccessCounters> &m) {
  ojson j = ojson::object();
  for (auto &[a, c] : m)
    j[a] = {{"heap_reads", c.heap_reads},
            {"heap_writes", c.heap_writes},
            {"stream_reads", c.stream_reads},
            {"stream_writes", c.stream_writes}};
  return j;
}

ojson input_json(const ExecInput &in) { return input_to_json(in); }

// ---- translate ----

int cmd_translate(const std::string &path, const TranslateOpts &o, const std::string &out_dir,
                  std::string name, const EmitConfig &ecfg, bool json) {
  Translation t = translate(o.load(path), o.config());
  if (name.empty()) name = fs::path(path).stem().string();
  fs::create_directories(out_dir);
  fs::path dir(out_dir);
  spit(dir / (name + ".target.hdsl"), print_program(t.target));
  spit(dir / (name + ".report.json"), report_json(t.report, 2));
  if (!o.buffer_only) {
    spit(dir / (name + ".deriv.json"), derivation_to_json(t.derivation));
    EmitConfig e = ecfg;
    e.name = ecfg.name.empty() ? name : ecfg.name;
    for (char &c : e.name)
      if (!std::isalnum(static_cast<unsigned char>(c))) c = '_';
    e.style = o.no_simplify ? EmitStyle::Buffered : EmitStyle::Streamed;
    spit(dir / (name + "_kernel.cpp"), emit_kernel(t.target, e));
    spit(dir / (name + "_host.cpp"), emit_host(t.target, e));
    spit(dir / (name + "_baseline.cpp"), emit_baseline(t.source, e));
  }

  const Report &r = t.report;
  bool ok = o.buffer_only || r.derivation_ok;
  if (json) {
    std::cout << report_json(r, 2) << "\n";
  } else {
    auto list = [](const std::set<std::string> &s) {
      std::string out;
      for (auto &a : s) out += (out.empty() ? "" : ", ") + a;
      return out.empty() ? std::string("-") : out;
    };
    std::cout << name << ": converted {" << list(r.conv) << "}";
    if (!r.given_up.empty()) {
      std::cout << ", kept as arrays:";
      for (auto &[a, why] : r.given_up) std::cout << " " << a << " (" << why << ")";
    }
    std::cout << "\n";
    for (auto &[id, f] : r.invariants) std::cout << "  L" << id << ": " << f << "\n";
    if (o.buffer_only)
      std::cout << "  buffer-only skeleton written to " << (dir / (name + ".target.hdsl")).string() << "\n";
    else
      std::cout << "  derivation: " << r.derivation_nodes << " nodes, "
                << (r.derivation_ok ? "checked" : "REJECTED: " + r.derivation_message) << "\n";
    std::cout << "  " << r.seconds << " s, mode " << r.mode << "\n";
  }
  return ok ? kOk : kVerify;
}

// ---- run ----

int cmd_run(const std::string &path, const std::string &input, bool trace, uint64_t fuel) {
  Program p = load_program(slurp(path)).prog;
  ExecInput in = parse_input(nlohmann::json::parse(slurp(input)));
  RunOptions ro;
  ro.trace = trace;
  ro.fuel = fuel;
  ExecReport r = run_program(p, in, ro);
  std::cout << r.to_json().dump(2) << "\n";
  if (r.status != ExecStatus::Ok) {
    std::cerr << status_name(r.status) << " at " << r.stuck_loc.str() << ": " << r.stuck_reason << "\n";
    return kStuck;
  }
  return kOk;
}

// ---- diff ----

struct Sampler {
  const Program &src;
  int n_lo, n_hi;
  uint64_t seed;

  std::map<std::string, Int> params(std::mt19937_64 &rng) const {
    std::map<std::string, Int> ps;
    for (auto &d : src.decls) {
      if (d.kind != DeclKind::Param) continue;
      Int lo = n_lo, hi = n_hi;
      if (d.min && *d.min > lo) lo = *d.min;
      if (d.max && *d.max < hi) hi = *d.max;
      if (hi < lo) hi = lo;
      std::uniform_int_distribution<long long> u(to_ll(lo), to_ll(hi));
      ps[d.name] = u(rng);
    }
    return ps;
  }
  ExecInput input(const std::map<std::string, Int> &ps, uint64_t k) const {
    std::mt19937_64 rng(seed * 1000003ULL + k);
    return sample_input(src, ps, rng);
  }
};

int cmd_diff(const std::string &path, const TranslateOpts &o, const std::string &target_path,
             int n_cases, int n_lo, int n_hi, bool json) {
  Translation t = translate(o.load(path), o.config());
  Program target = t.target;
  if (!target_path.empty()) target = load_program(slurp(target_path)).prog;
  const TypeEnv &host = t.derivation.envs.empty() ? t.plan.env : t.derivation.envs[0];
  Form fin = t.derivation.envs.empty() ? T::tru() : t.derivation.root.j.post;

  Sampler s{t.source, n_lo, n_hi, o.seed};
  std::mt19937_64 rng(o.seed);
  ojson cases = ojson::array();
  auto check = [&](const ExecInput &in) {
    return simulate_pair(t.source, target, host, fin, t.report.conv, in, kDefaultFuel);
  };

  int failures = 0;
  ojson first;
  for (int k = 0; k < n_cases; ++k) {
    auto ps = s.params(rng);
    // the first cases sweep the parameters upward from the minimum
    if (k < n_hi - n_lo + 1)
      for (auto &[name, v] : ps) {
        const Decl *d = t.source.find_decl(name);
        Int lo = d && d->min && *d->min > n_lo ? *d->min : Int(n_lo);
        v = lo + k;
        if (d && d->max && v > *d->max) v = *d->max;
      }
    ExecInput in = s.input(ps, static_cast<uint64_t>(k));
    SimResult r = check(in);
    ojson c;
    ojson pj = ojson::object();
    for (auto &[n, v] : ps) pj[n] = to_ll(v);
    c["params"] = pj;
    c["ok"] = r.ok;
    c["status"] = {status_name(r.src.status), status_name(r.tgt.status)};
    c["source_counts"] = counters(r.src.kernel_counts);
    c["target_counts"] = counters(r.tgt.kernel_counts);
    if (!r.ok) c["why"] = r.why;
    cases.push_back(c);
    if (r.ok) continue;
    ++failures;

    // shrink every parameter downward, smallest failing value wins
    std::map<std::string, Int> best = ps;
    ExecInput best_in = in;
    std::string why = r.why;
    for (auto &[name, v] : ps) {
      const Decl *d = t.source.find_decl(name);
      Int lo = d && d->min ? *d->min : Int(n_lo);
      for (Int m = lo; m < best[name]; ++m) {
        auto trial = best;
        trial[name] = m;
        ExecInput ti = s.input(trial, static_cast<uint64_t>(k));
        SimResult tr = check(ti);
        if (!tr.ok) {
          best = trial;
          best_in = ti;
          why = tr.why;
          break;
        }
      }
    }
    first = {{"case", k}, {"why", why}, {"input", input_json(best_in)}};
    break;
  }

  if (json) {
    ojson j;
    j["version"] = 1;
    j["program"] = path;
    j["report"] = ojson::parse(report_json(t.report, -1));
    j["cases"] = cases;
    j["passed"] = failures == 0;
    if (failures) j["counterexample"] = first;
    std::cout << j.dump(2) << "\n";
  } else if (failures) {
    std::cout << "FAIL after " << cases.size() << " cases: " << first["why"].get<std::string>() << "\n"
              << "minimized input: " << first["input"].dump() << "\n";
  } else {
    std::cout << "PASS " << cases.size() << " cases (converted " << t.report.conv.size() << " arrays)\n";
  }
  return failures ? kMismatch : kOk;
}

// ---- verify ----

int cmd_verify(const std::string &path, const std::string &src, const std::string &tgt,
               const SolverOpts &so, bool json) {
  Derivation d;
  try {
    d = derivation_from_json(slurp(path));
  } catch (const std::exception &e) {
    std::cerr << "malformed derivation: " << e.what() << "\n";
    return kInput;
  }
  std::optional<Program> sp, tp;
  if (!src.empty()) sp = load_program(slurp(src)).prog;
  if (!tgt.empty()) tp = load_program(slurp(tgt)).prog;
  CheckConfig cc;
  cc.smt = so.config();
  CheckResult r = check_derivation(d, cc, sp ? &*sp : nullptr, tp ? &*tp : nullptr);
  if (json) {
    ojson j{{"ok", r.ok},         {"nodes", r.nodes},     {"entailments", r.entailments},
            {"sampled", r.sampled}, {"smt", r.smt},       {"path", r.path},
            {"message", r.message}};
    ojson fs = ojson::array();
    for (auto &[p, m] : r.failures) fs.push_back({{"path", p}, {"message", m}});
    j["failures"] = fs;
    std::cout << j.dump(2) << "\n";
  } else if (r.ok) {
    std::cout << "PASS " << r.nodes << " nodes, " << r.entailments << " entailments\n";
  } else {
    std::cout << "FAIL at " << r.path << ": " << r.message << "\n";
    for (size_t i = 1; i < r.failures.size(); ++i)
      std::cout << "  also " << r.failures[i].first << ": " << r.failures[i].second << "\n";
  }
  return r.ok ? kOk : kVerify;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Array-to-stream translator with checked derivations"};
  app.require_subcommand(1);
  bool json = false;
  app.add_flag("--json", json, "Machine-readable output on stdout");

  auto *tr = app.add_subcommand("translate", "Translate a program and emit target, derivation and C++");
  std::string tr_file, out_dir = ".", name;
  TranslateOpts tr_opts;
  EmitConfig ecfg;
  ecfg.name.clear();
  tr->add_option("file", tr_file, "Program")->required()->check(CLI::ExistingFile);
  tr->add_option("-o,--out-dir", out_dir, "Output directory")->capture_default_str();
  tr->add_option("--name", name, "Base name of the output files (default: file stem)");
  tr->add_option("--kernel-name", ecfg.name, "Name of the emitted kernel function");
  tr->add_option("--width", ecfg.width, "Word width of the emitted code")
      ->check(CLI::IsMember({8, 16, 32, 64}))
      ->capture_default_str();
  tr->add_option("--depth", ecfg.depth, "Stream depth pragma, 0 for none")->capture_default_str();
  tr_opts.add(tr);

  auto *run = app.add_subcommand("run", "Execute a program on a JSON input");
  std::string run_file, run_input;
  bool trace = false;
  uint64_t fuel = kDefaultFuel;
  run->add_option("file", run_file, "Program")->required()->check(CLI::ExistingFile);
  run->add_option("input", run_input, "Input JSON")->required()->check(CLI::ExistingFile);
  run->add_flag("--trace", trace, "Record every heap and stream access");
  run->add_option("--fuel", fuel, "Step limit")->capture_default_str();

  auto *df = app.add_subcommand("diff", "Differential test of a program against its translation");
  std::string df_file, df_target;
  int n_cases = 200, n_lo = 1, n_hi = 32;
  TranslateOpts df_opts;
  df->add_option("file", df_file, "Program")->required()->check(CLI::ExistingFile);
  df->add_option("--target", df_target, "Compare against this target instead of the translation");
  df->add_option("--n-cases", n_cases, "Number of sampled inputs")->capture_default_str();
  df->add_option("--n-min", n_lo, "Smallest parameter value")->capture_default_str();
  df->add_option("--n-max", n_hi, "Largest parameter value")->capture_default_str();
  df_opts.add(df);

  auto *vf = app.add_subcommand("verify", "Check a derivation file");
  std::string vf_file, vf_src, vf_tgt;
  SolverOpts vf_solver;
  vf->add_option("file", vf_file, "Derivation JSON")->required()->check(CLI::ExistingFile);
  vf->add_option("--source", vf_src, "Require the derivation's source to be this program");
  vf->add_option("--target", vf_tgt, "Require the derivation's target to be this program");
  vf_solver.add(vf);

  for (auto *c : {tr, run, df, vf}) c->add_flag("--json", json, "Machine-readable output on stdout");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*tr) return cmd_translate(tr_file, tr_opts, out_dir, name, ecfg, json);
    if (*run) return cmd_run(run_file, run_input, trace, fuel);
    if (*df) return cmd_diff(df_file, df_opts, df_target, n_cases, n_lo, n_hi, json);
    if (*vf) return cmd_verify(vf_file, vf_src, vf_tgt, vf_solver, json);
  } catch (const TypeError &e) {
    for (auto &d : e.diagnostics) std::cerr << "type error: " << d << "\n";
    return kInput;
  } catch (const ParseError &e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kInput;
  } catch (const nlohmann::json::exception &e) {
    std::cerr << "bad JSON: " << e.what() << "\n";
    return kInput;
  } catch (const Error &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInput;
  }
  return kOk;
}
