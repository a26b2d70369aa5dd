#include "streamline/vcgen/smt.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <unistd.h>

namespace streamline {

const char *smt_verdict_name(SmtVerdict v) {
  switch (v) {
  case SmtVerdict::Valid: return "valid";
  case SmtVerdict::Invalid: return "invalid";
  case SmtVerdict::Unknown: return "unknown";
  }
  return "?";
}

namespace {

std::string num(const Int &v) { return v < 0 ? "(- " + to_string(-v) + ")" : to_string(v); }
std::string q(const std::string &prefix, const std::string &n) { return "|" + prefix + n + "|"; }

std::string all(const std::vector<std::string> &cs) {
  std::vector<std::string> nz;
  for (auto &c : cs)
    if (c != "true") nz.push_back(c);
  if (nz.empty()) return "true";
  if (nz.size() == 1) return nz[0];
  std::string s = "(and";
  for (auto &c : nz) s += " " + c;
  return s + ")";
}

struct IntE {
  std::string v, def;
};
struct SeqE {
  std::string len, def;
  std::function<std::string(const std::string &)> at;
};

struct Encoder {
  int fresh = 0;

  std::string bound() { return "k!" + std::to_string(fresh++); }

  std::string arr(const ArrT &a, std::string &def) {
    if (a->k == ArrTerm::K::Var) return q("h_", a->name);
    std::string base = arr(a->base, def);
    IntE i = term(a->idx), v = term(a->val);
    def = all({def, i.def, v.def});
    return "(store " + base + " " + i.v + " " + v.v + ")";
  }

  IntE term(const IntT &t) {
    switch (t->k) {
    case IntTerm::K::Const: return {num(t->value), "true"};
    case IntTerm::K::Var: return {q("", t->name), "true"};
    case IntTerm::K::Op: {
      IntE a = term(t->a), b = term(t->b);
      std::string d = all({a.def, b.def});
      std::string trunc = "(ite (>= " + a.v + " 0) (div " + a.v + " " + b.v + ") (- (div (- " +
                          a.v + ") " + b.v + ")))";
      switch (t->op) {
      case BinOp::Add: return {"(+ " + a.v + " " + b.v + ")", d};
      case BinOp::Sub: return {"(- " + a.v + " " + b.v + ")", d};
      case BinOp::Mul: return {"(* " + a.v + " " + b.v + ")", d};
      case BinOp::Div: return {trunc, all({d, "(not (= " + b.v + " 0))"})};
      case BinOp::Mod:
        return {"(- " + a.v + " (* " + b.v + " " + trunc + "))",
                all({d, "(not (= " + b.v + " 0))"})};
      case BinOp::Lt: return {"(ite (< " + a.v + " " + b.v + ") 1 0)", d};
      case BinOp::Eq: return {"(ite (= " + a.v + " " + b.v + ") 1 0)", d};
      case BinOp::Le: return {"(ite (<= " + a.v + " " + b.v + ") 1 0)", d};
      }
      break;
    }
    case IntTerm::K::Select: {
      IntE i = term(t->a);
      std::string d = i.def;
      std::string a = arr(t->arr, d);
      return {"(select " + a + " " + i.v + ")", d};
    }
    case IntTerm::K::Head: {
      SeqE s = seq(t->seq);
      return {s.at("0"), all({s.def, "(> " + s.len + " 0)"})};
    }
    }
    throw Error("smt: unknown term");
  }

  SeqE seq(const SeqT &s) {
    switch (s->k) {
    case SeqTerm::K::Var: {
      std::string f = q("i_", s->name);
      return {q("len_", s->name), "true",
              [f](const std::string &k) { return "(select " + f + " " + k + ")"; }};
    }
    case SeqTerm::K::Nil: return {"0", "true", [](const std::string &) { return std::string("0"); }};
    case SeqTerm::K::ConsHead: {
      IntE t = term(s->t);
      SeqE r = seq(s->rest);
      auto ra = r.at;
      std::string tv = t.v;
      return {"(+ " + r.len + " 1)", all({t.def, r.def}), [ra, tv](const std::string &k) {
                return "(ite (= " + k + " 0) " + tv + " " + ra("(- " + k + " 1)") + ")";
              }};
    }
    case SeqTerm::K::ConsTail: {
      IntE t = term(s->t);
      SeqE r = seq(s->rest);
      auto ra = r.at;
      std::string tv = t.v, len = r.len;
      return {"(+ " + r.len + " 1)", all({t.def, r.def}), [ra, tv, len](const std::string &k) {
                return "(ite (= " + k + " " + len + ") " + tv + " " + ra(k) + ")";
              }};
    }
    case SeqTerm::K::Tail: {
      SeqE r = seq(s->rest);
      auto ra = r.at;
      return {"(- " + r.len + " 1)", all({r.def, "(> " + r.len + " 0)"}),
              [ra](const std::string &k) { return ra("(+ " + k + " 1)"); }};
    }
    case SeqTerm::K::Range: {
      IntE lo = term(s->lo), hi = term(s->hi), st = term(s->step);
      std::string len = "(ite (> " + st.v + " 0) (ite (>= " + hi.v + " " + lo.v + ") (+ (div (- " +
                        hi.v + " " + lo.v + ") " + st.v + ") 1) 0) (ite (>= " + lo.v + " " + hi.v +
                        ") (+ (div (- " + lo.v + " " + hi.v + ") (- " + st.v + ")) 1) 0))";
      std::string l = lo.v, sv = st.v;
      return {len, all({lo.def, hi.def, st.def, "(not (= " + st.v + " 0))"}),
              [l, sv](const std::string &k) { return "(+ " + l + " (* " + k + " " + sv + "))"; }};
    }
    }
    throw Error("smt: unknown sequence");
  }

  std::string form(const Form &f) {
    switch (f->k) {
    case Formula::K::True: return "true";
    case Formula::K::Eq:
    case Formula::K::Le: {
      IntE a = term(f->a), b = term(f->b);
      std::string op = f->k == Formula::K::Eq ? "=" : "<=";
      return all({a.def, b.def, "(" + op + " " + a.v + " " + b.v + ")"});
    }
    case Formula::K::Mem: {
      IntE a = term(f->a);
      SeqE s = seq(f->s);
      std::string k = bound();
      return all({a.def, s.def,
                  "(exists ((" + k + " Int)) (and (<= 0 " + k + ") (< " + k + " " + s.len +
                      ") (= " + s.at(k) + " " + a.v + ")))"});
    }
    case Formula::K::SeqEq: {
      SeqE a = seq(f->s), b = seq(f->s2);
      std::string k = bound();
      return all({a.def, b.def, "(= " + a.len + " " + b.len + ")",
                  "(forall ((" + k + " Int)) (=> (and (<= 0 " + k + ") (< " + k + " " + a.len +
                      ")) (= " + a.at(k) + " " + b.at(k) + ")))"});
    }
    case Formula::K::And: {
      std::vector<std::string> cs;
      for (auto &k : f->kids) cs.push_back(form(k));
      return all(cs);
    }
    case Formula::K::Not: return "(not " + form(f->kids[0]) + ")";
    }
    throw Error("smt: unknown formula");
  }
};

} // namespace

std::string smt_query(const Form &hyp, const Form &concl) {
  FreeVars fv;
  free_vars(hyp, fv);
  free_vars(concl, fv);
  std::ostringstream o;
  o << "(set-option :produce-models true)\n";
  for (auto &v : fv.ints) o << "(declare-const " << q("", v) << " Int)\n";
  for (auto &a : fv.arrays) o << "(declare-const " << q("h_", a) << " (Array Int Int))\n";
  for (auto &a : fv.seqs) {
    o << "(declare-const " << q("i_", a) << " (Array Int Int))\n";
    o << "(declare-const " << q("len_", a) << " Int)\n";
    o << "(assert (>= " << q("len_", a) << " 0))\n";
  }
  Encoder e;
  o << "(assert " << e.form(hyp) << ")\n";
  o << "(assert (not " << e.form(concl) << "))\n";
  o << "(check-sat)\n";
  return o.str();
}

std::string query_hash(const std::string &query) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : query) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string solver_command(const SmtConfig &cfg) {
  if (!cfg.solver_path.empty()) return cfg.solver_path;
  if (const char *env = std::getenv("STREAMLINE_SOLVER"); env && *env) return env;
  return "z3";
}

namespace {

bool run_capture(const std::string &cmd, std::string &out) {
  FILE *p = popen(cmd.c_str(), "r");
  if (!p) return false;
  char buf[4096];
  size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) out.append(buf, n);
  int rc = pclose(p);
  return rc != -1;
}

std::string shell_quote(const std::string &s) {
  std::string o = "'";
  for (char c : s) o += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return o + "'";
}

} // namespace

bool solver_available(const SmtConfig &cfg) {
  std::string out;
  if (!run_capture(shell_quote(solver_command(cfg)) + " -version 2>/dev/null", out)) return false;
  return out.find("version") != std::string::npos || out.find("Z3") != std::string::npos;
}

SmtResult smt_entails(const Form &hyp, const Form &concl, const SmtConfig &cfg) {
  SmtResult r;
  std::string query;
  try {
    query = smt_query(hyp, concl);
  } catch (const Error &e) {
    r.detail = e.what();
    return r;
  }
  r.query_hash = query_hash(query);
  namespace fs = std::filesystem;
  fs::path file;
  bool keep = !cfg.dump_dir.empty();
  if (keep) {
    fs::create_directories(cfg.dump_dir);
    file = fs::path(cfg.dump_dir) / (r.query_hash + ".smt2");
  } else {
    file = fs::temp_directory_path() /
           ("streamline-" + std::to_string(getpid()) + "-" + r.query_hash + ".smt2");
  }
  {
    std::ofstream f(file);
    f << query;
  }
  std::string out;
  std::string cmd = shell_quote(solver_command(cfg)) + " -in -smt2 -t:" +
                    std::to_string(cfg.timeout_ms) + " < " + shell_quote(file.string()) + " 2>&1";
  bool ran = run_capture(cmd, out);
  if (!keep) fs::remove(file);
  while (!out.empty() && (out.back() == '\n' || out.back() == '\r')) out.pop_back();
  r.detail = out;
  if (!ran) r.detail = "solver could not be started";
  else if (out == "unsat") r.verdict = SmtVerdict::Valid;
  else if (out == "sat") r.verdict = SmtVerdict::Invalid;
  else if (out.empty()) r.detail = "solver produced no output";
  return r;
}

} // namespace streamline
