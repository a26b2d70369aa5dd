#include "streamline/vcgen/validity.hpp"

#include "streamline/assertions/linear.hpp"

#include <algorithm>
#include <functional>
#include <sstream>
#include <unordered_map>

namespace streamline {

// ---------------------------------------------------------------- propositional

namespace {

class Cnf {
public:
  std::vector<std::vector<int>> clauses;
  int nvars = 0;

  int lit(const Form &f) {
    switch (f->k) {
    case Formula::K::True:
      if (!true_var_) {
        true_var_ = ++nvars;
        clauses.push_back({true_var_});
      }
      return true_var_;
    case Formula::K::Not: return -lit(f->kids[0]);
    case Formula::K::And: {
      auto c = cache_.find(f.get());
      if (c != cache_.end()) return c->second;
      std::vector<int> ks;
      for (auto &k : f->kids) ks.push_back(lit(k));
      int v = ++nvars;
      std::vector<int> back{v};
      for (int k : ks) {
        clauses.push_back({-v, k});
        back.push_back(-k);
      }
      clauses.push_back(back);
      cache_[f.get()] = v;
      return v;
    }
    default: {
      std::string key = str(f);
      auto it = atoms_.find(key);
      if (it != atoms_.end()) return it->second;
      return atoms_[key] = ++nvars;
    }
    }
  }

private:
  int true_var_ = 0;
  std::unordered_map<std::string, int> atoms_;
  std::unordered_map<const Formula *, int> cache_;
};

struct Dpll {
  const std::vector<std::vector<int>> &cl;
  long budget = 200000;

  // 0 unassigned, 1 true, -1 false
  bool sat(std::vector<int8_t> a) {
    if (--budget < 0) return true; // give up: report "maybe satisfiable"
    for (;;) {
      bool changed = false;
      int pick = 0;
      for (auto &c : cl) {
        int unassigned = 0, last = 0;
        bool satisfied = false;
        for (int l : c) {
          int v = a[static_cast<size_t>(std::abs(l))];
          if (v == 0) {
            ++unassigned;
            last = l;
          } else if ((v > 0) == (l > 0)) {
            satisfied = true;
            break;
          }
        }
        if (satisfied) continue;
        if (unassigned == 0) return false;
        if (unassigned == 1) {
          a[static_cast<size_t>(std::abs(last))] = last > 0 ? 1 : -1;
          changed = true;
        } else if (!pick) {
          pick = last;
        }
      }
      if (changed) continue;
      if (!pick) return true;
      std::vector<int8_t> b = a;
      b[static_cast<size_t>(std::abs(pick))] = pick > 0 ? 1 : -1;
      if (sat(std::move(b))) return true;
      a[static_cast<size_t>(std::abs(pick))] = pick > 0 ? -1 : 1;
    }
  }
};

} // namespace

bool prove_propositional(const Form &hyp, const Form &concl) {
  if (equal(hyp, concl)) return true;
  Cnf cnf;
  int h = cnf.lit(hyp), c = cnf.lit(concl);
  cnf.clauses.push_back({h});
  cnf.clauses.push_back({-c});
  Dpll d{cnf.clauses};
  std::vector<int8_t> a(static_cast<size_t>(cnf.nvars) + 1, 0);
  bool s = d.sat(a);
  return !s && d.budget >= 0;
}

// ---------------------------------------------------------------- sampling

namespace {

struct LinAtom {
  LinExpr e;
  bool eq = false; // e == 0, else e <= 0
};

struct Sampler {
  const TypeEnv &env;
  const SampleConfig &cfg;
  std::vector<Form> hyps;
  const std::vector<Form> &concl;
  Form hyp;

  std::vector<LinAtom> lin;
  std::map<std::string, IntT> bufdef;
  std::map<std::string, SeqT> binding;
  std::set<std::string> seqs;
  std::vector<std::string> params, regs;

  SampleResult res;
  std::vector<bool> failed;
  bool stop = false;

  Sampler(const TypeEnv &e, const SampleConfig &c, const Form &h, const std::vector<Form> &cs)
      : env(e), cfg(c), concl(cs), hyp(normalize(h)) {
    hyps = conjuncts(hyp);
    FreeVars fv;
    free_vars(hyp, fv);
    for (auto &f : concl) free_vars(f, fv);
    seqs = fv.seqs;
    for (auto &f : hyps) classify(f);
    for (auto &v : fv.ints) {
      if (bufdef.count(v)) continue;
      (env.is_param(v) ? params : regs).push_back(v);
    }
    failed.assign(concl.size(), false);
  }

  static bool has_memory(const IntT &t) {
    FreeVars fv;
    free_vars(t, fv);
    return !fv.arrays.empty() || !fv.seqs.empty();
  }

  void classify(const Form &f) {
    using K = Formula::K;
    if (f->k == K::SeqEq) {
      if (f->s->k == SeqTerm::K::Var && !binding.count(f->s->name)) binding[f->s->name] = f->s2;
      else if (f->s2->k == SeqTerm::K::Var && !binding.count(f->s2->name))
        binding[f->s2->name] = f->s;
      return;
    }
    if (f->k == K::Eq) {
      for (int side = 0; side < 2; ++side) {
        const IntT &v = side ? f->b : f->a, &t = side ? f->a : f->b;
        if (v->k == IntTerm::K::Var && !env.is_param(v->name) && has_memory(t) &&
            !bufdef.count(v->name)) {
          bufdef[v->name] = t;
          return;
        }
      }
      auto l = linearize(f->a), r = linearize(f->b);
      if (l && r) lin.push_back({*l - *r, true});
      return;
    }
    if (f->k == K::Le) {
      auto l = linearize(f->a), r = linearize(f->b);
      if (l && r) lin.push_back({*l - *r, false});
      return;
    }
    if (f->k == K::Not && f->kids[0]->k == K::Le) {
      const Form &g = f->kids[0];
      auto l = linearize(g->a), r = linearize(g->b);
      if (l && r) lin.push_back({*r - *l + LinExpr(1), false});
    }
  }

  // value of e with exactly `v` unknown: returns coefficient of v and the rest
  static bool split(const LinExpr &e, const RegFile &as, const std::string &v, Int &cv, Int &rest) {
    cv = 0;
    rest = e.c0;
    for (auto &[x, c] : e.coef) {
      if (x == v) {
        cv = c;
        continue;
      }
      auto it = as.find(x);
      if (it == as.end()) return false;
      rest += c * it->second;
    }
    return cv != 0;
  }

  bool consistent(const RegFile &as) const {
    for (auto &a : lin) {
      Int s = a.e.c0;
      bool all = true;
      for (auto &[x, c] : a.e.coef) {
        auto it = as.find(x);
        if (it == as.end()) {
          all = false;
          break;
        }
        s += c * it->second;
      }
      if (!all) continue;
      if (a.eq ? s != 0 : s > 0) return false;
    }
    return true;
  }

  static Int floor_div(const Int &a, const Int &b) {
    Int q = div_trunc(a, b);
    if (mod_trunc(a, b) != 0 && ((a < 0) != (b < 0))) q -= 1;
    return q;
  }
  static Int ceil_div(const Int &a, const Int &b) { return -floor_div(-a, b); }

  void values_for(const std::string &v, const RegFile &as, const Int &P, std::vector<Int> &out,
                  bool &determined) const {
    std::optional<Int> lb, ub;
    determined = false;
    for (auto &a : lin) {
      Int cv, rest;
      if (!split(a.e, as, v, cv, rest)) continue;
      if (a.eq) {
        determined = true;
        out.clear();
        if (mod_trunc(rest, cv) == 0) out.push_back(div_trunc(-rest, cv));
        return;
      }
      // cv * v + rest <= 0
      if (cv > 0) {
        Int b = floor_div(-rest, cv);
        if (!ub || b < *ub) ub = b;
      } else {
        Int b = ceil_div(rest, -cv);
        if (!lb || b > *lb) lb = b;
      }
    }
    Int span = 2 * P + 8;
    Int lo, hi;
    if (lb && ub) {
      lo = *lb;
      hi = std::min<Int>(*ub, *lb + span);
    } else if (lb) {
      lo = *lb;
      hi = std::max<Int>(*lb, 2 * P + 2);
      if (hi - lo > span) hi = lo + span;
    } else if (ub) {
      hi = *ub;
      lo = std::min<Int>(*ub, Int(-2));
      if (hi - lo > span) lo = hi - span;
    } else {
      lo = -cfg.small;
      hi = cfg.small;
    }
    for (Int k = lo; k <= hi; ++k) out.push_back(k);
  }

  bool bounded(const std::string &v, const RegFile &as) const {
    for (auto &a : lin) {
      Int cv, rest;
      if (split(a.e, as, v, cv, rest)) return true;
    }
    return false;
  }

  void leaf(RegFile &as) {
    for (int seed = 1; seed <= cfg.seeds && !stop; ++seed) {
      SeededHeap heap((cfg.seed + static_cast<uint64_t>(seed)) * 0x9e3779b97f4a7c15ULL);
      Witness empty;
      RegFile r = as;
      bool ok = true;
      for (auto &[b, t] : bufdef) {
        auto v = eval_int(EvalCtx{r, heap, empty}, t);
        if (!v) {
          ok = false;
          break;
        }
        r[b] = *v;
      }
      if (!ok) continue;
      Witness w;
      for (auto &a : seqs) {
        auto it = binding.find(a);
        if (it == binding.end()) {
          w[a] = {};
          continue;
        }
        auto s = eval_seq(EvalCtx{r, heap, empty}, it->second);
        if (!s) {
          ok = false;
          break;
        }
        w[a] = *s;
      }
      if (!ok) continue;
      EvalCtx c{r, heap, w};
      if (!eval_formula(c, hyp)) continue;
      ++res.states;
      for (size_t i = 0; i < concl.size(); ++i) {
        if (failed[i]) continue;
        if (!eval_formula(c, concl[i])) {
          failed[i] = true;
          res.failed.push_back(i);
          if (res.counterexample.empty()) res.counterexample = describe(r, w, seed);
        }
      }
      if (res.failed.size() == concl.size() || res.states >= cfg.max_states) stop = true;
    }
  }

  static std::string describe(const RegFile &r, const Witness &w, int seed) {
    std::ostringstream o;
    bool first = true;
    for (auto &[k, v] : r) {
      o << (first ? "" : ", ") << k << "=" << to_string(v);
      first = false;
    }
    for (auto &[a, s] : w) {
      o << ", i_" << a << "=<";
      for (size_t i = 0; i < s.size() && i < 8; ++i) o << (i ? "," : "") << to_string(s[i]);
      if (s.size() > 8) o << ",...";
      o << ">";
    }
    o << ", heap seed " << seed;
    return o.str();
  }

  void dfs(RegFile &as, std::vector<std::string> &rest, const Int &P) {
    if (stop || !consistent(as)) return;
    if (rest.empty()) {
      leaf(as);
      return;
    }
    // choose: a determined register, else one with bounds, else the first
    size_t pick = 0;
    int best = -1;
    for (size_t i = 0; i < rest.size(); ++i) {
      std::vector<Int> tmp;
      bool det = false;
      int score = 0;
      for (auto &a : lin) {
        Int cv, r;
        if (split(a.e, as, rest[i], cv, r)) {
          score = std::max(score, a.eq ? 2 : 1);
        }
      }
      (void)det;
      if (score > best) {
        best = score;
        pick = i;
      }
    }
    std::string v = rest[pick];
    rest.erase(rest.begin() + static_cast<long>(pick));
    std::vector<Int> vals;
    bool det = false;
    values_for(v, as, P, vals, det);
    for (auto &k : vals) {
      as[v] = k;
      dfs(as, rest, P);
      if (stop) break;
    }
    as.erase(v);
    rest.insert(rest.begin() + static_cast<long>(pick), v);
  }

  void params_dfs(RegFile &as, size_t i, const Int &P) {
    if (stop) return;
    if (i == params.size()) {
      std::vector<std::string> rest = regs;
      dfs(as, rest, params.empty() ? Int(4) : P);
      return;
    }
    const std::string &p = params[i];
    ParamInfo info = env.params.at(p);
    Int lo = cfg.n_lo, hi = cfg.n_hi;
    if (info.min && *info.min > lo) lo = *info.min;
    if (info.max && *info.max < hi) hi = *info.max;
    if (lo > hi) hi = lo + (cfg.n_hi - cfg.n_lo);
    if (info.max && *info.max < hi) hi = *info.max;
    for (Int k = lo; k <= hi && !stop; ++k) {
      as[p] = k;
      if (consistent(as)) params_dfs(as, i + 1, std::max<Int>(P, k));
    }
    as.erase(p);
  }

  SampleResult run() {
    RegFile as;
    params_dfs(as, 0, 0);
    res.valid = res.failed.empty();
    std::sort(res.failed.begin(), res.failed.end());
    return res;
  }
};

} // namespace

SampleResult check_sampled(const Form &hyp, const std::vector<Form> &concl, const TypeEnv &env,
                           const SampleConfig &cfg) {
  Sampler s(env, cfg, hyp, concl);
  return s.run();
}

bool entails(const Form &hyp, const Form &concl, const TypeEnv &env, const SampleConfig &cfg,
             std::string *how, std::string *cex) {
  if (prove_propositional(hyp, concl)) {
    if (how) *how = "propositional";
    return true;
  }
  auto r = check_sampled(hyp, conjuncts(normalize(concl)), env, cfg);
  if (how) *how = r.valid ? "sampled" : "refuted";
  if (cex) *cex = r.counterexample;
  return r.valid;
}

} // namespace streamline
