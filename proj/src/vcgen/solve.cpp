#include "streamline/vcgen/solve.hpp"

#include <algorithm>

namespace streamline {

std::string Coeffs::str() const {
  std::string s = "(";
  for (size_t i = 0; i < c.size(); ++i) s += (i ? ", " : "") + streamline::str(c[i]);
  return s + ")";
}

namespace {
IntT affine(const IntT &c0, const IntT &c1, const std::string &x) {
  if (x.empty()) return normalize(c0);
  return normalize(T::add(c0, T::op(BinOp::Mul, c1, T::var(x))));
}
std::string point_name(int p) { return p == kFinalPoint ? "end" : "L" + std::to_string(p); }
} // namespace

RangeT TemplateSlot::range(const Coeffs &k) const {
  return {affine(k.c[0], k.c[1], x), affine(k.c[2], k.c[3], x), affine(k.c[4], k.c[5], x)};
}

std::string TemplateSlot::unknown(int i) const {
  return "?c_" + point_name(point) + "_" + array + "_" + std::to_string(i);
}

Form TemplateSlot::template_formula() const {
  if (fixed) return T::seqeq(T::svar(array), fixed_range.term());
  auto part = [&](int i) {
    IntT c0 = T::var(unknown(2 * i));
    if (x.empty() || !moving) return c0;
    return T::add(c0, T::op(BinOp::Mul, T::var(unknown(2 * i + 1)), T::var(x)));
  };
  return T::seqeq(T::svar(array), T::range(part(0), part(1), part(2)));
}

std::vector<Int> slope_domain(int range) {
  std::vector<Int> d{0};
  for (int k = 1; k <= range; ++k) {
    d.push_back(k);
    d.push_back(-k);
  }
  return d;
}

std::vector<IntT> coefficient_domain(const BufferPlan &plan, int range) {
  std::vector<LinExpr> seen;
  std::vector<IntT> out;
  auto add = [&](const LinExpr &l) {
    for (auto &v : l.vars())
      if (!plan.env.is_param(v)) return;
    if (std::find(seen.begin(), seen.end(), l) != seen.end()) return;
    seen.push_back(l);
    out.push_back(l.term());
  };
  for (auto &k : slope_domain(range)) add(LinExpr(k));
  for (auto &li : plan.loops) {
    auto i = linearize(li.init), b = linearize(li.bound);
    if (i) add(*i);
    if (b) add(*b);
    if (b) add(*b - LinExpr(li.step));
    if (i) add(*i - LinExpr(li.step));
  }
  return out;
}

std::vector<Coeffs> trace_candidates(const std::vector<IntT> &d0, bool moving, const std::string &x,
                                     const std::vector<std::pair<RegFile, std::vector<Int>>> &obs,
                                     size_t max, int range) {
  const std::vector<Int> slopes = moving && !x.empty() ? slope_domain(range) : std::vector<Int>{0};
  size_t nd = d0.size(), ns = slopes.size();
  // value of d0[i] + slopes[j] * x at each observation
  MapHeap nohp;
  Witness now;
  std::vector<std::vector<std::optional<Int>>> dv(obs.size());
  std::vector<Int> xv(obs.size());
  std::vector<bool> arith(obs.size(), true);
  for (size_t o = 0; o < obs.size(); ++o) {
    for (auto &d : d0) dv[o].push_back(eval_int(EvalCtx{obs[o].first, nohp, now}, d));
    if (!x.empty()) {
      auto it = obs[o].first.find(x);
      xv[o] = it == obs[o].first.end() ? Int(0) : it->second;
    }
    const auto &s = obs[o].second;
    for (size_t k = 2; k < s.size(); ++k)
      if (s[k] - s[k - 1] != s[1] - s[0]) arith[o] = false;
    if (!arith[o]) return {};
  }
  auto val = [&](size_t o, size_t i, size_t j) -> std::optional<Int> {
    if (!dv[o][i]) return std::nullopt;
    return *dv[o][i] + slopes[j] * xv[o];
  };
  std::vector<std::pair<size_t, size_t>> los, sts, his;
  for (size_t i = 0; i < nd; ++i)
    for (size_t j = 0; j < ns; ++j) {
      bool lo_ok = true, st_ok = true, hi_ok = true;
      for (size_t o = 0; o < obs.size(); ++o) {
        auto v = val(o, i, j);
        const auto &s = obs[o].second;
        if (!v) {
          lo_ok = st_ok = hi_ok = false;
          break;
        }
        if (!s.empty() && *v != s[0]) lo_ok = false;
        if (*v == 0 || (s.size() >= 2 && *v != s[1] - s[0])) st_ok = false;
      }
      if (lo_ok) los.push_back({i, j});
      if (st_ok) sts.push_back({i, j});
      if (hi_ok) his.push_back({i, j});
    }
  std::vector<Coeffs> out;
  for (auto &lo : los)
    for (auto &hi : his)
      for (auto &st : sts) {
        bool ok = true;
        for (size_t o = 0; o < obs.size() && ok; ++o) {
          Int L = *val(o, lo.first, lo.second), H = *val(o, hi.first, hi.second),
              S = *val(o, st.first, st.second);
          Int len = 0;
          if (S > 0 && H >= L) len = (H - L) / S + 1;
          if (S < 0 && H <= L) len = (L - H) / (-S) + 1;
          const auto &s = obs[o].second;
          if (len != Int(s.size())) ok = false;
          else if (s.size() >= 2 && s[1] - s[0] != S) ok = false;
        }
        if (!ok) continue;
        Coeffs k;
        k.c = {d0[lo.first], T::num(slopes[lo.second]), d0[hi.first], T::num(slopes[hi.second]),
               d0[st.first], T::num(slopes[st.second])};
        out.push_back(k);
        if (out.size() >= max) return out;
      }
  return out;
}

// ---------------------------------------------------------------- facts

namespace {

std::vector<Form> own_bounds(const LoopInfo &li) {
  std::set<std::string> vs;
  li.init.vars(vs);
  li.bound.vars(vs);
  for (auto &v : vs)
    if (li.assigned.count(v)) return {};
  IntT x = T::var(li.x), e = T::of_expr(li.init), m = T::of_expr(li.bound);
  std::vector<Form> out;
  if (li.step > 0) {
    out.push_back(T::le(e, x));
    out.push_back(T::le(x, m));
  } else {
    out.push_back(T::le(x, e));
    out.push_back(T::le(m, x));
  }
  Int n = li.step < 0 ? Int(-li.step) : li.step;
  if (n > 1) out.push_back(T::eq(T::op(BinOp::Mod, T::sub(x, e), T::num(n)), T::num(0)));
  return out;
}

struct Annotation {
  std::map<std::string, RangeT> ranges;
  std::vector<Form> facts;
};

Annotation parse_annotation(const LoopInfo &li, std::vector<std::string> *log) {
  Annotation a;
  if (li.annotation.empty()) return a;
  Form f;
  try {
    f = parse_formula(li.annotation);
  } catch (const Error &e) {
    if (log) log->push_back("L" + std::to_string(li.id) + ": annotation ignored: " + e.what());
    return a;
  }
  for (auto &c : conjuncts(f)) {
    if (c->k == Formula::K::SeqEq) {
      const SeqT *v = nullptr, *r = nullptr;
      if (c->s->k == SeqTerm::K::Var && c->s2->k == SeqTerm::K::Range) v = &c->s, r = &c->s2;
      else if (c->s2->k == SeqTerm::K::Var && c->s->k == SeqTerm::K::Range) v = &c->s2, r = &c->s;
      if (v) {
        a.ranges[(*v)->name] = {(*r)->lo, (*r)->hi, (*r)->step};
        continue;
      }
    }
    FreeVars fv = free_vars(c);
    if (fv.arrays.empty() && fv.seqs.empty()) a.facts.push_back(c);
  }
  return a;
}

} // namespace

std::map<int, std::vector<Form>> candidate_facts(const BufferPlan &plan) {
  std::map<int, std::vector<Form>> out;
  std::vector<Form> pf = param_facts(plan.env);
  for (auto &li : plan.loops) {
    std::vector<Form> fs = own_bounds(li);
    for (auto &f : parse_annotation(li, nullptr).facts) fs.push_back(f);
    for (int p = li.parent; p >= 0; p = plan.loop(p).parent) {
      const LoopInfo &outer = plan.loop(p);
      for (auto &f : own_bounds(outer)) {
        FreeVars fv = free_vars(f);
        bool stable = true;
        for (auto &v : fv.ints)
          if (li.assigned.count(v)) stable = false;
        if (stable) fs.push_back(f);
      }
    }
    for (auto &f : pf) fs.push_back(f);
    std::vector<Form> dedup;
    std::set<std::string> seen;
    for (auto &f : fs) {
      Form n = normalize(f);
      if (seen.insert(str(n)).second) dedup.push_back(n);
    }
    out[li.id] = dedup;
  }
  return out;
}

// ---------------------------------------------------------------- search

std::vector<VcStatus> check_vcs(const BufferPlan &plan, const std::set<std::string> &conv,
                                const InvariantSet &invs, const SampleConfig &cfg) {
  std::vector<VcStatus> out;
  for (auto &vc : gen_vcs(plan, conv, invs)) {
    std::vector<Form> cs;
    for (auto &o : vc.concl) cs.push_back(normalize(o.f));
    auto r = check_sampled(vc.hyp, cs, plan.env, cfg);
    // a hypothesis no sampled state satisfies proves nothing
    if (r.valid && r.states == 0) out.push_back({vc, false, "no state satisfies the hypothesis", {}});
    else out.push_back({vc, r.valid, r.counterexample, r.failed});
  }
  return out;
}

void reverify_smt(std::vector<VcStatus> &st, const SmtConfig &cfg) {
  for (auto &s : st) {
    if (!s.valid) continue;
    auto r = smt_entails(s.vc.hyp, normalize(conj_of(s.vc.concl)), cfg);
    s.smt = smt_verdict_name(r.verdict);
    s.smt_hash = r.query_hash;
    if (r.verdict != SmtVerdict::Invalid) continue;
    s.valid = false;
    s.counterexample = "refuted by the external solver";
    for (size_t i = 0; i < s.vc.concl.size(); ++i)
      if (smt_entails(s.vc.hyp, normalize(s.vc.concl[i].f), cfg).verdict == SmtVerdict::Invalid)
        s.failed.push_back(i);
  }
}

namespace {

struct Search {
  const BufferPlan &plan;
  const std::set<std::string> &conv;
  const InferConfig &cfg;
  const SmtConfig *smt;
  std::vector<std::string> &log;
  std::vector<TemplateSlot> slots;
  std::map<int, std::vector<Form>> facts;
  std::map<int, std::vector<bool>> active;

  InvariantSet build() const {
    InvariantSet inv;
    inv.init = initial_assertion(plan, conv);
    inv.final_inv.facts = param_facts(plan.env);
    for (auto &li : plan.loops) {
      PointInv &p = inv.loops[li.id];
      p.buffer_facts = plan.buffer_facts(li.id, conv);
      const auto &fs = facts.at(li.id);
      const auto &on = active.at(li.id);
      for (size_t i = 0; i < fs.size(); ++i)
        if (on[i]) p.facts.push_back(fs[i]);
    }
    for (auto &s : slots) {
      PointInv &p = s.point == kFinalPoint ? inv.final_inv : inv.loops[s.point];
      p.ranges[s.array] = s.current();
    }
    return inv;
  }

  // Indices of `facts` as seen by PointInv::obls (active ones only).
  void drop_fact(int point, int idx) {
    auto &on = active.at(point);
    int k = -1;
    for (size_t i = 0; i < on.size(); ++i)
      if (on[i] && ++k == idx) {
        on[i] = false;
        log.push_back(point_name(point) + ": dropped fact " + str(facts.at(point)[i]));
        return;
      }
  }

  // true: solved. false: `blame` holds arrays that cannot be made to work.
  bool run(InvariantSet &out, std::vector<VcStatus> &statuses, std::set<std::string> &blame) {
    for (int round = 0; round < cfg.max_rounds; ++round) {
      InvariantSet inv = build();
      auto st = check_vcs(plan, conv, inv, cfg.sample);
      if (smt) {
        bool all_b = std::all_of(st.begin(), st.end(), [](auto &s) { return s.valid; });
        if (all_b) reverify_smt(st, *smt);
      }
      std::vector<std::pair<const VC *, Tag>> fails;
      bool any = false;
      for (auto &s : st) {
        if (s.valid) continue;
        any = true;
        for (auto i : s.failed) fails.push_back({&s.vc, s.vc.concl[i].tag});
        // vacuous: blame the templates the hypothesis came from
        if (s.failed.empty())
          for (auto &a : conv) fails.push_back({&s.vc, Tag{Tag::K::Array, a, s.vc.hyp_point, -1}});
        log.push_back(s.vc.label + " fails: " + s.counterexample);
      }
      if (!any) {
        out = inv;
        statuses = st;
        return true;
      }
      bool dropped = false;
      std::set<std::pair<int, int>> dropset;
      for (auto &[vc, tag] : fails)
        if (tag.k == Tag::K::Fact && tag.point >= 0) dropset.insert({tag.point, tag.index});
      for (auto it = dropset.rbegin(); it != dropset.rend(); ++it) {
        drop_fact(it->first, it->second);
        dropped = true;
      }
      if (dropped) continue;
      // implicated templates
      std::set<size_t> imp;
      std::set<std::string> arrays;
      for (auto &[vc, tag] : fails) {
        if (tag.k != Tag::K::Array) {
          for (auto &a : conv) arrays.insert(a);
          continue;
        }
        arrays.insert(tag.array);
        for (size_t i = 0; i < slots.size(); ++i) {
          const auto &s = slots[i];
          if (s.array != tag.array) continue;
          if (s.point == vc->hyp_point || s.point == tag.point || s.point == vc->loop) imp.insert(i);
        }
      }
      bool advanced = false;
      for (auto it = imp.rbegin(); it != imp.rend(); ++it) {
        TemplateSlot &s = slots[*it];
        if (s.fixed) continue;
        if (s.choice + 1 < s.candidates.size()) {
          ++s.choice;
          for (auto jt = imp.begin(); jt != imp.end(); ++jt)
            if (*jt > *it && !slots[*jt].fixed) slots[*jt].choice = 0;
          advanced = true;
          break;
        }
      }
      if (!advanced) {
        blame = arrays;
        return false;
      }
    }
    blame = conv;
    return false;
  }
};

} // namespace

InferResult infer_invariants(const BufferPlan &plan, std::set<std::string> conv,
                             const InferConfig &cfg) {
  InferResult res;
  auto all_facts = candidate_facts(plan);
  std::vector<IntT> d0 = coefficient_domain(plan, cfg.coeff_range);
  auto psets = trace_param_sets(plan.env, cfg.trace_lo, cfg.trace_hi);
  int fl = final_loop(plan.rel);
  const SmtConfig *smt = nullptr;
  if (cfg.smt) {
    if (solver_available(*cfg.smt)) {
      smt = &*cfg.smt;
      res.mode = "sampled+smt";
    } else {
      res.log.push_back("external solver " + solver_command(*cfg.smt) + " not found; sampled only");
    }
  }

  for (;;) {
    // traces
    std::vector<RelTrace> traces;
    std::map<std::string, std::string> errs;
    for (auto &ps : psets)
      for (int seed = 1; seed <= cfg.seeds; ++seed) {
        traces.push_back(run_rel_trace(plan, conv, ps, cfg.sample.seed + static_cast<uint64_t>(seed)));
        for (auto &[a, why] : traces.back().array_errors) errs.emplace(a, why);
      }
    if (!errs.empty()) {
      for (auto &[a, why] : errs) {
        res.given_up[a] = "trace: " + why;
        res.log.push_back("give up " + a + ": " + why);
        conv.erase(a);
      }
      continue;
    }

    Search s{plan, conv, cfg, smt, res.log, {}, {}, {}};
    // filter facts by observed heads
    for (auto &li : plan.loops) {
      std::vector<Form> keep;
      for (auto &f : all_facts[li.id]) {
        bool ok = true;
        MapHeap h;
        Witness w;
        for (auto &t : traces)
          for (auto &o : t.heads)
            if (o.point == li.id && ok && !eval_formula(o.regs, h, w, f)) ok = false;
        if (ok) keep.push_back(f);
      }
      s.facts[li.id] = keep;
      s.active[li.id] = std::vector<bool>(keep.size(), true);
    }

    // templates
    bool restart = false;
    std::vector<int> points;
    for (auto &li : plan.loops) points.push_back(li.id);
    if (fl < 0) points.push_back(kFinalPoint);
    for (int p : points) {
      Annotation ann;
      if (p >= 0) ann = parse_annotation(plan.loop(p), &res.log);
      for (auto &a : conv) {
        TemplateSlot t;
        t.point = p;
        t.array = a;
        if (p >= 0) {
          t.x = plan.loop(p).x;
          t.moving = plan.loop(p).touched.count(a) != 0;
        }
        auto ar = ann.ranges.find(a);
        if (ar != ann.ranges.end()) {
          t.fixed = true;
          t.fixed_range = {normalize(ar->second.lo), normalize(ar->second.hi),
                           normalize(ar->second.step)};
          s.slots.push_back(t);
          continue;
        }
        std::vector<std::pair<RegFile, std::vector<Int>>> obs;
        for (auto &tr : traces) {
          if (p == kFinalPoint) {
            if (tr.end) obs.push_back({tr.end->regs, tr.end->iseq.at(a)});
            continue;
          }
          for (auto &o : tr.heads)
            if (o.point == p) obs.push_back({o.regs, o.iseq.at(a)});
        }
        t.candidates = trace_candidates(d0, t.moving, t.x, obs, cfg.max_candidates, cfg.coeff_range);
        if (t.candidates.empty()) {
          res.given_up[a] = "no range template fits the index sequence at " + point_name(p);
          res.log.push_back("give up " + a + ": " + res.given_up[a]);
          conv.erase(a);
          restart = true;
          break;
        }
        s.slots.push_back(t);
      }
      if (restart) break;
    }
    if (restart) continue;

    std::set<std::string> blame;
    InvariantSet inv;
    std::vector<VcStatus> st;
    if (s.run(inv, st, blame)) {
      res.ok = true;
      res.conv = conv;
      res.invs = inv;
      res.templates = s.slots;
      res.vcs = st;
      return res;
    }
    if (conv.empty() || blame.empty()) {
      res.ok = false;
      res.conv = conv;
      res.templates = s.slots;
      res.log.push_back("no invariant found even without conversions");
      return res;
    }
    for (auto &a : blame) {
      if (!conv.count(a)) continue;
      res.given_up[a] = "verification conditions could not be discharged";
      res.log.push_back("give up " + a);
      conv.erase(a);
    }
  }
}

} // namespace streamline
