#include "streamline/translate/check.hpp"

#include <sstream>

namespace streamline {

namespace {

struct Reject {
  std::string msg;
};

[[noreturn]] void reject(const std::string &m) { throw Reject{m}; }
void need(bool c, const std::string &m) {
  if (!c) reject(m);
}

// Both sides as plain Seqs, so a single statement and a one-item block compare equal.
bool same_stmt(const StmtPtr &a, const StmtPtr &b) {
  if (!a || !b) return !a && !b;
  return stmt_equal(seq({a}), seq({b}));
}

bool equivalent(const Form &a, const Form &b) {
  if (same_formula(a, b)) return true;
  // printing and re-parsing may re-associate arithmetic; compare canonical forms
  return equal(normalize(T::conj(conjuncts(a))), normalize(T::conj(conjuncts(b))));
}

struct Checker {
  const Derivation &d;
  const CheckConfig &cfg;
  CheckResult res;
  std::vector<std::string> path;

  const TypeEnv &env(const DNode &n) {
    need(n.j.env >= 0 && n.j.env < static_cast<int>(d.envs.size()), "bad environment index");
    return d.envs[n.j.env];
  }

  void has_ty(const TypeEnv &g, const std::string &v, Ty t) {
    need(g.is(v, t), v + " must have type " + ty_name(t));
  }

  void int_expr(const TypeEnv &g, const Expr &e) {
    std::set<std::string> vs;
    e.vars(vs);
    for (auto &v : vs) has_ty(g, v, Ty::INT);
  }

  void schema(const Form &got, const Form &want, const std::string &what) {
    if (!equivalent(got, want))
      reject(what + " is " + str(got) + ", the rule requires " + str(want));
  }

  std::string where() const {
    std::string p;
    for (auto &s : path) p += (p.empty() ? "" : "/") + s;
    return p;
  }

  void entail(const Form &h, const Form &c, const std::string &role) {
    ++res.entailments;
    if (same_formula(h, c) || prove_propositional(h, c)) return;
    auto r = check_sampled(h, conjuncts(normalize(c)), d.envs.at(0), cfg.sample);
    ++res.sampled;
    auto fail = [&](const std::string &m) { res.failures.emplace_back(where(), role + " entailment " + m); };
    if (!r.valid) return fail("fails: " + str(c) + " (" + r.counterexample + ")");
    if (r.states == 0) return fail("has no state satisfying " + str(h));
    if (cfg.smt) {
      auto s = smt_entails(h, c, *cfg.smt);
      if (s.verdict != SmtVerdict::Valid)
        return fail(std::string("rejected by the external solver: ") + smt_verdict_name(s.verdict) + " " +
                    s.detail);
      ++res.smt;
    }
  }

  void premises(const DNode &n, size_t k) {
    need(n.premises.size() == k, n.rule + " takes " + std::to_string(k) + " premise(s)");
  }
  void insertion(const DNode &n, bool is) {
    need(!n.j.src == is, is ? "expected an insertion judgment" : "expected a source statement");
  }

  void node(const DNode &n, const std::string &label) {
    path.push_back(label);
    ++res.nodes;
    const TypeEnv &g = env(n);
    const Judgment &j = n.j;
    need(j.pre && j.post && j.tgt, "incomplete judgment");
    const std::string &r = n.rule;

    if (r == rule::ReadMem) {
      premises(n, 0);
      insertion(n, false);
      auto s = j.src->as<ReadArr>();
      auto t = j.tgt->as<Assign>();
      need(s && t && t->x == s->x && t->e.kind == Expr::Kind::Var, "shape x := a[e] => x := b");
      const std::string &b = t->e.name;
      has_ty(g, s->x, Ty::INT);
      has_ty(g, s->a, Ty::RARR);
      has_ty(g, b, Ty::BUF);
      int_expr(g, s->idx);
      need(d.conv.count(s->a), s->a + " is not converted");
      Subst sb;
      sb.ints[s->x] = T::var(b);
      schema(j.pre, T::conj(T::eq(T::var(b), T::sel(T::avar(s->a), T::of_expr(s->idx))), subst(j.post, sb)),
             "precondition");
    } else if (r == rule::WriteMem) {
      premises(n, 0);
      insertion(n, false);
      auto s = j.src->as<WriteArr>();
      auto t = j.tgt->as<Assign>();
      need(s && t && t->e.kind == Expr::Kind::Var && t->e.name == s->x, "shape a[e] := x => b := x");
      const std::string &b = t->x;
      has_ty(g, s->x, Ty::INT);
      has_ty(g, s->a, Ty::WARR);
      has_ty(g, b, Ty::BUF);
      int_expr(g, s->idx);
      need(d.conv.count(s->a), s->a + " is not converted");
      IntT e = T::of_expr(s->idx);
      Subst sb;
      sb.arrs[s->a] = T::upd(T::avar(s->a), e, T::var(s->x));
      sb.ints[b] = T::var(s->x);
      schema(j.pre, T::conj(T::notmem(e, T::svar(s->a)), subst(j.post, sb)), "precondition");
    } else if (r == rule::Assign) {
      premises(n, 0);
      insertion(n, false);
      auto s = j.src->as<Assign>();
      need(s && same_stmt(j.src, j.tgt), "shape x := e => x := e");
      has_ty(g, s->x, Ty::INT);
      int_expr(g, s->e);
      Subst sb;
      sb.ints[s->x] = T::of_expr(s->e);
      schema(j.pre, subst(j.post, sb), "precondition");
    } else if (r == rule::Skip) {
      premises(n, 0);
      insertion(n, false);
      need(j.src->is<Seq>() && j.src->as<Seq>()->items.empty() && j.tgt->is<Seq>() &&
               j.tgt->as<Seq>()->items.empty(),
           "shape skip => skip");
      schema(j.pre, j.post, "precondition");
    } else if (r == rule::Seq) {
      insertion(n, false);
      need(n.premises.size() >= 2, "Tr-Seq takes at least two premises");
      std::vector<StmtPtr> ss, ts;
      for (size_t i = 0; i < n.premises.size(); ++i) {
        const Judgment &p = n.premises[i].j;
        need(p.src != nullptr, "premise is an insertion judgment");
        need(p.env == j.env, "premise environment differs");
        if (i > 0) schema(p.pre, n.premises[i - 1].j.post, "midpoint " + std::to_string(i));
        ss.push_back(p.src);
        ts.push_back(p.tgt);
      }
      schema(j.pre, n.premises.front().j.pre, "precondition");
      schema(j.post, n.premises.back().j.post, "postcondition");
      need(same_stmt(j.src, seq(ss)), "source is not the sequence of the premises");
      need(same_stmt(j.tgt, seq(ts)), "target is not the sequence of the premises");
    } else if (r == rule::If) {
      premises(n, 2);
      insertion(n, false);
      auto s = j.src->as<If>();
      auto t = j.tgt->as<If>();
      need(s && t && s->x == t->x, "shape if x s1 s2 => if x t1 t2");
      has_ty(g, s->x, Ty::INT);
      const Judgment &a = n.premises[0].j, &b = n.premises[1].j;
      need(a.src && b.src && a.env == j.env && b.env == j.env, "premise wiring");
      IntT x = T::var(s->x), zero = T::num(0);
      schema(a.pre, T::conj(j.pre, T::ne(x, zero)), "then precondition");
      schema(b.pre, T::conj(j.pre, T::eq(x, zero)), "else precondition");
      schema(a.post, j.post, "then postcondition");
      schema(b.post, j.post, "else postcondition");
      need(same_stmt(s->then_s, a.src) && same_stmt(s->else_s, b.src), "source branches");
      need(same_stmt(t->then_s, a.tgt) && same_stmt(t->else_s, b.tgt), "target branches");
    } else if (r == rule::For) {
      premises(n, 1);
      insertion(n, false);
      need(n.inv != nullptr, "Tr-For needs its invariant");
      auto s = j.src->as<For>();
      auto t = j.tgt->as<For>();
      need(s && t && s->x == t->x && s->init == t->init && s->bound == t->bound &&
               s->step == t->step,
           "shape for(x, e, m, n) s => for(x, e, m, n) t");
      need(s->step != 0, "loop step must be nonzero");
      has_ty(g, s->x, Ty::INT);
      int_expr(g, s->init);
      int_expr(g, s->bound);
      const Judgment &p = n.premises[0].j;
      need(p.src && p.env == j.env, "premise wiring");
      IntT x = T::var(s->x), m = T::of_expr(s->bound);
      Subst at_e, next;
      at_e.ints[s->x] = T::of_expr(s->init);
      next.ints[s->x] = T::add(x, T::num(s->step));
      schema(j.pre, subst(n.inv, at_e), "precondition");
      schema(j.post, T::conj(n.inv, T::eq(x, m)), "postcondition");
      schema(p.pre, T::conj(n.inv, T::ne(x, m)), "body precondition");
      schema(p.post, subst(n.inv, next), "body postcondition");
      need(same_stmt(s->body, p.src) && same_stmt(t->body, p.tgt), "loop bodies");
    } else if (r == rule::InsertL || r == rule::InsertR) {
      premises(n, 2);
      insertion(n, false);
      bool left = r == rule::InsertL;
      const DNode &ins = left ? n.premises[0] : n.premises[1];
      const DNode &main = left ? n.premises[1] : n.premises[0];
      need(!ins.j.src && main.j.src, "premise kinds");
      need(ins.j.env == j.env && main.j.env == j.env, "premise environment differs");
      const Judgment &first = left ? ins.j : main.j, &second = left ? main.j : ins.j;
      schema(j.pre, first.pre, "precondition");
      schema(second.pre, first.post, "midpoint");
      schema(j.post, second.post, "postcondition");
      need(same_stmt(j.src, main.j.src), "source");
      need(same_stmt(j.tgt, seq({first.tgt, second.tgt})), "target");
    } else if (r == rule::InsRBuf) {
      premises(n, 0);
      insertion(n, true);
      auto t = j.tgt->as<ReadStream>();
      need(t != nullptr, "shape b := a.read()");
      has_ty(g, t->a, Ty::RARR);
      has_ty(g, t->x, Ty::BUF);
      need(d.conv.count(t->a), t->a + " is not converted");
      Subst sb;
      sb.ints[t->x] = T::sel(T::avar(t->a), T::hd(T::svar(t->a)));
      sb.seqs[t->a] = T::tl(T::svar(t->a));
      schema(j.pre, subst(j.post, sb), "precondition");
    } else if (r == rule::InsWBuf) {
      premises(n, 0);
      insertion(n, true);
      auto t = j.tgt->as<WriteStream>();
      need(t != nullptr, "shape a.write(b)");
      has_ty(g, t->a, Ty::WARR);
      has_ty(g, t->x, Ty::BUF);
      need(d.conv.count(t->a), t->a + " is not converted");
      auto cs = conjuncts(j.pre);
      need(!cs.empty() && cs[0]->k == Formula::K::Not && cs[0]->kids[0]->k == Formula::K::Mem &&
               cs[0]->kids[0]->s->k == SeqTerm::K::Var && cs[0]->kids[0]->s->name == t->a,
           "precondition must start with n notin idx(" + t->a + ")");
      IntT nidx = cs[0]->kids[0]->a;
      Subst sb;
      sb.seqs[t->a] = T::snoc(T::svar(t->a), nidx);
      schema(j.pre,
             T::conj({T::notmem(nidx, T::svar(t->a)),
                      T::eq(T::var(t->x), T::sel(T::avar(t->a), nidx)), subst(j.post, sb)}),
             "precondition");
    } else if (r == rule::InsMove) {
      premises(n, 0);
      insertion(n, true);
      auto t = j.tgt->as<Assign>();
      need(t && t->e.kind == Expr::Kind::Var, "shape x := y");
      has_ty(g, t->x, Ty::BUF);
      need(g.is(t->e.name, Ty::INT) || g.is(t->e.name, Ty::BUF), t->e.name + " must be INT or BUF");
      Subst sb;
      sb.ints[t->x] = T::var(t->e.name);
      schema(j.pre, subst(j.post, sb), "precondition");
    } else if (r == rule::Conseq || r == rule::InsConseq) {
      premises(n, 1);
      insertion(n, r == rule::InsConseq);
      const Judgment &p = n.premises[0].j;
      need(!p.src == !j.src && p.env == j.env, "premise wiring");
      need(same_stmt(j.src, p.src) && same_stmt(j.tgt, p.tgt), "premise translates other code");
      entail(j.pre, p.pre, "pre");
      entail(p.post, j.post, "post");
    } else if (r == rule::Kernel) {
      premises(n, 1);
      insertion(n, false);
      auto s = j.src->as<Kernel>();
      auto t = j.tgt->as<Kernel>();
      need(s && t, "shape kernel s => kernel t");
      const Judgment &p = n.premises[0].j;
      need(p.src != nullptr, "premise wiring");
      need(p.env >= 0 && p.env < static_cast<int>(d.envs.size()) && d.envs[p.env] == flip(g),
           "kernel premise must use the flipped environment");
      schema(p.pre, j.pre, "precondition");
      schema(p.post, j.post, "postcondition");
      need(same_stmt(s->body, p.src) && same_stmt(t->body, p.tgt), "kernel bodies");
    } else if (r == rule::Keep) {
      premises(n, 0);
      insertion(n, false);
      need(same_stmt(j.src, j.tgt), "kept statement must be unchanged");
      Subst sb;
      if (auto s = j.src->as<ReadArr>()) {
        has_ty(g, s->x, Ty::INT);
        has_ty(g, s->a, Ty::RARR);
        int_expr(g, s->idx);
        need(!d.conv.count(s->a), s->a + " is converted");
        sb.ints[s->x] = T::sel(T::avar(s->a), T::of_expr(s->idx));
      } else if (auto s = j.src->as<WriteArr>()) {
        has_ty(g, s->x, Ty::INT);
        has_ty(g, s->a, Ty::WARR);
        int_expr(g, s->idx);
        need(!d.conv.count(s->a), s->a + " is converted");
        sb.arrs[s->a] = T::upd(T::avar(s->a), T::of_expr(s->idx), T::var(s->x));
      } else if (auto s = j.src->as<ReadStream>()) {
        need(!d.conv.count(s->a), s->a + " is converted");
        FreeVars fv = free_vars(j.post);
        need(!fv.ints.count(s->x) && !fv.seqs.count(s->a), "postcondition mentions what the read changes");
      } else if (auto s = j.src->as<WriteStream>()) {
        need(!d.conv.count(s->a), s->a + " is converted");
        FreeVars fv = free_vars(j.post);
        need(!fv.seqs.count(s->a), "postcondition mentions what the write changes");
      } else {
        reject("Tr-Keep applies to array and stream accesses only");
      }
      schema(j.pre, sb.empty() ? j.post : subst(j.post, sb), "precondition");
    } else {
      reject("unknown rule " + r);
    }

    for (size_t i = 0; i < n.premises.size(); ++i)
      node(n.premises[i], n.premises[i].rule + (n.premises.size() > 1 ? "[" + std::to_string(i) + "]" : ""));
    path.pop_back();
  }

  // Program start: every converted stream is empty; params satisfy their bounds.
  void root_pre(const Form &pre) {
    std::set<std::string> empty;
    RegFile none;
    MapHeap h;
    Witness w;
    const TypeEnv &g = d.envs.at(0);
    std::vector<Form> pf;
    for (auto &[p, info] : g.params) {
      if (info.min) pf.push_back(T::le(T::num(*info.min), T::var(p)));
      if (info.max) pf.push_back(T::le(T::var(p), T::num(*info.max)));
    }
    for (auto &c : conjuncts(pre)) {
      if (c->k == Formula::K::SeqEq && c->s->k == SeqTerm::K::Var && d.conv.count(c->s->name)) {
        auto v = eval_seq(EvalCtx{none, h, w}, c->s2);
        need(v && v->empty(), "initial sequence of " + c->s->name + " is not empty");
        empty.insert(c->s->name);
        continue;
      }
      FreeVars fv = free_vars(c);
      need(fv.arrays.empty() && fv.seqs.empty(), "initial assertion assumes " + str(c));
      for (auto &v : fv.ints) need(g.is_param(v), "initial assertion assumes " + str(c));
      entail(T::conj(pf), c, "initial");
    }
    for (auto &a : d.conv) need(empty.count(a), "initial assertion does not empty " + a);
  }
};

} // namespace

CheckResult check_derivation(const Derivation &d, const CheckConfig &cfg, const Program *source,
                             const Program *target) {
  Checker c{d, cfg, {}, {}};
  try {
    need(d.version == kDerivationVersion, "unsupported version");
    need(d.envs.size() >= 1, "no environments");
    need(d.root.j.env == 0, "root must use the host environment");
    need(d.root.j.src != nullptr, "root is an insertion judgment");
    c.path.push_back("root");
    c.root_pre(d.root.j.pre);
    if (source) {
      need(same_stmt(d.root.j.src, source->main), "root source is not the program");
      TypeEnv host = flip(typecheck(*source));
      for (auto &[v, t] : d.envs[0].bindings) {
        auto want = host.lookup(v);
        if (want) need(*want == t, "host environment gives " + v + " the wrong type");
        else need(t == Ty::BUF, v + " is not declared and not a buffer");
      }
      for (auto &[v, t] : host.bindings) need(d.envs[0].bindings.count(v), v + " missing from the environment");
      need(d.envs[0].params == host.params, "parameter bounds differ from the program");
    }
    if (target) need(same_stmt(d.root.j.tgt, target->main), "root target is not the given target");
    c.path.pop_back();
    c.node(d.root, d.root.rule);
    if (!c.res.failures.empty()) {
      c.res.ok = false;
      c.res.path = c.res.failures.front().first;
      c.res.message = c.res.failures.front().second;
    }
  } catch (const Reject &r) {
    c.res.ok = false;
    c.res.path = c.where();
    c.res.message = r.msg;
  } catch (const Error &e) {
    c.res.ok = false;
    c.res.message = e.what();
  }
  return c.res;
}

} // namespace streamline
