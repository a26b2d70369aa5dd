#include "streamline/translate/translate.hpp"

#include <map>

namespace streamline {

std::vector<TypeEnv> derivation_envs(const BufferPlan &plan, const std::set<std::string> &conv) {
  TypeEnv kernel = plan.env;
  for (auto &b : used_buffers(plan.rel, conv)) kernel.bindings[b] = Ty::BUF;
  return {flip(kernel), kernel};
}

namespace {

constexpr int kHost = 0, kKern = 1;

Form conj_list(const std::vector<Form> &fs) {
  if (fs.empty()) return T::tru();
  if (fs.size() == 1) return fs[0];
  return T::conj(fs);
}

struct Builder {
  const BufferPlan &plan;
  const std::set<std::string> &conv;
  const InvariantSet &invs;
  const SampleConfig &sample;
  const SmtConfig *smt;
  Derivation d;
  std::vector<std::string> failures;

  Entailment discharge(const std::string &role, const Form &h, const Form &c) {
    Entailment e{role, h, c, "identical", ""};
    if (same_formula(h, c)) return e;
    std::string how, cex;
    if (!entails(h, c, d.envs.at(kHost), sample, &how, &cex)) {
      failures.push_back(role + " entailment " + str(h) + " => " + str(c) + ": " + cex);
      e.how = "refuted";
      return e;
    }
    e.how = how;
    if (smt && how != "propositional") {
      auto r = smt_entails(h, c, *smt);
      if (r.verdict != SmtVerdict::Valid)
        failures.push_back(role + " entailment rejected by the solver (" +
                           smt_verdict_name(r.verdict) + "): " + str(c));
      else {
        e.how = "smt";
        e.cert = r.query_hash;
      }
    }
    return e;
  }

  static DNode leaf(const char *rule, int env, Form pre, StmtPtr src, StmtPtr tgt, Form post) {
    DNode n;
    n.rule = rule;
    n.j = Judgment{env, std::move(pre), std::move(src), std::move(tgt), std::move(post)};
    return n;
  }

  // Consequence around `p` strengthening its pre to `pre` and weakening its post to `post`.
  DNode conseq(DNode p, const Form &pre, const Form &post) {
    DNode n;
    n.rule = p.j.src ? rule::Conseq : rule::InsConseq;
    n.j = Judgment{p.j.env, pre, p.j.src, p.j.tgt, post};
    n.side.push_back(discharge("pre", pre, p.j.pre));
    n.side.push_back(discharge("post", p.j.post, post));
    n.premises.push_back(std::move(p));
    return n;
  }

  bool is_insertion(const RelNode &n) const {
    return n.k == RelKind::InsRead || n.k == RelKind::InsMove;
  }

  DNode insertion(const RelNode &n, const Form &q, int env) {
    StmtPtr tgt = project_target(std::make_shared<RelNode>(n), conv);
    Subst s;
    if (n.k == RelKind::InsRead) {
      s.ints[n.b] = T::sel(T::avar(n.a), T::hd(T::svar(n.a)));
      s.seqs[n.a] = T::tl(T::svar(n.a));
      return leaf(rule::InsRBuf, env, subst(q, s), nullptr, tgt, q);
    }
    s.ints[n.b] = T::var(n.b2);
    return leaf(rule::InsMove, env, subst(q, s), nullptr, tgt, q);
  }

  DNode atomic(const RelPtr &r, const Form &q, int env) {
    const RelNode &n = *r;
    StmtPtr src = project_source(r), tgt = project_target(r, conv);
    Subst s;
    switch (n.k) {
    case RelKind::Assign:
      s.ints[n.x] = T::of_expr(n.e);
      return leaf(rule::Assign, env, subst(q, s), src, tgt, q);
    case RelKind::Read: {
      IntT sel = T::sel(T::avar(n.a), T::of_expr(n.e));
      if (!node_converted(n, conv)) {
        s.ints[n.x] = sel;
        return leaf(rule::Keep, env, subst(q, s), src, tgt, q);
      }
      s.ints[n.x] = T::var(n.b);
      return leaf(rule::ReadMem, env, T::conj(T::eq(T::var(n.b), sel), subst(q, s)), src, tgt, q);
    }
    case RelKind::Write: {
      IntT e = T::of_expr(n.e);
      if (!node_converted(n, conv)) {
        s.arrs[n.a] = T::upd(T::avar(n.a), e, T::var(n.x));
        return leaf(rule::Keep, env, subst(q, s), src, tgt, q);
      }
      // b := x then a.write(b), the write appending e to ι_a
      const auto &parts = seq_items(tgt);
      Subst app;
      app.seqs[n.a] = T::snoc(T::svar(n.a), e);
      Form mid = T::conj({T::notmem(e, T::svar(n.a)), T::eq(T::var(n.b), T::sel(T::avar(n.a), e)),
                          subst(q, app)});
      DNode wb = leaf(rule::InsWBuf, env, mid, nullptr, parts.at(1), q);
      s.arrs[n.a] = T::upd(T::avar(n.a), e, T::var(n.x));
      s.ints[n.b] = T::var(n.x);
      DNode wm = leaf(rule::WriteMem, env, T::conj(T::notmem(e, T::svar(n.a)), subst(mid, s)), src,
                      parts.at(0), mid);
      DNode out;
      out.rule = rule::InsertR;
      out.j = Judgment{env, wm.j.pre, src, tgt, q};
      out.premises.push_back(std::move(wm));
      out.premises.push_back(std::move(wb));
      return out;
    }
    case RelKind::SRead:
    case RelKind::SWrite: {
      FreeVars fv = free_vars(q);
      if ((n.k == RelKind::SRead && fv.ints.count(n.x)) || fv.seqs.count(n.a))
        failures.push_back("stream operation on " + n.a + " changes what the assertion after it mentions");
      return leaf(rule::Keep, env, q, src, tgt, q);
    }
    default: break;
    }
    throw Error("derivation: unexpected node");
  }

  struct Unit {
    std::vector<const RelNode *> lead, trail;
    RelPtr main; // null: anchored on skip
  };

  DNode sequence(const RelPtr &r, const Form &q, int env) {
    std::vector<Unit> units;
    std::vector<const RelNode *> pending;
    for (auto &i : r->items) {
      if (is_insertion(*i)) {
        if (node_converted(*i, conv)) pending.push_back(i.get());
        continue;
      }
      units.push_back(Unit{std::move(pending), {}, i});
      pending.clear();
    }
    if (!pending.empty()) {
      if (units.empty()) units.push_back(Unit{{}, {}, nullptr});
      units.back().trail = std::move(pending);
    }
    if (units.empty()) return leaf(rule::Skip, env, q, skip(), skip(), q);

    std::vector<DNode> ds(units.size());
    Form post = q;
    for (size_t k = units.size(); k-- > 0;) {
      ds[k] = unit(units[k], post, env);
      post = ds[k].j.pre;
    }
    if (ds.size() == 1) return std::move(ds[0]);
    std::vector<StmtPtr> ss, ts;
    for (auto &n : ds) {
      ss.push_back(n.j.src);
      ts.push_back(n.j.tgt);
    }
    DNode out;
    out.rule = rule::Seq;
    out.j = Judgment{env, ds.front().j.pre, seq(ss), seq(ts), q};
    out.premises = std::move(ds);
    return out;
  }

  DNode unit(const Unit &u, const Form &q, int env) {
    std::vector<DNode> trail;
    Form post = q;
    for (size_t k = u.trail.size(); k-- > 0;) {
      trail.insert(trail.begin(), insertion(*u.trail[k], post, env));
      post = trail.front().j.pre;
    }
    DNode cur = u.main ? derive(u.main, post, env) : leaf(rule::Skip, env, post, skip(), skip(), post);
    for (auto &t : trail) {
      DNode n;
      n.rule = rule::InsertR;
      n.j = Judgment{env, cur.j.pre, cur.j.src, seq({cur.j.tgt, t.j.tgt}), t.j.post};
      n.premises.push_back(std::move(cur));
      n.premises.push_back(std::move(t));
      cur = std::move(n);
    }
    for (size_t k = u.lead.size(); k-- > 0;) {
      DNode ins = insertion(*u.lead[k], cur.j.pre, env);
      DNode n;
      n.rule = rule::InsertL;
      n.j = Judgment{env, ins.j.pre, cur.j.src, seq({ins.j.tgt, cur.j.tgt}), cur.j.post};
      n.premises.push_back(std::move(ins));
      n.premises.push_back(std::move(cur));
      cur = std::move(n);
    }
    return cur;
  }

  DNode branch(const RelPtr &r, const Form &q, int env) {
    const RelNode &n = *r;
    DNode t = derive(n.then_s, q, env), e = derive(n.else_s, q, env);
    IntT x = T::var(n.x), zero = T::num(0);
    Obls ot, oe;
    for (auto &c : conjuncts(t.j.pre)) ot.push_back({c, Tag{}});
    for (auto &c : conjuncts(e.j.pre)) oe.push_back({c, Tag{}});
    Form phi = conj_of(awp_if(n.x, ot, oe));
    DNode out;
    out.rule = rule::If;
    out.j = Judgment{env, phi, project_source(r), project_target(r, conv), q};
    out.premises.push_back(conseq(std::move(t), T::conj(phi, T::ne(x, zero)), q));
    out.premises.push_back(conseq(std::move(e), T::conj(phi, T::eq(x, zero)), q));
    return out;
  }

  Form loop_inv(int id) const {
    auto it = invs.loops.find(id);
    if (it == invs.loops.end()) throw Error("derivation: no invariant for loop " + std::to_string(id));
    return it->second.formula();
  }

  DNode loop(const RelPtr &r, const Form &q, int env) {
    const RelNode &f = *r;
    Form inv = loop_inv(f.loop_id);
    IntT x = T::var(f.x), m = T::of_expr(f.bound);
    Subst next, first;
    next.ints[f.x] = T::add(x, T::num(f.step));
    first.ints[f.x] = T::of_expr(f.init);
    DNode body = derive(f.body, subst(inv, next), env);
    DNode n;
    n.rule = rule::For;
    n.inv = inv;
    n.j = Judgment{env, subst(inv, first), project_source(r), project_target(r, conv),
                   T::conj(inv, T::eq(x, m))};
    n.premises.push_back(conseq(std::move(body), T::conj(inv, T::ne(x, m)), subst(inv, next)));
    if (same_formula(n.j.post, q)) return n;
    Form pre = n.j.pre;
    return conseq(std::move(n), pre, q);
  }

  DNode derive(const RelPtr &r, const Form &q, int env) {
    switch (r->k) {
    case RelKind::Seq: return sequence(r, q, env);
    case RelKind::If: return branch(r, q, env);
    case RelKind::For: return loop(r, q, env);
    case RelKind::Kernel: {
      DNode body = derive(r->body, q, kKern);
      DNode n;
      n.rule = rule::Kernel;
      n.j = Judgment{env, body.j.pre, project_source(r), project_target(r, conv), q};
      n.premises.push_back(std::move(body));
      return n;
    }
    case RelKind::InsRead:
    case RelKind::InsMove: {
      // a lone insertion outside any sequence
      DNode ins = insertion(*r, q, env);
      if (!node_converted(*r, conv)) return leaf(rule::Skip, env, q, skip(), skip(), q);
      DNode s = leaf(rule::Skip, env, q, skip(), skip(), q);
      DNode n;
      n.rule = rule::InsertL;
      n.j = Judgment{env, ins.j.pre, skip(), seq({ins.j.tgt}), q};
      n.premises.push_back(std::move(ins));
      n.premises.push_back(std::move(s));
      return n;
    }
    default: return atomic(r, q, env);
    }
  }
};

} // namespace

BuildResult build_derivation(const BufferPlan &plan, const std::set<std::string> &conv,
                             const InvariantSet &invs, const SampleConfig &sample,
                             const SmtConfig *smt) {
  Builder b{plan, conv, invs, sample, smt, {}, {}};
  b.d.envs = derivation_envs(plan, conv);
  b.d.conv = conv;

  Form fin;
  int fl = final_loop(plan.rel);
  if (fl >= 0) {
    const RelNode *f = nullptr;
    std::vector<const RelNode *> stack{plan.rel.get()};
    while (!stack.empty() && !f) {
      const RelNode *n = stack.back();
      stack.pop_back();
      if (n->k == RelKind::For && n->loop_id == fl) f = n;
      for (auto &i : n->items) stack.push_back(i.get());
      if (n->body) stack.push_back(n->body.get());
      if (n->then_s) stack.push_back(n->then_s.get());
      if (n->else_s) stack.push_back(n->else_s.get());
    }
    Obls ex = exit_obls(*f, invs.loops.at(fl).obls(fl));
    std::vector<Form> fs;
    for (auto &o : ex) fs.push_back(o.f);
    fin = normalize(conj_list(fs));
  } else {
    fin = invs.final_inv.formula();
  }
  DNode body = b.derive(plan.rel, fin, kHost);
  Form init = initial_assertion(plan, conv).formula();
  b.d.root = same_formula(init, body.j.pre) ? std::move(body) : b.conseq(std::move(body), init, fin);
  return {std::move(b.d), std::move(b.failures)};
}

} // namespace streamline
