#include "streamline/vcgen/vc.hpp"

#include <algorithm>
#include <functional>

namespace streamline {

Form conj_of(const Obls &o) {
  std::vector<Form> fs;
  fs.reserve(o.size());
  for (auto &x : o) fs.push_back(x.f);
  return T::conj(std::move(fs));
}

Obls subst_obls(const Obls &o, const Subst &s) {
  Obls out;
  out.reserve(o.size());
  for (auto &x : o) out.push_back({subst(x.f, s), x.tag});
  return out;
}

std::string RangeT::str() const { return streamline::str(term()); }

Obls PointInv::obls(int point) const {
  Obls out;
  for (auto &[a, r] : ranges)
    out.push_back({T::seqeq(T::svar(a), r.term()), {Tag::K::Array, a, point, -1}});
  for (auto &bf : buffer_facts)
    out.push_back({T::eq(T::var(bf.buf), T::sel(T::avar(bf.arr), bf.idx.term())),
                   {Tag::K::Array, bf.arr, point, -1}});
  for (size_t i = 0; i < facts.size(); ++i)
    out.push_back({facts[i], {Tag::K::Fact, "", point, static_cast<int>(i)}});
  return out;
}

namespace {
Tag side(const std::string &a) { return {Tag::K::Array, a, kSidePoint, -1}; }
} // namespace

Obls awp_assign(const std::string &x, const Expr &e, const Obls &q) {
  Subst s;
  s.ints[x] = T::of_expr(e);
  return subst_obls(q, s);
}

Obls awp_readmem(const std::string &x, const std::string &a, const Expr &idx,
                 const std::string &b, const Obls &q) {
  Subst s;
  s.ints[x] = T::var(b);
  Obls out{{T::eq(T::var(b), T::sel(T::avar(a), T::of_expr(idx))), side(a)}};
  for (auto &o : subst_obls(q, s)) out.push_back(o);
  return out;
}

Obls awp_keep_read(const std::string &x, const std::string &a, const Expr &idx, const Obls &q) {
  Subst s;
  s.ints[x] = T::sel(T::avar(a), T::of_expr(idx));
  return subst_obls(q, s);
}

Obls awp_ins_wbuf(const std::string &a, const IntT &n, const std::string &b, const Obls &q) {
  Subst s;
  s.seqs[a] = T::snoc(T::svar(a), n);
  Obls out{{T::notmem(n, T::svar(a)), side(a)},
           {T::eq(T::var(b), T::sel(T::avar(a), n)), side(a)}};
  for (auto &o : subst_obls(q, s)) out.push_back(o);
  return out;
}

Obls awp_writemem(const std::string &a, const Expr &idx, const std::string &x,
                  const std::string &b, const Obls &q) {
  IntT e = T::of_expr(idx);
  Subst s;
  s.arrs[a] = T::upd(T::avar(a), e, T::var(x));
  s.ints[b] = T::var(x);
  Obls out{{T::notmem(e, T::svar(a)), side(a)}};
  for (auto &o : subst_obls(q, s)) out.push_back(o);
  return out;
}

Obls awp_keep_write(const std::string &a, const Expr &idx, const std::string &x, const Obls &q) {
  Subst s;
  s.arrs[a] = T::upd(T::avar(a), T::of_expr(idx), T::var(x));
  return subst_obls(q, s);
}

Obls awp_ins_rbuf(const std::string &a, const std::string &b, const Obls &q) {
  Subst s;
  s.ints[b] = T::sel(T::avar(a), T::hd(T::svar(a)));
  s.seqs[a] = T::tl(T::svar(a));
  return subst_obls(q, s);
}

Obls awp_ins_move(const std::string &b, const std::string &b2, const Obls &q) {
  Subst s;
  s.ints[b] = T::var(b2);
  return subst_obls(q, s);
}

Obls awp_keep_stream(const RelNode &n, const Obls &q) {
  FreeVars fv = free_vars(conj_of(q));
  if (fv.seqs.count(n.a))
    throw Error("stream '" + n.a + "' is already a stream but its index sequence is tracked");
  if (n.k == RelKind::SRead && fv.ints.count(n.x))
    throw Error("value read from existing stream '" + n.a + "' into '" + n.x +
                "' is mentioned by the assertion");
  return q;
}

Obls awp_if(const std::string &x, const Obls &q_then, const Obls &q_else) {
  Form g = T::ne(T::var(x), T::num(0)), ng = T::eq(T::var(x), T::num(0));
  std::multimap<std::string, size_t> rest;
  for (size_t i = 0; i < q_else.size(); ++i) rest.emplace(str(q_else[i].f), i);
  std::vector<bool> used(q_else.size(), false);
  Obls out;
  for (auto &o : q_then) {
    auto it = rest.find(str(o.f));
    if (it != rest.end()) {
      used[it->second] = true;
      rest.erase(it);
      out.push_back(o);
    } else {
      out.push_back({T::implies(g, o.f), o.tag});
    }
  }
  for (size_t i = 0; i < q_else.size(); ++i)
    if (!used[i]) out.push_back({T::implies(ng, q_else[i].f), q_else[i].tag});
  return out;
}

Obls awp_atomic(const RelNode &n, const std::set<std::string> &conv, const Obls &q) {
  bool c = node_converted(n, conv);
  switch (n.k) {
  case RelKind::Assign: return awp_assign(n.x, n.e, q);
  case RelKind::Read:
    return c ? awp_readmem(n.x, n.a, n.e, n.b, q) : awp_keep_read(n.x, n.a, n.e, q);
  case RelKind::Write:
    if (!c) return awp_keep_write(n.a, n.e, n.x, q);
    return awp_writemem(n.a, n.e, n.x, n.b, awp_ins_wbuf(n.a, T::of_expr(n.e), n.b, q));
  case RelKind::SRead:
  case RelKind::SWrite: return awp_keep_stream(n, q);
  case RelKind::InsRead: return c ? awp_ins_rbuf(n.a, n.b, q) : q;
  case RelKind::InsMove: return c ? awp_ins_move(n.b, n.b2, q) : q;
  default: throw Error("awp_atomic: structural node");
  }
}

IntT loop_bound_term(const RelNode &f) { return T::of_expr(f.bound); }

Obls exit_obls(const RelNode &f, const Obls &inv) {
  Subst s;
  s.ints[f.x] = loop_bound_term(f);
  Obls out = subst_obls(inv, s);
  out.push_back({T::eq(T::var(f.x), loop_bound_term(f)), Tag{}});
  return out;
}

int final_loop(const RelPtr &main) {
  if (!main) return -1;
  switch (main->k) {
  case RelKind::For: return main->loop_id;
  case RelKind::Kernel: return final_loop(main->body);
  case RelKind::Seq: return main->items.empty() ? -1 : final_loop(main->items.back());
  default: return -1;
  }
}

const char *vc_kind_name(VcKind k) {
  switch (k) {
  case VcKind::Init: return "init";
  case VcKind::Inductive: return "inductive";
  case VcKind::Exit: return "exit";
  case VcKind::Continue: return "continue";
  }
  return "?";
}

std::vector<Form> param_facts(const TypeEnv &env) {
  std::vector<Form> out;
  for (auto &[p, info] : env.params) {
    if (info.min) out.push_back(T::le(T::num(*info.min), T::var(p)));
    if (info.max) out.push_back(T::le(T::var(p), T::num(*info.max)));
  }
  return out;
}

PointInv initial_assertion(const BufferPlan &plan, const std::set<std::string> &conv) {
  PointInv p;
  for (auto &a : conv) p.ranges[a] = RangeT::empty();
  p.facts = param_facts(plan.env);
  return p;
}

namespace {

const RelNode *find_loop(const RelPtr &r, int id) {
  if (!r) return nullptr;
  if (r->k == RelKind::For && r->loop_id == id) return r.get();
  switch (r->k) {
  case RelKind::Seq:
    for (auto &i : r->items)
      if (auto f = find_loop(i, id)) return f;
    return nullptr;
  case RelKind::If:
    if (auto f = find_loop(r->then_s, id)) return f;
    return find_loop(r->else_s, id);
  case RelKind::For:
  case RelKind::Kernel: return find_loop(r->body, id);
  default: return nullptr;
  }
}

struct Gen {
  const std::set<std::string> &conv;
  const InvariantSet &invs;
  std::vector<VC> out;

  Obls wp(const RelPtr &r, Obls q) {
    switch (r->k) {
    case RelKind::Seq:
      for (auto it = r->items.rbegin(); it != r->items.rend(); ++it) q = wp(*it, std::move(q));
      return q;
    case RelKind::If: return awp_if(r->x, wp(r->then_s, q), wp(r->else_s, q));
    case RelKind::Kernel: return wp(r->body, std::move(q));
    case RelKind::For: return wp_for(*r, std::move(q));
    default: return awp_atomic(*r, conv, q);
    }
  }

  Obls wp_for(const RelNode &f, Obls q) {
    const int id = f.loop_id;
    Obls inv = invs.loops.at(id).obls(id);
    Form invf = conj_of(inv);
    IntT m = loop_bound_term(f);
    std::string L = "L" + std::to_string(id);

    Subst next;
    next.ints[f.x] = T::add(T::var(f.x), T::num(f.step));
    VC ind{VcKind::Inductive, id, "inductive " + L,
           normalize(T::conj(invf, T::ne(T::var(f.x), m))), wp(f.body, subst_obls(inv, next)), id};

    Obls ex = exit_obls(f, inv);
    VC exv{VcKind::Exit, id, "exit " + L, normalize(T::conj(invf, T::eq(T::var(f.x), m))), ex, id};
    Form exf = normalize(conj_of(ex));
    if (!equal(exf, normalize(conj_of(q))))
      out.push_back(VC{VcKind::Continue, id, "after " + L, exf, q, id});
    out.push_back(std::move(exv));
    out.push_back(std::move(ind));

    Subst first;
    first.ints[f.x] = T::of_expr(f.init);
    return subst_obls(inv, first);
  }
};

} // namespace

std::vector<VC> gen_vcs(const BufferPlan &plan, const std::set<std::string> &conv,
                        const InvariantSet &invs) {
  Gen g{conv, invs, {}};
  Obls fin;
  int fl = final_loop(plan.rel);
  if (fl >= 0) {
    const RelNode *f = find_loop(plan.rel, fl);
    fin = exit_obls(*f, invs.loops.at(fl).obls(fl));
  } else {
    fin = invs.final_inv.obls(kFinalPoint);
  }
  Obls pre = g.wp(plan.rel, fin);
  g.out.push_back(VC{VcKind::Init, -1, "init", normalize(invs.init.formula()), pre, kInitPoint});
  std::reverse(g.out.begin(), g.out.end());
  // program order: init first, then per loop
  std::stable_sort(g.out.begin(), g.out.end(), [](const VC &a, const VC &b) {
    auto key = [](const VC &v) {
      int k = v.kind == VcKind::Inductive ? 1 : v.kind == VcKind::Exit ? 2 : 3;
      return std::make_pair(v.loop, v.kind == VcKind::Init ? 0 : k);
    };
    return key(a) < key(b);
  });
  return g.out;
}

} // namespace streamline
