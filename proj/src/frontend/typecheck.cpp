#include "streamline/frontend/typecheck.hpp"
#include "streamline/frontend/parser.hpp"

#include <functional>

namespace streamline {

const char *ty_name(Ty t) {
  switch (t) {
  case Ty::INT: return "INT";
  case Ty::BUF: return "BUF";
  case Ty::RARR: return "RARR";
  case Ty::WARR: return "WARR";
  }
  return "?";
}

std::optional<Ty> TypeEnv::lookup(const std::string &n) const {
  auto it = bindings.find(n);
  if (it == bindings.end()) return std::nullopt;
  return it->second;
}

bool TypeEnv::is(const std::string &n, Ty t) const {
  auto v = lookup(n);
  return v && *v == t;
}

std::vector<std::string> TypeEnv::arrays() const {
  std::vector<std::string> out;
  for (auto &[k, v] : bindings)
    if (v == Ty::RARR || v == Ty::WARR) out.push_back(k);
  return out;
}

Ty flip(Ty t) {
  if (t == Ty::RARR) return Ty::WARR;
  if (t == Ty::WARR) return Ty::RARR;
  return t;
}

TypeEnv flip(const TypeEnv &g) {
  TypeEnv out = g;
  for (auto &[k, v] : out.bindings) v = flip(v);
  return out;
}

// ---------------------------------------------------------------- inlining

namespace {

struct Inliner {
  const Program &src;
  NameGen gen;
  std::vector<Decl> new_decls;
  std::vector<std::string> stack;

  Inliner(const Program &p) : src(p), gen(all_names(p)) {}

  const Function *find(const std::string &n) const {
    for (auto &f : src.funcs)
      if (f.name == n) return &f;
    return nullptr;
  }

  static Expr rename_expr(const Expr &e, const std::map<std::string, std::string> &m) {
    auto r = [&](const std::string &n) {
      auto it = m.find(n);
      return it == m.end() ? n : it->second;
    };
    Expr out = e;
    if (out.kind == Expr::Kind::Var) out.name = r(out.name);
    if (out.kind == Expr::Kind::Bin) {
      if (out.lhs.is_var) out.lhs.name = r(out.lhs.name);
      if (out.rhs.is_var) out.rhs.name = r(out.rhs.name);
    }
    return out;
  }

  StmtPtr rewrite(const StmtPtr &s, const std::map<std::string, std::string> &m) {
    auto r = [&](const std::string &n) {
      auto it = m.find(n);
      return it == m.end() ? n : it->second;
    };
    if (auto q = s->as<Seq>()) {
      std::vector<StmtPtr> items;
      for (auto &it : q->items) items.push_back(rewrite(it, m));
      return seq(items);
    }
    if (auto c = s->as<Call>()) {
      const Function *f = find(c->fn);
      if (!f) throw ParseError(s->loc, "call to undefined function '" + c->fn + "'");
      for (auto &open : stack)
        if (open == c->fn)
          throw Error(s->loc.str() + ": recursion detected through '" + c->fn + "'");
      stack.push_back(c->fn);
      std::map<std::string, std::string> inner;
      for (auto &d : f->locals) {
        std::string fresh = gen.fresh(d.name + "_");
        inner[d.name] = fresh;
        Decl nd = d;
        nd.name = fresh;
        new_decls.push_back(nd);
      }
      StmtPtr body = rewrite(f->body, inner);
      stack.pop_back();
      return body;
    }
    if (auto n = s->as<ReadArr>()) return mk(ReadArr{r(n->x), r(n->a), rename_expr(n->idx, m)}, s->loc);
    if (auto n = s->as<WriteArr>()) return mk(WriteArr{r(n->a), rename_expr(n->idx, m), r(n->x)}, s->loc);
    if (auto n = s->as<ReadStream>()) return mk(ReadStream{r(n->x), r(n->a)}, s->loc);
    if (auto n = s->as<WriteStream>()) return mk(WriteStream{r(n->a), r(n->x)}, s->loc);
    if (auto n = s->as<Assign>()) return mk(Assign{r(n->x), rename_expr(n->e, m)}, s->loc);
    if (auto n = s->as<If>()) return mk(If{r(n->x), rewrite(n->then_s, m), rewrite(n->else_s, m)}, s->loc);
    if (auto n = s->as<For>())
      return mk(For{r(n->x), rename_expr(n->init, m), rename_expr(n->bound, m), n->step,
                    rewrite(n->body, m), n->annotation},
                s->loc);
    if (auto n = s->as<Kernel>()) return mk(Kernel{rewrite(n->body, m)}, s->loc);
    return s;
  }
};

} // namespace

Program inline_calls(const Program &p) {
  Inliner in(p);
  // Reject recursion even in functions that are never called.
  for (auto &f : p.funcs) {
    in.stack = {f.name};
    in.rewrite(f.body, {});
  }
  in.new_decls.clear();
  in.gen = NameGen(all_names(p));
  in.stack.clear();
  Program out;
  out.decls = p.decls;
  out.main = in.rewrite(p.main, {});
  for (auto &d : in.new_decls) out.decls.push_back(d);
  return out;
}

// ---------------------------------------------------------------- typing

namespace {

struct Usage {
  bool kr = false, kw = false, hr = false, hw = false;
  SrcLoc kr_at, kw_at, hr_at, hw_at;
};

struct Checker {
  const Program &p;
  std::map<std::string, DeclKind> kinds;
  std::vector<std::string> diags;
  std::map<std::string, Usage> usage;

  explicit Checker(const Program &prog) : p(prog) {
    for (auto &d : p.decls) kinds[d.name] = d.kind;
  }

  void err(SrcLoc l, const std::string &m) { diags.push_back(l.str() + ": " + m); }

  bool scalar(const std::string &n) const {
    auto it = kinds.find(n);
    return it != kinds.end() &&
           (it->second == DeclKind::Int || it->second == DeclKind::Buf ||
            it->second == DeclKind::Param);
  }
  bool is_buf(const std::string &n) const {
    auto it = kinds.find(n);
    return it != kinds.end() && it->second == DeclKind::Buf;
  }
  bool is_param(const std::string &n) const {
    auto it = kinds.find(n);
    return it != kinds.end() && it->second == DeclKind::Param;
  }
  bool array(const std::string &n) const {
    auto it = kinds.find(n);
    return it != kinds.end() &&
           (it->second == DeclKind::RArr || it->second == DeclKind::WArr ||
            it->second == DeclKind::Arr);
  }

  void need_scalar(SrcLoc l, const std::string &n) {
    if (!kinds.count(n)) err(l, "unbound variable '" + n + "'");
    else if (!scalar(n)) err(l, "'" + n + "' is an array, expected a scalar");
  }
  void need_int(SrcLoc l, const std::string &n, const char *what) {
    need_scalar(l, n);
    if (is_buf(n)) err(l, std::string("BUF variable '") + n + "' used in " + what);
  }
  void need_target(SrcLoc l, const std::string &n) {
    need_scalar(l, n);
    if (is_param(n)) err(l, "cannot assign to parameter '" + n + "'");
  }
  void need_array(SrcLoc l, const std::string &n) {
    if (!kinds.count(n)) err(l, "unbound array '" + n + "'");
    else if (!array(n)) err(l, "'" + n + "' is not an array");
  }
  void check_index(SrcLoc l, const Expr &e) {
    std::set<std::string> vs;
    e.vars(vs);
    for (auto &v : vs) need_int(l, v, "an index expression");
  }
  void check_rhs(SrcLoc l, const Expr &e, bool target_is_buf) {
    if (e.kind == Expr::Kind::Var) {
      need_scalar(l, e.name);
      return;
    }
    if (target_is_buf && e.kind == Expr::Kind::Bin)
      err(l, "arithmetic result assigned to BUF variable");
    std::set<std::string> vs;
    e.vars(vs);
    for (auto &v : vs) need_int(l, v, "an arithmetic expression");
  }
  void use(const std::string &a, bool kernel, bool write, SrcLoc l) {
    auto &u = usage[a];
    if (kernel && write && !u.kw) { u.kw = true; u.kw_at = l; }
    if (kernel && !write && !u.kr) { u.kr = true; u.kr_at = l; }
    if (!kernel && write && !u.hw) { u.hw = true; u.hw_at = l; }
    if (!kernel && !write && !u.hr) { u.hr = true; u.hr_at = l; }
  }

  void walk(const StmtPtr &s, bool kernel, std::set<std::string> &loopvars) {
    SrcLoc l = s->loc;
    if (auto q = s->as<Seq>()) {
      for (auto &it : q->items) walk(it, kernel, loopvars);
    } else if (auto n = s->as<ReadArr>()) {
      need_target(l, n->x);
      need_array(l, n->a);
      check_index(l, n->idx);
      check_loopvar(l, n->x, loopvars);
      use(n->a, kernel, false, l);
    } else if (auto n = s->as<WriteArr>()) {
      need_array(l, n->a);
      check_index(l, n->idx);
      need_scalar(l, n->x);
      use(n->a, kernel, true, l);
    } else if (auto n = s->as<ReadStream>()) {
      need_target(l, n->x);
      need_array(l, n->a);
      check_loopvar(l, n->x, loopvars);
      use(n->a, kernel, false, l);
    } else if (auto n = s->as<WriteStream>()) {
      need_array(l, n->a);
      need_scalar(l, n->x);
      use(n->a, kernel, true, l);
    } else if (auto n = s->as<Assign>()) {
      need_target(l, n->x);
      check_rhs(l, n->e, is_buf(n->x));
      check_loopvar(l, n->x, loopvars);
    } else if (auto n = s->as<If>()) {
      need_int(l, n->x, "a branch condition");
      walk(n->then_s, kernel, loopvars);
      walk(n->else_s, kernel, loopvars);
    } else if (auto n = s->as<For>()) {
      need_target(l, n->x);
      if (is_buf(n->x)) err(l, "loop variable '" + n->x + "' must be INT");
      check_loopvar(l, n->x, loopvars);
      check_index(l, n->init);
      check_index(l, n->bound);
      std::set<std::string> bv;
      n->bound.vars(bv);
      if (bv.count(n->x)) err(l, "loop bound mentions the loop variable '" + n->x + "'");
      loopvars.insert(n->x);
      walk(n->body, kernel, loopvars);
      loopvars.erase(n->x);
    } else if (auto n = s->as<Kernel>()) {
      if (kernel) err(l, "kernel blocks cannot be nested");
      walk(n->body, true, loopvars);
    } else if (auto n = s->as<Call>()) {
      err(l, "call to '" + n->fn + "' remains after inlining");
    }
  }

  void check_loopvar(SrcLoc l, const std::string &x, const std::set<std::string> &lv) {
    if (lv.count(x)) err(l, "loop variable '" + x + "' assigned inside its loop");
  }

  TypeEnv run() {
    std::set<std::string> lv;
    if (p.main) walk(p.main, false, lv);
    TypeEnv env;
    for (auto &d : p.decls) {
      switch (d.kind) {
      case DeclKind::Int: env.bindings[d.name] = Ty::INT; break;
      case DeclKind::Buf: env.bindings[d.name] = Ty::BUF; break;
      case DeclKind::Param:
        env.bindings[d.name] = Ty::INT;
        env.params[d.name] = ParamInfo{d.min, d.max};
        break;
      case DeclKind::RArr:
      case DeclKind::WArr:
      case DeclKind::Arr: env.bindings[d.name] = orient(d); break;
      }
    }
    if (!diags.empty()) throw TypeError(diags);
    return env;
  }

  Ty orient(const Decl &d) {
    Usage u = usage[d.name];
    const std::string &a = d.name;
    if (u.kr && u.kw) err(u.kw_at, "array '" + a + "' is both read and written inside the kernel");
    if (u.hr && u.hw) err(u.hw_at, "array '" + a + "' is both read and written in host code");
    bool want_r = u.kr || u.hw; // kernel-side read-only
    bool want_w = u.kw || u.hr;
    if (d.kind == DeclKind::RArr) {
      if (u.kw) err(u.kw_at, "RARR array '" + a + "' written inside the kernel");
      if (u.hr) err(u.hr_at, "array '" + a + "' read in host code, but host sees RARR '" + a + "' as write-only");
      return Ty::RARR;
    }
    if (d.kind == DeclKind::WArr) {
      if (u.kr) err(u.kr_at, "WARR array '" + a + "' read inside the kernel");
      if (u.hw) err(u.hw_at, "array '" + a + "' written in host code, but host sees WARR '" + a + "' as read-only");
      return Ty::WARR;
    }
    if (want_r && want_w && !(u.kr && u.kw) && !(u.hr && u.hw))
      err(u.kr ? u.kr_at : u.hw_at,
          "array '" + a + "' has conflicting orientation across the kernel boundary");
    return want_w && !want_r ? Ty::WARR : Ty::RARR;
  }
};

} // namespace

TypeEnv typecheck(const Program &p) { return Checker(p).run(); }

Checked load_program(const std::string &text) {
  Program p = inline_calls(parse_program(text));
  TypeEnv env = typecheck(p);
  return {std::move(p), std::move(env)};
}

} // namespace streamline
