#include "streamline/frontend/ast.hpp"

namespace streamline {

const char *binop_symbol(BinOp op) {
  switch (op) {
  case BinOp::Add: return "+";
  case BinOp::Sub: return "-";
  case BinOp::Mul: return "*";
  case BinOp::Div: return "/";
  case BinOp::Mod: return "%";
  case BinOp::Lt: return "<";
  case BinOp::Eq: return "==";
  case BinOp::Le: return "<=";
  }
  return "?";
}

Expr Expr::constant(Int v) {
  Expr e;
  e.kind = Kind::Const;
  e.value = std::move(v);
  return e;
}

Expr Expr::var(std::string n) {
  Expr e;
  e.kind = Kind::Var;
  e.name = std::move(n);
  return e;
}

Expr Expr::bin(BinOp op, Atom l, Atom r) {
  Expr e;
  e.kind = Kind::Bin;
  e.op = op;
  e.lhs = std::move(l);
  e.rhs = std::move(r);
  return e;
}

Expr Expr::of_atom(const Atom &a) {
  return a.is_var ? var(a.name) : constant(a.value);
}

bool Expr::operator==(const Expr &o) const {
  if (kind != o.kind)
    return false;
  switch (kind) {
  case Kind::Const: return value == o.value;
  case Kind::Var: return name == o.name;
  case Kind::Bin: return op == o.op && lhs == o.lhs && rhs == o.rhs;
  }
  return false;
}

void Expr::vars(std::set<std::string> &out) const {
  if (kind == Kind::Var)
    out.insert(name);
  if (kind == Kind::Bin) {
    if (lhs.is_var) out.insert(lhs.name);
    if (rhs.is_var) out.insert(rhs.name);
  }
}

namespace {

struct EqVisitor {
  const Stmt &other;
  bool operator()(const ReadArr &n) const {
    auto o = other.as<ReadArr>();
    return o && n.x == o->x && n.a == o->a && n.idx == o->idx;
  }
  bool operator()(const WriteArr &n) const {
    auto o = other.as<WriteArr>();
    return o && n.a == o->a && n.idx == o->idx && n.x == o->x;
  }
  bool operator()(const ReadStream &n) const {
    auto o = other.as<ReadStream>();
    return o && n.x == o->x && n.a == o->a;
  }
  bool operator()(const WriteStream &n) const {
    auto o = other.as<WriteStream>();
    return o && n.a == o->a && n.x == o->x;
  }
  bool operator()(const Assign &n) const {
    auto o = other.as<Assign>();
    return o && n.x == o->x && n.e == o->e;
  }
  bool operator()(const Seq &n) const {
    auto o = other.as<Seq>();
    if (!o || o->items.size() != n.items.size())
      return false;
    for (size_t i = 0; i < n.items.size(); ++i)
      if (!stmt_equal(*n.items[i], *o->items[i]))
        return false;
    return true;
  }
  bool operator()(const If &n) const {
    auto o = other.as<If>();
    return o && n.x == o->x && stmt_equal(*n.then_s, *o->then_s) &&
           stmt_equal(*n.else_s, *o->else_s);
  }
  bool operator()(const For &n) const {
    auto o = other.as<For>();
    return o && n.x == o->x && n.init == o->init && n.bound == o->bound &&
           n.step == o->step && n.annotation == o->annotation &&
           stmt_equal(*n.body, *o->body);
  }
  bool operator()(const Kernel &n) const {
    auto o = other.as<Kernel>();
    return o && stmt_equal(*n.body, *o->body);
  }
  bool operator()(const Call &n) const {
    auto o = other.as<Call>();
    return o && n.fn == o->fn;
  }
};

template <class T> StmtPtr mk_impl(T n, SrcLoc l) {
  auto s = std::make_shared<Stmt>();
  s->node = std::move(n);
  s->loc = l;
  return s;
}

} // namespace

bool stmt_equal(const Stmt &a, const Stmt &b) {
  return std::visit(EqVisitor{b}, a.node);
}

StmtPtr mk(ReadArr n, SrcLoc l) { return mk_impl(std::move(n), l); }
StmtPtr mk(WriteArr n, SrcLoc l) { return mk_impl(std::move(n), l); }
StmtPtr mk(ReadStream n, SrcLoc l) { return mk_impl(std::move(n), l); }
StmtPtr mk(WriteStream n, SrcLoc l) { return mk_impl(std::move(n), l); }
StmtPtr mk(Assign n, SrcLoc l) { return mk_impl(std::move(n), l); }
StmtPtr mk(Seq n, SrcLoc l) { return mk_impl(std::move(n), l); }
StmtPtr mk(If n, SrcLoc l) { return mk_impl(std::move(n), l); }
StmtPtr mk(For n, SrcLoc l) { return mk_impl(std::move(n), l); }
StmtPtr mk(Kernel n, SrcLoc l) { return mk_impl(std::move(n), l); }
StmtPtr mk(Call n, SrcLoc l) { return mk_impl(std::move(n), l); }

StmtPtr skip() { return mk(Seq{}); }

StmtPtr seq(const std::vector<StmtPtr> &items) {
  Seq s;
  for (auto &it : items) {
    if (auto inner = it->as<Seq>())
      s.items.insert(s.items.end(), inner->items.begin(), inner->items.end());
    else
      s.items.push_back(it);
  }
  return mk(std::move(s));
}

const std::vector<StmtPtr> &seq_items(const StmtPtr &s) {
  auto q = s->as<Seq>();
  if (!q)
    throw Error("internal: expected a statement block");
  return q->items;
}

const char *decl_keyword(DeclKind k) {
  switch (k) {
  case DeclKind::Int: return "int";
  case DeclKind::Buf: return "buf";
  case DeclKind::RArr: return "rarr";
  case DeclKind::WArr: return "warr";
  case DeclKind::Arr: return "arr";
  case DeclKind::Param: return "param";
  }
  return "?";
}

const Decl *Program::find_decl(const std::string &n) const {
  for (auto &d : decls)
    if (d.name == n)
      return &d;
  return nullptr;
}

bool program_equal(const Program &a, const Program &b) {
  if (a.decls != b.decls || a.funcs.size() != b.funcs.size())
    return false;
  for (size_t i = 0; i < a.funcs.size(); ++i) {
    auto &f = a.funcs[i], &g = b.funcs[i];
    if (f.name != g.name || f.locals != g.locals || !stmt_equal(f.body, g.body))
      return false;
  }
  return stmt_equal(a.main, b.main);
}

namespace {

template <class F> void walk(const StmtPtr &s, F &&f) {
  f(*s);
  if (auto q = s->as<Seq>()) {
    for (auto &it : q->items) walk(it, f);
  } else if (auto i = s->as<If>()) {
    walk(i->then_s, f);
    walk(i->else_s, f);
  } else if (auto l = s->as<For>()) {
    walk(l->body, f);
  } else if (auto k = s->as<Kernel>()) {
    walk(k->body, f);
  }
}

void expr_names(const Expr &e, std::set<std::string> &out) { e.vars(out); }

} // namespace

std::set<std::string> all_names(const Program &p) {
  std::set<std::string> out;
  for (auto &d : p.decls) out.insert(d.name);
  auto visit = [&](const Stmt &s) {
    if (auto n = s.as<ReadArr>()) { out.insert(n->x); out.insert(n->a); expr_names(n->idx, out); }
    else if (auto n = s.as<WriteArr>()) { out.insert(n->x); out.insert(n->a); expr_names(n->idx, out); }
    else if (auto n = s.as<ReadStream>()) { out.insert(n->x); out.insert(n->a); }
    else if (auto n = s.as<WriteStream>()) { out.insert(n->x); out.insert(n->a); }
    else if (auto n = s.as<Assign>()) { out.insert(n->x); expr_names(n->e, out); }
    else if (auto n = s.as<If>()) { out.insert(n->x); }
    else if (auto n = s.as<For>()) { out.insert(n->x); expr_names(n->init, out); expr_names(n->bound, out); }
    else if (auto n = s.as<Call>()) { out.insert(n->fn); }
  };
  for (auto &f : p.funcs) {
    out.insert(f.name);
    for (auto &d : f.locals) out.insert(d.name);
    walk(f.body, visit);
  }
  if (p.main) walk(p.main, visit);
  return out;
}

void assigned_vars(const StmtPtr &s, std::set<std::string> &out) {
  walk(s, [&](const Stmt &n) {
    if (auto r = n.as<ReadArr>()) out.insert(r->x);
    else if (auto r = n.as<ReadStream>()) out.insert(r->x);
    else if (auto a = n.as<Assign>()) out.insert(a->x);
    else if (auto l = n.as<For>()) out.insert(l->x);
  });
}

void used_vars(const StmtPtr &s, std::set<std::string> &out) {
  walk(s, [&](const Stmt &n) {
    if (auto r = n.as<ReadArr>()) r->idx.vars(out);
    else if (auto w = n.as<WriteArr>()) { w->idx.vars(out); out.insert(w->x); }
    else if (auto w = n.as<WriteStream>()) out.insert(w->x);
    else if (auto a = n.as<Assign>()) a->e.vars(out);
    else if (auto i = n.as<If>()) out.insert(i->x);
    else if (auto l = n.as<For>()) { l->init.vars(out); l->bound.vars(out); }
  });
}

void touched_arrays(const StmtPtr &s, std::set<std::string> &out) {
  walk(s, [&](const Stmt &n) {
    if (auto r = n.as<ReadArr>()) out.insert(r->a);
    else if (auto w = n.as<WriteArr>()) out.insert(w->a);
    else if (auto r = n.as<ReadStream>()) out.insert(r->a);
    else if (auto w = n.as<WriteStream>()) out.insert(w->a);
  });
}

bool contains_stream_ops(const StmtPtr &s) {
  bool found = false;
  walk(s, [&](const Stmt &n) {
    if (n.is<ReadStream>() || n.is<WriteStream>()) found = true;
  });
  return found;
}

bool contains_kernel(const StmtPtr &s) {
  bool found = false;
  walk(s, [&](const Stmt &n) {
    if (n.is<Kernel>()) found = true;
  });
  return found;
}

std::string NameGen::fresh(const std::string &base) {
  int &k = next_[base];
  for (;;) {
    std::string cand = base + std::to_string(k++);
    if (!taken_.count(cand)) {
      taken_.insert(cand);
      return cand;
    }
  }
}

} // namespace streamline
