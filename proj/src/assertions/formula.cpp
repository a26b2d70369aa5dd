#include "streamline/assertions/formula.hpp"
#include "streamline/assertions/linear.hpp"

#include <algorithm>
#include <cctype>

namespace streamline {

// ---------------------------------------------------------------- builders

namespace T {

IntT num(Int v) {
  auto t = std::make_shared<IntTerm>();
  t->k = IntTerm::K::Const;
  t->value = std::move(v);
  return t;
}
IntT var(const std::string &n) {
  auto t = std::make_shared<IntTerm>();
  t->k = IntTerm::K::Var;
  t->name = n;
  return t;
}
IntT op(BinOp o, IntT a, IntT b) {
  auto t = std::make_shared<IntTerm>();
  t->k = IntTerm::K::Op;
  t->op = o;
  t->a = std::move(a);
  t->b = std::move(b);
  return t;
}
IntT add(IntT a, IntT b) { return op(BinOp::Add, std::move(a), std::move(b)); }
IntT sub(IntT a, IntT b) { return op(BinOp::Sub, std::move(a), std::move(b)); }
IntT sel(ArrT a, IntT i) {
  auto t = std::make_shared<IntTerm>();
  t->k = IntTerm::K::Select;
  t->arr = std::move(a);
  t->a = std::move(i);
  return t;
}
IntT hd(SeqT s) {
  auto t = std::make_shared<IntTerm>();
  t->k = IntTerm::K::Head;
  t->seq = std::move(s);
  return t;
}
IntT of_atom(const Atom &a) { return a.is_var ? var(a.name) : num(a.value); }
IntT of_expr(const Expr &e) {
  switch (e.kind) {
  case Expr::Kind::Const: return num(e.value);
  case Expr::Kind::Var: return var(e.name);
  case Expr::Kind::Bin: return op(e.op, of_atom(e.lhs), of_atom(e.rhs));
  }
  return num(0);
}

ArrT avar(const std::string &n) {
  auto t = std::make_shared<ArrTerm>();
  t->k = ArrTerm::K::Var;
  t->name = n;
  return t;
}
ArrT upd(ArrT base, IntT i, IntT v) {
  auto t = std::make_shared<ArrTerm>();
  t->k = ArrTerm::K::Update;
  t->base = std::move(base);
  t->idx = std::move(i);
  t->val = std::move(v);
  return t;
}

static std::shared_ptr<SeqTerm> mkseq(SeqTerm::K k) {
  auto t = std::make_shared<SeqTerm>();
  t->k = k;
  return t;
}
SeqT svar(const std::string &a) {
  auto t = mkseq(SeqTerm::K::Var);
  t->name = a;
  return t;
}
SeqT nil() { return mkseq(SeqTerm::K::Nil); }
SeqT cons(IntT x, SeqT s) {
  auto t = mkseq(SeqTerm::K::ConsHead);
  t->t = std::move(x);
  t->rest = std::move(s);
  return t;
}
SeqT snoc(SeqT s, IntT x) {
  auto t = mkseq(SeqTerm::K::ConsTail);
  t->t = std::move(x);
  t->rest = std::move(s);
  return t;
}
SeqT tl(SeqT s) {
  auto t = mkseq(SeqTerm::K::Tail);
  t->rest = std::move(s);
  return t;
}
SeqT range(IntT lo, IntT hi, IntT step) {
  auto t = mkseq(SeqTerm::K::Range);
  t->lo = std::move(lo);
  t->hi = std::move(hi);
  t->step = std::move(step);
  return t;
}

static std::shared_ptr<Formula> mkf(Formula::K k) {
  auto f = std::make_shared<Formula>();
  f->k = k;
  return f;
}
Form tru() {
  static Form t = mkf(Formula::K::True);
  return t;
}
Form eq(IntT a, IntT b) {
  auto f = mkf(Formula::K::Eq);
  f->a = std::move(a);
  f->b = std::move(b);
  return f;
}
Form le(IntT a, IntT b) {
  auto f = mkf(Formula::K::Le);
  f->a = std::move(a);
  f->b = std::move(b);
  return f;
}
Form ne(IntT a, IntT b) { return neg(eq(std::move(a), std::move(b))); }
Form lt(IntT a, IntT b) { return neg(le(std::move(b), std::move(a))); }
Form mem(IntT t, SeqT s) {
  auto f = mkf(Formula::K::Mem);
  f->a = std::move(t);
  f->s = std::move(s);
  return f;
}
Form notmem(IntT t, SeqT s) { return neg(mem(std::move(t), std::move(s))); }
Form seqeq(SeqT a, SeqT b) {
  auto f = mkf(Formula::K::SeqEq);
  f->s = std::move(a);
  f->s2 = std::move(b);
  return f;
}
Form conj(std::vector<Form> fs) {
  if (fs.empty()) return tru();
  if (fs.size() == 1) return fs[0];
  auto f = mkf(Formula::K::And);
  f->kids = std::move(fs);
  return f;
}
Form conj(Form a, Form b) { return conj(std::vector<Form>{std::move(a), std::move(b)}); }
Form neg(Form g) {
  auto f = mkf(Formula::K::Not);
  f->kids = {std::move(g)};
  return f;
}
Form implies(Form a, Form b) { return neg(conj(std::move(a), neg(std::move(b)))); }

} // namespace T

// ---------------------------------------------------------------- heaps

std::optional<Int> MapHeap::get(const std::string &a, const Int &idx) const {
  auto it = cells.find(a);
  if (it == cells.end()) return std::nullopt;
  auto jt = it->second.find(idx);
  if (jt == it->second.end()) return std::nullopt;
  return jt->second;
}

static uint64_t idx_bits(const Int &idx) {
  if (idx >= Int(INT64_MIN) && idx <= Int(INT64_MAX))
    return static_cast<uint64_t>(idx.convert_to<long long>());
  return hash_str(idx.str());
}

std::optional<Int> SeededHeap::get(const std::string &a, const Int &idx) const {
  auto it = overlay_.find(a);
  if (it != overlay_.end()) {
    auto jt = it->second.find(idx);
    if (jt != it->second.end()) return jt->second;
  }
  uint64_t h = mix64(seed_ * 0x9E3779B97F4A7C15ULL ^ hash_str(a) ^ mix64(idx_bits(idx)));
  long long v = static_cast<long long>(h % (1ULL << 31)) - (1LL << 30);
  return Int(v);
}

// ---------------------------------------------------------------- eval

std::optional<std::vector<Int>> range_denotation(const Int &lo, const Int &hi, const Int &step) {
  if (step == 0) return std::nullopt;
  std::vector<Int> out;
  if (step > 0) {
    if (hi < lo) return out;
    Int n = (hi - lo) / step + 1;
    if (n > Int(kMaxRangeLen)) return std::nullopt;
    long long cnt = n.convert_to<long long>();
    out.reserve(cnt);
    Int v = lo;
    for (long long i = 0; i < cnt; ++i, v += step) out.push_back(v);
  } else {
    if (lo < hi) return out;
    Int n = (lo - hi) / (-step) + 1;
    if (n > Int(kMaxRangeLen)) return std::nullopt;
    long long cnt = n.convert_to<long long>();
    out.reserve(cnt);
    Int v = lo;
    for (long long i = 0; i < cnt; ++i, v += step) out.push_back(v);
  }
  return out;
}

static std::optional<Int> eval_select(const EvalCtx &c, const ArrT &a, const Int &i) {
  if (a->k == ArrTerm::K::Var) return c.heap.get(a->name, i);
  auto j = eval_int(c, a->idx);
  auto v = eval_int(c, a->val);
  if (!j || !v) return std::nullopt;
  if (*j == i) return v;
  return eval_select(c, a->base, i);
}

static std::optional<Int> apply_op(BinOp op, const Int &x, const Int &y) {
  switch (op) {
  case BinOp::Add: return x + y;
  case BinOp::Sub: return x - y;
  case BinOp::Mul: return x * y;
  case BinOp::Div:
    if (y == 0) return std::nullopt;
    return div_trunc(x, y);
  case BinOp::Mod:
    if (y == 0) return std::nullopt;
    return mod_trunc(x, y);
  case BinOp::Lt: return Int(x < y ? 1 : 0);
  case BinOp::Eq: return Int(x == y ? 1 : 0);
  case BinOp::Le: return Int(x <= y ? 1 : 0);
  }
  return std::nullopt;
}

std::optional<Int> eval_int(const EvalCtx &c, const IntT &t) {
  switch (t->k) {
  case IntTerm::K::Const: return t->value;
  case IntTerm::K::Var: {
    auto it = c.regs.find(t->name);
    if (it == c.regs.end()) return std::nullopt;
    return it->second;
  }
  case IntTerm::K::Op: {
    auto x = eval_int(c, t->a);
    if (!x) return std::nullopt;
    auto y = eval_int(c, t->b);
    if (!y) return std::nullopt;
    return apply_op(t->op, *x, *y);
  }
  case IntTerm::K::Select: {
    auto i = eval_int(c, t->a);
    if (!i) return std::nullopt;
    return eval_select(c, t->arr, *i);
  }
  case IntTerm::K::Head: {
    if (t->seq->k == SeqTerm::K::Var) {
      auto it = c.iseq.find(t->seq->name);
      if (it == c.iseq.end() || it->second.empty()) return std::nullopt;
      return it->second.front();
    }
    auto s = eval_seq(c, t->seq);
    if (!s || s->empty()) return std::nullopt;
    return s->front();
  }
  }
  return std::nullopt;
}

std::optional<std::vector<Int>> eval_seq(const EvalCtx &c, const SeqT &s) {
  switch (s->k) {
  case SeqTerm::K::Var: {
    auto it = c.iseq.find(s->name);
    if (it == c.iseq.end()) return std::vector<Int>{};
    return it->second;
  }
  case SeqTerm::K::Nil: return std::vector<Int>{};
  case SeqTerm::K::ConsHead: {
    auto x = eval_int(c, s->t);
    if (!x) return std::nullopt;
    auto r = eval_seq(c, s->rest);
    if (!r) return std::nullopt;
    r->insert(r->begin(), *x);
    return r;
  }
  case SeqTerm::K::ConsTail: {
    auto r = eval_seq(c, s->rest);
    if (!r) return std::nullopt;
    auto x = eval_int(c, s->t);
    if (!x) return std::nullopt;
    r->push_back(*x);
    return r;
  }
  case SeqTerm::K::Tail: {
    auto r = eval_seq(c, s->rest);
    if (!r || r->empty()) return std::nullopt;
    r->erase(r->begin());
    return r;
  }
  case SeqTerm::K::Range: {
    auto lo = eval_int(c, s->lo);
    auto hi = eval_int(c, s->hi);
    auto st = eval_int(c, s->step);
    if (!lo || !hi || !st) return std::nullopt;
    return range_denotation(*lo, *hi, *st);
  }
  }
  return std::nullopt;
}

bool eval_formula(const EvalCtx &c, const Form &f) {
  switch (f->k) {
  case Formula::K::True: return true;
  case Formula::K::Eq: {
    auto x = eval_int(c, f->a);
    if (!x) return false;
    auto y = eval_int(c, f->b);
    return y && *x == *y;
  }
  case Formula::K::Le: {
    auto x = eval_int(c, f->a);
    if (!x) return false;
    auto y = eval_int(c, f->b);
    return y && *x <= *y;
  }
  case Formula::K::Mem: {
    auto x = eval_int(c, f->a);
    if (!x) return false;
    auto s = eval_seq(c, f->s);
    return s && std::find(s->begin(), s->end(), *x) != s->end();
  }
  case Formula::K::SeqEq: {
    auto x = eval_seq(c, f->s);
    if (!x) return false;
    auto y = eval_seq(c, f->s2);
    return y && *x == *y;
  }
  case Formula::K::And:
    for (auto &k : f->kids)
      if (!eval_formula(c, k)) return false;
    return true;
  case Formula::K::Not: return !eval_formula(c, f->kids[0]);
  }
  return false;
}

bool eval_formula(const RegFile &r, const HeapView &h, const Witness &i, const Form &f) {
  EvalCtx c{r, h, i};
  return eval_formula(c, f);
}

// ---------------------------------------------------------------- subst

IntT subst(const IntT &t, const Subst &s) {
  switch (t->k) {
  case IntTerm::K::Const: return t;
  case IntTerm::K::Var: {
    auto it = s.ints.find(t->name);
    return it == s.ints.end() ? t : it->second;
  }
  case IntTerm::K::Op: {
    auto a = subst(t->a, s), b = subst(t->b, s);
    if (a == t->a && b == t->b) return t;
    return T::op(t->op, a, b);
  }
  case IntTerm::K::Select: {
    auto arr = subst(t->arr, s);
    auto i = subst(t->a, s);
    if (arr == t->arr && i == t->a) return t;
    return T::sel(arr, i);
  }
  case IntTerm::K::Head: {
    auto q = subst(t->seq, s);
    if (q == t->seq) return t;
    return T::hd(q);
  }
  }
  return t;
}

ArrT subst(const ArrT &t, const Subst &s) {
  if (t->k == ArrTerm::K::Var) {
    auto it = s.arrs.find(t->name);
    return it == s.arrs.end() ? t : it->second;
  }
  auto b = subst(t->base, s);
  auto i = subst(t->idx, s);
  auto v = subst(t->val, s);
  if (b == t->base && i == t->idx && v == t->val) return t;
  return T::upd(b, i, v);
}

SeqT subst(const SeqT &t, const Subst &s) {
  switch (t->k) {
  case SeqTerm::K::Var: {
    auto it = s.seqs.find(t->name);
    return it == s.seqs.end() ? t : it->second;
  }
  case SeqTerm::K::Nil: return t;
  case SeqTerm::K::ConsHead:
  case SeqTerm::K::ConsTail: {
    auto x = subst(t->t, s);
    auto r = subst(t->rest, s);
    if (x == t->t && r == t->rest) return t;
    return t->k == SeqTerm::K::ConsHead ? T::cons(x, r) : T::snoc(r, x);
  }
  case SeqTerm::K::Tail: {
    auto r = subst(t->rest, s);
    if (r == t->rest) return t;
    return T::tl(r);
  }
  case SeqTerm::K::Range: {
    auto lo = subst(t->lo, s), hi = subst(t->hi, s), st = subst(t->step, s);
    if (lo == t->lo && hi == t->hi && st == t->step) return t;
    return T::range(lo, hi, st);
  }
  }
  return t;
}

Form subst(const Form &f, const Subst &s) {
  if (s.empty()) return f;
  switch (f->k) {
  case Formula::K::True: return f;
  case Formula::K::Eq:
  case Formula::K::Le: {
    auto a = subst(f->a, s), b = subst(f->b, s);
    if (a == f->a && b == f->b) return f;
    return f->k == Formula::K::Eq ? T::eq(a, b) : T::le(a, b);
  }
  case Formula::K::Mem: {
    auto a = subst(f->a, s);
    auto q = subst(f->s, s);
    if (a == f->a && q == f->s) return f;
    return T::mem(a, q);
  }
  case Formula::K::SeqEq: {
    auto a = subst(f->s, s), b = subst(f->s2, s);
    if (a == f->s && b == f->s2) return f;
    return T::seqeq(a, b);
  }
  case Formula::K::And: {
    std::vector<Form> kids;
    bool changed = false;
    for (auto &k : f->kids) {
      kids.push_back(subst(k, s));
      changed |= kids.back() != k;
    }
    if (!changed) return f;
    auto g = std::make_shared<Formula>();
    g->k = Formula::K::And;
    g->kids = std::move(kids);
    return g;
  }
  case Formula::K::Not: {
    auto k = subst(f->kids[0], s);
    if (k == f->kids[0]) return f;
    return T::neg(k);
  }
  }
  return f;
}

// ---------------------------------------------------------------- printing

namespace {

int prec(const IntT &t) {
  if (t->k != IntTerm::K::Op) return 3;
  switch (t->op) {
  case BinOp::Add:
  case BinOp::Sub: return 1;
  case BinOp::Mul:
  case BinOp::Div:
  case BinOp::Mod: return 2;
  default: return 3;
  }
}

void put_int(std::string &o, const IntT &t, int ctx, bool right);
void put_seq(std::string &o, const SeqT &s);

void put_arr(std::string &o, const ArrT &a) {
  if (a->k == ArrTerm::K::Var) {
    o += a->name;
    return;
  }
  put_arr(o, a->base);
  o += "{";
  put_int(o, a->idx, 0, false);
  o += " -> ";
  put_int(o, a->val, 0, false);
  o += "}";
}

void put_int(std::string &o, const IntT &t, int ctx, bool right) {
  switch (t->k) {
  case IntTerm::K::Const: o += t->value.str(); return;
  case IntTerm::K::Var: o += t->name; return;
  case IntTerm::K::Select:
    put_arr(o, t->arr);
    o += "[";
    put_int(o, t->a, 0, false);
    o += "]";
    return;
  case IntTerm::K::Head:
    o += "hd(";
    put_seq(o, t->seq);
    o += ")";
    return;
  case IntTerm::K::Op: break;
  }
  int p = prec(t);
  if (p == 3) {
    o += t->op == BinOp::Lt ? "lt(" : t->op == BinOp::Le ? "le(" : "eq(";
    put_int(o, t->a, 0, false);
    o += ", ";
    put_int(o, t->b, 0, false);
    o += ")";
    return;
  }
  bool paren = p < ctx || (p == ctx && right);
  if (paren) o += "(";
  put_int(o, t->a, p, false);
  o += " ";
  o += binop_symbol(t->op);
  o += " ";
  put_int(o, t->b, p, true);
  if (paren) o += ")";
}

void put_seq(std::string &o, const SeqT &s) {
  switch (s->k) {
  case SeqTerm::K::Var: o += "idx(" + s->name + ")"; return;
  case SeqTerm::K::Nil: o += "nil"; return;
  case SeqTerm::K::ConsHead:
    o += "cons(";
    put_int(o, s->t, 0, false);
    o += ", ";
    put_seq(o, s->rest);
    o += ")";
    return;
  case SeqTerm::K::ConsTail:
    o += "snoc(";
    put_seq(o, s->rest);
    o += ", ";
    put_int(o, s->t, 0, false);
    o += ")";
    return;
  case SeqTerm::K::Tail:
    o += "tl(";
    put_seq(o, s->rest);
    o += ")";
    return;
  case SeqTerm::K::Range:
    o += "[";
    put_int(o, s->lo, 0, false);
    o += ", ";
    put_int(o, s->hi, 0, false);
    o += "; ";
    put_int(o, s->step, 0, false);
    o += "]";
    return;
  }
}

void put_form(std::string &o, const Form &f, bool in_and) {
  switch (f->k) {
  case Formula::K::True: o += "true"; return;
  case Formula::K::Eq:
    put_int(o, f->a, 0, false);
    o += " == ";
    put_int(o, f->b, 0, false);
    return;
  case Formula::K::Le:
    put_int(o, f->a, 0, false);
    o += " <= ";
    put_int(o, f->b, 0, false);
    return;
  case Formula::K::Mem:
    put_int(o, f->a, 0, false);
    o += " in ";
    put_seq(o, f->s);
    return;
  case Formula::K::SeqEq:
    put_seq(o, f->s);
    o += " == ";
    put_seq(o, f->s2);
    return;
  case Formula::K::And: {
    if (in_and) o += "(";
    for (size_t i = 0; i < f->kids.size(); ++i) {
      if (i) o += " && ";
      put_form(o, f->kids[i], true);
    }
    if (in_and) o += ")";
    return;
  }
  case Formula::K::Not: {
    const Form &g = f->kids[0];
    if (g->k == Formula::K::Eq) {
      put_int(o, g->a, 0, false);
      o += " != ";
      put_int(o, g->b, 0, false);
    } else if (g->k == Formula::K::Le) {
      put_int(o, g->b, 0, false);
      o += " < ";
      put_int(o, g->a, 0, false);
    } else if (g->k == Formula::K::Mem) {
      put_int(o, g->a, 0, false);
      o += " notin ";
      put_seq(o, g->s);
    } else {
      o += "!(";
      put_form(o, g, false);
      o += ")";
    }
    return;
  }
  }
}

} // namespace

std::string str(const IntT &t) {
  std::string o;
  put_int(o, t, 0, false);
  return o;
}
std::string str(const ArrT &t) {
  std::string o;
  put_arr(o, t);
  return o;
}
std::string str(const SeqT &t) {
  std::string o;
  put_seq(o, t);
  return o;
}
std::string str(const Form &f) {
  std::string o;
  put_form(o, f, false);
  return o;
}

// ---------------------------------------------------------------- equality

static bool eq_seq(const SeqT &a, const SeqT &b);
static bool eq_arr(const ArrT &a, const ArrT &b);

bool equal(const IntT &a, const IntT &b) {
  if (a == b) return true;
  if (a->k != b->k) return false;
  switch (a->k) {
  case IntTerm::K::Const: return a->value == b->value;
  case IntTerm::K::Var: return a->name == b->name;
  case IntTerm::K::Op: return a->op == b->op && equal(a->a, b->a) && equal(a->b, b->b);
  case IntTerm::K::Select: return eq_arr(a->arr, b->arr) && equal(a->a, b->a);
  case IntTerm::K::Head: return eq_seq(a->seq, b->seq);
  }
  return false;
}

static bool eq_arr(const ArrT &a, const ArrT &b) {
  if (a == b) return true;
  if (a->k != b->k) return false;
  if (a->k == ArrTerm::K::Var) return a->name == b->name;
  return eq_arr(a->base, b->base) && equal(a->idx, b->idx) && equal(a->val, b->val);
}

static bool eq_seq(const SeqT &a, const SeqT &b) {
  if (a == b) return true;
  if (a->k != b->k) return false;
  switch (a->k) {
  case SeqTerm::K::Var: return a->name == b->name;
  case SeqTerm::K::Nil: return true;
  case SeqTerm::K::ConsHead:
  case SeqTerm::K::ConsTail: return equal(a->t, b->t) && eq_seq(a->rest, b->rest);
  case SeqTerm::K::Tail: return eq_seq(a->rest, b->rest);
  case SeqTerm::K::Range:
    return equal(a->lo, b->lo) && equal(a->hi, b->hi) && equal(a->step, b->step);
  }
  return false;
}

bool equal(const Form &a, const Form &b) {
  if (a == b) return true;
  if (a->k != b->k) return false;
  switch (a->k) {
  case Formula::K::True: return true;
  case Formula::K::Eq:
  case Formula::K::Le: return equal(a->a, b->a) && equal(a->b, b->b);
  case Formula::K::Mem: return equal(a->a, b->a) && eq_seq(a->s, b->s);
  case Formula::K::SeqEq: return eq_seq(a->s, b->s) && eq_seq(a->s2, b->s2);
  case Formula::K::And:
  case Formula::K::Not:
    if (a->kids.size() != b->kids.size()) return false;
    for (size_t i = 0; i < a->kids.size(); ++i)
      if (!equal(a->kids[i], b->kids[i])) return false;
    return true;
  }
  return false;
}

// ---------------------------------------------------------------- free vars

static void fv_arr(const ArrT &a, FreeVars &out) {
  if (a->k == ArrTerm::K::Var) {
    out.arrays.insert(a->name);
    return;
  }
  fv_arr(a->base, out);
  free_vars(a->idx, out);
  free_vars(a->val, out);
}

void free_vars(const IntT &t, FreeVars &out) {
  switch (t->k) {
  case IntTerm::K::Const: return;
  case IntTerm::K::Var: out.ints.insert(t->name); return;
  case IntTerm::K::Op:
    free_vars(t->a, out);
    free_vars(t->b, out);
    return;
  case IntTerm::K::Select:
    fv_arr(t->arr, out);
    free_vars(t->a, out);
    return;
  case IntTerm::K::Head: free_vars(t->seq, out); return;
  }
}

void free_vars(const SeqT &s, FreeVars &out) {
  switch (s->k) {
  case SeqTerm::K::Var: out.seqs.insert(s->name); return;
  case SeqTerm::K::Nil: return;
  case SeqTerm::K::ConsHead:
  case SeqTerm::K::ConsTail:
    free_vars(s->t, out);
    free_vars(s->rest, out);
    return;
  case SeqTerm::K::Tail: free_vars(s->rest, out); return;
  case SeqTerm::K::Range:
    free_vars(s->lo, out);
    free_vars(s->hi, out);
    free_vars(s->step, out);
    return;
  }
}

void free_vars(const Form &f, FreeVars &out) {
  switch (f->k) {
  case Formula::K::True: return;
  case Formula::K::Eq:
  case Formula::K::Le:
    free_vars(f->a, out);
    free_vars(f->b, out);
    return;
  case Formula::K::Mem:
    free_vars(f->a, out);
    free_vars(f->s, out);
    return;
  case Formula::K::SeqEq:
    free_vars(f->s, out);
    free_vars(f->s2, out);
    return;
  case Formula::K::And:
  case Formula::K::Not:
    for (auto &k : f->kids) free_vars(k, out);
    return;
  }
}

FreeVars free_vars(const Form &f) {
  FreeVars fv;
  free_vars(f, fv);
  return fv;
}

// ---------------------------------------------------------------- normalize

static ArrT normalize_arr(const ArrT &a);
static SeqT normalize_seq(const SeqT &s);

IntT normalize(const IntT &t) {
  switch (t->k) {
  case IntTerm::K::Const:
  case IntTerm::K::Var: return t;
  case IntTerm::K::Select: return T::sel(normalize_arr(t->arr), normalize(t->a));
  case IntTerm::K::Head: return T::hd(normalize_seq(t->seq));
  case IntTerm::K::Op: break;
  }
  if (auto lin = linearize(t)) return lin->term();
  IntT a = normalize(t->a), b = normalize(t->b);
  if (a->k == IntTerm::K::Const && b->k == IntTerm::K::Const) {
    if (auto v = apply_op(t->op, a->value, b->value)) return T::num(*v);
  }
  return T::op(t->op, a, b);
}

static ArrT normalize_arr(const ArrT &a) {
  if (a->k == ArrTerm::K::Var) return a;
  return T::upd(normalize_arr(a->base), normalize(a->idx), normalize(a->val));
}

static SeqT normalize_seq(const SeqT &s) {
  switch (s->k) {
  case SeqTerm::K::Var:
  case SeqTerm::K::Nil: return s;
  case SeqTerm::K::ConsHead: return T::cons(normalize(s->t), normalize_seq(s->rest));
  case SeqTerm::K::ConsTail: return T::snoc(normalize_seq(s->rest), normalize(s->t));
  case SeqTerm::K::Tail: return T::tl(normalize_seq(s->rest));
  case SeqTerm::K::Range:
    return T::range(normalize(s->lo), normalize(s->hi), normalize(s->step));
  }
  return s;
}

static void flatten_into(const Form &f, std::vector<Form> &out) {
  if (f->k == Formula::K::And) {
    for (auto &k : f->kids) flatten_into(k, out);
  } else if (f->k != Formula::K::True) {
    out.push_back(f);
  }
}

Form normalize(const Form &f) {
  switch (f->k) {
  case Formula::K::True: return f;
  case Formula::K::Eq: return T::eq(normalize(f->a), normalize(f->b));
  case Formula::K::Le: return T::le(normalize(f->a), normalize(f->b));
  case Formula::K::Mem: return T::mem(normalize(f->a), normalize_seq(f->s));
  case Formula::K::SeqEq: return T::seqeq(normalize_seq(f->s), normalize_seq(f->s2));
  case Formula::K::Not: {
    Form g = normalize(f->kids[0]);
    if (g->k == Formula::K::Not) return g->kids[0];
    return T::neg(g);
  }
  case Formula::K::And: {
    std::vector<Form> flat;
    for (auto &k : f->kids) flatten_into(normalize(k), flat);
    std::vector<std::pair<std::string, Form>> keyed;
    keyed.reserve(flat.size());
    for (auto &g : flat) keyed.emplace_back(str(g), g);
    std::sort(keyed.begin(), keyed.end(),
              [](const auto &x, const auto &y) { return x.first < y.first; });
    std::vector<Form> out;
    for (size_t i = 0; i < keyed.size(); ++i)
      if (i == 0 || keyed[i].first != keyed[i - 1].first) out.push_back(keyed[i].second);
    return T::conj(std::move(out));
  }
  }
  return f;
}

std::vector<Form> conjuncts(const Form &f) {
  std::vector<Form> out;
  flatten_into(f, out);
  return out;
}

static size_t size_int(const IntT &t);
static size_t size_seq(const SeqT &s) {
  switch (s->k) {
  case SeqTerm::K::Var:
  case SeqTerm::K::Nil: return 1;
  case SeqTerm::K::ConsHead:
  case SeqTerm::K::ConsTail: return 1 + size_int(s->t) + size_seq(s->rest);
  case SeqTerm::K::Tail: return 1 + size_seq(s->rest);
  case SeqTerm::K::Range: return 1 + size_int(s->lo) + size_int(s->hi) + size_int(s->step);
  }
  return 1;
}
static size_t size_arr(const ArrT &a) {
  if (a->k == ArrTerm::K::Var) return 1;
  return 1 + size_arr(a->base) + size_int(a->idx) + size_int(a->val);
}
static size_t size_int(const IntT &t) {
  switch (t->k) {
  case IntTerm::K::Const:
  case IntTerm::K::Var: return 1;
  case IntTerm::K::Op: return 1 + size_int(t->a) + size_int(t->b);
  case IntTerm::K::Select: return 1 + size_arr(t->arr) + size_int(t->a);
  case IntTerm::K::Head: return 1 + size_seq(t->seq);
  }
  return 1;
}

size_t formula_size(const Form &f) {
  switch (f->k) {
  case Formula::K::True: return 1;
  case Formula::K::Eq:
  case Formula::K::Le: return 1 + size_int(f->a) + size_int(f->b);
  case Formula::K::Mem: return 1 + size_int(f->a) + size_seq(f->s);
  case Formula::K::SeqEq: return 1 + size_seq(f->s) + size_seq(f->s2);
  case Formula::K::And:
  case Formula::K::Not: {
    size_t n = 1;
    for (auto &k : f->kids) n += formula_size(k);
    return n;
  }
  }
  return 1;
}

// ---------------------------------------------------------------- parsing

namespace {

struct FTok {
  enum Kind { Ident, Num, Punct, End } kind;
  std::string text;
  size_t pos;
};

std::vector<FTok> flex(const std::string &s) {
  std::vector<FTok> out;
  size_t i = 0;
  static const char *puncts[] = {"->", "==", "!=", "<=", ">=", "&&", "(", ")", "[", "]",
                                 "{",  "}",  ",",  ";",  "=",  "<",  ">",  "+", "-", "*",
                                 "/",  "%",  "!"};
  while (i < s.size()) {
    char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '?') {
      size_t j = i + 1;
      while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_')) ++j;
      out.push_back({FTok::Ident, s.substr(i, j - i), i});
      i = j;
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      size_t j = i;
      while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
      out.push_back({FTok::Num, s.substr(i, j - i), i});
      i = j;
      continue;
    }
    bool ok = false;
    for (const char *p : puncts) {
      size_t n = std::char_traits<char>::length(p);
      if (s.compare(i, n, p) == 0) {
        out.push_back({FTok::Punct, p, i});
        i += n;
        ok = true;
        break;
      }
    }
    if (!ok) throw Error("assertion text: unexpected character '" + std::string(1, c) + "' at offset " + std::to_string(i));
  }
  out.push_back({FTok::End, "", s.size()});
  return out;
}

class FParser {
public:
  explicit FParser(const std::string &s) : t_(flex(s)) {}

  Form formula_top() {
    Form f = formula();
    if (t_[p_].kind != FTok::End) fail("trailing input");
    return f;
  }
  IntT term_top() {
    IntT t = term();
    if (t_[p_].kind != FTok::End) fail("trailing input");
    return t;
  }

private:
  std::vector<FTok> t_;
  size_t p_ = 0;

  [[noreturn]] void fail(const std::string &m) const {
    throw Error("assertion text: " + m + " at offset " + std::to_string(t_[p_].pos));
  }
  bool punct(const char *s, size_t k = 0) const {
    size_t q = std::min(p_ + k, t_.size() - 1);
    return t_[q].kind == FTok::Punct && t_[q].text == s;
  }
  bool ident(const char *s, size_t k = 0) const {
    size_t q = std::min(p_ + k, t_.size() - 1);
    return t_[q].kind == FTok::Ident && t_[q].text == s;
  }
  void expect(const char *s) {
    if (!punct(s)) fail(std::string("expected '") + s + "'");
    ++p_;
  }
  std::string name() {
    if (t_[p_].kind != FTok::Ident) fail("expected identifier");
    return t_[p_++].text;
  }

  Form formula() {
    std::vector<Form> parts{unary_f()};
    while (punct("&&")) {
      ++p_;
      parts.push_back(unary_f());
    }
    return parts.size() == 1 ? parts[0] : T::conj(parts);
  }

  Form unary_f() {
    if (punct("!")) {
      ++p_;
      return T::neg(unary_f());
    }
    if (ident("true")) {
      ++p_;
      return T::tru();
    }
    if (punct("(")) {
      size_t save = p_;
      try {
        ++p_;
        Form f = formula();
        expect(")");
        static const char *ops[] = {"==", "=", "!=", "<=", "<", ">=", ">", "+", "-", "*", "/", "%"};
        bool follows_op = false;
        for (auto o : ops) follows_op |= punct(o);
        follows_op |= ident("in") || ident("notin");
        if (!follows_op) return f;
      } catch (const Error &) {
      }
      p_ = save;
    }
    return atom();
  }

  bool starts_seq() const {
    return (ident("idx") && punct("(", 1)) || ident("nil") || (ident("cons") && punct("(", 1)) ||
           (ident("snoc") && punct("(", 1)) || (ident("tl") && punct("(", 1)) || punct("[");
  }

  Form atom() {
    if (starts_seq()) {
      SeqT a = seq();
      if (!(punct("==") || punct("=") || punct("!="))) fail("expected '==' after sequence");
      bool neg = punct("!=");
      ++p_;
      SeqT b = seq();
      Form f = T::seqeq(a, b);
      return neg ? T::neg(f) : f;
    }
    IntT a = term();
    if (ident("in") || ident("notin")) {
      bool neg = ident("notin");
      ++p_;
      SeqT s = seq();
      return neg ? T::notmem(a, s) : T::mem(a, s);
    }
    std::string op;
    for (auto o : {"==", "=", "!=", "<=", "<", ">=", ">"})
      if (punct(o)) op = o;
    if (op.empty()) fail("expected comparison");
    ++p_;
    IntT b = term();
    if (op == "==" || op == "=") return T::eq(a, b);
    if (op == "!=") return T::ne(a, b);
    if (op == "<=") return T::le(a, b);
    if (op == "<") return T::lt(a, b);
    if (op == ">=") return T::le(b, a);
    return T::lt(b, a);
  }

  SeqT seq() {
    if (ident("idx")) {
      ++p_;
      expect("(");
      std::string a = name();
      expect(")");
      return T::svar(a);
    }
    if (ident("nil")) {
      ++p_;
      return T::nil();
    }
    if (ident("cons")) {
      ++p_;
      expect("(");
      IntT x = term();
      expect(",");
      SeqT r = seq();
      expect(")");
      return T::cons(x, r);
    }
    if (ident("snoc")) {
      ++p_;
      expect("(");
      SeqT r = seq();
      expect(",");
      IntT x = term();
      expect(")");
      return T::snoc(r, x);
    }
    if (ident("tl")) {
      ++p_;
      expect("(");
      SeqT r = seq();
      expect(")");
      return T::tl(r);
    }
    if (punct("[")) {
      ++p_;
      IntT lo = term();
      expect(",");
      IntT hi = term();
      expect(";");
      IntT st = term();
      expect("]");
      return T::range(lo, hi, st);
    }
    fail("expected index sequence");
  }

  IntT term() {
    IntT l = mul();
    while (punct("+") || punct("-")) {
      BinOp o = punct("+") ? BinOp::Add : BinOp::Sub;
      ++p_;
      l = T::op(o, l, mul());
    }
    return l;
  }
  IntT mul() {
    IntT l = unary();
    while (punct("*") || punct("/") || punct("%")) {
      BinOp o = punct("*") ? BinOp::Mul : punct("/") ? BinOp::Div : BinOp::Mod;
      ++p_;
      l = T::op(o, l, unary());
    }
    return l;
  }
  IntT unary() {
    if (punct("-")) {
      ++p_;
      if (t_[p_].kind == FTok::Num) return T::num(-parse_int(t_[p_++].text));
      return T::op(BinOp::Sub, T::num(0), unary());
    }
    return primary();
  }
  IntT primary() {
    if (t_[p_].kind == FTok::Num) return T::num(parse_int(t_[p_++].text));
    if (punct("(")) {
      ++p_;
      IntT t = term();
      expect(")");
      return t;
    }
    if (t_[p_].kind != FTok::Ident) fail("expected term");
    if (ident("hd") && punct("(", 1)) {
      p_ += 2;
      SeqT s = seq();
      expect(")");
      return T::hd(s);
    }
    for (auto [kw, op] : {std::pair{"lt", BinOp::Lt}, {"le", BinOp::Le}, {"eq", BinOp::Eq}}) {
      if (ident(kw) && punct("(", 1)) {
        p_ += 2;
        IntT a = term();
        expect(",");
        IntT b = term();
        expect(")");
        return T::op(op, a, b);
      }
    }
    if (ident("buf") && punct("(", 1)) {
      p_ += 2;
      std::string b = name();
      expect(")");
      return T::var(b);
    }
    std::string n = name();
    if (!punct("[") && !punct("{")) return T::var(n);
    ArrT a = T::avar(n);
    while (punct("{")) {
      ++p_;
      IntT i = term();
      expect("->");
      IntT v = term();
      expect("}");
      a = T::upd(a, i, v);
    }
    if (!punct("[")) fail("array term must be indexed");
    ++p_;
    IntT i = term();
    expect("]");
    return T::sel(a, i);
  }
};

} // namespace

Form parse_formula(const std::string &text) { return FParser(text).formula_top(); }
IntT parse_term(const std::string &text) { return FParser(text).term_top(); }

} // namespace streamline
