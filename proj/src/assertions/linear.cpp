#include "streamline/assertions/linear.hpp"

namespace streamline {

LinExpr LinExpr::var(const std::string &x, Int c) {
  LinExpr e;
  if (c != 0) e.coef[x] = std::move(c);
  return e;
}

Int LinExpr::coeff(const std::string &x) const {
  auto it = coef.find(x);
  return it == coef.end() ? Int(0) : it->second;
}

LinExpr LinExpr::operator+(const LinExpr &o) const {
  LinExpr r = *this;
  r.c0 += o.c0;
  for (auto &[x, c] : o.coef) {
    Int &slot = r.coef[x];
    slot += c;
    if (slot == 0) r.coef.erase(x);
  }
  return r;
}

LinExpr LinExpr::operator-(const LinExpr &o) const { return *this + (-o); }

LinExpr LinExpr::operator*(const Int &k) const {
  LinExpr r;
  if (k == 0) return r;
  r.c0 = c0 * k;
  for (auto &[x, c] : coef) r.coef[x] = c * k;
  return r;
}

bool LinExpr::operator<(const LinExpr &o) const {
  if (c0 != o.c0) return c0 < o.c0;
  return coef < o.coef;
}

LinExpr LinExpr::subst(const std::string &x, const LinExpr &e) const {
  auto it = coef.find(x);
  if (it == coef.end()) return *this;
  LinExpr r = *this;
  Int c = it->second;
  r.coef.erase(x);
  return r + e * c;
}

std::optional<Int> LinExpr::eval(const RegFile &r) const {
  Int v = c0;
  for (auto &[x, c] : coef) {
    auto it = r.find(x);
    if (it == r.end()) return std::nullopt;
    v += c * it->second;
  }
  return v;
}

std::set<std::string> LinExpr::vars() const {
  std::set<std::string> s;
  for (auto &kv : coef) s.insert(kv.first);
  return s;
}

IntT LinExpr::term() const {
  IntT acc;
  for (auto &[x, c] : coef) {
    if (!acc) {
      acc = c == 1 ? T::var(x) : T::op(BinOp::Mul, T::num(c), T::var(x));
      continue;
    }
    Int m = c < 0 ? Int(-c) : c;
    IntT part = m == 1 ? T::var(x) : T::op(BinOp::Mul, T::num(m), T::var(x));
    acc = T::op(c < 0 ? BinOp::Sub : BinOp::Add, acc, part);
  }
  if (!acc) return T::num(c0);
  if (c0 > 0) return T::add(acc, T::num(c0));
  if (c0 < 0) return T::sub(acc, T::num(-c0));
  return acc;
}

std::string LinExpr::str() const { return streamline::str(term()); }

std::optional<LinExpr> linearize(const IntT &t) {
  switch (t->k) {
  case IntTerm::K::Const: return LinExpr(t->value);
  case IntTerm::K::Var: return LinExpr::var(t->name);
  case IntTerm::K::Select:
  case IntTerm::K::Head: return std::nullopt;
  case IntTerm::K::Op: break;
  }
  auto a = linearize(t->a);
  if (!a) return std::nullopt;
  auto b = linearize(t->b);
  if (!b) return std::nullopt;
  switch (t->op) {
  case BinOp::Add: return *a + *b;
  case BinOp::Sub: return *a - *b;
  case BinOp::Mul:
    if (a->is_const()) return *b * a->c0;
    if (b->is_const()) return *a * b->c0;
    return std::nullopt;
  default: break;
  }
  if (!a->is_const() || !b->is_const()) return std::nullopt;
  const Int &x = a->c0, &y = b->c0;
  switch (t->op) {
  case BinOp::Div:
    if (y == 0) return std::nullopt;
    return LinExpr(div_trunc(x, y));
  case BinOp::Mod:
    if (y == 0) return std::nullopt;
    return LinExpr(mod_trunc(x, y));
  case BinOp::Lt: return LinExpr(Int(x < y ? 1 : 0));
  case BinOp::Eq: return LinExpr(Int(x == y ? 1 : 0));
  case BinOp::Le: return LinExpr(Int(x <= y ? 1 : 0));
  default: return std::nullopt;
  }
}

std::optional<LinExpr> linearize(const Expr &e) { return linearize(T::of_expr(e)); }

SeqT IndexRange::term() const { return T::range(lo.term(), hi.term(), step.term()); }

std::optional<std::vector<Int>> IndexRange::denote(const RegFile &r) const {
  auto l = lo.eval(r), h = hi.eval(r), s = step.eval(r);
  if (!l || !h || !s) return std::nullopt;
  return range_denotation(*l, *h, *s);
}

IndexRange IndexRange::subst(const std::string &x, const LinExpr &e) const {
  return {lo.subst(x, e), hi.subst(x, e), step.subst(x, e)};
}

std::string IndexRange::str() const { return streamline::str(term()); }

Form range_to_formula(const IntT &x, const IndexRange &r, Polarity pol) {
  if (!r.step.is_const() || r.step.c0 == 0)
    throw Error("range membership needs a nonzero constant step: " + r.str());
  const Int &s = r.step.c0;
  auto lx = linearize(x);
  std::vector<Form> parts;
  IntT diff;
  if (s > 0) {
    parts.push_back(T::le(r.lo.term(), x));
    parts.push_back(T::le(x, r.hi.term()));
    diff = lx ? (*lx - r.lo).term() : T::sub(x, r.lo.term());
  } else {
    parts.push_back(T::le(r.hi.term(), x));
    parts.push_back(T::le(x, r.lo.term()));
    diff = lx ? (r.lo - *lx).term() : T::sub(r.lo.term(), x);
  }
  Int m = s < 0 ? Int(-s) : s;
  if (m != 1) parts.push_back(T::eq(T::op(BinOp::Mod, diff, T::num(m)), T::num(0)));
  Form in = T::conj(parts);
  return pol == Polarity::In ? in : T::neg(in);
}

Form restricted_to_formula(const RestrictedAssertion &ra) {
  std::vector<Form> parts;
  for (auto &[a, r] : ra.ranges) parts.push_back(T::seqeq(T::svar(a), r.term()));
  for (auto &bf : ra.buffer_facts)
    parts.push_back(T::eq(T::var(bf.buf), T::sel(T::avar(bf.arr), bf.idx.term())));
  for (auto &f : ra.loop_facts) parts.push_back(f);
  return T::conj(parts);
}

static std::optional<IndexRange> as_range(const SeqT &s) {
  if (s->k != SeqTerm::K::Range) return std::nullopt;
  auto lo = linearize(s->lo), hi = linearize(s->hi), st = linearize(s->step);
  if (!lo || !hi || !st) return std::nullopt;
  return IndexRange{*lo, *hi, *st};
}

std::optional<RestrictedAssertion> restricted_from_formula(const Form &f,
                                                          const std::set<std::string> &bufs) {
  RestrictedAssertion ra;
  for (auto &c : conjuncts(f)) {
    if (c->k == Formula::K::SeqEq) {
      SeqT v = c->s, r = c->s2;
      if (v->k != SeqTerm::K::Var) std::swap(v, r);
      auto rng = as_range(r);
      if (v->k != SeqTerm::K::Var || !rng || ra.ranges.count(v->name)) return std::nullopt;
      ra.ranges.emplace(v->name, *rng);
      continue;
    }
    if (c->k == Formula::K::Eq) {
      IntT b = c->a, s = c->b;
      if (b->k != IntTerm::K::Var) std::swap(b, s);
      if (b->k == IntTerm::K::Var && bufs.count(b->name) && s->k == IntTerm::K::Select &&
          s->arr->k == ArrTerm::K::Var) {
        if (auto idx = linearize(s->a)) {
          ra.buffer_facts.push_back({b->name, s->arr->name, *idx});
          continue;
        }
      }
    }
    FreeVars fv;
    free_vars(c, fv);
    if (!fv.arrays.empty() || !fv.seqs.empty()) return std::nullopt;
    ra.loop_facts.push_back(c);
  }
  return ra;
}

} // namespace streamline
