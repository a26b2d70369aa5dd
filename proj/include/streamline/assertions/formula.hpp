#pragma once

#include "streamline/frontend/ast.hpp"

#include <functional>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

namespace streamline {

struct IntTerm;
struct ArrTerm;
struct SeqTerm;
struct Formula;
using IntT = std::shared_ptr<const IntTerm>;
using ArrT = std::shared_ptr<const ArrTerm>;
using SeqT = std::shared_ptr<const SeqTerm>;
using Form = std::shared_ptr<const Formula>;

// Integer terms. Program expressions embed as Const/Var/Op.
struct IntTerm {
  enum class K { Const, Var, Op, Select, Head };
  K k;
  Int value;
  std::string name;
  BinOp op = BinOp::Add;
  IntT a, b;   // Op operands, Select index in `a`
  ArrT arr;    // Select
  SeqT seq;    // Head
};

struct ArrTerm {
  enum class K { Var, Update };
  K k;
  std::string name;
  ArrT base;
  IntT idx, val;
};

// Index sequence terms; SeqVar(a) is ι_a. Range is [lo, hi; step].
struct SeqTerm {
  enum class K { Var, Nil, ConsHead, ConsTail, Tail, Range };
  K k;
  std::string name;
  IntT t;    // ConsHead / ConsTail element
  SeqT rest; // ConsHead / ConsTail / Tail operand
  IntT lo, hi, step;
};

struct Formula {
  enum class K { True, Eq, Le, Mem, SeqEq, And, Not };
  K k;
  IntT a, b;              // Eq, Le; Mem element in `a`
  SeqT s, s2;             // Mem sequence in `s`; SeqEq
  std::vector<Form> kids; // And (n-ary), Not (one child)
};

namespace T {
IntT num(Int v);
IntT var(const std::string &n);
IntT op(BinOp o, IntT a, IntT b);
IntT add(IntT a, IntT b);
IntT sub(IntT a, IntT b);
IntT sel(ArrT a, IntT i);
IntT hd(SeqT s);
IntT of_expr(const Expr &e);
IntT of_atom(const Atom &a);

ArrT avar(const std::string &n);
ArrT upd(ArrT base, IntT i, IntT v);

SeqT svar(const std::string &array);
SeqT nil();
SeqT cons(IntT t, SeqT s);
SeqT snoc(SeqT s, IntT t);
SeqT tl(SeqT s);
SeqT range(IntT lo, IntT hi, IntT step);

Form tru();
Form eq(IntT a, IntT b);
Form ne(IntT a, IntT b);
Form le(IntT a, IntT b);
Form lt(IntT a, IntT b);
Form mem(IntT t, SeqT s);
Form notmem(IntT t, SeqT s);
Form seqeq(SeqT a, SeqT b);
Form conj(std::vector<Form> fs);
Form conj(Form a, Form b);
Form neg(Form f);
// ¬(a ∧ ¬b)
Form implies(Form a, Form b);
} // namespace T

// ---- evaluation ----

using RegFile = std::map<std::string, Int>;
using Witness = std::map<std::string, std::vector<Int>>;

class HeapView {
public:
  virtual ~HeapView() = default;
  virtual std::optional<Int> get(const std::string &a, const Int &idx) const = 0;
};

// Finite heap: (array, offset) -> value.
class MapHeap : public HeapView {
public:
  std::map<std::string, std::map<Int, Int>> cells;
  std::optional<Int> get(const std::string &a, const Int &idx) const override;
  void set(const std::string &a, const Int &idx, const Int &v) { cells[a][idx] = v; }
  bool operator==(const MapHeap &o) const { return cells == o.cells; }
};

// Total pseudo-random heap keyed by a seed, with an overlay of writes.
class SeededHeap : public HeapView {
public:
  explicit SeededHeap(uint64_t seed) : seed_(seed) {}
  std::optional<Int> get(const std::string &a, const Int &idx) const override;
  void set(const std::string &a, const Int &idx, const Int &v) { overlay_[a][idx] = v; }
  uint64_t seed() const { return seed_; }

private:
  uint64_t seed_;
  std::map<std::string, std::map<Int, Int>> overlay_;
};

struct EvalCtx {
  const RegFile &regs;
  const HeapView &heap;
  const Witness &iseq;
};

constexpr size_t kMaxRangeLen = 1u << 20;

std::optional<Int> eval_int(const EvalCtx &c, const IntT &t);
std::optional<std::vector<Int>> eval_seq(const EvalCtx &c, const SeqT &s);
// Remark 1: atoms with an undefined subterm are false; Not flips.
bool eval_formula(const EvalCtx &c, const Form &f);
bool eval_formula(const RegFile &r, const HeapView &h, const Witness &i, const Form &f);

// Denotation of [lo, hi; step]; nullopt when step is 0 or the range is huge.
std::optional<std::vector<Int>> range_denotation(const Int &lo, const Int &hi, const Int &step);

// ---- substitution ----

struct Subst {
  std::map<std::string, IntT> ints;
  std::map<std::string, ArrT> arrs;
  std::map<std::string, SeqT> seqs; // keyed by array name (ι_a)
  bool empty() const { return ints.empty() && arrs.empty() && seqs.empty(); }
};

IntT subst(const IntT &t, const Subst &s);
ArrT subst(const ArrT &t, const Subst &s);
SeqT subst(const SeqT &t, const Subst &s);
Form subst(const Form &f, const Subst &s);

// ---- structure ----

std::string str(const IntT &t);
std::string str(const ArrT &t);
std::string str(const SeqT &t);
std::string str(const Form &f);

bool equal(const Form &a, const Form &b);
bool equal(const IntT &a, const IntT &b);

struct FreeVars {
  std::set<std::string> ints, arrays, seqs;
};
void free_vars(const Form &f, FreeVars &out);
void free_vars(const IntT &t, FreeVars &out);
void free_vars(const SeqT &t, FreeVars &out);
FreeVars free_vars(const Form &f);

// Flattens conjunctions, drops `true`, removes double negation and duplicate
// conjuncts, folds constant arithmetic and canonicalizes linear terms, then
// sorts conjuncts by their text.
Form normalize(const Form &f);
IntT normalize(const IntT &t);

// Conjuncts of a (possibly nested) And; `true` yields none.
std::vector<Form> conjuncts(const Form &f);

size_t formula_size(const Form &f);

// ---- text form ----
Form parse_formula(const std::string &text);
IntT parse_term(const std::string &text);

} // namespace streamline
