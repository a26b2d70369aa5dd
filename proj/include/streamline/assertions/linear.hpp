#pragma once

#include "streamline/assertions/formula.hpp"

namespace streamline {

// c0 + sum ci * xi
struct LinExpr {
  Int c0;
  std::map<std::string, Int> coef; // no zero entries

  LinExpr() = default;
  LinExpr(Int c) : c0(std::move(c)) {}
  static LinExpr var(const std::string &x, Int c = 1);

  bool is_const() const { return coef.empty(); }
  Int coeff(const std::string &x) const;
  LinExpr operator+(const LinExpr &o) const;
  LinExpr operator-(const LinExpr &o) const;
  LinExpr operator*(const Int &k) const;
  LinExpr operator-() const { return *this * Int(-1); }
  bool operator==(const LinExpr &o) const { return c0 == o.c0 && coef == o.coef; }
  bool operator<(const LinExpr &o) const;

  LinExpr subst(const std::string &x, const LinExpr &e) const;
  std::optional<Int> eval(const RegFile &r) const;
  std::set<std::string> vars() const;
  IntT term() const;
  std::string str() const;
};

// Linear view of a term, if it only uses + - and multiplication by constants.
std::optional<LinExpr> linearize(const IntT &t);
std::optional<LinExpr> linearize(const Expr &e);

struct IndexRange {
  LinExpr lo, hi, step;
  bool operator==(const IndexRange &o) const {
    return lo == o.lo && hi == o.hi && step == o.step;
  }
  SeqT term() const;
  std::optional<std::vector<Int>> denote(const RegFile &r) const;
  IndexRange subst(const std::string &x, const LinExpr &e) const;
  std::string str() const;
};

enum class Polarity { In, NotIn };

// Membership of x in [lo,hi;step] as bounds plus divisibility; the step must
// be a nonzero constant.
Form range_to_formula(const IntT &x, const IndexRange &r, Polarity pol);

struct BufferFact {
  std::string buf, arr;
  LinExpr idx;
  bool operator==(const BufferFact &o) const {
    return buf == o.buf && arr == o.arr && idx == o.idx;
  }
};

struct RestrictedAssertion {
  std::map<std::string, IndexRange> ranges;
  std::vector<BufferFact> buffer_facts;
  std::vector<Form> loop_facts;
};

Form restricted_to_formula(const RestrictedAssertion &ra);

// Splits a conjunction into the restricted shape. Conjuncts that are neither
// range bindings nor buffer facts become loop facts; fails (nullopt) when a
// loop fact mentions arrays or sequences.
std::optional<RestrictedAssertion> restricted_from_formula(const Form &f,
                                                          const std::set<std::string> &bufs);

} // namespace streamline
