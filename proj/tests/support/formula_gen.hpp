#pragma once

#include "streamline/assertions/formula.hpp"

#include <random>

namespace streamline::testing {

// Random formulas over registers x, y, z and arrays a, b, with states to
// evaluate them in. Deterministic per seed.
struct FGen {
  std::mt19937_64 rng;
  explicit FGen(uint64_t s) : rng(s) {}
  int pick(int n) { return static_cast<int>(rng() % n); }
  std::string ivar() {
    static const char *v[] = {"x", "y", "z"};
    return v[pick(3)];
  }
  std::string arr() { return pick(2) ? "a" : "b"; }

  IntT term(int d) {
    int k = pick(d > 0 ? 6 : 2);
    switch (k) {
    case 0: return T::num(pick(9) - 4);
    case 1: return T::var(ivar());
    case 2:
    case 3: return T::op(static_cast<BinOp>(pick(8)), term(d - 1), term(d - 1));
    case 4: return T::sel(arrt(d - 1), term(d - 1));
    default: return T::hd(seq(d - 1));
    }
  }
  ArrT arrt(int d) {
    if (d <= 0 || pick(2)) return T::avar(arr());
    return T::upd(arrt(d - 1), term(d - 1), term(d - 1));
  }
  SeqT seq(int d) {
    int k = pick(d > 0 ? 6 : 2);
    switch (k) {
    case 0: return T::svar(arr());
    case 1: return T::nil();
    case 2: return T::cons(term(d - 1), seq(d - 1));
    case 3: return T::snoc(seq(d - 1), term(d - 1));
    case 4: return T::tl(seq(d - 1));
    default: return T::range(term(d - 1), term(d - 1), T::num(pick(2) ? 1 : -2));
    }
  }
  Form form(int d) {
    int k = pick(d > 0 ? 8 : 5);
    switch (k) {
    case 0: return T::eq(term(2), term(2));
    case 1: return T::le(term(2), term(2));
    case 2: return T::mem(term(2), seq(2));
    case 3: return T::seqeq(seq(2), seq(2));
    case 4: return T::tru();
    case 5:
    case 6: return T::conj(form(d - 1), form(d - 1));
    default: return T::neg(form(d - 1));
    }
  }
  RegFile regs() {
    return {{"x", pick(7) - 3}, {"y", pick(7) - 3}, {"z", pick(7) - 3}};
  }
  MapHeap heap() {
    MapHeap h;
    for (auto a : {"a", "b"})
      for (int i = -4; i <= 4; ++i)
        if (pick(4)) h.set(a, i, pick(9) - 4);
    return h;
  }
  Witness wit() {
    Witness w;
    for (auto a : {"a", "b"}) {
      int n = pick(4);
      for (int i = 0; i < n; ++i) w[a].push_back(pick(9) - 4);
    }
    return w;
  }
};

} // namespace streamline::testing
