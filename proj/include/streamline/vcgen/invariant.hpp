#pragma once

#include "streamline/assertions/linear.hpp"

#include <map>
#include <string>
#include <vector>

namespace streamline {

// Program points that carry an assertion: loop heads use the loop id.
constexpr int kFinalPoint = -1;
constexpr int kSidePoint = -2;
constexpr int kInitPoint = -3;

// Where a conjunct came from, for blame during the search.
struct Tag {
  enum class K { None, Array, Fact };
  K k = K::None;
  std::string array;
  int point = kSidePoint;
  int index = -1; // fact index within the point
};

struct Obl {
  Form f;
  Tag tag;
};
using Obls = std::vector<Obl>;

Form conj_of(const Obls &o);
Obls subst_obls(const Obls &o, const Subst &s);

// [lo, hi; step] with arbitrary integer terms (template unknowns allowed).
struct RangeT {
  IntT lo, hi, step;
  SeqT term() const { return T::range(lo, hi, step); }
  static RangeT of(const IndexRange &r) { return {r.lo.term(), r.hi.term(), r.step.term()}; }
  static RangeT empty() { return {T::num(0), T::num(-1), T::num(1)}; }
  std::string str() const;
};

struct PointInv {
  std::map<std::string, RangeT> ranges;
  std::vector<BufferFact> buffer_facts;
  std::vector<Form> facts; // arrays-free

  Obls obls(int point) const;
  Form formula() const { return normalize(conj_of(obls(0))); }
};

struct InvariantSet {
  std::map<int, PointInv> loops;
  PointInv final_inv; // used only when the program does not end with a loop
  PointInv init;      // every converted stream starts empty
};

} // namespace streamline
