#pragma once

#include "streamline/vcgen/smt.hpp"
#include "streamline/vcgen/trace.hpp"
#include "streamline/vcgen/validity.hpp"
#include "streamline/vcgen/vc.hpp"

#include <array>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace streamline {

// lo = lo0 + lo1*x, hi = hi0 + hi1*x, step = st0 + st1*x
struct Coeffs {
  std::array<IntT, 6> c;
  std::string str() const;
};

// One unknown range ι_a = [lo, hi; step] at an assertion point.
struct TemplateSlot {
  int point = kFinalPoint;
  std::string array;
  std::string x;       // loop variable; empty at the program end
  bool moving = false; // coefficients of x may be nonzero
  bool fixed = false;  // given by an annotation
  RangeT fixed_range;
  std::vector<Coeffs> candidates;
  size_t choice = 0;

  RangeT range(const Coeffs &k) const;
  RangeT current() const { return fixed ? fixed_range : range(candidates.at(choice)); }
  std::string unknown(int i) const; // ?c_<point>_<array>_<i>
  Form template_formula() const;    // with unknowns
};

// Constant coefficient domain: 0, 1, -1, ..., range, -range, then the init,
// bound, bound-step and init-step of every loop when they only mention params.
std::vector<IntT> coefficient_domain(const BufferPlan &plan, int range = 2);
std::vector<Int> slope_domain(int range = 2);

// Candidates consistent with the observed index sequences, in lexicographic
// order of (lo0, lo1, hi0, hi1, st0, st1) over the domains.
std::vector<Coeffs> trace_candidates(const std::vector<IntT> &d0, bool moving, const std::string &x,
                                     const std::vector<std::pair<RegFile, std::vector<Int>>> &obs,
                                     size_t max, int range = 2);

struct InferConfig {
  int trace_lo = 1, trace_hi = 12;
  int seeds = 2;
  size_t max_candidates = 8;
  int max_rounds = 64;
  int coeff_range = 2; // integer coefficients range over [-coeff_range, coeff_range]
  SampleConfig sample;
  // Backend A: re-verify every solution with an external solver when set.
  std::optional<SmtConfig> smt;
};

struct VcStatus {
  VC vc;
  bool valid = false;
  std::string counterexample;
  std::vector<size_t> failed; // indices into vc.concl
  std::string smt;            // backend A verdict, empty when not run
  std::string smt_hash;
};

struct InferResult {
  bool ok = false;
  std::set<std::string> conv;
  std::map<std::string, std::string> given_up;
  InvariantSet invs;
  std::vector<TemplateSlot> templates;
  std::vector<VcStatus> vcs;
  std::vector<std::string> log;
  // "sampled" when only backend B ran (unsound mode), "sampled+smt" otherwise
  std::string mode = "sampled";
};

// Loop facts offered at each loop head before filtering: bounds of the loop
// variable, the annotation's arrays-free conjuncts, param bounds and the facts
// of enclosing loops.
std::map<int, std::vector<Form>> candidate_facts(const BufferPlan &plan);

// Backend B: trace-guided search, per-array give-up on failure.
InferResult infer_invariants(const BufferPlan &plan, std::set<std::string> conv,
                             const InferConfig &cfg = {});

// Checks every VC of an invariant set with backend B.
std::vector<VcStatus> check_vcs(const BufferPlan &plan, const std::set<std::string> &conv,
                                const InvariantSet &invs, const SampleConfig &cfg);

// Backend A over statuses that backend B accepted. An invalid VC is marked
// failed with the obligations the solver refutes one by one.
void reverify_smt(std::vector<VcStatus> &st, const SmtConfig &cfg);

} // namespace streamline
