#pragma once

#include "streamline/assertions/formula.hpp"
#include "streamline/frontend/typecheck.hpp"

#include <set>
#include <string>
#include <vector>

namespace streamline {

// Propositional validity of hyp => concl, treating every atom as opaque.
// Sound but incomplete for arithmetic; decides the purely structural steps
// (branch guards, reordered conjunctions) without sampling.
bool prove_propositional(const Form &hyp, const Form &concl);

struct SampleConfig {
  Int n_lo = 1, n_hi = 12; // values tried for every parameter
  int seeds = 3;           // heaps
  uint64_t seed = 0;       // base of the heap seeds
  size_t max_states = 20000;
  Int small = 2; // unconstrained registers range over [-small, small]
};

struct SampleResult {
  bool valid = true;
  std::vector<size_t> failed; // indices into concl
  size_t states = 0;          // states satisfying the hypothesis
  std::string counterexample;
};

// Backend B validity: enumerates states built from the hypothesis (params,
// registers bounded by its linear facts, buffers from its buffer facts, index
// sequences from its range bindings, seeded total heaps) and evaluates each
// conclusion on every state that satisfies the hypothesis.
SampleResult check_sampled(const Form &hyp, const std::vector<Form> &concl, const TypeEnv &env,
                           const SampleConfig &cfg = {});

// prove_propositional, then check_sampled. `how` receives "propositional",
// "sampled" or "refuted".
bool entails(const Form &hyp, const Form &concl, const TypeEnv &env, const SampleConfig &cfg,
             std::string *how = nullptr, std::string *cex = nullptr);

} // namespace streamline
