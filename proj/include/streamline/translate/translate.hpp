#pragma once

#include "streamline/bufferpass/plan.hpp"
#include "streamline/semantics/machine.hpp"
#include "streamline/translate/check.hpp"
#include "streamline/translate/derivation.hpp"
#include "streamline/vcgen/solve.hpp"

#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace streamline {

// Builds the derivation of {Φ_init} source ⟹ project_target(rel, conv) {Φ_final}
// from solved invariants. Every entailment is discharged on the way; the ones
// that fail are listed in `failures` (the derivation is still returned).
struct BuildResult {
  Derivation d;
  std::vector<std::string> failures;
};
BuildResult build_derivation(const BufferPlan &plan, const std::set<std::string> &conv,
                             const InvariantSet &invs, const SampleConfig &sample,
                             const SmtConfig *smt = nullptr);

// Host and kernel environments for a conversion: the declared environment
// (flipped for the host) plus the buffers the target uses.
std::vector<TypeEnv> derivation_envs(const BufferPlan &plan, const std::set<std::string> &conv);

// b := a.read(); x := b  becomes  x := a.read()
// b := x; a.write(b)     becomes  a.write(x)
// for every buffer whose only uses are such adjacent pairs; unused buffer
// declarations are dropped.
// Loop invariant hints from a file of "L<loop>: <formula>" lines ('#' starts a
// comment). Loops are numbered in pre-order as in the report.
std::map<int, std::string> parse_annotations(const std::string &text);
// Sets the annotation of the numbered loops, replacing inline ones.
Program annotate_loops(const Program &p, const std::map<int, std::string> &anns);

Program simplify_target(const Program &t);

struct TranslateConfig {
  InferConfig infer;
  bool simplify = true;
  bool buffer_only = false; // stop after buffer insertion, every candidate converted
  bool check = true;        // run the independent derivation checker
};

struct Report {
  std::set<std::string> candidates;
  std::set<std::string> conv;
  std::map<std::string, std::string> given_up; // array -> reason
  std::map<int, std::string> invariants;       // loop id -> invariant
  std::string final_assertion;
  size_t vcs = 0;
  std::string mode; // sampled | sampled+smt
  size_t derivation_nodes = 0;
  bool derivation_ok = false;
  std::string derivation_message;
  double seconds = 0;
  std::vector<std::string> log;
};

struct Translation {
  Program source;
  Program target;         // simplified unless disabled
  Program target_twostep; // exactly the derivation's target
  BufferPlan plan;
  InferResult infer;
  Derivation derivation;
  CheckResult check;
  Report report;
};

// Never fails on inference: arrays that cannot be justified stay arrays.
Translation translate(const Checked &c, const TranslateConfig &cfg = {});
Translation translate_text(const std::string &text, const TranslateConfig &cfg = {});

std::string report_json(const Report &r, int indent = 1);

// Random initial data: every declared array gets values in [lo, hi] on the
// indices [-2, 2 * (largest param) + 2].
ExecInput sample_input(const Program &p, const std::map<std::string, Int> &params, std::mt19937_64 &rng,
                       int lo = -100, int hi = 100);

// Runs source and target on the same input and checks that they end in the
// same status and, when both terminate, in states related by the final
// assertion (the witness for each converted array is read off that assertion).
struct SimResult {
  bool ok = true;
  std::string why;
  ExecReport src, tgt;
};
SimResult simulate_pair(const Program &source, const Program &target, const TypeEnv &host,
                        const Form &final_assertion, const std::set<std::string> &conv,
                        const ExecInput &in, uint64_t fuel = kDefaultFuel);
SimResult simulate_pair(const Translation &t, const ExecInput &in, bool simplified = true);

} // namespace streamline
