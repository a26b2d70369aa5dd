#pragma once

#include "streamline/bufferpass/plan.hpp"
#include "streamline/vcgen/invariant.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace streamline {

// A snapshot at a loop head (after x is bound, before the guard) or at the end.
struct HeadObs {
  int point = kFinalPoint;
  RegFile regs;
  Witness iseq;
  SeededHeap heap{0}; // source heap at this point
};

struct RelTrace {
  std::vector<HeadObs> heads;
  std::optional<HeadObs> end;
  // Arrays whose stream plan went wrong on this run, with the reason.
  std::map<std::string, std::string> array_errors;
  bool completed = false;
  std::string stop_reason;
};

// Runs the relational program: source heap and target streams side by side,
// with the index witness of every converted array tracked as a FIFO. The heap
// is total (seeded), so reads of unwritten cells do not get stuck.
RelTrace run_rel_trace(const BufferPlan &plan, const std::set<std::string> &conv,
                       const std::map<std::string, Int> &params, uint64_t seed,
                       uint64_t fuel = 400000);

// Parameter assignments used for traces: every param set to n, clamped to its
// declared bounds, for n in [lo, hi] (duplicates removed).
std::vector<std::map<std::string, Int>> trace_param_sets(const TypeEnv &env, int lo, int hi);

} // namespace streamline
