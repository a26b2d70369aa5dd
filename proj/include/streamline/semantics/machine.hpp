#pragma once

#include "streamline/assertions/formula.hpp"
#include "streamline/frontend/typecheck.hpp"

#include <deque>
#include <map>
#include <string>

#include "json.hpp"

namespace streamline {

using StreamPool = std::map<std::string, std::deque<Int>>;

struct MachineState {
  RegFile regs;
  MapHeap heap;
  StreamPool streams;
};

struct AccessCounters {
  uint64_t heap_reads = 0, heap_writes = 0, stream_reads = 0, stream_writes = 0;
  bool operator==(const AccessCounters &o) const {
    return heap_reads == o.heap_reads && heap_writes == o.heap_writes &&
           stream_reads == o.stream_reads && stream_writes == o.stream_writes;
  }
};

enum class ExecStatus { Ok, Stuck, OutOfFuel };
const char *status_name(ExecStatus s);

struct ExecReport {
  ExecStatus status = ExecStatus::Ok;
  std::string stuck_reason;
  SrcLoc stuck_loc;
  uint64_t steps = 0;
  MachineState final_state;
  // Accesses inside `kernel { }` and outside it, per array.
  std::map<std::string, AccessCounters> kernel_counts, host_counts;
  std::vector<std::string> trace;

  AccessCounters kernel(const std::string &a) const;
  AccessCounters host(const std::string &a) const;
  nlohmann::ordered_json to_json() const;
};

// Initial data for a run: {"params":{"N":8},"heap":{"a":{"0":5}},"streams":{"a":[1,2]}}
// plus an optional "regs" object.
struct ExecInput {
  std::map<std::string, Int> params;
  RegFile regs;
  MapHeap heap;
  StreamPool streams;
};

ExecInput parse_input(const nlohmann::json &j); // throws Error
nlohmann::ordered_json input_to_json(const ExecInput &in);

constexpr uint64_t kDefaultFuel = 10'000'000;

struct RunOptions {
  uint64_t fuel = kDefaultFuel;
  bool trace = false;
};

// Evaluates an expression; nullopt on an unbound variable or a zero divisor.
std::optional<Int> eval_expr(const RegFile &r, const Expr &e);

// Runs any program: arrays use the heap, stream ops use the pool. Declared INT
// and BUF variables start at 0; every param must be bound by the input and
// satisfy its declared bounds (Error otherwise).
ExecReport run_program(const Program &p, const ExecInput &in, const RunOptions &o = {});
// Same, but rejects programs containing stream operations.
ExecReport run_source(const Program &p, const ExecInput &in, const RunOptions &o = {});
ExecReport run_target(const Program &p, const ExecInput &in, const RunOptions &o = {});

// The state correspondence between a source and a target state. INT
// registers named in `g` agree; every witnessed index is in the source heap's
// domain, indices are pairwise distinct, and the stream holds exactly the
// witnessed elements in order; the target registers with the source heap and
// witness satisfy phi. Arrays of `g` without a witness must have equal heap
// contents and equal streams on both sides.
bool check_sim_relation(const MachineState &src, const MachineState &tgt, const TypeEnv &g,
                        const Form &phi, const Witness &I, std::string *why = nullptr);

} // namespace streamline
