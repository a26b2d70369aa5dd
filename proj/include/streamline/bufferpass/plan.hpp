#pragma once

#include "streamline/assertions/linear.hpp"
#include "streamline/bufferpass/rel.hpp"
#include "streamline/frontend/typecheck.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace streamline {

struct LoopInfo {
  int id = -1;
  int parent = -1; // enclosing loop, -1 at top level
  int depth = 0;
  std::string x;
  Expr init, bound;
  Int step;
  std::string annotation;
  bool in_kernel = false;
  std::set<std::string> assigned; // everything assigned in the body, nested loops included
  std::set<std::string> touched;  // arrays accessed in the body, nested loops included
  SrcLoc loc;
};

// One array access. `idx` is the index as a linear expression over the
// values variables had at the start of the innermost enclosing iteration
// (nullopt when not affine). `item` is the position of the enclosing
// statement in that loop body.
struct AccessSite {
  std::string array;
  bool write = false;
  int loop = -1;
  std::optional<LinExpr> idx;
  int item = 0;
  bool in_kernel = false;
  SrcLoc loc;
};

std::vector<AccessSite> collect_access_indices(const Program &p);
std::vector<LoopInfo> collect_loops(const Program &p);

// A sliding window over a read-only array in one loop. Slot k holds element
// c*x + first + k*d at the loop head (d = c * step); slot width-1 is read
// fresh each iteration. bufs[k] holds slot k for k < width-1.
struct WindowPlan {
  int loop = -1;
  std::string array;
  Int c, d;
  LinExpr first;
  int width = 1;
  std::vector<std::string> bufs;
  std::string fresh_buf; // bufs.back() unless rotating at the end of the body
  bool end_rotation = false;
  int hoist_item = 0;
};

struct BufferPlan {
  Program source;
  TypeEnv env;
  RelPtr rel;
  std::vector<LoopInfo> loops;
  std::set<std::string> candidates;              // arrays the pass can stream
  std::map<std::string, std::string> unplannable; // array -> reason
  std::vector<WindowPlan> windows;
  std::map<std::string, std::string> buffer_array;
  std::set<std::string> direct_buffers; // only ever copied once per use

  // b_k == a[c*x + first + k*d] for the windows of `loop` over arrays in conv.
  std::vector<BufferFact> buffer_facts(int loop, const std::set<std::string> &conv) const;
  const LoopInfo &loop(int id) const { return loops.at(static_cast<size_t>(id)); }
  // Source declarations plus `buf` declarations for the buffers used by conv.
  Program target(const std::set<std::string> &conv) const;
};

// Builds the relational IR for every streamable array touched by the kernel.
BufferPlan plan_buffers(const Checked &c);

// The target with every candidate converted.
Program insert_buffers(const Checked &c);

} // namespace streamline
