#pragma once

#include "streamline/frontend/ast.hpp"

#include <memory>
#include <set>
#include <string>
#include <vector>

namespace streamline {

// Relational IR: the source program annotated with the target-side shape it
// takes when a given set of arrays is turned into streams. Inserted nodes
// (InsRead, InsMove) exist only on the target side and only when their array
// is converted.
struct RelNode;
using RelPtr = std::shared_ptr<const RelNode>;

enum class RelKind {
  Assign,  // x := e
  Read,    // x := a[e]      target x := b when converted
  Write,   // a[e] := x      target b := x; a.write(b) when converted
  SRead,   // x := a.read()  kept as is
  SWrite,  // a.write(x)     kept as is
  InsRead, // target-only b := a.read()
  InsMove, // target-only b := b2
  Seq,
  If,
  For,
  Kernel
};

struct RelNode {
  RelKind k = RelKind::Seq;
  std::string x, a, b, b2;
  Expr e; // Assign rhs, Read/Write index
  std::vector<RelPtr> items; // Seq
  RelPtr then_s, else_s;     // If
  RelPtr body;               // For, Kernel
  Expr init, bound;          // For
  Int step;
  std::string annotation;
  int loop_id = -1;
  SrcLoc loc;
};

namespace R {
RelPtr assign(std::string x, Expr e, SrcLoc l = {});
RelPtr read(std::string x, std::string a, Expr idx, std::string b, SrcLoc l = {});
RelPtr write(std::string a, Expr idx, std::string x, std::string b, SrcLoc l = {});
RelPtr sread(std::string x, std::string a, SrcLoc l = {});
RelPtr swrite(std::string a, std::string x, SrcLoc l = {});
RelPtr ins_read(std::string a, std::string b);
RelPtr ins_move(std::string a, std::string b, std::string b2);
RelPtr seq(std::vector<RelPtr> items);
RelPtr if_(std::string x, RelPtr t, RelPtr e, SrcLoc l = {});
RelPtr for_(std::string x, Expr init, Expr bound, Int step, RelPtr body, std::string ann,
            int loop_id, SrcLoc l = {});
RelPtr kernel(RelPtr body, SrcLoc l = {});
} // namespace R

// The source program the IR was built from.
StmtPtr project_source(const RelPtr &r);
// The target with exactly `conv` turned into streams. Reads and writes of the
// other arrays stay heap accesses and their inserted nodes disappear.
StmtPtr project_target(const RelPtr &r, const std::set<std::string> &conv);

bool node_converted(const RelNode &n, const std::set<std::string> &conv);

// Buffers used by the target projection for `conv`.
std::set<std::string> used_buffers(const RelPtr &r, const std::set<std::string> &conv);

std::string print_rel(const RelPtr &r, int indent = 0);

} // namespace streamline
