#pragma once

#include "streamline/bufferpass/plan.hpp"
#include "streamline/vcgen/invariant.hpp"

#include <set>
#include <string>
#include <vector>

namespace streamline {

// Backward transformers for the atomic translation steps. `conv` is the set of
// arrays turned into streams; nodes over other arrays are kept as they are.
Obls awp_assign(const std::string &x, const Expr &e, const Obls &q);
Obls awp_readmem(const std::string &x, const std::string &a, const Expr &idx,
                 const std::string &b, const Obls &q);
Obls awp_keep_read(const std::string &x, const std::string &a, const Expr &idx, const Obls &q);
Obls awp_writemem(const std::string &a, const Expr &idx, const std::string &x,
                  const std::string &b, const Obls &q);
Obls awp_keep_write(const std::string &a, const Expr &idx, const std::string &x, const Obls &q);
Obls awp_ins_wbuf(const std::string &a, const IntT &n, const std::string &b, const Obls &q);
Obls awp_ins_rbuf(const std::string &a, const std::string &b, const Obls &q);
Obls awp_ins_move(const std::string &b, const std::string &b2, const Obls &q);
// Pre-existing stream ops: sound only when neither the target variable nor
// the array's index sequence occurs in q (Error otherwise).
Obls awp_keep_stream(const RelNode &n, const Obls &q);
Obls awp_if(const std::string &x, const Obls &q_then, const Obls &q_else);

// Any non-structural rel node.
Obls awp_atomic(const RelNode &n, const std::set<std::string> &conv, const Obls &q);

IntT loop_bound_term(const RelNode &f);
// Inv[m/x] /\ x == m
Obls exit_obls(const RelNode &f, const Obls &inv);
// Last loop executed at the top level (descending into kernel blocks), or -1.
int final_loop(const RelPtr &main);

enum class VcKind { Init, Inductive, Exit, Continue };
const char *vc_kind_name(VcKind k);

struct VC {
  VcKind kind = VcKind::Init;
  int loop = -1; // the loop this VC belongs to (-1 for the program start)
  std::string label;
  Form hyp;
  Obls concl;
  int hyp_point = kInitPoint; // assertion point the hypothesis comes from
};

// The program-start assertion: every stream in conv is empty, plus param bounds.
PointInv initial_assertion(const BufferPlan &plan, const std::set<std::string> &conv);
std::vector<Form> param_facts(const TypeEnv &env);

// VCs for the whole program: per loop inductive and exit, one after each loop
// whose exit assertion differs from what follows, and one at program start.
std::vector<VC> gen_vcs(const BufferPlan &plan, const std::set<std::string> &conv,
                        const InvariantSet &invs);

} // namespace streamline
