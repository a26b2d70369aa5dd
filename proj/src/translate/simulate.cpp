#include "streamline/translate/translate.hpp"

namespace streamline {

ExecInput sample_input(const Program &p, const std::map<std::string, Int> &params, std::mt19937_64 &rng,
                       int lo, int hi) {
  ExecInput in;
  in.params = params;
  Int top = 0;
  for (auto &[n, v] : params) top = std::max(top, v);
  std::uniform_int_distribution<int> val(lo, hi);
  for (auto &d : p.decls) {
    if (d.kind != DeclKind::RArr && d.kind != DeclKind::WArr && d.kind != DeclKind::Arr) continue;
    for (Int i = -2; i <= 2 * top + 2; ++i) in.heap.cells[d.name][i] = val(rng);
  }
  return in;
}

SimResult simulate_pair(const Program &source, const Program &target, const TypeEnv &host,
                        const Form &final_assertion, const std::set<std::string> &conv,
                        const ExecInput &in, uint64_t fuel) {
  SimResult r;
  RunOptions o;
  o.fuel = fuel;
  r.src = run_source(source, in, o);
  r.tgt = run_target(target, in, o);
  if (r.src.status != r.tgt.status) {
    r.ok = false;
    r.why = std::string("source ") + status_name(r.src.status) + ", target " + status_name(r.tgt.status);
    if (!r.src.stuck_reason.empty()) r.why += " (source: " + r.src.stuck_reason + ")";
    if (!r.tgt.stuck_reason.empty()) r.why += " (target: " + r.tgt.stuck_reason + ")";
    return r;
  }
  if (r.src.status != ExecStatus::Ok) return r;

  Witness I;
  MapHeap none;
  Witness empty;
  for (auto &c : conjuncts(final_assertion)) {
    if (c->k != Formula::K::SeqEq || c->s->k != SeqTerm::K::Var || !conv.count(c->s->name)) continue;
    auto v = eval_seq(EvalCtx{r.tgt.final_state.regs, none, empty}, c->s2);
    if (!v) {
      r.ok = false;
      r.why = "final index sequence of " + c->s->name + " is undefined";
      return r;
    }
    I[c->s->name] = *v;
  }
  for (auto &a : conv)
    if (!I.count(a)) {
      r.ok = false;
      r.why = "final assertion gives no index sequence for " + a;
      return r;
    }
  r.ok = check_sim_relation(r.src.final_state, r.tgt.final_state, host, final_assertion, I, &r.why);
  return r;
}

SimResult simulate_pair(const Translation &t, const ExecInput &in, bool simplified) {
  return simulate_pair(t.source, simplified ? t.target : t.target_twostep,
                       t.derivation.envs.empty() ? flip(typecheck(t.source)) : t.derivation.envs[0],
                       t.derivation.root.j.post, t.report.conv, in);
}

} // namespace streamline
