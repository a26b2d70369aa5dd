#include "streamline/semantics/machine.hpp"

#include <algorithm>

namespace streamline {

const char *status_name(ExecStatus s) {
  switch (s) {
  case ExecStatus::Ok: return "ok";
  case ExecStatus::Stuck: return "stuck";
  case ExecStatus::OutOfFuel: return "out_of_fuel";
  }
  return "?";
}

AccessCounters ExecReport::kernel(const std::string &a) const {
  auto it = kernel_counts.find(a);
  return it == kernel_counts.end() ? AccessCounters{} : it->second;
}
AccessCounters ExecReport::host(const std::string &a) const {
  auto it = host_counts.find(a);
  return it == host_counts.end() ? AccessCounters{} : it->second;
}

static nlohmann::ordered_json int_json(const Int &v) {
  if (v >= Int(INT64_MIN) && v <= Int(INT64_MAX)) return v.convert_to<long long>();
  return v.str();
}

static nlohmann::ordered_json counters_json(const std::map<std::string, AccessCounters> &m) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (auto &[a, c] : m)
    j[a] = {{"heap_reads", c.heap_reads},
            {"heap_writes", c.heap_writes},
            {"stream_reads", c.stream_reads},
            {"stream_writes", c.stream_writes}};
  return j;
}

static nlohmann::ordered_json state_json(const MachineState &s) {
  nlohmann::ordered_json regs = nlohmann::ordered_json::object();
  for (auto &[x, v] : s.regs) regs[x] = int_json(v);
  nlohmann::ordered_json heap = nlohmann::ordered_json::object();
  for (auto &[a, cells] : s.heap.cells) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::object();
    for (auto &[i, v] : cells) arr[i.str()] = int_json(v);
    heap[a] = arr;
  }
  nlohmann::ordered_json streams = nlohmann::ordered_json::object();
  for (auto &[a, q] : s.streams) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (auto &v : q) arr.push_back(int_json(v));
    streams[a] = arr;
  }
  return {{"regs", regs}, {"heap", heap}, {"streams", streams}};
}

nlohmann::ordered_json ExecReport::to_json() const {
  nlohmann::ordered_json j;
  j["status"] = status_name(status);
  if (status == ExecStatus::Stuck) {
    j["stuck"] = {{"line", stuck_loc.line}, {"col", stuck_loc.col}, {"reason", stuck_reason}};
  }
  j["steps"] = steps;
  j["state"] = state_json(final_state);
  j["counters"] = {{"kernel", counters_json(kernel_counts)}, {"host", counters_json(host_counts)}};
  if (!trace.empty()) j["trace"] = trace;
  return j;
}

// ---------------------------------------------------------------- input

static Int json_int(const nlohmann::json &v, const std::string &what) {
  if (v.is_number_integer()) return Int(v.get<long long>());
  if (v.is_number_unsigned()) return Int(v.get<unsigned long long>());
  if (v.is_string()) {
    try {
      return parse_int(v.get<std::string>());
    } catch (const Error &) {
    }
  }
  throw Error("input: " + what + " must be an integer");
}

ExecInput parse_input(const nlohmann::json &j) {
  if (!j.is_object()) throw Error("input: top level must be an object");
  ExecInput in;
  for (auto &[k, v] : j.items()) {
    if (k == "params" || k == "regs") {
      if (!v.is_object()) throw Error("input: '" + k + "' must be an object");
      for (auto &[x, n] : v.items()) {
        Int val = json_int(n, k + "." + x);
        if (k == "params")
          in.params[x] = val;
        else
          in.regs[x] = val;
      }
    } else if (k == "heap") {
      if (!v.is_object()) throw Error("input: 'heap' must be an object");
      for (auto &[a, cells] : v.items()) {
        if (!cells.is_object()) throw Error("input: heap." + a + " must be an object");
        for (auto &[i, n] : cells.items()) {
          Int idx;
          try {
            idx = parse_int(i);
          } catch (const Error &) {
            throw Error("input: heap." + a + " has a non-integer index '" + i + "'");
          }
          in.heap.set(a, idx, json_int(n, "heap." + a + "." + i));
        }
      }
    } else if (k == "streams") {
      if (!v.is_object()) throw Error("input: 'streams' must be an object");
      for (auto &[a, items] : v.items()) {
        if (!items.is_array()) throw Error("input: streams." + a + " must be an array");
        auto &q = in.streams[a];
        for (auto &n : items) q.push_back(json_int(n, "streams." + a));
      }
    } else {
      throw Error("input: unknown key '" + k + "'");
    }
  }
  return in;
}

nlohmann::ordered_json input_to_json(const ExecInput &in) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json params = nlohmann::ordered_json::object();
  for (auto &[x, v] : in.params) params[x] = int_json(v);
  j["params"] = params;
  if (!in.regs.empty()) {
    nlohmann::ordered_json regs = nlohmann::ordered_json::object();
    for (auto &[x, v] : in.regs) regs[x] = int_json(v);
    j["regs"] = regs;
  }
  MachineState s{{}, in.heap, in.streams};
  auto st = state_json(s);
  j["heap"] = st["heap"];
  j["streams"] = st["streams"];
  return j;
}

// ---------------------------------------------------------------- machine

static std::optional<Int> atom_val(const RegFile &r, const Atom &a) {
  if (!a.is_var) return a.value;
  auto it = r.find(a.name);
  if (it == r.end()) return std::nullopt;
  return it->second;
}

std::optional<Int> eval_expr(const RegFile &r, const Expr &e) {
  switch (e.kind) {
  case Expr::Kind::Const: return e.value;
  case Expr::Kind::Var: {
    auto it = r.find(e.name);
    if (it == r.end()) return std::nullopt;
    return it->second;
  }
  case Expr::Kind::Bin: break;
  }
  auto x = atom_val(r, e.lhs);
  auto y = atom_val(r, e.rhs);
  if (!x || !y) return std::nullopt;
  switch (e.op) {
  case BinOp::Add: return *x + *y;
  case BinOp::Sub: return *x - *y;
  case BinOp::Mul: return *x * *y;
  case BinOp::Div:
    if (*y == 0) return std::nullopt;
    return div_trunc(*x, *y);
  case BinOp::Mod:
    if (*y == 0) return std::nullopt;
    return mod_trunc(*x, *y);
  case BinOp::Lt: return Int(*x < *y ? 1 : 0);
  case BinOp::Eq: return Int(*x == *y ? 1 : 0);
  case BinOp::Le: return Int(*x <= *y ? 1 : 0);
  }
  return std::nullopt;
}

namespace {

struct Stuck {
  SrcLoc loc;
  std::string reason;
};
struct NoFuel {};

class Machine {
public:
  Machine(ExecReport &rep, const RunOptions &o) : rep_(rep), st_(rep.final_state), opt_(o) {}

  void exec(const StmtPtr &s) {
    if (++rep_.steps > opt_.fuel) {
      rep_.steps = opt_.fuel;
      throw NoFuel{};
    }
    std::visit([&](const auto &n) { step(n, *s); }, s->node);
  }

private:
  ExecReport &rep_;
  MachineState &st_;
  const RunOptions &opt_;
  bool in_kernel_ = false;

  AccessCounters &counters(const std::string &a) {
    return in_kernel_ ? rep_.kernel_counts[a] : rep_.host_counts[a];
  }
  void log(const std::string &m) {
    if (opt_.trace) rep_.trace.push_back(std::to_string(rep_.steps) + (in_kernel_ ? " K " : " H ") + m);
  }

  Int eval(const Expr &e, const Stmt &s) {
    auto v = eval_expr(st_.regs, e);
    if (!v) {
      std::set<std::string> vs;
      e.vars(vs);
      for (auto &x : vs)
        if (!st_.regs.count(x)) throw Stuck{s.loc, "unbound variable " + x};
      throw Stuck{s.loc, "division by zero"};
    }
    return *v;
  }
  const Int &reg(const std::string &x, const Stmt &s) {
    auto it = st_.regs.find(x);
    if (it == st_.regs.end()) throw Stuck{s.loc, "unbound variable " + x};
    return it->second;
  }

  void step(const ReadArr &n, const Stmt &s) {
    Int i = eval(n.idx, s);
    auto v = st_.heap.get(n.a, i);
    if (!v) throw Stuck{s.loc, "read of undefined address " + n.a + "[" + i.str() + "]"};
    counters(n.a).heap_reads++;
    log(n.x + " := " + n.a + "[" + i.str() + "] = " + v->str());
    st_.regs[n.x] = *v;
  }
  void step(const WriteArr &n, const Stmt &s) {
    Int i = eval(n.idx, s);
    const Int &v = reg(n.x, s);
    counters(n.a).heap_writes++;
    log(n.a + "[" + i.str() + "] := " + v.str());
    st_.heap.set(n.a, i, v);
  }
  void step(const ReadStream &n, const Stmt &s) {
    auto &q = st_.streams[n.a];
    if (q.empty()) throw Stuck{s.loc, "read from empty stream " + n.a};
    counters(n.a).stream_reads++;
    log(n.x + " := " + n.a + ".read() = " + q.front().str());
    st_.regs[n.x] = q.front();
    q.pop_front();
  }
  void step(const WriteStream &n, const Stmt &s) {
    const Int &v = reg(n.x, s);
    counters(n.a).stream_writes++;
    log(n.a + ".write(" + v.str() + ")");
    st_.streams[n.a].push_back(v);
  }
  void step(const Assign &n, const Stmt &s) { st_.regs[n.x] = eval(n.e, s); }
  void step(const Seq &n, const Stmt &) {
    for (auto &c : n.items) exec(c);
  }
  void step(const If &n, const Stmt &s) {
    if (reg(n.x, s) != 0)
      exec(n.then_s);
    else
      exec(n.else_s);
  }
  void step(const For &n, const Stmt &s) {
    Int k = eval(n.init, s);
    for (;;) {
      st_.regs[n.x] = k;
      Int m = eval(n.bound, s);
      if (k == m) return;
      exec(n.body);
      if (++rep_.steps > opt_.fuel) {
        rep_.steps = opt_.fuel;
        throw NoFuel{};
      }
      k = reg(n.x, s) + n.step;
    }
  }
  void step(const Kernel &n, const Stmt &) {
    bool saved = in_kernel_;
    in_kernel_ = true;
    exec(n.body);
    in_kernel_ = saved;
  }
  void step(const Call &n, const Stmt &s) { throw Stuck{s.loc, "call to " + n.fn + " was not inlined"}; }
};

} // namespace

ExecReport run_program(const Program &p, const ExecInput &in, const RunOptions &o) {
  ExecReport rep;
  MachineState &st = rep.final_state;
  for (auto &[x, v] : in.params)
    if (!p.find_decl(x) || p.find_decl(x)->kind != DeclKind::Param)
      throw Error("input: '" + x + "' is not a declared param");
  for (auto &d : p.decls) {
    if (d.kind == DeclKind::Int || d.kind == DeclKind::Buf) {
      st.regs[d.name] = 0;
    } else if (d.kind == DeclKind::Param) {
      auto it = in.params.find(d.name);
      if (it == in.params.end()) throw Error("input: missing param '" + d.name + "'");
      if ((d.min && it->second < *d.min) || (d.max && it->second > *d.max))
        throw Error("input: param '" + d.name + "' = " + it->second.str() + " is out of its declared range");
      st.regs[d.name] = it->second;
    }
  }
  for (auto &[x, v] : in.regs) {
    const Decl *d = p.find_decl(x);
    if (!d || (d->kind != DeclKind::Int && d->kind != DeclKind::Buf))
      throw Error("input: '" + x + "' is not a declared register");
    st.regs[x] = v;
  }
  st.heap = in.heap;
  st.streams = in.streams;
  Machine m(rep, o);
  try {
    m.exec(p.main);
  } catch (const Stuck &s) {
    rep.status = ExecStatus::Stuck;
    rep.stuck_loc = s.loc;
    rep.stuck_reason = s.reason;
  } catch (const NoFuel &) {
    rep.status = ExecStatus::OutOfFuel;
  }
  return rep;
}

ExecReport run_source(const Program &p, const ExecInput &in, const RunOptions &o) {
  if (contains_stream_ops(p.main)) throw Error("source program contains stream operations");
  return run_program(p, in, o);
}

ExecReport run_target(const Program &p, const ExecInput &in, const RunOptions &o) {
  return run_program(p, in, o);
}

// ---------------------------------------------------------------- relation

bool check_sim_relation(const MachineState &src, const MachineState &tgt, const TypeEnv &g,
                        const Form &phi, const Witness &I, std::string *why) {
  auto fail = [&](const std::string &m) {
    if (why) *why = m;
    return false;
  };
  for (auto &[x, t] : g.bindings) {
    if (t != Ty::INT) continue;
    auto a = src.regs.find(x), b = tgt.regs.find(x);
    bool ha = a != src.regs.end(), hb = b != tgt.regs.end();
    if (ha != hb || (ha && a->second != b->second)) return fail("register " + x + " differs");
  }
  static const std::deque<Int> empty_q;
  auto stream_of = [](const MachineState &m, const std::string &a) -> const std::deque<Int> & {
    auto it = m.streams.find(a);
    return it == m.streams.end() ? empty_q : it->second;
  };
  for (auto &[a, idx] : I) {
    std::vector<Int> sorted = idx;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      return fail("witness for " + a + " repeats an index");
    const auto &q = stream_of(tgt, a);
    if (q.size() != idx.size()) return fail("stream " + a + " length differs from its witness");
    for (size_t i = 0; i < idx.size(); ++i) {
      auto v = src.heap.get(a, idx[i]);
      if (!v) return fail("witnessed index " + a + "[" + idx[i].str() + "] is undefined");
      if (*v != q[i]) return fail("stream " + a + " element " + std::to_string(i) + " differs");
    }
  }
  static const std::map<Int, Int> empty_cells;
  auto cells_of = [](const MachineState &m, const std::string &a) -> const std::map<Int, Int> & {
    auto it = m.heap.cells.find(a);
    return it == m.heap.cells.end() ? empty_cells : it->second;
  };
  for (auto &a : g.arrays()) {
    if (I.count(a)) continue;
    if (cells_of(src, a) != cells_of(tgt, a)) return fail("unconverted array " + a + " differs");
    if (stream_of(src, a) != stream_of(tgt, a)) return fail("stream " + a + " differs");
  }
  if (!eval_formula(tgt.regs, src.heap, I, phi)) return fail("assertion does not hold");
  return true;
}

} // namespace streamline
