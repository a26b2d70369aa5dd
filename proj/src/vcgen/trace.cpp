#include "streamline/vcgen/trace.hpp"

#include "streamline/semantics/machine.hpp"

#include <deque>

namespace streamline {

namespace {

struct Stop {
  std::string reason;
};
struct ArrayFault {
  std::string array, reason;
};

struct RelMachine {
  const std::set<std::string> &conv;
  RegFile regs;
  SeededHeap heap;
  std::map<std::string, std::deque<Int>> streams, iseq, plain;
  std::map<std::string, std::optional<std::pair<std::string, Int>>> holds; // buffer -> (array, index)
  uint64_t fuel;
  RelTrace out;

  RelMachine(const std::set<std::string> &c, uint64_t seed, uint64_t f)
      : conv(c), heap(seed), fuel(f) {}

  void tick() {
    if (fuel-- == 0) throw Stop{"out of fuel"};
  }

  Int ev(const Expr &e) {
    auto v = eval_expr(regs, e);
    if (!v) throw Stop{"undefined expression"};
    return *v;
  }

  Int get(const std::string &x) {
    auto it = regs.find(x);
    if (it == regs.end()) throw Stop{"unbound variable " + x};
    return it->second;
  }

  Int load(const std::string &a, const Int &i) { return *heap.get(a, i); }

  void observe(int point) {
    HeadObs o;
    o.point = point;
    o.regs = regs;
    o.heap = heap;
    for (auto &a : conv) {
      auto &q = iseq[a];
      o.iseq[a] = std::vector<Int>(q.begin(), q.end());
    }
    if (point == kFinalPoint) out.end = std::move(o);
    else out.heads.push_back(std::move(o));
  }

  void exec(const RelPtr &r) {
    const RelNode &n = *r;
    tick();
    bool c = node_converted(n, conv);
    switch (n.k) {
    case RelKind::Assign: regs[n.x] = ev(n.e); return;
    case RelKind::Read: {
      Int i = ev(n.e);
      if (!c) {
        regs[n.x] = load(n.a, i);
        return;
      }
      auto &h = holds[n.b];
      if (!h || h->first != n.a || h->second != i)
        throw ArrayFault{n.a, "buffer " + n.b + " does not hold " + n.a + "[" + to_string(i) + "]"};
      regs[n.x] = get(n.b);
      return;
    }
    case RelKind::Write: {
      Int i = ev(n.e);
      Int v = get(n.x);
      heap.set(n.a, i, v);
      if (!c) return;
      regs[n.b] = v;
      auto &q = iseq[n.a];
      for (auto &k : q)
        if (k == i) throw ArrayFault{n.a, "index " + to_string(i) + " written twice"};
      q.push_back(i);
      streams[n.a].push_back(v);
      holds[n.b].reset();
      return;
    }
    case RelKind::SRead: {
      auto &q = plain[n.a];
      if (q.empty()) throw Stop{"read from empty stream " + n.a};
      regs[n.x] = q.front();
      q.pop_front();
      return;
    }
    case RelKind::SWrite: plain[n.a].push_back(get(n.x)); return;
    case RelKind::InsRead: {
      if (!c) return;
      auto &q = iseq[n.a];
      if (q.empty()) throw ArrayFault{n.a, "stream " + n.a + " exhausted"};
      holds[n.b] = std::make_pair(n.a, q.front());
      q.pop_front();
      regs[n.b] = streams[n.a].front();
      streams[n.a].pop_front();
      return;
    }
    case RelKind::InsMove:
      if (!c) return;
      regs[n.b] = get(n.b2);
      holds[n.b] = holds[n.b2];
      return;
    case RelKind::Seq:
      for (auto &i : n.items) exec(i);
      return;
    case RelKind::If:
      exec(get(n.x) != 0 ? n.then_s : n.else_s);
      return;
    case RelKind::Kernel: exec(n.body); return;
    case RelKind::For: {
      regs[n.x] = ev(n.init);
      for (;;) {
        tick();
        observe(n.loop_id);
        if (get(n.x) == ev(n.bound)) break;
        exec(n.body);
        regs[n.x] = get(n.x) + n.step;
      }
      return;
    }
    }
  }
};

} // namespace

RelTrace run_rel_trace(const BufferPlan &plan, const std::set<std::string> &conv,
                       const std::map<std::string, Int> &params, uint64_t seed, uint64_t fuel) {
  RelMachine m(conv, seed, fuel);
  for (auto &d : plan.source.decls)
    if (d.kind == DeclKind::Int || d.kind == DeclKind::Buf) m.regs[d.name] = 0;
  for (auto &[b, a] : plan.buffer_array) m.regs[b] = 0;
  for (auto &[p, v] : params) m.regs[p] = v;
  for (auto &a : conv) m.iseq[a];
  try {
    m.exec(plan.rel);
    m.observe(kFinalPoint);
    m.out.completed = true;
  } catch (const Stop &s) {
    m.out.stop_reason = s.reason;
  } catch (const ArrayFault &f) {
    m.out.array_errors[f.array] = f.reason;
    m.out.stop_reason = f.reason;
  }
  return std::move(m.out);
}

std::vector<std::map<std::string, Int>> trace_param_sets(const TypeEnv &env, int lo, int hi) {
  std::vector<std::map<std::string, Int>> out;
  for (int n = lo; n <= hi; ++n) {
    std::map<std::string, Int> ps;
    for (auto &[p, info] : env.params) {
      Int v = n;
      if (info.min && v < *info.min) v = *info.min;
      if (info.max && v > *info.max) v = *info.max;
      ps[p] = v;
    }
    if (out.empty() || out.back() != ps) out.push_back(ps);
  }
  return out;
}

} // namespace streamline
