#include "streamline/bufferpass/plan.hpp"

#include <algorithm>

namespace streamline {

namespace {

struct SymCtx {
  int loop = -1;
  int item = 0;
  std::map<std::string, std::optional<LinExpr>> vals;

  std::optional<LinExpr> val(const std::string &v) const {
    auto it = vals.find(v);
    if (it != vals.end()) return it->second;
    return LinExpr::var(v);
  }
};

std::optional<LinExpr> lin_atom(const SymCtx &c, const Atom &a) {
  if (!a.is_var) return LinExpr(a.value);
  return c.val(a.name);
}

std::optional<LinExpr> lin_expr(const SymCtx &c, const Expr &e) {
  switch (e.kind) {
  case Expr::Kind::Const: return LinExpr(e.value);
  case Expr::Kind::Var: return c.val(e.name);
  case Expr::Kind::Bin: break;
  }
  auto l = lin_atom(c, e.lhs), r = lin_atom(c, e.rhs);
  if (!l || !r) return std::nullopt;
  switch (e.op) {
  case BinOp::Add: return *l + *r;
  case BinOp::Sub: return *l - *r;
  case BinOp::Mul:
    if (l->is_const()) return *r * l->c0;
    if (r->is_const()) return *l * r->c0;
    return std::nullopt;
  default: break;
  }
  if (!l->is_const() || !r->is_const()) return std::nullopt;
  const Int &a = l->c0, &b = r->c0;
  switch (e.op) {
  case BinOp::Div: return b == 0 ? std::nullopt : std::optional<LinExpr>(LinExpr(div_trunc(a, b)));
  case BinOp::Mod: return b == 0 ? std::nullopt : std::optional<LinExpr>(LinExpr(mod_trunc(a, b)));
  case BinOp::Lt: return LinExpr(Int(a < b ? 1 : 0));
  case BinOp::Eq: return LinExpr(Int(a == b ? 1 : 0));
  case BinOp::Le: return LinExpr(Int(a <= b ? 1 : 0));
  default: return std::nullopt;
  }
}

struct Collector {
  std::vector<LoopInfo> loops;
  std::vector<AccessSite> sites;
  std::map<const Stmt *, size_t> site_of;
  std::set<std::string> stream_arrays;

  void walk(const StmtPtr &s, SymCtx &c, bool kernel) {
    if (auto q = s->as<Seq>()) {
      for (auto &i : q->items) walk(i, c, kernel);
    } else if (auto n = s->as<ReadArr>()) {
      site(s, n->a, false, lin_expr(c, n->idx), c, kernel);
      c.vals[n->x] = std::nullopt;
    } else if (auto n = s->as<WriteArr>()) {
      site(s, n->a, true, lin_expr(c, n->idx), c, kernel);
    } else if (auto n = s->as<ReadStream>()) {
      stream_arrays.insert(n->a);
      c.vals[n->x] = std::nullopt;
    } else if (auto n = s->as<WriteStream>()) {
      stream_arrays.insert(n->a);
    } else if (auto n = s->as<Assign>()) {
      c.vals[n->x] = lin_expr(c, n->e);
    } else if (auto n = s->as<If>()) {
      SymCtx c1 = c, c2 = c;
      walk(n->then_s, c1, kernel);
      walk(n->else_s, c2, kernel);
      std::set<std::string> keys;
      for (auto &kv : c1.vals) keys.insert(kv.first);
      for (auto &kv : c2.vals) keys.insert(kv.first);
      for (auto &k : keys) {
        auto v1 = c1.val(k), v2 = c2.val(k);
        c.vals[k] = (v1 && v2 && *v1 == *v2) ? v1 : std::nullopt;
      }
    } else if (auto n = s->as<For>()) {
      LoopInfo li;
      li.id = static_cast<int>(loops.size());
      li.parent = c.loop;
      li.depth = c.loop < 0 ? 0 : loops[static_cast<size_t>(c.loop)].depth + 1;
      li.x = n->x;
      li.init = n->init;
      li.bound = n->bound;
      li.step = n->step;
      li.annotation = n->annotation;
      li.in_kernel = kernel;
      li.loc = s->loc;
      assigned_vars(n->body, li.assigned);
      li.assigned.insert(n->x);
      touched_arrays(n->body, li.touched);
      loops.push_back(li);
      SymCtx inner;
      inner.loop = li.id;
      const auto &items = seq_items(n->body);
      for (size_t i = 0; i < items.size(); ++i) {
        inner.item = static_cast<int>(i);
        walk(items[i], inner, kernel);
      }
      for (auto &v : li.assigned) c.vals[v] = std::nullopt;
    } else if (auto n = s->as<Kernel>()) {
      walk(n->body, c, true);
    }
  }

  void site(const StmtPtr &s, const std::string &a, bool write, std::optional<LinExpr> idx,
            const SymCtx &c, bool kernel) {
    AccessSite st;
    st.array = a;
    st.write = write;
    st.loop = c.loop;
    st.idx = std::move(idx);
    st.item = c.item;
    st.in_kernel = kernel;
    st.loc = s->loc;
    site_of[s.get()] = sites.size();
    sites.push_back(std::move(st));
  }
};

Collector collect(const Program &p) {
  Collector col;
  SymCtx top;
  if (p.main) col.walk(p.main, top, false);
  return col;
}

enum class Mode { Window, Direct, Write };

struct GroupPlan {
  Mode mode = Mode::Direct;
  int window = -1; // index into windows
};

struct Builder {
  const Collector &col;
  const std::map<size_t, std::string> &site_buf;
  const std::map<size_t, bool> &site_direct_read;
  std::map<int, std::map<int, std::vector<RelPtr>>> before_item;
  std::map<int, std::vector<RelPtr>> body_end, preamble;
  int next_loop = 0;

  RelPtr build(const StmtPtr &s) {
    if (auto q = s->as<Seq>()) {
      std::vector<RelPtr> out;
      for (auto &i : q->items) out.push_back(build(i));
      return R::seq(out);
    }
    if (auto n = s->as<ReadArr>()) {
      size_t k = col.site_of.at(s.get());
      auto b = site_buf.find(k);
      if (b == site_buf.end()) return R::read(n->x, n->a, n->idx, "", s->loc);
      RelPtr r = R::read(n->x, n->a, n->idx, b->second, s->loc);
      if (site_direct_read.count(k)) return R::seq({R::ins_read(n->a, b->second), r});
      return r;
    }
    if (auto n = s->as<WriteArr>()) {
      size_t k = col.site_of.at(s.get());
      auto b = site_buf.find(k);
      return R::write(n->a, n->idx, n->x, b == site_buf.end() ? "" : b->second, s->loc);
    }
    if (auto n = s->as<ReadStream>()) return R::sread(n->x, n->a, s->loc);
    if (auto n = s->as<WriteStream>()) return R::swrite(n->a, n->x, s->loc);
    if (auto n = s->as<Assign>()) return R::assign(n->x, n->e, s->loc);
    if (auto n = s->as<If>()) return R::if_(n->x, build(n->then_s), build(n->else_s), s->loc);
    if (auto n = s->as<Kernel>()) return R::kernel(build(n->body), s->loc);
    if (auto n = s->as<For>()) {
      int id = next_loop++;
      std::vector<RelPtr> body;
      const auto &items = seq_items(n->body);
      auto bi = before_item.find(id);
      for (size_t i = 0; i < items.size(); ++i) {
        if (bi != before_item.end()) {
          auto it = bi->second.find(static_cast<int>(i));
          if (it != bi->second.end()) body.insert(body.end(), it->second.begin(), it->second.end());
        }
        body.push_back(build(items[i]));
      }
      auto be = body_end.find(id);
      if (be != body_end.end()) body.insert(body.end(), be->second.begin(), be->second.end());
      RelPtr f = R::for_(n->x, n->init, n->bound, n->step, R::seq(body), n->annotation, id, s->loc);
      auto pre = preamble.find(id);
      if (pre == preamble.end()) return f;
      std::vector<RelPtr> out = pre->second;
      out.push_back(f);
      return R::seq(out);
    }
    throw Error(s->loc.str() + ": call remains after inlining");
  }
};

std::string where(const SrcLoc &l) { return l.line > 0 ? " at " + l.str() : ""; }

} // namespace

std::vector<AccessSite> collect_access_indices(const Program &p) { return collect(p).sites; }
std::vector<LoopInfo> collect_loops(const Program &p) { return collect(p).loops; }

std::vector<BufferFact> BufferPlan::buffer_facts(int lp, const std::set<std::string> &conv) const {
  std::vector<BufferFact> out;
  for (auto &w : windows) {
    if (w.loop != lp || !conv.count(w.array)) continue;
    const LoopInfo &li = loop(lp);
    for (int k = 0; k + 1 < w.width; ++k)
      out.push_back({w.bufs[static_cast<size_t>(k)], w.array,
                     LinExpr::var(li.x, w.c) + w.first + LinExpr(w.d * k)});
  }
  return out;
}

Program BufferPlan::target(const std::set<std::string> &conv) const {
  Program t;
  t.decls = source.decls;
  std::set<std::string> used = used_buffers(rel, conv);
  // buffer_array is keyed by name; keep allocation order (b0, b1, ...)
  std::vector<std::string> order(used.begin(), used.end());
  std::sort(order.begin(), order.end(), [](const std::string &a, const std::string &b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
  });
  for (auto &b : order) t.decls.push_back(Decl{DeclKind::Buf, b, std::nullopt, std::nullopt});
  t.main = project_target(rel, conv);
  return t;
}

BufferPlan plan_buffers(const Checked &chk) {
  const Program &p = chk.prog;
  Collector col = collect(p);
  BufferPlan plan;
  plan.source = p;
  plan.env = chk.env;
  plan.loops = col.loops;

  std::set<std::string> kernel_arrays;
  for (auto &s : col.sites)
    if (s.in_kernel) kernel_arrays.insert(s.array);
  for (auto &a : kernel_arrays) {
    if (col.stream_arrays.count(a)) plan.unplannable[a] = "already accessed as a stream";
  }

  // group sites by (loop, array)
  std::map<std::pair<int, std::string>, std::vector<size_t>> groups;
  for (size_t i = 0; i < col.sites.size(); ++i) {
    const auto &s = col.sites[i];
    if (kernel_arrays.count(s.array)) groups[{s.loop, s.array}].push_back(i);
  }

  auto give_up = [&](const std::string &a, const std::string &why) {
    if (!plan.unplannable.count(a)) plan.unplannable[a] = why;
  };

  struct Pending {
    int loop;
    std::string array;
    Mode mode;
    std::vector<size_t> sites;
    std::map<size_t, int> slot;
    WindowPlan w;
  };
  std::vector<Pending> pend;

  for (auto &[key, idxs] : groups) {
    auto [lp, a] = key;
    bool has_r = false, has_w = false;
    for (auto i : idxs) (col.sites[i].write ? has_w : has_r) = true;
    if (has_r && has_w) {
      give_up(a, "read and written in the same loop" + where(col.sites[idxs[0]].loc));
      continue;
    }
    bool affine = true;
    for (auto i : idxs)
      if (!col.sites[i].idx) {
        give_up(a, "index of '" + a + "' is not affine" + where(col.sites[i].loc));
        affine = false;
        break;
      }
    if (!affine) continue;
    Pending pd{lp, a, has_w ? Mode::Write : Mode::Direct, idxs, {}, {}};
    if (has_w || lp < 0) {
      pend.push_back(pd);
      continue;
    }
    const LoopInfo &li = col.loops[static_cast<size_t>(lp)];
    std::optional<Int> c;
    bool mixed = false, any_zero = false;
    for (auto i : idxs) {
      Int ci = col.sites[i].idx->coeff(li.x);
      if (ci == 0) any_zero = true;
      if (c && *c != ci) mixed = true;
      c = ci;
    }
    if (!mixed && any_zero) {
      pend.push_back(pd); // indices move with other registers: read in place
      continue;
    }
    if (mixed) {
      give_up(a, "reads of '" + a + "' advance at different rates" + where(li.loc));
      continue;
    }
    // window: offsets must be loop-invariant and differ by multiples of c*step
    Int d = *c * li.step;
    std::vector<LinExpr> offs;
    bool ok = true;
    for (auto i : idxs) {
      LinExpr o = *col.sites[i].idx - LinExpr::var(li.x, *c);
      for (auto &v : o.vars())
        if (li.assigned.count(v)) ok = false;
      offs.push_back(o);
    }
    if (!ok) {
      give_up(a, "window offsets of '" + a + "' change inside the loop" + where(li.loc));
      continue;
    }
    std::vector<Int> ks;
    for (auto &o : offs) {
      LinExpr delta = o - offs[0];
      if (!delta.is_const() || mod_trunc(delta.c0, d) != 0) {
        ok = false;
        break;
      }
      ks.push_back(div_trunc(delta.c0, d));
    }
    if (!ok) {
      // no element is shared between iterations: every access reads fresh, in place
      std::set<Int> cs;
      bool disjoint = true;
      for (auto &o : offs) {
        LinExpr delta = o - offs[0];
        if (!delta.is_const() || !cs.insert(delta.c0).second) disjoint = false;
      }
      if (disjoint && *cs.rbegin() - *cs.begin() < abs(d)) {
        pend.push_back(pd);
        continue;
      }
      give_up(a, "offsets of '" + a + "' are not aligned with the loop step" + where(li.loc));
      continue;
    }
    Int kmin = *std::min_element(ks.begin(), ks.end());
    Int kmax = *std::max_element(ks.begin(), ks.end());
    if (kmax - kmin + 1 > 64) {
      give_up(a, "window over '" + a + "' is too wide" + where(li.loc));
      continue;
    }
    pd.mode = Mode::Window;
    pd.w.loop = lp;
    pd.w.array = a;
    pd.w.c = *c;
    pd.w.d = d;
    pd.w.first = offs[0] + LinExpr(kmin * d);
    pd.w.width = static_cast<int>(kmax - kmin + 1);
    for (size_t j = 0; j < idxs.size(); ++j) pd.slot[idxs[j]] = static_cast<int>(ks[j] - kmin);
    int fresh = pd.w.width - 1;
    int h = 1 << 30;
    for (auto i : idxs)
      if (pd.slot[i] == fresh) h = std::min(h, col.sites[i].item);
    pd.w.hoist_item = h;
    if (pd.w.width >= 2)
      for (auto i : idxs)
        if (pd.slot[i] == 0 && col.sites[i].item >= h) pd.w.end_rotation = true;
    pend.push_back(pd);
  }

  for (auto &a : kernel_arrays)
    if (!plan.unplannable.count(a)) plan.candidates.insert(a);

  std::set<std::string> taken = all_names(p);
  NameGen names(taken);
  std::map<size_t, std::string> site_buf;
  std::map<size_t, bool> direct;
  Builder bld{col, site_buf, direct, {}, {}, {}, 0};

  std::sort(pend.begin(), pend.end(), [](const Pending &x, const Pending &y) {
    if ((x.mode == Mode::Window) != (y.mode == Mode::Window)) return x.mode == Mode::Window;
    if (x.array != y.array) return x.array < y.array;
    return x.loop < y.loop;
  });
  std::map<std::string, std::string> read_buf, write_buf;
  for (auto &pd : pend) {
    if (!plan.candidates.count(pd.array)) continue;
    const std::string &a = pd.array;
    if (pd.mode == Mode::Write) {
      if (!write_buf.count(a)) {
        write_buf[a] = names.fresh("b");
        plan.buffer_array[write_buf[a]] = a;
        plan.direct_buffers.insert(write_buf[a]);
      }
      for (auto i : pd.sites) site_buf[i] = write_buf[a];
      continue;
    }
    if (pd.mode == Mode::Direct) {
      if (!read_buf.count(a)) {
        read_buf[a] = names.fresh("b");
        plan.buffer_array[read_buf[a]] = a;
        plan.direct_buffers.insert(read_buf[a]);
      }
      for (auto i : pd.sites) {
        site_buf[i] = read_buf[a];
        direct[i] = true;
      }
      continue;
    }
    WindowPlan w = pd.w;
    for (int k = 0; k + 1 < w.width; ++k) {
      w.bufs.push_back(names.fresh("b"));
      plan.buffer_array[w.bufs.back()] = a;
    }
    if (w.width == 1 || w.end_rotation) {
      w.fresh_buf = names.fresh("b");
      plan.buffer_array[w.fresh_buf] = a;
    } else {
      w.fresh_buf = w.bufs.back();
    }
    int fresh = w.width - 1;
    for (auto i : pd.sites) {
      int k = pd.slot[i];
      const std::string *b;
      if (k == fresh) b = &w.fresh_buf;
      else if (w.end_rotation || col.sites[i].item < w.hoist_item) b = &w.bufs[static_cast<size_t>(k)];
      else b = &w.bufs[static_cast<size_t>(k - 1)];
      site_buf[i] = *b;
    }
    auto &at = bld.before_item[w.loop][w.hoist_item];
    if (w.end_rotation) {
      at.push_back(R::ins_read(a, w.fresh_buf));
      auto &end = bld.body_end[w.loop];
      for (int k = 0; k + 2 < w.width; ++k)
        end.push_back(R::ins_move(a, w.bufs[static_cast<size_t>(k)], w.bufs[static_cast<size_t>(k + 1)]));
      end.push_back(R::ins_move(a, w.bufs.back(), w.fresh_buf));
    } else {
      for (int k = 0; k + 2 < w.width; ++k)
        at.push_back(R::ins_move(a, w.bufs[static_cast<size_t>(k)], w.bufs[static_cast<size_t>(k + 1)]));
      at.push_back(R::ins_read(a, w.fresh_buf));
    }
    auto &pre = bld.preamble[w.loop];
    for (auto &b : w.bufs) pre.push_back(R::ins_read(a, b));
    plan.windows.push_back(w);
  }
  std::sort(plan.windows.begin(), plan.windows.end(), [](const WindowPlan &x, const WindowPlan &y) {
    return x.loop != y.loop ? x.loop < y.loop : x.array < y.array;
  });

  plan.rel = p.main ? bld.build(p.main) : R::seq({});
  return plan;
}

Program insert_buffers(const Checked &c) {
  BufferPlan plan = plan_buffers(c);
  return plan.target(plan.candidates);
}

} // namespace streamline
