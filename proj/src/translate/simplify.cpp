#include "streamline/translate/translate.hpp"

#include <map>

namespace streamline {

namespace {

void mentions(const StmtPtr &s, std::map<std::string, int> &out) {
  auto expr = [&](const Expr &e) {
    std::set<std::string> vs;
    e.vars(vs);
    for (auto &v : vs) ++out[v];
  };
  if (auto n = s->as<Seq>()) {
    for (auto &i : n->items) mentions(i, out);
  } else if (auto n = s->as<If>()) {
    ++out[n->x];
    mentions(n->then_s, out);
    mentions(n->else_s, out);
  } else if (auto n = s->as<For>()) {
    ++out[n->x];
    expr(n->init);
    expr(n->bound);
    mentions(n->body, out);
  } else if (auto n = s->as<Kernel>()) {
    mentions(n->body, out);
  } else {
    std::set<std::string> vs;
    used_vars(s, vs);
    assigned_vars(s, vs);
    for (auto &v : vs) ++out[v];
  }
}

// The buffer a pair at items[i], items[i+1] goes through, or "".
std::string pair_buffer(const StmtPtr &a, const StmtPtr &b, const std::set<std::string> &bufs) {
  if (auto r = a->as<ReadStream>()) {
    auto m = b->as<Assign>();
    if (bufs.count(r->x) && m && m->e.kind == Expr::Kind::Var && m->e.name == r->x && m->x != r->x)
      return r->x;
  }
  if (auto m = a->as<Assign>()) {
    auto w = b->as<WriteStream>();
    if (bufs.count(m->x) && w && w->x == m->x && m->e.kind == Expr::Kind::Var && m->e.name != m->x)
      return m->x;
  }
  return "";
}

void count_pairs(const StmtPtr &s, const std::set<std::string> &bufs, std::map<std::string, int> &out) {
  if (auto n = s->as<Seq>()) {
    for (size_t i = 0; i < n->items.size(); ++i) {
      if (i + 1 < n->items.size()) {
        std::string b = pair_buffer(n->items[i], n->items[i + 1], bufs);
        if (!b.empty()) {
          out[b] += 2;
          ++i;
          continue;
        }
      }
      count_pairs(n->items[i], bufs, out);
    }
  } else if (auto n = s->as<If>()) {
    count_pairs(n->then_s, bufs, out);
    count_pairs(n->else_s, bufs, out);
  } else if (auto n = s->as<For>()) {
    count_pairs(n->body, bufs, out);
  } else if (auto n = s->as<Kernel>()) {
    count_pairs(n->body, bufs, out);
  }
}

StmtPtr rewrite(const StmtPtr &s, const std::set<std::string> &drop) {
  if (auto n = s->as<Seq>()) {
    std::vector<StmtPtr> out;
    for (size_t i = 0; i < n->items.size(); ++i) {
      if (i + 1 < n->items.size()) {
        const StmtPtr &a = n->items[i], &b = n->items[i + 1];
        std::string buf = pair_buffer(a, b, drop);
        if (!buf.empty()) {
          if (auto r = a->as<ReadStream>())
            out.push_back(mk(ReadStream{b->as<Assign>()->x, r->a}, b->loc));
          else
            out.push_back(mk(WriteStream{b->as<WriteStream>()->a, a->as<Assign>()->e.name}, b->loc));
          ++i;
          continue;
        }
      }
      out.push_back(rewrite(n->items[i], drop));
    }
    return mk(Seq{std::move(out)}, s->loc);
  }
  if (auto n = s->as<If>()) return mk(If{n->x, rewrite(n->then_s, drop), rewrite(n->else_s, drop)}, s->loc);
  if (auto n = s->as<For>())
    return mk(For{n->x, n->init, n->bound, n->step, rewrite(n->body, drop), n->annotation}, s->loc);
  if (auto n = s->as<Kernel>()) return mk(Kernel{rewrite(n->body, drop)}, s->loc);
  return s;
}

} // namespace

Program simplify_target(const Program &t) {
  std::set<std::string> bufs;
  for (auto &d : t.decls)
    if (d.kind == DeclKind::Buf) bufs.insert(d.name);
  std::map<std::string, int> uses, paired;
  mentions(t.main, uses);
  count_pairs(t.main, bufs, paired);
  std::set<std::string> drop;
  for (auto &[b, k] : paired)
    if (uses[b] == k) drop.insert(b);

  Program out = t;
  out.main = rewrite(t.main, drop);
  std::map<std::string, int> after;
  mentions(out.main, after);
  out.decls.clear();
  for (auto &d : t.decls)
    if (d.kind != DeclKind::Buf || after.count(d.name)) out.decls.push_back(d);
  return out;
}

} // namespace streamline
