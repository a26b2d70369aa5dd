#include "streamline/bufferpass/rel.hpp"

#include "streamline/frontend/parser.hpp"

#include <sstream>

namespace streamline {

namespace R {
namespace {
std::shared_ptr<RelNode> node(RelKind k, SrcLoc l) {
  auto n = std::make_shared<RelNode>();
  n->k = k;
  n->loc = l;
  return n;
}
} // namespace

RelPtr assign(std::string x, Expr e, SrcLoc l) {
  auto n = node(RelKind::Assign, l);
  n->x = std::move(x);
  n->e = std::move(e);
  return n;
}
RelPtr read(std::string x, std::string a, Expr idx, std::string b, SrcLoc l) {
  auto n = node(RelKind::Read, l);
  n->x = std::move(x);
  n->a = std::move(a);
  n->e = std::move(idx);
  n->b = std::move(b);
  return n;
}
RelPtr write(std::string a, Expr idx, std::string x, std::string b, SrcLoc l) {
  auto n = node(RelKind::Write, l);
  n->a = std::move(a);
  n->e = std::move(idx);
  n->x = std::move(x);
  n->b = std::move(b);
  return n;
}
RelPtr sread(std::string x, std::string a, SrcLoc l) {
  auto n = node(RelKind::SRead, l);
  n->x = std::move(x);
  n->a = std::move(a);
  return n;
}
RelPtr swrite(std::string a, std::string x, SrcLoc l) {
  auto n = node(RelKind::SWrite, l);
  n->a = std::move(a);
  n->x = std::move(x);
  return n;
}
RelPtr ins_read(std::string a, std::string b) {
  auto n = node(RelKind::InsRead, {});
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}
RelPtr ins_move(std::string a, std::string b, std::string b2) {
  auto n = node(RelKind::InsMove, {});
  n->a = std::move(a);
  n->b = std::move(b);
  n->b2 = std::move(b2);
  return n;
}
RelPtr seq(std::vector<RelPtr> items) {
  auto n = node(RelKind::Seq, {});
  for (auto &i : items) {
    if (i->k == RelKind::Seq)
      n->items.insert(n->items.end(), i->items.begin(), i->items.end());
    else
      n->items.push_back(i);
  }
  return n;
}
RelPtr if_(std::string x, RelPtr t, RelPtr e, SrcLoc l) {
  auto n = node(RelKind::If, l);
  n->x = std::move(x);
  n->then_s = std::move(t);
  n->else_s = std::move(e);
  return n;
}
RelPtr for_(std::string x, Expr init, Expr bound, Int step, RelPtr body, std::string ann,
            int loop_id, SrcLoc l) {
  auto n = node(RelKind::For, l);
  n->x = std::move(x);
  n->init = std::move(init);
  n->bound = std::move(bound);
  n->step = std::move(step);
  n->body = std::move(body);
  n->annotation = std::move(ann);
  n->loop_id = loop_id;
  return n;
}
RelPtr kernel(RelPtr body, SrcLoc l) {
  auto n = node(RelKind::Kernel, l);
  n->body = std::move(body);
  return n;
}
} // namespace R

bool node_converted(const RelNode &n, const std::set<std::string> &conv) {
  return !n.b.empty() && conv.count(n.a) != 0;
}

namespace {

StmtPtr project(const RelPtr &r, const std::set<std::string> *conv) {
  const RelNode &n = *r;
  bool c = conv && (n.k == RelKind::Read || n.k == RelKind::Write || n.k == RelKind::InsRead ||
                    n.k == RelKind::InsMove)
               ? node_converted(n, *conv)
               : false;
  switch (n.k) {
  case RelKind::Assign: return mk(Assign{n.x, n.e}, n.loc);
  case RelKind::Read:
    if (c) return mk(Assign{n.x, Expr::var(n.b)}, n.loc);
    return mk(ReadArr{n.x, n.a, n.e}, n.loc);
  case RelKind::Write:
    if (c)
      return seq({mk(Assign{n.b, Expr::var(n.x)}, n.loc), mk(WriteStream{n.a, n.b}, n.loc)});
    return mk(WriteArr{n.a, n.e, n.x}, n.loc);
  case RelKind::SRead: return mk(ReadStream{n.x, n.a}, n.loc);
  case RelKind::SWrite: return mk(WriteStream{n.a, n.x}, n.loc);
  case RelKind::InsRead:
    if (c) return mk(ReadStream{n.b, n.a}, n.loc);
    return skip();
  case RelKind::InsMove:
    if (c) return mk(Assign{n.b, Expr::var(n.b2)}, n.loc);
    return skip();
  case RelKind::Seq: {
    std::vector<StmtPtr> out;
    for (auto &i : n.items) out.push_back(project(i, conv));
    return seq(out);
  }
  case RelKind::If:
    return mk(If{n.x, project(n.then_s, conv), project(n.else_s, conv)}, n.loc);
  case RelKind::For:
    return mk(For{n.x, n.init, n.bound, n.step, project(n.body, conv), n.annotation}, n.loc);
  case RelKind::Kernel: return mk(Kernel{project(n.body, conv)}, n.loc);
  }
  return skip();
}

void collect_bufs(const RelPtr &r, const std::set<std::string> &conv, std::set<std::string> &out) {
  const RelNode &n = *r;
  switch (n.k) {
  case RelKind::Read:
  case RelKind::Write:
  case RelKind::InsRead:
    if (node_converted(n, conv)) out.insert(n.b);
    break;
  case RelKind::InsMove:
    if (node_converted(n, conv)) {
      out.insert(n.b);
      out.insert(n.b2);
    }
    break;
  case RelKind::Seq:
    for (auto &i : n.items) collect_bufs(i, conv, out);
    break;
  case RelKind::If:
    collect_bufs(n.then_s, conv, out);
    collect_bufs(n.else_s, conv, out);
    break;
  case RelKind::For:
  case RelKind::Kernel: collect_bufs(n.body, conv, out); break;
  default: break;
  }
}

void print(const RelPtr &r, int ind, std::ostringstream &o) {
  const RelNode &n = *r;
  std::string pad(ind, ' ');
  std::string tag = n.b.empty() ? "" : "  ~ " + n.b;
  switch (n.k) {
  case RelKind::Assign: o << pad << n.x << " = " << print_expr(n.e) << ";\n"; break;
  case RelKind::Read:
    o << pad << n.x << " = " << n.a << "[" << print_expr(n.e) << "];" << tag << "\n";
    break;
  case RelKind::Write:
    o << pad << n.a << "[" << print_expr(n.e) << "] = " << n.x << ";" << tag << "\n";
    break;
  case RelKind::SRead: o << pad << n.x << " = " << n.a << ".read();\n"; break;
  case RelKind::SWrite: o << pad << n.a << ".write(" << n.x << ");\n"; break;
  case RelKind::InsRead: o << pad << "+ " << n.b << " = " << n.a << ".read();\n"; break;
  case RelKind::InsMove: o << pad << "+ " << n.b << " = " << n.b2 << ";  [" << n.a << "]\n"; break;
  case RelKind::Seq:
    for (auto &i : n.items) print(i, ind, o);
    break;
  case RelKind::If:
    o << pad << "if (" << n.x << ") {\n";
    print(n.then_s, ind + 2, o);
    o << pad << "} else {\n";
    print(n.else_s, ind + 2, o);
    o << pad << "}\n";
    break;
  case RelKind::For:
    o << pad << "for#" << n.loop_id << " (" << n.x << " = " << print_expr(n.init) << "; " << n.x
      << " != " << print_expr(n.bound) << "; " << n.x << " += " << to_string(n.step) << ") {\n";
    print(n.body, ind + 2, o);
    o << pad << "}\n";
    break;
  case RelKind::Kernel:
    o << pad << "kernel {\n";
    print(n.body, ind + 2, o);
    o << pad << "}\n";
    break;
  }
}

} // namespace

StmtPtr project_source(const RelPtr &r) { return project(r, nullptr); }

StmtPtr project_target(const RelPtr &r, const std::set<std::string> &conv) {
  return project(r, &conv);
}

std::set<std::string> used_buffers(const RelPtr &r, const std::set<std::string> &conv) {
  std::set<std::string> out;
  collect_bufs(r, conv, out);
  return out;
}

std::string print_rel(const RelPtr &r, int indent) {
  std::ostringstream o;
  print(r, indent, o);
  return o.str();
}

} // namespace streamline
