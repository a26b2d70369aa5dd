#include "streamline/emit/emit.hpp"

#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace streamline {

const char *emit_style_name(EmitStyle s) {
  switch (s) {
  case EmitStyle::Baseline: return "baseline";
  case EmitStyle::Buffered: return "buffered";
  case EmitStyle::Streamed: return "streamed";
  }
  return "?";
}

namespace {

const std::set<std::string> &reserved() {
  static const std::set<std::string> r{
      "alignas", "alignof", "and", "asm", "auto", "bool", "break", "case", "catch", "char", "class",
      "const", "continue", "default", "delete", "do", "double", "else", "enum", "explicit", "export",
      "extern", "false", "float", "for", "friend", "goto", "if", "inline", "int", "long", "main",
      "mutable", "namespace", "new", "not", "operator", "or", "private", "protected", "public",
      "register", "return", "short", "signed", "sizeof", "static", "struct", "switch", "template",
      "this", "throw", "true", "try", "typedef", "typename", "union", "unsigned", "using", "virtual",
      "void", "volatile", "while", "xor", "printf", "hls", "std", "word_t", "argc", "argv"};
  return r;
}

std::string id(const std::string &n) { return reserved().count(n) ? n + "_" : n; }

std::string lit(const Int &v) {
  std::string s = to_string(v);
  if (v > 2147483647 || v < -2147483647) s += "LL";
  return s;
}

std::string atom(const Atom &a) { return a.is_var ? id(a.name) : lit(a.value); }

std::string expr(const Expr &e) {
  switch (e.kind) {
  case Expr::Kind::Const: return lit(e.value);
  case Expr::Kind::Var: return id(e.name);
  case Expr::Kind::Bin: {
    std::string s = atom(e.lhs) + " " + binop_symbol(e.op) + " " + atom(e.rhs);
    switch (e.op) {
    case BinOp::Lt:
    case BinOp::Eq:
    case BinOp::Le: return "(" + s + ")";
    default: return s;
    }
  }
  }
  return "0";
}

const char *word_type(int width) {
  switch (width) {
  case 8: return "int8_t";
  case 16: return "int16_t";
  case 32: return "int32_t";
  case 64: return "int64_t";
  }
  throw Error("emit: integer width must be 8, 16, 32 or 64");
}

struct Names {
  std::set<std::string> vars, arrays, streams;
};

void collect(const StmtPtr &s, Names &n) {
  if (auto q = s->as<Seq>()) {
    for (auto &i : q->items) collect(i, n);
    return;
  }
  if (auto r = s->as<ReadArr>()) {
    n.arrays.insert(r->a);
    n.vars.insert(r->x);
    r->idx.vars(n.vars);
  } else if (auto w = s->as<WriteArr>()) {
    n.arrays.insert(w->a);
    n.vars.insert(w->x);
    w->idx.vars(n.vars);
  } else if (auto r = s->as<ReadStream>()) {
    n.streams.insert(r->a);
    n.vars.insert(r->x);
  } else if (auto w = s->as<WriteStream>()) {
    n.streams.insert(w->a);
    n.vars.insert(w->x);
  } else if (auto a = s->as<Assign>()) {
    n.vars.insert(a->x);
    a->e.vars(n.vars);
  } else if (auto i = s->as<If>()) {
    n.vars.insert(i->x);
    collect(i->then_s, n);
    collect(i->else_s, n);
  } else if (auto f = s->as<For>()) {
    n.vars.insert(f->x);
    f->init.vars(n.vars);
    f->bound.vars(n.vars);
    collect(f->body, n);
  } else if (auto k = s->as<Kernel>()) {
    collect(k->body, n);
  }
}

// Host-side names: everything outside kernel blocks.
void collect_host(const StmtPtr &s, Names &n) {
  if (auto q = s->as<Seq>()) {
    for (auto &i : q->items) collect_host(i, n);
    return;
  }
  if (s->is<Kernel>()) return;
  if (auto i = s->as<If>()) {
    n.vars.insert(i->x);
    collect_host(i->then_s, n);
    collect_host(i->else_s, n);
    return;
  }
  if (auto f = s->as<For>()) {
    Names inner;
    collect(mk(For{f->x, f->init, f->bound, f->step, skip(), ""}), inner);
    n.vars.insert(inner.vars.begin(), inner.vars.end());
    collect_host(f->body, n);
    return;
  }
  collect(s, n);
}

std::vector<StmtPtr> kernels(const StmtPtr &s) {
  std::vector<StmtPtr> out;
  std::vector<StmtPtr> stack{s};
  // kernels only occur in host code, so a pre-order walk keeps program order
  std::function<void(const StmtPtr &)> go = [&](const StmtPtr &t) {
    if (auto q = t->as<Seq>())
      for (auto &i : q->items) go(i);
    else if (t->is<Kernel>())
      out.push_back(t);
    else if (auto i = t->as<If>()) {
      go(i->then_s);
      go(i->else_s);
    } else if (auto f = t->as<For>())
      go(f->body);
  };
  go(s);
  return out;
}

struct Unit {
  const Program &p;
  const EmitConfig &cfg;
  std::set<std::string> streams; // arrays that are streams anywhere in the program
  std::vector<StmtPtr> ks;
  std::map<const Stmt *, std::string> kname;
  Names host;

  Unit(const Program &prog, const EmitConfig &c) : p(prog), cfg(c) {
    word_type(cfg.width);
    Names all;
    collect(p.main, all);
    streams = all.streams;
    for (auto &a : all.arrays)
      if (streams.count(a)) throw Error("emit: '" + a + "' is used both as a stream and as an array");
    ks = kernels(p.main);
    std::set<std::string> taken;
    for (auto &d : p.decls) taken.insert(id(d.name));
    for (size_t i = 0; i < ks.size(); ++i) {
      std::string k = i == 0 ? cfg.name : cfg.name + "_" + std::to_string(i);
      while (taken.count(k) || reserved().count(k)) k += "_fn";
      kname[ks[i].get()] = k;
    }
    collect_host(p.main, host);
  }

  bool is_array(const Decl &d) const {
    return d.kind == DeclKind::RArr || d.kind == DeclKind::WArr || d.kind == DeclKind::Arr;
  }

  // Kernel parameters in declaration order; kernel-only buffers become locals.
  struct Sig {
    std::vector<std::string> params, args;
    std::vector<std::string> locals;
  };
  Sig signature(const StmtPtr &k) const {
    Names n;
    collect(k, n);
    Sig s;
    for (auto &d : p.decls) {
      const std::string &v = d.name;
      if (is_array(d)) {
        if (n.streams.count(v)) {
          s.params.push_back("hls::stream<word_t> &" + id(v));
          s.args.push_back(id(v));
        } else if (n.arrays.count(v)) {
          s.params.push_back("word_t *" + id(v));
          s.args.push_back(id(v));
        }
      } else if (n.vars.count(v)) {
        if (d.kind == DeclKind::Param) {
          s.params.push_back("word_t " + id(v));
          s.args.push_back(id(v));
        } else if (d.kind == DeclKind::Buf && !host.vars.count(v)) {
          s.locals.push_back(v);
        } else {
          s.params.push_back("word_t &" + id(v));
          s.args.push_back(id(v));
        }
      }
    }
    return s;
  }

  void stmt(std::ostringstream &o, const StmtPtr &s, int ind) const {
    std::string pad(static_cast<size_t>(ind), ' ');
    if (auto q = s->as<Seq>()) {
      for (auto &i : q->items) stmt(o, i, ind);
    } else if (auto r = s->as<ReadArr>()) {
      o << pad << id(r->x) << " = " << id(r->a) << "[" << expr(r->idx) << "];\n";
    } else if (auto w = s->as<WriteArr>()) {
      o << pad << id(w->a) << "[" << expr(w->idx) << "] = " << id(w->x) << ";\n";
    } else if (auto r = s->as<ReadStream>()) {
      o << pad << id(r->x) << " = " << id(r->a) << ".read();\n";
    } else if (auto w = s->as<WriteStream>()) {
      o << pad << id(w->a) << ".write(" << id(w->x) << ");\n";
    } else if (auto a = s->as<Assign>()) {
      o << pad << id(a->x) << " = " << expr(a->e) << ";\n";
    } else if (auto i = s->as<If>()) {
      o << pad << "if (" << id(i->x) << ") {\n";
      stmt(o, i->then_s, ind + 2);
      if (!seq_items(i->else_s).empty()) {
        o << pad << "} else {\n";
        stmt(o, i->else_s, ind + 2);
      }
      o << pad << "}\n";
    } else if (auto f = s->as<For>()) {
      std::string step = f->step < 0 ? " -= " + lit(-f->step) : " += " + lit(f->step);
      o << pad << "for (" << id(f->x) << " = " << expr(f->init) << "; " << id(f->x) << " != "
        << expr(f->bound) << "; " << id(f->x) << step << ") {\n";
      stmt(o, f->body, ind + 2);
      o << pad << "}\n";
    } else if (s->is<Kernel>()) {
      auto sig = signature(s);
      o << pad << kname.at(s.get()) << "(";
      for (size_t i = 0; i < sig.args.size(); ++i) o << (i ? ", " : "") << sig.args[i];
      o << ");\n";
    } else {
      throw Error("emit: unexpected statement");
    }
  }

  std::string prototype(const StmtPtr &k) const {
    auto sig = signature(k);
    std::string s = "void " + kname.at(k.get()) + "(";
    for (size_t i = 0; i < sig.params.size(); ++i) s += (i ? ", " : "") + sig.params[i];
    return s + ")";
  }

  std::string kernel_functions() const {
    std::ostringstream o;
    for (auto &k : ks) {
      auto sig = signature(k);
      o << prototype(k) << " {\n";
      if (cfg.depth > 0)
        for (auto &d : p.decls)
          if (is_array(d) && streams.count(d.name))
            o << "#pragma HLS STREAM variable=" << id(d.name) << " depth=" << cfg.depth << "\n";
      for (auto &b : sig.locals) o << "  word_t " << id(b) << " = 0;\n";
      stmt(o, k->as<Kernel>()->body, 2);
      o << "}\n";
    }
    if (ks.empty()) o << "void " << cfg.name << "() {}\n";
    return o.str();
  }

  std::string preamble() const {
    std::ostringstream o;
    o << "#include <cstdint>\n#include \"hls_stream.h\"\n\n";
    o << "#ifndef STREAMLINE_WORD\n#define STREAMLINE_WORD\ntypedef " << word_type(cfg.width)
      << " word_t;\n#endif\n";
    return o.str();
  }

  // Streams the host writes from a descending loop.
  void reversed_writes(const StmtPtr &s, bool desc, std::set<std::string> &out) const {
    if (auto q = s->as<Seq>())
      for (auto &i : q->items) reversed_writes(i, desc, out);
    else if (auto w = s->as<WriteStream>()) {
      if (desc) out.insert(w->a);
    } else if (auto i = s->as<If>()) {
      reversed_writes(i->then_s, desc, out);
      reversed_writes(i->else_s, desc, out);
    } else if (auto f = s->as<For>())
      reversed_writes(f->body, desc || f->step < 0, out);
  }

  std::string host_main() const {
    std::ostringstream o;
    o << "#include <cstdio>\n#include <cstdlib>\n#include <cstring>\n" << preamble() << "\n";
    o << "#ifndef STREAMLINE_MAX_LEN\n#define STREAMLINE_MAX_LEN 4096\n#endif\n";
    o << "#define STREAMLINE_OFF 64\n\n";

    std::set<std::string> rev;
    reversed_writes(p.main, false, rev);
    if (!rev.empty()) {
      o << "// Streams written in descending index order:";
      for (auto &a : rev) o << " " << a;
      o << ".\n// A DMA engine may move the backing buffer in ascending address order;\n"
           "// the element order inside each stream is the logical order below and is\n"
           "// the order the kernel consumes.\n\n";
    }
    bool partial = false;
    for (auto &d : p.decls)
      if (is_array(d) && !streams.count(d.name)) partial = true;
    if (partial && !streams.empty())
      o << "// Arrays that stay arrays are shared with the kernel through plain pointers;\n"
           "// no transfer scheduling is generated for them.\n\n";

    for (auto &k : ks) o << prototype(k) << ";\n";
    if (!ks.empty()) o << "\n";

    o << "static word_t param(int argc, char **argv, const char *name) {\n"
         "  size_t n = strlen(name);\n"
         "  for (int i = 1; i < argc; ++i)\n"
         "    if (!strncmp(argv[i], name, n) && argv[i][n] == '=') return (word_t)atoll(argv[i] + n + 1);\n"
         "  fprintf(stderr, \"missing parameter %s\\n\", name);\n"
         "  exit(2);\n"
         "}\n\n";

    o << "int main(int argc, char **argv) {\n";
    for (auto &d : p.decls) {
      std::string v = id(d.name);
      if (d.kind == DeclKind::Param) {
        o << "  word_t " << v << " = param(argc, argv, \"" << d.name << "\");\n";
        if (d.min) o << "  if (" << v << " < " << lit(*d.min) << ") return 2;\n";
        if (d.max) o << "  if (" << v << " > " << lit(*d.max) << ") return 2;\n";
      } else if (is_array(d)) {
        if (streams.count(d.name)) o << "  hls::stream<word_t> " << v << ";\n";
        else
          o << "  static word_t " << v << "_mem[STREAMLINE_MAX_LEN];\n  word_t *" << v << " = " << v
            << "_mem + STREAMLINE_OFF;\n";
      } else {
        o << "  word_t " << v << " = 0;\n";
      }
    }
    o << "  long dump = 0;\n"
         "  for (int i = 1; i < argc; ++i)\n"
         "    if (!strncmp(argv[i], \"dump=\", 5)) dump = atol(argv[i] + 5);\n";
    o << "  char name[256];\n  long long idx, val;\n"
         "  while (scanf(\"%255s %lld %lld\", name, &idx, &val) == 3) {\n"
         "    if (idx < -STREAMLINE_OFF || idx >= STREAMLINE_MAX_LEN - STREAMLINE_OFF) continue;\n";
    for (auto &d : p.decls)
      if (is_array(d) && !streams.count(d.name))
        o << "    if (!strcmp(name, \"" << d.name << "\")) " << id(d.name) << "[idx] = (word_t)val;\n";
    o << "  }\n\n";

    stmt(o, p.main, 2);

    o << "\n";
    for (auto &d : p.decls)
      if (d.kind == DeclKind::Int || d.kind == DeclKind::Param)
        o << "  printf(\"%s %lld\\n\", \"" << d.name << "\", (long long)" << id(d.name) << ");\n";
    for (auto &d : p.decls) {
      if (!is_array(d)) continue;
      std::string v = id(d.name);
      if (streams.count(d.name)) {
        o << "  printf(\"stream " << d.name << ":\");\n"
          << "  while (!" << v << ".empty()) printf(\" %lld\", (long long)" << v << ".read());\n"
          << "  printf(\"\\n\");\n";
      } else {
        o << "  for (long i = 0; i < dump; ++i) printf(\"" << d.name << "[%ld] %lld\\n\", i, (long long)"
          << v << "[i]);\n";
      }
    }
    o << "  return 0;\n}\n";
    return o.str();
  }
};

std::string banner(const EmitConfig &cfg, const char *what) {
  return std::string("// ") + what + " for " + cfg.name + " (" + emit_style_name(cfg.style) + ", " +
         std::to_string(cfg.width) + "-bit words)\n";
}

} // namespace

std::string emit_kernel(const Program &p, const EmitConfig &cfg) {
  Unit u(p, cfg);
  return banner(cfg, "Kernel") + u.preamble() + "\n" + u.kernel_functions();
}

std::string emit_host(const Program &p, const EmitConfig &cfg) {
  Unit u(p, cfg);
  return banner(cfg, "Host") + u.host_main();
}

std::string emit_baseline(const Program &source, const EmitConfig &cfg) {
  EmitConfig c = cfg;
  c.style = EmitStyle::Baseline;
  Unit u(source, c);
  std::string host = u.host_main();
  // kernels go before main, after the includes of the host part
  size_t at = host.find("#define STREAMLINE_OFF 64\n\n");
  at += std::string("#define STREAMLINE_OFF 64\n\n").size();
  return banner(c, "Baseline") + host.substr(0, at) + u.kernel_functions() + "\n" + host.substr(at);
}

const std::string &hls_stream_stub() {
  static const std::string s = R"(#pragma once
// Stand-in for the vendor stream header: an unbounded FIFO.
#include <cstdio>
#include <cstdlib>
#include <deque>

namespace hls {

template <class T> class stream {
public:
  T read() {
    if (q_.empty()) {
      std::fprintf(stderr, "stuck: read from an empty stream\n");
      std::exit(3);
    }
    T v = q_.front();
    q_.pop_front();
    return v;
  }
  void write(const T &v) { q_.push_back(v); }
  bool empty() const { return q_.empty(); }
  std::size_t size() const { return q_.size(); }

private:
  std::deque<T> q_;
};

} // namespace hls
)";
  return s;
}

} // namespace streamline
