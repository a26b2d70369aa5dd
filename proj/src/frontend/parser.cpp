#include "streamline/frontend/parser.hpp"

#include <cctype>
#include <sstream>

namespace streamline {

namespace {

const std::set<std::string> kKeywords = {"int",  "buf", "rarr", "warr",
                                         "arr",  "param", "void", "if",
                                         "else", "for", "kernel"};

enum class Tok { Ident, Number, Punct, Annot, End };

struct Token {
  Tok kind;
  std::string text;
  SrcLoc loc;
};

std::vector<Token> lex(const std::string &src) {
  std::vector<Token> out;
  size_t i = 0;
  int line = 1, col = 1;
  auto adv = [&](size_t n) {
    for (size_t k = 0; k < n && i < src.size(); ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  static const char *puncts[] = {":=", "==", "!=", "<=", ">=", "+=", "-=", "*=",
                                 "++", "--", "&&", "||", "(",  ")",  "{",  "}",
                                 "[",  "]",  ";",  ",",  ".",  "=",  "<",  ">",
                                 "+",  "-",  "*",  "/",  "%",  "!"};
  while (i < src.size()) {
    char c = src[i];
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      adv(1);
      continue;
    }
    SrcLoc here{line, col};
    if (src.compare(i, 3, "//@") == 0) {
      size_t e = src.find('\n', i);
      if (e == std::string::npos) e = src.size();
      std::string body = src.substr(i + 3, e - i - 3);
      size_t p = body.find_first_not_of(" \t");
      body = p == std::string::npos ? "" : body.substr(p);
      if (body.compare(0, 9, "invariant") != 0)
        throw ParseError(here, "unknown annotation (expected '//@ invariant')");
      body = body.substr(9);
      p = body.find_first_not_of(" \t");
      body = p == std::string::npos ? "" : body.substr(p);
      while (!body.empty() && (body.back() == ' ' || body.back() == '\t' || body.back() == '\r'))
        body.pop_back();
      out.push_back({Tok::Annot, body, here});
      adv(e - i);
      continue;
    }
    if (src.compare(i, 2, "//") == 0) {
      size_t e = src.find('\n', i);
      adv((e == std::string::npos ? src.size() : e) - i);
      continue;
    }
    if (src.compare(i, 2, "/*") == 0) {
      size_t e = src.find("*/", i + 2);
      if (e == std::string::npos)
        throw ParseError(here, "unterminated comment");
      adv(e + 2 - i);
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t j = i;
      while (j < src.size() &&
             (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_'))
        ++j;
      out.push_back({Tok::Ident, src.substr(i, j - i), here});
      adv(j - i);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j])))
        ++j;
      if (j < src.size() &&
          (std::isalpha(static_cast<unsigned char>(src[j])) || src[j] == '_'))
        throw ParseError(here, "malformed number");
      out.push_back({Tok::Number, src.substr(i, j - i), here});
      adv(j - i);
      continue;
    }
    bool matched = false;
    for (const char *p : puncts) {
      size_t n = std::char_traits<char>::length(p);
      if (src.compare(i, n, p) == 0) {
        out.push_back({Tok::Punct, p, here});
        adv(n);
        matched = true;
        break;
      }
    }
    if (!matched)
      throw ParseError(here, std::string("unexpected character '") + c + "'");
  }
  out.push_back({Tok::End, "", SrcLoc{line, col}});
  return out;
}

// Surface expression before lowering.
struct SExpr {
  enum Kind { Num, Var, Bin, Neg, Not, Index } kind;
  Int value;
  std::string name;    // Var, Index array
  std::string op;      // Bin
  std::shared_ptr<SExpr> l, r;
  SrcLoc loc;
};
using SE = std::shared_ptr<SExpr>;

class Parser {
public:
  explicit Parser(const std::string &text) : toks_(lex(text)) {
    std::set<std::string> names;
    for (auto &t : toks_)
      if (t.kind == Tok::Ident) names.insert(t.text);
    gen_ = std::make_unique<NameGen>(std::move(names));
  }

  Program run() {
    std::vector<StmtPtr> main;
    while (peek().kind != Tok::End) {
      auto &t = peek();
      if (t.kind == Tok::Ident && is_decl_kw(t.text)) {
        parse_decl(prog_.decls, /*allow_param=*/true);
      } else if (t.kind == Tok::Ident && t.text == "void") {
        parse_function();
      } else {
        parse_stmt(main);
      }
    }
    if (pending_annot_)
      throw ParseError(pending_annot_loc_, "annotation not followed by a for loop");
    for (auto &t : temps_)
      prog_.decls.push_back(Decl{DeclKind::Int, t, std::nullopt, std::nullopt});
    prog_.main = seq(main);
    return std::move(prog_);
  }

private:
  std::vector<Token> toks_;
  size_t pos_ = 0;
  Program prog_;
  std::unique_ptr<NameGen> gen_;
  std::vector<std::string> temps_;
  bool pending_annot_ = false;
  std::string pending_annot_text_;
  SrcLoc pending_annot_loc_;
  int kernel_depth_ = 0;

  const Token &peek(int k = 0) const {
    size_t p = std::min(pos_ + k, toks_.size() - 1);
    return toks_[p];
  }
  const Token &next() {
    const Token &t = toks_[pos_];
    if (pos_ + 1 < toks_.size()) ++pos_;
    return t;
  }
  bool is_punct(const std::string &p, int k = 0) const {
    return peek(k).kind == Tok::Punct && peek(k).text == p;
  }
  bool is_kw(const std::string &w, int k = 0) const {
    return peek(k).kind == Tok::Ident && peek(k).text == w;
  }
  [[noreturn]] void fail(const std::string &msg) const {
    throw ParseError(peek().loc, msg);
  }
  void expect(const std::string &p) {
    if (!is_punct(p)) {
      std::string got = peek().kind == Tok::End ? "end of input" : "'" + peek().text + "'";
      fail("expected '" + p + "' but found " + got);
    }
    next();
  }
  std::string ident() {
    if (peek().kind != Tok::Ident)
      fail("expected identifier");
    if (kKeywords.count(peek().text))
      fail("reserved word '" + peek().text + "' used as identifier");
    return next().text;
  }
  Int number() {
    bool neg = false;
    if (is_punct("-")) {
      next();
      neg = true;
    }
    if (peek().kind != Tok::Number)
      fail("expected integer literal");
    Int v = parse_int(next().text);
    return neg ? Int(-v) : v;
  }
  static bool is_decl_kw(const std::string &s) {
    return s == "int" || s == "buf" || s == "rarr" || s == "warr" ||
           s == "arr" || s == "param";
  }

  void parse_decl(std::vector<Decl> &into, bool allow_param) {
    std::string kw = next().text;
    DeclKind k = kw == "int"    ? DeclKind::Int
                 : kw == "buf"  ? DeclKind::Buf
                 : kw == "rarr" ? DeclKind::RArr
                 : kw == "warr" ? DeclKind::WArr
                 : kw == "arr"  ? DeclKind::Arr
                                : DeclKind::Param;
    if (k == DeclKind::Param && !allow_param)
      fail("params must be declared at top level");
    if (k == DeclKind::Param) {
      Decl d{k, ident(), std::nullopt, std::nullopt};
      while (is_punct(">=") || is_punct("<=")) {
        bool lower = next().text == ">=";
        Int v = number();
        (lower ? d.min : d.max) = v;
      }
      expect(";");
      add_decl(into, d);
      return;
    }
    for (;;) {
      add_decl(into, Decl{k, ident(), std::nullopt, std::nullopt});
      if (is_punct(",")) {
        next();
        continue;
      }
      break;
    }
    expect(";");
  }

  void add_decl(std::vector<Decl> &into, const Decl &d) {
    for (auto &e : into)
      if (e.name == d.name)
        fail("duplicate declaration of '" + d.name + "'");
    into.push_back(d);
  }

  void parse_function() {
    next(); // void
    Function f;
    f.name = ident();
    expect("(");
    expect(")");
    for (auto &g : prog_.funcs)
      if (g.name == f.name)
        fail("duplicate function '" + f.name + "'");
    expect("{");
    std::vector<StmtPtr> body;
    while (!is_punct("}")) {
      if (peek().kind == Tok::End)
        fail("unterminated function body");
      if (peek().kind == Tok::Ident && is_decl_kw(peek().text))
        parse_decl(f.locals, false);
      else
        parse_stmt(body);
    }
    next();
    f.body = seq(body);
    prog_.funcs.push_back(std::move(f));
  }

  StmtPtr parse_block() {
    expect("{");
    std::vector<StmtPtr> items;
    while (!is_punct("}")) {
      if (peek().kind == Tok::End)
        fail("unterminated block");
      parse_stmt(items);
    }
    next();
    return seq(items);
  }

  std::string new_temp() {
    std::string t = gen_->fresh("__t");
    temps_.push_back(t);
    return t;
  }

  // ---- expressions ----
  SE mk_se(SExpr::Kind k, SrcLoc l) {
    auto e = std::make_shared<SExpr>();
    e->kind = k;
    e->loc = l;
    return e;
  }

  SE parse_expr() {
    SE l = parse_add();
    static const std::set<std::string> cmp = {"<", "<=", ">", ">=", "==", "!="};
    if (peek().kind == Tok::Punct && cmp.count(peek().text)) {
      auto loc = peek().loc;
      std::string op = next().text;
      SE r = parse_add();
      SE b = mk_se(SExpr::Bin, loc);
      b->op = op;
      b->l = l;
      b->r = r;
      if (peek().kind == Tok::Punct && cmp.count(peek().text))
        fail("chained comparisons are not supported");
      return b;
    }
    if (is_punct("&&") || is_punct("||"))
      fail("logical operators are not supported in expressions");
    return l;
  }
  SE parse_add() {
    SE l = parse_mul();
    while (is_punct("+") || is_punct("-")) {
      auto loc = peek().loc;
      std::string op = next().text;
      SE r = parse_mul();
      SE b = mk_se(SExpr::Bin, loc);
      b->op = op;
      b->l = l;
      b->r = r;
      l = b;
    }
    return l;
  }
  SE parse_mul() {
    SE l = parse_unary();
    while (is_punct("*") || is_punct("/") || is_punct("%")) {
      auto loc = peek().loc;
      std::string op = next().text;
      SE r = parse_unary();
      SE b = mk_se(SExpr::Bin, loc);
      b->op = op;
      b->l = l;
      b->r = r;
      l = b;
    }
    return l;
  }
  SE parse_unary() {
    auto loc = peek().loc;
    if (is_punct("-")) {
      next();
      if (peek().kind == Tok::Number) {
        SE n = mk_se(SExpr::Num, loc);
        n->value = -parse_int(next().text);
        return n;
      }
      SE n = mk_se(SExpr::Neg, loc);
      n->l = parse_unary();
      return n;
    }
    if (is_punct("!")) {
      next();
      SE n = mk_se(SExpr::Not, loc);
      n->l = parse_unary();
      return n;
    }
    return parse_primary();
  }
  SE parse_primary() {
    auto loc = peek().loc;
    if (peek().kind == Tok::Number) {
      SE n = mk_se(SExpr::Num, loc);
      n->value = parse_int(next().text);
      return n;
    }
    if (is_punct("(")) {
      next();
      SE e = parse_expr();
      expect(")");
      return e;
    }
    if (peek().kind == Tok::Ident) {
      std::string name = ident();
      if (is_punct("[")) {
        next();
        SE idx = parse_expr();
        expect("]");
        SE n = mk_se(SExpr::Index, loc);
        n->name = name;
        n->l = idx;
        return n;
      }
      if (is_punct(".") )
        fail("stream operations may only appear as whole statements");
      SE n = mk_se(SExpr::Var, loc);
      n->name = name;
      return n;
    }
    fail("expected expression");
  }

  // ---- lowering ----
  static BinOp to_op(const std::string &s) {
    if (s == "+") return BinOp::Add;
    if (s == "-") return BinOp::Sub;
    if (s == "*") return BinOp::Mul;
    if (s == "/") return BinOp::Div;
    if (s == "%") return BinOp::Mod;
    if (s == "<") return BinOp::Lt;
    if (s == "<=") return BinOp::Le;
    return BinOp::Eq;
  }

  Atom atomize(const SE &e, std::vector<StmtPtr> &out) {
    if (e->kind == SExpr::Num) return Atom::lit(e->value);
    if (e->kind == SExpr::Var) return Atom::var(e->name);
    if (e->kind == SExpr::Index) {
      Expr idx = lower(e->l, out);
      std::string t = new_temp();
      out.push_back(mk(ReadArr{t, e->name, idx}, e->loc));
      return Atom::var(t);
    }
    Expr x = lower(e, out);
    std::string t = new_temp();
    out.push_back(mk(Assign{t, x}, e->loc));
    return Atom::var(t);
  }

  Expr lower(const SE &e, std::vector<StmtPtr> &out) {
    switch (e->kind) {
    case SExpr::Num: return Expr::constant(e->value);
    case SExpr::Var: return Expr::var(e->name);
    case SExpr::Index: return Expr::of_atom(atomize(e, out));
    case SExpr::Neg: {
      Atom a = atomize(e->l, out);
      return Expr::bin(BinOp::Sub, Atom::lit(0), a);
    }
    case SExpr::Not: {
      Atom a = atomize(e->l, out);
      return Expr::bin(BinOp::Eq, a, Atom::lit(0));
    }
    case SExpr::Bin: {
      Atom l = atomize(e->l, out);
      Atom r = atomize(e->r, out);
      if (e->op == ">") return Expr::bin(BinOp::Lt, r, l);
      if (e->op == ">=") return Expr::bin(BinOp::Le, r, l);
      if (e->op == "!=") {
        std::string t = new_temp();
        out.push_back(mk(Assign{t, Expr::bin(BinOp::Eq, l, r)}, e->loc));
        return Expr::bin(BinOp::Eq, Atom::var(t), Atom::lit(0));
      }
      return Expr::bin(to_op(e->op), l, r);
    }
    }
    return Expr::constant(0);
  }

  std::string lower_to_var(const SE &e, std::vector<StmtPtr> &out) {
    if (e->kind == SExpr::Var) return e->name;
    Expr x = lower(e, out);
    if (x.kind == Expr::Kind::Var) return x.name;
    std::string t = new_temp();
    out.push_back(mk(Assign{t, x}, e->loc));
    return t;
  }

  // ---- statements ----
  void parse_stmt(std::vector<StmtPtr> &out) {
    auto loc = peek().loc;
    if (peek().kind == Tok::Annot) {
      if (pending_annot_)
        fail("two annotations for one loop");
      pending_annot_ = true;
      pending_annot_text_ = peek().text;
      pending_annot_loc_ = peek().loc;
      next();
      if (!is_kw("for"))
        throw ParseError(pending_annot_loc_, "annotation not followed by a for loop");
      return;
    }
    if (is_punct(";")) {
      next();
      return;
    }
    if (is_punct("{")) {
      out.push_back(parse_block());
      return;
    }
    if (is_kw("for")) {
      parse_for(out);
      return;
    }
    if (is_kw("if")) {
      out.push_back(parse_if(out));
      return;
    }
    if (is_kw("kernel")) {
      next();
      if (kernel_depth_ > 0)
        throw ParseError(loc, "kernel blocks cannot be nested");
      ++kernel_depth_;
      StmtPtr body = parse_block();
      --kernel_depth_;
      out.push_back(mk(Kernel{body}, loc));
      return;
    }
    if (peek().kind == Tok::Ident && is_decl_kw(peek().text))
      fail("declarations must appear at top level or at the start of a function");
    if (peek().kind == Tok::Ident && peek().text == "else")
      fail("'else' without 'if'");
    std::string name = ident();
    if (is_punct("(")) {
      next();
      expect(")");
      expect(";");
      out.push_back(mk(Call{name}, loc));
      return;
    }
    if (is_punct(".")) {
      next();
      if (!is_kw("write"))
        fail("expected 'write' (a read must be assigned: x = a.read();)");
      next();
      expect("(");
      SE e = parse_expr();
      expect(")");
      expect(";");
      std::string v = lower_to_var(e, out);
      out.push_back(mk(WriteStream{name, v}, loc));
      return;
    }
    if (is_punct("[")) {
      next();
      SE idx = parse_expr();
      expect("]");
      if (!is_punct("=") && !is_punct(":="))
        fail("expected '=' after array element");
      next();
      SE rhs = parse_expr();
      expect(";");
      Expr ix = lower(idx, out);
      std::string v = lower_to_var(rhs, out);
      out.push_back(mk(WriteArr{name, ix, v}, loc));
      return;
    }
    if (is_punct("++") || is_punct("--")) {
      bool inc = next().text == "++";
      expect(";");
      out.push_back(mk(Assign{name, Expr::bin(inc ? BinOp::Add : BinOp::Sub,
                                              Atom::var(name), Atom::lit(1))},
                       loc));
      return;
    }
    if (is_punct("+=") || is_punct("-=") || is_punct("*=")) {
      std::string op = next().text.substr(0, 1);
      SE rhs = parse_expr();
      expect(";");
      Atom r = atomize(rhs, out);
      out.push_back(mk(Assign{name, Expr::bin(to_op(op), Atom::var(name), r)}, loc));
      return;
    }
    if (!is_punct("=") && !is_punct(":="))
      fail("expected assignment");
    next();
    if (peek().kind == Tok::Ident && is_punct(".", 1) && peek(2).text == "read") {
      std::string a = ident();
      next();
      next();
      expect("(");
      expect(")");
      expect(";");
      out.push_back(mk(ReadStream{name, a}, loc));
      return;
    }
    SE rhs = parse_expr();
    expect(";");
    if (rhs->kind == SExpr::Index) {
      Expr ix = lower(rhs->l, out);
      out.push_back(mk(ReadArr{name, rhs->name, ix}, loc));
      return;
    }
    Expr e = lower(rhs, out);
    out.push_back(mk(Assign{name, e}, loc));
  }

  StmtPtr parse_if(std::vector<StmtPtr> &out) {
    auto loc = peek().loc;
    next(); // if
    expect("(");
    SE c = parse_expr();
    expect(")");
    std::string g = lower_to_var(c, out);
    StmtPtr th = parse_block();
    StmtPtr el = skip();
    if (is_kw("else")) {
      next();
      if (is_kw("if")) {
        std::vector<StmtPtr> inner;
        StmtPtr nested = parse_if(inner);
        inner.push_back(nested);
        el = seq(inner);
      } else {
        el = parse_block();
      }
    }
    return mk(If{g, th, el}, loc);
  }

  void parse_for(std::vector<StmtPtr> &out) {
    auto loc = peek().loc;
    std::string annot;
    if (pending_annot_) {
      annot = pending_annot_text_;
      pending_annot_ = false;
    }
    next(); // for
    expect("(");
    std::string x = ident();
    if (!is_punct("=") && !is_punct(":="))
      fail("expected '=' in loop initializer");
    next();
    SE init = parse_expr();
    expect(";");
    if (ident() != x)
      fail("loop condition must test the loop variable");
    if (!is_punct("!="))
      fail("loop condition must have the form 'x != bound'");
    next();
    SE bound = parse_expr();
    expect(";");
    if (ident() != x)
      fail("loop update must modify the loop variable");
    Int step;
    if (is_punct("++")) {
      next();
      step = 1;
    } else if (is_punct("--")) {
      next();
      step = -1;
    } else if (is_punct("+=")) {
      next();
      step = number();
    } else if (is_punct("-=")) {
      next();
      step = -number();
    } else {
      fail("loop update must be 'x += n' or 'x -= n'");
    }
    if (step == 0)
      fail("loop step must be nonzero");
    expect(")");
    Expr ie = lower(init, out);
    std::vector<StmtPtr> bound_pre;
    Expr be = lower(bound, bound_pre);
    if (!bound_pre.empty())
      throw ParseError(loc, "loop bound must be a single operation on variables/literals");
    StmtPtr body = parse_block();
    For f{x, ie, be, step, body, annot};
    out.push_back(mk(std::move(f), loc));
  }
};

void indent_to(std::ostringstream &os, int n) {
  for (int i = 0; i < n; ++i) os << "  ";
}

std::string atom_str(const Atom &a) {
  return a.is_var ? a.name : to_string(a.value);
}

void print_block(std::ostringstream &os, const StmtPtr &s, int ind);

void print_one(std::ostringstream &os, const StmtPtr &s, int ind) {
  if (auto q = s->as<Seq>()) {
    for (auto &it : q->items) print_one(os, it, ind);
    return;
  }
  if (auto n = s->as<For>()) {
    if (!n->annotation.empty()) {
      indent_to(os, ind);
      os << "//@ invariant " << n->annotation << "\n";
    }
    indent_to(os, ind);
    os << "for (" << n->x << " = " << print_expr(n->init) << "; " << n->x
       << " != " << print_expr(n->bound) << "; " << n->x << " += "
       << to_string(n->step) << ") {\n";
    print_block(os, n->body, ind + 1);
    indent_to(os, ind);
    os << "}\n";
    return;
  }
  if (auto n = s->as<If>()) {
    indent_to(os, ind);
    os << "if (" << n->x << ") {\n";
    print_block(os, n->then_s, ind + 1);
    indent_to(os, ind);
    if (!seq_items(n->else_s).empty()) {
      os << "} else {\n";
      print_block(os, n->else_s, ind + 1);
      indent_to(os, ind);
    }
    os << "}\n";
    return;
  }
  if (auto n = s->as<Kernel>()) {
    indent_to(os, ind);
    os << "kernel {\n";
    print_block(os, n->body, ind + 1);
    indent_to(os, ind);
    os << "}\n";
    return;
  }
  indent_to(os, ind);
  if (auto n = s->as<ReadArr>())
    os << n->x << " = " << n->a << "[" << print_expr(n->idx) << "];\n";
  else if (auto n = s->as<WriteArr>())
    os << n->a << "[" << print_expr(n->idx) << "] = " << n->x << ";\n";
  else if (auto n = s->as<ReadStream>())
    os << n->x << " = " << n->a << ".read();\n";
  else if (auto n = s->as<WriteStream>())
    os << n->a << ".write(" << n->x << ");\n";
  else if (auto n = s->as<Assign>())
    os << n->x << " = " << print_expr(n->e) << ";\n";
  else if (auto n = s->as<Call>())
    os << n->fn << "();\n";
}

void print_block(std::ostringstream &os, const StmtPtr &s, int ind) {
  print_one(os, s, ind);
}

void print_decl(std::ostringstream &os, const Decl &d, int ind) {
  indent_to(os, ind);
  os << decl_keyword(d.kind) << " " << d.name;
  if (d.min) os << " >= " << to_string(*d.min);
  if (d.max) os << " <= " << to_string(*d.max);
  os << ";\n";
}

} // namespace

bool is_reserved_word(const std::string &s) { return kKeywords.count(s) != 0; }

Program parse_program(const std::string &text) { return Parser(text).run(); }

std::string print_expr(const Expr &e) {
  switch (e.kind) {
  case Expr::Kind::Const: return to_string(e.value);
  case Expr::Kind::Var: return e.name;
  case Expr::Kind::Bin:
    return atom_str(e.lhs) + " " + binop_symbol(e.op) + " " + atom_str(e.rhs);
  }
  return "";
}

std::string print_stmt(const StmtPtr &s, int indent) {
  std::ostringstream os;
  print_one(os, s, indent);
  return os.str();
}

std::string print_program(const Program &p) {
  std::ostringstream os;
  for (auto &d : p.decls) print_decl(os, d, 0);
  for (auto &f : p.funcs) {
    os << "\nvoid " << f.name << "() {\n";
    for (auto &d : f.locals) print_decl(os, d, 1);
    print_block(os, f.body, 1);
    os << "}\n";
  }
  if (p.main && !seq_items(p.main).empty()) {
    if (!p.decls.empty() || !p.funcs.empty()) os << "\n";
    print_block(os, p.main, 0);
  }
  return os.str();
}

} // namespace streamline
