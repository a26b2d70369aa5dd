#pragma once

#include "streamline/common.hpp"

#include <map>
#include <memory>
#include <set>
#include <string>
#include <variant>
#include <vector>

namespace streamline {

enum class BinOp { Add, Sub, Mul, Div, Mod, Lt, Eq, Le };

const char *binop_symbol(BinOp op); // surface spelling: + - * / % < == <=

// An operand of a binary expression: a variable or an integer literal.
struct Atom {
  bool is_var = true;
  std::string name;
  Int value;

  static Atom var(std::string n) { return Atom{true, std::move(n), 0}; }
  static Atom lit(Int v) { return Atom{false, "", std::move(v)}; }
  bool operator==(const Atom &o) const {
    return is_var == o.is_var && (is_var ? name == o.name : value == o.value);
  }
};

struct Expr {
  enum class Kind { Const, Var, Bin };
  Kind kind = Kind::Const;
  Int value;        // Const
  std::string name; // Var
  BinOp op = BinOp::Add;
  Atom lhs, rhs; // Bin

  static Expr constant(Int v);
  static Expr var(std::string n);
  static Expr bin(BinOp op, Atom l, Atom r);
  static Expr of_atom(const Atom &a);

  bool operator==(const Expr &o) const;
  void vars(std::set<std::string> &out) const;
};

struct Stmt;
using StmtPtr = std::shared_ptr<const Stmt>;

struct ReadArr {
  std::string x, a;
  Expr idx;
};
struct WriteArr {
  std::string a;
  Expr idx;
  std::string x;
};
struct ReadStream {
  std::string x, a;
};
struct WriteStream {
  std::string a, x;
};
struct Assign {
  std::string x;
  Expr e;
};
struct Seq {
  std::vector<StmtPtr> items; // never contains a Seq; empty = skip
};
struct If {
  std::string x;
  StmtPtr then_s, else_s; // both Seq
};
struct For {
  std::string x;
  Expr init, bound;
  Int step;
  StmtPtr body; // Seq
  std::string annotation; // raw `//@ invariant` text, empty if none
};
struct Kernel {
  StmtPtr body; // Seq
};
struct Call {
  std::string fn;
};

struct Stmt {
  std::variant<ReadArr, WriteArr, ReadStream, WriteStream, Assign, Seq, If,
               For, Kernel, Call>
      node;
  SrcLoc loc;

  template <class T> const T *as() const { return std::get_if<T>(&node); }
  template <class T> bool is() const { return std::holds_alternative<T>(node); }
};

bool stmt_equal(const Stmt &a, const Stmt &b);
inline bool stmt_equal(const StmtPtr &a, const StmtPtr &b) {
  return stmt_equal(*a, *b);
}

StmtPtr mk(ReadArr n, SrcLoc l = {});
StmtPtr mk(WriteArr n, SrcLoc l = {});
StmtPtr mk(ReadStream n, SrcLoc l = {});
StmtPtr mk(WriteStream n, SrcLoc l = {});
StmtPtr mk(Assign n, SrcLoc l = {});
StmtPtr mk(Seq n, SrcLoc l = {});
StmtPtr mk(If n, SrcLoc l = {});
StmtPtr mk(For n, SrcLoc l = {});
StmtPtr mk(Kernel n, SrcLoc l = {});
StmtPtr mk(Call n, SrcLoc l = {});

StmtPtr skip();
// Builds a Seq, splicing nested Seqs so the "no Seq inside Seq" shape holds.
StmtPtr seq(const std::vector<StmtPtr> &items);
const std::vector<StmtPtr> &seq_items(const StmtPtr &s); // s must be a Seq

enum class DeclKind { Int, Buf, RArr, WArr, Arr, Param };
const char *decl_keyword(DeclKind k);

struct Decl {
  DeclKind kind = DeclKind::Int;
  std::string name;
  std::optional<Int> min, max; // params only
  bool operator==(const Decl &o) const {
    return kind == o.kind && name == o.name && min == o.min && max == o.max;
  }
};

struct Function {
  std::string name;
  std::vector<Decl> locals;
  StmtPtr body;
};

struct Program {
  std::vector<Decl> decls;
  std::vector<Function> funcs;
  StmtPtr main; // Seq

  const Decl *find_decl(const std::string &n) const;
  bool has_decl(const std::string &n) const { return find_decl(n) != nullptr; }
};

bool program_equal(const Program &a, const Program &b);

// Every identifier mentioned anywhere (decls, locals, statements).
std::set<std::string> all_names(const Program &p);

// Variables assigned by a statement (targets of reads and assignments, loop vars).
void assigned_vars(const StmtPtr &s, std::set<std::string> &out);
// Variables read by a statement (expressions, guards, written values).
void used_vars(const StmtPtr &s, std::set<std::string> &out);
// Arrays/streams touched by a statement.
void touched_arrays(const StmtPtr &s, std::set<std::string> &out);

bool contains_stream_ops(const StmtPtr &s);
bool contains_kernel(const StmtPtr &s);

// Fresh-name source: avoids everything in `taken` and remembers what it hands out.
class NameGen {
public:
  explicit NameGen(std::set<std::string> taken) : taken_(std::move(taken)) {}
  std::string fresh(const std::string &base);
  void reserve(const std::string &n) { taken_.insert(n); }
  bool taken(const std::string &n) const { return taken_.count(n) != 0; }

private:
  std::set<std::string> taken_;
  std::map<std::string, int> next_;
};

} // namespace streamline
