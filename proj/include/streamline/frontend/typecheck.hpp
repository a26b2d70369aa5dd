#pragma once

#include "streamline/frontend/ast.hpp"

#include <map>

namespace streamline {

enum class Ty { INT, BUF, RARR, WARR };
const char *ty_name(Ty t);

struct ParamInfo {
  std::optional<Int> min, max;
  bool operator==(const ParamInfo &o) const { return min == o.min && max == o.max; }
};

struct TypeEnv {
  std::map<std::string, Ty> bindings;
  std::map<std::string, ParamInfo> params; // params are also bound as INT

  std::optional<Ty> lookup(const std::string &n) const;
  bool is(const std::string &n, Ty t) const;
  bool is_param(const std::string &n) const { return params.count(n) != 0; }
  bool is_array(const std::string &n) const { return is(n, Ty::RARR) || is(n, Ty::WARR); }
  std::vector<std::string> arrays() const; // sorted
  bool operator==(const TypeEnv &o) const {
    return bindings == o.bindings && params == o.params;
  }
};

// RARR <-> WARR; INT, BUF unchanged.
TypeEnv flip(const TypeEnv &g);
Ty flip(Ty t);

// Replaces calls by fresh-renamed copies of function bodies. Throws Error on
// recursion or unknown functions.
Program inline_calls(const Program &p);

// Requires an inlined program. Returns the kernel-side environment; throws
// TypeError carrying every diagnostic found.
TypeEnv typecheck(const Program &p);

// parse + inline + typecheck
struct Checked {
  Program prog;
  TypeEnv env;
};
Checked load_program(const std::string &text);

} // namespace streamline
