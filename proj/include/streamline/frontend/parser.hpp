#pragma once

#include "streamline/frontend/ast.hpp"

#include <string>

namespace streamline {

// Parses `.hdsl` text. Nested expressions are lowered to the two-operand form
// with fresh `int` temporaries appended to the declarations.
Program parse_program(const std::string &text);

// Canonical pretty-printer (2-space indent, one statement per line).
std::string print_program(const Program &p);
std::string print_stmt(const StmtPtr &s, int indent = 0);
std::string print_expr(const Expr &e);

bool is_reserved_word(const std::string &s);

} // namespace streamline
