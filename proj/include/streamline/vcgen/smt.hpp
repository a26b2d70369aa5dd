#pragma once

#include "streamline/assertions/formula.hpp"

#include <string>

namespace streamline {

struct SmtConfig {
  std::string solver_path; // empty: $STREAMLINE_SOLVER, then "z3"
  int timeout_ms = 10000;
  std::string dump_dir; // write every query there as <hash>.smt2 when set
};

enum class SmtVerdict { Valid, Invalid, Unknown };
const char *smt_verdict_name(SmtVerdict v);

struct SmtResult {
  SmtVerdict verdict = SmtVerdict::Unknown;
  std::string detail; // solver output or the reason for Unknown
  std::string query_hash;
};

// SMT-LIB 2 query whose unsatisfiability means hyp => concl. Heaps are total
// arrays; an index sequence is a length plus an index function; an atom with
// an undefined subterm is false.
std::string smt_query(const Form &hyp, const Form &concl);

// FNV-1a of the query text, 16 hex digits.
std::string query_hash(const std::string &query);

std::string solver_command(const SmtConfig &cfg);
bool solver_available(const SmtConfig &cfg);

SmtResult smt_entails(const Form &hyp, const Form &concl, const SmtConfig &cfg);

} // namespace streamline
