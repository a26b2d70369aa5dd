#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace streamline {

using Int = boost::multiprecision::cpp_int;

// Source position (1-based); line 0 means "unknown".
struct SrcLoc {
  int line = 0;
  int col = 0;
  std::string str() const;
};

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
public:
  ParseError(SrcLoc loc, const std::string &msg);
  SrcLoc loc;
};

class TypeError : public Error {
public:
  explicit TypeError(std::vector<std::string> diags);
  std::vector<std::string> diagnostics;
};

// Truncating division / remainder, as in C. Caller guarantees d != 0.
Int div_trunc(const Int &n, const Int &d);
Int mod_trunc(const Int &n, const Int &d);

std::string to_string(const Int &v);
Int parse_int(const std::string &s);
long long to_ll(const Int &v); // throws Error if out of range

// splitmix64, used wherever a deterministic hash-like stream is needed.
uint64_t mix64(uint64_t x);
uint64_t hash_str(const std::string &s);

} // namespace streamline
