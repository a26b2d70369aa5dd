#include "streamline/common.hpp"

namespace streamline {

std::string SrcLoc::str() const {
  if (line == 0)
    return "?";
  return std::to_string(line) + ":" + std::to_string(col);
}

ParseError::ParseError(SrcLoc l, const std::string &msg)
    : Error(l.str() + ": " + msg), loc(l) {}

static std::string join_diags(const std::vector<std::string> &d) {
  std::string out;
  for (auto &s : d) {
    if (!out.empty())
      out += "\n";
    out += s;
  }
  return out;
}

TypeError::TypeError(std::vector<std::string> diags)
    : Error(join_diags(diags)), diagnostics(std::move(diags)) {}

Int div_trunc(const Int &n, const Int &d) {
  // cpp_int division already truncates toward zero
  return n / d;
}

Int mod_trunc(const Int &n, const Int &d) { return n % d; }

std::string to_string(const Int &v) { return v.str(); }

Int parse_int(const std::string &s) {
  try {
    return Int(s);
  } catch (const std::exception &) {
    throw Error("bad integer literal '" + s + "'");
  }
}

long long to_ll(const Int &v) {
  if (v > Int(INT64_MAX) || v < Int(INT64_MIN))
    throw Error("integer out of 64-bit range: " + v.str());
  return v.convert_to<long long>();
}

uint64_t mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

uint64_t hash_str(const std::string &s) {
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return mix64(h);
}

} // namespace streamline
