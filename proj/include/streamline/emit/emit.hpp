#pragma once

#include "streamline/frontend/ast.hpp"

#include <string>

namespace streamline {

enum class EmitStyle { Baseline, Buffered, Streamed };
const char *emit_style_name(EmitStyle s);

struct EmitConfig {
  std::string name = "kernel"; // kernel function name; extra kernel blocks get _1, _2, ...
                               // and "_fn" is appended on a clash with a program name
  int width = 32;              // 8, 16, 32 or 64
  int depth = 0;               // stream depth hint, 0 for none
  EmitStyle style = EmitStyle::Streamed;
};

// The kernel blocks of p as functions: streams become hls::stream parameters,
// remaining arrays pointer parameters, params by value and every other INT
// register shared with the host by reference.
std::string emit_kernel(const Program &p, const EmitConfig &cfg);

// A main() running the host code of p and calling the kernel functions.
// Params come from argv (N=5), array contents from stdin lines
// "<array> <index> <value>"; prints every INT register and then the content
// of every stream and, with dump=K, cells 0..K-1 of every array.
std::string emit_host(const Program &p, const EmitConfig &cfg);

// Kernel and host of a source program in one file.
std::string emit_baseline(const Program &source, const EmitConfig &cfg);

// Minimal hls::stream for compiling emitted code without vendor headers.
const std::string &hls_stream_stub();

} // namespace streamline
