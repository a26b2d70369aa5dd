#pragma once

#include "streamline/translate/derivation.hpp"
#include "streamline/vcgen/smt.hpp"
#include "streamline/vcgen/validity.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace streamline {

struct CheckConfig {
  SampleConfig sample;
  std::optional<SmtConfig> smt; // also require the external solver to agree
};

struct CheckResult {
  bool ok = true;
  std::string path;    // first failing node, e.g. "Tr-Conseq/Tr-Seq[2]/Tr-For"
  std::string message; // what was wrong there
  size_t nodes = 0;
  size_t entailments = 0; // discharged (identical ones included)
  size_t sampled = 0;     // of those, needed the sampler
  size_t smt = 0;         // of those, certified by the external solver
  // Every failing entailment (path, message). Schema errors stop the check,
  // entailment failures do not; `path`/`message` repeat the first failure.
  std::vector<std::pair<std::string, std::string>> failures;
};

// Validates every node against its rule schema, the premise wiring and the
// type conditions, and re-discharges every entailment. When `source` and
// `target` are given, the root must translate exactly that pair and start
// from empty streams.
CheckResult check_derivation(const Derivation &d, const CheckConfig &cfg = {},
                             const Program *source = nullptr, const Program *target = nullptr);

} // namespace streamline
