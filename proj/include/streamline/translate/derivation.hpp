#pragma once

#include "streamline/assertions/formula.hpp"
#include "streamline/frontend/typecheck.hpp"

#include <set>
#include <string>
#include <vector>

namespace streamline {

// Γ ⊢ {pre} src ⟹ tgt {post}. A null src is the insertion judgment (•).
struct Judgment {
  int env = 0; // index into Derivation::envs
  Form pre;
  StmtPtr src;
  StmtPtr tgt;
  Form post;
};

// ⊨ hyp ⟹ concl, with how it was discharged when the derivation was built.
struct Entailment {
  std::string role; // "pre" or "post" for consequence nodes, "guard" under conditionals
  Form hyp, concl;
  std::string how;  // identical | propositional | sampled | smt
  std::string cert; // solver query hash when how == smt
};

struct DNode {
  std::string rule;
  Judgment j;
  std::vector<DNode> premises;
  std::vector<Entailment> side;
  Form inv; // Tr-For only
};

constexpr int kDerivationVersion = 1;

struct Derivation {
  int version = kDerivationVersion;
  std::vector<TypeEnv> envs; // [0] host side, [1] kernel side
  std::set<std::string> conv;
  DNode root;
};

// Rule names used in derivations.
namespace rule {
inline constexpr const char *ReadMem = "Tr-ReadMem";
inline constexpr const char *WriteMem = "Tr-WriteMem";
inline constexpr const char *Assign = "Tr-Assign";
inline constexpr const char *Seq = "Tr-Seq";
inline constexpr const char *Skip = "Tr-Skip";
inline constexpr const char *If = "Tr-If";
inline constexpr const char *For = "Tr-For";
inline constexpr const char *InsertL = "Tr-InsertL";
inline constexpr const char *InsertR = "Tr-InsertR";
inline constexpr const char *InsRBuf = "Tr-InsRBuf";
inline constexpr const char *InsWBuf = "Tr-InsWBuf";
inline constexpr const char *InsMove = "Tr-InsMove";
inline constexpr const char *Conseq = "Tr-Conseq";
inline constexpr const char *InsConseq = "Tr-InsConseq";
inline constexpr const char *Kernel = "Tr-Kernel";
// Accesses of arrays that stay arrays, and stream operations already in the source.
inline constexpr const char *Keep = "Tr-Keep";
} // namespace rule

// Conjunction lists equal after flattening (true dropped). The schema checks
// compare pre/post formulas this way.
bool same_formula(const Form &a, const Form &b);

size_t derivation_size(const DNode &n);

std::string derivation_to_json(const Derivation &d, int indent = 1);
// Throws Error on malformed input or an unsupported version.
Derivation derivation_from_json(const std::string &text);

// Statement text as stored in derivation files.
std::string stmt_text(const StmtPtr &s);
StmtPtr parse_stmt_text(const std::string &text);

} // namespace streamline
