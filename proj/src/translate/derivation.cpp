#include "streamline/translate/derivation.hpp"

#include "streamline/frontend/parser.hpp"

#include <json.hpp>

namespace streamline {

using json = nlohmann::ordered_json;

bool same_formula(const Form &a, const Form &b) {
  if (a == b) return true;
  auto x = conjuncts(a), y = conjuncts(b);
  if (x.size() != y.size()) return false;
  for (size_t i = 0; i < x.size(); ++i)
    if (!equal(x[i], y[i])) return false;
  return true;
}

size_t derivation_size(const DNode &n) {
  size_t s = 1;
  for (auto &p : n.premises) s += derivation_size(p);
  return s;
}

std::string stmt_text(const StmtPtr &s) {
  std::string t = print_stmt(s);
  while (!t.empty() && t.back() == '\n') t.pop_back();
  return t;
}

StmtPtr parse_stmt_text(const std::string &text) {
  StmtPtr m = parse_program(text).main;
  const auto &items = seq_items(m);
  return items.size() == 1 ? items[0] : m;
}

namespace {

Ty ty_of(const std::string &s) {
  for (Ty t : {Ty::INT, Ty::BUF, Ty::RARR, Ty::WARR})
    if (s == ty_name(t)) return t;
  throw Error("derivation: unknown type " + s);
}

json env_json(const TypeEnv &g) {
  json b = json::object();
  for (auto &[n, t] : g.bindings) b[n] = ty_name(t);
  json p = json::object();
  for (auto &[n, info] : g.params) {
    json o = json::object();
    if (info.min) o["min"] = to_string(*info.min);
    if (info.max) o["max"] = to_string(*info.max);
    p[n] = o;
  }
  return {{"bindings", b}, {"params", p}};
}

TypeEnv env_from(const json &j) {
  TypeEnv g;
  for (auto &[n, t] : j.at("bindings").items()) g.bindings[n] = ty_of(t.get<std::string>());
  for (auto &[n, o] : j.at("params").items()) {
    ParamInfo info;
    if (o.contains("min")) info.min = Int(o.at("min").get<std::string>());
    if (o.contains("max")) info.max = Int(o.at("max").get<std::string>());
    g.params[n] = info;
  }
  return g;
}

json node_json(const DNode &n) {
  json j;
  j["rule"] = n.rule;
  j["env"] = n.j.env;
  j["pre"] = str(n.j.pre);
  j["src"] = n.j.src ? json(stmt_text(n.j.src)) : json(nullptr);
  j["tgt"] = stmt_text(n.j.tgt);
  j["post"] = str(n.j.post);
  if (n.inv) j["inv"] = str(n.inv);
  if (!n.side.empty()) {
    json s = json::array();
    for (auto &e : n.side) {
      json o{{"role", e.role}, {"hyp", str(e.hyp)}, {"concl", str(e.concl)}, {"how", e.how}};
      if (!e.cert.empty()) o["cert"] = e.cert;
      s.push_back(o);
    }
    j["side"] = s;
  }
  if (!n.premises.empty()) {
    json p = json::array();
    for (auto &k : n.premises) p.push_back(node_json(k));
    j["premises"] = p;
  }
  return j;
}

DNode node_from(const json &j) {
  DNode n;
  n.rule = j.at("rule").get<std::string>();
  n.j.env = j.at("env").get<int>();
  n.j.pre = parse_formula(j.at("pre").get<std::string>());
  if (!j.at("src").is_null()) n.j.src = parse_stmt_text(j.at("src").get<std::string>());
  n.j.tgt = parse_stmt_text(j.at("tgt").get<std::string>());
  n.j.post = parse_formula(j.at("post").get<std::string>());
  if (j.contains("inv")) n.inv = parse_formula(j.at("inv").get<std::string>());
  if (j.contains("side"))
    for (auto &o : j.at("side")) {
      Entailment e;
      e.role = o.at("role").get<std::string>();
      e.hyp = parse_formula(o.at("hyp").get<std::string>());
      e.concl = parse_formula(o.at("concl").get<std::string>());
      e.how = o.at("how").get<std::string>();
      if (o.contains("cert")) e.cert = o.at("cert").get<std::string>();
      n.side.push_back(e);
    }
  if (j.contains("premises"))
    for (auto &k : j.at("premises")) n.premises.push_back(node_from(k));
  return n;
}

} // namespace

std::string derivation_to_json(const Derivation &d, int indent) {
  json j;
  j["format"] = "streamline-derivation";
  j["version"] = d.version;
  json envs = json::array();
  for (auto &g : d.envs) envs.push_back(env_json(g));
  j["envs"] = envs;
  j["conv"] = d.conv;
  j["root"] = node_json(d.root);
  return j.dump(indent);
}

Derivation derivation_from_json(const std::string &text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception &e) {
    throw Error(std::string("derivation: ") + e.what());
  }
  try {
    Derivation d;
    d.version = j.at("version").get<int>();
    if (d.version != kDerivationVersion)
      throw Error("derivation: unsupported version " + std::to_string(d.version));
    for (auto &g : j.at("envs")) d.envs.push_back(env_from(g));
    for (auto &a : j.at("conv")) d.conv.insert(a.get<std::string>());
    d.root = node_from(j.at("root"));
    return d;
  } catch (const json::exception &e) {
    throw Error(std::string("derivation: ") + e.what());
  }
}

} // namespace streamline
