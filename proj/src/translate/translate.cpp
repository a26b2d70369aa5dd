#include "streamline/translate/translate.hpp"

#include <chrono>
#include <json.hpp>

namespace streamline {

Translation translate(const Checked &c, const TranslateConfig &cfg) {
  auto t0 = std::chrono::steady_clock::now();
  Translation t;
  t.source = c.prog;
  t.plan = plan_buffers(c);
  Report &r = t.report;
  r.candidates = t.plan.candidates;
  r.given_up = t.plan.unplannable;

  auto done = [&] {
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return std::move(t);
  };

  if (cfg.buffer_only) {
    r.conv = r.candidates;
    r.mode = "buffer-only";
    t.target_twostep = t.plan.target(r.conv);
    t.target = cfg.simplify ? simplify_target(t.target_twostep) : t.target_twostep;
    r.derivation_message = "not built in buffer-only mode";
    return done();
  }

  t.infer = infer_invariants(t.plan, r.candidates, cfg.infer);
  for (auto &[a, why] : t.infer.given_up) r.given_up.emplace(a, why);
  r.log = t.infer.log;
  r.mode = t.infer.mode;
  r.vcs = t.infer.vcs.size();
  if (!t.infer.ok) {
    t.target_twostep = t.target = t.source;
    r.derivation_message = "no invariants found";
    return done();
  }
  r.conv = t.infer.conv;
  for (auto &[id, inv] : t.infer.invs.loops) r.invariants[id] = str(inv.formula());
  r.final_assertion = str(t.infer.invs.final_inv.formula());

  t.target_twostep = t.plan.target(r.conv);
  t.target = cfg.simplify ? simplify_target(t.target_twostep) : t.target_twostep;

  const SmtConfig *smt = cfg.infer.smt && r.mode == "sampled+smt" ? &*cfg.infer.smt : nullptr;
  BuildResult b = build_derivation(t.plan, r.conv, t.infer.invs, cfg.infer.sample, smt);
  t.derivation = std::move(b.d);
  r.derivation_nodes = derivation_size(t.derivation.root);
  for (auto &f : b.failures) r.log.push_back("derivation: " + f);

  if (cfg.check) {
    CheckConfig cc;
    cc.sample = cfg.infer.sample;
    if (smt) cc.smt = *smt;
    t.check = check_derivation(t.derivation, cc, &t.source, &t.target_twostep);
    r.derivation_ok = t.check.ok && b.failures.empty();
    r.derivation_message = t.check.ok ? (b.failures.empty() ? "ok" : b.failures.front())
                                      : t.check.path + ": " + t.check.message;
  } else {
    r.derivation_ok = b.failures.empty();
    r.derivation_message = b.failures.empty() ? "not checked" : b.failures.front();
  }
  return done();
}

Translation translate_text(const std::string &text, const TranslateConfig &cfg) {
  return translate(load_program(text), cfg);
}

std::string report_json(const Report &r, int indent) {
  nlohmann::ordered_json j;
  j["candidates"] = r.candidates;
  j["conversion"] = r.conv;
  j["given_up"] = r.given_up;
  nlohmann::ordered_json inv = nlohmann::ordered_json::object();
  for (auto &[id, f] : r.invariants) inv["L" + std::to_string(id)] = f;
  j["invariants"] = inv;
  j["final_assertion"] = r.final_assertion;
  j["vcs"] = r.vcs;
  j["mode"] = r.mode;
  j["derivation"] = {{"nodes", r.derivation_nodes}, {"ok", r.derivation_ok}, {"message", r.derivation_message}};
  j["seconds"] = r.seconds;
  return j.dump(indent);
}

} // namespace streamline
