#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "json.hpp"
#include "streamline/emit/emit.hpp"
#include "streamline/frontend/parser.hpp"
#include "streamline/translate/translate.hpp"

namespace py = pybind11;
using namespace streamline;

namespace {

// Results cross the boundary as JSON text; the Python side decodes them.
std::string translate_json(const std::string &text, bool buffer_only, bool simplify, int coeff_range,
                           const std::string &annotations) {
  Checked c = load_program(text);
  if (!annotations.empty()) {
    Program p = annotate_loops(c.prog, parse_annotations(annotations));
    c = Checked{p, typecheck(p)};
  }
  TranslateConfig cfg;
  cfg.buffer_only = buffer_only;
  cfg.simplify = simplify;
  cfg.infer.coeff_range = coeff_range;
  Translation t = translate(c, cfg);
  nlohmann::ordered_json j;
  j["target"] = print_program(t.target);
  j["target_twostep"] = print_program(t.target_twostep);
  j["report"] = nlohmann::ordered_json::parse(report_json(t.report, -1));
  j["derivation"] = buffer_only ? std::string() : derivation_to_json(t.derivation, -1);
  return j.dump();
}

std::string check_json(const std::string &deriv, const std::string &source, const std::string &target) {
  Derivation d = derivation_from_json(deriv);
  std::optional<Program> sp, tp;
  if (!source.empty()) sp = load_program(source).prog;
  if (!target.empty()) tp = load_program(target).prog;
  CheckResult r = check_derivation(d, {}, sp ? &*sp : nullptr, tp ? &*tp : nullptr);
  nlohmann::ordered_json j{{"ok", r.ok}, {"path", r.path}, {"message", r.message}, {"nodes", r.nodes}};
  return j.dump();
}

std::string run_json(const std::string &text, const std::string &input) {
  Program p = load_program(text).prog;
  return run_program(p, parse_input(nlohmann::json::parse(input))).to_json().dump();
}

std::string emit_text(const std::string &text, const std::string &kind, const std::string &name, int width) {
  Program p = load_program(text).prog;
  EmitConfig cfg;
  cfg.name = name;
  cfg.width = width;
  if (kind == "kernel") return emit_kernel(p, cfg);
  if (kind == "host") return emit_host(p, cfg);
  if (kind == "baseline") return emit_baseline(p, cfg);
  throw Error("unknown emit kind '" + kind + "'");
}

} // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Array-to-stream translation with checked derivations";
  // translators run newest first, so the base class goes first
  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<TypeError>(m, "TypeError", PyExc_ValueError);

  m.def("format_program", [](const std::string &t) { return print_program(parse_program(t)); });
  m.def("translate_json", &translate_json, py::arg("text"), py::arg("buffer_only") = false,
        py::arg("simplify") = true, py::arg("coeff_range") = 2, py::arg("annotations") = "");
  m.def("check_json", &check_json, py::arg("derivation"), py::arg("source") = "", py::arg("target") = "");
  m.def("run_json", &run_json, py::arg("text"), py::arg("input"));
  m.def("emit", &emit_text, py::arg("text"), py::arg("kind") = "kernel", py::arg("name") = "kernel",
        py::arg("width") = 32);
}
