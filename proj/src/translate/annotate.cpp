#include "streamline/translate/translate.hpp"

#include <sstream>

namespace streamline {

namespace {

// Same pre-order as the loop numbering of the buffer planner.
StmtPtr attach(const StmtPtr &s, const std::map<int, std::string> &anns, int &next) {
  if (auto q = s->as<Seq>()) {
    std::vector<StmtPtr> items;
    for (auto &i : q->items) items.push_back(attach(i, anns, next));
    return mk(Seq{items}, s->loc);
  }
  if (auto i = s->as<If>()) {
    auto t = attach(i->then_s, anns, next);
    return mk(If{i->x, t, attach(i->else_s, anns, next)}, s->loc);
  }
  if (auto f = s->as<For>()) {
    int id = next++;
    auto it = anns.find(id);
    For g = *f;
    if (it != anns.end()) g.annotation = it->second;
    g.body = attach(f->body, anns, next);
    return mk(g, s->loc);
  }
  if (auto k = s->as<Kernel>()) return mk(Kernel{attach(k->body, anns, next)}, s->loc);
  return s;
}

} // namespace

std::map<int, std::string> parse_annotations(const std::string &text) {
  std::map<int, std::string> out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    size_t b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos || line[b] == '#') continue;
    size_t colon = line.find(':', b);
    if (line[b] != 'L' || colon == std::string::npos)
      throw ParseError(SrcLoc{lineno, 1}, "annotations: expected 'L<loop>: <formula>'");
    int id = 0;
    try {
      size_t used = 0;
      id = std::stoi(line.substr(b + 1, colon - b - 1), &used);
      if (used != colon - b - 1) throw std::invalid_argument("");
    } catch (const std::exception &) {
      throw ParseError(SrcLoc{lineno, 1}, "annotations: bad loop number");
    }
    std::string f = line.substr(colon + 1);
    parse_formula(f); // reject early with the formula parser's message
    out[id] = f;
  }
  return out;
}

Program annotate_loops(const Program &p, const std::map<int, std::string> &anns) {
  int next = 0;
  Program q = p;
  q.main = attach(p.main, anns, next);
  for (auto &[id, f] : anns)
    if (id < 0 || id >= next)
      throw Error("annotation for L" + std::to_string(id) + " but the program has " +
                  std::to_string(next) + " loops");
  return q;
}

} // namespace streamline
