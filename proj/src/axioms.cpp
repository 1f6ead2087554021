#include "dpsp/axioms.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "dpsp/parser.hpp"

namespace dpsp {

AxiomSet AxiomSet::from_json(const nlohmann::json& j) {
  AxiomSet set;
  const auto& list = j.is_array() ? j : j.at("mechanisms");
  for (const auto& m : list) {
    MechAxiom ax;
    ax.mechanism = m.at("mechanism").get<std::string>();
    ax.params = m.at("params").get<std::vector<std::string>>();
    for (const auto& c : m.at("cases")) {
      AxiomCase k;
      k.name = c.value("name", "case" + std::to_string(ax.cases.size() + 1));
      k.requires_ = parse_expr(c.value("requires", "true"));
      k.ensures = parse_expr(c.value("ensures", "true"));
      k.cost = parse_expr(c.value("cost", "0"));
      ax.cases.push_back(std::move(k));
    }
    if (ax.cases.empty()) throw Error("axiom for '" + ax.mechanism + "' has no cases");
    set.add(std::move(ax));
  }
  return set;
}

AxiomSet AxiomSet::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open axiom file " + path);
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw Error("bad axiom file " + path + ": " + e.what());
  }
}

void AxiomSet::add(MechAxiom m) {
  if (mechs_.count(m.mechanism)) throw Error("duplicate axiom for '" + m.mechanism + "'");
  auto name = m.mechanism;
  mechs_.emplace(std::move(name), std::move(m));
}

const MechAxiom* AxiomSet::find(const std::string& name) const {
  auto it = mechs_.find(name);
  return it == mechs_.end() ? nullptr : &it->second;
}

}  // namespace dpsp
