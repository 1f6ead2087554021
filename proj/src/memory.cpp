#include "dpsp/memory.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

namespace dpsp {

Layout::Layout(std::vector<std::string> names) : names_(std::move(names)) {
  std::sort(names_.begin(), names_.end());
  names_.erase(std::unique(names_.begin(), names_.end()), names_.end());
  for (std::size_t i = 0; i < names_.size(); ++i) index_[names_[i]] = static_cast<int>(i);
}

int Layout::index(const std::string& name) const {
  auto it = index_.find(name);
  return it == index_.end() ? -1 : it->second;
}

Memory::Memory(LayoutPtr layout, std::vector<Value> values)
    : layout_(std::move(layout)), values_(std::move(values)) {
  if (values_.size() != layout_->size()) throw Error("memory does not match its layout");
}

Memory Memory::from(const std::map<std::string, Value>& bindings) {
  std::vector<std::string> names;
  std::vector<Value> values;
  for (const auto& [k, v] : bindings) {
    names.push_back(k);
    values.push_back(v);
  }
  return Memory(std::make_shared<const Layout>(std::move(names)), std::move(values));
}

const Value* Memory::find(const std::string& name) const {
  if (!layout_) return nullptr;
  const int i = layout_->index(name);
  return i < 0 ? nullptr : &values_[static_cast<std::size_t>(i)];
}

const Value& Memory::get(const std::string& name) const {
  if (auto p = find(name)) return *p;
  throw EvalError("unbound variable '" + name + "'");
}

Memory Memory::set(const std::string& name, Value v) const {
  const int i = layout_ ? layout_->index(name) : -1;
  if (i < 0) throw EvalError("assignment to undeclared variable '" + name + "'");
  return set_at(i, std::move(v));
}

Memory Memory::set_at(int index, Value v) const {
  Memory copy = *this;
  copy.values_[static_cast<std::size_t>(index)] = std::move(v);
  return copy;
}

Memory Memory::extend(const std::map<std::string, Value>& extra) const {
  auto all = bindings();
  for (const auto& [k, v] : extra) all[k] = v;
  return from(all);
}

std::map<std::string, Value> Memory::bindings() const {
  std::map<std::string, Value> out;
  if (!layout_) return out;
  for (std::size_t i = 0; i < values_.size(); ++i) out.emplace(layout_->names()[i], values_[i]);
  return out;
}

std::strong_ordering Memory::operator<=>(const Memory& other) const {
  if (layout_ != other.layout_) {
    const auto& a = layout_ ? layout_->names() : std::vector<std::string>{};
    const auto& b = other.layout_ ? other.layout_->names() : std::vector<std::string>{};
    if (a != b) return a < b ? std::strong_ordering::less : std::strong_ordering::greater;
  }
  return std::lexicographical_compare_three_way(values_.begin(), values_.end(),
                                                other.values_.begin(), other.values_.end());
}

std::string Memory::str() const {
  std::string s = "{";
  bool first = true;
  for (const auto& [k, v] : bindings()) {
    if (!first) s += ", ";
    first = false;
    s += k + "=" + v.str();
  }
  return s + "}";
}

nlohmann::json to_json(const Memory& m) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : m.bindings()) j[k] = to_json(v);
  return j;
}

}  // namespace dpsp
