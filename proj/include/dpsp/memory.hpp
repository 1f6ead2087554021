#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "dpsp/value.hpp"

namespace dpsp {

/// Sorted variable names shared by every memory of one program run.
class Layout {
 public:
  explicit Layout(std::vector<std::string> names);
  const std::vector<std::string>& names() const { return names_; }
  int index(const std::string& name) const;  // -1 when absent
  std::size_t size() const { return names_.size(); }

 private:
  std::vector<std::string> names_;
  std::map<std::string, int> index_;
};

using LayoutPtr = std::shared_ptr<const Layout>;

/// Immutable variable-to-value map. set() returns a modified copy.
class Memory {
 public:
  Memory() = default;
  Memory(LayoutPtr layout, std::vector<Value> values);
  static Memory from(const std::map<std::string, Value>& bindings);

  const LayoutPtr& layout() const { return layout_; }
  const std::vector<Value>& values() const { return values_; }
  bool has(const std::string& name) const { return layout_ && layout_->index(name) >= 0; }
  const Value& get(const std::string& name) const;
  const Value* find(const std::string& name) const;
  Memory set(const std::string& name, Value v) const;
  Memory set_at(int index, Value v) const;
  /// Same layout extended with extra names (values default to 0).
  Memory extend(const std::map<std::string, Value>& extra) const;
  std::map<std::string, Value> bindings() const;

  std::strong_ordering operator<=>(const Memory& other) const;
  bool operator==(const Memory& other) const { return (*this <=> other) == 0; }
  std::string str() const;

 private:
  LayoutPtr layout_;
  std::vector<Value> values_;
};

nlohmann::json to_json(const Memory& m);

}  // namespace dpsp
