#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "dpsp/ast.hpp"
#include "dpsp/builtins.hpp"
#include "dpsp/memory.hpp"

namespace dpsp {

/// Variable lookup used by the evaluator.
class Env {
 public:
  virtual ~Env() = default;
  virtual const Value* lookup(const std::string& name) const = 0;
};

class MemoryEnv : public Env {
 public:
  explicit MemoryEnv(const Memory& m) : m_(m) {}
  const Value* lookup(const std::string& name) const override { return m_.find(name); }

 private:
  const Memory& m_;
};

class MapEnv : public Env {
 public:
  explicit MapEnv(const std::map<std::string, Value>& m) : m_(m) {}
  const Value* lookup(const std::string& name) const override {
    auto it = m_.find(name);
    return it == m_.end() ? nullptr : &it->second;
  }

 private:
  const std::map<std::string, Value>& m_;
};

/// One extra binding on top of a parent environment.
class BindEnv : public Env {
 public:
  BindEnv(const Env& parent, std::string name, const Value& v) : parent_(parent), name_(std::move(name)), v_(v) {}
  const Value* lookup(const std::string& name) const override { return name == name_ ? &v_ : parent_.lookup(name); }

 private:
  const Env& parent_;
  std::string name_;
  const Value& v_;
};

/// Stack of bindings searched newest first; used by the falsifier.
class StackEnv : public Env {
 public:
  void push(std::string name, Value v) { items_.emplace_back(std::move(name), std::move(v)); }
  void pop() { items_.pop_back(); }
  std::size_t size() const { return items_.size(); }
  const std::vector<std::pair<std::string, Value>>& items() const { return items_; }
  const Value* lookup(const std::string& name) const override {
    for (auto it = items_.rbegin(); it != items_.rend(); ++it)
      if (it->first == name) return &it->second;
    return nullptr;
  }

 private:
  std::vector<std::pair<std::string, Value>> items_;
};

/// Declarations an expression may refer to (predicates, ranges, domains, builtins).
struct EvalCtx {
  const Unit* unit = nullptr;
  const Registry* reg = &Registry::standard();
  /// Overrides for dom(x) and for free-variable domains, keyed by base or tagged name.
  const std::map<std::string, std::vector<Value>>* domains = nullptr;

  const std::vector<Value>& domain_of(const std::string& name) const;
  std::vector<Value> quant_domain(const QDomain& d, const Env& env) const;
  const std::vector<Value>& exp_range() const;

  mutable std::map<std::string, std::vector<Value>> cache;
};

Value eval(const ExprPtr& e, const Env& env, const EvalCtx& ctx);
bool eval_bool(const ExprPtr& e, const Env& env, const EvalCtx& ctx);

/// max over the declared range of |s[e1][r] - s[e2][r]|.
double max_gap(const Value& score, const Value& e1, const Value& e2, const std::vector<Value>& range);
Value score_at(const Value& score, const Value& input, const Value& r);

}  // namespace dpsp
