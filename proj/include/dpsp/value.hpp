#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace dpsp {

/// Source position, 1-based. A default span (line 0) means "synthesized".
struct Span {
  int line = 0;
  int col = 0;
  int end_line = 0;
  int end_col = 0;

  bool valid() const { return line > 0; }
  std::string str() const;
  friend bool operator==(const Span&, const Span&) = default;
};

/// Base error type. Every error raised on behalf of user input carries a span.
class Error : public std::runtime_error {
 public:
  Error(const std::string& what, Span span = {});
  const Span& span() const { return span_; }
  const std::string& message() const { return message_; }

 private:
  std::string message_;
  Span span_;
};

/// Dynamic failure while evaluating an expression (bad type, missing key, overflow).
class EvalError : public Error {
 public:
  using Error::Error;
};

enum class Kind { Int, Real, Bool, List, Map };

/// Semantic type. Map carries {key, value} argument types.
struct Type {
  Kind kind = Kind::Int;
  std::vector<Type> args;

  static Type integer() { return {Kind::Int, {}}; }
  static Type real() { return {Kind::Real, {}}; }
  static Type boolean() { return {Kind::Bool, {}}; }
  static Type list() { return {Kind::List, {}}; }
  static Type map(Type key, Type value) { return {Kind::Map, {std::move(key), std::move(value)}}; }

  bool numeric() const { return kind == Kind::Int || kind == Kind::Real; }
  const Type& key() const { return args.at(0); }
  const Type& value() const { return args.at(1); }
  std::string str() const;
  friend bool operator==(const Type&, const Type&) = default;
};

class Value;
using IntList = std::vector<std::int64_t>;
using MapEntries = std::map<Value, Value>;

/// Immutable value of the program universe. Lists and maps share storage.
class Value {
 public:
  Value() : data_(std::int64_t{0}) {}
  Value(std::int64_t i) : data_(i) {}
  Value(int i) : data_(static_cast<std::int64_t>(i)) {}
  Value(double r) : data_(r) {}
  Value(bool b) : data_(b) {}
  Value(IntList l);
  Value(MapEntries m);

  static Value empty_list() { return Value(IntList{}); }

  Kind kind() const;
  bool is_int() const { return std::holds_alternative<std::int64_t>(data_); }
  bool is_real() const { return std::holds_alternative<double>(data_); }
  bool is_bool() const { return std::holds_alternative<bool>(data_); }
  bool is_list() const { return std::holds_alternative<ListPtr>(data_); }
  bool is_map() const { return std::holds_alternative<MapPtr>(data_); }
  bool is_numeric() const { return is_int() || is_real(); }

  std::int64_t as_int() const;
  double as_real() const;  // ints promote
  bool as_bool() const;
  const IntList& as_list() const;
  const MapEntries& as_map() const;

  /// Canonical total order: by kind, then content. Reals compare exactly here.
  std::strong_ordering operator<=>(const Value& other) const;
  bool operator==(const Value& other) const { return (*this <=> other) == 0; }

  std::string str() const;

 private:
  using ListPtr = std::shared_ptr<const IntList>;
  using MapPtr = std::shared_ptr<const MapEntries>;
  std::variant<std::int64_t, double, bool, ListPtr, MapPtr> data_;
};

/// Tolerance used when comparing reals inside program and assertion expressions.
inline constexpr double kRealTolerance = 1e-9;

/// Numeric-aware comparison used by ==, <, <= in expressions: reals within
/// kRealTolerance (relative, floor 1) are equal; compound values compare structurally.
bool loosely_equal(const Value& a, const Value& b);
/// -1, 0, +1 for numeric a, b with the same tolerance as loosely_equal.
int numeric_compare(const Value& a, const Value& b);

/// Checked int64 arithmetic; overflow raises EvalError.
std::int64_t checked_add(std::int64_t a, std::int64_t b);
std::int64_t checked_sub(std::int64_t a, std::int64_t b);
std::int64_t checked_mul(std::int64_t a, std::int64_t b);

/// Shortest round-tripping decimal text for a double, always containing '.' or 'e'.
std::string format_real(double r);

/// Exact non-negative rational used for mechanism parameters and privacy targets.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  static Rational of(std::int64_t n, std::int64_t d = 1);
  /// Parses "3", "0.25", "1/3".
  static Rational parse(const std::string& text);
  double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }
  bool positive() const { return num > 0; }
  std::string str() const;
  friend bool operator==(const Rational&, const Rational&) = default;
};

nlohmann::json to_json(const Value& v);
Value value_from_json(const nlohmann::json& j);

}  // namespace dpsp
