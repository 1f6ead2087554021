#include "dpsp/value.hpp"

#include <charconv>
#include <cmath>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

namespace dpsp {

std::string Span::str() const {
  if (!valid()) return "<synthesized>";
  std::ostringstream os;
  os << line << ":" << col;
  if (end_line > 0) os << "-" << end_line << ":" << end_col;
  return os.str();
}

Error::Error(const std::string& what, Span span)
    : std::runtime_error(span.valid() ? span.str() + ": " + what : what),
      message_(what),
      span_(span) {}

std::string Type::str() const {
  switch (kind) {
    case Kind::Int: return "int";
    case Kind::Real: return "real";
    case Kind::Bool: return "bool";
    case Kind::List: return "list";
    case Kind::Map: return "map<" + key().str() + ", " + value().str() + ">";
  }
  return "?";
}

Value::Value(IntList l) : data_(std::make_shared<const IntList>(std::move(l))) {}
Value::Value(MapEntries m) : data_(std::make_shared<const MapEntries>(std::move(m))) {}

Kind Value::kind() const {
  switch (data_.index()) {
    case 0: return Kind::Int;
    case 1: return Kind::Real;
    case 2: return Kind::Bool;
    case 3: return Kind::List;
    default: return Kind::Map;
  }
}

std::int64_t Value::as_int() const {
  if (auto p = std::get_if<std::int64_t>(&data_)) return *p;
  throw EvalError("expected int, got " + str());
}

double Value::as_real() const {
  if (auto p = std::get_if<double>(&data_)) return *p;
  if (auto p = std::get_if<std::int64_t>(&data_)) return static_cast<double>(*p);
  throw EvalError("expected number, got " + str());
}

bool Value::as_bool() const {
  if (auto p = std::get_if<bool>(&data_)) return *p;
  throw EvalError("expected bool, got " + str());
}

const IntList& Value::as_list() const {
  if (auto p = std::get_if<ListPtr>(&data_)) return **p;
  throw EvalError("expected list, got " + str());
}

const MapEntries& Value::as_map() const {
  if (auto p = std::get_if<MapPtr>(&data_)) return **p;
  throw EvalError("expected map, got " + str());
}

namespace {

std::strong_ordering compare_doubles(double a, double b) {
  // Total order; NaN never appears in well-formed programs but must not break maps.
  if (a < b) return std::strong_ordering::less;
  if (a > b) return std::strong_ordering::greater;
  if (a == b) return std::strong_ordering::equal;
  const bool an = std::isnan(a), bn = std::isnan(b);
  if (an && bn) return std::strong_ordering::equal;
  return an ? std::strong_ordering::greater : std::strong_ordering::less;
}

}  // namespace

std::strong_ordering Value::operator<=>(const Value& other) const {
  if (data_.index() != other.data_.index()) return data_.index() <=> other.data_.index();
  switch (data_.index()) {
    case 0: return std::get<0>(data_) <=> std::get<0>(other.data_);
    case 1: return compare_doubles(std::get<1>(data_), std::get<1>(other.data_));
    case 2: return std::get<2>(data_) <=> std::get<2>(other.data_);
    case 3: {
      const auto& a = std::get<3>(data_);
      const auto& b = std::get<3>(other.data_);
      if (a == b) return std::strong_ordering::equal;
      return std::lexicographical_compare_three_way(a->begin(), a->end(), b->begin(), b->end());
    }
    default: {
      const auto& a = std::get<4>(data_);
      const auto& b = std::get<4>(other.data_);
      if (a == b) return std::strong_ordering::equal;
      auto ia = a->begin();
      auto ib = b->begin();
      for (; ia != a->end() && ib != b->end(); ++ia, ++ib) {
        if (auto c = ia->first <=> ib->first; c != 0) return c;
        if (auto c = ia->second <=> ib->second; c != 0) return c;
      }
      if (ia == a->end() && ib == b->end()) return std::strong_ordering::equal;
      return ia == a->end() ? std::strong_ordering::less : std::strong_ordering::greater;
    }
  }
}

std::string format_real(double r) {
  if (std::isinf(r)) return r > 0 ? "1e999" : "-1e999";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, r);
  std::string s(buf, end);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

std::string Value::str() const {
  switch (data_.index()) {
    case 0: return std::to_string(std::get<0>(data_));
    case 1: return format_real(std::get<1>(data_));
    case 2: return std::get<2>(data_) ? "true" : "false";
    case 3: {
      std::string s = "[";
      bool first = true;
      for (auto x : *std::get<3>(data_)) {
        if (!first) s += ", ";
        first = false;
        s += std::to_string(x);
      }
      return s + "]";
    }
    default: {
      std::string s = "{";
      bool first = true;
      for (const auto& [k, v] : *std::get<4>(data_)) {
        if (!first) s += ", ";
        first = false;
        s += k.str() + ": " + v.str();
      }
      return s + "}";
    }
  }
}

int numeric_compare(const Value& a, const Value& b) {
  if (a.is_int() && b.is_int()) {
    auto x = a.as_int(), y = b.as_int();
    return x < y ? -1 : (x > y ? 1 : 0);
  }
  const double x = a.as_real(), y = b.as_real();
  const double scale = std::max({1.0, std::fabs(x), std::fabs(y)});
  if (std::fabs(x - y) <= kRealTolerance * scale) return 0;
  return x < y ? -1 : 1;
}

bool loosely_equal(const Value& a, const Value& b) {
  if (a.is_numeric() && b.is_numeric()) return numeric_compare(a, b) == 0;
  if (a.kind() != b.kind()) return false;
  if (a.is_map()) {
    const auto& x = a.as_map();
    const auto& y = b.as_map();
    if (x.size() != y.size()) return false;
    for (auto ix = x.begin(), iy = y.begin(); ix != x.end(); ++ix, ++iy) {
      if (!(ix->first == iy->first) || !loosely_equal(ix->second, iy->second)) return false;
    }
    return true;
  }
  return a == b;
}

std::int64_t checked_add(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_add_overflow(a, b, &r)) throw EvalError("integer overflow in addition");
  return r;
}

std::int64_t checked_sub(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_sub_overflow(a, b, &r)) throw EvalError("integer overflow in subtraction");
  return r;
}

std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_mul_overflow(a, b, &r)) throw EvalError("integer overflow in multiplication");
  return r;
}

Rational Rational::of(std::int64_t n, std::int64_t d) {
  if (d == 0) throw Error("rational with zero denominator");
  if (d < 0) {
    n = -n;
    d = -d;
  }
  const auto g = std::gcd(n < 0 ? -n : n, d);
  return {n / (g == 0 ? 1 : g), d / (g == 0 ? 1 : g)};
}

Rational Rational::parse(const std::string& text) {
  if (auto slash = text.find('/'); slash != std::string::npos) {
    const auto a = parse(text.substr(0, slash));
    const auto b = parse(text.substr(slash + 1));
    if (b.num == 0) throw Error("rational with zero denominator");
    return of(checked_mul(a.num, b.den), checked_mul(a.den, b.num));
  }
  std::int64_t num = 0, den = 1;
  bool seen_dot = false, any = false;
  for (char ch : text) {
    if (ch == '.') {
      if (seen_dot) throw Error("malformed number '" + text + "'");
      seen_dot = true;
      continue;
    }
    if (ch < '0' || ch > '9') throw Error("malformed number '" + text + "'");
    any = true;
    num = checked_add(checked_mul(num, 10), ch - '0');
    if (seen_dot) den = checked_mul(den, 10);
  }
  if (!any) throw Error("malformed number '" + text + "'");
  return of(num, den);
}

std::string Rational::str() const {
  // Terminating decimals print as decimals, anything else as num/den.
  std::int64_t d = den;
  int twos = 0, fives = 0;
  while (d % 2 == 0) d /= 2, ++twos;
  while (d % 5 == 0) d /= 5, ++fives;
  if (d != 1) return std::to_string(num) + "/" + std::to_string(den);
  if (den == 1) return std::to_string(num);
  const int digits = std::max(twos, fives);
  std::int64_t scale = 1;
  for (int i = 0; i < digits; ++i) scale *= 10;
  const std::int64_t scaled = num * (scale / den);
  std::string frac = std::to_string(scaled % scale);
  frac.insert(0, static_cast<std::size_t>(digits) - frac.size(), '0');
  return std::to_string(scaled / scale) + "." + frac;
}

nlohmann::json to_json(const Value& v) {
  switch (v.kind()) {
    case Kind::Int: return v.as_int();
    case Kind::Real: return v.as_real();
    case Kind::Bool: return v.as_bool();
    case Kind::List: return v.as_list();
    case Kind::Map: {
      auto arr = nlohmann::json::array();
      for (const auto& [k, x] : v.as_map()) arr.push_back({to_json(k), to_json(x)});
      return nlohmann::json{{"map", arr}};
    }
  }
  return nullptr;
}

Value value_from_json(const nlohmann::json& j) {
  if (j.is_boolean()) return Value(j.get<bool>());
  if (j.is_number_integer()) return Value(j.get<std::int64_t>());
  if (j.is_number()) return Value(j.get<double>());
  if (j.is_array()) return Value(j.get<IntList>());
  if (j.is_object() && j.contains("map")) {
    MapEntries m;
    for (const auto& kv : j.at("map")) m.emplace(value_from_json(kv.at(0)), value_from_json(kv.at(1)));
    return Value(std::move(m));
  }
  throw Error("cannot decode value from JSON: " + j.dump());
}

}  // namespace dpsp
