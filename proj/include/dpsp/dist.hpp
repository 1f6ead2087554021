#pragma once

#include <cmath>
#include <algorithm>
#include <map>
#include <vector>
#include <utility>

#include <nlohmann/json.hpp>

#include "dpsp/memory.hpp"
#include "dpsp/value.hpp"

namespace dpsp {

/// Finite sub-distribution with strictly positive masses, keyed in canonical order.
template <class T>
class Dist {
 public:
  using Points = std::map<T, double>;

  Dist() = default;

  static Dist dirac(T point) {
    Dist d;
    d.add(std::move(point), 1.0);
    return d;
  }

  /// Proportional rescaling of nonnegative weights to total mass 1.
  static Dist normalize(const Points& weights) {
    double z = 0;
    for (const auto& [_, w] : weights) {
      if (w < 0 || std::isnan(w)) throw Error("negative weight in normalization");
      z += w;
    }
    if (!(z > 0)) throw Error("degenerate normalization");
    Dist d;
    for (const auto& [k, w] : weights) d.add(k, w / z);
    return d;
  }

  /// Builds from weighted points with repeats; one sort instead of per-point map lookups.
  static Dist from_pairs(std::vector<std::pair<T, double>> pts) {
    std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    Dist d;
    for (std::size_t i = 0; i < pts.size();) {
      double m = 0;
      std::size_t j = i;
      for (; j < pts.size() && pts[j].first == pts[i].first; ++j) m += pts[j].second;
      if (m > 0) {
        d.points_.emplace_hint(d.points_.end(), std::move(pts[i].first), m);
        d.total_ += m;
      }
      i = j;
    }
    return d;
  }

  void add(T point, double mass) {
    if (!(mass > 0)) return;
    points_[std::move(point)] += mass;
    total_ += mass;
  }

  double mass(const T& point) const {
    auto it = points_.find(point);
    return it == points_.end() ? 0.0 : it->second;
  }

  double total() const { return total_; }
  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  const Points& points() const { return points_; }
  auto begin() const { return points_.begin(); }
  auto end() const { return points_.end(); }

  /// Monadic bind: sum over a of mu(a) * f(a).
  template <class F>
  auto bind(F&& f) const -> decltype(f(std::declval<const T&>())) {
    decltype(f(std::declval<const T&>())) out;
    for (const auto& [a, p] : points_) {
      for (const auto& [b, q] : f(a)) out.add(b, p * q);
    }
    return out;
  }

  template <class F>
  auto map(F&& f) const {
    Dist<std::decay_t<decltype(f(std::declval<const T&>()))>> out;
    for (const auto& [a, p] : points_) out.add(f(a), p);
    return out;
  }

  /// Pointwise order of sub-distributions.
  bool leq(const Dist& other, double tol = 0) const {
    for (const auto& [a, p] : points_) {
      if (p > other.mass(a) + tol) return false;
    }
    return true;
  }

  bool approx_equal(const Dist& other, double tol) const {
    return leq(other, tol) && other.leq(*this, tol);
  }

 private:
  Points points_;
  double total_ = 0;
};

using MemDist = Dist<Memory>;
using ValueDist = Dist<Value>;

inline nlohmann::json to_json(const MemDist& d) {
  auto arr = nlohmann::json::array();
  for (const auto& [m, p] : d) arr.push_back({{"memory", to_json(m)}, {"mass", p}});
  return arr;
}

inline nlohmann::json to_json(const ValueDist& d) {
  auto arr = nlohmann::json::array();
  for (const auto& [v, p] : d) arr.push_back({{"value", to_json(v)}, {"mass", p}});
  return arr;
}

}  // namespace dpsp
