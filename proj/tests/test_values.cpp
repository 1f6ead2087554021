#include <cmath>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "dpsp/builtins.hpp"
#include "dpsp/dist.hpp"
#include "dpsp/eval.hpp"
#include "dpsp/parser.hpp"

using namespace dpsp;

namespace {

Memory mem(int x) { return Memory::from({{"x", Value(x)}}); }

}  // namespace

TEST(Dist, Dirac) {
  const MemDist d = MemDist::dirac(mem(1));
  EXPECT_EQ(d.mass(mem(1)), 1.0);
  EXPECT_EQ(d.mass(mem(2)), 0.0);
  EXPECT_EQ(d.size(), 1u);
}

TEST(Dist, LeftIdentity) {
  auto f = [](const Memory& m) {
    MemDist d;
    d.add(m, 0.5);
    d.add(m.set("x", Value(7)), 0.5);
    return d;
  };
  EXPECT_TRUE(MemDist::dirac(mem(1)).bind(f).approx_equal(f(mem(1)), 0));
}

TEST(Dist, RightIdentityAndConstantKernel) {
  MemDist mu;
  mu.add(mem(1), 0.5);
  mu.add(mem(2), 0.5);
  EXPECT_TRUE(mu.bind([](const Memory& m) { return MemDist::dirac(m); }).approx_equal(mu, 0));
  ValueDist nu;
  nu.add(Value(3), 0.25);
  nu.add(Value(4), 0.75);
  EXPECT_TRUE(mu.bind([&](const Memory&) { return nu; }).approx_equal(nu, 1e-15));
}

TEST(Dist, BindWorkedExample) {
  MemDist mu;
  mu.add(mem(1), 0.5);
  mu.add(mem(2), 0.5);
  const Value a(10), b(11);
  const ValueDist out = mu.bind([&](const Memory& m) {
    ValueDist d;
    if (m.get("x").as_int() == 1) {
      d.add(a, 1.0);
    } else {
      d.add(a, 0.5);
      d.add(b, 0.5);
    }
    return d;
  });
  EXPECT_DOUBLE_EQ(out.mass(a), 0.75);
  EXPECT_DOUBLE_EQ(out.mass(b), 0.25);
}

TEST(Dist, Normalize) {
  const ValueDist even = ValueDist::normalize({{Value(0), 2.0}, {Value(1), 2.0}});
  EXPECT_DOUBLE_EQ(even.mass(Value(0)), 0.5);
  EXPECT_DOUBLE_EQ(even.mass(Value(1)), 0.5);
  const ValueDist skew = ValueDist::normalize({{Value(0), 1.0}, {Value(1), 3.0}});
  EXPECT_DOUBLE_EQ(skew.mass(Value(0)), 0.25);
  EXPECT_DOUBLE_EQ(skew.mass(Value(1)), 0.75);
  EXPECT_THROW(ValueDist::normalize({{Value(0), 0.0}, {Value(1), 0.0}}), Error);
}

TEST(Dist, PrunesZeroMass) {
  ValueDist d;
  d.add(Value(1), 0.0);
  d.add(Value(2), -1.0);
  EXPECT_TRUE(d.empty());
}

TEST(Dist, FromPairsMergesRepeats) {
  const ValueDist d = ValueDist::from_pairs({{Value(2), 0.25}, {Value(1), 0.5}, {Value(2), 0.25}});
  EXPECT_EQ(d.size(), 2u);
  EXPECT_DOUBLE_EQ(d.mass(Value(2)), 0.5);
  EXPECT_DOUBLE_EQ(d.total(), 1.0);
}

TEST(Dist, JsonIsCanonicallyOrdered) {
  MemDist d;
  d.add(mem(3), 0.5);
  d.add(mem(1), 0.5);
  const auto j = to_json(d);
  ASSERT_EQ(j.size(), 2u);
  EXPECT_EQ(j[0]["memory"]["x"], 1);
  EXPECT_EQ(j[1]["memory"]["x"], 3);
}

TEST(Value, OrderingAndLooseEquality) {
  EXPECT_LT(Value(1), Value(2));
  EXPECT_EQ(Value(IntList{1, 2}), Value(IntList{1, 2}));
  EXPECT_TRUE(loosely_equal(Value(0.1 + 0.2), Value(0.3)));
  EXPECT_FALSE(loosely_equal(Value(0.3), Value(0.31)));
}

TEST(Value, CheckedArithmeticOverflows) {
  EXPECT_THROW(checked_mul(INT64_MAX, 2), EvalError);
  EXPECT_EQ(checked_add(2, 3), 5);
}

TEST(Value, ParseAndPrint) {
  const Value v = parse_value("{0: [1, 2], 1: []}");
  EXPECT_TRUE(v.is_map());
  EXPECT_EQ(parse_value(v.str()), v);
  EXPECT_EQ(value_from_json(to_json(v)), v);
}

TEST(Builtins, RegisterCustom) {
  Registry r;
  r.add({"first", {Type::list()}, Type::integer(), [](const std::vector<Value>& a) {
           return Value(a[0].as_list().at(0));
         }});
  EXPECT_EQ((*r.find("first"))({Value(IntList{3, 1})}), Value(3));
  EXPECT_THROW(r.add({"first", {Type::list()}, Type::integer(), nullptr}), Error);
}

TEST(Builtins, HeadOfList) {
  const EvalCtx ctx;
  std::map<std::string, Value> env{{"l", Value(IntList{3, 1})}};
  EXPECT_EQ(eval(parse_expr("hd(l)"), MapEnv(env), ctx), Value(3));
}

TEST(Builtins, UpdateIsDeterministic) {
  const Builtin* upd = Registry::standard().find("update");
  ASSERT_NE(upd, nullptr);
  const Value d = parse_value("{0: 0.5, 1: 0.5, 2: 0.5, 3: 0.5}");
  const Value a = (*upd)({d, Value(2), Value(1)});
  const Value b = (*upd)({d, Value(2), Value(1)});
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.as_map().size(), 4u);
}

TEST(Builtins, AccuracyRadius) {
  const double t = accuracy_radius(1.0, 0.1);
  EXPECT_NEAR(2 * std::exp(-t / 2), 0.1, 1e-12);
}

TEST(Builtins, DistanceToInstability) {
  auto median = [](const Value& h) { return Value(hist_median(h.as_list())); };
  auto neighbours = [](const Value& h) {
    std::vector<Value> out;
    for (auto& n : hist_neighbors(h.as_list())) out.emplace_back(std::move(n));
    return out;
  };
  // Every single-record change keeps the median of a tall middle bin.
  EXPECT_GE(dist_to_instability(median, neighbours, Value(IntList{0, 4, 0}), 3), 1);
  // A balanced histogram flips its median with one record.
  EXPECT_EQ(dist_to_instability(median, neighbours, Value(IntList{1, 1, 0}), 3), 0);
}
