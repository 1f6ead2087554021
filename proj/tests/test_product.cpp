#include <filesystem>

#include <gtest/gtest.h>

#include "dpsp/parser.hpp"
#include "dpsp/pipeline.hpp"
#include "dpsp/pretty.hpp"
#include "dpsp/product.hpp"
#include "skeleton.hpp"
#include "support.hpp"

using namespace dpsp;
using namespace dpsp::testing;

namespace {

std::set<std::string> tagged_vars(const CmdPtr& c, int tag) {
  std::set<std::string> out;
  auto note = [&](const std::string& v) {
    if (split_tag(v).second == tag) out.insert(v);
  };
  auto note_expr = [&](const ExprPtr& e) {
    if (e)
      for (const auto& v : free_vars(e)) note(v);
  };
  walk(c, [&](const Cmd& n) {
    if (const auto* a = n.as<Cmd::Assign>()) note(a->var), note_expr(a->e);
    if (const auto* l = n.as<Cmd::LapPair>()) note(l->x1), note(l->x2), note_expr(l->e1), note_expr(l->e2);
    if (const auto* i = n.as<Cmd::If>()) note_expr(i->guard);
    if (const auto* w = n.as<Cmd::While>()) note_expr(w->guard);
    if (const auto* s = n.as<Cmd::Assert>()) note_expr(s->phi);
  });
  return out;
}

}  // namespace

TEST(Rename, TagsFreeVariables) {
  EXPECT_EQ(pretty(rename(parse_expr("x + 1"), 1)), "x_1 + 1");
  EXPECT_EQ(pretty(rename(parse_expr("hd(l)"), 2)), "hd(l_2)");
  EXPECT_EQ(pretty(rename(parse_expr("forall i in 0..n : l[i] == 0"), 1)), "(forall i in 0..n_1 : l_1[i] == 0)");
}

TEST(Rename, Separable) {
  const ExprPtr e = parse_expr("x + y * hd(l) - min(z, x)");
  for (const auto& v : free_vars(rename(e, 1))) EXPECT_EQ(free_vars(rename(e, 2)).count(v), 0u) << v;
}

TEST(SelfProduct, LaplaceBecomesPairedCall) {
  const CmdPtr p = self_product(parse_cmd("x := Lap[0.5](a + 1)"));
  const auto* l = p->as<Cmd::LapPair>();
  ASSERT_NE(l, nullptr);
  EXPECT_EQ(l->x1, "x_1");
  EXPECT_EQ(l->x2, "x_2");
  EXPECT_EQ(pretty(l->e1), "a_1 + 1");
  EXPECT_EQ(pretty(l->e2), "a_2 + 1");
  EXPECT_EQ(l->eps, Rational::of(1, 2));
}

TEST(SelfProduct, IntroProduct) {
  const Unit p = product_unit(load_corpus("intro.pwhile"));
  EXPECT_EQ(skeleton(p.body), expected_intro_skeleton());
  EXPECT_EQ(pretty(p.body), "t_1 := a_1 * 2;\nt_2 := a_2 * 2;\n(x_1, x_2) := Lap<>[0.25](t_1, t_2);\nreturn (x_1, x_2)");
}

TEST(SelfProduct, SmartsumOutline) {
  EXPECT_EQ(skeleton(product_unit(load_corpus("smartsum.pwhile")).body), expected_smartsum_skeleton());
}

TEST(SelfProduct, MwemOutline) {
  EXPECT_EQ(skeleton(product_unit(load_corpus("mwem.pwhile")).body), expected_mwem_skeleton());
}

TEST(SelfProduct, BranchSyncAsserts) {
  const CmdPtr p = self_product(parse_cmd("if a > 1 then { x := 1 } else { x := 2 }"));
  const auto* s = p->as<Cmd::Seq>();
  ASSERT_NE(s, nullptr);
  ASSERT_EQ(s->cmds.size(), 2u);
  ASSERT_NE(s->cmds[0]->as<Cmd::Assert>(), nullptr);
  EXPECT_EQ(pretty(s->cmds[0]->as<Cmd::Assert>()->phi), "a_1 > 1 <=> a_2 > 1");
}

TEST(SelfProduct, GoldenFiles) {
  std::size_t checked = 0;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(DPSP_CORPUS_DIR)) {
    if (entry.path().extension() != ".pwhile" || entry.path().parent_path().filename() == "derivations") continue;
    const auto golden = std::filesystem::path(DPSP_CORPUS_DIR) / "golden" / (entry.path().stem().string() + ".product");
    ASSERT_TRUE(std::filesystem::exists(golden)) << golden;
    const Unit u = load_unit(entry.path().string());
    EXPECT_EQ(pretty(product_unit(u).body) + "\n", read_file(golden.string())) << entry.path();
    ++checked;
  }
  EXPECT_GE(checked, 6u);
}

TEST(SelfProduct, SeparabilityHomomorphismDeterminism) {
  for (const char* f : {"intro.pwhile", "smartsum.pwhile", "mwem.pwhile", "ptr.pwhile", "vertexcover.pwhile"}) {
    const Unit u = load_corpus(f);
    const CmdPtr p = self_product(u.body);
    for (const auto& v : tagged_vars(p, 1)) EXPECT_EQ(tagged_vars(p, 2).count(v), 0u) << f << " " << v;
    walk(p, [&](const Cmd& n) { EXPECT_FALSE(n.is_source_only()) << f; });
    const auto* s = u.body->as<Cmd::Seq>();
    ASSERT_NE(s, nullptr);
    const CmdPtr head = make_seq(std::vector<CmdPtr>(s->cmds.begin(), s->cmds.begin() + 2));
    const CmdPtr tail = make_seq(std::vector<CmdPtr>(s->cmds.begin() + 2, s->cmds.end()));
    EXPECT_TRUE(same(self_product(make_seq({head, tail})), make_seq({self_product(head), self_product(tail)}))) << f;
  }
}

TEST(SelfProduct, TargetRoundTrip) {
  for (const char* f : {"smartsum.pwhile", "mwem.pwhile", "ptr.pwhile"}) {
    const Unit p = product_unit(load_corpus(f));
    EXPECT_TRUE(same(parse_unit(pretty(p)), p)) << f;
  }
}

TEST(Taint, SmartsumAccepted) {
  const Unit u = load_corpus("smartsum.pwhile");
  EXPECT_TRUE(taint_check(u.body).empty());
}

TEST(Taint, NoisyLoopGuardRejected) {
  const CmdPtr c = parse_cmd("x := Lap[1](0); @invariant{true} @variant{x_1} while x > 0 do { x := x - 1 }", false);
  EXPECT_THROW(taint_check(c), TaintError);
}

TEST(Taint, NoisyLoopGuardThroughCopy) {
  const CmdPtr c =
      parse_cmd("x := Lap[1](0); y := x + 1; @invariant{true} @variant{y_1} while y > 0 do { y := y - 1 }");
  EXPECT_THROW(taint_check(c), TaintError);
}

TEST(Taint, OverwrittenNoiseIsClean) {
  const CmdPtr c = parse_cmd("x := Lap[1](0); x := 3; @invariant{true} @variant{x_1} while x > 0 do { x := x - 1 }");
  EXPECT_NO_THROW(taint_check(c));
}

TEST(Taint, ImplicitFlowThroughNoisyBranch) {
  const CmdPtr c = parse_cmd(
      "x := Lap[1](0); if x > 0 then { k := 1 } else { k := 2 }; @invariant{true} @variant{k_1} while k > 0 do { k := k - 1 }");
  EXPECT_THROW(taint_check(c), TaintError);
}

TEST(Taint, PtrNoisyBranchWarns) {
  const Unit u = load_corpus("ptr.pwhile");
  const auto warnings = taint_check(u.body);
  ASSERT_EQ(warnings.size(), 1u);
  EXPECT_TRUE(warnings[0].span.valid());
}
