#include <filesystem>

#include <gtest/gtest.h>

#include "dpsp/parser.hpp"
#include "dpsp/pretty.hpp"
#include "dpsp/typecheck.hpp"
#include "support.hpp"

using namespace dpsp;
using namespace dpsp::testing;

namespace {

std::string header(const std::string& decls, const std::string& body) {
  return decls + "\npre { true };\ntarget (1, 0);\n" + body;
}

std::vector<std::string> typecheck_messages(const std::string& text) {
  try {
    typecheck(parse_unit(text));
  } catch (const TypeErrors& e) {
    std::vector<std::string> out;
    for (const auto& d : e.diagnostics()) out.push_back(d.message);
    return out;
  }
  return {};
}

bool mentions(const std::vector<std::string>& msgs, const std::string& needle) {
  for (const auto& m : msgs)
    if (m.find(needle) != std::string::npos) return true;
  return false;
}

}  // namespace

TEST(Parse, LaplaceAssignThenReturn) {
  const CmdPtr c = parse_cmd("x := Lap[0.5](e); return x");
  const auto* seq = c->as<Cmd::Seq>();
  ASSERT_NE(seq, nullptr);
  ASSERT_EQ(seq->cmds.size(), 2u);
  const auto* lap = seq->cmds[0]->as<Cmd::Lap>();
  ASSERT_NE(lap, nullptr);
  EXPECT_EQ(lap->var, "x");
  EXPECT_EQ(lap->eps, Rational::of(1, 2));
  EXPECT_NE(seq->cmds[1]->as<Cmd::Return>(), nullptr);
}

TEST(Parse, SmartsumShape) {
  const Unit u = load_corpus("smartsum.pwhile");
  const auto* seq = u.body->as<Cmd::Seq>();
  ASSERT_NE(seq, nullptr);
  const Cmd::While* loop = nullptr;
  for (const auto& c : seq->cmds)
    if (const auto* w = c->as<Cmd::While>()) loop = w;
  ASSERT_NE(loop, nullptr);
  ASSERT_TRUE(loop->annot.has_value());
  int laps = 0, ifs = 0;
  walk(loop->body, [&](const Cmd& c) {
    laps += c.as<Cmd::Lap>() != nullptr;
    ifs += c.as<Cmd::If>() != nullptr;
  });
  EXPECT_EQ(laps, 2);
  EXPECT_EQ(ifs, 1);
  EXPECT_NE(seq->cmds.back()->as<Cmd::Return>(), nullptr);
}

TEST(Parse, MissingLoopAnnotation) {
  try {
    parse_unit(header("decl b : bool in {true, false};", "while b do skip; return b"));
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("missing loop annotation"), std::string::npos);
    EXPECT_TRUE(e.span().valid());
  }
}

TEST(Parse, BareLoopsOnRequest) { EXPECT_NO_THROW(parse_cmd("while b do skip", true)); }

TEST(Parse, AnnotationOnNonLoop) {
  EXPECT_THROW(parse_cmd("@invariant{true} @variant{0} x := 1"), ParseError);
}

TEST(Parse, DuplicateDeclaration) {
  EXPECT_THROW(parse_unit(header("decl x : int in {0..1};\ndecl x : int in {0..1};", "return x")), ParseError);
}

TEST(Parse, ErrorSpanInsideInput) {
  const std::string text = header("decl x : int in {0..1};", "x := (1 +; return x");
  try {
    parse_unit(text);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_TRUE(e.span().valid());
    EXPECT_LE(e.span().line, 4);
  }
}

TEST(Typecheck, GuardNotBool) {
  const auto msgs = typecheck_messages(header("decl x : int in {0..1};", "if (1) then skip else skip; return x"));
  ASSERT_FALSE(msgs.empty());
  EXPECT_TRUE(mentions(msgs, "guard must be bool")) << msgs.front();
}

TEST(Typecheck, LaplaceArgumentNumeric) {
  const auto msgs = typecheck_messages(header("decl x : int in {0..1};", "x := Lap[0.1](true); return x"));
  EXPECT_TRUE(mentions(msgs, "Laplace argument must be numeric"));
}

TEST(Typecheck, SmartsumVariableTypes) {
  const Unit u = load_corpus("smartsum.pwhile");
  EXPECT_NO_THROW(typecheck(u));
  EXPECT_EQ(u.find_var("l")->type, Type::list());
  EXPECT_EQ(u.find_var("out")->type, Type::list());
  for (const char* v : {"c", "n", "next", "x"}) EXPECT_EQ(u.find_var(v)->type, Type::integer()) << v;
}

TEST(Typecheck, UnknownVariableAndBuiltin) {
  const auto msgs = typecheck_messages(header("decl x : int in {0..1};", "x := y; x := frob(x); return x"));
  EXPECT_GE(msgs.size(), 2u);
}

TEST(Typecheck, WholeCorpus) {
  for (const char* f : {"intro.pwhile", "smartsum.pwhile", "mwem.pwhile", "ptr.pwhile", "vertexcover.pwhile",
                        "negative/desync.pwhile", "negative/smartsum_broken.pwhile",
                        "negative/smartsum_undercount.pwhile", "derivations/toy.pwhile"})
    EXPECT_NO_THROW(typecheck(load_corpus(f))) << f;
}

TEST(Pretty, Skip) { EXPECT_EQ(pretty(parse_cmd("skip")), "skip"); }

TEST(Pretty, RoundTripCorpus) {
  for (const auto& entry : std::filesystem::recursive_directory_iterator(DPSP_CORPUS_DIR)) {
    if (entry.path().extension() != ".pwhile") continue;
    const Unit u = load_unit(entry.path().string());
    const Unit again = parse_unit(pretty(u));
    EXPECT_TRUE(same(u, again)) << entry.path();
    EXPECT_EQ(pretty(again), pretty(u)) << entry.path();
  }
}

TEST(Pretty, RoundTripTargetText) {
  const CmdPtr c = parse_cmd("(x_1, x_2) := Lap<>[0.5](a_1, a_2); assert(x_1 == x_2); return (x_1, x_2)");
  EXPECT_TRUE(same(parse_cmd(pretty(c)), c));
}
