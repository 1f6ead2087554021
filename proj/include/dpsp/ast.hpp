#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "dpsp/value.hpp"

namespace dpsp {

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

enum class UnOp { Neg, Not, Abs, Hd, Tl, Length };
enum class BinOp { Add, Sub, Mul, Div, IDiv, Mod, Min, Max, Cons, Eq, Ne, Lt, Le, Gt, Ge, And, Or, Implies, Iff };
enum class Quant { Forall, Exists };

const char* op_name(UnOp op);
const char* op_name(BinOp op);
bool is_comparison(BinOp op);
bool is_connective(BinOp op);

/// Domain of a bounded quantifier: lo..hi, a declared range, or dom(x).
struct QDomain {
  enum class Kind { Interval, Range, DomOf } kind = Kind::Interval;
  ExprPtr lo, hi;
  std::string name;
};

/// Expressions and assertions share one tree.
struct Expr {
  struct Var { std::string name; };
  struct Lit { Value value; };
  struct Unary { UnOp op; ExprPtr a; };
  struct Binary { BinOp op; ExprPtr a, b; };
  struct Call { std::string name; std::vector<ExprPtr> args; };
  struct Index { ExprPtr base, key; };
  struct Score { ExprPtr score, input, r; };
  struct Quantified { Quant q; std::string var; QDomain dom; ExprPtr body; };
  struct MaxGap { ExprPtr score, e1, e2; };
  /// Provenance marker used to blame the failing conjunct of an obligation.
  struct Labeled { std::string label; ExprPtr body; };

  using Node = std::variant<Var, Lit, Unary, Binary, Call, Index, Score, Quantified, MaxGap, Labeled>;
  Node node;
  Span span;

  template <class T> const T* as() const { return std::get_if<T>(&node); }
};

namespace ex {
ExprPtr var(std::string name, Span s = {});
ExprPtr lit(Value v, Span s = {});
ExprPtr truth(bool b = true);
ExprPtr un(UnOp op, ExprPtr a, Span s = {});
ExprPtr bin(BinOp op, ExprPtr a, ExprPtr b, Span s = {});
ExprPtr call(std::string name, std::vector<ExprPtr> args, Span s = {});
ExprPtr index(ExprPtr base, ExprPtr key, Span s = {});
ExprPtr score(ExprPtr s, ExprPtr input, ExprPtr r, Span sp = {});
ExprPtr quant(Quant q, std::string var, QDomain dom, ExprPtr body, Span s = {});
ExprPtr maxgap(ExprPtr s, ExprPtr e1, ExprPtr e2, Span sp = {});
ExprPtr label(std::string l, ExprPtr body, Span s = {});
/// Smart constructors that drop trivial `true` operands.
ExprPtr conj(ExprPtr a, ExprPtr b);
ExprPtr conj(const std::vector<ExprPtr>& parts);
ExprPtr implies(ExprPtr a, ExprPtr b);
ExprPtr eq(ExprPtr a, ExprPtr b);
ExprPtr add(ExprPtr a, ExprPtr b);
ExprPtr mul(ExprPtr a, ExprPtr b);
}  // namespace ex

bool is_true_lit(const ExprPtr& e);
/// Structural equality ignoring spans.
bool same(const ExprPtr& a, const ExprPtr& b);
std::set<std::string> free_vars(const ExprPtr& e);
/// Builtin and predicate names applied anywhere in e.
std::set<std::string> called_names(const ExprPtr& e);

struct LapSpec {
  bool accuracy = false;
  Rational delta;
  friend bool operator==(const LapSpec&, const LapSpec&) = default;
};

struct LoopAnnot {
  ExprPtr invariant;
  ExprPtr variant;
  Span span;
};

struct Cmd;
using CmdPtr = std::shared_ptr<const Cmd>;

/// Source and target commands share one tree; validation keeps the two languages apart.
struct Cmd {
  struct Skip {};
  struct Seq { std::vector<CmdPtr> cmds; };
  struct Assign { std::string var; ExprPtr e; };
  struct Lap { std::string var; Rational eps; ExprPtr e; LapSpec spec; };
  struct Exp { std::string var; Rational eps; ExprPtr score, input; };
  struct Mech { std::string var; std::string name; Rational eps; std::vector<ExprPtr> args; };
  struct If { ExprPtr guard; CmdPtr then_c, else_c; };
  struct While { ExprPtr guard; CmdPtr body; std::optional<LoopAnnot> annot; };
  struct Return { ExprPtr e; };
  struct Assert { ExprPtr phi; };
  struct LapPair { std::string x1, x2; Rational eps; ExprPtr e1, e2; LapSpec spec; };
  struct ExpPair { std::string x1, x2; Rational eps; ExprPtr s1, e1, s2, e2; };
  struct MechPair { std::string x1, x2; std::string name; Rational eps; std::vector<ExprPtr> args1, args2; };
  struct ReturnPair { ExprPtr e1, e2; };

  using Node = std::variant<Skip, Seq, Assign, Lap, Exp, Mech, If, While, Return, Assert, LapPair, ExpPair,
                            MechPair, ReturnPair>;
  Node node;
  Span span;

  template <class T> const T* as() const { return std::get_if<T>(&node); }
  bool is_target_only() const;
  bool is_source_only() const;
};

CmdPtr make_cmd(Cmd::Node node, Span span = {});
/// Flattening sequence constructor; drops nested Seq nodes.
CmdPtr make_seq(std::vector<CmdPtr> cmds, Span span = {});
bool same(const CmdPtr& a, const CmdPtr& b);
/// Visits every command node in pre-order.
void walk(const CmdPtr& c, const std::function<void(const Cmd&)>& f);
/// Variables assigned anywhere in c.
std::set<std::string> assigned_vars(const CmdPtr& c);

struct DomainSpec {
  enum class Kind { None, Interval, Set, Lists, Histograms, Graphs } kind = Kind::None;
  std::int64_t lo = 0, hi = 0;          // Interval bounds, Lists entries, Histograms totals
  std::int64_t min_len = 0, max_len = 0;  // Lists
  std::int64_t size = 0;                // Histograms bins, Graphs nodes
  std::vector<Value> values;            // Set

  std::vector<Value> enumerate() const;
  std::string str() const;
  bool operator==(const DomainSpec&) const = default;
};

struct VarDecl {
  std::string name;
  Type type;
  DomainSpec domain;
  Span span;
};

struct RangeDecl {
  std::string name;
  std::vector<Value> values;
  Span span;
};

struct PredDecl {
  std::string name;
  std::vector<std::pair<std::string, Type>> params;
  ExprPtr body;
  Span span;
};

struct PrivacyTarget {
  Rational eps;
  Rational delta;
};

/// One program file: declarations, adjacency precondition, privacy target, body.
struct Unit {
  std::vector<VarDecl> vars;
  std::vector<RangeDecl> ranges;
  std::vector<PredDecl> preds;
  ExprPtr pre;
  std::optional<PrivacyTarget> target;
  CmdPtr body;
  Span pre_span;

  const VarDecl* find_var(const std::string& name) const;  // accepts tagged names
  const PredDecl* find_pred(const std::string& name) const;
  const RangeDecl* find_range(const std::string& name) const;
  /// The range sampled by Exp; the unique declared range.
  const RangeDecl& exp_range() const;
  bool is_target_program() const;
};

bool same(const Unit& a, const Unit& b);

/// "x_1" -> ("x", 1); untagged names give tag 0.
std::pair<std::string, int> split_tag(const std::string& name);
std::string tagged(const std::string& name, int tag);
bool is_ghost(const std::string& name);

inline constexpr const char* kAlpha = "__alpha";
inline constexpr const char* kDelta = "__delta";
inline constexpr const char* kOut = "__out";

}  // namespace dpsp
