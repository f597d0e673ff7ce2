#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace basedlab::fhe {

enum class BinaryOp { Add, Mul };

struct ExprNode;
using ExprPtr = std::shared_ptr<const ExprNode>;

/// Arithmetic expression tree: a variable or a binary + / x node.
struct ExprNode {
  struct Var {
    std::string name;
  };
  struct Binary {
    BinaryOp op;
    ExprPtr left;
    ExprPtr right;
  };

  std::variant<Var, Binary> value;

  static ExprPtr var(std::string name);
  static ExprPtr add(ExprPtr left, ExprPtr right);
  static ExprPtr mul(ExprPtr left, ExprPtr right);

  bool is_leaf() const { return std::holds_alternative<Var>(value); }
};

bool equal(const ExprNode& a, const ExprNode& b);

/// Grammar (whitespace-insensitive):
///   expr   := term ('+' term)*
///   term   := factor (('*' | U+00D7) factor)*
///   factor := ident | '(' expr ')'
///   ident  := [a-z][a-z0-9]*
/// Throws SyntaxError with a byte offset.
ExprPtr parse_expression(std::string_view text);

/// Fully parenthesized infix form, e.g. "((a+b)+(c*d))".
std::string render(const ExprNode& node);

enum class CostMode { Standard, FHE, CerberusSqueezed };

struct CostOptions {
  /// Charge one encryption per distinct variable name rather than per occurrence.
  bool distinct_variables = false;
};

std::int64_t count_leaves(const ExprNode& node);
std::int64_t count_internal(const ExprNode& node);

std::int64_t cost(const ExprNode& node, CostMode mode, const CostOptions& options = {});

/// One fused encrypted step: an operator applied to two operands. Operands
/// are variable names or references "sN" to earlier steps (1-based).
struct FusedStep {
  std::string label;  // "s1", "s2", ...
  std::string op;     // "+", "*", or "encrypt" for a leaf-only expression
  std::vector<std::string> operands;
  std::vector<std::string> absorbed_leaves;

  std::string describe() const;
};

using FusionPlan = std::vector<FusedStep>;

/// Post-order, one step per internal node; a single encrypt step for a bare leaf.
FusionPlan fusion_plan(const ExprNode& node);

}  // namespace basedlab::fhe
