#include "basedlab/fhe_cost.hpp"

#include <algorithm>
#include <set>

#include "basedlab/errors.hpp"

namespace basedlab::fhe {

ExprPtr ExprNode::var(std::string name) {
  return std::make_shared<const ExprNode>(ExprNode{Var{std::move(name)}});
}

ExprPtr ExprNode::add(ExprPtr left, ExprPtr right) {
  return std::make_shared<const ExprNode>(ExprNode{Binary{BinaryOp::Add, std::move(left), std::move(right)}});
}

ExprPtr ExprNode::mul(ExprPtr left, ExprPtr right) {
  return std::make_shared<const ExprNode>(ExprNode{Binary{BinaryOp::Mul, std::move(left), std::move(right)}});
}

bool equal(const ExprNode& a, const ExprNode& b) {
  if (a.value.index() != b.value.index()) return false;
  if (const auto* va = std::get_if<ExprNode::Var>(&a.value))
    return va->name == std::get<ExprNode::Var>(b.value).name;
  const auto& ba = std::get<ExprNode::Binary>(a.value);
  const auto& bb = std::get<ExprNode::Binary>(b.value);
  return ba.op == bb.op && equal(*ba.left, *bb.left) && equal(*ba.right, *bb.right);
}

namespace {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  ExprPtr parse() {
    skip_space();
    if (pos_ == text_.size()) throw SyntaxError(pos_, "empty expression");
    ExprPtr e = expr();
    skip_space();
    if (pos_ != text_.size()) throw SyntaxError(pos_, "unexpected '" + std::string(1, text_[pos_]) + "'");
    return e;
  }

 private:
  static constexpr std::string_view kTimes = "\xC3\x97";  // U+00D7

  void skip_space() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\n' ||
                                   text_[pos_] == '\r'))
      ++pos_;
  }

  bool accept_mul() {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == '*') {
      ++pos_;
      return true;
    }
    if (text_.substr(pos_, kTimes.size()) == kTimes) {
      pos_ += kTimes.size();
      return true;
    }
    return false;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  ExprPtr expr() {
    ExprPtr left = term();
    while (accept('+')) left = ExprNode::add(left, term());
    return left;
  }

  ExprPtr term() {
    ExprPtr left = factor();
    while (accept_mul()) left = ExprNode::mul(left, factor());
    return left;
  }

  ExprPtr factor() {
    skip_space();
    if (pos_ == text_.size()) throw SyntaxError(pos_, "unexpected end of input");
    if (accept('(')) {
      ExprPtr inner = expr();
      if (!accept(')')) throw SyntaxError(pos_, "expected ')'");
      return inner;
    }
    const char c = text_[pos_];
    if (c >= 'a' && c <= 'z') {
      const std::size_t start = pos_;
      while (pos_ < text_.size() &&
             ((text_[pos_] >= 'a' && text_[pos_] <= 'z') || (text_[pos_] >= '0' && text_[pos_] <= '9')))
        ++pos_;
      return ExprNode::var(std::string(text_.substr(start, pos_ - start)));
    }
    throw SyntaxError(pos_, "expected identifier or '(' but found '" + std::string(1, c) + "'");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

void collect_names(const ExprNode& node, std::set<std::string>& names) {
  if (const auto* v = std::get_if<ExprNode::Var>(&node.value)) {
    names.insert(v->name);
    return;
  }
  const auto& b = std::get<ExprNode::Binary>(node.value);
  collect_names(*b.left, names);
  collect_names(*b.right, names);
}

// Returns the operand token for `node` ("a" or "sN").
std::string emit_steps(const ExprNode& node, FusionPlan& plan) {
  if (const auto* v = std::get_if<ExprNode::Var>(&node.value)) return v->name;
  const auto& b = std::get<ExprNode::Binary>(node.value);
  const std::string left = emit_steps(*b.left, plan);
  const std::string right = emit_steps(*b.right, plan);
  FusedStep step;
  step.label = "s" + std::to_string(plan.size() + 1);
  step.op = b.op == BinaryOp::Add ? "+" : "*";
  step.operands = {left, right};
  if (b.left->is_leaf()) step.absorbed_leaves.push_back(left);
  if (b.right->is_leaf()) step.absorbed_leaves.push_back(right);
  plan.push_back(std::move(step));
  return plan.back().label;
}

}  // namespace

ExprPtr parse_expression(std::string_view text) { return Parser(text).parse(); }

std::string render(const ExprNode& node) {
  if (const auto* v = std::get_if<ExprNode::Var>(&node.value)) return v->name;
  const auto& b = std::get<ExprNode::Binary>(node.value);
  return "(" + render(*b.left) + (b.op == BinaryOp::Add ? "+" : "*") + render(*b.right) + ")";
}

std::int64_t count_leaves(const ExprNode& node) {
  if (node.is_leaf()) return 1;
  const auto& b = std::get<ExprNode::Binary>(node.value);
  return count_leaves(*b.left) + count_leaves(*b.right);
}

std::int64_t count_internal(const ExprNode& node) {
  if (node.is_leaf()) return 0;
  const auto& b = std::get<ExprNode::Binary>(node.value);
  return 1 + count_internal(*b.left) + count_internal(*b.right);
}

std::int64_t cost(const ExprNode& node, CostMode mode, const CostOptions& options) {
  switch (mode) {
    case CostMode::Standard:
      return 1;
    case CostMode::FHE: {
      std::int64_t encryptions = count_leaves(node);
      if (options.distinct_variables) {
        std::set<std::string> names;
        collect_names(node, names);
        encryptions = static_cast<std::int64_t>(names.size());
      }
      return encryptions + count_internal(node);
    }
    case CostMode::CerberusSqueezed:
      return std::max<std::int64_t>(1, count_internal(node));
  }
  return 0;
}

FusionPlan fusion_plan(const ExprNode& node) {
  FusionPlan plan;
  if (const auto* v = std::get_if<ExprNode::Var>(&node.value)) {
    plan.push_back(FusedStep{"s1", "encrypt", {v->name}, {v->name}});
    return plan;
  }
  emit_steps(node, plan);
  return plan;
}

std::string FusedStep::describe() const {
  if (operands.size() == 1) return label + " = " + op + "(" + operands.front() + ")";
  return label + " = " + operands[0] + op + operands[1];
}

}  // namespace basedlab::fhe
