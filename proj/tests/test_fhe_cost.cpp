#include <gtest/gtest.h>

#include <random>

#include "basedlab/errors.hpp"
#include "basedlab/fhe_cost.hpp"

using namespace basedlab;
using namespace basedlab::fhe;

namespace {

ExprPtr random_tree(std::mt19937_64& rng, int leaves) {
  if (leaves == 1) return ExprNode::var("x" + std::to_string(rng() % 5));
  const int left = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(leaves - 1));
  auto l = random_tree(rng, left);
  auto r = random_tree(rng, leaves - left);
  return rng() % 2 ? ExprNode::add(l, r) : ExprNode::mul(l, r);
}

}  // namespace

TEST(Cost, ThreeTermExpression) {
  const ExprPtr e = parse_expression("(a+b)+(c*d)+(e*f)");
  EXPECT_EQ(cost(*e, CostMode::Standard), 1);
  EXPECT_EQ(cost(*e, CostMode::FHE), 11);
  EXPECT_EQ(cost(*e, CostMode::CerberusSqueezed), 5);
  EXPECT_EQ(fusion_plan(*e).size(), 5u);
}

TEST(Cost, SingleVariable) {
  const ExprPtr e = parse_expression("x");
  EXPECT_EQ(cost(*e, CostMode::Standard), 1);
  EXPECT_EQ(cost(*e, CostMode::FHE), 1);
  EXPECT_EQ(cost(*e, CostMode::CerberusSqueezed), 1);
  const auto plan = fusion_plan(*e);
  ASSERT_EQ(plan.size(), 1u);
  EXPECT_EQ(plan[0].op, "encrypt");
}

TEST(Cost, DistinctVariablesEncryptOnce) {
  const ExprPtr e = parse_expression("a*a+a");
  EXPECT_EQ(cost(*e, CostMode::FHE), 5);
  EXPECT_EQ(cost(*e, CostMode::FHE, CostOptions{true}), 3);
}

TEST(Parse, PrecedenceAndAssociativity) {
  EXPECT_EQ(render(*parse_expression("a+b*c")), "(a+(b*c))");
  EXPECT_EQ(render(*parse_expression("a+b+c")), "((a+b)+c)");
  EXPECT_EQ(render(*parse_expression(" ( a + b ) \xC3\x97 c2 ")), "((a+b)*c2)");
}

TEST(Parse, ReportsErrorPosition) {
  for (auto [text, pos] : std::vector<std::pair<std::string, std::size_t>>{{"(a+", 3}, {"a+*b", 2}, {"", 0}, {"a)", 1}, {"A", 0}}) {
    try {
      parse_expression(text);
      ADD_FAILURE() << text;
    } catch (const SyntaxError& e) {
      EXPECT_EQ(e.position(), pos) << text;
    }
  }
}

TEST(Cost, RandomTreesObeyCountIdentities) {
  std::mt19937_64 rng(37);
  for (int trial = 0; trial < 500; ++trial) {
    const int leaves = 1 + trial % 30;
    const ExprPtr e = random_tree(rng, leaves);
    EXPECT_EQ(count_leaves(*e), leaves);
    EXPECT_EQ(count_internal(*e), leaves - 1);
    EXPECT_EQ(cost(*e, CostMode::FHE), 2 * leaves - 1);
    EXPECT_EQ(cost(*e, CostMode::CerberusSqueezed), std::max(1, leaves - 1));
    EXPECT_EQ(static_cast<int>(fusion_plan(*e).size()), std::max(1, leaves - 1));
    EXPECT_TRUE(equal(*parse_expression(render(*e)), *e));
  }
}

TEST(FusionPlan, StepsReferenceEarlierSteps) {
  const auto plan = fusion_plan(*parse_expression("(a+b)*(c+d)"));
  ASSERT_EQ(plan.size(), 3u);
  EXPECT_EQ(plan[2].op, "*");
  EXPECT_EQ(plan[2].operands, (std::vector<std::string>{"s1", "s2"}));
  EXPECT_EQ(plan[0].describe(), "s1 = a+b");
}
