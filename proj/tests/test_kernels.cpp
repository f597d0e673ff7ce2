#include <gtest/gtest.h>

#include <random>

#include "basedlab/kernels.hpp"
#include "support/oracles.hpp"

using namespace basedlab;
namespace par = basedlab::kernels::parallel;
namespace ser = basedlab::kernels::serial;

namespace {

std::vector<double> random_vec(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

}  // namespace

TEST(Kernels, ParallelAgreesWithSerialBitForBit) {
  std::mt19937_64 rng(59);
  for (int trial = 0; trial < 40; ++trial) {
    const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng() % 90), m = 1 + static_cast<Eigen::Index>(rng() % 70);
    const Matrix x = oracle::random_matrix(rng, n, m, -10.0, 10.0);
    EXPECT_EQ(par::row_stddev(x), ser::row_stddev(x));

    const auto factors = random_vec(rng, static_cast<std::size_t>(n));
    Matrix a = x, b = x;
    par::scale_rows(a, factors);
    ser::scale_rows(b, factors);
    EXPECT_EQ(a, b);

    a = x;
    b = x;
    par::quantize_rows(a, 17);
    ser::quantize_rows(b, 17);
    EXPECT_EQ(a, b);

    const auto s = random_vec(rng, static_cast<std::size_t>(m));
    EXPECT_EQ(par::mat_vec(x, s), ser::mat_vec(x, s));
    const auto t = random_vec(rng, static_cast<std::size_t>(n));
    EXPECT_EQ(par::weighted_column_sums(x, t), ser::weighted_column_sums(x, t));
    EXPECT_EQ(par::row_distances(x, s), ser::row_distances(x, s));
    if (n >= 2) EXPECT_EQ(par::covariance(x), ser::covariance(x));

    std::vector<kernels::History> peers;
    for (int p = 0; p < 5; ++p)
      peers.push_back(p == 2 ? Matrix(0, m) : oracle::random_matrix(rng, 1 + p, m, -10.0, 10.0));
    for (auto agg : {kernels::Aggregate::Min, kernels::Aggregate::Mean}) {
      EXPECT_EQ(par::nearest_history(x, peers, agg, nullptr), ser::nearest_history(x, peers, agg, nullptr));
      const Matrix metric = Matrix::Identity(m, m) * 2.0;
      EXPECT_EQ(par::nearest_history(x, peers, agg, &metric), ser::nearest_history(x, peers, agg, &metric));
    }
  }
}

TEST(Kernels, MatVecMatchesOracle) {
  std::mt19937_64 rng(61);
  const Matrix w = oracle::random_matrix(rng, 64, 64, 0.0, 1.0);
  const auto s = random_vec(rng, 64);
  const auto got = par::mat_vec(w, s);
  const auto want = oracle::mat_vec(w, s);
  for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], want[i], 1e-12);
}

TEST(Kernels, NearestHistoryReportsNoPeer) {
  const Matrix items = Matrix::Zero(2, 3);
  const std::vector<kernels::History> peers{Matrix(0, 3)};
  EXPECT_EQ(par::nearest_history(items, peers, kernels::Aggregate::Min, nullptr),
            (std::vector<std::size_t>{kernels::kNoPeer, kernels::kNoPeer}));
}
