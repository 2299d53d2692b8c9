#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "barrons/domain.hpp"

using namespace barrons;

TEST(ProblemDims, RejectsTooFewAssetsOrShortHorizon) {
  EXPECT_THROW(ProblemDims(1, 10), ValidationError);
  EXPECT_THROW(ProblemDims(3, 3), ValidationError);
  EXPECT_NO_THROW(ProblemDims(2, 3));
  EXPECT_DOUBLE_EQ(ProblemDims(2, 16).floor(), 1.0 / 32.0);
}

TEST(MarketRound, NormalizesByMaximum) {
  const auto r = MarketRound::normalize(Vector{{2.0, 1.0}});
  EXPECT_EQ(r[0], 1.0);
  EXPECT_EQ(r[1], 0.5);
  const auto ones = MarketRound::normalize(Vector{{1.0, 1.0, 1.0}});
  EXPECT_EQ(ones.relatives(), Vector::Ones(3));
}

TEST(MarketRound, RejectsDegenerateInput) {
  EXPECT_THROW(MarketRound::normalize(Vector{{0.0, 0.0}}), ValidationError);
  EXPECT_THROW(MarketRound::normalize(Vector{{1.0, -0.1}}), ValidationError);
  EXPECT_THROW(MarketRound::normalize(Vector{{1.0, NAN}}), ValidationError);
  EXPECT_THROW(MarketRound::normalize(Vector{{INFINITY, 1.0}}), ValidationError);
  EXPECT_THROW(MarketRound::normalize(Vector(0)), ValidationError);
  EXPECT_NO_THROW(MarketRound::normalize(Vector{{1.0, 0.0}}));
}

TEST(LossAndGradient, SpecExamples) {
  const ProblemDims dims(2, 16);
  const auto half = PortfolioState::uniform(2);

  auto l = loss_and_gradient(half, MarketRound::normalize(Vector{{1.0, 1.0}}));
  EXPECT_DOUBLE_EQ(l.loss, 0.0);
  EXPECT_DOUBLE_EQ(l.gradient[0], -1.0);
  EXPECT_DOUBLE_EQ(l.gradient[1], -1.0);

  l = loss_and_gradient(half, MarketRound::normalize(Vector{{1.0, 0.5}}));
  EXPECT_NEAR(l.loss, -std::log(0.75), 1e-15);
  EXPECT_NEAR(l.loss, 0.28768, 1e-5);
  EXPECT_NEAR(l.gradient[0], -4.0 / 3.0, 1e-15);
  EXPECT_NEAR(l.gradient[1], -2.0 / 3.0, 1e-15);

  const auto corner = PortfolioState::clipped(Vector{{1.0 / 32.0, 1.0 - 1.0 / 32.0}}, dims);
  l = loss_and_gradient(corner, MarketRound::normalize(Vector{{1.0, 0.0}}));
  EXPECT_NEAR(l.loss, std::log(32.0), 1e-14);
  EXPECT_NEAR(l.gradient[0], -32.0, 1e-12);
  EXPECT_EQ(l.gradient[1], 0.0);
}

TEST(PortfolioState, MembershipTolerances) {
  const ProblemDims dims(2, 16);
  EXPECT_NO_THROW(PortfolioState::clipped(Vector{{1.0 / 32 - 5e-13, 1 - 1.0 / 32 + 5e-13}}, dims));
  EXPECT_THROW(PortfolioState::clipped(Vector{{1.0 / 32 - 1e-11, 1 - 1.0 / 32 + 1e-11}}, dims),
               ValidationError);
  EXPECT_THROW(PortfolioState::clipped(Vector{{0.5, 0.5 + 1e-8}}, dims), ValidationError);
  EXPECT_NO_THROW(PortfolioState::clipped(Vector{{0.5, 0.5 + 5e-10}}, dims));
  EXPECT_THROW(PortfolioState::simplex(Vector{{1.1, -0.1}}), ValidationError);
  EXPECT_NO_THROW(PortfolioState::simplex(Vector{{1.0, 0.0}}));
  EXPECT_TRUE(clipped_membership_error(Vector{{0.5, 0.5}}, dims).empty());
  EXPECT_FALSE(clipped_membership_error(Vector{{0.99, 0.01}}, dims).empty());
}

TEST(SmoothComparator, SpecExamples) {
  auto u = smooth_comparator(Vector{{1.0, 0.0}}, ProblemDims(2, 10));
  EXPECT_NEAR(u[0], 0.95, 1e-15);
  EXPECT_NEAR(u[1], 0.05, 1e-15);
  u = smooth_comparator(Vector{{0.5, 0.5}}, ProblemDims(2, 10));
  EXPECT_NEAR(u[0], 0.5, 1e-15);
  EXPECT_NEAR(u[1], 0.5, 1e-15);
  u = smooth_comparator(Vector{{1.0, 0.0, 0.0}}, ProblemDims(3, 100));
  EXPECT_NEAR(u[0], 0.99 + 1.0 / 300.0, 1e-15);
  EXPECT_NEAR(u[1], 1.0 / 300.0, 1e-15);
  EXPECT_NEAR(u[2], 1.0 / 300.0, 1e-15);
}

namespace {

Vector random_clipped(std::mt19937_64& rng, const ProblemDims& dims) {
  std::exponential_distribution<double> e(1.0);
  Vector w(dims.assets());
  for (auto& v : w) v = e(rng);
  w /= w.sum();
  // Map onto the clipped simplex: (1 - N*floor) w + floor.
  return (1.0 - dims.assets() * dims.floor()) * w.array() + dims.floor();
}

MarketRound random_round(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vector r(n);
  for (auto& v : r) v = u(rng) < 0.2 ? 0.0 : u(rng);
  r[static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(n))] = 1.0;
  return MarketRound::normalize(r);
}

}  // namespace

TEST(DomainProperties, WealthAndGradientBounds) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 2000; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 6);
    const ProblemDims dims(n, n + 1 + static_cast<int>(rng() % 200));
    const Vector x = random_clipped(rng, dims);
    const Vector u = random_clipped(rng, dims);
    const auto r = random_round(rng, n);
    const double wealth = x.dot(r.relatives());
    const double nt = static_cast<double>(n) * dims.horizon();
    EXPECT_GE(wealth, 1.0 / nt * (1 - 1e-12));
    EXPECT_LE(wealth, 1.0 + 1e-12);
    const auto l = loss_and_gradient(PortfolioState::clipped(x, dims), r);
    EXPECT_LE(l.gradient.lpNorm<Eigen::Infinity>(), nt * (1 + 1e-12));
    EXPECT_LE(l.gradient.squaredNorm(), nt * nt * (1 + 1e-12));
    EXPECT_LE(l.loss - log_loss(u, r), std::log(nt) + 1e-12);
  }
}

TEST(DomainProperties, SmoothComparatorCostsAtMostTwoNats) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 4);
    const ProblemDims dims(n, n + 1 + static_cast<int>(rng() % 100));
    Vector up(n);
    if (trial % 3 == 0) {
      up.setZero();
      up[static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(n))] = 1.0;
    } else {
      std::exponential_distribution<double> e(1.0);
      for (auto& v : up) v = e(rng);
      up /= up.sum();
    }
    const auto u = smooth_comparator(up, dims);
    EXPECT_TRUE(u.in_clipped_simplex(dims));
    double gap = 0.0;
    for (int t = 0; t < dims.horizon(); ++t) {
      Vector r = random_round(rng, n).relatives();
      r = r.cwiseMax(1e-3);  // keep <u', r> > 0 at vertices
      const auto round = MarketRound::normalize(r);
      gap += log_loss(u.weights(), round) - log_loss(up, round);
    }
    EXPECT_LE(gap, 2.0 + 1e-9);
  }
}
