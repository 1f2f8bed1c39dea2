#include "imtm/distributions.hpp"
#include "imtm/error.hpp"
#include "imtm/proposals.hpp"
#include "imtm/targets.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace imtm;

namespace {

Vector v1(double a) { return Vector::Constant(1, a); }

Vector v2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

// Sample mean and covariance of n kernel draws.
void moments(const ProposalKernel& k, const ConditioningContext& ctx, int n, std::uint64_t seed, Vector& mean,
             Matrix& cov) {
  RngStream rng(seed);
  const auto d = ctx.current->size();
  mean = Vector::Zero(d);
  Matrix ss = Matrix::Zero(d, d);
  for (int i = 0; i < n; ++i) {
    const Vector y = k.sample(rng, ctx);
    mean += y;
    ss += y * y.transpose();
  }
  mean /= n;
  cov = ss / n - mean * mean.transpose();
}

}  // namespace

TEST(GaussianRW, DensityIsNormalAroundCurrent) {
  const GaussianRWProposal k(SpdMatrix::scaled_identity(1, 2.0));
  const Vector x = v1(1.0);
  const auto ctx = ConditioningContext::at(x);
  EXPECT_NEAR(k.log_density(v1(2.5), ctx), -0.5 * std::log(2 * std::numbers::pi * 2.0) - 1.5 * 1.5 / 4.0, 1e-14);
  EXPECT_TRUE(k.symmetric());
  Vector m;
  Matrix c;
  moments(k, ctx, 100000, 1, m, c);
  EXPECT_NEAR(m[0], 1.0, 0.015);
  EXPECT_NEAR(c(0, 0), 2.0, 0.03);
}

TEST(MixtureRW, DensityIsWeightedSum) {
  std::vector<SpdMatrix> covs{SpdMatrix::scaled_identity(2, 0.1), SpdMatrix::scaled_identity(2, 100.0)};
  const MixtureRWProposal k({0.25, 0.75}, covs);
  const Vector x = v2(0, 0);
  const Vector y = v2(0.3, -1.0);
  const auto ctx = ConditioningContext::at(x);
  const double expected =
      std::log(0.25 * std::exp(mvn_logpdf(y, x, covs[0])) + 0.75 * std::exp(mvn_logpdf(y, x, covs[1])));
  EXPECT_NEAR(k.log_density(y, ctx), expected, 1e-12);
  Vector m;
  Matrix c;
  moments(k, ctx, 100000, 2, m, c);
  EXPECT_NEAR(c(0, 0), 0.25 * 0.1 + 0.75 * 100.0, 1.5);
  EXPECT_THROW(MixtureRWProposal({0.5, 0.6}, covs), InvalidParameterError);
}

TEST(AnchoredRW, CentresOnAnchorAndIgnoresCurrent) {
  const AnchoredRWProposal k(SpdMatrix::scaled_identity(1, 0.5));
  const Vector x = v1(100.0);
  std::vector<Vector> snap{v1(3.0), v1(-2.0)};
  ConditioningContext ctx = ConditioningContext::at(x);
  ctx.population = snap;
  ctx.anchor = 1;
  EXPECT_NEAR(k.log_density(v1(-2.0), ctx), -0.5 * std::log(2 * std::numbers::pi * 0.5), 1e-14);
  Vector m;
  Matrix c;
  moments(k, ctx, 50000, 3, m, c);
  EXPECT_NEAR(m[0], -2.0, 0.02);
  ConditioningContext no_anchor = ConditioningContext::at(x);
  RngStream rng(1);
  EXPECT_THROW(k.sample(rng, no_anchor), InvalidParameterError);
}

TEST(AnchoredRW, SelfAnchorReadsCurrentPoint) {
  const AnchoredRWProposal k(SpdMatrix::scaled_identity(1, 1.0));
  const Vector x = v1(7.0);
  std::vector<Vector> snap{v1(0.0), v1(1.0)};
  ConditioningContext ctx = ConditioningContext::at(x);
  ctx.population = snap;
  ctx.self = 0;
  ctx.anchor = 0;
  EXPECT_NEAR(k.log_density(v1(7.0), ctx), -0.5 * std::log(2 * std::numbers::pi), 1e-14);
}

TEST(AnchoredKernel, WrapsBaseAtAnchor) {
  auto base = std::make_shared<GaussianRWProposal>(SpdMatrix::scaled_identity(1, 1.0));
  const AnchoredKernel k(base);
  const Vector x = v1(5.0);
  std::vector<Vector> snap{v1(-1.0), v1(2.0)};
  ConditioningContext ctx = ConditioningContext::at(x);
  ctx.population = snap;
  ctx.anchor = 1;
  const Vector at_anchor = v1(2.0);
  EXPECT_DOUBLE_EQ(k.log_density(v1(2.4), ctx), base->log_density(v1(2.4), ConditioningContext::at(at_anchor)));
  EXPECT_TRUE(k.anchored());
}

TEST(DiscreteStep, ProbabilitiesAndSupport) {
  const DiscreteStepProposal k({-1, 1}, {0.3, 0.7});
  const Vector x = v1(2.0);
  const auto ctx = ConditioningContext::at(x);
  EXPECT_NEAR(std::exp(k.log_density(v1(3.0), ctx)), 0.7, 1e-15);
  EXPECT_NEAR(std::exp(k.log_density(v1(1.0), ctx)), 0.3, 1e-15);
  EXPECT_EQ(k.log_density(v1(4.0), ctx), -INFINITY);
  EXPECT_FALSE(k.symmetric());
  EXPECT_TRUE(DiscreteStepProposal({-1, 1}, {0.5, 0.5}).symmetric());
  EXPECT_THROW(DiscreteStepProposal({1, 2}, {0.5, 0.5}), InvalidParameterError);
}

TEST(SOR, ConditionalPreservesTrialMarginal) {
  // Sigma_1 = Sigma_M = I_2, R = -0.8 I: trials negatively correlated with x.
  const SpdMatrix id = SpdMatrix::identity(2);
  Matrix r = -0.8 * Matrix::Identity(2, 2);
  const SORBlockProposal sor({id}, id, {r}, Vector::Zero(2));
  RngStream rng(5);
  // Draw x from its N(0, I) marginal, then the trial from the conditional.
  const int n = 100000;
  double sxy = 0.0;
  double syy = 0.0;
  for (int i = 0; i < n; ++i) {
    const Vector x = mvn_sample(rng, Vector::Zero(2), id);
    const auto ys = sor.sample_block(rng, ConditioningContext::at(x));
    sxy += ys[0][0] * x[0];
    syy += ys[0][0] * ys[0][0];
  }
  EXPECT_NEAR(sxy / n, -0.8, 0.01);
  EXPECT_NEAR(syy / n, 1.0, 0.015);
  EXPECT_LT((sor.conditional_mean(0, v2(1, 1), Vector::Zero(2)) - v2(-0.8, -0.8)).norm(), 1e-12);
}

TEST(SOR, RejectsNonPositiveDefiniteJoint) {
  const SpdMatrix id = SpdMatrix::identity(1);
  Matrix r(1, 1);
  r << -0.9;
  // Two trials each correlated -0.9 with x make the joint covariance indefinite.
  EXPECT_THROW(SORBlockProposal({id, id}, id, {r, r}, Vector::Zero(1)), InvalidParameterError);
}

TEST(Ray, DensityAlongDirectionAndOffRay) {
  const RayProposal k(v2(1, 0), 4.0);
  const Vector x = v2(1, 1);
  const auto ctx = ConditioningContext::at(x);
  EXPECT_NEAR(k.log_density(v2(3, 1), ctx), normal_logpdf(2.0, 0.0, 4.0), 1e-14);
  EXPECT_THROW(k.log_density(v2(3, 2), ctx), DegenerateError);
  EXPECT_THROW(RayProposal(v2(1, 1), 1.0), InvalidParameterError);
}

TEST(Ray, DirectionIsUnitAndDegenerateOnCoincidence) {
  const Vector d = ray_direction(v2(3, 4), v2(0, 0));
  EXPECT_NEAR(d.norm(), 1.0, 1e-15);
  EXPECT_NEAR(d[0], 0.6, 1e-15);
  EXPECT_THROW(ray_direction(v2(1, 1), v2(1, 1)), DegenerateError);
}

TEST(LineSearch, FindsSliceMode) {
  // Standard normal centred at (2, -1): the mode along the x-axis through the origin is at r = 2.
  std::vector<SpdMatrix> covs{SpdMatrix::identity(2)};
  const GaussianMixtureTarget t({1.0}, {v2(2, -1)}, covs);
  const auto res = line_search_mode(t, v2(0, 0), v2(1, 0));
  EXPECT_TRUE(res.bracketed);
  EXPECT_NEAR(res.r, 2.0, 1e-5);
}

TEST(ConditioningContext, WithCurrentSwapsOnlyCurrent) {
  const Vector x = v1(1.0);
  const Vector y = v1(2.0);
  std::vector<Vector> snap{v1(0.0), v1(5.0)};
  ConditioningContext ctx = ConditioningContext::at(x);
  ctx.population = snap;
  ctx.self = 0;
  const auto c2 = ctx.with_current(y);
  EXPECT_EQ(c2.position(0)[0], 2.0);
  EXPECT_EQ(c2.position(1)[0], 5.0);
}
