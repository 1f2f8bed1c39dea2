#include "imtm/diagnostics.hpp"
#include "imtm/error.hpp"
#include "imtm/population.hpp"
#include "imtm/samplers.hpp"
#include "imtm/targets.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <sstream>

using namespace imtm;

namespace {

KernelPtr discrete(std::vector<int> offsets, std::vector<double> probs) {
  return std::make_shared<DiscreteStepProposal>(std::move(offsets), std::move(probs));
}

KernelPtr rw(std::size_t d, double v) { return std::make_shared<GaussianRWProposal>(SpdMatrix::scaled_identity(d, v)); }

std::string csv(const ChainTrace& t) {
  std::ostringstream o;
  t.write_csv(o);
  return o.str();
}

void pooled_moments(const ChainTrace& t, std::size_t chain_lo, std::size_t chain_hi, std::size_t first, double& mean,
                    double& var) {
  double s = 0.0;
  double ss = 0.0;
  std::size_t n = 0;
  for (std::size_t it = first; it < t.iterations(); ++it) {
    for (std::size_t c = chain_lo; c < chain_hi; ++c) {
      const double v = t.value(it, c, 0);
      s += v;
      ss += v * v;
      ++n;
    }
  }
  mean = s / static_cast<double>(n);
  var = ss / static_cast<double>(n) - mean * mean;
}

}  // namespace

TEST(DetailedBalance, MhStepOnGrid) {
  const GridTarget g({0.2, 0.5, 0.3});
  const auto k = discrete({-1, 1}, {0.4, 0.6});
  const auto f = detailed_balance_test([&](RngStream& r, const Vector& x) { return mh_step(r, g, *k, x).next; }, g,
                                       1'000'000, 1);
  EXPECT_EQ(f.status, BalanceStatus::Pass) << f.max_z;
}

TEST(DetailedBalance, MtmWithAsymmetricKernelAndPowerLambda) {
  const GridTarget g({0.1, 0.4, 0.2, 0.3});
  const auto k = discrete({-2, -1, 1, 2}, {0.1, 0.2, 0.3, 0.4});
  const auto f = detailed_balance_test(
      [&](RngStream& r, const Vector& x) { return mtm_step(r, g, *k, 3, LambdaPolicy::power_product(0.5), x).next; },
      g, 1'000'000, 2);
  EXPECT_EQ(f.status, BalanceStatus::Pass) << f.max_z;
}

TEST(DetailedBalance, MtmDpWithSlotFactorsAndConstLambda) {
  const GridTarget g({0.1, 0.4, 0.2, 0.3});
  const std::vector<KernelPtr> ks{discrete({-1, 1}, {0.2, 0.8}), discrete({-3, -2, 2, 3}, {0.4, 0.1, 0.1, 0.4})};
  LambdaPolicy p = LambdaPolicy::const_one();
  p.slot_factors = {0.3, 1.7};
  const auto f = detailed_balance_test([&](RngStream& r, const Vector& x) { return mtm_dp_step(r, g, ks, p, x).next; },
                                       g, 1'000'000, 3);
  EXPECT_EQ(f.status, BalanceStatus::Pass) << f.max_z;
}

// Sequential updates keep the product target invariant; check joint occupancy
// of two chains on a three-state grid against pi x pi.
TEST(Population, GimtmJointOccupancyIsProduct) {
  auto g = std::make_shared<GridTarget>(std::vector<double>{0.2, 0.5, 0.3});
  SamplerConfig c;
  c.algorithm = Algorithm::GIMTM;
  c.chains = 2;
  c.trials = 2;
  c.policy = LambdaPolicy::harmonic();
  c.kernels = {std::make_shared<AnchoredKernel>(discrete({-1, 1}, {0.5, 0.5})),
               std::make_shared<AnchoredKernel>(discrete({-2, -1, 1, 2}, {0.25, 0.25, 0.25, 0.25}))};
  c.iterations = 200000;
  c.seed = 4;
  c.initial_positions = {g->point(0), g->point(2)};
  const auto r = run(c, g);
  double joint[3][3] = {};
  for (std::size_t it = 1; it < r.trace.iterations(); ++it) {
    const auto a = static_cast<int>(r.trace.value(it, 0, 0));
    const auto b = static_cast<int>(r.trace.value(it, 1, 0));
    joint[a][b] += 1.0 / static_cast<double>(c.iterations);
  }
  const double p[3] = {0.2, 0.5, 0.3};
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      EXPECT_NEAR(joint[a][b], p[a] * p[b], 0.01) << a << "," << b;
    }
  }
}

TEST(Population, ImtmPooledMomentsOnStandardNormal) {
  SamplerConfig c;
  c.algorithm = Algorithm::IMTM;
  c.chains = 10;
  c.trials = 3;
  c.policy = LambdaPolicy::harmonic();
  c.kernels = {rw(1, 0.5), rw(1, 2.0), rw(1, 8.0)};
  c.iterations = 5000;
  c.seed = 5;
  const auto r = run(c, make_standard_normal(1));
  double m = 0;
  double v = 0;
  pooled_moments(r.trace, 0, 10, 500, m, v);
  EXPECT_NEAR(m, 0.0, 0.05);
  EXPECT_NEAR(v, 1.0, 0.06);
}

TEST(Population, NuProportionalAssignmentTracksNu) {
  SamplerConfig c;
  c.algorithm = Algorithm::IMTM;
  c.chains = 6;
  c.trials = 2;
  c.policy = LambdaPolicy::harmonic().with_nu();
  c.assignment = AssignmentStrategy::NuProportional;
  c.kernels = {std::make_shared<AnchoredRWProposal>(SpdMatrix::scaled_identity(1, 0.5)),
               std::make_shared<AnchoredRWProposal>(SpdMatrix::scaled_identity(1, 3.0)), rw(1, 1.0)};
  c.iterations = 3000;
  c.seed = 6;
  const auto r = run(c, make_standard_normal(1));
  ASSERT_EQ(r.trace.nu().size(), r.trace.iterations());
  for (const auto& nu : r.trace.nu()) {
    ASSERT_EQ(nu.size(), 3u);
    EXPECT_NEAR(nu[0] + nu[1] + nu[2], 1.0, 1e-12);
  }
  double m = 0;
  double v = 0;
  pooled_moments(r.trace, 0, 6, 300, m, v);
  EXPECT_NEAR(m, 0.0, 0.1);
  EXPECT_NEAR(v, 1.0, 0.12);
}

TEST(Population, Aimtm2ColdChainTargetsBase) {
  SamplerConfig c;
  c.algorithm = Algorithm::AIMTM2;
  c.chains = 4;
  c.trials = 3;
  c.policy = LambdaPolicy::power_product(1.0);
  c.kernels = {rw(1, 1.0)};
  c.ladder = TemperatureLadder::harmonic(4);
  c.iterations = 20000;
  c.seed = 7;
  const auto target = make_standard_normal(1);
  const auto r = run(c, target);
  double m = 0;
  double v = 0;
  pooled_moments(r.trace, 0, 1, 1000, m, v);
  EXPECT_NEAR(m, 0.0, 0.06);
  EXPECT_NEAR(v, 1.0, 0.08);
  // The hottest rung targets pi^{1/4}, a normal with variance 4.
  pooled_moments(r.trace, 3, 4, 1000, m, v);
  EXPECT_NEAR(v, 4.0, 0.5);
}

TEST(Population, Aimtm1ColdChainTargetsBase) {
  SamplerConfig c;
  c.algorithm = Algorithm::AIMTM1;
  c.chains = 3;
  c.trials = 2;
  c.policy = LambdaPolicy::power_product(1.0);
  c.kernels = {rw(1, 1.0), rw(1, 4.0)};
  c.ladder = TemperatureLadder({1.0, 0.5, 0.25});
  c.iterations = 20000;
  c.seed = 8;
  const auto r = run(c, make_standard_normal(1));
  double m = 0;
  double v = 0;
  pooled_moments(r.trace, 0, 1, 1000, m, v);
  EXPECT_NEAR(m, 0.0, 0.06);
  EXPECT_NEAR(v, 1.0, 0.08);
}

TEST(Population, RandomRayExploresGaussian) {
  std::vector<SpdMatrix> covs{SpdMatrix::scaled_identity(2, 1.0)};
  Vector mu(2);
  mu << 1.0, -2.0;
  auto target = std::make_shared<GaussianMixtureTarget>(std::vector<double>{1.0}, std::vector<Vector>{mu}, covs);
  SamplerConfig c;
  c.algorithm = Algorithm::RandomRay;
  c.chains = 6;
  c.trials = 3;
  c.policy = LambdaPolicy::power_product(1.0);
  c.ray_sigma2 = 1.0;
  c.iterations = 2000;
  c.seed = 9;
  const auto r = run(c, target);
  const auto pts = r.trace.pooled(200);
  Vector m = Vector::Zero(2);
  for (const auto& p : pts) {
    m += p;
  }
  m /= static_cast<double>(pts.size());
  EXPECT_LT((m - mu).norm(), 0.3);
  EXPECT_GT(r.counters.accepted, 0u);
}

TEST(Run, TraceHasInitialRowAndHoldsBitwise) {
  SamplerConfig c;
  c.algorithm = Algorithm::MH;
  c.kernels = {rw(1, 25.0)};
  c.iterations = 100;
  c.seed = 10;
  const auto r = run(c, make_standard_normal(1));
  EXPECT_EQ(r.trace.rows(), 101u);
  for (std::size_t it = 1; it < r.trace.iterations(); ++it) {
    if (!r.trace.accepted(it, 0)) {
      const double a = r.trace.value(it, 0, 0);
      const double b = r.trace.value(it - 1, 0, 0);
      EXPECT_EQ(std::memcmp(&a, &b, sizeof(double)), 0);
    }
  }
}

TEST(Run, DeterministicAcrossThreadCounts) {
  SamplerConfig c;
  c.algorithm = Algorithm::IMTM;
  c.chains = 7;
  c.trials = 3;
  c.policy = LambdaPolicy::harmonic();
  c.assignment = AssignmentStrategy::AnchoredRandom;
  c.kernels = {std::make_shared<AnchoredRWProposal>(SpdMatrix::scaled_identity(2, 1.0))};
  c.iterations = 40;
  c.seed = 11;
  const auto target = make_bivariate_mixture();
  const std::string a = csv(run(c, target).trace);
  c.threads = 4;
  EXPECT_EQ(a, csv(run(c, target).trace));
  c.seed = 12;
  EXPECT_NE(a, csv(run(c, target).trace));
}

TEST(Config, ViolationsAreCollected) {
  SamplerConfig c;
  c.algorithm = Algorithm::IMTM;
  c.chains = 3;
  c.trials = 3;
  c.assignment = AssignmentStrategy::AnchoredRandom;
  c.kernels = {std::make_shared<AnchoredRWProposal>(SpdMatrix::scaled_identity(1, 1.0))};
  c.init_scale = -1.0;
  const auto v = c.violations(1);
  ASSERT_EQ(v.size(), 2u);
  EXPECT_NE(v[0].find("anchored random assignment requires N > M (N=3, M=3)"), std::string::npos);
  try {
    c.validate(1);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.violations().size(), 2u);
  }
}

TEST(Config, LadderAndKernelCountChecks) {
  SamplerConfig c;
  c.algorithm = Algorithm::AIMTM1;
  c.chains = 3;
  c.trials = 2;
  c.kernels = {rw(1, 1.0)};
  EXPECT_FALSE(c.violations(1).empty());
  c.ladder = TemperatureLadder({1.0, 0.5});
  EXPECT_FALSE(c.violations(1).empty());
  c.ladder = TemperatureLadder({1.0, 0.5, 0.2});
  EXPECT_TRUE(c.violations(1).empty());
  SamplerConfig d;
  d.algorithm = Algorithm::MTMDP;
  d.trials = 3;
  d.kernels = {rw(1, 1.0), rw(1, 2.0)};
  EXPECT_FALSE(d.violations(1).empty());
}

TEST(Ladder, ValidationAndHarmonic) {
  EXPECT_THROW(TemperatureLadder({0.9, 0.5}), InvalidParameterError);
  EXPECT_THROW(TemperatureLadder({1.0, 0.5, 0.5}), InvalidParameterError);
  const auto h = TemperatureLadder::harmonic(4);
  EXPECT_DOUBLE_EQ(h[3], 0.25);
}

TEST(Anneal, MatchesLinearSpaceOracle) {
  // Two iterations on three rungs of a standard normal; zeta_j = pi(x_j)^(1 - xi_j).
  const TemperatureLadder ladder({1.0, 0.5, 0.25});
  const std::vector<std::vector<Vector>> rungs{{Vector::Constant(1, 0.3), Vector::Constant(1, -1.0)},
                                               {Vector::Constant(1, 1.5), Vector::Constant(1, 0.2)},
                                               {Vector::Constant(1, -2.5), Vector::Constant(1, 3.0)}};
  const auto pdf = [](double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); };
  const auto h = [](const Vector& x) { return x[0] * x[0] + x[0]; };
  double expected = 0.0;
  for (std::size_t n = 0; n < 2; ++n) {
    double num = 0.0;
    double den = 0.0;
    for (std::size_t j = 0; j < 3; ++j) {
      const double w = std::pow(pdf(rungs[j][n][0]), 1.0 - ladder[j]);
      num += w * h(rungs[j][n]);
      den += w;
    }
    expected += 0.5 * num / den;
  }
  const auto target = make_standard_normal(1);
  EXPECT_NEAR(anneal_estimate(rungs, ladder, *target, h).value, expected, 1e-12);
  EXPECT_EQ(anneal_estimate(rungs, ladder, *target, [](const Vector&) { return 1.0; }).value, 1.0);
}

TEST(Anneal, SingleRungIsPlainMean) {
  const TemperatureLadder ladder({1.0});
  const std::vector<std::vector<Vector>> rungs{{Vector::Constant(1, 1.0), Vector::Constant(1, 2.0), Vector::Constant(1, 6.0)}};
  const auto target = make_standard_normal(1);
  EXPECT_DOUBLE_EQ(anneal_estimate(rungs, ladder, *target, [](const Vector& x) { return x[0]; }).value, 3.0);
}

TEST(Start, OverdispersedStartStaysInSupport) {
  const BetaBinomialPosterior post({{3, 10}});
  RngStream rng(14);
  Vector centre(4);
  centre << 0.5, 0.5, 0.5, 0.0;
  const auto pts = overdispersed_start(rng, post, 20, centre, 0.3);
  for (const auto& p : pts) {
    EXPECT_TRUE(post.in_support(p));
  }
}

TEST(AlgorithmNames, RoundTrip) {
  for (const auto a : {Algorithm::MH, Algorithm::MTM, Algorithm::MTMDP, Algorithm::IMTM, Algorithm::AIMTM1,
                       Algorithm::AIMTM2, Algorithm::GIMTM, Algorithm::RandomRay}) {
    EXPECT_EQ(parse_algorithm(to_string(a)), a);
  }
  EXPECT_THROW(parse_algorithm("hmc"), InvalidParameterError);
}
