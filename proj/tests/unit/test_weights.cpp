#include "imtm/error.hpp"
#include "imtm/multiple_try.hpp"
#include "imtm/proposals.hpp"
#include "imtm/targets.hpp"
#include "imtm/weights.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>

using namespace imtm;

TEST(Lambda, ValuesOfEachPolicy) {
  EXPECT_DOUBLE_EQ(lambda_value(LambdaPolicy::const_one(), 0.2, 0.6), 1.0);
  EXPECT_DOUBLE_EQ(lambda_value(LambdaPolicy::harmonic(), 0.2, 0.6), 2.0 / 0.8);
  EXPECT_DOUBLE_EQ(lambda_value(LambdaPolicy::power_product(1.0), 0.2, 0.5), 10.0);
  EXPECT_NEAR(lambda_value(LambdaPolicy::power_product(0.5), 0.25, 0.25), 4.0, 1e-14);
  EXPECT_DOUBLE_EQ(lambda_value(LambdaPolicy::harmonic().with_nu(), 0.5, 0.5, 0.3), 0.6);
  EXPECT_THROW(lambda_value(LambdaPolicy::harmonic(), 0.0, 0.0), DegenerateError);
}

TEST(Lambda, SymmetricProperty) {
  RngStream rng(1);
  for (int i = 0; i < 1000; ++i) {
    const double a = std::exp(3 * rng.normal());
    const double b = std::exp(3 * rng.normal());
    for (const auto& p : {LambdaPolicy::harmonic(), LambdaPolicy::power_product(0.3)}) {
      ASSERT_EQ(lambda_value(p, a, b), lambda_value(p, b, a));
      ASSERT_EQ(log_lambda(p, std::log(a), std::log(b), 0.0), log_lambda(p, std::log(b), std::log(a), 0.0));
    }
  }
}

TEST(Lambda, LogMatchesLinear) {
  const double a = 0.013;
  const double b = 2.5;
  for (const auto& p : {LambdaPolicy::const_one(), LambdaPolicy::harmonic(), LambdaPolicy::power_product(0.7)}) {
    EXPECT_NEAR(log_lambda(p, std::log(a), std::log(b), std::log(0.25)), std::log(0.25 * lambda_value(p, a, b)),
                1e-12);
  }
  EXPECT_EQ(log_lambda(LambdaPolicy::harmonic(), -INFINITY, -INFINITY, 0.0), -INFINITY);
}

TEST(LambdaKind, RoundTrip) {
  for (const auto k : {LambdaKind::ConstOne, LambdaKind::Harmonic, LambdaKind::PowerProduct}) {
    EXPECT_EQ(parse_lambda_kind(to_string(k)), k);
  }
  EXPECT_THROW(parse_lambda_kind("bogus"), InvalidParameterError);
}

TEST(TrialWeight, MatchesProductFormula) {
  const auto target = make_standard_normal(1);
  const GaussianRWProposal k(SpdMatrix::scaled_identity(1, 2.0));
  const Vector x = Vector::Constant(1, 0.5);
  const Vector y = Vector::Constant(1, -1.0);
  const auto cx = ConditioningContext::at(x);
  const auto cy = ConditioningContext::at(y);
  const double t = std::exp(k.log_density(x, cy));
  const double expected = std::log(std::exp(target->log_density(y)) * t * (2.0 / (2.0 * t)));
  EXPECT_NEAR(trial_weight(*target, k, LambdaPolicy::harmonic(), y, cx, cy).log_value, expected, 1e-12);
}

TEST(TrialWeight, OffSupportIsZeroNotError) {
  const GridTarget g({1.0, 2.0});
  const DiscreteStepProposal k({-1, 1}, {0.5, 0.5});
  const Vector x = g.point(1);
  const Vector y = Vector::Constant(1, 2.0);
  const auto w = trial_weight(g, k, LambdaPolicy::const_one(), y, ConditioningContext::at(x), ConditioningContext::at(y));
  EXPECT_TRUE(w.zero());
}

TEST(SelectTrial, FrequenciesFollowWeights) {
  RngStream rng(2);
  const std::vector<double> lw{std::log(1.0), std::log(3.0), -INFINITY, std::log(6.0)};
  std::vector<int> counts(4, 0);
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    ++counts[select_trial(rng, lw).value()];
  }
  EXPECT_EQ(counts[2], 0);
  EXPECT_NEAR(counts[0] / double(n), 0.1, 0.005);
  EXPECT_NEAR(counts[3] / double(n), 0.6, 0.005);
}

TEST(SelectTrial, AllZeroAndSinglePositive) {
  RngStream rng(3);
  const std::vector<double> none{-INFINITY, -INFINITY};
  EXPECT_FALSE(select_trial(rng, none).has_value());
  // Exactly one positive weight consumes no random numbers.
  RngStream a(4);
  RngStream b(4);
  const std::vector<double> one{-INFINITY, 0.3};
  EXPECT_EQ(select_trial(a, one).value(), 1u);
  EXPECT_EQ(a(), b());
}

TEST(SelectTrial, HugeLogWeightsDoNotOverflow) {
  RngStream rng(5);
  const std::vector<double> lw{1e6, 1e6 + std::log(3.0)};
  int second = 0;
  for (int i = 0; i < 10000; ++i) {
    second += select_trial(rng, lw).value() == 1 ? 1 : 0;
  }
  EXPECT_NEAR(second / 10000.0, 0.75, 0.02);
}

TEST(AcceptanceRatio, RangeAndDegenerateCases) {
  const std::vector<double> f{0.0, std::log(2.0)};
  const std::vector<double> r{std::log(6.0)};
  EXPECT_NEAR(acceptance_ratio(f, r).rho, 0.5, 1e-15);
  EXPECT_DOUBLE_EQ(acceptance_ratio(r, f).rho, 1.0);
  const std::vector<double> zero{-INFINITY};
  const auto d = acceptance_ratio(f, zero);
  EXPECT_DOUBLE_EQ(d.rho, 1.0);
  EXPECT_TRUE(d.degenerate);
  const std::vector<double> big_f{1e5};
  const std::vector<double> big_r{1e5 + 1.0};
  EXPECT_NEAR(acceptance_ratio(big_f, big_r).rho, std::exp(-1.0), 1e-12);
}

TEST(NuTracker, StartsUniformAndNormalizes) {
  NuTracker t(3, 4);
  for (const double v : t.nu()) {
    EXPECT_DOUBLE_EQ(v, 1.0 / 3.0);
  }
  const std::vector<std::size_t> sel{1, 1, 3, 0};
  const auto& nu = t.update(sel);
  EXPECT_DOUBLE_EQ(nu[0], 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(nu[1], 0.0);
  EXPECT_DOUBLE_EQ(nu[2], 1.0 / 3.0);
  const std::vector<std::size_t> none{0, 0, 0, 0};
  EXPECT_DOUBLE_EQ(t.update(none)[0], 2.0 / 3.0);
  const std::vector<std::size_t> bad{4, 0, 0, 0};
  EXPECT_THROW(t.update(bad), InvalidParameterError);
}

TEST(MultipleTryMove, RejectionReturnsBitwiseCopy) {
  const auto target = make_bivariate_mixture();
  const GaussianRWProposal k(SpdMatrix::scaled_identity(2, 100.0));
  std::vector<TrialSlot> slots(3, TrialSlot{&k, std::nullopt, 0.0, std::nullopt});
  RngStream rng(6);
  Vector x(2);
  x << 0.1234567890123, -0.3;
  int rejected = 0;
  for (int i = 0; i < 200; ++i) {
    const auto m = multiple_try_move(rng, *target, slots, LambdaPolicy::const_one(), ConditioningContext::at(x));
    if (!m.accepted) {
      ++rejected;
      ASSERT_EQ(std::memcmp(m.next.data(), x.data(), sizeof(double) * 2), 0);
    }
  }
  EXPECT_GT(rejected, 0);
}

TEST(MultipleTryMove, ReferenceSetHoldsCurrentInSelectedSlot) {
  const auto target = make_standard_normal(1);
  const GaussianRWProposal a(SpdMatrix::scaled_identity(1, 0.5));
  const GaussianRWProposal b(SpdMatrix::scaled_identity(1, 3.0));
  std::vector<TrialSlot> slots{{&a, std::nullopt, 0.0, std::nullopt}, {&b, std::nullopt, 0.0, std::nullopt}};
  RngStream rng(7);
  const Vector x = Vector::Constant(1, 0.7);
  for (int i = 0; i < 50; ++i) {
    TrialSet rec;
    StepCounters c;
    multiple_try_move(rng, *target, slots, LambdaPolicy::harmonic(), ConditioningContext::at(x), &c, &rec);
    ASSERT_TRUE(rec.selected.has_value());
    EXPECT_EQ(rec.reference[*rec.selected][0], 0.7);
    EXPECT_EQ(rec.trials.size(), 2u);
    EXPECT_EQ(c.steps, 1u);
  }
}

TEST(MultipleTryMove, AllZeroWeightsCountAsStuck) {
  const GridTarget g({1.0});
  const DiscreteStepProposal k({-1, 1}, {0.5, 0.5});
  std::vector<TrialSlot> slots(2, TrialSlot{&k, std::nullopt, 0.0, std::nullopt});
  RngStream rng(8);
  const Vector x = g.point(0);
  StepCounters c;
  const auto m = multiple_try_move(rng, g, slots, LambdaPolicy::const_one(), ConditioningContext::at(x), &c);
  EXPECT_FALSE(m.accepted);
  EXPECT_FALSE(m.selected.has_value());
  EXPECT_EQ(c.stuck, 1u);
}
