#pragma once

#include "imtm/linalg.hpp"
#include "imtm/rng.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace imtm {

/// Unnormalized log-density on a subset of R^d. Implementations are immutable
/// and safe to evaluate from many threads at once.
class TargetDensity {
 public:
  virtual ~TargetDensity() = default;

  virtual std::size_t dim() const = 0;
  /// Finite on the support, -inf outside it.
  virtual double log_density(const Vector& x) const = 0;
  virtual bool in_support(const Vector& x) const;
  /// Analytic gradient of log_density, if the target provides one.
  virtual std::optional<Vector> gradient(const Vector& x) const;
  virtual std::string name() const = 0;
};

using TargetPtr = std::shared_ptr<const TargetDensity>;

/// Central finite-difference gradient of the log-density.
Vector numerical_gradient(const TargetDensity& target, const Vector& x, double step = 1e-5);
/// Analytic gradient when available, finite differences otherwise.
Vector gradient_or_numerical(const TargetDensity& target, const Vector& x);

class GaussianMixtureTarget final : public TargetDensity {
 public:
  GaussianMixtureTarget(std::vector<double> weights, std::vector<Vector> means, std::vector<SpdMatrix> covariances);

  std::size_t dim() const override { return dim_; }
  double log_density(const Vector& x) const override;
  std::optional<Vector> gradient(const Vector& x) const override;
  std::string name() const override { return "gaussian-mixture"; }

  const std::vector<double>& weights() const noexcept { return weights_; }
  const std::vector<Vector>& means() const noexcept { return means_; }
  const std::vector<SpdMatrix>& covariances() const noexcept { return covariances_; }
  Vector mixture_mean() const;
  /// Exact draw: component by weight, then the component normal.
  Vector sample(RngStream& rng) const;

 private:
  std::size_t dim_;
  std::vector<double> weights_;
  std::vector<double> log_weights_;
  std::vector<Vector> means_;
  std::vector<SpdMatrix> covariances_;
};

double mixture_log_density(const GaussianMixtureTarget& target, const Vector& x);

/// (1/3) N((0,0), diag(0.1, 0.5)) + (2/3) N((10,10), diag(0.5, 0.1)).
std::shared_ptr<GaussianMixtureTarget> make_bivariate_mixture();
/// (1/3) N(3*1, S1) + (2/3) N(10*1, S2) with S_k ~ Wishart(dof, I_dim).
std::shared_ptr<GaussianMixtureTarget> make_wishart_mixture(RngStream& rng, std::size_t dim = 20, double dof = 21.0);
std::shared_ptr<GaussianMixtureTarget> make_standard_normal(std::size_t dim);

/// pi^xi for an exponent xi in (0, 1].
class TemperedTarget final : public TargetDensity {
 public:
  TemperedTarget(TargetPtr base, double exponent);

  std::size_t dim() const override { return base_->dim(); }
  double log_density(const Vector& x) const override;
  bool in_support(const Vector& x) const override { return base_->in_support(x); }
  std::optional<Vector> gradient(const Vector& x) const override;
  std::string name() const override { return "tempered(" + base_->name() + ")"; }

  double exponent() const noexcept { return exponent_; }
  const TargetDensity& base() const noexcept { return *base_; }

 private:
  TargetPtr base_;
  double exponent_;
};

struct LohObservation {
  int x = 0;
  int n = 0;
};

/// Parameter order: (eta, pi1, pi2, gamma).
class BetaBinomialPosterior final : public TargetDensity {
 public:
  static constexpr double kGammaBound = 30.0;

  explicit BetaBinomialPosterior(std::vector<LohObservation> observations);

  std::size_t dim() const override { return 4; }
  double log_density(const Vector& theta) const override;
  bool in_support(const Vector& theta) const override;
  std::string name() const override { return "beta-binomial"; }

  const std::vector<LohObservation>& observations() const noexcept { return observations_; }

 private:
  std::vector<LohObservation> observations_;
  std::vector<double> log_choose_;
};

/// Sum over observations of the log two-component (binomial, beta-binomial)
/// mixture likelihood; -inf outside the prior box.
double betabin_log_posterior(const BetaBinomialPosterior& posterior, const Vector& theta);
/// exp(gamma) / (2 (1 + exp(gamma))).
double betabin_omega2(double gamma);
/// Draws `count` observations from the model with n_j uniform in [n_min, n_max].
std::vector<LohObservation> simulate_loh(RngStream& rng, std::size_t count, double eta, double pi1, double pi2,
                                         double gamma, int n_min, int n_max);

/// Synthetic stand-in for the LOH data: 40 observations at eta = 0.9,
/// pi1 = 0.2, pi2 = 0.8, gamma = 0 with n_j uniform on [15, 35].
std::vector<LohObservation> synthetic_loh(std::uint64_t seed);

/// Finite state space embedded in R^1 at 0, 1, ..., K-1.
class GridTarget final : public TargetDensity {
 public:
  explicit GridTarget(std::vector<double> masses);

  std::size_t dim() const override { return 1; }
  double log_density(const Vector& x) const override;
  std::string name() const override { return "grid"; }

  std::size_t size() const noexcept { return masses_.size(); }
  const std::vector<double>& masses() const noexcept { return masses_; }
  /// State index of a point on the grid, nullopt off the grid.
  std::optional<std::size_t> state_of(const Vector& x) const;
  Vector point(std::size_t state) const;

 private:
  std::vector<double> masses_;
};

std::vector<double> grid_normalize(const GridTarget& grid);

/// Target defined by a callable; used for one-dimensional conditional slices.
class FunctionTarget final : public TargetDensity {
 public:
  using LogDensityFn = std::function<double(const Vector&)>;

  FunctionTarget(std::size_t dim, LogDensityFn log_density, std::string name = "function");

  std::size_t dim() const override { return dim_; }
  double log_density(const Vector& x) const override { return fn_(x); }
  std::string name() const override { return name_; }

 private:
  std::size_t dim_;
  LogDensityFn fn_;
  std::string name_;
};

}  // namespace imtm
