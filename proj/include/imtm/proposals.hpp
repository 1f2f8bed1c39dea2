#pragma once

#include "imtm/linalg.hpp"
#include "imtm/rng.hpp"
#include "imtm/targets.hpp"

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace imtm {

/// What a trial kernel may condition on: the current point of the chain being
/// updated, a frozen population snapshot, and an optional anchor chain.
///
/// Holds references only; the caller keeps the referenced points alive.
struct ConditioningContext {
  const Vector* current = nullptr;
  std::span<const Vector> population;
  /// Index of the chain being updated; its snapshot slot reads as `current`.
  std::optional<std::size_t> self;
  std::optional<std::size_t> anchor;
  const Vector* previous = nullptr;

  static ConditioningContext at(const Vector& x) {
    ConditioningContext ctx;
    ctx.current = &x;
    return ctx;
  }

  /// Position of chain k as seen by this context.
  const Vector& position(std::size_t k) const;
  const Vector& anchor_position() const;
  /// Same context with the current slot holding `y` instead.
  ConditioningContext with_current(const Vector& y) const;
};

struct ProposalDescriptor {
  std::string kind;
  std::vector<double> params;

  std::string to_string() const;
};

/// A trial-generating kernel T_j. log_density(y, ctx) is the log density of
/// moving to y from the state described by ctx.
class ProposalKernel {
 public:
  virtual ~ProposalKernel() = default;

  virtual Vector sample(RngStream& rng, const ConditioningContext& ctx) const = 0;
  virtual double log_density(const Vector& y, const ConditioningContext& ctx) const = 0;
  virtual ProposalDescriptor descriptor() const = 0;
  /// True when log_density(y | x) == log_density(x | y) for every pair.
  virtual bool symmetric() const { return false; }
  /// True when the kernel is centred on an anchor chain and needs ctx.anchor.
  virtual bool anchored() const { return false; }
  /// Typical step size, used to pick default initial dispersion.
  virtual double scale() const = 0;
};

using KernelPtr = std::shared_ptr<const ProposalKernel>;

/// y ~ N(x, cov).
class GaussianRWProposal final : public ProposalKernel {
 public:
  explicit GaussianRWProposal(SpdMatrix cov);

  Vector sample(RngStream& rng, const ConditioningContext& ctx) const override;
  double log_density(const Vector& y, const ConditioningContext& ctx) const override;
  ProposalDescriptor descriptor() const override;
  bool symmetric() const override { return true; }
  double scale() const override { return cov_.max_scale(); }

  const SpdMatrix& covariance() const noexcept { return cov_; }

 private:
  SpdMatrix cov_;
};

/// y ~ sum_j alpha_j N(x, cov_j).
class MixtureRWProposal final : public ProposalKernel {
 public:
  MixtureRWProposal(std::vector<double> weights, std::vector<SpdMatrix> covs);

  Vector sample(RngStream& rng, const ConditioningContext& ctx) const override;
  double log_density(const Vector& y, const ConditioningContext& ctx) const override;
  ProposalDescriptor descriptor() const override;
  bool symmetric() const override { return true; }
  double scale() const override;

 private:
  std::vector<double> weights_;
  std::vector<double> log_weights_;
  std::vector<SpdMatrix> covs_;
};

/// y ~ N(position of the anchor chain, cov); ignores the current point.
class AnchoredRWProposal final : public ProposalKernel {
 public:
  explicit AnchoredRWProposal(SpdMatrix cov);

  Vector sample(RngStream& rng, const ConditioningContext& ctx) const override;
  double log_density(const Vector& y, const ConditioningContext& ctx) const override;
  ProposalDescriptor descriptor() const override;
  bool anchored() const override { return true; }
  double scale() const override { return cov_.max_scale(); }

 private:
  SpdMatrix cov_;
};

/// Any kernel re-centred on the anchor chain: samples and densities are those
/// of `base` with the anchor position standing in for the current point.
class AnchoredKernel final : public ProposalKernel {
 public:
  explicit AnchoredKernel(KernelPtr base);

  Vector sample(RngStream& rng, const ConditioningContext& ctx) const override;
  double log_density(const Vector& y, const ConditioningContext& ctx) const override;
  ProposalDescriptor descriptor() const override;
  bool anchored() const override { return true; }
  double scale() const override { return base_->scale(); }

 private:
  KernelPtr base_;
};

/// Integer steps on the grid embedding: y = x + offset with probability p(offset).
/// The offset set must be closed under negation; probabilities may be asymmetric.
class DiscreteStepProposal final : public ProposalKernel {
 public:
  DiscreteStepProposal(std::vector<int> offsets, std::vector<double> probabilities);

  Vector sample(RngStream& rng, const ConditioningContext& ctx) const override;
  double log_density(const Vector& y, const ConditioningContext& ctx) const override;
  ProposalDescriptor descriptor() const override;
  bool symmetric() const override;
  double scale() const override;

 private:
  std::vector<int> offsets_;
  std::vector<double> probabilities_;
};

/// Stochastic over-relaxation block: (y_1, ..., y_{M-1}, x) jointly normal
/// around a centre with covariance V whose off-diagonal blocks are zero except
/// Psi_iM = Sigma_i^{1/2} R_iM Sigma_M^{1/2}.
///
/// Trials are drawn independently from their exact conditional given x,
///   N(c + Psi_iM Sigma_M^{-1} (x - c), Sigma_i - Psi_iM Sigma_M^{-1} Psi_iM^T),
/// which preserves each trial's N(c, Sigma_i) marginal.
class SORBlockProposal {
 public:
  enum class CenterMode { Fixed, PopulationMean };

  /// `trial_covs` holds Sigma_1..Sigma_{M-1}; `current_cov` is Sigma_M.
  /// Throws InvalidParameterError when V is not positive definite.
  SORBlockProposal(std::vector<SpdMatrix> trial_covs, SpdMatrix current_cov, std::vector<Matrix> correlations,
                   Vector center, CenterMode mode = CenterMode::Fixed);

  std::size_t trials() const noexcept { return trial_covs_.size(); }
  std::size_t dim() const noexcept { return current_cov_.dim(); }
  const Matrix& joint_covariance() const noexcept { return joint_; }

  /// Reference centre: the fixed centre, or the snapshot mean excluding the
  /// chain being updated.
  Vector center(const ConditioningContext& ctx) const;
  Vector conditional_mean(std::size_t i, const Vector& x, const Vector& center) const;
  const SpdMatrix& conditional_covariance(std::size_t i) const { return cond_covs_[i]; }

  std::vector<Vector> sample_block(RngStream& rng, const ConditioningContext& ctx) const;
  /// Per-trial kernel view for use as an MTM slot.
  KernelPtr trial_kernel(std::size_t i) const;

 private:
  std::vector<SpdMatrix> trial_covs_;
  SpdMatrix current_cov_;
  std::vector<Matrix> correlations_;
  Vector center_;
  CenterMode mode_;
  Matrix joint_;
  std::vector<Matrix> gains_;
  std::vector<SpdMatrix> cond_covs_;
};

std::vector<Vector> sor_sample_block(const SORBlockProposal& k, RngStream& rng, const ConditioningContext& ctx);

/// y = x + r e with r ~ N(0, sigma2). log_density is the 1-d density of the
/// signed coordinate r; points off the ray raise DegenerateError.
class RayProposal final : public ProposalKernel {
 public:
  RayProposal(Vector direction, double sigma2);

  Vector sample(RngStream& rng, const ConditioningContext& ctx) const override;
  double log_density(const Vector& y, const ConditioningContext& ctx) const override;
  ProposalDescriptor descriptor() const override;
  bool symmetric() const override { return true; }
  double scale() const override;

  const Vector& direction() const noexcept { return direction_; }

 private:
  Vector direction_;
  double sigma2_;
};

/// Unit vector from `anchor` toward `mode`; DegenerateError when they coincide.
Vector ray_direction(const Vector& mode, const Vector& anchor);

struct LineSearchConfig {
  double initial_step = 0.1;
  double tolerance = 1e-6;
  double max_abs_r = 1e3;
  /// Also scan [-scan_half_width, scan_half_width] on a uniform grid and keep
  /// the best local maximum; finds the global slice mode at extra cost.
  bool global_scan = false;
  double scan_half_width = 50.0;
  std::size_t scan_points = 2001;
};

struct LineSearchResult {
  Vector point;
  double r = 0.0;
  double log_density = 0.0;
  /// False when no bracket was found within |r| <= max_abs_r.
  bool bracketed = true;
};

/// Maximizes r -> log pi(x + r u) by bracketing and golden-section search.
LineSearchResult line_search_mode(const TargetDensity& target, const Vector& x, const Vector& u,
                                  const LineSearchConfig& config = {});

}  // namespace imtm
