#include "imtm/proposals.hpp"

#include "imtm/distributions.hpp"
#include "imtm/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace imtm {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

const Vector& require_current(const ConditioningContext& ctx) {
  if (ctx.current == nullptr) {
    throw InvalidParameterError("conditioning context has no current point");
  }
  return *ctx.current;
}

std::vector<double> covariance_params(const SpdMatrix& m) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(m.matrix().size()));
  for (Eigen::Index i = 0; i < m.matrix().rows(); ++i) {
    for (Eigen::Index j = 0; j < m.matrix().cols(); ++j) {
      out.push_back(m.matrix()(i, j));
    }
  }
  return out;
}

/// One trial slot of an SOR block.
class SorTrialKernel final : public ProposalKernel {
 public:
  SorTrialKernel(Matrix gain, SpdMatrix cond_cov, Vector center, SORBlockProposal::CenterMode mode)
      : gain_(std::move(gain)), cond_cov_(std::move(cond_cov)), center_(std::move(center)), mode_(mode) {}

  Vector sample(RngStream& rng, const ConditioningContext& ctx) const override {
    return mvn_sample(rng, mean(ctx), cond_cov_);
  }
  double log_density(const Vector& y, const ConditioningContext& ctx) const override {
    return mvn_logpdf(y, mean(ctx), cond_cov_);
  }
  ProposalDescriptor descriptor() const override { return {"sor-trial", covariance_params(cond_cov_)}; }
  double scale() const override { return cond_cov_.max_scale(); }

 private:
  Vector mean(const ConditioningContext& ctx) const {
    const Vector& x = require_current(ctx);
    Vector c = center_;
    if (mode_ == SORBlockProposal::CenterMode::PopulationMean) {
      c = Vector::Zero(x.size());
      std::size_t count = 0;
      for (std::size_t k = 0; k < ctx.population.size(); ++k) {
        if (ctx.self && k == *ctx.self) {
          continue;
        }
        c += ctx.population[k];
        ++count;
      }
      if (count == 0) {
        c = center_;
      } else {
        c /= static_cast<double>(count);
      }
    }
    return c + gain_ * (x - c);
  }

  Matrix gain_;
  SpdMatrix cond_cov_;
  Vector center_;
  SORBlockProposal::CenterMode mode_;
};

}  // namespace

const Vector& ConditioningContext::position(std::size_t k) const {
  if (self && k == *self) {
    return require_current(*this);
  }
  if (k >= population.size()) {
    throw InvalidParameterError("conditioning context: chain index out of range");
  }
  return population[k];
}

const Vector& ConditioningContext::anchor_position() const {
  if (!anchor) {
    throw InvalidParameterError("anchored kernel used without an anchor index");
  }
  return position(*anchor);
}

ConditioningContext ConditioningContext::with_current(const Vector& y) const {
  ConditioningContext ctx = *this;
  ctx.current = &y;
  return ctx;
}

std::string ProposalDescriptor::to_string() const {
  std::ostringstream out;
  out << kind;
  for (const double p : params) {
    out << ' ' << p;
  }
  return out.str();
}

// ---------------------------------------------------------------------------

GaussianRWProposal::GaussianRWProposal(SpdMatrix cov) : cov_(std::move(cov)) {}

Vector GaussianRWProposal::sample(RngStream& rng, const ConditioningContext& ctx) const {
  return mvn_sample(rng, require_current(ctx), cov_);
}

double GaussianRWProposal::log_density(const Vector& y, const ConditioningContext& ctx) const {
  return mvn_logpdf(y, require_current(ctx), cov_);
}

ProposalDescriptor GaussianRWProposal::descriptor() const { return {"rw", covariance_params(cov_)}; }

MixtureRWProposal::MixtureRWProposal(std::vector<double> weights, std::vector<SpdMatrix> covs)
    : weights_(std::move(weights)), covs_(std::move(covs)) {
  if (weights_.empty() || weights_.size() != covs_.size()) {
    throw DimensionError("MixtureRWProposal: weights and covariances must have equal non-zero length");
  }
  const double total = std::accumulate(weights_.begin(), weights_.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-12) {
    throw InvalidParameterError("MixtureRWProposal: weights must sum to 1");
  }
  for (const double w : weights_) {
    if (!(w > 0.0)) {
      throw InvalidParameterError("MixtureRWProposal: weights must be positive");
    }
    log_weights_.push_back(std::log(w));
  }
}

Vector MixtureRWProposal::sample(RngStream& rng, const ConditioningContext& ctx) const {
  double u = rng.uniform();
  std::size_t k = 0;
  while (k + 1 < weights_.size() && u >= weights_[k]) {
    u -= weights_[k];
    ++k;
  }
  return mvn_sample(rng, require_current(ctx), covs_[k]);
}

double MixtureRWProposal::log_density(const Vector& y, const ConditioningContext& ctx) const {
  const Vector& x = require_current(ctx);
  std::vector<double> terms(weights_.size());
  for (std::size_t k = 0; k < weights_.size(); ++k) {
    terms[k] = log_weights_[k] + mvn_logpdf(y, x, covs_[k]);
  }
  return log_sum_exp(terms);
}

ProposalDescriptor MixtureRWProposal::descriptor() const {
  ProposalDescriptor d{"mixture-rw", weights_};
  for (const auto& c : covs_) {
    const auto p = covariance_params(c);
    d.params.insert(d.params.end(), p.begin(), p.end());
  }
  return d;
}

double MixtureRWProposal::scale() const {
  double s = 0.0;
  for (const auto& c : covs_) {
    s = std::max(s, c.max_scale());
  }
  return s;
}

AnchoredRWProposal::AnchoredRWProposal(SpdMatrix cov) : cov_(std::move(cov)) {}

Vector AnchoredRWProposal::sample(RngStream& rng, const ConditioningContext& ctx) const {
  return mvn_sample(rng, ctx.anchor_position(), cov_);
}

double AnchoredRWProposal::log_density(const Vector& y, const ConditioningContext& ctx) const {
  return mvn_logpdf(y, ctx.anchor_position(), cov_);
}

ProposalDescriptor AnchoredRWProposal::descriptor() const { return {"anchored-rw", covariance_params(cov_)}; }

AnchoredKernel::AnchoredKernel(KernelPtr base) : base_(std::move(base)) {
  if (!base_) {
    throw InvalidParameterError("AnchoredKernel: base kernel is null");
  }
}

Vector AnchoredKernel::sample(RngStream& rng, const ConditioningContext& ctx) const {
  return base_->sample(rng, ConditioningContext::at(ctx.anchor_position()));
}

double AnchoredKernel::log_density(const Vector& y, const ConditioningContext& ctx) const {
  return base_->log_density(y, ConditioningContext::at(ctx.anchor_position()));
}

ProposalDescriptor AnchoredKernel::descriptor() const {
  ProposalDescriptor d = base_->descriptor();
  d.kind = "anchored-" + d.kind;
  return d;
}

// ---------------------------------------------------------------------------

DiscreteStepProposal::DiscreteStepProposal(std::vector<int> offsets, std::vector<double> probabilities)
    : offsets_(std::move(offsets)), probabilities_(std::move(probabilities)) {
  if (offsets_.empty() || offsets_.size() != probabilities_.size()) {
    throw DimensionError("DiscreteStepProposal: offsets and probabilities must have equal non-zero length");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < offsets_.size(); ++i) {
    if (!(probabilities_[i] > 0.0)) {
      throw InvalidParameterError("DiscreteStepProposal: probabilities must be positive");
    }
    total += probabilities_[i];
    if (std::find(offsets_.begin(), offsets_.end(), -offsets_[i]) == offsets_.end()) {
      throw InvalidParameterError("DiscreteStepProposal: offset set must be closed under negation");
    }
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw InvalidParameterError("DiscreteStepProposal: probabilities must sum to 1");
  }
}

Vector DiscreteStepProposal::sample(RngStream& rng, const ConditioningContext& ctx) const {
  const Vector& x = require_current(ctx);
  double u = rng.uniform();
  std::size_t k = 0;
  while (k + 1 < offsets_.size() && u >= probabilities_[k]) {
    u -= probabilities_[k];
    ++k;
  }
  Vector y = x;
  y[0] += offsets_[k];
  return y;
}

double DiscreteStepProposal::log_density(const Vector& y, const ConditioningContext& ctx) const {
  const Vector& x = require_current(ctx);
  const double step = y[0] - x[0];
  for (std::size_t k = 0; k < offsets_.size(); ++k) {
    if (std::abs(step - offsets_[k]) < 1e-9) {
      return std::log(probabilities_[k]);
    }
  }
  return kNegInf;
}

ProposalDescriptor DiscreteStepProposal::descriptor() const {
  ProposalDescriptor d{"discrete-step", {}};
  for (std::size_t k = 0; k < offsets_.size(); ++k) {
    d.params.push_back(offsets_[k]);
    d.params.push_back(probabilities_[k]);
  }
  return d;
}

bool DiscreteStepProposal::symmetric() const {
  for (std::size_t i = 0; i < offsets_.size(); ++i) {
    const auto j = static_cast<std::size_t>(std::find(offsets_.begin(), offsets_.end(), -offsets_[i]) - offsets_.begin());
    if (probabilities_[i] != probabilities_[j]) {
      return false;
    }
  }
  return true;
}

double DiscreteStepProposal::scale() const {
  int m = 0;
  for (const int o : offsets_) {
    m = std::max(m, std::abs(o));
  }
  return m;
}

// ---------------------------------------------------------------------------

SORBlockProposal::SORBlockProposal(std::vector<SpdMatrix> trial_covs, SpdMatrix current_cov,
                                   std::vector<Matrix> correlations, Vector center, CenterMode mode)
    : trial_covs_(std::move(trial_covs)),
      current_cov_(std::move(current_cov)),
      correlations_(std::move(correlations)),
      center_(std::move(center)),
      mode_(mode) {
  const std::size_t m = trial_covs_.size();
  const auto d = static_cast<Eigen::Index>(current_cov_.dim());
  if (m == 0 || correlations_.size() != m || center_.size() != d) {
    throw DimensionError("SORBlockProposal: need one correlation matrix per trial and a centre of matching dimension");
  }
  const Matrix root_m = symmetric_sqrt(current_cov_.matrix());
  const auto size = static_cast<Eigen::Index>(m + 1) * d;
  joint_ = Matrix::Zero(size, size);
  const Eigen::Index last = static_cast<Eigen::Index>(m) * d;
  joint_.block(last, last, d, d) = current_cov_.matrix();
  double max_corr = 0.0;
  std::vector<Matrix> psis;
  for (std::size_t i = 0; i < m; ++i) {
    if (trial_covs_[i].dim() != current_cov_.dim() || correlations_[i].rows() != d || correlations_[i].cols() != d) {
      throw DimensionError("SORBlockProposal: block dimensions differ");
    }
    max_corr = std::max(max_corr, correlations_[i].cwiseAbs().maxCoeff());
    const Matrix psi = symmetric_sqrt(trial_covs_[i].matrix()) * correlations_[i] * root_m;
    const auto off = static_cast<Eigen::Index>(i) * d;
    joint_.block(off, off, d, d) = trial_covs_[i].matrix();
    joint_.block(off, last, d, d) = psi;
    joint_.block(last, off, d, d) = psi.transpose();
    psis.push_back(psi);
  }
  try {
    (void)cholesky(joint_);
  } catch (const DecompositionError&) {
    std::ostringstream msg;
    msg << "SORBlockProposal: joint covariance V is not positive definite (largest |R_iM| entry " << max_corr
        << " across " << m << " trial block(s))";
    throw InvalidParameterError(msg.str());
  }
  for (std::size_t i = 0; i < m; ++i) {
    Matrix gain(d, d);
    for (Eigen::Index c = 0; c < d; ++c) {
      // gain = Psi Sigma_M^{-1}; solve row-wise through the symmetric inverse
      gain.row(c) = current_cov_.solve(psis[i].row(c).transpose()).transpose();
    }
    Matrix cond = trial_covs_[i].matrix() - gain * psis[i].transpose();
    cond = 0.5 * (cond + cond.transpose());
    gains_.push_back(std::move(gain));
    cond_covs_.emplace_back(std::move(cond));
  }
}

Vector SORBlockProposal::center(const ConditioningContext& ctx) const {
  if (mode_ == CenterMode::Fixed) {
    return center_;
  }
  Vector c = Vector::Zero(center_.size());
  std::size_t count = 0;
  for (std::size_t k = 0; k < ctx.population.size(); ++k) {
    if (ctx.self && k == *ctx.self) {
      continue;
    }
    c += ctx.population[k];
    ++count;
  }
  return count == 0 ? center_ : Vector(c / static_cast<double>(count));
}

Vector SORBlockProposal::conditional_mean(std::size_t i, const Vector& x, const Vector& c) const {
  return c + gains_.at(i) * (x - c);
}

std::vector<Vector> SORBlockProposal::sample_block(RngStream& rng, const ConditioningContext& ctx) const {
  const Vector& x = require_current(ctx);
  const Vector c = center(ctx);
  std::vector<Vector> out;
  out.reserve(trials());
  for (std::size_t i = 0; i < trials(); ++i) {
    out.push_back(mvn_sample(rng, conditional_mean(i, x, c), cond_covs_[i]));
  }
  return out;
}

KernelPtr SORBlockProposal::trial_kernel(std::size_t i) const {
  return std::make_shared<SorTrialKernel>(gains_.at(i), cond_covs_.at(i), center_, mode_);
}

std::vector<Vector> sor_sample_block(const SORBlockProposal& k, RngStream& rng, const ConditioningContext& ctx) {
  return k.sample_block(rng, ctx);
}

// ---------------------------------------------------------------------------

RayProposal::RayProposal(Vector direction, double sigma2) : direction_(std::move(direction)), sigma2_(sigma2) {
  const double norm = direction_.norm();
  if (!(norm > 0.0) || std::abs(norm - 1.0) > 1e-9) {
    throw InvalidParameterError("RayProposal: direction must be a unit vector");
  }
  if (!(sigma2_ > 0.0)) {
    throw InvalidParameterError("RayProposal: sigma^2 must be positive");
  }
}

Vector RayProposal::sample(RngStream& rng, const ConditioningContext& ctx) const {
  return require_current(ctx) + rng.normal(0.0, std::sqrt(sigma2_)) * direction_;
}

double RayProposal::log_density(const Vector& y, const ConditioningContext& ctx) const {
  const Vector diff = y - require_current(ctx);
  const double r = diff.dot(direction_);
  const double perp = (diff - r * direction_).norm();
  if (perp > 1e-9 * std::max(1.0, diff.norm())) {
    throw DegenerateError("RayProposal: point is off the ray");
  }
  return normal_logpdf(r, 0.0, sigma2_);
}

ProposalDescriptor RayProposal::descriptor() const {
  ProposalDescriptor d{"ray", {sigma2_}};
  d.params.insert(d.params.end(), direction_.data(), direction_.data() + direction_.size());
  return d;
}

double RayProposal::scale() const { return std::sqrt(sigma2_); }

Vector ray_direction(const Vector& mode, const Vector& anchor) {
  const Vector diff = mode - anchor;
  const double norm = diff.norm();
  if (!(norm > 1e-12 * std::max(1.0, anchor.norm()))) {
    throw DegenerateError("ray_direction: mode and anchor coincide");
  }
  return diff / norm;
}

}  // namespace imtm
