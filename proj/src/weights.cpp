#include "imtm/weights.hpp"

#include "imtm/distributions.hpp"
#include "imtm/error.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace imtm {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kLog2 = 0.69314718055994530942;

}  // namespace

std::string to_string(LambdaKind kind) {
  switch (kind) {
    case LambdaKind::ConstOne:
      return "const";
    case LambdaKind::Harmonic:
      return "harmonic";
    case LambdaKind::PowerProduct:
      return "power";
  }
  return "const";
}

LambdaKind parse_lambda_kind(const std::string& text) {
  if (text == "const" || text == "one") {
    return LambdaKind::ConstOne;
  }
  if (text == "harmonic") {
    return LambdaKind::Harmonic;
  }
  if (text == "power" || text == "power-product") {
    return LambdaKind::PowerProduct;
  }
  throw InvalidParameterError("unknown lambda policy '" + text + "' (expected const, harmonic or power)");
}

std::string LambdaPolicy::to_string() const {
  std::ostringstream out;
  out << imtm::to_string(kind);
  if (kind == LambdaKind::PowerProduct) {
    out << "(alpha=" << alpha << ")";
  }
  if (nu_weighted) {
    out << "+nu";
  }
  return out.str();
}

double lambda_value(const LambdaPolicy& policy, double t_xy, double t_yx, double nu) {
  if (t_xy < 0.0 || t_yx < 0.0 || nu < 0.0) {
    throw InvalidParameterError("lambda_value: densities and nu must be non-negative");
  }
  const double factor = policy.nu_weighted ? nu : 1.0;
  switch (policy.kind) {
    case LambdaKind::ConstOne:
      return factor;
    case LambdaKind::Harmonic:
      if (!(t_xy + t_yx > 0.0)) {
        throw DegenerateError("lambda_value: harmonic denominator is zero");
      }
      return factor * 2.0 / (t_xy + t_yx);
    case LambdaKind::PowerProduct:
      if (!(t_xy * t_yx > 0.0)) {
        throw DegenerateError("lambda_value: power-product denominator is zero");
      }
      return factor * std::pow(t_xy * t_yx, -policy.alpha);
  }
  return factor;
}

double log_lambda(const LambdaPolicy& policy, double log_t_xy, double log_t_yx, double log_factor) {
  switch (policy.kind) {
    case LambdaKind::ConstOne:
      return log_factor;
    case LambdaKind::Harmonic: {
      const double denom = log_sum_exp(log_t_xy, log_t_yx);
      if (!std::isfinite(denom)) {
        return kNegInf;
      }
      return log_factor + kLog2 - denom;
    }
    case LambdaKind::PowerProduct: {
      const double denom = log_t_xy + log_t_yx;
      if (!std::isfinite(denom)) {
        return kNegInf;
      }
      return log_factor - policy.alpha * denom;
    }
  }
  return log_factor;
}

TrialWeight trial_weight(const TargetDensity& target, const ProposalKernel& kernel, const LambdaPolicy& policy,
                         const Vector& y, const ConditioningContext& ctx_x, const ConditioningContext& ctx_y,
                         double log_factor) {
  const double log_pi = target.log_density(y);
  if (!std::isfinite(log_pi) || log_factor == kNegInf) {
    return {kNegInf, false};
  }
  const double log_t_yx = kernel.log_density(*ctx_x.current, ctx_y);
  if (!std::isfinite(log_t_yx) && policy.kind == LambdaKind::ConstOne) {
    return {kNegInf, false};
  }
  const double log_t_xy = policy.kind == LambdaKind::ConstOne ? 0.0 : kernel.log_density(y, ctx_x);
  const double log_lam = log_lambda(policy, log_t_xy, log_t_yx, log_factor);
  if (log_lam == kNegInf) {
    return {kNegInf, policy.kind != LambdaKind::ConstOne};
  }
  double value = log_pi + log_t_yx + log_lam;
  if (std::isnan(value)) {
    value = kNegInf;
  }
  return {value, false};
}

std::optional<std::size_t> select_trial(RngStream& rng, std::span<const double> log_weights) {
  if (log_weights.empty()) {
    return std::nullopt;
  }
  double top = kNegInf;
  for (const double w : log_weights) {
    top = std::max(top, w);
  }
  if (!std::isfinite(top)) {
    return std::nullopt;
  }
  double total = 0.0;
  std::size_t positive = 0;
  std::size_t last = 0;
  for (std::size_t j = 0; j < log_weights.size(); ++j) {
    const double p = std::exp(log_weights[j] - top);
    total += p;
    if (p > 0.0) {
      ++positive;
      last = j;
    }
  }
  // A single positive weight needs no uniform; this keeps M = 1 on the same
  // random stream as plain Metropolis-Hastings.
  if (positive == 1) {
    return last;
  }
  const double u = rng.uniform() * total;
  double cumulative = 0.0;
  std::optional<std::size_t> last_positive;
  for (std::size_t j = 0; j < log_weights.size(); ++j) {
    const double p = std::exp(log_weights[j] - top);
    if (p > 0.0) {
      last_positive = j;
    }
    cumulative += p;
    if (u < cumulative && p > 0.0) {
      return j;
    }
  }
  return last_positive;
}

AcceptanceRatio acceptance_ratio(std::span<const double> forward_log_weights,
                                 std::span<const double> reference_log_weights) {
  const double forward = log_sum_exp(forward_log_weights);
  const double reference = log_sum_exp(reference_log_weights);
  if (forward == kNegInf) {
    return {0.0, false};
  }
  if (reference == kNegInf) {
    return {1.0, true};
  }
  const double log_ratio = forward - reference;
  return {log_ratio >= 0.0 ? 1.0 : std::exp(log_ratio), false};
}

NuTracker::NuTracker(std::size_t slots, std::size_t chains) : nu_(slots, 0.0), chains_(chains) {
  if (slots == 0 || chains == 0) {
    throw InvalidParameterError("NuTracker: need at least one slot and one chain");
  }
  // Before any selection every slot is equally plausible.
  for (auto& v : nu_) {
    v = 1.0 / static_cast<double>(slots);
  }
}

const std::vector<double>& NuTracker::update(std::span<const std::size_t> selected) {
  if (selected.size() != chains_) {
    throw DimensionError("NuTracker::update: one selection per chain required");
  }
  std::vector<double> counts(nu_.size(), 0.0);
  double total = 0.0;
  for (const std::size_t j : selected) {
    if (j > nu_.size()) {
      throw InvalidParameterError("NuTracker::update: slot index out of range");
    }
    if (j > 0) {
      counts[j - 1] += 1.0;
      total += 1.0;
    }
  }
  // With no selection at all the previous frequencies stay in force.
  if (total == 0.0) {
    return nu_;
  }
  // Chains without a selection are left out of the denominator so that the
  // frequencies still sum to one.
  for (std::size_t j = 0; j < nu_.size(); ++j) {
    nu_[j] = counts[j] / total;
  }
  return nu_;
}

std::vector<double> update_nu(NuTracker& tracker, std::span<const std::size_t> selected) {
  return tracker.update(selected);
}

}  // namespace imtm
