#pragma once

#include "imtm/linalg.hpp"
#include "imtm/proposals.hpp"
#include "imtm/rng.hpp"
#include "imtm/targets.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace imtm {

enum class LambdaKind {
  ConstOne,      // lambda = 1
  Harmonic,      // lambda = 2 / (T(x,y) + T(y,x))
  PowerProduct,  // lambda = (T(x,y) T(y,x))^{-alpha}
};

/// Symmetric factor lambda_j(x, y) in the selection weights, optionally
/// multiplied by the population frequency nu_j and by a fixed per-slot factor.
struct LambdaPolicy {
  LambdaKind kind = LambdaKind::ConstOne;
  double alpha = 1.0;
  bool nu_weighted = false;
  /// Constant per-slot multipliers (empty means 1 for every slot).
  std::vector<double> slot_factors;

  static LambdaPolicy const_one() { return {LambdaKind::ConstOne, 1.0, false, {}}; }
  static LambdaPolicy harmonic() { return {LambdaKind::Harmonic, 1.0, false, {}}; }
  static LambdaPolicy power_product(double alpha = 1.0) { return {LambdaKind::PowerProduct, alpha, false, {}}; }
  LambdaPolicy with_nu() const {
    LambdaPolicy p = *this;
    p.nu_weighted = true;
    return p;
  }

  double slot_factor(std::size_t slot) const { return slot_factors.empty() ? 1.0 : slot_factors.at(slot); }
  std::string to_string() const;
};

std::string to_string(LambdaKind kind);
LambdaKind parse_lambda_kind(const std::string& text);

/// lambda for transition densities t_xy = T(x, y) and t_yx = T(y, x).
/// Throws DegenerateError on a zero denominator.
double lambda_value(const LambdaPolicy& policy, double t_xy, double t_yx, double nu = 1.0);

/// Log-space lambda; -inf for a degenerate denominator or a zero factor.
double log_lambda(const LambdaPolicy& policy, double log_t_xy, double log_t_yx, double log_factor);

struct TrialWeight {
  /// log w; -inf encodes an exact zero weight.
  double log_value = 0.0;
  /// The lambda denominator vanished and the weight was forced to zero.
  bool degenerate = false;

  bool zero() const { return log_value == -std::numeric_limits<double>::infinity(); }
};

/// log w_j(y, x) = log pi(y) + log T_j(y -> x) + log lambda_j(y, x).
///
/// `ctx_x` conditions the kernel on the state x (forward move), `ctx_y` on y.
/// T_j(y -> x) is the density of x under the kernel conditioned at y.
/// Off-support y yields a zero weight, never an exception.
TrialWeight trial_weight(const TargetDensity& target, const ProposalKernel& kernel, const LambdaPolicy& policy,
                         const Vector& y, const ConditioningContext& ctx_x, const ConditioningContext& ctx_y,
                         double log_factor = 0.0);

/// Draws an index with probability proportional to exp(log_weights) using a
/// single uniform and cumulative inversion. nullopt when every weight is zero.
std::optional<std::size_t> select_trial(RngStream& rng, std::span<const double> log_weights);

struct AcceptanceRatio {
  double rho = 0.0;
  /// Reference sum was zero while the forward sum was positive.
  bool degenerate = false;
};

/// min(1, sum(forward) / sum(reference)) evaluated in log space.
AcceptanceRatio acceptance_ratio(std::span<const double> forward_log_weights,
                                 std::span<const double> reference_log_weights);

/// Fraction of chains that selected each proposal slot in the last iteration.
class NuTracker {
 public:
  NuTracker(std::size_t slots, std::size_t chains);

  /// `selected` holds one 1-based slot index per chain; 0 marks a chain that
  /// made no selection (all trial weights zero) and is not counted. When no
  /// chain selected anything the previous frequencies are kept.
  const std::vector<double>& update(std::span<const std::size_t> selected);
  const std::vector<double>& nu() const noexcept { return nu_; }
  std::size_t slots() const noexcept { return nu_.size(); }
  std::size_t chains() const noexcept { return chains_; }

 private:
  std::vector<double> nu_;
  std::size_t chains_;
};

std::vector<double> update_nu(NuTracker& tracker, std::span<const std::size_t> selected);

/// Record of one multiple-try step, indices 0-based.
struct TrialSet {
  std::vector<Vector> trials;
  std::vector<double> forward_log_weights;
  std::optional<std::size_t> selected;
  std::vector<Vector> reference;
  std::vector<double> reference_log_weights;
};

}  // namespace imtm
