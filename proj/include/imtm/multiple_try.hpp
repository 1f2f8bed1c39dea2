#pragma once

#include "imtm/linalg.hpp"
#include "imtm/proposals.hpp"
#include "imtm/rng.hpp"
#include "imtm/targets.hpp"
#include "imtm/weights.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace imtm {

/// One trial slot of a multiple-try move.
struct TrialSlot {
  const ProposalKernel* kernel = nullptr;
  /// Anchor chain for anchored kernels, as an index into the context snapshot.
  std::optional<std::size_t> anchor;
  /// log of the constant slot factor (alpha_j, nu_j); -inf disables the slot.
  double log_factor = 0.0;
  /// Slot label reported as the selected index; defaults to the slot position.
  std::optional<std::size_t> label;
};

/// Tallies of exceptional events. Plain counters so each chain can own one.
struct StepCounters {
  std::size_t steps = 0;
  std::size_t accepted = 0;
  /// Every forward weight was zero; the step counted as a rejection.
  std::size_t stuck = 0;
  /// Reference sum was zero with a positive forward sum; accepted with rho = 1.
  std::size_t degenerate_ratio = 0;
  /// Trials whose lambda denominator vanished.
  std::size_t degenerate_weights = 0;
  /// Ray directions that could not be formed after all retries.
  std::size_t degenerate_directions = 0;
  /// Non-finite conditional scale in a Gibbs draw.
  std::size_t overflow = 0;

  StepCounters& operator+=(const StepCounters& other);
  double acceptance_rate() const { return steps == 0 ? 0.0 : static_cast<double>(accepted) / static_cast<double>(steps); }
};

struct MoveResult {
  Vector next;
  bool accepted = false;
  /// Label of the selected slot; nullopt when every trial weight was zero.
  std::optional<std::size_t> selected;
  double rho = 0.0;
};

/// One multiple-try Metropolis transition with per-slot kernels.
///
/// `base` carries the current point, the population snapshot and the self
/// index; each slot adds its anchor. Forward trials are drawn from the slot
/// kernels conditioned at x, the reference trials from the same kernels
/// conditioned at the selected y, with x itself in the selected slot.
/// A rejected move returns a bitwise copy of x.
MoveResult multiple_try_move(RngStream& rng, const TargetDensity& target, std::span<const TrialSlot> slots,
                             const LambdaPolicy& policy, const ConditioningContext& base,
                             StepCounters* counters = nullptr, TrialSet* record = nullptr);

}  // namespace imtm
