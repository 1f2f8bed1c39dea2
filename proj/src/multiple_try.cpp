#include "imtm/multiple_try.hpp"

#include "imtm/error.hpp"

#include <cmath>
#include <limits>

namespace imtm {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

TrialWeight safe_weight(const TargetDensity& target, const TrialSlot& slot, const LambdaPolicy& policy,
                        const Vector& y, const ConditioningContext& ctx_state) {
  try {
    return trial_weight(target, *slot.kernel, policy, y, ctx_state, ctx_state.with_current(y), slot.log_factor);
  } catch (const DegenerateError&) {
    return {kNegInf, true};
  }
}

}  // namespace

StepCounters& StepCounters::operator+=(const StepCounters& other) {
  steps += other.steps;
  accepted += other.accepted;
  stuck += other.stuck;
  degenerate_ratio += other.degenerate_ratio;
  degenerate_weights += other.degenerate_weights;
  degenerate_directions += other.degenerate_directions;
  overflow += other.overflow;
  return *this;
}

MoveResult multiple_try_move(RngStream& rng, const TargetDensity& target, std::span<const TrialSlot> slots,
                             const LambdaPolicy& policy, const ConditioningContext& base, StepCounters* counters,
                             TrialSet* record) {
  if (slots.empty()) {
    throw InvalidParameterError("multiple_try_move: at least one trial slot is required");
  }
  if (base.current == nullptr) {
    throw InvalidParameterError("multiple_try_move: context has no current point");
  }
  const Vector& x = *base.current;
  const std::size_t m = slots.size();
  StepCounters local;
  local.steps = 1;

  std::vector<ConditioningContext> contexts(m, base);
  for (std::size_t j = 0; j < m; ++j) {
    if (slots[j].kernel == nullptr) {
      throw InvalidParameterError("multiple_try_move: slot without a kernel");
    }
    contexts[j].anchor = slots[j].anchor;
  }

  std::vector<Vector> trials(m);
  std::vector<double> forward(m);
  for (std::size_t j = 0; j < m; ++j) {
    trials[j] = slots[j].kernel->sample(rng, contexts[j]);
    const TrialWeight w = safe_weight(target, slots[j], policy, trials[j], contexts[j]);
    forward[j] = w.log_value;
    local.degenerate_weights += w.degenerate ? 1 : 0;
  }

  MoveResult result{x, false, std::nullopt, 0.0};
  const std::optional<std::size_t> chosen = select_trial(rng, forward);
  if (record != nullptr) {
    record->trials = trials;
    record->forward_log_weights = forward;
    record->selected = chosen;
    record->reference.clear();
    record->reference_log_weights.clear();
  }
  if (!chosen) {
    local.stuck = 1;
    if (counters != nullptr) {
      *counters += local;
    }
    return result;
  }
  const std::size_t sel = *chosen;
  const Vector& y = trials[sel];

  std::vector<Vector> reference(m);
  std::vector<double> backward(m);
  for (std::size_t j = 0; j < m; ++j) {
    const ConditioningContext at_y = contexts[j].with_current(y);
    reference[j] = j == sel ? x : slots[j].kernel->sample(rng, at_y);
    const TrialWeight w = safe_weight(target, slots[j], policy, reference[j], at_y);
    backward[j] = w.log_value;
    local.degenerate_weights += w.degenerate ? 1 : 0;
  }

  const AcceptanceRatio ratio = acceptance_ratio(forward, backward);
  local.degenerate_ratio = ratio.degenerate ? 1 : 0;
  result.rho = ratio.rho;
  result.selected = slots[sel].label.value_or(sel);
  if (ratio.rho >= 1.0 || rng.uniform() < ratio.rho) {
    result.next = y;
    result.accepted = true;
    local.accepted = 1;
  }
  if (record != nullptr) {
    record->reference = std::move(reference);
    record->reference_log_weights = std::move(backward);
  }
  if (counters != nullptr) {
    *counters += local;
  }
  return result;
}

}  // namespace imtm
