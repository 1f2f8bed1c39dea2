#pragma once

#include "imtm/linalg.hpp"
#include "imtm/multiple_try.hpp"
#include "imtm/population.hpp"
#include "imtm/proposals.hpp"
#include "imtm/rng.hpp"
#include "imtm/targets.hpp"
#include "imtm/trace.hpp"
#include "imtm/weights.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace imtm {

enum class Algorithm { MH, MTM, MTMDP, IMTM, AIMTM1, AIMTM2, GIMTM, RandomRay };

/// How the trial slots of an interacting chain are bound to kernels and anchors.
enum class AssignmentStrategy {
  /// Slot j uses kernel j; an anchored kernel in slot j is anchored at chain j.
  Fixed,
  /// Slot j uses kernel j with an anchor drawn uniformly from the population.
  AnchoredRandom,
  /// Each slot draws its kernel with probability proportional to nu and its
  /// anchor uniformly from the population.
  NuProportional,
};

std::string to_string(Algorithm algorithm);
Algorithm parse_algorithm(const std::string& text);
std::string to_string(AssignmentStrategy strategy);
AssignmentStrategy parse_assignment(const std::string& text);

struct SamplerConfig {
  Algorithm algorithm = Algorithm::MH;
  std::size_t chains = 1;
  /// Trials per chain M. For MTM-DP and the interacting samplers one kernel
  /// is either replicated over the M slots or there is one kernel per slot.
  std::size_t trials = 1;
  LambdaPolicy policy = LambdaPolicy::const_one();
  std::vector<KernelPtr> kernels;
  AssignmentStrategy assignment = AssignmentStrategy::Fixed;
  /// Required by AIMTM1 and AIMTM2; one rung per chain.
  std::optional<TemperatureLadder> ladder;
  std::size_t iterations = 0;
  std::uint64_t seed = 0;
  /// Overdispersed start around `init_center` (origin by default) with
  /// standard deviation `init_scale`; 0 selects 10x the largest kernel scale.
  std::optional<Vector> init_center;
  double init_scale = 0.0;
  /// Explicit starting points, one per chain; overrides the random start.
  std::vector<Vector> initial_positions;
  /// Random-ray trial variance and line search settings.
  double ray_sigma2 = 1.0;
  LineSearchConfig line_search;
  /// Worker threads for the simultaneous IMTM update; results do not depend on it.
  std::size_t threads = 1;

  /// Every violated constraint, empty when the configuration is usable.
  std::vector<std::string> violations(std::size_t target_dim) const;
  /// Throws ConfigError listing every violation.
  void validate(std::size_t target_dim) const;
  /// Number of distinct kernel slots that nu is tracked over.
  std::size_t kernel_slots() const;
};

struct StepResult {
  Vector next;
  bool accepted = false;
  /// 0-based selected slot, nullopt for plain MH or an all-zero trial set.
  std::optional<std::size_t> selected;
};

/// Metropolis-Hastings with acceptance min{1, pi(y) T(x|y) / (pi(x) T(y|x))}.
StepResult mh_step(RngStream& rng, const TargetDensity& target, const ProposalKernel& kernel, const Vector& x,
                   StepCounters* counters = nullptr);

/// Classic multiple-try Metropolis: M trials from one shared kernel.
StepResult mtm_step(RngStream& rng, const TargetDensity& target, const ProposalKernel& kernel, std::size_t trials,
                    const LambdaPolicy& policy, const Vector& x, StepCounters* counters = nullptr,
                    TrialSet* record = nullptr);

/// Multiple-try Metropolis with a different kernel in each slot.
StepResult mtm_dp_step(RngStream& rng, const TargetDensity& target, std::span<const KernelPtr> kernels,
                       const LambdaPolicy& policy, const Vector& x, StepCounters* counters = nullptr,
                       TrialSet* record = nullptr);

/// Shared state of one population run.
struct PopulationContext {
  const SamplerConfig* config = nullptr;
  /// One independent stream per chain.
  std::vector<RngStream>* streams = nullptr;
  NuTracker* nu = nullptr;
  /// Per-chain counters, summed by the caller.
  std::vector<StepCounters>* counters = nullptr;
};

/// One IMTM iteration: every chain moves against the frozen snapshot of the
/// population at the start of the iteration; nu is refreshed afterwards.
void imtm_step(PopulationState& pop, const TargetDensity& target, const PopulationContext& ctx);

/// One AIMTM1 iteration: chain i targets targets[i] = pi^{xi_i} and draws its
/// anchors uniformly from the first N - i chains (0-based i).
void aimtm1_step(PopulationState& pop, std::span<const TargetPtr> targets, const PopulationContext& ctx);

/// One AIMTM2 iteration: chain 0 runs IMTM on pi with slot j anchored at chain
/// j + 1 using that chain's kernel; chains 1..N-1 run MH on their rung.
void aimtm2_step(PopulationState& pop, std::span<const TargetPtr> targets, const PopulationContext& ctx);

/// One GIMTM sweep: chains move in order and chain i sees the already updated
/// positions of chains 0..i-1.
void gimtm_step(PopulationState& pop, const TargetDensity& target, const PopulationContext& ctx);

/// One multiple random-ray iteration (simultaneous, like IMTM).
void random_ray_step(PopulationState& pop, const TargetDensity& target, const PopulationContext& ctx);

/// Ray directions for chain `self` toward its line-searched mode, one per
/// trial, each from a uniformly drawn other chain. Empty when no usable
/// direction was found within the retry budget for some trial.
std::vector<Vector> ray_directions(RngStream& rng, const TargetDensity& target, const PopulationState& pop,
                                   std::size_t self, std::size_t trials, const LineSearchConfig& line_search);

struct AnnealEstimate {
  double value = 0.0;
  /// Iterations skipped because every importance weight vanished.
  std::size_t skipped = 0;
};

/// Tempered-population estimate of E_pi[h]: per iteration n the draws of all
/// rungs are reweighted by zeta_j = pi^{1 - xi_j}, normalized within n, and
/// the results averaged over n. `rungs[j][n]` is rung j's draw at iteration n.
AnnealEstimate anneal_estimate(std::span<const std::vector<Vector>> rungs, const TemperatureLadder& ladder,
                               const TargetDensity& target, const std::function<double(const Vector&)>& h);

struct RunResult {
  ChainTrace trace;
  StepCounters counters;
};

/// Runs the configured sampler from the configured start. Deterministic in the seed.
RunResult run(const SamplerConfig& config, const TargetPtr& target);

}  // namespace imtm
