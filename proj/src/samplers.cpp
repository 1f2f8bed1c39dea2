#include "imtm/samplers.hpp"

#include "imtm/distributions.hpp"
#include "imtm/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>
#include <thread>

namespace imtm {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr std::size_t kDirectionRetries = 10;

bool is_population(Algorithm a) {
  return a == Algorithm::IMTM || a == Algorithm::AIMTM1 || a == Algorithm::AIMTM2 || a == Algorithm::GIMTM ||
         a == Algorithm::RandomRay;
}

bool any_anchored(const std::vector<KernelPtr>& kernels) {
  return std::any_of(kernels.begin(), kernels.end(), [](const KernelPtr& k) { return k && k->anchored(); });
}

/// Kernel for slot position j: one shared kernel or one per slot.
const KernelPtr& slot_kernel(const SamplerConfig& cfg, std::size_t j) {
  return cfg.kernels.size() == 1 ? cfg.kernels.front() : cfg.kernels.at(j);
}

double slot_log_factor(const SamplerConfig& cfg, const NuTracker* nu, std::size_t k) {
  const double factor = cfg.policy.slot_factor(k);
  double out = factor > 0.0 ? std::log(factor) : kNegInf;
  if (cfg.policy.nu_weighted && nu != nullptr) {
    const double v = nu->nu().at(k);
    out += v > 0.0 ? std::log(v) : kNegInf;
  }
  return out;
}

std::size_t draw_proportional(RngStream& rng, const std::vector<double>& probabilities) {
  double total = 0.0;
  for (const double p : probabilities) {
    total += p;
  }
  if (!(total > 0.0)) {
    return rng.index(probabilities.size());
  }
  const double u = rng.uniform() * total;
  double cumulative = 0.0;
  for (std::size_t k = 0; k < probabilities.size(); ++k) {
    cumulative += probabilities[k];
    if (u < cumulative) {
      return k;
    }
  }
  return probabilities.size() - 1;
}

/// Trial slots of one interacting chain. Anchors are drawn from chains
/// 0..anchor_range-1; `force_random_anchor` ignores the Fixed anchor binding.
std::vector<TrialSlot> build_slots(const SamplerConfig& cfg, RngStream& rng, const NuTracker* nu,
                                   std::size_t anchor_range, bool force_random_anchor) {
  std::vector<TrialSlot> slots(cfg.trials);
  for (std::size_t j = 0; j < cfg.trials; ++j) {
    std::size_t k = j;
    if (cfg.assignment == AssignmentStrategy::NuProportional) {
      k = nu != nullptr ? draw_proportional(rng, nu->nu()) : rng.index(cfg.kernels.size());
    }
    const KernelPtr& kernel =
        cfg.assignment == AssignmentStrategy::NuProportional ? cfg.kernels.at(k) : slot_kernel(cfg, k);
    TrialSlot& slot = slots[j];
    slot.kernel = kernel.get();
    slot.label = k;
    slot.log_factor = slot_log_factor(cfg, nu, k);
    if (kernel->anchored()) {
      if (cfg.assignment == AssignmentStrategy::Fixed && !force_random_anchor) {
        slot.anchor = j;
      } else {
        slot.anchor = rng.index(anchor_range);
      }
    }
  }
  return slots;
}

void record_move(PopulationState& next, std::size_t i, const MoveResult& move) {
  next.positions[i] = move.next;
  next.accepted[i] = move.accepted ? 1 : 0;
  next.selected[i] = move.selected ? *move.selected + 1 : 0;
}

void record_step(PopulationState& next, std::size_t i, const StepResult& step) {
  next.positions[i] = step.next;
  next.accepted[i] = step.accepted ? 1 : 0;
  next.selected[i] = step.selected ? *step.selected + 1 : 0;
}

/// Finishes an iteration: shifts positions into `previous` and refreshes nu.
void commit(PopulationState& pop, PopulationState&& next, const PopulationContext& ctx) {
  pop.previous = std::move(pop.positions);
  pop.positions = std::move(next.positions);
  pop.accepted = std::move(next.accepted);
  pop.selected = std::move(next.selected);
  ++pop.iteration;
  if (ctx.nu != nullptr) {
    ctx.nu->update(pop.selected);
  }
}

StepCounters* chain_counters(const PopulationContext& ctx, std::size_t i) {
  return ctx.counters != nullptr ? &ctx.counters->at(i) : nullptr;
}

void require_context(const PopulationState& pop, const PopulationContext& ctx) {
  if (ctx.config == nullptr || ctx.streams == nullptr) {
    throw InvalidParameterError("population step needs a configuration and per-chain streams");
  }
  if (ctx.streams->size() != pop.chains()) {
    throw DimensionError("population step: one stream per chain required");
  }
  if (ctx.counters != nullptr && ctx.counters->size() != pop.chains()) {
    throw DimensionError("population step: one counter set per chain required");
  }
}

/// Runs body(i) for every chain, spread over `threads` workers. Each chain
/// touches only its own stream and output slot, so the result is the same
/// for any thread count.
template <typename Body>
void for_each_chain(std::size_t chains, std::size_t threads, Body body) {
  const std::size_t workers = std::max<std::size_t>(1, std::min(threads, chains));
  if (workers == 1) {
    for (std::size_t i = 0; i < chains; ++i) {
      body(i);
    }
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < chains; i += workers) {
          body(i);
        }
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) {
    t.join();
  }
  for (const auto& e : errors) {
    if (e) {
      std::rethrow_exception(e);
    }
  }
}

/// Simultaneous update against the frozen snapshot; shared by IMTM and AIMTM1.
template <typename TargetOf, typename RangeOf>
void simultaneous_step(PopulationState& pop, const PopulationContext& ctx, TargetOf target_of, RangeOf range_of,
                       bool force_random_anchor) {
  require_context(pop, ctx);
  const SamplerConfig& cfg = *ctx.config;
  const std::vector<Vector> snapshot = pop.positions;
  PopulationState next = pop;
  for_each_chain(pop.chains(), cfg.threads, [&](std::size_t i) {
    RngStream& rng = (*ctx.streams)[i];
    const auto slots = build_slots(cfg, rng, ctx.nu, range_of(i), force_random_anchor);
    ConditioningContext base;
    base.current = &snapshot[i];
    base.population = snapshot;
    base.self = i;
    base.previous = &pop.previous[i];
    record_move(next, i, multiple_try_move(rng, target_of(i), slots, cfg.policy, base, chain_counters(ctx, i)));
  });
  commit(pop, std::move(next), ctx);
}

}  // namespace

std::string to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::MH:
      return "mh";
    case Algorithm::MTM:
      return "mtm";
    case Algorithm::MTMDP:
      return "mtm-dp";
    case Algorithm::IMTM:
      return "imtm";
    case Algorithm::AIMTM1:
      return "aimtm1";
    case Algorithm::AIMTM2:
      return "aimtm2";
    case Algorithm::GIMTM:
      return "gimtm";
    case Algorithm::RandomRay:
      return "random-ray";
  }
  return "mh";
}

Algorithm parse_algorithm(const std::string& text) {
  for (const Algorithm a : {Algorithm::MH, Algorithm::MTM, Algorithm::MTMDP, Algorithm::IMTM, Algorithm::AIMTM1,
                            Algorithm::AIMTM2, Algorithm::GIMTM, Algorithm::RandomRay}) {
    if (to_string(a) == text) {
      return a;
    }
  }
  throw InvalidParameterError("unknown algorithm '" + text +
                              "' (expected mh, mtm, mtm-dp, imtm, aimtm1, aimtm2, gimtm or random-ray)");
}

std::string to_string(AssignmentStrategy strategy) {
  switch (strategy) {
    case AssignmentStrategy::Fixed:
      return "fixed";
    case AssignmentStrategy::AnchoredRandom:
      return "anchored-random";
    case AssignmentStrategy::NuProportional:
      return "nu-proportional";
  }
  return "fixed";
}

AssignmentStrategy parse_assignment(const std::string& text) {
  for (const AssignmentStrategy s :
       {AssignmentStrategy::Fixed, AssignmentStrategy::AnchoredRandom, AssignmentStrategy::NuProportional}) {
    if (to_string(s) == text) {
      return s;
    }
  }
  throw InvalidParameterError("unknown assignment '" + text + "' (expected fixed, anchored-random or nu-proportional)");
}

std::size_t SamplerConfig::kernel_slots() const {
  if (algorithm == Algorithm::AIMTM2) {
    return chains > 1 ? chains - 1 : 1;
  }
  if (assignment == AssignmentStrategy::NuProportional && is_population(algorithm)) {
    return std::max<std::size_t>(1, kernels.size());
  }
  return std::max<std::size_t>(1, trials);
}

std::vector<std::string> SamplerConfig::violations(std::size_t target_dim) const {
  std::vector<std::string> out;
  const auto fail = [&](const std::string& msg) { out.push_back(msg); };
  if (chains < 1) {
    fail("chains must be at least 1");
  }
  if (trials < 1) {
    fail("trials per chain (M) must be at least 1");
  }
  if (threads < 1) {
    fail("threads must be at least 1");
  }
  if (std::any_of(kernels.begin(), kernels.end(), [](const KernelPtr& k) { return !k; })) {
    fail("kernel list contains an empty entry");
  }
  const bool anchored_kernels = any_anchored(kernels);
  if (algorithm != Algorithm::RandomRay) {
    if (kernels.empty()) {
      fail("at least one proposal kernel is required");
    }
  }
  switch (algorithm) {
    case Algorithm::MH:
      if (kernels.size() > 1) {
        fail("mh uses exactly one kernel");
      }
      break;
    case Algorithm::MTM:
      if (kernels.size() > 1) {
        fail("mtm shares one kernel across its trials; use mtm-dp for several kernels");
      }
      break;
    case Algorithm::MTMDP:
      if (kernels.size() > 1 && kernels.size() != trials) {
        fail("mtm-dp needs one kernel or exactly M kernels (M=" + std::to_string(trials) + ", kernels=" +
             std::to_string(kernels.size()) + ")");
      }
      break;
    case Algorithm::IMTM:
    case Algorithm::AIMTM1:
    case Algorithm::GIMTM:
      if (assignment != AssignmentStrategy::NuProportional && kernels.size() > 1 && kernels.size() != trials) {
        fail(to_string(algorithm) + " needs one kernel or exactly M kernels (M=" + std::to_string(trials) +
             ", kernels=" + std::to_string(kernels.size()) + ")");
      }
      break;
    case Algorithm::AIMTM2:
      if (chains < 2) {
        fail("aimtm2 needs at least two chains");
      } else if (kernels.size() > 1 && kernels.size() != chains - 1) {
        fail("aimtm2 needs one kernel or one kernel per auxiliary chain (N-1=" + std::to_string(chains - 1) + ")");
      }
      if (anchored_kernels) {
        fail("aimtm2 auxiliary kernels must be centred on the current point");
      }
      break;
    case Algorithm::RandomRay:
      if (chains < 2) {
        fail("random-ray needs at least two chains");
      }
      if (!(chains > trials)) {
        fail("random-ray draws anchors from the other chains and requires N > M (N=" + std::to_string(chains) +
             ", M=" + std::to_string(trials) + ")");
      }
      if (!(ray_sigma2 > 0.0)) {
        fail("ray_sigma2 must be positive");
      }
      break;
  }
  if (!is_population(algorithm) && anchored_kernels) {
    fail(to_string(algorithm) + " has no population to anchor kernels on");
  }
  if (is_population(algorithm) && algorithm != Algorithm::AIMTM2 && algorithm != Algorithm::RandomRay) {
    const bool random_anchor =
        assignment != AssignmentStrategy::Fixed || (algorithm == Algorithm::AIMTM1 && anchored_kernels);
    if (random_anchor && anchored_kernels && !(chains > trials)) {
      fail("anchored random assignment requires N > M (N=" + std::to_string(chains) + ", M=" +
           std::to_string(trials) + ")");
    }
    if (assignment == AssignmentStrategy::Fixed && anchored_kernels && trials > chains) {
      fail("fixed anchors bind slot j to chain j and need M <= N (N=" + std::to_string(chains) + ", M=" +
           std::to_string(trials) + ")");
    }
  }
  if (algorithm == Algorithm::AIMTM1 || algorithm == Algorithm::AIMTM2) {
    if (!ladder) {
      fail(to_string(algorithm) + " needs a temperature ladder");
    } else if (ladder->size() != chains) {
      fail("ladder length " + std::to_string(ladder->size()) + " differs from the chain count " +
           std::to_string(chains));
    }
  }
  if (policy.kind == LambdaKind::PowerProduct && !(policy.alpha > 0.0)) {
    fail("power-product lambda needs alpha > 0");
  }
  if (!policy.slot_factors.empty()) {
    if (policy.slot_factors.size() != kernel_slots()) {
      fail("slot_factors needs " + std::to_string(kernel_slots()) + " entries");
    }
    if (std::any_of(policy.slot_factors.begin(), policy.slot_factors.end(), [](double f) { return !(f > 0.0); })) {
      fail("slot factors must be positive");
    }
  }
  if (!initial_positions.empty()) {
    if (initial_positions.size() != chains) {
      fail("initial positions: expected one per chain");
    }
    for (const auto& x : initial_positions) {
      if (static_cast<std::size_t>(x.size()) != target_dim) {
        fail("initial position dimension differs from the target dimension");
        break;
      }
    }
  }
  if (init_center && static_cast<std::size_t>(init_center->size()) != target_dim) {
    fail("init_center dimension differs from the target dimension");
  }
  if (init_scale < 0.0 || !std::isfinite(init_scale)) {
    fail("init_scale must be finite and non-negative");
  }
  return out;
}

void SamplerConfig::validate(std::size_t target_dim) const {
  auto v = violations(target_dim);
  if (!v.empty()) {
    throw ConfigError(std::move(v));
  }
}

StepResult mh_step(RngStream& rng, const TargetDensity& target, const ProposalKernel& kernel, const Vector& x,
                   StepCounters* counters) {
  const ConditioningContext at_x = ConditioningContext::at(x);
  Vector y = kernel.sample(rng, at_x);
  StepResult result{x, false, std::nullopt};
  StepCounters local;
  local.steps = 1;
  const double log_pi_y = target.log_density(y);
  if (std::isfinite(log_pi_y)) {
    double log_ratio = log_pi_y - target.log_density(x);
    if (!kernel.symmetric()) {
      log_ratio += kernel.log_density(x, ConditioningContext::at(y)) - kernel.log_density(y, at_x);
    }
    if (log_ratio >= 0.0 || rng.uniform() < std::exp(log_ratio)) {
      result.next = std::move(y);
      result.accepted = true;
      local.accepted = 1;
    }
  }
  if (counters != nullptr) {
    *counters += local;
  }
  return result;
}

StepResult mtm_step(RngStream& rng, const TargetDensity& target, const ProposalKernel& kernel, std::size_t trials,
                    const LambdaPolicy& policy, const Vector& x, StepCounters* counters, TrialSet* record) {
  if (trials < 1) {
    throw InvalidParameterError("mtm_step: M must be at least 1");
  }
  std::vector<TrialSlot> slots(trials);
  for (std::size_t j = 0; j < trials; ++j) {
    slots[j].kernel = &kernel;
    slots[j].log_factor = std::log(policy.slot_factor(policy.slot_factors.empty() ? 0 : j));
  }
  const MoveResult move =
      multiple_try_move(rng, target, slots, policy, ConditioningContext::at(x), counters, record);
  return {move.next, move.accepted, move.selected};
}

StepResult mtm_dp_step(RngStream& rng, const TargetDensity& target, std::span<const KernelPtr> kernels,
                       const LambdaPolicy& policy, const Vector& x, StepCounters* counters, TrialSet* record) {
  if (kernels.empty()) {
    throw InvalidParameterError("mtm_dp_step: at least one kernel is required");
  }
  std::vector<TrialSlot> slots(kernels.size());
  for (std::size_t j = 0; j < kernels.size(); ++j) {
    if (kernels[j]->anchored()) {
      throw InvalidParameterError("mtm_dp_step: anchored kernels need a population");
    }
    slots[j].kernel = kernels[j].get();
    slots[j].log_factor = std::log(policy.slot_factor(j));
  }
  const MoveResult move =
      multiple_try_move(rng, target, slots, policy, ConditioningContext::at(x), counters, record);
  return {move.next, move.accepted, move.selected};
}

void imtm_step(PopulationState& pop, const TargetDensity& target, const PopulationContext& ctx) {
  const std::size_t n = pop.chains();
  simultaneous_step(
      pop, ctx, [&](std::size_t) -> const TargetDensity& { return target; }, [n](std::size_t) { return n; }, false);
}

void aimtm1_step(PopulationState& pop, std::span<const TargetPtr> targets, const PopulationContext& ctx) {
  const std::size_t n = pop.chains();
  if (targets.size() != n) {
    throw DimensionError("aimtm1_step: one tempered target per chain required");
  }
  simultaneous_step(
      pop, ctx, [&](std::size_t i) -> const TargetDensity& { return *targets[i]; },
      [n](std::size_t i) { return n - i; }, true);
}

void aimtm2_step(PopulationState& pop, std::span<const TargetPtr> targets, const PopulationContext& ctx) {
  require_context(pop, ctx);
  const SamplerConfig& cfg = *ctx.config;
  const std::size_t n = pop.chains();
  if (n < 2 || targets.size() != n) {
    throw DimensionError("aimtm2_step: needs at least two chains and one target per chain");
  }
  const auto aux_kernel = [&](std::size_t i) -> const KernelPtr& { return slot_kernel(cfg, i - 1); };
  const std::vector<Vector> snapshot = pop.positions;
  PopulationState next = pop;

  // Chain 0: slot j borrows chain j+1's kernel, re-centred on that chain.
  std::vector<std::shared_ptr<const ProposalKernel>> borrowed;
  std::vector<TrialSlot> slots(n - 1);
  for (std::size_t j = 0; j + 1 < n; ++j) {
    borrowed.push_back(std::make_shared<AnchoredKernel>(aux_kernel(j + 1)));
    slots[j].kernel = borrowed.back().get();
    slots[j].anchor = j + 1;
    slots[j].label = j;
    slots[j].log_factor = slot_log_factor(cfg, ctx.nu, j);
  }
  ConditioningContext base;
  base.current = &snapshot[0];
  base.population = snapshot;
  base.self = 0;
  base.previous = &pop.previous[0];
  record_move(next, 0, multiple_try_move((*ctx.streams)[0], *targets[0], slots, cfg.policy, base, chain_counters(ctx, 0)));

  for_each_chain(n - 1, cfg.threads, [&](std::size_t k) {
    const std::size_t i = k + 1;
    record_step(next, i, mh_step((*ctx.streams)[i], *targets[i], *aux_kernel(i), snapshot[i], chain_counters(ctx, i)));
  });
  commit(pop, std::move(next), ctx);
}

void gimtm_step(PopulationState& pop, const TargetDensity& target, const PopulationContext& ctx) {
  require_context(pop, ctx);
  const SamplerConfig& cfg = *ctx.config;
  PopulationState next = pop;
  const std::size_t n = pop.chains();
  for (std::size_t i = 0; i < n; ++i) {
    RngStream& rng = (*ctx.streams)[i];
    const auto slots = build_slots(cfg, rng, ctx.nu, n, false);
    // Chains before i already hold their new positions.
    const Vector x = next.positions[i];
    ConditioningContext base;
    base.current = &x;
    base.population = next.positions;
    base.self = i;
    base.previous = &pop.previous[i];
    const MoveResult move = multiple_try_move(rng, target, slots, cfg.policy, base, chain_counters(ctx, i));
    record_move(next, i, move);
  }
  commit(pop, std::move(next), ctx);
}

std::vector<Vector> ray_directions(RngStream& rng, const TargetDensity& target, const PopulationState& pop,
                                   std::size_t self, std::size_t trials, const LineSearchConfig& line_search) {
  const std::size_t n = pop.chains();
  if (n < 2 || self >= n) {
    throw InvalidParameterError("ray_directions: needs another chain to anchor on");
  }
  const Vector& x = pop.positions[self];
  Vector u = x - pop.previous[self];
  if (!(u.norm() > 0.0)) {
    u = gradient_or_numerical(target, x);
  }
  Vector mode = x;
  if (u.norm() > 0.0 && u.allFinite()) {
    try {
      mode = line_search_mode(target, x, u, line_search).point;
    } catch (const Error&) {
      mode = x;
    }
  }
  std::vector<Vector> out;
  out.reserve(trials);
  for (std::size_t j = 0; j < trials; ++j) {
    bool found = false;
    for (std::size_t attempt = 0; attempt < kDirectionRetries && !found; ++attempt) {
      std::size_t k = rng.index(n - 1);
      if (k >= self) {
        ++k;
      }
      try {
        out.push_back(ray_direction(mode, pop.positions[k]));
        found = true;
      } catch (const DegenerateError&) {
      }
    }
    if (!found) {
      return {};
    }
  }
  return out;
}

void random_ray_step(PopulationState& pop, const TargetDensity& target, const PopulationContext& ctx) {
  require_context(pop, ctx);
  const SamplerConfig& cfg = *ctx.config;
  const std::vector<Vector> snapshot = pop.positions;
  PopulationState next = pop;
  for_each_chain(pop.chains(), cfg.threads, [&](std::size_t i) {
    RngStream& rng = (*ctx.streams)[i];
    const auto directions = ray_directions(rng, target, pop, i, cfg.trials, cfg.line_search);
    if (directions.empty()) {
      next.positions[i] = snapshot[i];
      next.accepted[i] = 0;
      next.selected[i] = 0;
      if (StepCounters* c = chain_counters(ctx, i)) {
        ++c->steps;
        ++c->degenerate_directions;
      }
      return;
    }
    std::vector<RayProposal> rays;
    rays.reserve(directions.size());
    for (const auto& e : directions) {
      rays.emplace_back(e, cfg.ray_sigma2);
    }
    std::vector<TrialSlot> slots(rays.size());
    for (std::size_t j = 0; j < rays.size(); ++j) {
      slots[j].kernel = &rays[j];
      slots[j].log_factor = slot_log_factor(cfg, ctx.nu, j);
    }
    ConditioningContext base;
    base.current = &snapshot[i];
    base.population = snapshot;
    base.self = i;
    base.previous = &pop.previous[i];
    record_move(next, i, multiple_try_move(rng, target, slots, cfg.policy, base, chain_counters(ctx, i)));
  });
  commit(pop, std::move(next), ctx);
}

AnnealEstimate anneal_estimate(std::span<const std::vector<Vector>> rungs, const TemperatureLadder& ladder,
                               const TargetDensity& target, const std::function<double(const Vector&)>& h) {
  if (rungs.size() != ladder.size()) {
    throw DimensionError("anneal_estimate: one trace per ladder rung required");
  }
  const std::size_t t_len = rungs.front().size();
  for (const auto& r : rungs) {
    if (r.size() != t_len) {
      throw DimensionError("anneal_estimate: every rung needs the same iteration count");
    }
  }
  AnnealEstimate out;
  double total = 0.0;
  std::size_t used = 0;
  std::vector<double> log_zeta(rungs.size());
  for (std::size_t n = 0; n < t_len; ++n) {
    for (std::size_t j = 0; j < rungs.size(); ++j) {
      const double lp = target.log_density(rungs[j][n]);
      log_zeta[j] = ladder[j] == 1.0 ? (std::isfinite(lp) ? 0.0 : kNegInf) : (1.0 - ladder[j]) * lp;
    }
    const double norm = log_sum_exp(log_zeta);
    if (!std::isfinite(norm)) {
      ++out.skipped;
      continue;
    }
    // Dividing by the rounded weight sum keeps a constant h exact.
    double acc = 0.0;
    double mass = 0.0;
    for (std::size_t j = 0; j < rungs.size(); ++j) {
      const double w = std::exp(log_zeta[j] - norm);
      if (w > 0.0) {
        acc += w * h(rungs[j][n]);
        mass += w;
      }
    }
    total += acc / mass;
    ++used;
  }
  out.value = used == 0 ? 0.0 : total / static_cast<double>(used);
  return out;
}

RunResult run(const SamplerConfig& config, const TargetPtr& target) {
  if (!target) {
    throw InvalidParameterError("run: target is null");
  }
  config.validate(target->dim());
  const std::size_t n = config.chains;

  std::vector<Vector> start = config.initial_positions;
  if (start.empty()) {
    RngStream init(config.seed, n);
    double scale = config.init_scale;
    if (scale == 0.0) {
      double largest = config.algorithm == Algorithm::RandomRay ? std::sqrt(config.ray_sigma2) : 0.0;
      for (const auto& k : config.kernels) {
        largest = std::max(largest, k->scale());
      }
      scale = 10.0 * largest;
    }
    const Vector center = config.init_center.value_or(Vector::Zero(static_cast<Eigen::Index>(target->dim())));
    start = overdispersed_start(init, *target, n, center, scale);
  }
  for (const auto& x : start) {
    if (!std::isfinite(target->log_density(x))) {
      throw InvalidParameterError("run: a starting point lies outside the target support");
    }
  }

  std::vector<RngStream> streams;
  streams.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    streams.emplace_back(config.seed, i);
  }
  std::vector<StepCounters> counters(n);
  NuTracker nu(config.kernel_slots(), n);
  PopulationContext ctx{&config, &streams, &nu, &counters};

  std::vector<TargetPtr> rungs;
  if (config.ladder) {
    rungs = tempered_targets(target, *config.ladder);
  }

  PopulationState pop(std::move(start));
  ChainTrace trace(n, target->dim());
  trace.append(pop);
  trace.append_nu(nu.nu());

  for (std::size_t it = 0; it < config.iterations; ++it) {
    switch (config.algorithm) {
      case Algorithm::MH:
      case Algorithm::MTM:
      case Algorithm::MTMDP: {
        PopulationState next = pop;
        for (std::size_t i = 0; i < n; ++i) {
          StepResult step;
          if (config.algorithm == Algorithm::MH) {
            step = mh_step(streams[i], *target, *config.kernels.front(), pop.positions[i], &counters[i]);
          } else if (config.algorithm == Algorithm::MTM) {
            step = mtm_step(streams[i], *target, *config.kernels.front(), config.trials, config.policy,
                            pop.positions[i], &counters[i]);
          } else {
            std::vector<KernelPtr> slots(config.trials);
            for (std::size_t j = 0; j < config.trials; ++j) {
              slots[j] = slot_kernel(config, j);
            }
            step = mtm_dp_step(streams[i], *target, slots, config.policy, pop.positions[i], &counters[i]);
          }
          record_step(next, i, step);
        }
        commit(pop, std::move(next), ctx);
        break;
      }
      case Algorithm::IMTM:
        imtm_step(pop, *target, ctx);
        break;
      case Algorithm::AIMTM1:
        aimtm1_step(pop, rungs, ctx);
        break;
      case Algorithm::AIMTM2:
        aimtm2_step(pop, rungs, ctx);
        break;
      case Algorithm::GIMTM:
        gimtm_step(pop, *target, ctx);
        break;
      case Algorithm::RandomRay:
        random_ray_step(pop, *target, ctx);
        break;
    }
    trace.append(pop);
    trace.append_nu(nu.nu());
  }

  StepCounters total;
  for (const auto& c : counters) {
    total += c;
  }
  return {std::move(trace), total};
}

}  // namespace imtm
