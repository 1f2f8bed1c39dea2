#include "imtm/sv_sampler.hpp"

#include "imtm/error.hpp"
#include "imtm/proposals.hpp"
#include "imtm/targets.hpp"
#include "imtm/weights.hpp"

#include <cmath>
#include <memory>

namespace imtm {

namespace {

std::vector<KernelPtr> anchored_kernels(const std::vector<double>& scales) {
  std::vector<KernelPtr> out;
  for (const double s : scales) {
    out.push_back(std::make_shared<AnchoredRWProposal>(SpdMatrix::scaled_identity(1, s * s)));
  }
  return out;
}

Vector scalar(double v) {
  Vector out(1);
  out[0] = v;
  return out;
}

/// One-dimensional interacting update of a scalar; anchors are other chains.
double interacting_update(RngStream& rng, const TargetDensity& slice, const std::vector<KernelPtr>& kernels,
                          std::span<const Vector> snapshot, std::size_t self, double current,
                          const LambdaPolicy& policy, StepCounters& counters) {
  const std::size_t n = snapshot.size();
  std::vector<TrialSlot> slots(kernels.size());
  for (std::size_t j = 0; j < kernels.size(); ++j) {
    std::size_t k = rng.index(n - 1);
    if (k >= self) {
      ++k;
    }
    slots[j].kernel = kernels[j].get();
    slots[j].anchor = k;
  }
  const Vector x = scalar(current);
  ConditioningContext base;
  base.current = &x;
  base.population = snapshot;
  base.self = self;
  return multiple_try_move(rng, slice, slots, policy, base, &counters).next[0];
}

/// Returns false when a conditional scale was not finite.
bool gibbs_scales(const SVModel& model, SvState& s, RngStream& rng, StepCounters& counters) {
  try {
    sv_full_conditionals(model, s, rng);
    return true;
  } catch (const NumericalOverflowError&) {
    ++counters.overflow;
    return false;
  }
}

void accumulate(SvEstimate& acc, const SvState& s) {
  acc.phi += s.phi;
  acc.sigma2 += s.sigma2;
  acc.beta2 += s.beta2;
  for (std::size_t t = 0; t < s.h.size(); ++t) {
    acc.h[t] += s.h[t];
  }
  ++acc.draws;
}

void finalize(SvEstimate& acc) {
  if (acc.draws == 0) {
    throw InvalidParameterError("no draws kept; lower burn_fraction or raise iterations");
  }
  const double inv = 1.0 / static_cast<double>(acc.draws);
  acc.phi *= inv;
  acc.sigma2 *= inv;
  acc.beta2 *= inv;
  for (auto& v : acc.h) {
    v *= inv;
  }
}

std::size_t burn_in(const SvSamplerConfig& config) {
  return static_cast<std::size_t>(std::floor(config.burn_fraction * static_cast<double>(config.iterations)));
}

}  // namespace

void SvSamplerConfig::validate() const {
  std::vector<std::string> v;
  if (chains < 2) {
    v.emplace_back("sv sampler needs at least two chains");
  }
  if (trials < 1) {
    v.emplace_back("sv sampler needs M >= 1");
  }
  if (!(chains > trials)) {
    v.emplace_back("anchors are drawn among the other chains and need N > M (N=" + std::to_string(chains) +
                   ", M=" + std::to_string(trials) + ")");
  }
  if (phi_scales.size() != trials || h_scales.size() != trials) {
    v.emplace_back("phi_scales and h_scales need one entry per trial slot");
  }
  for (const auto* list : {&phi_scales, &h_scales}) {
    for (const double s : *list) {
      if (!(s > 0.0)) {
        v.emplace_back("kernel scales must be positive");
        break;
      }
    }
  }
  if (!(mh_phi_scale > 0.0) || !(mh_h_scale > 0.0)) {
    v.emplace_back("random-walk scales must be positive");
  }
  if (!(burn_fraction >= 0.0 && burn_fraction < 1.0)) {
    v.emplace_back("burn_fraction must lie in [0, 1)");
  }
  if (!v.empty()) {
    throw ConfigError(std::move(v));
  }
}

SvState sv_initial_state(const SVModel& model, double phi) {
  SvState s;
  s.beta2 = 1.0;
  s.sigma2 = 0.5;
  s.phi = phi;
  s.h.assign(model.length(), 0.0);
  return s;
}

void imtm_within_gibbs_step(const SVModel& model, std::vector<SvState>& states, const SvSamplerConfig& config,
                            std::vector<RngStream>& streams, std::vector<StepCounters>& counters) {
  const std::size_t n = states.size();
  if (streams.size() != n || counters.size() != n) {
    throw DimensionError("imtm_within_gibbs_step: one stream and one counter set per chain required");
  }
  const std::size_t T = model.length();
  const LambdaPolicy policy = LambdaPolicy::power_product(1.0);
  const auto phi_kernels = anchored_kernels(config.phi_scales);
  const auto h_kernels = anchored_kernels(config.h_scales);

  // Anchor values frozen at the start of the sweep.
  std::vector<Vector> phi_snapshot(n);
  for (std::size_t i = 0; i < n; ++i) {
    phi_snapshot[i] = scalar(states[i].phi);
  }
  std::vector<std::vector<Vector>> h_snapshot(T, std::vector<Vector>(n));
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      h_snapshot[t][i] = scalar(states[i].h[t]);
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    RngStream& rng = streams[i];
    SvState next = states[i];
    const FunctionTarget phi_slice(1, [&](const Vector& v) { return model.phi_log_slice(next, v[0]); }, "phi-slice");
    next.phi = interacting_update(rng, phi_slice, phi_kernels, phi_snapshot, i, next.phi, policy, counters[i]);
    for (std::size_t t = 0; t < T; ++t) {
      const FunctionTarget h_slice(1, [&](const Vector& v) { return model.h_log_slice(next, t, v[0]); }, "h-slice");
      next.h[t] = interacting_update(rng, h_slice, h_kernels, h_snapshot[t], i, next.h[t], policy, counters[i]);
    }
    // Scales last: from the h = 0 start the sigma^2 scale would be exactly zero.
    if (!gibbs_scales(model, next, rng, counters[i])) {
      continue;
    }
    states[i] = std::move(next);
  }
}

SvEstimate imtm_within_gibbs(const SVModel& model, const SvSamplerConfig& config) {
  config.validate();
  const std::size_t n = config.chains;
  std::vector<RngStream> streams;
  for (std::size_t i = 0; i < n; ++i) {
    streams.emplace_back(config.seed, i);
  }
  RngStream init(config.seed, n);
  std::vector<SvState> states;
  for (std::size_t i = 0; i < n; ++i) {
    states.push_back(sv_initial_state(model, -0.5 + 1.45 * init.uniform()));
  }
  std::vector<StepCounters> counters(n);
  SvEstimate acc;
  acc.h.assign(model.length(), 0.0);
  const std::size_t burn = burn_in(config);
  for (std::size_t it = 0; it < config.iterations; ++it) {
    imtm_within_gibbs_step(model, states, config, streams, counters);
    if (it >= burn) {
      for (const auto& s : states) {
        accumulate(acc, s);
      }
    }
  }
  for (const auto& c : counters) {
    acc.counters += c;
  }
  finalize(acc);
  return acc;
}

void mh_within_gibbs_step(const SVModel& model, SvState& state, const SvSamplerConfig& config, RngStream& rng,
                          StepCounters& counters) {
  SvState next = state;
  const auto rw = [&](double current, double scale, auto&& log_slice) {
    ++counters.steps;
    const double proposal = current + scale * rng.normal();
    const double lp = log_slice(proposal);
    if (!std::isfinite(lp)) {
      return current;
    }
    const double log_ratio = lp - log_slice(current);
    if (log_ratio >= 0.0 || rng.uniform() < std::exp(log_ratio)) {
      ++counters.accepted;
      return proposal;
    }
    return current;
  };
  next.phi = rw(next.phi, config.mh_phi_scale, [&](double v) { return model.phi_log_slice(next, v); });
  for (std::size_t t = 0; t < next.h.size(); ++t) {
    next.h[t] = rw(next.h[t], config.mh_h_scale, [&](double v) { return model.h_log_slice(next, t, v); });
  }
  if (!gibbs_scales(model, next, rng, counters)) {
    return;
  }
  state = std::move(next);
}

SvEstimate mh_within_gibbs(const SVModel& model, const SvSamplerConfig& config) {
  if (!(config.mh_phi_scale > 0.0) || !(config.mh_h_scale > 0.0)) {
    throw ConfigError("random-walk scales must be positive");
  }
  if (!(config.burn_fraction >= 0.0 && config.burn_fraction < 1.0)) {
    throw ConfigError("burn_fraction must lie in [0, 1)");
  }
  RngStream rng(config.seed, 0);
  SvState state = sv_initial_state(model, 0.5);
  SvEstimate acc;
  acc.h.assign(model.length(), 0.0);
  const std::size_t burn = burn_in(config);
  for (std::size_t it = 0; it < config.iterations; ++it) {
    mh_within_gibbs_step(model, state, config, rng, acc.counters);
    if (it >= burn) {
      accumulate(acc, state);
    }
  }
  finalize(acc);
  return acc;
}

}  // namespace imtm
