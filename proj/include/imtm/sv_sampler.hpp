#pragma once

#include "imtm/multiple_try.hpp"
#include "imtm/rng.hpp"
#include "imtm/sv_model.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace imtm {

struct SvSamplerConfig {
  std::size_t chains = 20;
  std::size_t trials = 5;
  std::size_t iterations = 1000;
  /// Standard deviations of the anchored trial kernels, one per slot.
  std::vector<double> phi_scales{0.005, 0.01, 0.02, 0.05, 0.1};
  std::vector<double> h_scales{0.05, 0.1, 0.2, 0.4, 0.8};
  /// Random-walk standard deviations of the single-chain sampler.
  double mh_phi_scale = 0.02;
  double mh_h_scale = 0.3;
  /// Leading fraction of iterations discarded before averaging.
  double burn_fraction = 0.5;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Posterior means of one run; h holds h_1..h_T.
struct SvEstimate {
  double phi = 0.0;
  double sigma2 = 0.0;
  double beta2 = 0.0;
  std::vector<double> h;
  /// Draws averaged (kept iterations times chains).
  std::size_t draws = 0;
  StepCounters counters;
};

/// Starting state: h = 0, sigma^2 = 0.5, beta^2 = 1 and the given phi.
SvState sv_initial_state(const SVModel& model, double phi);

/// One sweep of the interacting sampler over every chain. Per chain: phi and
/// each h_t by a one-dimensional multiple-try step whose slots are Gaussian
/// kernels anchored at the values of other chains at the start of the sweep,
/// with power-product lambda (alpha = 1), then beta^2 and sigma^2 from their
/// inverse-gamma conditionals. A chain whose conditional scale overflows
/// keeps its state for the sweep.
void imtm_within_gibbs_step(const SVModel& model, std::vector<SvState>& states, const SvSamplerConfig& config,
                            std::vector<RngStream>& streams, std::vector<StepCounters>& counters);

/// Interacting sampler; estimates pool every chain over the kept iterations.
SvEstimate imtm_within_gibbs(const SVModel& model, const SvSamplerConfig& config);

/// One random-walk Metropolis-within-Gibbs sweep of a single chain.
void mh_within_gibbs_step(const SVModel& model, SvState& state, const SvSamplerConfig& config, RngStream& rng,
                          StepCounters& counters);

/// Single chain for `config.iterations` sweeps.
SvEstimate mh_within_gibbs(const SVModel& model, const SvSamplerConfig& config);

}  // namespace imtm
