#pragma once

#include "imtm/config.hpp"
#include "imtm/diagnostics.hpp"
#include "imtm/samplers.hpp"
#include "imtm/sv_sampler.hpp"
#include "imtm/targets.hpp"
#include "imtm/trace.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace imtm {

/// A named file produced by an experiment, written by the caller.
struct Artifact {
  std::string name;
  std::string contents;
};

struct ExperimentOutput {
  ComparisonReport report;
  std::vector<Artifact> artifacts;
};

inline const std::vector<std::string>& experiment_ids() {
  static const std::vector<std::string> ids{"e1-bivariate-mtmdp", "e2-multivariate", "e3-imtm-bimodal",
                                            "e4-betabinomial", "e5-sv"};
  return ids;
}

/// Variances of the four random-walk kernels used by the single-chain comparisons.
inline const std::vector<double>& single_chain_variances() {
  static const std::vector<double> v{0.1, 5.0, 50.0, 100.0};
  return v;
}

/// Four kernels N(x, v_j I) in separate slots, harmonic lambda with 0.25 factors.
SamplerConfig mtm_dp_config(std::size_t dim, std::size_t iterations, std::uint64_t seed);
/// One equal-weight mixture of the same four kernels shared by four trials.
SamplerConfig mixture_mtm_config(std::size_t dim, std::size_t iterations, std::uint64_t seed);

// --- bivariate and multivariate single-chain comparison -------------------

struct SingleChainOptions {
  std::vector<std::uint64_t> seeds;
  std::size_t iterations = 20000;
  std::size_t burn_in = 1000;
  std::size_t max_lag = 30;
};

struct SingleChainResult {
  /// iact[s][k]: seed s, coordinate k.
  std::vector<std::vector<double>> iact_dp;
  std::vector<std::vector<double>> iact_mtm;
  /// ACF of every coordinate for the first seed, lags 0..max_lag.
  std::vector<std::vector<double>> acf_dp;
  std::vector<std::vector<double>> acf_mtm;
  double acceptance_dp = 0.0;
  double acceptance_mtm = 0.0;
  ComparisonReport report;
};

SingleChainResult run_bivariate_comparison(const SingleChainOptions& options);
/// The 20-dimensional mixture is drawn once from `target_seed`.
SingleChainResult run_multivariate_comparison(const SingleChainOptions& options, std::uint64_t target_seed,
                                              std::size_t dim = 20);

// --- interacting population on the bivariate mixture ----------------------

struct BimodalOptions {
  std::uint64_t seed = 1;
  std::size_t chains = 50;
  std::size_t trials = 50;
  std::size_t iterations = 1000;
  Vector init_center = Vector::Constant(2, 5.0);
  double init_scale = 10.0;
  std::size_t threads = 1;
};

struct BimodalVariant {
  std::string name;
  /// Pooled fraction inside the 5-sigma ball of the heavier mode over the last quarter.
  double final_quarter_mode2 = 0.0;
  double final_iteration_mode2 = 0.0;
  /// Chains whose path switched between the two mode regions at least once.
  std::size_t crossing_chains = 0;
  /// Pooled mean over the second half.
  Vector pooled_mean;
  ChainTrace trace;
};

/// Fixed anchors: slot j of every chain is N(x^{(j)}, (0.1 + 5j) I).
SamplerConfig bimodal_imtm_config(const BimodalOptions& options, LambdaPolicy policy);
std::vector<BimodalVariant> run_bimodal_imtm(const BimodalOptions& options);

// --- beta-binomial population ---------------------------------------------

struct BetaBinomialOptions {
  std::uint64_t seed = 1;
  std::size_t chains = 100;
  std::size_t trials = 4;
  std::size_t iterations = 1000;
  std::vector<std::size_t> horizons{100, 1000};
  std::size_t threads = 1;
};

struct ClusterSplit {
  /// Points with pi1 < pi2 and pi1 > pi2.
  std::size_t below = 0;
  std::size_t above = 0;
  Vector centroid_below;
  Vector centroid_above;
  /// Both groups non-empty and their centroids further apart than three
  /// times the larger within-group RMS radius.
  bool separated = false;
};

/// Splits (pi1, pi2) points at the diagonal.
ClusterSplit split_clusters(const std::vector<Vector>& points);

/// Prior draws on [0,1]^3 x [-30,30].
std::vector<Vector> betabin_prior_draws(RngStream& rng, std::size_t count);

SamplerConfig betabin_imtm_config(const BetaBinomialOptions& options);

struct BetaBinomialResult {
  /// (pi1, pi2) of every chain at each horizon.
  std::vector<std::vector<Vector>> populations;
  std::vector<ClusterSplit> clusters;
  ChainTrace trace;
};

BetaBinomialResult run_betabinomial(const std::vector<LohObservation>& data, const BetaBinomialOptions& options);

// --- stochastic volatility ------------------------------------------------

struct SvComparisonOptions {
  std::vector<std::uint64_t> dataset_seeds;
  std::size_t length = 200;
  SvParameters truth{0.0, 0.9, 0.1};
  SvSamplerConfig imtm;
  SvSamplerConfig mh;
};

struct SvDatasetResult {
  SvDataset data;
  SvEstimate imtm;
  SvEstimate mh;
  double phi_se_imtm = 0.0;
  double phi_se_mh = 0.0;
  double sigma2_se_imtm = 0.0;
  double sigma2_se_mh = 0.0;
  std::vector<double> rmse_imtm;
  std::vector<double> rmse_mh;
};

/// IMTM-within-Gibbs: N = 20, M = 5, 1000 sweeps. MH-within-Gibbs: 100000 sweeps.
SvComparisonOptions sv_default_options(const SvParameters& truth, std::uint64_t seed, std::size_t datasets);
std::vector<SvDatasetResult> run_sv_comparison(const SvComparisonOptions& options);

// --- command-line entry points --------------------------------------------

struct ReproduceOptions {
  std::uint64_t seed = 1;
  bool synthetic = false;
  std::string data_path;
  std::size_t threads = 1;
};

/// Runs a canned experiment. Throws ConfigError for an unknown id or missing data.
ExperimentOutput reproduce_experiment(const std::string& id, const ReproduceOptions& options);

/// Runs every replicate of a parsed configuration and returns trace, report
/// and summary artifacts plus the resolved configuration.
ExperimentOutput run_experiment(const ExperimentConfig& config);

/// Diagnostics computed from a stored trace as requested by an INI spec with
/// optional sections [trace] burn_in, [acf] max_lag, [hpd] level and
/// [occupancy] centers / variances / radius.
ExperimentOutput diagnose_trace(const ChainTrace& trace, const std::string& spec_text);

/// Writes every artifact atomically into `dir`; on failure removes the ones
/// already written and rethrows.
void write_artifacts(const std::string& dir, const std::vector<Artifact>& artifacts);

}  // namespace imtm
