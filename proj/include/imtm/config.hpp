#pragma once

#include "imtm/samplers.hpp"
#include "imtm/targets.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace imtm {

struct TargetSpec {
  /// standard-normal, bivariate-mixture, wishart-mixture, grid or beta-binomial.
  std::string kind = "standard-normal";
  std::size_t dim = 1;
  std::vector<double> masses;
  std::uint64_t wishart_seed = 1;
  /// Beta-binomial data: CSV with columns x,n, or a synthetic data set.
  std::string data_path;
  bool synthetic = false;
  std::uint64_t synthetic_seed = 1;
};

struct ProposalSpec {
  /// rw, mixture-rw, anchored-rw or discrete.
  std::string kind = "rw";
  /// One scaled-identity kernel per entry (rw, anchored-rw); the mixture
  /// components for mixture-rw.
  std::vector<double> variances{1.0};
  std::vector<double> mixture_weights;
  std::vector<int> offsets;
  std::vector<double> probabilities;
};

struct DiagnosticsSpec {
  bool acf = true;
  std::size_t max_lag = 30;
  double hpd_level = 0.9;
  /// Leading iterations dropped before any statistic.
  std::size_t burn_in = 0;
};

/// A complete experiment: target, sampler, diagnostics and output location.
struct ExperimentConfig {
  TargetSpec target;
  ProposalSpec proposal;
  SamplerConfig sampler;
  std::string lambda = "const";
  std::string ladder;
  DiagnosticsSpec diagnostics;
  std::string output_dir;
  std::uint64_t seed = 0;
  std::size_t replicates = 1;
};

/// Parses INI text (section headers, key = value). Unknown sections and keys,
/// malformed values and violated sampler constraints are all collected into
/// one ConfigError, each message prefixed with section.key.
ExperimentConfig parse_experiment_config(const std::string& text);
/// Reads `path`; a missing or unreadable file is a ConfigError naming it.
ExperimentConfig load_experiment_config(const std::string& path);
/// Canonical INI rendering; parsing it back gives an equal configuration.
std::string render_experiment_config(const ExperimentConfig& config);

TargetPtr build_target(const TargetSpec& spec);
std::vector<KernelPtr> build_kernels(const ProposalSpec& spec, std::size_t dim);
std::vector<LohObservation> read_loh_csv(const std::string& path);

}  // namespace imtm
