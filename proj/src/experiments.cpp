#include "imtm/experiments.hpp"

#include "imtm/error.hpp"
#include "imtm/stats.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <sstream>

namespace imtm {

namespace {

std::string seed_tag(std::uint64_t seed) { return "seed" + std::to_string(seed); }

std::vector<std::uint64_t> derived_seeds(std::uint64_t seed, std::size_t count) {
  std::vector<std::uint64_t> out;
  for (std::size_t r = 0; r < count; ++r) {
    out.push_back(derive_seed(seed, r));
  }
  return out;
}

std::string acf_csv(const std::vector<std::vector<double>>& per_coord) {
  std::ostringstream out;
  out << "lag";
  for (std::size_t k = 0; k < per_coord.size(); ++k) {
    out << ",x_" << (k + 1);
  }
  out << '\n';
  const std::size_t lags = per_coord.empty() ? 0 : per_coord.front().size();
  for (std::size_t lag = 0; lag < lags; ++lag) {
    out << lag;
    for (const auto& c : per_coord) {
      out << ',' << format_double(c[lag]);
    }
    out << '\n';
  }
  return out.str();
}

std::string trace_csv(const ChainTrace& trace) {
  std::ostringstream out;
  trace.write_csv(out);
  return out.str();
}

/// IACT and ACF per coordinate of chain 0 after burn-in.
void chain_statistics(const ChainTrace& trace, std::size_t burn_in, std::size_t max_lag, std::vector<double>& iacts,
                      std::vector<std::vector<double>>* acfs) {
  iacts.clear();
  for (std::size_t k = 0; k < trace.dim(); ++k) {
    const auto series = trace.series(0, k, burn_in);
    iacts.push_back(iact(series));
    if (acfs != nullptr) {
      acfs->push_back(acf(series, max_lag));
    }
  }
}

SingleChainResult run_single_chain(const SingleChainOptions& options, const TargetPtr& target, const Vector& start,
                                   const std::string& label) {
  if (options.seeds.empty()) {
    throw InvalidParameterError("single-chain comparison needs at least one seed");
  }
  SingleChainResult result;
  double acc_dp = 0.0;
  double acc_mtm = 0.0;
  for (std::size_t s = 0; s < options.seeds.size(); ++s) {
    const std::uint64_t seed = options.seeds[s];
    SamplerConfig dp = mtm_dp_config(target->dim(), options.iterations, seed);
    SamplerConfig mix = mixture_mtm_config(target->dim(), options.iterations, seed);
    dp.initial_positions = {start};
    mix.initial_positions = {start};
    const RunResult r_dp = run(dp, target);
    const RunResult r_mix = run(mix, target);
    std::vector<double> i_dp;
    std::vector<double> i_mix;
    chain_statistics(r_dp.trace, options.burn_in, options.max_lag, i_dp, s == 0 ? &result.acf_dp : nullptr);
    chain_statistics(r_mix.trace, options.burn_in, options.max_lag, i_mix, s == 0 ? &result.acf_mtm : nullptr);
    result.iact_dp.push_back(std::move(i_dp));
    result.iact_mtm.push_back(std::move(i_mix));
    acc_dp += r_dp.trace.acceptance_rate(0);
    acc_mtm += r_mix.trace.acceptance_rate(0);
    result.report.add_seed(seed);
  }
  const auto n = static_cast<double>(options.seeds.size());
  result.acceptance_dp = acc_dp / n;
  result.acceptance_mtm = acc_mtm / n;
  const std::size_t reps = options.seeds.size();
  for (std::size_t k = 0; k < target->dim(); ++k) {
    std::vector<double> dp_k;
    std::vector<double> mix_k;
    for (std::size_t s = 0; s < reps; ++s) {
      dp_k.push_back(result.iact_dp[s][k]);
      mix_k.push_back(result.iact_mtm[s][k]);
    }
    const std::string param = "x_" + std::to_string(k + 1);
    result.report.add("mtm-dp", "median_iact", param, median(dp_k), reps);
    result.report.add("mtm", "median_iact", param, median(mix_k), reps);
    result.report.add("mtm-dp", "lag1_acf_first_seed", param, result.acf_dp[k][1], 1);
    result.report.add("mtm", "lag1_acf_first_seed", param, result.acf_mtm[k][1], 1);
  }
  result.report.add("mtm-dp", "acceptance_rate", label, result.acceptance_dp, reps);
  result.report.add("mtm", "acceptance_rate", label, result.acceptance_mtm, reps);
  return result;
}

double mode2_fraction(const std::vector<Vector>& points, const GaussianMixtureTarget& target) {
  const auto occ = mode_occupancy(points, target.means(), target.covariances(), 5.0);
  return occ[1];
}

bool in_upper_mode(const Vector& x) { return 0.5 * (x[0] + x[1]) > 5.0; }

Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<Vector> parse_points(const std::string& text) {
  std::vector<Vector> out;
  std::istringstream in(text);
  std::string point;
  while (std::getline(in, point, '|')) {
    std::vector<double> coords;
    std::string item;
    std::istringstream pin(point);
    while (pin >> item) {
      std::istringstream cin(item);
      std::string part;
      while (std::getline(cin, part, ',')) {
        if (part.empty()) {
          continue;
        }
        char* end = nullptr;
        const double v = std::strtod(part.c_str(), &end);
        if (end != part.c_str() + part.size()) {
          throw ConfigError("occupancy: cannot parse '" + part + "' as a number");
        }
        coords.push_back(v);
      }
    }
    if (!coords.empty()) {
      out.push_back(to_vector(coords));
    }
  }
  return out;
}

}  // namespace

SamplerConfig mtm_dp_config(std::size_t dim, std::size_t iterations, std::uint64_t seed) {
  SamplerConfig c;
  c.algorithm = Algorithm::MTMDP;
  c.chains = 1;
  c.trials = single_chain_variances().size();
  c.policy = LambdaPolicy::harmonic();
  c.policy.slot_factors.assign(c.trials, 0.25);
  for (const double v : single_chain_variances()) {
    c.kernels.push_back(std::make_shared<GaussianRWProposal>(SpdMatrix::scaled_identity(dim, v)));
  }
  c.iterations = iterations;
  c.seed = seed;
  return c;
}

SamplerConfig mixture_mtm_config(std::size_t dim, std::size_t iterations, std::uint64_t seed) {
  SamplerConfig c;
  c.algorithm = Algorithm::MTM;
  c.chains = 1;
  c.trials = single_chain_variances().size();
  c.policy = LambdaPolicy::harmonic();
  std::vector<SpdMatrix> covs;
  for (const double v : single_chain_variances()) {
    covs.push_back(SpdMatrix::scaled_identity(dim, v));
  }
  c.kernels.push_back(std::make_shared<MixtureRWProposal>(std::vector<double>(covs.size(), 0.25), std::move(covs)));
  c.iterations = iterations;
  c.seed = seed;
  return c;
}

SingleChainResult run_bivariate_comparison(const SingleChainOptions& options) {
  return run_single_chain(options, make_bivariate_mixture(), Vector::Zero(2), "bivariate");
}

SingleChainResult run_multivariate_comparison(const SingleChainOptions& options, std::uint64_t target_seed,
                                              std::size_t dim) {
  RngStream rng(target_seed, 0);
  auto target = make_wishart_mixture(rng, dim, static_cast<double>(dim) + 1.0);
  return run_single_chain(options, target, target->means()[1], "multivariate");
}

SamplerConfig bimodal_imtm_config(const BimodalOptions& options, LambdaPolicy policy) {
  SamplerConfig c;
  c.algorithm = Algorithm::IMTM;
  c.chains = options.chains;
  c.trials = options.trials;
  c.policy = std::move(policy);
  c.assignment = AssignmentStrategy::Fixed;
  for (std::size_t j = 1; j <= options.trials; ++j) {
    c.kernels.push_back(std::make_shared<AnchoredRWProposal>(
        SpdMatrix::scaled_identity(2, 0.1 + 5.0 * static_cast<double>(j))));
  }
  c.iterations = options.iterations;
  c.seed = options.seed;
  c.init_center = options.init_center;
  c.init_scale = options.init_scale;
  c.threads = options.threads;
  return c;
}

std::vector<BimodalVariant> run_bimodal_imtm(const BimodalOptions& options) {
  const auto target = make_bivariate_mixture();
  std::vector<BimodalVariant> out;
  const std::vector<std::pair<std::string, LambdaPolicy>> variants{{"imtm-is", LambdaPolicy::power_product(1.0)},
                                                                    {"imtm-ta", LambdaPolicy::harmonic()}};
  for (const auto& [name, policy] : variants) {
    RunResult r = run(bimodal_imtm_config(options, policy), target);
    BimodalVariant v{name, 0.0, 0.0, 0, Vector(), std::move(r.trace)};
    const std::size_t last = v.trace.iterations() - 1;
    const std::size_t quarter = last - last / 4;
    v.final_quarter_mode2 = mode2_fraction(v.trace.pooled(quarter), *target);
    std::vector<Vector> final_points;
    for (std::size_t i = 0; i < v.trace.chains(); ++i) {
      final_points.push_back(v.trace.position(last, i));
    }
    v.final_iteration_mode2 = mode2_fraction(final_points, *target);
    for (std::size_t i = 0; i < v.trace.chains(); ++i) {
      const auto path = v.trace.chain_positions(i);
      for (std::size_t n = 1; n < path.size(); ++n) {
        if (in_upper_mode(path[n]) != in_upper_mode(path[n - 1])) {
          ++v.crossing_chains;
          break;
        }
      }
    }
    const auto half = v.trace.pooled(last / 2);
    v.pooled_mean = Vector::Zero(2);
    for (const auto& x : half) {
      v.pooled_mean += x;
    }
    v.pooled_mean /= static_cast<double>(half.size());
    out.push_back(std::move(v));
  }
  return out;
}

ClusterSplit split_clusters(const std::vector<Vector>& points) {
  ClusterSplit out;
  out.centroid_below = Vector::Zero(2);
  out.centroid_above = Vector::Zero(2);
  for (const auto& p : points) {
    if (p[0] < p[1]) {
      out.centroid_below += p;
      ++out.below;
    } else {
      out.centroid_above += p;
      ++out.above;
    }
  }
  if (out.below == 0 || out.above == 0) {
    return out;
  }
  out.centroid_below /= static_cast<double>(out.below);
  out.centroid_above /= static_cast<double>(out.above);
  double ss_below = 0.0;
  double ss_above = 0.0;
  for (const auto& p : points) {
    if (p[0] < p[1]) {
      ss_below += (p - out.centroid_below).squaredNorm();
    } else {
      ss_above += (p - out.centroid_above).squaredNorm();
    }
  }
  const double spread = std::max(std::sqrt(ss_below / static_cast<double>(out.below)),
                                 std::sqrt(ss_above / static_cast<double>(out.above)));
  out.separated = (out.centroid_below - out.centroid_above).norm() > 3.0 * spread;
  return out;
}

std::vector<Vector> betabin_prior_draws(RngStream& rng, std::size_t count) {
  std::vector<Vector> out;
  for (std::size_t i = 0; i < count; ++i) {
    Vector x(4);
    x << rng.uniform_open(), rng.uniform_open(), rng.uniform_open(),
        -BetaBinomialPosterior::kGammaBound + 2.0 * BetaBinomialPosterior::kGammaBound * rng.uniform_open();
    out.push_back(x);
  }
  return out;
}

SamplerConfig betabin_imtm_config(const BetaBinomialOptions& options) {
  SamplerConfig c;
  c.algorithm = Algorithm::IMTM;
  c.chains = options.chains;
  c.trials = options.trials;
  c.policy = LambdaPolicy::power_product(1.0);
  c.assignment = AssignmentStrategy::AnchoredRandom;
  const std::vector<double> scales{0.02, 0.05, 0.1, 0.2};
  for (std::size_t j = 0; j < options.trials; ++j) {
    const double s = scales[j % scales.size()];
    Vector diag(4);
    diag << s * s, s * s, s * s, (30.0 * s) * (30.0 * s);
    c.kernels.push_back(std::make_shared<AnchoredRWProposal>(SpdMatrix::diagonal(diag)));
  }
  c.iterations = options.iterations;
  c.seed = options.seed;
  c.threads = options.threads;
  RngStream init(options.seed, options.chains + 1);
  c.initial_positions = betabin_prior_draws(init, options.chains);
  return c;
}

BetaBinomialResult run_betabinomial(const std::vector<LohObservation>& data, const BetaBinomialOptions& options) {
  const auto target = std::make_shared<BetaBinomialPosterior>(data);
  RunResult r = run(betabin_imtm_config(options), target);
  BetaBinomialResult out{{}, {}, std::move(r.trace)};
  for (const std::size_t h : options.horizons) {
    if (h >= out.trace.iterations()) {
      throw InvalidParameterError("beta-binomial horizon beyond the run length");
    }
    std::vector<Vector> pop;
    for (std::size_t i = 0; i < out.trace.chains(); ++i) {
      const Vector x = out.trace.position(h, i);
      Vector p(2);
      p << x[1], x[2];
      pop.push_back(p);
    }
    out.clusters.push_back(split_clusters(pop));
    out.populations.push_back(std::move(pop));
  }
  return out;
}

SvComparisonOptions sv_default_options(const SvParameters& truth, std::uint64_t seed, std::size_t datasets) {
  SvComparisonOptions o;
  o.dataset_seeds = derived_seeds(seed, datasets);
  o.truth = truth;
  o.imtm.chains = 20;
  o.imtm.trials = 5;
  o.imtm.iterations = 1000;
  o.mh.iterations = 100000;
  return o;
}

std::vector<SvDatasetResult> run_sv_comparison(const SvComparisonOptions& options) {
  std::vector<SvDatasetResult> out;
  for (const std::uint64_t seed : options.dataset_seeds) {
    SvDatasetResult r;
    RngStream data_rng(seed, 0);
    r.data = simulate_sv(data_rng, options.length, options.truth);
    const SVModel model(r.data.y);
    SvSamplerConfig ic = options.imtm;
    ic.seed = derive_seed(seed, 1);
    SvSamplerConfig mc = options.mh;
    mc.seed = derive_seed(seed, 2);
    r.imtm = imtm_within_gibbs(model, ic);
    r.mh = mh_within_gibbs(model, mc);
    const auto sq = [](double a, double b) { return (a - b) * (a - b); };
    r.phi_se_imtm = sq(r.imtm.phi, options.truth.phi);
    r.phi_se_mh = sq(r.mh.phi, options.truth.phi);
    r.sigma2_se_imtm = sq(r.imtm.sigma2, options.truth.sigma2);
    r.sigma2_se_mh = sq(r.mh.sigma2, options.truth.sigma2);
    r.rmse_imtm = cumulative_rmse(r.imtm.h, r.data.h);
    r.rmse_mh = cumulative_rmse(r.mh.h, r.data.h);
    out.push_back(std::move(r));
  }
  return out;
}

ExperimentOutput reproduce_experiment(const std::string& id, const ReproduceOptions& options) {
  ExperimentOutput out;
  const std::string tag = seed_tag(options.seed);
  if (id == "e1-bivariate-mtmdp" || id == "e2-multivariate") {
    const bool bivariate = id == "e1-bivariate-mtmdp";
    SingleChainOptions sc;
    sc.seeds = derived_seeds(options.seed, bivariate ? 10 : 5);
    const SingleChainResult r =
        bivariate ? run_bivariate_comparison(sc) : run_multivariate_comparison(sc, derive_seed(options.seed, 100));
    out.report = r.report;
    out.artifacts.push_back({"acf_mtm-dp_" + tag + ".csv", acf_csv(r.acf_dp)});
    out.artifacts.push_back({"acf_mtm_" + tag + ".csv", acf_csv(r.acf_mtm)});
    std::size_t better = 0;
    for (std::size_t k = 0; k < r.acf_dp.size(); ++k) {
      std::vector<double> dp_k;
      std::vector<double> mix_k;
      for (std::size_t s = 0; s < r.iact_dp.size(); ++s) {
        dp_k.push_back(r.iact_dp[s][k]);
        mix_k.push_back(r.iact_mtm[s][k]);
      }
      better += median(dp_k) < median(mix_k) ? 1 : 0;
    }
    out.report.add("mtm-dp", "coordinates_with_lower_median_iact", "all", static_cast<double>(better),
                   r.iact_dp.size());
  } else if (id == "e3-imtm-bimodal") {
    BimodalOptions bo;
    bo.seed = options.seed;
    bo.threads = options.threads;
    const auto variants = run_bimodal_imtm(bo);
    out.report.add_seed(options.seed);
    for (const auto& v : variants) {
      out.report.add(v.name, "final_quarter_mode2_fraction", "pooled", v.final_quarter_mode2);
      out.report.add(v.name, "final_iteration_mode2_fraction", "pooled", v.final_iteration_mode2);
      out.report.add(v.name, "chains_crossing_modes", "count", static_cast<double>(v.crossing_chains));
      out.report.add(v.name, "second_half_mean", "x_1", v.pooled_mean[0]);
      out.report.add(v.name, "second_half_mean", "x_2", v.pooled_mean[1]);
      out.artifacts.push_back({"trace_" + v.name + "_" + tag + ".csv", trace_csv(v.trace)});
    }
  } else if (id == "e4-betabinomial") {
    std::vector<LohObservation> data;
    if (!options.data_path.empty()) {
      data = read_loh_csv(options.data_path);
    } else if (options.synthetic) {
      data = synthetic_loh(options.seed);
    } else {
      throw ConfigError("e4-betabinomial needs a data CSV (--data) or --synthetic");
    }
    BetaBinomialOptions bo;
    bo.seed = options.seed;
    bo.threads = options.threads;
    const BetaBinomialResult r = run_betabinomial(data, bo);
    out.report.add_seed(options.seed);
    std::ostringstream pops;
    pops << "horizon,chain,pi1,pi2\n";
    for (std::size_t h = 0; h < bo.horizons.size(); ++h) {
      const std::string param = "iteration_" + std::to_string(bo.horizons[h]);
      out.report.add("imtm", "chains_pi1_below_pi2", param, static_cast<double>(r.clusters[h].below));
      out.report.add("imtm", "chains_pi1_above_pi2", param, static_cast<double>(r.clusters[h].above));
      out.report.add("imtm", "clusters_separated", param, r.clusters[h].separated ? 1.0 : 0.0);
      for (std::size_t i = 0; i < r.populations[h].size(); ++i) {
        pops << bo.horizons[h] << ',' << i << ',' << format_double(r.populations[h][i][0]) << ','
             << format_double(r.populations[h][i][1]) << '\n';
      }
    }
    out.artifacts.push_back({"population_imtm_" + tag + ".csv", pops.str()});
    out.artifacts.push_back({"trace_imtm_" + tag + ".csv", trace_csv(r.trace)});
  } else if (id == "e5-sv") {
    const std::vector<std::pair<std::string, SvParameters>> settings{{"daily", {0.0, 0.99, 0.01}},
                                                                      {"weekly", {0.0, 0.9, 0.1}}};
    out.report.add_seed(options.seed);
    for (const auto& [name, truth] : settings) {
      const auto results = run_sv_comparison(sv_default_options(truth, derive_seed(options.seed, name.size()), 5));
      std::vector<double> phi_i, phi_m, s2_i, s2_m;
      std::ostringstream rmse;
      rmse << "dataset,t,imtm,mh\n";
      for (std::size_t d = 0; d < results.size(); ++d) {
        phi_i.push_back(results[d].imtm.phi);
        phi_m.push_back(results[d].mh.phi);
        s2_i.push_back(results[d].imtm.sigma2);
        s2_m.push_back(results[d].mh.sigma2);
        for (std::size_t t = 0; t < results[d].rmse_imtm.size(); ++t) {
          rmse << d << ',' << (t + 1) << ',' << format_double(results[d].rmse_imtm[t]) << ','
               << format_double(results[d].rmse_mh[t]) << '\n';
        }
      }
      const auto add_mse = [&](const std::string& method, const std::string& param, const std::vector<double>& est,
                               double truth_value) {
        const MseSummary m = mse_report(est, truth_value);
        out.report.add(method, name + "_mse", param, m.mse, m.replicates);
        out.report.add(method, name + "_mse_sd", param, m.sd, m.replicates);
      };
      add_mse("imtm-gibbs", "phi", phi_i, truth.phi);
      add_mse("mh-gibbs", "phi", phi_m, truth.phi);
      add_mse("imtm-gibbs", "sigma2", s2_i, truth.sigma2);
      add_mse("mh-gibbs", "sigma2", s2_m, truth.sigma2);
      out.artifacts.push_back({"rmse_" + name + "_" + tag + ".csv", rmse.str()});
    }
  } else {
    std::string valid;
    for (const auto& v : experiment_ids()) {
      valid += (valid.empty() ? "" : ", ") + v;
    }
    throw ConfigError("unknown experiment id '" + id + "'; valid ids: " + valid);
  }
  out.artifacts.push_back({"report_" + id + "_" + tag + ".csv", out.report.to_csv()});
  out.artifacts.push_back({"summary_" + id + "_" + tag + ".txt", out.report.summary(id)});
  return out;
}

ExperimentOutput run_experiment(const ExperimentConfig& config) {
  ExperimentOutput out;
  const TargetPtr target = build_target(config.target);
  const std::string alg = to_string(config.sampler.algorithm);
  for (std::size_t r = 0; r < config.replicates; ++r) {
    SamplerConfig sc = config.sampler;
    sc.seed = r == 0 ? config.seed : derive_seed(config.seed, r);
    const RunResult result = run(sc, target);
    const ChainTrace& trace = result.trace;
    const std::string tag = alg + "_" + seed_tag(sc.seed);

    ComparisonReport report;
    report.add_seed(sc.seed);
    const std::size_t burn = std::min(config.diagnostics.burn_in, trace.iterations() - 1);
    for (std::size_t i = 0; i < trace.chains(); ++i) {
      report.add(alg, "acceptance_rate", "chain" + std::to_string(i + 1), trace.acceptance_rate(i));
    }
    const auto pooled = trace.pooled(burn);
    for (std::size_t k = 0; k < trace.dim(); ++k) {
      const std::string param = "x_" + std::to_string(k + 1);
      std::vector<double> values;
      for (const auto& x : pooled) {
        values.push_back(x[static_cast<Eigen::Index>(k)]);
      }
      report.add(alg, "mean", param, mean(values), trace.chains());
      if (values.size() >= 100) {
        const Interval hpd = hpd_interval(values, config.diagnostics.hpd_level);
        report.add(alg, "hpd_lo", param, hpd.lo, trace.chains());
        report.add(alg, "hpd_hi", param, hpd.hi, trace.chains());
      }
      if (config.diagnostics.acf && trace.iterations() - burn > config.diagnostics.max_lag + 1) {
        double total = 0.0;
        std::size_t used = 0;
        for (std::size_t i = 0; i < trace.chains(); ++i) {
          const auto series = trace.series(i, k, burn);
          try {
            total += iact(series);
            ++used;
          } catch (const InvalidParameterError&) {
          }
        }
        if (used > 0) {
          report.add(alg, "iact", param, total / static_cast<double>(used), used);
        }
      }
    }
    report.add(alg, "stuck_steps", "all", static_cast<double>(result.counters.stuck));
    report.add(alg, "degenerate_ratios", "all", static_cast<double>(result.counters.degenerate_ratio));
    out.artifacts.push_back({"trace_" + tag + ".csv", trace_csv(trace)});
    out.artifacts.push_back({"report_" + tag + ".csv", report.to_csv()});
    out.artifacts.push_back({"summary_" + tag + ".txt", report.summary(tag)});
    if (r == 0) {
      out.report = report;
    }
  }
  out.artifacts.push_back({"config_" + alg + "_" + seed_tag(config.seed) + ".ini", render_experiment_config(config)});
  return out;
}

ExperimentOutput diagnose_trace(const ChainTrace& trace, const std::string& spec_text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    std::istringstream in(spec_text);
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("diagnostics spec line " + std::to_string(e.line()) + ": " + e.message());
  }
  static const std::map<std::string, std::set<std::string>> keys{
      {"trace", {"burn_in"}}, {"acf", {"max_lag"}}, {"hpd", {"level"}}, {"occupancy", {"centers", "variances", "radius"}}};
  std::vector<std::string> errors;
  for (const auto& [section, child] : tree) {
    const auto it = keys.find(section);
    if (it == keys.end()) {
      errors.push_back(section + ": unknown section");
      continue;
    }
    for (const auto& [key, value] : child) {
      if (!it->second.count(key)) {
        errors.push_back(section + "." + key + ": unknown key");
      }
    }
  }
  if (!errors.empty()) {
    throw ConfigError(std::move(errors));
  }
  const auto get = [&](const std::string& section, const std::string& key) -> std::optional<std::string> {
    const auto sec = tree.get_child_optional(section);
    if (!sec) {
      return std::nullopt;
    }
    const auto v = sec->get_optional<std::string>(key);
    return v ? std::optional<std::string>(*v) : std::nullopt;
  };
  const auto number = [&](const std::string& section, const std::string& key, double fallback) {
    const auto v = get(section, key);
    if (!v) {
      return fallback;
    }
    char* end = nullptr;
    const double d = std::strtod(v->c_str(), &end);
    if (v->empty() || end != v->c_str() + v->size()) {
      throw ConfigError(section + "." + key + ": expected a number, found '" + *v + "'");
    }
    return d;
  };

  ExperimentOutput out;
  const auto burn = static_cast<std::size_t>(number("trace", "burn_in", 0.0));
  if (burn >= trace.iterations()) {
    throw ConfigError("trace.burn_in: exceeds the recorded iterations");
  }
  const auto pooled = trace.pooled(burn);
  if (tree.get_child_optional("acf")) {
    const auto max_lag = static_cast<std::size_t>(number("acf", "max_lag", 30.0));
    std::ostringstream iacts;
    iacts << "coordinate,iact\n";
    for (std::size_t k = 0; k < trace.dim(); ++k) {
      std::vector<double> avg(max_lag + 1, 0.0);
      double iact_sum = 0.0;
      for (std::size_t i = 0; i < trace.chains(); ++i) {
        const auto series = trace.series(i, k, burn);
        if (series.size() <= max_lag) {
          throw ConfigError("acf.max_lag: trace too short for the requested lags");
        }
        const auto a = acf(series, max_lag);
        for (std::size_t lag = 0; lag <= max_lag; ++lag) {
          avg[lag] += a[lag] / static_cast<double>(trace.chains());
        }
        iact_sum += iact(series);
      }
      std::ostringstream csv;
      csv << "lag,acf\n";
      for (std::size_t lag = 0; lag <= max_lag; ++lag) {
        csv << lag << ',' << format_double(avg[lag]) << '\n';
      }
      out.artifacts.push_back({"acf_x" + std::to_string(k + 1) + ".csv", csv.str()});
      iacts << (k + 1) << ',' << format_double(iact_sum / static_cast<double>(trace.chains())) << '\n';
    }
    out.artifacts.push_back({"iact.csv", iacts.str()});
  }
  if (tree.get_child_optional("hpd")) {
    const double level = number("hpd", "level", 0.9);
    if (!(level > 0.0 && level < 1.0)) {
      throw ConfigError("hpd.level: must lie in (0, 1)");
    }
    for (std::size_t k = 0; k < trace.dim(); ++k) {
      std::vector<double> values;
      for (const auto& x : pooled) {
        values.push_back(x[static_cast<Eigen::Index>(k)]);
      }
      if (values.size() < 100) {
        throw ConfigError("hpd: needs at least 100 pooled samples");
      }
      const Interval hpd = hpd_interval(values, level);
      out.artifacts.push_back({"hpd_x" + std::to_string(k + 1) + ".csv",
                               "lo,hi\n" + format_double(hpd.lo) + "," + format_double(hpd.hi) + "\n"});
    }
  }
  if (tree.get_child_optional("occupancy")) {
    const auto centers = parse_points(get("occupancy", "centers").value_or(""));
    const auto variances = parse_points(get("occupancy", "variances").value_or(""));
    const double radius = number("occupancy", "radius", 5.0);
    if (centers.empty() || centers.size() != variances.size()) {
      throw ConfigError("occupancy: need one diagonal variance vector per centre");
    }
    std::vector<SpdMatrix> covs;
    for (std::size_t m = 0; m < centers.size(); ++m) {
      if (static_cast<std::size_t>(centers[m].size()) != trace.dim() ||
          static_cast<std::size_t>(variances[m].size()) != trace.dim()) {
        throw ConfigError("occupancy: centre and variance dimensions must match the trace");
      }
      try {
        covs.push_back(SpdMatrix::diagonal(variances[m]));
      } catch (const Error& e) {
        throw ConfigError(std::string("occupancy.variances: ") + e.what());
      }
    }
    if (!(radius > 0.0)) {
      throw ConfigError("occupancy.radius: must be positive");
    }
    const auto fractions = mode_occupancy(pooled, centers, covs, radius);
    std::ostringstream csv;
    csv << "mode,fraction\n";
    for (std::size_t m = 0; m < fractions.size(); ++m) {
      csv << (m < centers.size() ? std::to_string(m + 1) : std::string("other")) << ','
          << format_double(fractions[m]) << '\n';
    }
    out.artifacts.push_back({"occupancy.csv", csv.str()});
  }
  return out;
}

void write_artifacts(const std::string& dir, const std::vector<Artifact>& artifacts) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw Error("cannot create output directory '" + dir + "'");
  }
  std::vector<fs::path> written;
  try {
    for (const auto& a : artifacts) {
      const fs::path path = fs::path(dir) / a.name;
      write_file_atomic(path.string(), a.contents);
      written.push_back(path);
    }
  } catch (...) {
    for (const auto& p : written) {
      fs::remove(p, ec);
    }
    throw;
  }
}

}  // namespace imtm
