#include "imtm/config.hpp"

#include "imtm/error.hpp"
#include "imtm/trace.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace imtm {

namespace {

namespace pt = boost::property_tree;

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"target", {"kind", "dim", "masses", "wishart_seed", "data", "synthetic", "synthetic_seed"}},
      {"proposal", {"kind", "variances", "mixture_weights", "offsets", "probabilities"}},
      {"sampler",
       {"algorithm", "chains", "trials", "iterations", "lambda", "alpha", "nu_weighted", "slot_factors", "assignment",
        "ladder", "init_center", "init_scale", "ray_sigma2", "threads"}},
      {"diagnostics", {"acf", "max_lag", "hpd_level", "burn_in"}},
      {"run", {"seed", "replicates", "output_dir"}},
  };
  return keys;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) {
    return "";
  }
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

/// Reads typed values out of the tree, recording failures instead of throwing.
class Reader {
 public:
  Reader(const pt::ptree& tree, std::vector<std::string>& errors) : tree_(tree), errors_(errors) {}

  std::optional<std::string> raw(const std::string& section, const std::string& key) const {
    const auto sec = tree_.get_child_optional(section);
    if (!sec) {
      return std::nullopt;
    }
    const auto v = sec->get_optional<std::string>(pt::ptree::path_type(key, '\0'));
    if (!v) {
      return std::nullopt;
    }
    return trim(*v);
  }

  void str(const std::string& section, const std::string& key, std::string& out) const {
    if (auto v = raw(section, key)) {
      out = *v;
    }
  }

  template <typename Unsigned>
  void uint(const std::string& section, const std::string& key, Unsigned& out) const {
    if (auto v = raw(section, key)) {
      if (v->empty() || v->find_first_not_of("0123456789") != std::string::npos) {
        fail(section, key, "expected a non-negative integer, found '" + *v + "'");
        return;
      }
      errno = 0;
      const unsigned long long parsed = std::strtoull(v->c_str(), nullptr, 10);
      if (errno == ERANGE) {
        fail(section, key, "integer out of range");
        return;
      }
      out = static_cast<Unsigned>(parsed);
    }
  }

  void real(const std::string& section, const std::string& key, double& out) const {
    if (auto v = raw(section, key)) {
      if (auto d = to_double(*v)) {
        out = *d;
      } else {
        fail(section, key, "expected a number, found '" + *v + "'");
      }
    }
  }

  void boolean(const std::string& section, const std::string& key, bool& out) const {
    if (auto v = raw(section, key)) {
      if (*v == "true" || *v == "1") {
        out = true;
      } else if (*v == "false" || *v == "0") {
        out = false;
      } else {
        fail(section, key, "expected true or false, found '" + *v + "'");
      }
    }
  }

  void reals(const std::string& section, const std::string& key, std::vector<double>& out) const {
    if (auto v = raw(section, key)) {
      std::vector<double> values;
      for (const auto& item : split(*v)) {
        if (auto d = to_double(item)) {
          values.push_back(*d);
        } else {
          fail(section, key, "expected a comma-separated list of numbers, found '" + item + "'");
          return;
        }
      }
      out = std::move(values);
    }
  }

  void ints(const std::string& section, const std::string& key, std::vector<int>& out) const {
    std::vector<double> values;
    reals(section, key, values);
    if (raw(section, key)) {
      out.clear();
      for (const double d : values) {
        if (d != static_cast<double>(static_cast<int>(d))) {
          fail(section, key, "expected integers");
          return;
        }
        out.push_back(static_cast<int>(d));
      }
    }
  }

  void fail(const std::string& section, const std::string& key, const std::string& msg) const {
    errors_.push_back(section + "." + key + ": " + msg);
  }

  static std::vector<std::string> split(const std::string& text) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, ',')) {
      out.push_back(trim(item));
    }
    return out;
  }

  static std::optional<double> to_double(const std::string& text) {
    if (text.empty()) {
      return std::nullopt;
    }
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (end != text.c_str() + text.size() || errno == ERANGE) {
      return std::nullopt;
    }
    return v;
  }

 private:
  const pt::ptree& tree_;
  std::vector<std::string>& errors_;
};

template <typename T>
std::string join(const std::vector<T>& values) {
  std::ostringstream out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) {
      out << ',';
    }
    if constexpr (std::is_floating_point_v<T>) {
      out << format_double(values[i]);
    } else {
      out << values[i];
    }
  }
  return out.str();
}

std::string join_vector(const Vector& v) {
  return join(std::vector<double>(v.data(), v.data() + v.size()));
}

}  // namespace

std::vector<LohObservation> read_loh_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("target.data: cannot open '" + path + "'");
  }
  std::vector<LohObservation> out;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    line = trim(line);
    if (line.empty() || (row == 1 && line.find_first_of("0123456789") != 0)) {
      continue;
    }
    const auto fields = Reader::split(line);
    if (fields.size() != 2) {
      throw ConfigError("target.data: row " + std::to_string(row) + " needs two fields x,n");
    }
    const auto x = Reader::to_double(fields[0]);
    const auto n = Reader::to_double(fields[1]);
    if (!x || !n || *x < 0 || *n < 1 || *x > *n || *x != static_cast<int>(*x) || *n != static_cast<int>(*n)) {
      throw ConfigError("target.data: row " + std::to_string(row) + " needs integers 0 <= x <= n, n >= 1");
    }
    out.push_back({static_cast<int>(*x), static_cast<int>(*n)});
  }
  if (out.empty()) {
    throw ConfigError("target.data: '" + path + "' holds no observations");
  }
  return out;
}

TargetPtr build_target(const TargetSpec& spec) {
  if (spec.kind == "standard-normal") {
    return make_standard_normal(spec.dim);
  }
  if (spec.kind == "bivariate-mixture") {
    return make_bivariate_mixture();
  }
  if (spec.kind == "wishart-mixture") {
    RngStream rng(spec.wishart_seed, 0);
    return make_wishart_mixture(rng, spec.dim, static_cast<double>(spec.dim) + 1.0);
  }
  if (spec.kind == "grid") {
    return std::make_shared<GridTarget>(spec.masses);
  }
  if (spec.kind == "beta-binomial") {
    if (spec.synthetic) {
      return std::make_shared<BetaBinomialPosterior>(synthetic_loh(spec.synthetic_seed));
    }
    if (spec.data_path.empty()) {
      throw ConfigError("target.data: beta-binomial needs a data file or synthetic = true");
    }
    return std::make_shared<BetaBinomialPosterior>(read_loh_csv(spec.data_path));
  }
  throw ConfigError("target.kind: unknown target '" + spec.kind + "'");
}

std::vector<KernelPtr> build_kernels(const ProposalSpec& spec, std::size_t dim) {
  std::vector<KernelPtr> out;
  if (spec.kind == "rw" || spec.kind == "anchored-rw") {
    for (const double v : spec.variances) {
      auto cov = SpdMatrix::scaled_identity(dim, v);
      if (spec.kind == "rw") {
        out.push_back(std::make_shared<GaussianRWProposal>(std::move(cov)));
      } else {
        out.push_back(std::make_shared<AnchoredRWProposal>(std::move(cov)));
      }
    }
  } else if (spec.kind == "mixture-rw") {
    std::vector<SpdMatrix> covs;
    for (const double v : spec.variances) {
      covs.push_back(SpdMatrix::scaled_identity(dim, v));
    }
    out.push_back(std::make_shared<MixtureRWProposal>(spec.mixture_weights, std::move(covs)));
  } else if (spec.kind == "discrete") {
    out.push_back(std::make_shared<DiscreteStepProposal>(spec.offsets, spec.probabilities));
  } else {
    throw ConfigError("proposal.kind: unknown proposal '" + spec.kind + "'");
  }
  return out;
}

ExperimentConfig parse_experiment_config(const std::string& text) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("config line " + std::to_string(e.line()) + ": " + e.message());
  }

  std::vector<std::string> errors;
  for (const auto& [section, child] : tree) {
    const auto it = schema().find(section);
    if (it == schema().end()) {
      if (child.empty()) {
        errors.push_back(section + ": key outside any section");
      } else {
        errors.push_back(section + ": unknown section");
      }
      continue;
    }
    for (const auto& [key, value] : child) {
      if (!it->second.count(key)) {
        errors.push_back(section + "." + key + ": unknown key");
      }
    }
  }

  ExperimentConfig cfg;
  const Reader r(tree, errors);
  r.str("target", "kind", cfg.target.kind);
  r.uint("target", "dim", cfg.target.dim);
  r.reals("target", "masses", cfg.target.masses);
  r.uint("target", "wishart_seed", cfg.target.wishart_seed);
  r.str("target", "data", cfg.target.data_path);
  r.boolean("target", "synthetic", cfg.target.synthetic);
  r.uint("target", "synthetic_seed", cfg.target.synthetic_seed);

  r.str("proposal", "kind", cfg.proposal.kind);
  r.reals("proposal", "variances", cfg.proposal.variances);
  r.reals("proposal", "mixture_weights", cfg.proposal.mixture_weights);
  r.ints("proposal", "offsets", cfg.proposal.offsets);
  r.reals("proposal", "probabilities", cfg.proposal.probabilities);

  SamplerConfig& s = cfg.sampler;
  std::string algorithm = "mh";
  r.str("sampler", "algorithm", algorithm);
  try {
    s.algorithm = parse_algorithm(algorithm);
  } catch (const InvalidParameterError& e) {
    errors.push_back(std::string("sampler.algorithm: ") + e.what());
  }
  r.uint("sampler", "chains", s.chains);
  r.uint("sampler", "trials", s.trials);
  r.uint("sampler", "iterations", s.iterations);
  r.str("sampler", "lambda", cfg.lambda);
  try {
    s.policy.kind = parse_lambda_kind(cfg.lambda);
  } catch (const InvalidParameterError& e) {
    errors.push_back(std::string("sampler.lambda: ") + e.what());
  }
  r.real("sampler", "alpha", s.policy.alpha);
  r.boolean("sampler", "nu_weighted", s.policy.nu_weighted);
  r.reals("sampler", "slot_factors", s.policy.slot_factors);
  std::string assignment = "fixed";
  r.str("sampler", "assignment", assignment);
  try {
    s.assignment = parse_assignment(assignment);
  } catch (const InvalidParameterError& e) {
    errors.push_back(std::string("sampler.assignment: ") + e.what());
  }
  r.str("sampler", "ladder", cfg.ladder);
  std::vector<double> center;
  r.reals("sampler", "init_center", center);
  if (!center.empty()) {
    s.init_center = Eigen::Map<const Vector>(center.data(), static_cast<Eigen::Index>(center.size()));
  }
  r.real("sampler", "init_scale", s.init_scale);
  r.real("sampler", "ray_sigma2", s.ray_sigma2);
  r.uint("sampler", "threads", s.threads);

  r.boolean("diagnostics", "acf", cfg.diagnostics.acf);
  r.uint("diagnostics", "max_lag", cfg.diagnostics.max_lag);
  r.real("diagnostics", "hpd_level", cfg.diagnostics.hpd_level);
  r.uint("diagnostics", "burn_in", cfg.diagnostics.burn_in);

  r.uint("run", "seed", cfg.seed);
  r.uint("run", "replicates", cfg.replicates);
  r.str("run", "output_dir", cfg.output_dir);
  s.seed = cfg.seed;

  if (!cfg.ladder.empty()) {
    try {
      if (cfg.ladder == "harmonic") {
        s.ladder = TemperatureLadder::harmonic(s.chains);
      } else {
        std::vector<double> xi;
        for (const auto& item : Reader::split(cfg.ladder)) {
          const auto d = Reader::to_double(item);
          if (!d) {
            throw InvalidParameterError("expected 'harmonic' or a list of exponents");
          }
          xi.push_back(*d);
        }
        s.ladder = TemperatureLadder(std::move(xi));
      }
    } catch (const InvalidParameterError& e) {
      errors.push_back(std::string("sampler.ladder: ") + e.what());
    }
  }
  if (cfg.replicates < 1) {
    errors.emplace_back("run.replicates: must be at least 1");
  }
  if (!(cfg.diagnostics.hpd_level > 0.0 && cfg.diagnostics.hpd_level < 1.0)) {
    errors.emplace_back("diagnostics.hpd_level: must lie in (0, 1)");
  }
  if (cfg.target.dim < 1) {
    errors.emplace_back("target.dim: must be at least 1");
  }

  if (errors.empty()) {
    try {
      const TargetPtr target = build_target(cfg.target);
      s.kernels = build_kernels(cfg.proposal, target->dim());
      for (auto& v : s.violations(target->dim())) {
        errors.push_back("sampler: " + v);
      }
    } catch (const ConfigError& e) {
      errors.insert(errors.end(), e.violations().begin(), e.violations().end());
    } catch (const Error& e) {
      errors.push_back(std::string("target/proposal: ") + e.what());
    }
  }
  if (!errors.empty()) {
    throw ConfigError(std::move(errors));
  }
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot read config file '" + path + "'");
  }
  std::ostringstream text;
  text << in.rdbuf();
  return parse_experiment_config(text.str());
}

std::string render_experiment_config(const ExperimentConfig& c) {
  std::ostringstream out;
  out << "[target]\n";
  out << "kind = " << c.target.kind << '\n';
  out << "dim = " << c.target.dim << '\n';
  if (!c.target.masses.empty()) {
    out << "masses = " << join(c.target.masses) << '\n';
  }
  out << "wishart_seed = " << c.target.wishart_seed << '\n';
  if (!c.target.data_path.empty()) {
    out << "data = " << c.target.data_path << '\n';
  }
  out << "synthetic = " << (c.target.synthetic ? "true" : "false") << '\n';
  out << "synthetic_seed = " << c.target.synthetic_seed << '\n';

  out << "\n[proposal]\n";
  out << "kind = " << c.proposal.kind << '\n';
  out << "variances = " << join(c.proposal.variances) << '\n';
  if (!c.proposal.mixture_weights.empty()) {
    out << "mixture_weights = " << join(c.proposal.mixture_weights) << '\n';
  }
  if (!c.proposal.offsets.empty()) {
    out << "offsets = " << join(c.proposal.offsets) << '\n';
    out << "probabilities = " << join(c.proposal.probabilities) << '\n';
  }

  const SamplerConfig& s = c.sampler;
  out << "\n[sampler]\n";
  out << "algorithm = " << to_string(s.algorithm) << '\n';
  out << "chains = " << s.chains << '\n';
  out << "trials = " << s.trials << '\n';
  out << "iterations = " << s.iterations << '\n';
  out << "lambda = " << to_string(s.policy.kind) << '\n';
  out << "alpha = " << format_double(s.policy.alpha) << '\n';
  out << "nu_weighted = " << (s.policy.nu_weighted ? "true" : "false") << '\n';
  if (!s.policy.slot_factors.empty()) {
    out << "slot_factors = " << join(s.policy.slot_factors) << '\n';
  }
  out << "assignment = " << to_string(s.assignment) << '\n';
  if (s.ladder) {
    out << "ladder = " << join(s.ladder->exponents()) << '\n';
  }
  if (s.init_center) {
    out << "init_center = " << join_vector(*s.init_center) << '\n';
  }
  out << "init_scale = " << format_double(s.init_scale) << '\n';
  out << "ray_sigma2 = " << format_double(s.ray_sigma2) << '\n';
  out << "threads = " << s.threads << '\n';

  out << "\n[diagnostics]\n";
  out << "acf = " << (c.diagnostics.acf ? "true" : "false") << '\n';
  out << "max_lag = " << c.diagnostics.max_lag << '\n';
  out << "hpd_level = " << format_double(c.diagnostics.hpd_level) << '\n';
  out << "burn_in = " << c.diagnostics.burn_in << '\n';

  out << "\n[run]\n";
  out << "seed = " << c.seed << '\n';
  out << "replicates = " << c.replicates << '\n';
  if (!c.output_dir.empty()) {
    out << "output_dir = " << c.output_dir << '\n';
  }
  return out.str();
}

}  // namespace imtm
