#include "imtm/targets.hpp"

#include "imtm/distributions.hpp"
#include "imtm/error.hpp"

#include <cmath>
#include <limits>
#include <numeric>

namespace imtm {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double xlogy(double x, double y) { return x == 0.0 ? 0.0 : x * std::log(y); }

double log_choose(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

/// log Gamma(a + count) - log Gamma(a) for integer count >= 0.
double log_rising(double a, int count) {
  if (a < 1e5) {
    return std::lgamma(a + count) - std::lgamma(a);
  }
  // lgamma differences lose all precision at huge arguments; sum the factors instead.
  double s = 0.0;
  for (int k = 0; k < count; ++k) {
    s += std::log(a + k);
  }
  return s;
}

}  // namespace

bool TargetDensity::in_support(const Vector& x) const { return std::isfinite(log_density(x)); }

std::optional<Vector> TargetDensity::gradient(const Vector&) const { return std::nullopt; }

Vector numerical_gradient(const TargetDensity& target, const Vector& x, double step) {
  Vector g(x.size());
  Vector probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = step * std::max(1.0, std::abs(x[i]));
    probe[i] = x[i] + h;
    const double up = target.log_density(probe);
    probe[i] = x[i] - h;
    const double down = target.log_density(probe);
    probe[i] = x[i];
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

Vector gradient_or_numerical(const TargetDensity& target, const Vector& x) {
  if (auto g = target.gradient(x)) {
    return *std::move(g);
  }
  return numerical_gradient(target, x);
}

// ---------------------------------------------------------------------------

GaussianMixtureTarget::GaussianMixtureTarget(std::vector<double> weights, std::vector<Vector> means,
                                             std::vector<SpdMatrix> covariances)
    : weights_(std::move(weights)), means_(std::move(means)), covariances_(std::move(covariances)) {
  if (weights_.empty() || weights_.size() != means_.size() || weights_.size() != covariances_.size()) {
    throw DimensionError("GaussianMixtureTarget: weights, means and covariances must have equal non-zero length");
  }
  dim_ = static_cast<std::size_t>(means_.front().size());
  double total = 0.0;
  for (std::size_t k = 0; k < weights_.size(); ++k) {
    if (static_cast<std::size_t>(means_[k].size()) != dim_ || covariances_[k].dim() != dim_) {
      throw DimensionError("GaussianMixtureTarget: component dimensions differ");
    }
    if (!(weights_[k] > 0.0)) {
      throw InvalidParameterError("GaussianMixtureTarget: weights must be positive");
    }
    total += weights_[k];
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw InvalidParameterError("GaussianMixtureTarget: weights must sum to 1");
  }
  for (const double w : weights_) {
    log_weights_.push_back(std::log(w));
  }
}

double GaussianMixtureTarget::log_density(const Vector& x) const {
  if (static_cast<std::size_t>(x.size()) != dim_) {
    throw DimensionError("GaussianMixtureTarget: point has wrong dimension");
  }
  double terms[16];
  std::vector<double> spill;
  double* buf = terms;
  if (weights_.size() > 16) {
    spill.resize(weights_.size());
    buf = spill.data();
  }
  for (std::size_t k = 0; k < weights_.size(); ++k) {
    buf[k] = log_weights_[k] + mvn_logpdf(x, means_[k], covariances_[k]);
  }
  return log_sum_exp(std::span<const double>(buf, weights_.size()));
}

std::optional<Vector> GaussianMixtureTarget::gradient(const Vector& x) const {
  std::vector<double> logs(weights_.size());
  for (std::size_t k = 0; k < weights_.size(); ++k) {
    logs[k] = log_weights_[k] + mvn_logpdf(x, means_[k], covariances_[k]);
  }
  const double total = log_sum_exp(logs);
  Vector g = Vector::Zero(x.size());
  for (std::size_t k = 0; k < weights_.size(); ++k) {
    const double resp = std::exp(logs[k] - total);
    g -= resp * covariances_[k].solve(x - means_[k]);
  }
  return g;
}

Vector GaussianMixtureTarget::mixture_mean() const {
  Vector m = Vector::Zero(static_cast<Eigen::Index>(dim_));
  for (std::size_t k = 0; k < weights_.size(); ++k) {
    m += weights_[k] * means_[k];
  }
  return m;
}

Vector GaussianMixtureTarget::sample(RngStream& rng) const {
  double u = rng.uniform();
  std::size_t k = 0;
  while (k + 1 < weights_.size() && u >= weights_[k]) {
    u -= weights_[k];
    ++k;
  }
  return mvn_sample(rng, means_[k], covariances_[k]);
}

double mixture_log_density(const GaussianMixtureTarget& target, const Vector& x) { return target.log_density(x); }

std::shared_ptr<GaussianMixtureTarget> make_bivariate_mixture() {
  Vector mu1(2);
  mu1 << 0.0, 0.0;
  Vector mu2(2);
  mu2 << 10.0, 10.0;
  Vector s1(2);
  s1 << 0.1, 0.5;
  Vector s2(2);
  s2 << 0.5, 0.1;
  return std::make_shared<GaussianMixtureTarget>(std::vector<double>{1.0 / 3.0, 2.0 / 3.0},
                                                 std::vector<Vector>{mu1, mu2},
                                                 std::vector<SpdMatrix>{SpdMatrix::diagonal(s1), SpdMatrix::diagonal(s2)});
}

std::shared_ptr<GaussianMixtureTarget> make_wishart_mixture(RngStream& rng, std::size_t dim, double dof) {
  const auto n = static_cast<Eigen::Index>(dim);
  const SpdMatrix identity = SpdMatrix::identity(dim);
  SpdMatrix s1 = wishart_sample(rng, dof, identity);
  SpdMatrix s2 = wishart_sample(rng, dof, identity);
  return std::make_shared<GaussianMixtureTarget>(
      std::vector<double>{1.0 / 3.0, 2.0 / 3.0},
      std::vector<Vector>{Vector::Constant(n, 3.0), Vector::Constant(n, 10.0)},
      std::vector<SpdMatrix>{std::move(s1), std::move(s2)});
}

std::shared_ptr<GaussianMixtureTarget> make_standard_normal(std::size_t dim) {
  return std::make_shared<GaussianMixtureTarget>(std::vector<double>{1.0},
                                                 std::vector<Vector>{Vector::Zero(static_cast<Eigen::Index>(dim))},
                                                 std::vector<SpdMatrix>{SpdMatrix::identity(dim)});
}

// ---------------------------------------------------------------------------

TemperedTarget::TemperedTarget(TargetPtr base, double exponent) : base_(std::move(base)), exponent_(exponent) {
  if (!base_) {
    throw InvalidParameterError("TemperedTarget: missing base target");
  }
  if (!(exponent_ > 0.0 && exponent_ <= 1.0)) {
    throw InvalidParameterError("TemperedTarget: exponent must lie in (0, 1]");
  }
}

double TemperedTarget::log_density(const Vector& x) const {
  const double base = base_->log_density(x);
  if (!std::isfinite(base)) {
    return base;
  }
  return exponent_ * base;
}

std::optional<Vector> TemperedTarget::gradient(const Vector& x) const {
  auto g = base_->gradient(x);
  if (g) {
    *g *= exponent_;
  }
  return g;
}

// ---------------------------------------------------------------------------

BetaBinomialPosterior::BetaBinomialPosterior(std::vector<LohObservation> observations)
    : observations_(std::move(observations)) {
  if (observations_.empty()) {
    throw InvalidParameterError("BetaBinomialPosterior: no observations");
  }
  for (const auto& obs : observations_) {
    if (obs.n < 0 || obs.x < 0 || obs.x > obs.n) {
      throw InvalidParameterError("BetaBinomialPosterior: observation requires 0 <= x <= n");
    }
    log_choose_.push_back(log_choose(obs.n, obs.x));
  }
}

bool BetaBinomialPosterior::in_support(const Vector& theta) const {
  if (theta.size() != 4) {
    return false;
  }
  for (int i = 0; i < 3; ++i) {
    if (!(theta[i] >= 0.0 && theta[i] <= 1.0)) {
      return false;
    }
  }
  return theta[3] >= -kGammaBound && theta[3] <= kGammaBound;
}

double BetaBinomialPosterior::log_density(const Vector& theta) const {
  if (!in_support(theta)) {
    return kNegInf;
  }
  const double eta = theta[0];
  const double pi1 = theta[1];
  const double pi2 = theta[2];
  const double omega = betabin_omega2(theta[3]);
  const double a = pi2 / omega;
  const double b = (1.0 - pi2) / omega;
  if (!(a > 0.0) || !(b > 0.0)) {
    throw InvalidParameterError("betabin_log_posterior: log-gamma argument is not positive (pi2 on the boundary)");
  }
  const double log_eta = std::log(eta);
  const double log_one_minus_eta = std::log1p(-eta);
  double total = 0.0;
  for (std::size_t j = 0; j < observations_.size(); ++j) {
    const int x = observations_[j].x;
    const int n = observations_[j].n;
    const double binom = log_choose_[j] + xlogy(x, pi1) + xlogy(n - x, 1.0 - pi1);
    const double betabin =
        log_choose_[j] + log_rising(a, x) + log_rising(b, n - x) - log_rising(a + b, n);
    const double term = log_sum_exp(log_eta + binom, log_one_minus_eta + betabin);
    if (std::isnan(term)) {
      throw InvalidParameterError("betabin_log_posterior: NaN likelihood term");
    }
    total += term;
  }
  return total;
}

double betabin_log_posterior(const BetaBinomialPosterior& posterior, const Vector& theta) {
  return posterior.log_density(theta);
}

double betabin_omega2(double gamma) {
  // exp(g) / (1 + exp(g)) computed without overflow
  const double logistic = gamma >= 0.0 ? 1.0 / (1.0 + std::exp(-gamma)) : std::exp(gamma) / (1.0 + std::exp(gamma));
  return 0.5 * logistic;
}

std::vector<LohObservation> simulate_loh(RngStream& rng, std::size_t count, double eta, double pi1, double pi2,
                                         double gamma, int n_min, int n_max) {
  if (n_min < 1 || n_max < n_min) {
    throw InvalidParameterError("simulate_loh: invalid n range");
  }
  const double omega = betabin_omega2(gamma);
  const double a = pi2 / omega;
  const double b = (1.0 - pi2) / omega;
  std::vector<LohObservation> out;
  out.reserve(count);
  for (std::size_t j = 0; j < count; ++j) {
    const int n = n_min + static_cast<int>(rng.index(static_cast<std::size_t>(n_max - n_min + 1)));
    double p = pi1;
    if (rng.uniform() >= eta) {
      const double ga = rng.gamma(a, 1.0);
      const double gb = rng.gamma(b, 1.0);
      p = ga / (ga + gb);
    }
    int x = 0;
    for (int k = 0; k < n; ++k) {
      x += rng.uniform() < p ? 1 : 0;
    }
    out.push_back({x, n});
  }
  return out;
}

std::vector<LohObservation> synthetic_loh(std::uint64_t seed) {
  RngStream rng(seed, 0);
  return simulate_loh(rng, 40, 0.9, 0.2, 0.8, 0.0, 15, 35);
}

// ---------------------------------------------------------------------------

GridTarget::GridTarget(std::vector<double> masses) : masses_(std::move(masses)) {
  if (masses_.empty()) {
    throw InvalidParameterError("GridTarget: at least one state required");
  }
  for (const double m : masses_) {
    if (!(m > 0.0) || !std::isfinite(m)) {
      throw InvalidParameterError("GridTarget: masses must be strictly positive");
    }
  }
}

std::optional<std::size_t> GridTarget::state_of(const Vector& x) const {
  if (x.size() != 1) {
    return std::nullopt;
  }
  const double r = std::round(x[0]);
  if (std::abs(x[0] - r) > 1e-9 || r < 0.0 || r >= static_cast<double>(masses_.size())) {
    return std::nullopt;
  }
  return static_cast<std::size_t>(r);
}

Vector GridTarget::point(std::size_t state) const {
  Vector p(1);
  p[0] = static_cast<double>(state);
  return p;
}

double GridTarget::log_density(const Vector& x) const {
  const auto s = state_of(x);
  return s ? std::log(masses_[*s]) : kNegInf;
}

std::vector<double> grid_normalize(const GridTarget& grid) {
  const double total = std::accumulate(grid.masses().begin(), grid.masses().end(), 0.0);
  std::vector<double> out;
  out.reserve(grid.size());
  for (const double m : grid.masses()) {
    out.push_back(m / total);
  }
  return out;
}

// ---------------------------------------------------------------------------

FunctionTarget::FunctionTarget(std::size_t dim, LogDensityFn log_density, std::string name)
    : dim_(dim), fn_(std::move(log_density)), name_(std::move(name)) {}

}  // namespace imtm
