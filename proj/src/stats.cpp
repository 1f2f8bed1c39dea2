#include "imtm/stats.hpp"

#include "imtm/error.hpp"

#include <cmath>

namespace imtm {

namespace {

/// Biased autocovariance at one lag around a precomputed mean.
double autocovariance(std::span<const double> series, double mu, std::size_t lag) {
  const std::size_t n = series.size();
  double s = 0.0;
  for (std::size_t t = 0; t + lag < n; ++t) {
    s += (series[t] - mu) * (series[t + lag] - mu);
  }
  return s / static_cast<double>(n);
}

}  // namespace

double mean(std::span<const double> series) {
  if (series.empty()) {
    throw InvalidParameterError("mean of an empty series");
  }
  double s = 0.0;
  for (const double v : series) {
    s += v;
  }
  return s / static_cast<double>(series.size());
}

double variance(std::span<const double> series) {
  if (series.size() < 2) {
    throw InvalidParameterError("variance needs at least two values");
  }
  const double mu = mean(series);
  double s = 0.0;
  for (const double v : series) {
    s += (v - mu) * (v - mu);
  }
  return s / static_cast<double>(series.size() - 1);
}

std::vector<double> acf(std::span<const double> series, std::size_t max_lag) {
  if (series.size() <= max_lag) {
    throw InvalidParameterError("acf: series length must exceed max_lag");
  }
  const double mu = mean(series);
  const double c0 = autocovariance(series, mu, 0);
  if (!(c0 > 0.0)) {
    throw InvalidParameterError("acf: series is constant, variance undefined");
  }
  std::vector<double> out(max_lag + 1);
  out[0] = 1.0;
  for (std::size_t k = 1; k <= max_lag; ++k) {
    out[k] = autocovariance(series, mu, k) / c0;
  }
  return out;
}

double iact(std::span<const double> series) {
  const std::size_t n = series.size();
  if (n < 4) {
    throw InvalidParameterError("iact: series too short");
  }
  const double mu = mean(series);
  const double c0 = autocovariance(series, mu, 0);
  if (!(c0 > 0.0)) {
    throw InvalidParameterError("iact: series is constant, variance undefined");
  }
  // tau = -1 + 2 * sum_m (rho_{2m} + rho_{2m+1}) while the pair sums stay positive
  double tau = -1.0;
  for (std::size_t m = 0; 2 * m + 1 < n; ++m) {
    const double pair = (autocovariance(series, mu, 2 * m) + autocovariance(series, mu, 2 * m + 1)) / c0;
    if (!(pair > 0.0)) {
      break;
    }
    tau += 2.0 * pair;
  }
  return tau;
}

}  // namespace imtm
