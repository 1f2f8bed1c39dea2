#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace imtm {

double mean(std::span<const double> series);
/// Sample variance with divisor n - 1.
double variance(std::span<const double> series);

/// Sample autocorrelation for lags 0..max_lag using the biased (divide-by-n)
/// autocovariance. Throws InvalidParameterError for a constant series.
std::vector<double> acf(std::span<const double> series, std::size_t max_lag);

/// Integrated autocorrelation time 1 + 2 sum_k rho_k, truncated with Geyer's
/// initial positive sequence rule on paired lags.
double iact(std::span<const double> series);

}  // namespace imtm
