#include "imtm/diagnostics.hpp"

#include "imtm/error.hpp"
#include "imtm/trace.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace imtm {

std::string to_string(BalanceStatus status) {
  switch (status) {
    case BalanceStatus::Pass:
      return "pass";
    case BalanceStatus::Fail:
      return "fail";
    case BalanceStatus::Inconclusive:
      return "inconclusive";
  }
  return "inconclusive";
}

FlowEstimate detailed_balance_test(const TransitionFn& step, const GridTarget& grid, std::size_t transitions,
                                   std::uint64_t seed, double z_threshold) {
  const std::size_t k = grid.size();
  if (k < 2 || k > 10) {
    throw InvalidParameterError("detailed_balance_test: grid needs 2 to 10 states");
  }
  if (transitions == 0) {
    throw InvalidParameterError("detailed_balance_test: need at least one transition");
  }
  const std::vector<double> p = grid_normalize(grid);
  std::vector<double> cdf(k);
  double acc = 0.0;
  for (std::size_t s = 0; s < k; ++s) {
    acc += p[s];
    cdf[s] = acc;
  }
  std::vector<std::vector<std::size_t>> counts(k, std::vector<std::size_t>(k, 0));
  RngStream rng(seed, 0);
  for (std::size_t n = 0; n < transitions; ++n) {
    const double u = rng.uniform() * acc;
    std::size_t from = 0;
    while (from + 1 < k && u >= cdf[from]) {
      ++from;
    }
    const Vector next = step(rng, grid.point(from));
    const auto to = grid.state_of(next);
    if (!to) {
      throw InvalidParameterError("detailed_balance_test: the step left the grid");
    }
    ++counts[from][*to];
  }

  FlowEstimate est;
  est.transitions = transitions;
  const double total = static_cast<double>(transitions);
  est.flow.assign(k, std::vector<double>(k, 0.0));
  est.pair_se.assign(k, std::vector<double>(k, 0.0));
  double smallest = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = 0; b < k; ++b) {
      est.flow[a][b] = static_cast<double>(counts[a][b]) / total;
      if (a != b && est.flow[a][b] > 0.0) {
        smallest = std::min(smallest, est.flow[a][b]);
      }
    }
  }
  bool violated = false;
  bool precise = std::isfinite(smallest);
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = a + 1; b < k; ++b) {
      const double fab = est.flow[a][b];
      const double fba = est.flow[b][a];
      const double diff = fab - fba;
      // Multinomial variance of the difference of two cell frequencies.
      const double var = std::max(0.0, fab + fba - diff * diff) / total;
      const double se = std::sqrt(var);
      est.pair_se[a][b] = est.pair_se[b][a] = se;
      if (se > 0.0) {
        const double z = std::abs(diff) / se;
        est.max_z = std::max(est.max_z, z);
        violated = violated || z > z_threshold;
        precise = precise && se < 0.1 * smallest;
      }
    }
  }
  if (!precise) {
    est.status = BalanceStatus::Inconclusive;
  } else {
    est.status = violated ? BalanceStatus::Fail : BalanceStatus::Pass;
  }
  return est;
}

bool mahalanobis_balls_intersect(const Vector& a, const SpdMatrix& sa, const Vector& b, const SpdMatrix& sb,
                                 double radius) {
  // min_x max(q_a, q_b) equals max_s min_x (s q_a + (1 - s) q_b), a concave
  // function of s whose inner minimum is a weighted quadratic in a - b.
  const Vector d = a - b;
  const auto g = [&](double s) {
    if (s <= 0.0 || s >= 1.0) {
      return 0.0;
    }
    // Inner minimum: d^T (S_a / s + S_b / (1 - s))^{-1} d.
    const Matrix m = sa.matrix() / s + sb.matrix() / (1.0 - s);
    return d.dot(m.ldlt().solve(d));
  };
  double lo = 0.0;
  double hi = 1.0;
  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = hi - ratio * (hi - lo);
  double e = lo + ratio * (hi - lo);
  double gc = g(c);
  double ge = g(e);
  for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
    if (gc < ge) {
      lo = c;
      c = e;
      gc = ge;
      e = lo + ratio * (hi - lo);
      ge = g(e);
    } else {
      hi = e;
      e = c;
      ge = gc;
      c = hi - ratio * (hi - lo);
      gc = g(c);
    }
  }
  return std::max(gc, ge) <= radius * radius;
}

std::vector<double> mode_occupancy(std::span<const Vector> points, std::span<const Vector> centers,
                                   std::span<const SpdMatrix> covariances, double radius) {
  if (points.empty()) {
    throw InvalidParameterError("mode_occupancy: no samples");
  }
  if (!(radius > 0.0)) {
    throw InvalidParameterError("mode_occupancy: radius must be positive");
  }
  if (centers.empty() || centers.size() != covariances.size()) {
    throw DimensionError("mode_occupancy: one covariance per centre required");
  }
  for (std::size_t a = 0; a < centers.size(); ++a) {
    for (std::size_t b = a + 1; b < centers.size(); ++b) {
      if (mahalanobis_balls_intersect(centers[a], covariances[a], centers[b], covariances[b], radius)) {
        throw ConfigError("mode balls " + std::to_string(a + 1) + " and " + std::to_string(b + 1) + " overlap");
      }
    }
  }
  std::vector<double> out(centers.size() + 1, 0.0);
  const double r2 = radius * radius;
  for (const auto& x : points) {
    std::size_t bucket = centers.size();
    for (std::size_t m = 0; m < centers.size(); ++m) {
      if (covariances[m].quad_form(x - centers[m]) <= r2) {
        bucket = m;
        break;
      }
    }
    out[bucket] += 1.0;
  }
  for (auto& v : out) {
    v /= static_cast<double>(points.size());
  }
  return out;
}

MseSummary mse_report(std::span<const double> estimates, double truth) {
  if (estimates.size() < 2) {
    throw InvalidParameterError("mse_report: need at least two replicates");
  }
  std::vector<double> sq;
  sq.reserve(estimates.size());
  for (const double e : estimates) {
    sq.push_back((e - truth) * (e - truth));
  }
  MseSummary out;
  out.replicates = sq.size();
  double sum = 0.0;
  for (const double v : sq) {
    sum += v;
  }
  out.mse = sum / static_cast<double>(sq.size());
  double ss = 0.0;
  for (const double v : sq) {
    ss += (v - out.mse) * (v - out.mse);
  }
  out.sd = std::sqrt(ss / static_cast<double>(sq.size() - 1));
  return out;
}

std::vector<double> cumulative_rmse(std::span<const double> estimate, std::span<const double> truth) {
  if (estimate.size() != truth.size()) {
    throw DimensionError("cumulative_rmse: estimate and truth lengths differ");
  }
  std::vector<double> out(estimate.size());
  double ss = 0.0;
  for (std::size_t t = 0; t < estimate.size(); ++t) {
    const double e = estimate[t] - truth[t];
    ss += e * e;
    out[t] = std::sqrt(ss / static_cast<double>(t + 1));
  }
  return out;
}

Interval hpd_interval(std::span<const double> samples, double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw InvalidParameterError("hpd_interval: level must lie in (0, 1)");
  }
  if (samples.size() < 100) {
    throw InvalidParameterError("hpd_interval: need at least 100 samples");
  }
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  const auto k = static_cast<std::size_t>(std::ceil(level * static_cast<double>(n)));
  const std::size_t span_len = std::max<std::size_t>(1, std::min(k, n));
  Interval best{sorted.front(), sorted[span_len - 1]};
  for (std::size_t i = 0; i + span_len <= n; ++i) {
    const double width = sorted[i + span_len - 1] - sorted[i];
    if (width < best.hi - best.lo) {
      best = {sorted[i], sorted[i + span_len - 1]};
    }
  }
  return best;
}

double median(std::vector<double> values) {
  if (values.empty()) {
    throw InvalidParameterError("median of an empty set");
  }
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double sign_test_p_value(std::size_t successes, std::size_t trials) {
  if (successes > trials) {
    throw InvalidParameterError("sign_test_p_value: more successes than trials");
  }
  double p = 0.0;
  for (std::size_t k = successes; k <= trials; ++k) {
    p += std::exp(std::lgamma(static_cast<double>(trials) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
                  std::lgamma(static_cast<double>(trials - k) + 1.0) - static_cast<double>(trials) * std::log(2.0));
  }
  return std::min(1.0, p);
}

std::size_t crossings(std::span<const Vector> path, std::size_t coord, double threshold) {
  std::size_t count = 0;
  for (std::size_t n = 1; n < path.size(); ++n) {
    const bool before = path[n - 1][static_cast<Eigen::Index>(coord)] > threshold;
    const bool after = path[n][static_cast<Eigen::Index>(coord)] > threshold;
    count += before != after ? 1 : 0;
  }
  return count;
}

void ComparisonReport::add(std::string method, std::string statistic, std::string parameter, double value,
                           std::size_t replicates) {
  rows_.push_back({std::move(method), std::move(statistic), std::move(parameter), value, replicates});
}

std::string ComparisonReport::to_csv() const {
  std::ostringstream out;
  out << "method,statistic,parameter,value,replicates\n";
  for (const auto& r : rows_) {
    out << r.method << ',' << r.statistic << ',' << r.parameter << ',' << format_double(r.value) << ','
        << r.replicates << '\n';
  }
  return out.str();
}

std::string ComparisonReport::summary(const std::string& title) const {
  std::ostringstream out;
  out << title << '\n';
  out << "seeds:";
  for (const auto s : seeds_) {
    out << ' ' << s;
  }
  out << "\nruntime_seconds: " << format_double(runtime_seconds_) << '\n';
  for (const auto& r : rows_) {
    out << r.method << ' ' << r.statistic << ' ' << r.parameter << " = " << format_double(r.value) << " (n="
        << r.replicates << ")\n";
  }
  return out.str();
}

}  // namespace imtm
