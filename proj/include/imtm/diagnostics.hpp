#pragma once

#include "imtm/linalg.hpp"
#include "imtm/rng.hpp"
#include "imtm/targets.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace imtm {

enum class BalanceStatus { Pass, Fail, Inconclusive };

std::string to_string(BalanceStatus status);

/// Empirical state-pair flows pi(x) A(x, y) of one transition kernel.
struct FlowEstimate {
  /// flow[x][y]: fraction of transitions that went from x to y; sums to 1.
  std::vector<std::vector<double>> flow;
  /// Standard error of flow[x][y] - flow[y][x].
  std::vector<std::vector<double>> pair_se;
  std::size_t transitions = 0;
  BalanceStatus status = BalanceStatus::Inconclusive;
  /// Largest |flow[x][y] - flow[y][x]| / se over all pairs.
  double max_z = 0.0;
};

using TransitionFn = std::function<Vector(RngStream&, const Vector&)>;

/// Each transition starts from an exact draw of the grid distribution and
/// takes one step. Flows are tallied per ordered state pair; the test fails
/// when some |F(x,y) - F(y,x)| exceeds z_threshold standard errors and is
/// inconclusive when a pair's standard error is not below 10% of the smallest
/// non-zero off-diagonal flow.
FlowEstimate detailed_balance_test(const TransitionFn& step, const GridTarget& grid, std::size_t transitions,
                                   std::uint64_t seed, double z_threshold = 3.0);

/// Pooled fraction of points inside each Mahalanobis ball
/// (x - c)^T S^{-1} (x - c) <= radius^2, with the remainder as the last entry.
/// Throws ConfigError when two balls intersect and InvalidParameterError for
/// empty input or a non-positive radius.
std::vector<double> mode_occupancy(std::span<const Vector> points, std::span<const Vector> centers,
                                   std::span<const SpdMatrix> covariances, double radius);

/// True when the two Mahalanobis balls of the given radius share a point.
bool mahalanobis_balls_intersect(const Vector& a, const SpdMatrix& sa, const Vector& b, const SpdMatrix& sb,
                                 double radius);

struct MseSummary {
  double mse = 0.0;
  /// Standard deviation (divisor n - 1) of the squared errors.
  double sd = 0.0;
  std::size_t replicates = 0;
};

/// Mean squared error of replicate estimates against the truth. Needs >= 2.
MseSummary mse_report(std::span<const double> estimates, double truth);

/// sqrt((1/t) sum_{s<=t} (estimate_s - truth_s)^2) for t = 1..T.
std::vector<double> cumulative_rmse(std::span<const double> estimate, std::span<const double> truth);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Shortest interval spanning ceil(level * n) order statistics. Needs >= 100 samples.
Interval hpd_interval(std::span<const double> samples, double level);

double median(std::vector<double> values);

/// One-sided sign test: P(Binomial(n, 1/2) >= successes).
double sign_test_p_value(std::size_t successes, std::size_t trials);

/// Number of consecutive draws that fall on different sides of `threshold`
/// in the given coordinate.
std::size_t crossings(std::span<const Vector> path, std::size_t coord, double threshold);

/// Tabular report of per-method statistics, each tagged with its replicate count.
class ComparisonReport {
 public:
  struct Row {
    std::string method;
    std::string statistic;
    std::string parameter;
    double value = 0.0;
    std::size_t replicates = 1;
  };

  void add(std::string method, std::string statistic, std::string parameter, double value, std::size_t replicates = 1);
  void add_seed(std::uint64_t seed) { seeds_.push_back(seed); }
  void set_runtime(double seconds) { runtime_seconds_ = seconds; }

  const std::vector<Row>& rows() const noexcept { return rows_; }
  const std::vector<std::uint64_t>& seeds() const noexcept { return seeds_; }
  double runtime() const noexcept { return runtime_seconds_; }

  /// Header method,statistic,parameter,value,replicates.
  std::string to_csv() const;
  std::string summary(const std::string& title) const;

 private:
  std::vector<Row> rows_;
  std::vector<std::uint64_t> seeds_;
  double runtime_seconds_ = 0.0;
};

}  // namespace imtm
