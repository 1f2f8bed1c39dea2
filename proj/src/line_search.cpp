#include "imtm/error.hpp"
#include "imtm/proposals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace imtm {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kGolden = 1.6180339887498949;

class Slice {
 public:
  Slice(const TargetDensity& target, const Vector& x, const Vector& u) : target_(target), x_(x), u_(u) {}

  double operator()(double r) const {
    const double v = target_.log_density(x_ + r * u_);
    return std::isnan(v) ? kNegInf : v;
  }

 private:
  const TargetDensity& target_;
  const Vector& x_;
  const Vector& u_;
};

/// Golden-section maximization on [lo, hi].
double golden_maximize(const Slice& f, double lo, double hi, double tol) {
  const double inv = 1.0 / kGolden;
  double c = hi - (hi - lo) * inv;
  double d = lo + (hi - lo) * inv;
  double fc = f(c);
  double fd = f(d);
  while (hi - lo > tol) {
    if (fc >= fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - (hi - lo) * inv;
      fc = f(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + (hi - lo) * inv;
      fd = f(d);
    }
  }
  return 0.5 * (lo + hi);
}

struct LocalResult {
  double r = 0.0;
  bool bracketed = true;
};

LocalResult local_search(const Slice& f, const LineSearchConfig& cfg) {
  const double f0 = f(0.0);
  const double h = cfg.initial_step;
  const double fp = f(h);
  const double fm = f(-h);
  if (fp <= f0 && fm <= f0) {
    return {golden_maximize(f, -h, h, cfg.tolerance), true};
  }
  const double dir = fp > f0 ? 1.0 : -1.0;
  double a = 0.0;
  double b = dir * h;
  double fb = std::max(fp, fm);
  for (;;) {
    const double c = b + kGolden * (b - a);
    if (std::abs(c) > cfg.max_abs_r) {
      return {b, false};
    }
    const double fc = f(c);
    if (fc < fb) {
      return {golden_maximize(f, std::min(a, c), std::max(a, c), cfg.tolerance), true};
    }
    a = b;
    b = c;
    fb = fc;
  }
}

}  // namespace

LineSearchResult line_search_mode(const TargetDensity& target, const Vector& x, const Vector& u,
                                  const LineSearchConfig& config) {
  if (x.size() != u.size()) {
    throw DimensionError("line_search_mode: direction has wrong dimension");
  }
  if (!(u.norm() > 0.0)) {
    throw DegenerateError("line_search_mode: zero search direction");
  }
  const Slice f(target, x, u);
  if (!std::isfinite(f(0.0))) {
    throw InvalidParameterError("line_search_mode: target is not finite at the starting point");
  }
  const LocalResult local = local_search(f, config);
  double best_r = local.r;
  double best_f = f(best_r);
  bool bracketed = local.bracketed;

  if (config.global_scan && config.scan_points >= 3) {
    const std::size_t n = config.scan_points;
    const double w = config.scan_half_width;
    const double step = 2.0 * w / static_cast<double>(n - 1);
    std::vector<double> values(n);
    for (std::size_t k = 0; k < n; ++k) {
      values[k] = f(-w + step * static_cast<double>(k));
    }
    for (std::size_t k = 1; k + 1 < n; ++k) {
      if (values[k] >= values[k - 1] && values[k] >= values[k + 1] && std::isfinite(values[k])) {
        const double lo = -w + step * static_cast<double>(k - 1);
        const double r = golden_maximize(f, lo, lo + 2.0 * step, config.tolerance);
        const double fr = f(r);
        if (fr > best_f) {
          best_f = fr;
          best_r = r;
          bracketed = true;
        }
      }
    }
  }
  return {x + best_r * u, best_r, best_f, bracketed};
}

}  // namespace imtm
