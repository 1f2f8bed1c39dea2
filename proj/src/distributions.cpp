#include "imtm/distributions.hpp"

#include "imtm/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace imtm {

Vector mvn_sample(RngStream& rng, const Vector& mean, const SpdMatrix& cov) {
  if (static_cast<std::size_t>(mean.size()) != cov.dim()) {
    throw DimensionError("mvn_sample: mean and covariance dimensions differ");
  }
  Vector z(mean.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    z[i] = rng.normal();
  }
  return mean + cov.lower().triangularView<Eigen::Lower>() * z;
}

double mvn_logpdf(const Vector& x, const Vector& mean, const SpdMatrix& cov) {
  if (x.size() != mean.size() || static_cast<std::size_t>(x.size()) != cov.dim()) {
    throw DimensionError("mvn_logpdf: dimension mismatch");
  }
  const double d = static_cast<double>(x.size());
  return -0.5 * (d * kLog2Pi + cov.log_det() + cov.quad_form(x - mean));
}

SpdMatrix wishart_sample(RngStream& rng, double dof, const SpdMatrix& scale) {
  const std::size_t d = scale.dim();
  if (!(dof > static_cast<double>(d) - 1.0)) {
    throw InvalidParameterError("wishart_sample: degrees of freedom must exceed dimension - 1");
  }
  const auto n = static_cast<Eigen::Index>(d);
  Matrix bartlett = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    // chi-square with dof - i degrees of freedom, as Gamma(k/2, 2)
    bartlett(i, i) = std::sqrt(rng.gamma(0.5 * (dof - static_cast<double>(i)), 2.0));
    for (Eigen::Index j = 0; j < i; ++j) {
      bartlett(i, j) = rng.normal();
    }
  }
  const Matrix la = scale.lower() * bartlett;
  Matrix w = la * la.transpose();
  w = 0.5 * (w + w.transpose());
  return SpdMatrix(std::move(w));
}

double inverse_gamma_sample(RngStream& rng, double shape, double scale) {
  if (!std::isfinite(scale) || !std::isfinite(shape)) {
    throw NumericalOverflowError("inverse_gamma_sample: non-finite shape or scale");
  }
  if (!(shape > 0.0) || !(scale > 0.0)) {
    throw InvalidParameterError("inverse_gamma_sample: shape and scale must be positive");
  }
  return 1.0 / rng.gamma(shape, 1.0 / scale);
}

double log_sum_exp(std::span<const double> values) {
  double top = -std::numeric_limits<double>::infinity();
  for (const double v : values) {
    top = std::max(top, v);
  }
  if (!std::isfinite(top)) {
    return top;
  }
  double sum = 0.0;
  for (const double v : values) {
    sum += std::exp(v - top);
  }
  return top + std::log(sum);
}

double log_sum_exp(double a, double b) {
  const double top = std::max(a, b);
  if (!std::isfinite(top)) {
    return top;
  }
  return top + std::log(std::exp(a - top) + std::exp(b - top));
}

double normal_logpdf(double x, double mean, double variance) {
  const double z = x - mean;
  return -0.5 * (kLog2Pi + std::log(variance) + z * z / variance);
}

}  // namespace imtm
