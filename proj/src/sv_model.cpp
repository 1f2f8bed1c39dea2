#include "imtm/sv_model.hpp"

#include "imtm/distributions.hpp"
#include "imtm/error.hpp"

#include <cmath>
#include <limits>

namespace imtm {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

}  // namespace

double SvState::alpha() const { return std::log(beta2); }

SVModel::SVModel(std::vector<double> y, SvConditionalForm form) : y_(std::move(y)), form_(form) {
  if (y_.size() < 2) {
    throw InvalidParameterError("SVModel: need T >= 2 observations");
  }
  for (const double v : y_) {
    y2_.push_back(v * v);
  }
}

InverseGammaParams SVModel::beta2_conditional(const SvState& s) const {
  double scale = 0.0;
  for (std::size_t t = 0; t < y_.size(); ++t) {
    scale += y2_[t] * std::exp(-s.h[t]);
  }
  return {0.5 * static_cast<double>(y_.size() - 1), 0.5 * scale};
}

InverseGammaParams SVModel::sigma2_conditional(const SvState& s) const {
  double scale = 0.0;
  for (std::size_t t = 1; t < s.h.size(); ++t) {
    const double e = s.h[t] - s.phi * s.h[t - 1];
    scale += 0.5 * e * e;
  }
  scale += s.h[0] * s.h[0] * (1.0 - s.phi * s.phi);
  return {0.5 * static_cast<double>(y_.size() - 1), scale};
}

double SVModel::phi_log_slice(const SvState& s, double phi) const {
  if (!(phi > -1.0 && phi < 1.0)) {
    return kNegInf;
  }
  const std::size_t T = s.h.size();
  double inner = 0.0;
  for (std::size_t t = 1; t + 1 < T; ++t) {
    inner += s.h[t] * s.h[t];
  }
  double cross = 0.0;
  for (std::size_t t = 1; t < T; ++t) {
    cross += s.h[t] * s.h[t - 1];
  }
  const double sign = form_ == SvConditionalForm::Printed ? -1.0 : 1.0;
  return 0.5 * std::log1p(-phi * phi) - phi * phi * inner / (2.0 * s.sigma2) + sign * phi * cross / s.sigma2;
}

double SVModel::h_log_slice(const SvState& s, std::size_t t, double value) const {
  const std::size_t T = s.h.size();
  const double inv2s = 1.0 / (2.0 * s.sigma2);
  if (form_ == SvConditionalForm::Printed) {
    // Missing neighbours at the ends drop their term.
    const double alpha = s.alpha();
    double quad = 0.0;
    if (t > 0) {
      const double e = value - alpha - s.phi * s.h[t - 1];
      quad += e * e;
    }
    if (t + 1 < T) {
      const double e = s.h[t + 1] - alpha - s.phi * value;
      quad -= e * e;
    }
    return -inv2s * quad - 0.5 * (value + y2_[t] * std::exp(-value));
  }
  double quad = 0.0;
  if (t == 0) {
    quad += (1.0 - s.phi * s.phi) * value * value;
  } else {
    const double e = value - s.phi * s.h[t - 1];
    quad += e * e;
  }
  if (t + 1 < T) {
    const double e = s.h[t + 1] - s.phi * value;
    quad += e * e;
  }
  return -inv2s * quad - 0.5 * (value + y2_[t] * std::exp(-value) / s.beta2);
}

double SVModel::h_log_slice_derivative(const SvState& s, std::size_t t, double value) const {
  const std::size_t T = s.h.size();
  const double inv_s = 1.0 / s.sigma2;
  if (form_ == SvConditionalForm::Printed) {
    const double alpha = s.alpha();
    double d = 0.0;
    if (t > 0) {
      d -= (value - alpha - s.phi * s.h[t - 1]) * inv_s;
    }
    if (t + 1 < T) {
      d -= s.phi * (s.h[t + 1] - alpha - s.phi * value) * inv_s;
    }
    return d - 0.5 + 0.5 * y2_[t] * std::exp(-value);
  }
  double d = 0.0;
  if (t == 0) {
    d -= (1.0 - s.phi * s.phi) * value * inv_s;
  } else {
    d -= (value - s.phi * s.h[t - 1]) * inv_s;
  }
  if (t + 1 < T) {
    d += s.phi * (s.h[t + 1] - s.phi * value) * inv_s;
  }
  return d - 0.5 + 0.5 * y2_[t] * std::exp(-value) / s.beta2;
}

SvConditionalDraw sv_full_conditionals(const SVModel& model, SvState& s, RngStream& rng) {
  const auto b = model.beta2_conditional(s);
  if (!std::isfinite(b.scale)) {
    throw NumericalOverflowError("beta^2 conditional scale is not finite");
  }
  s.beta2 = inverse_gamma_sample(rng, b.shape, b.scale);
  const auto v = model.sigma2_conditional(s);
  if (!std::isfinite(v.scale)) {
    throw NumericalOverflowError("sigma^2 conditional scale is not finite");
  }
  s.sigma2 = inverse_gamma_sample(rng, v.shape, v.scale);
  return {s.beta2, s.sigma2};
}

SvDataset simulate_sv(RngStream& rng, std::size_t length, const SvParameters& params) {
  if (length < 2) {
    throw InvalidParameterError("simulate_sv: need T >= 2");
  }
  if (!(params.phi > -1.0 && params.phi < 1.0) || !(params.sigma2 > 0.0)) {
    throw InvalidParameterError("simulate_sv: need |phi| < 1 and sigma^2 > 0");
  }
  SvDataset out;
  out.truth = params;
  const double sigma = std::sqrt(params.sigma2);
  double prev = rng.normal() * sigma / std::sqrt(1.0 - params.phi * params.phi);
  for (std::size_t t = 0; t < length; ++t) {
    const double h = params.alpha + params.phi * prev + sigma * rng.normal();
    out.h.push_back(h);
    out.y.push_back(std::exp(0.5 * h) * rng.normal());
    prev = h;
  }
  return out;
}

}  // namespace imtm
