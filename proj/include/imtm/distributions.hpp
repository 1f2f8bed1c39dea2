#pragma once

#include "imtm/linalg.hpp"
#include "imtm/rng.hpp"

#include <span>

namespace imtm {

inline constexpr double kLog2Pi = 1.8378770664093454835606594728112;

/// Draw from N(mean, cov) as mean + L z.
Vector mvn_sample(RngStream& rng, const Vector& mean, const SpdMatrix& cov);

double mvn_logpdf(const Vector& x, const Vector& mean, const SpdMatrix& cov);

/// Wishart(dof, scale) draw by Bartlett decomposition.
SpdMatrix wishart_sample(RngStream& rng, double dof, const SpdMatrix& scale);

/// Inverse-gamma draw with density proportional to v^{-shape-1} exp(-scale / v).
double inverse_gamma_sample(RngStream& rng, double shape, double scale);

/// Numerically stable log(sum(exp(v))); -inf for an empty or all -inf input.
double log_sum_exp(std::span<const double> values);
double log_sum_exp(double a, double b);

double normal_logpdf(double x, double mean, double variance);

}  // namespace imtm
