#pragma once

#include "imtm/rng.hpp"

#include <cstddef>
#include <vector>

namespace imtm {

/// Which version of the phi and h_t conditional slices to evaluate.
///
/// `Printed` evaluates the two displayed expressions verbatim: intercept
/// alpha = log(beta^2) in the latent mean, a negative phi cross term, and a
/// difference of the two latent squares. `Corrected` is the stationary AR(1)
/// model y_t ~ N(0, beta^2 exp(h_t)), h_1 ~ N(0, sigma^2 / (1 - phi^2)),
/// h_t = phi h_{t-1} + sigma eta_t, whose Gibbs conditionals the inverse-gamma
/// updates belong to. Samplers use `Corrected`.
enum class SvConditionalForm { Printed, Corrected };

struct SvParameters {
  double alpha = 0.0;
  double phi = 0.9;
  double sigma2 = 0.1;
};

/// One Gibbs state. `h` holds h_1..h_T.
struct SvState {
  double beta2 = 1.0;
  double sigma2 = 0.1;
  double phi = 0.0;
  std::vector<double> h;

  double alpha() const;
};

struct InverseGammaParams {
  double shape = 0.0;
  double scale = 0.0;
};

class SVModel {
 public:
  explicit SVModel(std::vector<double> y, SvConditionalForm form = SvConditionalForm::Corrected);

  std::size_t length() const noexcept { return y_.size(); }
  const std::vector<double>& data() const noexcept { return y_; }
  SvConditionalForm form() const noexcept { return form_; }

  /// shape (T-1)/2, scale sum_t y_t^2 exp(-h_t) / 2.
  InverseGammaParams beta2_conditional(const SvState& s) const;
  /// shape (T-1)/2, scale sum_{t>=2} (h_t - phi h_{t-1})^2 / 2 + h_1^2 (1 - phi^2).
  InverseGammaParams sigma2_conditional(const SvState& s) const;

  /// Unnormalized log pi(phi | sigma^2, h, y); -inf outside (-1, 1).
  double phi_log_slice(const SvState& s, double phi) const;
  /// Unnormalized log pi(h_t | ...) as a function of `value`; t is 0-based.
  double h_log_slice(const SvState& s, std::size_t t, double value) const;
  double h_log_slice_derivative(const SvState& s, std::size_t t, double value) const;

 private:
  std::vector<double> y_;
  std::vector<double> y2_;
  SvConditionalForm form_;
};

struct SvConditionalDraw {
  double beta2 = 0.0;
  double sigma2 = 0.0;
};

/// Draws beta^2 then sigma^2 from their inverse-gamma conditionals and writes
/// them into `s`. phi and h_t are exposed through the model's log slices.
/// Throws NumericalOverflowError on a non-finite scale.
SvConditionalDraw sv_full_conditionals(const SVModel& model, SvState& s, RngStream& rng);

struct SvDataset {
  std::vector<double> y;
  std::vector<double> h;  // h_1..h_T
  SvParameters truth;
};

/// h_0 ~ N(0, sigma^2/(1-phi^2)), h_t = alpha + phi h_{t-1} + sigma eta_t,
/// y_t = exp(h_t / 2) eps_t for t = 1..T.
SvDataset simulate_sv(RngStream& rng, std::size_t length, const SvParameters& params);

}  // namespace imtm
