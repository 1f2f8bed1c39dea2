#include "imtm/population.hpp"

#include "imtm/error.hpp"

#include <cmath>

namespace imtm {

PopulationState::PopulationState(std::vector<Vector> initial)
    : positions(std::move(initial)),
      previous(positions),
      selected(positions.size(), 0),
      accepted(positions.size(), 0) {
  if (positions.empty()) {
    throw InvalidParameterError("population needs at least one chain");
  }
}

TemperatureLadder::TemperatureLadder(std::vector<double> exponents) : exponents_(std::move(exponents)) {
  if (exponents_.empty()) {
    throw InvalidParameterError("temperature ladder is empty");
  }
  if (exponents_.front() != 1.0) {
    throw InvalidParameterError("temperature ladder must start at exponent 1");
  }
  for (std::size_t i = 1; i < exponents_.size(); ++i) {
    if (!(exponents_[i] < exponents_[i - 1]) || !(exponents_[i] > 0.0)) {
      throw InvalidParameterError("temperature ladder must be strictly decreasing and positive");
    }
  }
}

TemperatureLadder TemperatureLadder::harmonic(std::size_t n) {
  std::vector<double> xi(n);
  for (std::size_t t = 0; t < n; ++t) {
    xi[t] = 1.0 / static_cast<double>(t + 1);
  }
  return TemperatureLadder(std::move(xi));
}

std::vector<TargetPtr> tempered_targets(const TargetPtr& base, const TemperatureLadder& ladder) {
  std::vector<TargetPtr> out;
  out.reserve(ladder.size());
  for (std::size_t i = 0; i < ladder.size(); ++i) {
    if (ladder[i] == 1.0) {
      out.push_back(base);
    } else {
      out.push_back(std::make_shared<TemperedTarget>(base, ladder[i]));
    }
  }
  return out;
}

std::vector<Vector> overdispersed_start(RngStream& rng, const TargetDensity& target, std::size_t chains,
                                        const Vector& center, double scale, std::size_t max_attempts) {
  if (static_cast<std::size_t>(center.size()) != target.dim()) {
    throw DimensionError("overdispersed_start: centre dimension does not match the target");
  }
  if (!(scale >= 0.0) || !std::isfinite(scale)) {
    throw InvalidParameterError("overdispersed_start: scale must be finite and non-negative");
  }
  std::vector<Vector> out;
  out.reserve(chains);
  for (std::size_t i = 0; i < chains; ++i) {
    bool placed = false;
    for (std::size_t attempt = 0; attempt < max_attempts; ++attempt) {
      Vector x(center.size());
      for (Eigen::Index k = 0; k < x.size(); ++k) {
        x[k] = center[k] + scale * rng.normal();
      }
      if (target.in_support(x) && std::isfinite(target.log_density(x))) {
        out.push_back(std::move(x));
        placed = true;
        break;
      }
    }
    if (!placed) {
      throw InvalidParameterError("overdispersed_start: no draw landed in the target support");
    }
  }
  return out;
}

}  // namespace imtm
