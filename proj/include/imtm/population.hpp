#pragma once

#include "imtm/linalg.hpp"
#include "imtm/rng.hpp"
#include "imtm/targets.hpp"

#include <cstddef>
#include <vector>

namespace imtm {

/// Positions of the N chains at one iteration, with the bookkeeping the
/// interacting kernels need.
struct PopulationState {
  std::vector<Vector> positions;
  /// Positions one iteration earlier; equal to `positions` at the start.
  std::vector<Vector> previous;
  /// 1-based label of the last selected slot per chain, 0 for none.
  std::vector<std::size_t> selected;
  std::vector<unsigned char> accepted;
  std::size_t iteration = 0;

  PopulationState() = default;
  explicit PopulationState(std::vector<Vector> initial);

  std::size_t chains() const noexcept { return positions.size(); }
  std::size_t dim() const { return positions.empty() ? 0 : static_cast<std::size_t>(positions.front().size()); }
};

/// Exponents 1 = xi_1 > xi_2 > ... > xi_N > 0.
class TemperatureLadder {
 public:
  explicit TemperatureLadder(std::vector<double> exponents);

  /// xi_t = 1 / t for t = 1..n.
  static TemperatureLadder harmonic(std::size_t n);

  std::size_t size() const noexcept { return exponents_.size(); }
  double operator[](std::size_t i) const { return exponents_.at(i); }
  const std::vector<double>& exponents() const noexcept { return exponents_; }

 private:
  std::vector<double> exponents_;
};

/// pi^{xi_i} for every rung; rung 0 is the base target itself.
std::vector<TargetPtr> tempered_targets(const TargetPtr& base, const TemperatureLadder& ladder);

/// Overdispersed start: N(center, scale^2 I) redrawn until inside the support.
/// Throws InvalidParameterError when `max_attempts` draws all miss the support.
std::vector<Vector> overdispersed_start(RngStream& rng, const TargetDensity& target, std::size_t chains,
                                        const Vector& center, double scale, std::size_t max_attempts = 10000);

}  // namespace imtm
