#pragma once

#include "imtm/error.hpp"
#include "imtm/linalg.hpp"
#include "imtm/population.hpp"

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace imtm {

/// Malformed trace input; `row()` is the 1-based line number in the file.
class TraceParseError : public Error {
 public:
  TraceParseError(std::size_t row, const std::string& what);
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

/// Per-iteration positions, acceptance flags and selected slots for every
/// chain. Row r = iteration * chains + chain; iteration 0 is the initial state.
class ChainTrace {
 public:
  ChainTrace(std::size_t chains, std::size_t dim);

  void append(const PopulationState& state);
  void append_row(std::size_t chain, const Vector& x, bool accepted, std::size_t selected);
  void append_nu(std::vector<double> nu) { nu_.push_back(std::move(nu)); }

  std::size_t chains() const noexcept { return chains_; }
  std::size_t dim() const noexcept { return dim_; }
  std::size_t rows() const noexcept { return accepted_.size(); }
  /// Recorded iterations including the initial state.
  std::size_t iterations() const noexcept { return rows() / chains_; }

  Vector position(std::size_t iteration, std::size_t chain) const;
  double value(std::size_t iteration, std::size_t chain, std::size_t coord) const;
  bool accepted(std::size_t iteration, std::size_t chain) const;
  /// 1-based slot label, 0 for none.
  std::size_t selected(std::size_t iteration, std::size_t chain) const;
  const std::vector<std::vector<double>>& nu() const noexcept { return nu_; }

  /// Coordinate `coord` of one chain for iterations first..end.
  std::vector<double> series(std::size_t chain, std::size_t coord, std::size_t first = 0) const;
  /// Positions of every chain for iterations first..end, iteration-major.
  std::vector<Vector> pooled(std::size_t first = 0) const;
  std::vector<Vector> chain_positions(std::size_t chain, std::size_t first = 0) const;
  double acceptance_rate(std::size_t chain) const;

  /// Header then one row per (iteration, chain): iter,chain,accepted,J,x_1..x_d.
  void write_csv(std::ostream& out) const;
  static ChainTrace read_csv(std::istream& in);

 private:
  std::size_t chains_;
  std::size_t dim_;
  std::vector<double> values_;
  std::vector<unsigned char> accepted_;
  std::vector<std::size_t> selected_;
  std::vector<std::vector<double>> nu_;
};

/// %.17g rendering used by every CSV writer.
std::string format_double(double value);

/// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::string& path, const std::string& contents);

}  // namespace imtm
