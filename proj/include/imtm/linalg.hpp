#pragma once

#include <Eigen/Dense>

#include <cstddef>

namespace imtm {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Lower-triangular L with L * L^T == m. Throws DecompositionError naming the
/// first non-positive pivot.
Matrix cholesky(const Matrix& m);

/// Symmetric positive-definite matrix with its Cholesky factor cached.
class SpdMatrix {
 public:
  explicit SpdMatrix(Matrix m);

  static SpdMatrix identity(std::size_t d);
  static SpdMatrix scaled_identity(std::size_t d, double scale);
  static SpdMatrix diagonal(const Vector& diag);

  std::size_t dim() const noexcept { return static_cast<std::size_t>(matrix_.rows()); }
  const Matrix& matrix() const noexcept { return matrix_; }
  const Matrix& lower() const noexcept { return lower_; }
  double log_det() const noexcept { return log_det_; }

  /// Returns L^{-1} v.
  Vector whiten(const Vector& v) const;
  /// Returns v^T M^{-1} v.
  double quad_form(const Vector& v) const;
  /// Returns M^{-1} b.
  Vector solve(const Vector& b) const;
  /// Square root of the largest diagonal entry; a cheap scale summary.
  double max_scale() const;

 private:
  Matrix matrix_;
  Matrix lower_;
  double log_det_ = 0.0;
};

/// Symmetric square root via eigendecomposition.
Matrix symmetric_sqrt(const Matrix& m);

}  // namespace imtm
