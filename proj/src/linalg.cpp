#include "imtm/linalg.hpp"

#include "imtm/error.hpp"

#include <cmath>

namespace imtm {

Matrix cholesky(const Matrix& m) {
  if (m.rows() != m.cols()) {
    throw DimensionError("cholesky: matrix is not square");
  }
  const Eigen::Index n = m.rows();
  Matrix lower = Matrix::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double diag = m(j, j);
    for (Eigen::Index k = 0; k < j; ++k) {
      diag -= lower(j, k) * lower(j, k);
    }
    if (!(diag > 0.0)) {
      throw DecompositionError(static_cast<std::size_t>(j), diag);
    }
    const double ljj = std::sqrt(diag);
    lower(j, j) = ljj;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      double s = m(i, j);
      for (Eigen::Index k = 0; k < j; ++k) {
        s -= lower(i, k) * lower(j, k);
      }
      lower(i, j) = s / ljj;
    }
  }
  return lower;
}

SpdMatrix::SpdMatrix(Matrix m) : matrix_(std::move(m)) {
  if (matrix_.rows() != matrix_.cols() || matrix_.rows() == 0) {
    throw DimensionError("SpdMatrix: matrix must be square and non-empty");
  }
  const double scale = matrix_.cwiseAbs().maxCoeff();
  const double asym = (matrix_ - matrix_.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * scale) {
    throw InvalidParameterError("SpdMatrix: matrix is not symmetric");
  }
  lower_ = cholesky(matrix_);
  log_det_ = 2.0 * lower_.diagonal().array().log().sum();
}

SpdMatrix SpdMatrix::identity(std::size_t d) { return scaled_identity(d, 1.0); }

SpdMatrix SpdMatrix::scaled_identity(std::size_t d, double scale) {
  const auto n = static_cast<Eigen::Index>(d);
  return SpdMatrix(scale * Matrix::Identity(n, n));
}

SpdMatrix SpdMatrix::diagonal(const Vector& diag) { return SpdMatrix(Matrix(diag.asDiagonal())); }

Vector SpdMatrix::whiten(const Vector& v) const {
  if (v.size() != matrix_.rows()) {
    throw DimensionError("SpdMatrix::whiten: dimension mismatch");
  }
  return lower_.triangularView<Eigen::Lower>().solve(v);
}

double SpdMatrix::quad_form(const Vector& v) const { return whiten(v).squaredNorm(); }

Vector SpdMatrix::solve(const Vector& b) const {
  const Vector z = whiten(b);
  return lower_.transpose().triangularView<Eigen::Upper>().solve(z);
}

double SpdMatrix::max_scale() const { return std::sqrt(matrix_.diagonal().maxCoeff()); }

Matrix symmetric_sqrt(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m);
  if (eig.info() != Eigen::Success) {
    throw DecompositionError(0, 0.0);
  }
  const Vector root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace imtm
