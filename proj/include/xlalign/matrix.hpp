#pragma once

#include <cstddef>
#include <vector>

#include "xlalign/numeric.hpp"

namespace xlalign {

// Dense real matrix, row-major, 64-bit entries.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double value = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, value) {}

  static Matrix identity(std::size_t n);
  // Builds a matrix whose j-th column is columns[j]; all columns must
  // share one dimension.
  static Matrix from_columns(const std::vector<Vec>& columns);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  double operator()(std::size_t i, std::size_t j) const {
    return data_[i * cols_ + j];
  }
  double& operator()(std::size_t i, std::size_t j) {
    return data_[i * cols_ + j];
  }
  const std::vector<double>& data() const { return data_; }

  Vec column(std::size_t j) const;
  void set_column(std::size_t j, const Vec& v);

  Matrix transposed() const;
  Matrix operator*(const Matrix& other) const;
  Vec operator*(const Vec& v) const;
  Matrix operator+(const Matrix& other) const;
  Matrix operator-(const Matrix& other) const;

  double frobenius_norm() const;
  bool all_finite() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Thin SVD a = u * diag(sigma) * vt with k = min(rows, cols).
// u is rows x k with orthonormal columns, vt is k x cols with orthonormal
// rows, sigma is descending and non-negative. Deterministic: the
// largest-magnitude entry of each left singular vector is positive, ties
// broken by lowest row index.
struct SvdResult {
  Matrix u;
  Vec sigma;
  Matrix vt;
};

SvdResult svd(const Matrix& a);

// Orthogonal map w minimizing ||w * xs - xt||_F, solved in closed form
// as u * vt from the SVD of xt * xs^T. rank_warning is set when the
// cross-covariance is rank deficient (any sigma < 1e-12 * sigma_max);
// the returned w is still a valid minimizer.
struct ProcrustesResult {
  Matrix w;
  bool rank_warning = false;
};

ProcrustesResult procrustes(const Matrix& xs, const Matrix& xt);

// Unconstrained w minimizing ||w * xs - xt||_F via normal equations with
// ridge damping 1e-8 on the Gram matrix.
Matrix least_squares_map(const Matrix& xs, const Matrix& xt);

// Mean over columns (each column is one embedding).
Vec column_mean(const Matrix& a);

// Copy with every nonzero column scaled to unit L2 norm.
Matrix with_unit_columns(const Matrix& a);

// Haar-distributed orthogonal matrix: modified Gram-Schmidt of a
// Gaussian matrix, which fixes signs (positive R diagonal).
Matrix random_orthogonal(std::size_t dim, Rng& rng);

}  // namespace xlalign
