#include "xlalign/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "xlalign/errors.hpp"

namespace xlalign {

namespace {

std::string shape_str(const Matrix& a) {
  return std::to_string(a.rows()) + "x" + std::to_string(a.cols());
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DataError(std::string(op) + ": shape mismatch " + shape_str(a) +
                    " vs " + shape_str(b));
  }
}

}  // namespace

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::from_columns(const std::vector<Vec>& columns) {
  if (columns.empty()) throw DataError("from_columns: no columns");
  std::size_t dim = columns.front().size();
  Matrix m(dim, columns.size());
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (columns[j].size() != dim)
      throw DataError("from_columns: inconsistent column dimensions");
    for (std::size_t i = 0; i < dim; ++i) m(i, j) = columns[j][i];
  }
  return m;
}

Vec Matrix::column(std::size_t j) const {
  Vec v(rows_);
  for (std::size_t i = 0; i < rows_; ++i) v[i] = (*this)(i, j);
  return v;
}

void Matrix::set_column(std::size_t j, const Vec& v) {
  for (std::size_t i = 0; i < rows_; ++i) (*this)(i, j) = v[i];
}

Matrix Matrix::transposed() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

Matrix Matrix::operator*(const Matrix& other) const {
  if (cols_ != other.rows_)
    throw DataError("matrix multiply: inner dimension mismatch " +
                    shape_str(*this) + " * " + shape_str(other));
  Matrix out(rows_, other.cols_);
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t k = 0; k < cols_; ++k) {
      double aik = (*this)(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < other.cols_; ++j)
        out(i, j) += aik * other(k, j);
    }
  }
  return out;
}

Vec Matrix::operator*(const Vec& v) const {
  if (cols_ != v.size())
    throw DataError("matrix-vector multiply: dimension mismatch " +
                    shape_str(*this) + " * " + std::to_string(v.size()));
  Vec out(rows_, 0.0);
  for (std::size_t i = 0; i < rows_; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < cols_; ++j) s += (*this)(i, j) * v[j];
    out[i] = s;
  }
  return out;
}

Matrix Matrix::operator+(const Matrix& other) const {
  require_same_shape(*this, other, "matrix add");
  Matrix out = *this;
  for (std::size_t i = 0; i < data_.size(); ++i) out.data_[i] += other.data_[i];
  return out;
}

Matrix Matrix::operator-(const Matrix& other) const {
  require_same_shape(*this, other, "matrix subtract");
  Matrix out = *this;
  for (std::size_t i = 0; i < data_.size(); ++i) out.data_[i] -= other.data_[i];
  return out;
}

double Matrix::frobenius_norm() const {
  double s = 0.0;
  for (double x : data_) s += x * x;
  return std::sqrt(s);
}

bool Matrix::all_finite() const {
  for (double x : data_)
    if (!std::isfinite(x)) return false;
  return true;
}

namespace {

constexpr double kJacobiTol = 1e-14;
constexpr int kJacobiMaxSweeps = 100;

// One-sided Jacobi on the columns of b (rows >= cols), accumulating the
// right rotations into v. Converged when every normalized off-diagonal
// inner product falls below kJacobiTol.
void jacobi_orthogonalize(Matrix& b, Matrix& v) {
  const std::size_t m = b.rows();
  const std::size_t n = b.cols();
  for (int sweep = 0; sweep < kJacobiMaxSweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
          double bp = b(i, p), bq = b(i, q);
          alpha += bp * bp;
          beta += bq * bq;
          gamma += bp * bq;
        }
        if (alpha == 0.0 || beta == 0.0) continue;
        if (std::abs(gamma) <= kJacobiTol * std::sqrt(alpha) * std::sqrt(beta))
          continue;
        rotated = true;
        double zeta = (beta - alpha) / (2.0 * gamma);
        double sign = zeta >= 0.0 ? 1.0 : -1.0;
        double t = sign / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        double c = 1.0 / std::sqrt(1.0 + t * t);
        double s = c * t;
        for (std::size_t i = 0; i < m; ++i) {
          double bp = b(i, p), bq = b(i, q);
          b(i, p) = c * bp - s * bq;
          b(i, q) = s * bp + c * bq;
        }
        for (std::size_t i = 0; i < n; ++i) {
          double vp = v(i, p), vq = v(i, q);
          v(i, p) = c * vp - s * vq;
          v(i, q) = s * vp + c * vq;
        }
      }
    }
    if (!rotated) return;
  }
  throw NumericError("svd did not converge after " +
                     std::to_string(kJacobiMaxSweeps) + " sweeps on a " +
                     shape_str(b) + " matrix");
}

// Replaces column j of u (treated as rows x k, columns 0..k-1 all
// meaningful) with a unit vector orthogonal to every other column.
// Deterministic: picks the standard basis vector with the largest
// residual, ties by lowest index.
void complete_column(Matrix& u, std::size_t j) {
  const std::size_t m = u.rows();
  const std::size_t k = u.cols();
  Vec best;
  double best_norm = -1.0;
  for (std::size_t cand = 0; cand < m; ++cand) {
    Vec v(m, 0.0);
    v[cand] = 1.0;
    for (std::size_t c = 0; c < k; ++c) {
      if (c == j) continue;
      double proj = 0.0;
      for (std::size_t i = 0; i < m; ++i) proj += v[i] * u(i, c);
      for (std::size_t i = 0; i < m; ++i) v[i] -= proj * u(i, c);
    }
    double nn = norm(v);
    if (nn > best_norm + 1e-12) {
      best_norm = nn;
      best = std::move(v);
    }
  }
  // Re-orthogonalize once for stability, then normalize.
  for (std::size_t c = 0; c < k; ++c) {
    if (c == j) continue;
    double proj = 0.0;
    for (std::size_t i = 0; i < m; ++i) proj += best[i] * u(i, c);
    for (std::size_t i = 0; i < m; ++i) best[i] -= proj * u(i, c);
  }
  double nn = norm(best);
  if (nn == 0.0)
    throw NumericError("svd: failed to complete an orthonormal basis");
  for (std::size_t i = 0; i < m; ++i) u(i, j) = best[i] / nn;
}

// svd of a with rows >= cols guaranteed by the caller.
SvdResult svd_tall(const Matrix& a) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  Matrix b = a;
  Matrix v = Matrix::identity(n);
  jacobi_orthogonalize(b, v);

  Vec raw_sigma(n);
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) s += b(i, j) * b(i, j);
    raw_sigma[j] = std::sqrt(s);
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return raw_sigma[x] > raw_sigma[y];
  });

  SvdResult out;
  out.sigma.resize(n);
  out.u = Matrix(m, n);
  out.vt = Matrix(n, n);
  std::vector<std::size_t> zero_columns;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t src = order[k];
    double s = raw_sigma[src];
    out.sigma[k] = s;
    if (s > 0.0) {
      for (std::size_t i = 0; i < m; ++i) out.u(i, k) = b(i, src) / s;
    } else {
      zero_columns.push_back(k);
    }
    for (std::size_t i = 0; i < n; ++i) out.vt(k, i) = v(i, src);
  }
  for (std::size_t k : zero_columns) complete_column(out.u, k);
  return out;
}

void apply_sign_convention(SvdResult& r) {
  const std::size_t m = r.u.rows();
  const std::size_t n = r.vt.cols();
  const std::size_t k = r.sigma.size();
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t arg = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < m; ++i) {
      double mag = std::abs(r.u(i, c));
      if (mag > best) {
        best = mag;
        arg = i;
      }
    }
    if (r.u(arg, c) < 0.0) {
      for (std::size_t i = 0; i < m; ++i) r.u(i, c) = -r.u(i, c);
      for (std::size_t i = 0; i < n; ++i) r.vt(c, i) = -r.vt(c, i);
    }
  }
}

}  // namespace

SvdResult svd(const Matrix& a) {
  if (a.rows() == 0 || a.cols() == 0)
    throw DataError("svd: empty matrix " + shape_str(a));
  if (!a.all_finite())
    throw DataError("svd: non-finite entries in " + shape_str(a) + " matrix");

  SvdResult out;
  if (a.rows() >= a.cols()) {
    out = svd_tall(a);
  } else {
    // a = (v_b sigma u_b^T)^T from the svd of a^T.
    SvdResult t = svd_tall(a.transposed());
    out.sigma = std::move(t.sigma);
    out.u = Matrix(a.rows(), out.sigma.size());
    // u of a is the full orthogonal factor of a^T.
    for (std::size_t i = 0; i < a.rows(); ++i)
      for (std::size_t k = 0; k < out.sigma.size(); ++k)
        out.u(i, k) = t.vt(k, i);
    out.vt = t.u.transposed();
  }
  apply_sign_convention(out);
  return out;
}

ProcrustesResult procrustes(const Matrix& xs, const Matrix& xt) {
  require_same_shape(xs, xt, "procrustes");
  if (xs.cols() == 0) throw DataError("procrustes: no supervision columns");
  Matrix cross = xt * xs.transposed();
  SvdResult f = svd(cross);
  ProcrustesResult out;
  out.w = f.u * f.vt;
  double sigma_max = f.sigma.empty() ? 0.0 : f.sigma.front();
  if (sigma_max == 0.0) {
    out.rank_warning = true;
  } else {
    for (double s : f.sigma) {
      if (s < 1e-12 * sigma_max) {
        out.rank_warning = true;
        break;
      }
    }
  }
  return out;
}

Matrix least_squares_map(const Matrix& xs, const Matrix& xt) {
  require_same_shape(xs, xt, "least_squares_map");
  if (xs.cols() == 0) throw DataError("least_squares_map: no columns");
  const std::size_t d = xs.rows();
  Matrix gram = xs * xs.transposed();
  for (std::size_t i = 0; i < d; ++i) gram(i, i) += 1e-8;
  Matrix rhs = (xt * xs.transposed()).transposed();  // solve gram * w^T = rhs

  // Cholesky factorization gram = L L^T.
  Matrix l(d, d);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = gram(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      if (i == j) {
        if (!(s > 0.0) || !std::isfinite(s))
          throw NumericError(
              "least_squares_map: gram matrix singular even after damping");
        l(i, i) = std::sqrt(s);
      } else {
        l(i, j) = s / l(j, j);
      }
    }
  }

  Matrix wt(d, d);
  for (std::size_t col = 0; col < d; ++col) {
    Vec y(d);
    for (std::size_t i = 0; i < d; ++i) {
      double s = rhs(i, col);
      for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * y[k];
      y[i] = s / l(i, i);
    }
    for (std::size_t ii = d; ii-- > 0;) {
      double s = y[ii];
      for (std::size_t k = ii + 1; k < d; ++k) s -= l(k, ii) * wt(k, col);
      wt(ii, col) = s / l(ii, ii);
    }
  }
  return wt.transposed();
}

Vec column_mean(const Matrix& a) {
  if (a.cols() == 0 || a.rows() == 0)
    throw DataError("column_mean: empty matrix");
  Vec mean(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    KahanSum acc;
    for (std::size_t j = 0; j < a.cols(); ++j) acc.add(a(i, j));
    mean[i] = acc.value() / static_cast<double>(a.cols());
  }
  return mean;
}

Matrix with_unit_columns(const Matrix& a) {
  Matrix out = a;
  for (std::size_t j = 0; j < a.cols(); ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) s += a(i, j) * a(i, j);
    s = std::sqrt(s);
    if (s == 0.0) continue;
    for (std::size_t i = 0; i < a.rows(); ++i) out(i, j) = a(i, j) / s;
  }
  return out;
}

Matrix random_orthogonal(std::size_t dim, Rng& rng) {
  Matrix g(dim, dim);
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = 0; j < dim; ++j) g(i, j) = rng.normal();
  // Modified Gram-Schmidt, column by column.
  for (std::size_t j = 0; j < dim; ++j) {
    Vec v = g.column(j);
    for (std::size_t c = 0; c < j; ++c) {
      Vec qc = g.column(c);
      double proj = dot(v, qc);
      for (std::size_t i = 0; i < dim; ++i) v[i] -= proj * qc[i];
    }
    double nn = norm(v);
    if (nn == 0.0) throw NumericError("random_orthogonal: degenerate draw");
    for (std::size_t i = 0; i < dim; ++i) g(i, j) = v[i] / nn;
  }
  return g;
}

}  // namespace xlalign
