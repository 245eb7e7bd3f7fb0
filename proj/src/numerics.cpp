#include "ftnet/numerics.hpp"

#include <cmath>
#include <string>

#include "ftnet/errors.hpp"

namespace ftnet {

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::from_rows(const std::vector<Vector>& rows) {
  if (rows.empty()) return {};
  Matrix m(rows.size(), rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    require(rows[r].size() == m.cols(), "Matrix::from_rows: ragged rows");
    for (std::size_t c = 0; c < m.cols(); ++c) m(r, c) = rows[r][c];
  }
  return m;
}

void Matrix::set_block(std::size_t r0, std::size_t c0, const Matrix& block) {
  require(r0 + block.rows() <= rows_ && c0 + block.cols() <= cols_,
          "Matrix::set_block: block does not fit");
  for (std::size_t r = 0; r < block.rows(); ++r)
    for (std::size_t c = 0; c < block.cols(); ++c) (*this)(r0 + r, c0 + c) = block(r, c);
}

Matrix Matrix::block(std::size_t r0, std::size_t c0, std::size_t rows, std::size_t cols) const {
  require(r0 + rows <= rows_ && c0 + cols <= cols_, "Matrix::block: out of range");
  Matrix out(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) out(r, c) = (*this)(r0 + r, c0 + c);
  return out;
}

ComplexVector::ComplexVector(Vector real, Vector imag) : re(std::move(real)), im(std::move(imag)) {
  require(re.size() == im.size(), "ComplexVector: real and imaginary parts differ in length");
}

ComplexVector ComplexVector::from_real(std::span<const double> v) {
  return ComplexVector(Vector(v.begin(), v.end()), Vector(v.size(), 0.0));
}

ComplexMatrix::ComplexMatrix(Matrix real, Matrix imag) : re(std::move(real)), im(std::move(imag)) {
  require(re.rows() == im.rows() && re.cols() == im.cols(),
          "ComplexMatrix: real and imaginary parts differ in shape");
}

double dot(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), "dot: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double frobenius_norm(const Matrix& m) { return norm2(m.data()); }

double frobenius_norm(const ComplexMatrix& m) {
  const double a = frobenius_norm(m.re);
  const double b = frobenius_norm(m.im);
  return std::sqrt(a * a + b * b);
}

double norm2(const ComplexVector& v) {
  const double a = norm2(v.re);
  const double b = norm2(v.im);
  return std::sqrt(a * a + b * b);
}

Vector matvec(const Matrix& m, std::span<const double> v) {
  require(m.cols() == v.size(), "matvec: dimension mismatch (" + std::to_string(m.cols()) +
                                    " columns vs vector of length " + std::to_string(v.size()) +
                                    ")");
  Vector out(m.rows(), 0.0);
  for (std::size_t r = 0; r < m.rows(); ++r) out[r] = dot(m.row(r), v);
  return out;
}

Vector matvec_transposed(const Matrix& m, std::span<const double> v) {
  require(m.rows() == v.size(), "matvec_transposed: dimension mismatch");
  Vector out(m.cols(), 0.0);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto row = m.row(r);
    for (std::size_t c = 0; c < m.cols(); ++c) out[c] += row[c] * v[r];
  }
  return out;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  require(a.cols() == b.rows(), "matmul: inner dimensions differ");
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  return out;
}

Matrix transpose(const Matrix& m) {
  Matrix out(m.cols(), m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) out(c, r) = m(r, c);
  return out;
}

ComplexVector cmatvec(const ComplexMatrix& m, const ComplexVector& v) {
  require(m.cols() == v.size(), "cmatvec: dimension mismatch (" + std::to_string(m.cols()) +
                                     " columns vs vector of length " +
                                     std::to_string(v.size()) + ")");
  ComplexVector out(m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto w = m.re.row(r);
    const auto u = m.im.row(r);
    double re = 0.0;
    double im = 0.0;
    for (std::size_t c = 0; c < m.cols(); ++c) {
      re += w[c] * v.re[c] - u[c] * v.im[c];
      im += u[c] * v.re[c] + w[c] * v.im[c];
    }
    out.re[r] = re;
    out.im[r] = im;
  }
  return out;
}

namespace {

using CVec = std::vector<Complex>;

Complex hermitian_dot(const CVec& a, const CVec& b) {
  Complex s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

double cnorm(const CVec& a) { return std::sqrt(std::real(hermitian_dot(a, a))); }

CVec to_cvec(const ComplexVector& v) {
  CVec out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i];
  return out;
}

// Removes the components of `u` along the orthonormal `basis` (two passes).
void orthogonalize(CVec& u, const std::vector<CVec>& basis) {
  for (int pass = 0; pass < 2; ++pass)
    for (const auto& q : basis) {
      const Complex proj = hermitian_dot(q, u);
      for (std::size_t i = 0; i < u.size(); ++i) u[i] -= proj * q[i];
    }
}

// Gram-Schmidt over `vectors`; throws DegenerateInput if any residual falls below tol.
std::vector<CVec> orthonormal_basis(const std::vector<CVec>& vectors, double tol) {
  std::vector<CVec> basis;
  for (std::size_t j = 0; j < vectors.size(); ++j) {
    CVec u = vectors[j];
    const double original = cnorm(u);
    orthogonalize(u, basis);
    const double residual = cnorm(u);
    if (original == 0.0 || residual <= tol * original)
      throw DegenerateInput("vector " + std::to_string(j) +
                            " is numerically dependent on the preceding ones");
    for (auto& x : u) x /= residual;
    basis.push_back(std::move(u));
  }
  return basis;
}

}  // namespace

ComplexVector null_vector_against(std::span<const ComplexVector> vectors, std::size_t keep) {
  require(!vectors.empty(), "null_vector_against: empty vector set");
  require(keep < vectors.size(), "null_vector_against: keep index out of range");
  const std::size_t dim = vectors.front().size();
  for (const auto& v : vectors)
    require(v.size() == dim, "null_vector_against: vectors differ in length");

  constexpr double kRankTol = 1e-8;
  std::vector<CVec> all;
  all.reserve(vectors.size());
  for (const auto& v : vectors) all.push_back(to_cvec(v));
  orthonormal_basis(all, kRankTol);

  std::vector<CVec> others;
  for (std::size_t j = 0; j < all.size(); ++j)
    if (j != keep) others.push_back(all[j]);
  const auto basis = orthonormal_basis(others, kRankTol);

  CVec w = all[keep];
  orthogonalize(w, basis);
  const double len = cnorm(w);
  // conj(w) annihilates every u with <u, w> = 0 under the bilinear product.
  ComplexVector v(dim);
  for (std::size_t i = 0; i < dim; ++i) v.set(i, std::conj(w[i]) / len);
  return v;
}

std::size_t numerical_rank(std::span<const Vector> vectors, double tol) {
  std::vector<Vector> basis;
  for (const auto& v : vectors) {
    Vector u = v;
    const double original = norm2(u);
    if (original == 0.0) continue;
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& q : basis) {
        const double proj = dot(q, u);
        for (std::size_t i = 0; i < u.size(); ++i) u[i] -= proj * q[i];
      }
    const double residual = norm2(u);
    if (residual <= tol * original) continue;
    for (auto& x : u) x /= residual;
    basis.push_back(std::move(u));
  }
  return basis.size();
}

Vector solve_min_norm(const Matrix& m, std::span<const double> b, double tol) {
  require(m.rows() == b.size(), "solve_min_norm: right-hand side length mismatch");
  require(m.rows() <= m.cols(), "solve_min_norm: matrix must be wide or square");
  // Thin QR of M^T by modified Gram-Schmidt: M^T = Q R, so M = R^T Q^T.
  const std::size_t rows = m.rows();
  const std::size_t cols = m.cols();
  std::vector<Vector> q;
  Matrix r(rows, rows);
  for (std::size_t j = 0; j < rows; ++j) {
    Vector u(m.row(j).begin(), m.row(j).end());
    const double original = norm2(u);
    for (int pass = 0; pass < 2; ++pass)
      for (std::size_t k = 0; k < q.size(); ++k) {
        const double proj = dot(q[k], u);
        r(k, j) += proj;
        for (std::size_t i = 0; i < cols; ++i) u[i] -= proj * q[k][i];
      }
    const double residual = norm2(u);
    if (original == 0.0 || residual <= tol * original)
      throw DegenerateInput("solve_min_norm: row " + std::to_string(j) +
                            " is numerically dependent; matrix is not row independent");
    r(j, j) = residual;
    for (auto& x : u) x /= residual;
    q.push_back(std::move(u));
  }
  // Forward substitution on R^T y = b.
  Vector y(rows, 0.0);
  for (std::size_t i = 0; i < rows; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= r(k, i) * y[k];
    y[i] = s / r(i, i);
  }
  Vector x(cols, 0.0);
  for (std::size_t k = 0; k < rows; ++k)
    for (std::size_t i = 0; i < cols; ++i) x[i] += q[k][i] * y[k];
  return x;
}

bool all_finite(std::span<const double> v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace ftnet
