#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace ftnet {

using Vector = std::vector<double>;
using Sequence = std::vector<Vector>;
using Complex = std::complex<double>;

// Dense row-major real matrix.
class Matrix {
public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n);
  static Matrix from_rows(const std::vector<Vector>& rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  // Copies `block` into this matrix with its top-left corner at (r0, c0).
  void set_block(std::size_t r0, std::size_t c0, const Matrix& block);
  Matrix block(std::size_t r0, std::size_t c0, std::size_t rows, std::size_t cols) const;

  bool operator==(const Matrix& other) const = default;

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct ComplexVector {
  Vector re;
  Vector im;

  ComplexVector() = default;
  explicit ComplexVector(std::size_t n) : re(n, 0.0), im(n, 0.0) {}
  ComplexVector(Vector real, Vector imag);

  std::size_t size() const { return re.size(); }
  Complex operator[](std::size_t i) const { return {re[i], im[i]}; }
  void set(std::size_t i, Complex z) {
    re[i] = z.real();
    im[i] = z.imag();
  }

  static ComplexVector from_real(std::span<const double> v);

  bool operator==(const ComplexVector& other) const = default;
};

// Complex matrix W + V i stored as two real matrices of equal shape.
struct ComplexMatrix {
  Matrix re;
  Matrix im;

  ComplexMatrix() = default;
  ComplexMatrix(std::size_t rows, std::size_t cols) : re(rows, cols), im(rows, cols) {}
  ComplexMatrix(Matrix real, Matrix imag);

  std::size_t rows() const { return re.rows(); }
  std::size_t cols() const { return re.cols(); }
  Complex operator()(std::size_t r, std::size_t c) const { return {re(r, c), im(r, c)}; }

  bool operator==(const ComplexMatrix& other) const = default;
};

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> v);
double frobenius_norm(const Matrix& m);
double frobenius_norm(const ComplexMatrix& m);
double norm2(const ComplexVector& v);

Vector matvec(const Matrix& m, std::span<const double> v);
Vector matvec_transposed(const Matrix& m, std::span<const double> v);
Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& m);

// (W + V i)(a + b i) = (W a - V b) + (V a + W b) i.
ComplexVector cmatvec(const ComplexMatrix& m, const ComplexVector& v);

// Returns unit v with v^T vectors[keep] != 0 and v^T vectors[j] = 0 for j != keep,
// where v^T u is the bilinear (unconjugated) product.
ComplexVector null_vector_against(std::span<const ComplexVector> vectors, std::size_t keep);

// Number of vectors kept by modified Gram-Schmidt whose residual exceeds
// tol times their original norm.
std::size_t numerical_rank(std::span<const Vector> vectors, double tol = 1e-8);

// Minimum-norm solution x of M x = b for a full-row-rank M.
Vector solve_min_norm(const Matrix& m, std::span<const double> b, double tol = 1e-8);

bool all_finite(std::span<const double> v);

}  // namespace ftnet
