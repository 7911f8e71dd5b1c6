#pragma once

// Dense kernels for the small real matrices that appear in the moment
// equations (2x2, 4x4 and 10x10).

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace osc::linalg {

/// Square row-major matrix with n in {2, 4, 10} and finite entries.
class SquareMatrix {
 public:
  explicit SquareMatrix(std::size_t n);
  /// Row-major initialisation; the number of values must be a square.
  SquareMatrix(std::initializer_list<std::initializer_list<double>> rows);

  static SquareMatrix identity(std::size_t n);

  std::size_t size() const noexcept { return n_; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }
  std::span<const double> values() const noexcept { return data_; }

  bool finite() const;
  double trace() const;

 private:
  std::size_t n_;
  std::vector<double> data_;
};

bool valid_dimension(std::size_t n);

class SingularMatrixError : public std::runtime_error {
 public:
  explicit SingularMatrixError(double rcond);
  double rcond() const noexcept { return rcond_; }

 private:
  double rcond_;
};

class NoConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::vector<double> multiply(const SquareMatrix& a, std::span<const double> x);
SquareMatrix multiply(const SquareMatrix& a, const SquareMatrix& b);

/// Solves a x = b by LU with partial pivoting. Throws SingularMatrixError
/// when the reciprocal 1-norm condition number falls below machine epsilon.
std::vector<double> solve(const SquareMatrix& a, std::span<const double> b);

/// Reciprocal condition number in the 1-norm, 1 / (|A|_1 |A^-1|_1). Zero for
/// an exactly singular matrix.
double rcond(const SquareMatrix& a);

double determinant(const SquareMatrix& a);

struct ComplexSpectrum {
  std::vector<std::complex<double>> values;

  double max_real() const;
};

/// All eigenvalues of a real nonsymmetric matrix: balancing, reduction to
/// upper Hessenberg form, then Francis double-shift QR with deflation.
/// Throws NoConvergenceError after 100 n QR sweeps.
ComplexSpectrum eigenvalues(const SquareMatrix& a);

}  // namespace osc::linalg
