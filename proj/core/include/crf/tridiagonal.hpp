#pragma once

#include <span>
#include <vector>

namespace crf {

/// n x n tridiagonal matrix. sub[i] = A(i, i-1) and sup[i] = A(i, i+1); when
/// `periodic` is set, sub[0] = A(0, n-1) and sup[n-1] = A(n-1, 0).
struct TridiagonalMatrix {
  std::vector<double> sub;
  std::vector<double> diag;
  std::vector<double> sup;
  bool periodic = false;

  std::size_t size() const { return diag.size(); }
  std::vector<double> apply(std::span<const double> x) const;
  TridiagonalMatrix transposed() const;
  /// Row-major dense copy.
  std::vector<double> dense() const;
  double norm_inf() const;
};

/// LU factorization with partial pivoting (the LAPACK gttrf scheme); cyclic
/// matrices are reduced to the plain case with a Sherman-Morrison update.
/// Throws SolverError on an exactly singular pivot.
class TridiagonalLU {
 public:
  explicit TridiagonalLU(const TridiagonalMatrix& matrix);

  std::vector<double> solve(std::span<const double> rhs) const;

 private:
  void factor(std::vector<double> sub, std::vector<double> diag, std::vector<double> sup);
  void solve_plain(std::vector<double>& b) const;

  std::size_t n_ = 0;
  std::vector<double> dl_, d_, du_, du2_;
  std::vector<std::size_t> ipiv_;

  // Sherman-Morrison data for the cyclic case.
  bool periodic_ = false;
  std::vector<double> z_;
  double v_last_ = 0.0;
  double denom_ = 1.0;
};

/// Extreme singular values of a tridiagonal matrix from power and inverse
/// iteration on A^T A.
struct SingularValueEstimate {
  double smallest = 0.0;
  double largest = 0.0;
  /// Right singular vector of the smallest singular value.
  std::vector<double> near_kernel;
};

SingularValueEstimate estimate_singular_values(const TridiagonalMatrix& matrix,
                                               int iterations = 60);

}  // namespace crf
