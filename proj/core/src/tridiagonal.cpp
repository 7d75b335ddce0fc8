#include "crf/tridiagonal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "crf/errors.hpp"

namespace crf {

namespace {

double norm2(std::span<const double> x) {
  double sum = 0.0;
  for (double v : x) sum += v * v;
  return std::sqrt(sum);
}

void normalize(std::vector<double>& x) {
  const double len = norm2(x);
  for (double& v : x) v /= len;
}

}  // namespace

std::vector<double> TridiagonalMatrix::apply(std::span<const double> x) const {
  const std::size_t n = size();
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    double v = diag[i] * x[i];
    if (i > 0) v += sub[i] * x[i - 1];
    if (i + 1 < n) v += sup[i] * x[i + 1];
    y[i] = v;
  }
  if (periodic) {
    y[0] += sub[0] * x[n - 1];
    y[n - 1] += sup[n - 1] * x[0];
  }
  return y;
}

TridiagonalMatrix TridiagonalMatrix::transposed() const {
  const std::size_t n = size();
  TridiagonalMatrix t;
  t.periodic = periodic;
  t.diag = diag;
  t.sub.assign(n, 0.0);
  t.sup.assign(n, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    t.sup[i] = sub[i + 1];
    t.sub[i + 1] = sup[i];
  }
  if (periodic) {
    t.sub[0] = sup[n - 1];
    t.sup[n - 1] = sub[0];
  }
  return t;
}

std::vector<double> TridiagonalMatrix::dense() const {
  const std::size_t n = size();
  std::vector<double> out(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    out[i * n + i] = diag[i];
    if (i > 0) out[i * n + i - 1] = sub[i];
    if (i + 1 < n) out[i * n + i + 1] = sup[i];
  }
  if (periodic) {
    out[n - 1] += sub[0];
    out[(n - 1) * n] += sup[n - 1];
  }
  return out;
}

double TridiagonalMatrix::norm_inf() const {
  double best = 0.0;
  const std::size_t n = size();
  for (std::size_t i = 0; i < n; ++i) {
    double row = std::abs(diag[i]);
    if (i > 0 || periodic) row += std::abs(sub[i]);
    if (i + 1 < n || periodic) row += std::abs(sup[i]);
    best = std::max(best, row);
  }
  return best;
}

TridiagonalLU::TridiagonalLU(const TridiagonalMatrix& matrix) : n_(matrix.size()) {
  if (n_ < 3) throw InvalidArgument("tridiagonal system needs at least 3 rows");
  periodic_ = matrix.periodic;
  if (!periodic_) {
    factor(matrix.sub, matrix.diag, matrix.sup);
    return;
  }
  // A = T + u v^T with u = (gamma, 0, ..., A(n-1,0)), v = (1, 0, ..., A(0,n-1)/gamma).
  const double corner_lo = matrix.sup[n_ - 1];
  const double corner_hi = matrix.sub[0];
  const double gamma = matrix.diag[0] != 0.0 ? -matrix.diag[0] : 1.0;
  std::vector<double> diag = matrix.diag;
  diag[0] -= gamma;
  diag[n_ - 1] -= corner_lo * corner_hi / gamma;
  factor(matrix.sub, std::move(diag), matrix.sup);
  std::vector<double> u(n_, 0.0);
  u[0] = gamma;
  u[n_ - 1] = corner_lo;
  solve_plain(u);
  z_ = std::move(u);
  v_last_ = corner_hi / gamma;
  denom_ = 1.0 + z_[0] + v_last_ * z_[n_ - 1];
  if (denom_ == 0.0) throw SolverError("singular cyclic tridiagonal system");
}

void TridiagonalLU::factor(std::vector<double> sub, std::vector<double> diag,
                           std::vector<double> sup) {
  const std::size_t n = n_;
  dl_.assign(n - 1, 0.0);
  du_.assign(n - 1, 0.0);
  du2_.assign(n > 2 ? n - 2 : 0, 0.0);
  ipiv_.assign(n, 0);
  d_ = std::move(diag);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    dl_[i] = sub[i + 1];
    du_[i] = sup[i];
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (std::abs(d_[i]) >= std::abs(dl_[i])) {
      ipiv_[i] = i;
      if (d_[i] == 0.0) throw SolverError("zero pivot in tridiagonal solve");
      const double fact = dl_[i] / d_[i];
      dl_[i] = fact;
      d_[i + 1] -= fact * du_[i];
    } else {
      ipiv_[i] = i + 1;
      const double fact = d_[i] / dl_[i];
      d_[i] = dl_[i];
      dl_[i] = fact;
      const double temp = du_[i];
      du_[i] = d_[i + 1];
      d_[i + 1] = temp - fact * d_[i + 1];
      if (i + 2 < n) {
        du2_[i] = du_[i + 1];
        du_[i + 1] = -fact * du_[i + 1];
      }
    }
  }
  ipiv_[n - 1] = n - 1;
  if (d_[n - 1] == 0.0) throw SolverError("zero pivot in tridiagonal solve");
}

void TridiagonalLU::solve_plain(std::vector<double>& b) const {
  const std::size_t n = n_;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (ipiv_[i] == i) {
      b[i + 1] -= dl_[i] * b[i];
    } else {
      const double temp = b[i];
      b[i] = b[i + 1];
      b[i + 1] = temp - dl_[i] * b[i];
    }
  }
  b[n - 1] /= d_[n - 1];
  b[n - 2] = (b[n - 2] - du_[n - 2] * b[n - 1]) / d_[n - 2];
  for (std::size_t k = n - 2; k-- > 0;) {
    b[k] = (b[k] - du_[k] * b[k + 1] - du2_[k] * b[k + 2]) / d_[k];
  }
}

std::vector<double> TridiagonalLU::solve(std::span<const double> rhs) const {
  if (rhs.size() != n_) throw InvalidArgument("right-hand side has the wrong size");
  std::vector<double> y(rhs.begin(), rhs.end());
  solve_plain(y);
  if (periodic_) {
    const double factor = (y[0] + v_last_ * y[n_ - 1]) / denom_;
    for (std::size_t i = 0; i < n_; ++i) y[i] -= factor * z_[i];
  }
  return y;
}

SingularValueEstimate estimate_singular_values(const TridiagonalMatrix& matrix,
                                               int iterations) {
  const std::size_t n = matrix.size();
  const TridiagonalMatrix at = matrix.transposed();
  SingularValueEstimate out;

  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = 1.0 + 0.37 * std::sin(1.3 * i + 0.2);
  normalize(x);
  double largest_sq = 0.0;
  for (int k = 0; k < iterations; ++k) {
    std::vector<double> y = at.apply(matrix.apply(x));
    largest_sq = norm2(y);
    if (largest_sq == 0.0) break;
    for (std::size_t i = 0; i < n; ++i) x[i] = y[i] / largest_sq;
  }
  out.largest = std::sqrt(largest_sq);

  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = 1.0 + 0.29 * std::cos(0.7 * i + 0.1);
  normalize(v);
  try {
    const TridiagonalLU lu(matrix);
    const TridiagonalLU lu_t(at);
    double inv_sq = 0.0;
    for (int k = 0; k < iterations; ++k) {
      std::vector<double> z = lu.solve(lu_t.solve(v));
      inv_sq = norm2(z);
      if (!std::isfinite(inv_sq)) {
        inv_sq = std::numeric_limits<double>::infinity();
        break;
      }
      for (std::size_t i = 0; i < n; ++i) v[i] = z[i] / inv_sq;
    }
    out.smallest = std::isfinite(inv_sq) && inv_sq > 0.0 ? 1.0 / std::sqrt(inv_sq) : 0.0;
  } catch (const SolverError&) {
    out.smallest = 0.0;
  }
  out.near_kernel = std::move(v);
  return out;
}

}  // namespace crf
