#include "crf/curvature.hpp"

#include <array>
#include <cmath>
#include <map>
#include <mutex>

#include "crf/errors.hpp"
#include "crf/stencil.hpp"
#include "curvature_kernel.hpp"

namespace crf {

namespace {

void check_finite(std::span<const double> field, const char* what) {
  for (double v : field) {
    if (!std::isfinite(v)) throw DegenerationError(std::string("non-finite ") + what);
  }
}

// Constant-component tensors in the frame (e_0 radial, e_1..e_m fiber).
// Every tensor built from theta^0 and g is invariant under rotations of the
// fiber frame, so only the connection terms
//   nabla_{e_a} e_0 = h e_a,   nabla_{e_a} e_b = -h delta_ab e_0
// act on it. All tensors below are computed with h = 1.
class FrameTensor {
 public:
  FrameTensor(int dim, int rank) : dim_(dim), rank_(rank), data_(ipow(dim, rank), 0.0) {}

  int rank() const { return rank_; }
  double& at(std::span<const int> idx) { return data_[flat(idx)]; }
  double at(std::span<const int> idx) const { return data_[flat(idx)]; }

  double dot(const FrameTensor& o) const {
    double sum = 0.0;
    for (std::size_t k = 0; k < data_.size(); ++k) sum += data_[k] * o.data_[k];
    return sum;
  }

  // theta^0 (x) T
  FrameTensor radial_times() const {
    FrameTensor out(dim_, rank_ + 1);
    std::copy(data_.begin(), data_.end(), out.data_.begin());
    return out;
  }

  // nabla T with the derivative slot first, for constant components.
  FrameTensor covariant() const {
    FrameTensor out(dim_, rank_ + 1);
    std::vector<int> idx(rank_ + 1);
    std::vector<int> sub(rank_);
    for (std::size_t k = 0; k < out.data_.size(); ++k) {
      unflat(k, idx);
      const int v = idx[0];
      if (v == 0) continue;
      double value = 0.0;
      for (int slot = 0; slot < rank_; ++slot) {
        std::copy(idx.begin() + 1, idx.end(), sub.begin());
        const int i = sub[slot];
        if (i == 0) {
          sub[slot] = v;
          value -= at(sub);
        } else if (i == v) {
          sub[slot] = 0;
          value += at(sub);
        }
      }
      out.data_[k] = value;
    }
    return out;
  }

  void unflat(std::size_t k, std::vector<int>& idx) const {
    for (int r = static_cast<int>(idx.size()) - 1; r >= 0; --r) {
      idx[r] = static_cast<int>(k % dim_);
      k /= dim_;
    }
  }

  std::size_t size() const { return data_.size(); }

 private:
  static std::size_t ipow(int base, int exp) {
    std::size_t out = 1;
    for (int k = 0; k < exp; ++k) out *= static_cast<std::size_t>(base);
    return out;
  }
  std::size_t flat(std::span<const int> idx) const {
    std::size_t k = 0;
    for (int i : idx) k = k * dim_ + i;
    return k;
  }

  int dim_;
  int rank_;
  std::vector<double> data_;
};

// P = (theta^0 theta^0) wedge-product g: the curvature pattern of radial planes.
// Q = G_ik G_jl - G_il G_jk with G the fiber metric: the fiber-plane pattern.
std::array<FrameTensor, 2> curvature_patterns(int dim) {
  FrameTensor P(dim, 4), Q(dim, 4);
  auto t0 = [](int i) { return i == 0 ? 1.0 : 0.0; };
  auto gg = [](int i, int j) { return i == j ? 1.0 : 0.0; };
  auto G = [&](int i, int j) { return (i == j && i != 0) ? 1.0 : 0.0; };
  std::array<int, 4> idx{};
  for (idx[0] = 0; idx[0] < dim; ++idx[0])
    for (idx[1] = 0; idx[1] < dim; ++idx[1])
      for (idx[2] = 0; idx[2] < dim; ++idx[2])
        for (idx[3] = 0; idx[3] < dim; ++idx[3]) {
          const int i = idx[0], j = idx[1], k = idx[2], l = idx[3];
          P.at(idx) = t0(i) * t0(k) * gg(j, l) - t0(i) * t0(l) * gg(j, k) -
                      t0(j) * t0(k) * gg(i, l) + t0(j) * t0(l) * gg(i, k);
          Q.at(idx) = G(i, k) * G(j, l) - G(i, l) * G(j, k);
        }
  return {P, Q};
}

using Gram6 = std::array<std::array<double, 6>, 6>;

Gram6 compute_second_gradient_gram(int m) {
  const int dim = m + 1;
  auto [P, Q] = curvature_patterns(dim);
  const FrameTensor B1 = P.radial_times();
  const FrameTensor B2 = Q.radial_times();
  const FrameTensor B3 = P.covariant();
  const std::array<FrameTensor, 6> basis{B1.radial_times(), B2.radial_times(),
                                         B3.radial_times(), B1.covariant(),
                                         B2.covariant(),    B3.covariant()};
  Gram6 gram{};
  for (int j = 0; j < 6; ++j)
    for (int k = j; k < 6; ++k) gram[j][k] = gram[k][j] = basis[j].dot(basis[k]);
  return gram;
}

const Gram6& second_gradient_gram(int m) {
  static std::mutex mutex;
  static std::map<int, Gram6> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(m);
  if (it == cache.end()) it = cache.emplace(m, compute_second_gradient_gram(m)).first;
  return it->second;
}

}  // namespace

void sectional_curvatures(const SymmetricMetric& g, std::vector<double>& k_rad,
                          std::vector<double>& k_sph) {
  const auto& space = g.space();
  const Stencil st(space);
  const std::vector<double> alpha = g.log_lapse();
  const std::vector<double> beta = g.log_warp();
  const std::size_t n = g.size();
  k_rad.resize(n);
  k_sph.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    detail::sectional_at<double>(space, st, alpha, beta, i, k_rad[i], k_sph[i]);
  }
}

std::vector<double> warp_rate(const SymmetricMetric& g) {
  const auto& space = g.space();
  const Stencil st(space);
  const std::vector<double> alpha = g.log_lapse();
  const std::vector<double> beta = g.log_warp();
  const auto L = space.reference_log_derivative();
  std::vector<double> h(g.size(), 0.0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (space.is_pole(i)) continue;
    h[i] = std::exp(-alpha[i]) * (L[i] + st.first<double>(beta, i, Parity::Even));
  }
  return h;
}

double gradient_rm_norm_sq(int m, double dk_rad, double dk_sph, double warp_rate,
                           double k_rad, double k_sph) {
  const double diff = warp_rate * (k_rad - k_sph);
  return 4.0 * m * dk_rad * dk_rad + 2.0 * m * (m - 1) * dk_sph * dk_sph +
         8.0 * m * (m - 1) * diff * diff;
}

double second_gradient_rm_norm_sq(int m, const double (&c)[3], const double (&dc)[3],
                                  double warp_rate) {
  const Gram6& gram = second_gradient_gram(m);
  const double v[6] = {dc[0], dc[1], dc[2],
                       warp_rate * c[0], warp_rate * c[1], warp_rate * c[2]};
  double sum = 0.0;
  for (int j = 0; j < 6; ++j)
    for (int k = 0; k < 6; ++k) sum += v[j] * gram[j][k] * v[k];
  return std::max(sum, 0.0);
}

CurvatureBundle compute_curvature(const SymmetricMetric& g) {
  const int m = g.m();
  const std::size_t n = g.size();
  const double c2 = 2.0 * g.einstein_c();
  CurvatureBundle out;
  sectional_curvatures(g, out.k_rad, out.k_sph);
  check_finite(out.k_rad, "radial curvature");
  check_finite(out.k_sph, "fiber curvature");

  out.ric_rad.resize(n);
  out.ric_tan.resize(n);
  out.scalar.resize(n);
  out.einstein_dev_rad.resize(n);
  out.einstein_dev_tan.resize(n);
  out.norm_rm_sq.resize(n);
  out.norm_dev_sq.resize(n);
  out.grad_rm_norm.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double kr = out.k_rad[i];
    const double ks = out.k_sph[i];
    out.ric_rad[i] = m * kr;
    out.ric_tan[i] = kr + (m - 1) * ks;
    out.scalar[i] = m * (2.0 * kr + (m - 1) * ks);
    out.einstein_dev_rad[i] = out.ric_rad[i] - c2;
    out.einstein_dev_tan[i] = out.ric_tan[i] - c2;
    out.norm_rm_sq[i] = 4.0 * m * kr * kr + 2.0 * m * (m - 1) * ks * ks;
    out.norm_dev_sq[i] = out.einstein_dev_rad[i] * out.einstein_dev_rad[i] +
                         m * out.einstein_dev_tan[i] * out.einstein_dev_tan[i];
  }

  const Stencil st(g.space());
  const auto a = g.a();
  const std::vector<double> dk_rad = st.first(out.k_rad, Parity::Even);
  const std::vector<double> dk_sph = st.first(out.k_sph, Parity::Even);
  const std::vector<double> h = warp_rate(g);
  for (std::size_t i = 0; i < n; ++i) {
    out.grad_rm_norm[i] = std::sqrt(gradient_rm_norm_sq(
        m, dk_rad[i] / a[i], dk_sph[i] / a[i], h[i], out.k_rad[i], out.k_sph[i]));
  }
  return out;
}

std::vector<double> second_gradient_rm_norm(const SymmetricMetric& g,
                                            const CurvatureBundle& curv) {
  const int m = g.m();
  const std::size_t n = g.size();
  const Stencil st(g.space());
  const auto a = g.a();
  const std::vector<double> h = warp_rate(g);
  const std::vector<double> dk_rad = st.first(curv.k_rad, Parity::Even);
  const std::vector<double> dk_sph = st.first(curv.k_sph, Parity::Even);
  std::array<std::vector<double>, 3> c;
  for (auto& f : c) f.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    c[0][i] = dk_rad[i] / a[i];
    c[1][i] = dk_sph[i] / a[i];
    c[2][i] = h[i] * (curv.k_rad[i] - curv.k_sph[i]);
  }
  std::array<std::vector<double>, 3> dc;
  for (int j = 0; j < 3; ++j) {
    dc[j] = st.first(c[j], Parity::Odd);
    for (std::size_t i = 0; i < n; ++i) dc[j][i] /= a[i];
  }
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double ci[3] = {c[0][i], c[1][i], c[2][i]};
    const double dci[3] = {dc[0][i], dc[1][i], dc[2][i]};
    if (g.space().is_pole(i)) {
      // Every c_j is odd, so h c_j -> e_0(c_j) at a pole.
      out[i] = std::sqrt(second_gradient_rm_norm_sq(m, dci, dci, 1.0));
      continue;
    }
    out[i] = std::sqrt(second_gradient_rm_norm_sq(m, ci, dci, h[i]));
  }
  return out;
}

}  // namespace crf
