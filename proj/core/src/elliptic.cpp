#include "crf/elliptic.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "crf/errors.hpp"
#include "crf/stencil.hpp"

namespace crf {

namespace {

double sup_abs(std::span<const double> v) {
  double best = 0.0;
  for (double x : v) best = std::max(best, std::abs(x));
  return best;
}

// e_0 derivatives with parities alternating from an even p.
void frame_derivatives(const ModelSpace& space, std::span<const double> lapse,
                       PressureField& field) {
  const Stencil st(space);
  const std::size_t n = field.p.size();
  auto frame = [&](std::span<const double> f, Parity parity) {
    std::vector<double> d = st.first(f, parity);
    for (std::size_t i = 0; i < n; ++i) d[i] /= lapse[i];
    return d;
  };
  field.dp = frame(field.p, Parity::Even);
  field.d2p = frame(field.dp, Parity::Odd);
  field.d3p = frame(field.d2p, Parity::Even);
}

// log of the nodal volume weight r(s)^m, corrected by the cell average of
// the flat pole model d^m (d = distance to the nearest pole, cell of width
// ds). With the plain nodal weight the rows next to a pole are off by O(1);
// the correction restores consistency there and decays like (ds / d)^2.
double log_cell_weight(const ModelSpace& space, std::size_t i, int m) {
  const double r = space.reference_radius()[i];
  if (space.topology() == Topology::Circle) return 0.0;
  const std::size_t n = space.size();
  const double k = static_cast<double>(
      space.topology() == Topology::Sphere ? std::min(i, n - 1 - i) : i);
  const double mean =
      (std::pow(k + 0.5, m + 1) - std::pow(k - 0.5, m + 1)) / ((m + 1) * std::pow(k, m));
  return m * std::log(r) + std::log(mean);
}

}  // namespace

std::vector<double> EllipticOperator::apply(std::span<const double> p) const {
  const std::size_t unknowns = matrix.size();
  std::vector<double> y = matrix.apply(p.first(unknowns));
  if (p.size() > unknowns) y.push_back(y.front());
  return y;
}

EllipticOperator assemble_operator(const SymmetricMetric& g) {
  const ModelSpace& space = g.space();
  const Topology topo = space.topology();
  const int m = g.m();
  const std::size_t n = g.size();
  const std::size_t unknowns = space.independent_size();
  const double ds = space.spacing();
  const double inv_ds2 = 1.0 / (ds * ds);
  const std::vector<double> alpha = g.log_lapse();
  const std::vector<double> beta = g.log_warp();
  const auto& s = space.grid();

  EllipticOperator op;
  op.space = g.space_ptr();
  op.lapse.assign(g.a().begin(), g.a().end());
  if (g.family() == Family::AhBall) {
    op.laplacian_scale = -1.0;
    op.shift = m + 1.0;
    op.bc_inner = BoundaryRow::PoleNeumann;
    op.bc_outer = BoundaryRow::Dirichlet;
  } else {
    op.laplacian_scale = static_cast<double>(m);
    op.shift = 2.0 * (m + 1) * g.einstein_c();
    const BoundaryRow bc =
        topo == Topology::Circle ? BoundaryRow::Periodic : BoundaryRow::PoleNeumann;
    op.bc_inner = bc;
    op.bc_outer = bc;
  }

  auto& A = op.matrix;
  A.periodic = topo == Topology::Circle;
  A.sub.assign(unknowns, 0.0);
  A.diag.assign(unknowns, 0.0);
  A.sup.assign(unknowns, 0.0);

  auto log_weight = [&](std::size_t i) {
    return log_cell_weight(space, i, m) + m * beta[i];
  };
  // Face coefficient (b^m / a)_{face} / (a_i b_i^m ds^2), b_i^m with the pole correction, toward neighbor j.
  auto face = [&](std::size_t i, std::size_t j, double s_face) {
    const double log_r_face =
        topo == Topology::Circle ? 0.0 : std::log(space.reference_radius_at(s_face));
    const double log_b_face = log_r_face + 0.5 * (beta[i] + beta[j]);
    const double log_a_face = 0.5 * (alpha[i] + alpha[j]);
    return std::exp(m * log_b_face - log_weight(i) - log_a_face - alpha[i]) * inv_ds2;
  };

  for (std::size_t i = 0; i < unknowns; ++i) {
    double lower = 0.0;
    double upper = 0.0;
    if (topo == Topology::Ball && i == n - 1) {
      A.diag[i] = 1.0;
      continue;
    }
    if (space.is_pole(i)) {
      const double pole = 2.0 * (m + 1) * std::exp(-2.0 * alpha[i]) * inv_ds2;
      (i == 0 ? upper : lower) = pole;
    } else if (topo == Topology::Circle) {
      const std::size_t up = (i + 1) % unknowns;
      const std::size_t down = (i + unknowns - 1) % unknowns;
      upper = face(i, up, s[i] + 0.5 * ds);
      lower = face(i, down, s[i] - 0.5 * ds);
    } else {
      upper = face(i, i + 1, s[i] + 0.5 * ds);
      lower = face(i, i - 1, s[i] - 0.5 * ds);
    }
    A.sub[i] = op.laplacian_scale * lower;
    A.sup[i] = op.laplacian_scale * upper;
    A.diag[i] = -op.laplacian_scale * (lower + upper) + op.shift;
  }

  if (g.family() == Family::Closed) {
    const SingularValueEstimate est = estimate_singular_values(A);
    op.singular_ratio = est.largest > 0.0 ? est.smallest / est.largest : 0.0;
    op.near_singular = op.singular_ratio <= kSingularRatioThreshold;
    if (op.near_singular) op.near_kernel = est.near_kernel;
  }
  return op;
}

std::vector<double> pressure_source(const CurvatureBundle& curv, Family family, int m) {
  std::vector<double> out(curv.norm_dev_sq.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = family == Family::AhBall ? curv.norm_dev_sq[i] / m : -curv.norm_dev_sq[i];
  }
  return out;
}

PressureField solve_pressure(const EllipticOperator& op, std::span<const double> source,
                             const PressureSolveOptions& options) {
  if (!op.space) throw InvalidArgument("elliptic operator was not assembled");
  const std::size_t n = op.space->size();
  const std::size_t unknowns = op.unknowns();
  if (source.size() != n) throw InvalidArgument("pressure source has the wrong size");

  PressureField field;
  std::vector<double> rhs(source.begin(), source.begin() + unknowns);
  if (op.bc_outer == BoundaryRow::Dirichlet) rhs.back() = 0.0;
  const double source_sup = sup_abs(rhs);

  if (source_sup <= options.zero_source) {
    field.p.assign(n, 0.0);
  } else {
    if (op.near_singular) {
      std::ostringstream msg;
      msg << "pressure operator is near-singular (sigma_min / sigma_max = "
          << op.singular_ratio << "); near-kernel mode refused";
      throw SolverError(msg.str());
    }
    std::vector<double> p = TridiagonalLU(op.matrix).solve(rhs);
    const std::vector<double> applied = op.matrix.apply(p);
    double res = 0.0;
    for (std::size_t i = 0; i < unknowns; ++i) res = std::max(res, std::abs(applied[i] - rhs[i]));
    const double scale = std::max(source_sup, op.matrix.norm_inf() * sup_abs(p));
    field.solve_residual = scale > 0.0 ? res / scale : 0.0;
    for (double v : p) {
      if (!std::isfinite(v)) throw SolverError("pressure solve produced non-finite values");
    }
    if (field.solve_residual > options.tolerance) {
      std::ostringstream msg;
      msg << "pressure residual " << field.solve_residual << " exceeds tolerance "
          << options.tolerance;
      throw SolverError(msg.str());
    }
    if (unknowns < n) p.push_back(p.front());
    field.p = std::move(p);
  }
  frame_derivatives(*op.space, op.lapse, field);
  return field;
}

void pressure_frame_derivatives(const SymmetricMetric& g, PressureField& field) {
  frame_derivatives(g.space(), g.a(), field);
}

PressureBoundsReport verify_pressure_bounds(const PressureField& p, double k_tilde,
                                            std::size_t begin, std::size_t end) {
  PressureBoundsReport report;
  end = std::min(end, p.p.size());
  const std::array<const std::vector<double>*, 4> fields{&p.p, &p.dp, &p.d2p, &p.d3p};
  for (std::size_t k = 0; k < fields.size(); ++k) {
    const auto& f = *fields[k];
    double best = 0.0;
    for (std::size_t i = begin; i < end && i < f.size(); ++i) best = std::max(best, std::abs(f[i]));
    report.suprema[k] = best;
  }
  report.within = *std::max_element(report.suprema.begin(), report.suprema.end()) <= k_tilde;
  return report;
}

}  // namespace crf
