#include "nhr/symmetry.hpp"

namespace nhr {

namespace {

int numerical_rank(const Mat& A, double tol = 1e-8) {
  if (A.cols() == 0 || A.rows() == 0) return 0;
  Eigen::JacobiSVD<Mat> svd(A);
  const double thresh = tol * std::max(1.0, svd.singularValues().maxCoeff());
  int r = 0;
  for (int i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()[i] > thresh) ++r;
  return r;
}

}  // namespace

DimensionAssumptionReport verify_dimension_assumption(const NonholonomicSystem& sys,
                                                      const Vec& q) {
  const FrameChart& ch = sys.chart;
  const Mat E = ch.frame(q);
  const Mat sigma = sys.action.generators(q);
  Mat both(ch.ambient_dim, ch.rank_D + sigma.cols());
  both.leftCols(ch.rank_D) = E.leftCols(ch.rank_D);
  both.rightCols(sigma.cols()) = sigma;
  DimensionAssumptionReport rep;
  rep.holds = numerical_rank(both) == ch.dim;
  // rank(D ∩ V) = rank D + rank V - rank(D + V).
  rep.rank_S = ch.rank_D + numerical_rank(sigma) - numerical_rank(both);
  return rep;
}

double nh_momentum(const NonholonomicSystem& sys, const MState& s, const Section& section) {
  const Vec gen = sys.action.generators(s.q) * section(s.q);
  return full_momentum(s).dot(sys.chart.coeffs(s.q, gen));
}

double check_Ad_invariance(const NonholonomicSystem& sys, const Section& section,
                           const std::vector<Vec>& base_points, int samples, Rng& rng) {
  if (!sys.action.has_samples())
    throw MissingGroupSampleError("group_sample not provided for this action");
  double worst = 0.0;
  for (const Vec& q : base_points) {
    for (int i = 0; i < samples; ++i) {
      const GroupMove mv = sys.action.group_sample(rng);
      // Ad_g xi(Psi_{g^-1} q) = xi(q) evaluated at q' = Psi_g(q):
      // equivalently Ad_g xi(q) = xi(Psi_g(q)).
      const Vec moved = mv.act_q(q);
      if (!sys.chart.in_domain(moved)) continue;
      worst = std::max(worst, (mv.Ad * section(q) - section(moved)).lpNorm<Eigen::Infinity>());
    }
  }
  return worst;
}

MomentumOdeSample assemble_momentum_ode(const MomentumOdeProblem& prob, double shape_value) {
  const NonholonomicSystem& sys = *prob.sys;
  const int k = static_cast<int>(prob.xi_basis.size());
  const int r = sys.chart.rank_D;
  const int nprobe = 2 * k + 2;

  const Vec q0 = prob.shape_point(shape_value);
  sys.chart.require_domain(q0);

  // Deterministic probe momenta on the unit sphere (two radii for spread).
  Rng rng(prob.seed);
  std::vector<MState> probes;
  probes.reserve(nprobe);
  for (int i = 0; i < nprobe; ++i) {
    const double scale = prob.probe_momentum_scale * (i % 2 == 0 ? 1.0 : 1.7);
    probes.push_back(make_state(sys, q0, scale * unit_sphere_sample(rng, r)));
  }

  // For each probe: shape rate and momentum values/rates along X_nh.
  Mat P(nprobe, k);        // columns j: shape_rate * J_{xi_j}
  Mat R(nprobe, k);        // columns m: X_nh(J_{xi_m})
  for (int p = 0; p < nprobe; ++p) {
    const MState& s = probes[p];
    const XnhResult xnh = nonholonomic_vector_field(sys, s);
    const PhaseVec flow{xnh.qdot, xnh.pDdot};
    const double shape_rate =
        m_directional([&](const MState& t) { return prob.shape(t.q); }, s, flow, sys);
    for (int j = 0; j < k; ++j) {
      P(p, j) = shape_rate * nh_momentum(sys, s, prob.xi_basis[j]);
      R(p, j) = m_directional(
          [&](const MState& t) { return nh_momentum(sys, t, prob.xi_basis[j]); }, s, flow, sys);
    }
  }

  // Column m of A solves  P * A_col = -R_col  in least squares.
  MomentumOdeSample out;
  out.A = Mat::Zero(k, k);
  double worst = 0.0;
  for (int m = 0; m < k; ++m) {
    const Vec rhs = -R.col(m);
    const Vec a = P.colPivHouseholderQr().solve(rhs);
    out.A.col(m) = a;
    const double scale = std::max({1.0, rhs.lpNorm<Eigen::Infinity>(),
                                   (P * a).lpNorm<Eigen::Infinity>()});
    worst = std::max(worst, (P * a - rhs).lpNorm<Eigen::Infinity>() / scale);
  }
  out.residual = worst;
  return out;
}

std::function<Mat(double)> momentum_ode_matrix(const MomentumOdeProblem& prob, double tol,
                                               double* max_residual) {
  return [prob, tol, max_residual](double gamma) {
    const MomentumOdeSample smp = assemble_momentum_ode(prob, gamma);
    if (max_residual) *max_residual = std::max(*max_residual, smp.residual);
    if (smp.residual > tol)
      throw IllPosedMomentumODEError(
          "probe-set residual " + std::to_string(smp.residual) +
          " exceeds tolerance; coefficients cannot depend on the shape variable alone");
    return smp.A;
  };
}

MatrixOdeSolution solve_momentum_ode(const std::function<Mat(double)>& A, double lo, double hi,
                                     double gamma0, const Mat& init, double grid_step) {
  // Integrate forward and backward from gamma0 and merge on a single grid by
  // solving two one-sided problems; simplest is to integrate from lo with an
  // initial value obtained by a backward pass when gamma0 != lo.
  if (gamma0 <= lo) return MatrixOdeSolution(A, lo, hi, init, grid_step);
  // Backward pass gamma0 -> lo under s = -(t - gamma0) reparametrization.
  auto Aback = [&](double s) { return Mat(-A(gamma0 - s)); };
  MatrixOdeSolution back(Aback, 0.0, gamma0 - lo, init, grid_step);
  const Mat F_lo = back.value(gamma0 - lo);
  MatrixOdeSolution fwd(A, lo, hi, F_lo, grid_step);
  return fwd;
}

PhaseVec cotangent_lift_generator(const FrameChart& chart,
                                  const std::function<Vec(const Vec&)>& field,
                                  const CoVector& alpha) {
  PhaseVec out;
  out.base = field(alpha.q);
  out.fiber = Vec::Zero(chart.dim);
  // pdot_a = <p, [Y, X_a]> in coframe coefficients.
  const Mat E = chart.frame(alpha.q);
  const double h = fd::step(alpha.q);
  for (int a = 0; a < chart.dim; ++a) {
    const Vec xa = E.col(a);
    auto col = [&](const Vec& z) { return Vec(chart.frame(z).col(a)); };
    const double hy = h / std::max(1.0, out.base.lpNorm<Eigen::Infinity>());
    const Vec dXa_Y = (col(alpha.q + hy * out.base) - col(alpha.q - hy * out.base)) / (2.0 * hy);
    const double hx = h / std::max(1.0, xa.lpNorm<Eigen::Infinity>());
    const Vec dY_Xa = (field(alpha.q + hx * xa) - field(alpha.q - hx * xa)) / (2.0 * hx);
    const Vec bracket = dXa_Y - dY_Xa;  // [Y, X_a]
    out.fiber[a] = alpha.p.dot(chart.coeffs(alpha.q, bracket));
  }
  return out;
}

PhaseVec m_lift_generator(const NonholonomicSystem& sys,
                          const std::function<Vec(const Vec&)>& field, const MState& s) {
  CoVector alpha{s.q, full_momentum(s)};
  PhaseVec lift = cotangent_lift_generator(sys.chart, field, alpha);
  PhaseVec out;
  out.base = lift.base;
  out.fiber = lift.fiber.head(sys.chart.rank_D);
  return out;
}

}  // namespace nhr
