#include "nhr/chaplygin.hpp"

namespace nhr {

namespace {

Mat sigma_W(const NonholonomicSystem& sys, const Vec& q) {
  const Mat sigma = sys.action.generators(q);
  Mat sw(sigma.rows(), sys.action.w_indices.size());
  for (size_t j = 0; j < sys.action.w_indices.size(); ++j)
    sw.col(j) = sigma.col(sys.action.w_indices[j]);
  return sw;
}

}  // namespace

Vec connection_AW(const NonholonomicSystem& sys, const Vec& q, const Vec& v) {
  const FrameChart& ch = sys.chart;
  const Vec c = ch.coeffs(q, v);
  // P_W kills the D-components.
  Vec pw = Vec::Zero(ch.ambient_dim);
  const Mat E = ch.frame(q);
  for (int a = ch.rank_D; a < ch.dim; ++a) pw += c[a] * E.col(a);
  const Mat sw = sigma_W(sys, q);
  Eigen::ColPivHouseholderQR<Mat> qr(sw);
  if (qr.rank() < sw.cols()) throw SingularGeneratorError("G_W generators rank-deficient");
  return qr.solve(pw);
}

namespace {

// Coefficient 1-form of the w-component `wc` of A_W on the coframe: zero on
// D-columns, generator solve on W-columns.
OneForm aw_component_form(const NonholonomicSystem& sys, int wc) {
  return [&sys, wc](const Vec& q) {
    const FrameChart& ch = sys.chart;
    const Mat E = ch.frame(q);
    const Mat sw = sigma_W(sys, q);
    Eigen::ColPivHouseholderQR<Mat> qr(sw);
    Vec coeff = Vec::Zero(ch.dim);
    for (int a = ch.rank_D; a < ch.dim; ++a) coeff[a] = qr.solve(Vec(E.col(a)))[wc];
    return coeff;
  };
}

}  // namespace

Vec curvature_KW(const NonholonomicSystem& sys, const Vec& q, int a, int b) {
  const int nw = static_cast<int>(sys.action.w_indices.size());
  Vec out = Vec::Zero(nw);
  if (a >= sys.chart.rank_D || b >= sys.chart.rank_D) return out;  // d^D kills W arguments
  for (int w = 0; w < nw; ++w)
    out[w] = d_restricted(aw_component_form(sys, w), sys.chart, q, a, b);
  return out;
}

Mat curvature_KW_matrix(const NonholonomicSystem& sys, const Vec& q, int w_component) {
  const int r = sys.chart.rank_D;
  Mat m = Mat::Zero(sys.chart.dim, sys.chart.dim);
  const OneForm form = aw_component_form(sys, w_component);
  for (int a = 0; a < r; ++a)
    for (int b = a + 1; b < r; ++b) {
      const double v = exterior_derivative(form, sys.chart, q, a, b);
      m(a, b) = v;
      m(b, a) = -v;
    }
  return m;
}

double JK_pairing(const NonholonomicSystem& sys, const MState& s, const PhaseVec& u,
                  const PhaseVec& v) {
  const FrameChart& ch = sys.chart;
  const Vec cu = ch.coeffs(s.q, u.base);
  const Vec cv = ch.coeffs(s.q, v.base);
  const Vec p = full_momentum(s);
  const Mat sigma = sys.action.generators(s.q);
  double total = 0.0;
  for (size_t w = 0; w < sys.action.w_indices.size(); ++w) {
    const Vec gen = sigma.col(sys.action.w_indices[w]);
    const double J_w = p.dot(ch.coeffs(s.q, gen));
    if (std::abs(J_w) < 1e-300) continue;
    const Mat kw = curvature_KW_matrix(sys, s.q, static_cast<int>(w));
    total += J_w * contract_form(kw, cu, cv);
  }
  return total;
}

CoVector reduce_state(const NonholonomicSystem& sys, const ReducedChart& red, const MState& s) {
  CoVector out;
  out.q = red.project_q(s.q);
  out.p = s.pD;
  (void)sys;
  return out;
}

MState lift_state(const NonholonomicSystem& sys, const ReducedChart& red, const CoVector& alpha,
                  const Vec* fiber) {
  const Vec q = red.lift_q(alpha.q, fiber ? *fiber : red.default_fiber);
  return make_state(sys, q, alpha.p);
}

double hamiltonian_reduced(const NonholonomicSystem& sys, const ReducedChart& red,
                           const CoVector& alpha) {
  return hamiltonian_M(sys, lift_state(sys, red, alpha));
}

ReducedPoint::ReducedPoint(const NonholonomicSystem& sys, const ReducedChart& red,
                           const CoVector& alpha, const Vec* fiber)
    : sys_(&sys), red_(&red), alpha_(alpha), lifted_(lift_state(sys, red, alpha, fiber)) {
  const FrameChart& ch = red.chart_tilde;
  ch.require_domain(alpha.q);
  E_ = ch.frame(alpha.q);
  const int n = ch.dim;
  pairings_ = Mat::Zero(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) {
      const Vec br = frame_bracket(ch, a, b, alpha.q);
      const double val = alpha.p.dot(ch.coeffs(alpha.q, br));
      pairings_(a, b) = val;
      pairings_(b, a) = -val;
    }
}

double ReducedPoint::omega_canonical(const PhaseVec& u, const PhaseVec& v) const {
  const FrameChart& ch = red_->chart_tilde;
  const Vec cu = ch.coeffs(alpha_.q, u.base), cv = ch.coeffs(alpha_.q, v.base);
  // Omega = -dTheta with Theta(X_a) = p_a: base-base from bracket pairings,
  // mixed blocks are the coframe duality.
  double val = cu.dot(pairings_ * cv);
  val += u.fiber.dot(cv) - v.fiber.dot(cu);
  return val;
}

Vec ReducedPoint::horizontal_lift(const Vec& base) const {
  const FrameChart& ch = red_->chart_tilde;
  const Vec c = ch.coeffs(alpha_.q, base);
  const Mat E_up = sys_->chart.frame(lifted_.q);
  return E_up.leftCols(sys_->chart.rank_D) * c;
}

double ReducedPoint::b_jk(const PhaseVec& u, const PhaseVec& v) const {
  PhaseVec uu{horizontal_lift(u.base), Vec::Zero(sys_->chart.rank_D)};
  PhaseVec vv{horizontal_lift(v.base), Vec::Zero(sys_->chart.rank_D)};
  return JK_pairing(*sys_, lifted_, uu, vv);
}

double ReducedPoint::omega_tilde(const PhaseVec& u, const PhaseVec& v) const {
  return omega_canonical(u, v) - b_jk(u, v);
}

Mat two_form_solve_matrix(const FrameChart& chart, const Vec& q,
                          const std::function<double(const PhaseVec&, const PhaseVec&)>& form) {
  const int n = chart.dim;
  const Mat E = chart.frame(q);
  auto basis = [&](int i) {
    PhaseVec e{Vec::Zero(chart.ambient_dim), Vec::Zero(n)};
    if (i < n)
      e.base = E.col(i);
    else
      e.fiber[i - n] = 1.0;
    return e;
  };
  Mat M(2 * n, 2 * n);
  for (int i = 0; i < 2 * n; ++i)
    for (int j = 0; j < 2 * n; ++j) M(i, j) = (i == j) ? 0.0 : form(basis(j), basis(i));
  return M;
}

ReducedField reduced_vector_field(const NonholonomicSystem& sys, const ReducedChart& red,
                                  const CoVector& alpha) {
  const FrameChart& ch = red.chart_tilde;
  const int n = ch.dim;
  ReducedPoint pt(sys, red, alpha);
  auto form = [&](const PhaseVec& u, const PhaseVec& v) { return pt.omega_tilde(u, v); };
  const Mat M = two_form_solve_matrix(ch, alpha.q, form);

  auto H = [&](const CoVector& a) { return hamiltonian_reduced(sys, red, a); };
  const Mat E = ch.frame(alpha.q);
  Vec dH(2 * n);
  for (int a = 0; a < n; ++a) {
    auto f = [&](const Vec& z) { return H(CoVector{z, alpha.p}); };
    dH[a] = fd::directional(f, alpha.q, E.col(a));
  }
  for (int a = 0; a < n; ++a) {
    auto f = [&](const Vec& z) { return H(CoVector{alpha.q, z}); };
    dH[n + a] = fd::directional(f, alpha.p, Vec::Unit(n, a));
  }

  Eigen::FullPivLU<Mat> lu(M);
  if (!lu.isInvertible()) throw DegenerateFormError("Omega~ degenerate on T*Q~");
  const Vec x = lu.solve(dH);
  ReducedField out;
  out.xdot = E * x.head(n);
  out.pdot = x.tail(n);
  return out;
}

ReducedField project_dynamics(const NonholonomicSystem& sys, const ReducedChart& red,
                              const CoVector& alpha, const Vec* fiber) {
  const MState s = lift_state(sys, red, alpha, fiber);
  const XnhResult xnh = nonholonomic_vector_field(sys, s);
  ReducedField out;
  out.xdot = fd::vector_directional(red.project_q, s.q, xnh.qdot);
  out.pdot = xnh.pDdot;
  return out;
}

}  // namespace nhr
