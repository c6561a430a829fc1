#include "nhr/gauge.hpp"

namespace nhr {

GaugePack::GaugePack(const NonholonomicSystem& sys, const ReducedChart& red,
                     const SectionBasis& sections)
    : sys_(&sys), red_(&red), sections_(sections) {}

Vec GaugePack::Y_form(const Vec& q, int i) const {
  const FrameChart& ch = sys_->chart;
  const int hor = ch.hor_count(), k = ch.rank_S;
  // C_aj = S-frame coefficients of (zeta_j)_Q; Y^i = sum_a (C^-1)_{ia} eps^{hor+a}.
  const Mat sigma = sys_->action.generators(q);
  Mat C(k, k);
  for (int j = 0; j < k; ++j) {
    const Vec gen = sigma * sections_.sections[j](q);
    C.col(j) = ch.coeffs(q, gen).segment(hor, k);
  }
  const Mat Cinv = C.inverse();
  Vec coeff = Vec::Zero(ch.dim);
  coeff.segment(hor, k) = Cinv.row(i);
  return coeff;
}

double GaugePack::J_i(const MState& s, int i) const {
  return nh_momentum(*sys_, s, sections_.sections[i]);
}

Vec GaugePack::eta_field(const Vec& x, int i) const {
  const FrameChart& ct = red_->chart_tilde;
  return ct.frame(x).col(ct.hor_count() + i);
}

double GaugePack::J_tilde(const CoVector& alpha, int i) const {
  const FrameChart& ct = red_->chart_tilde;
  return alpha.p.dot(ct.coeffs(alpha.q, eta_field(alpha.q, i)));
}

Mat GaugePack::dY_restricted(const Vec& q, int i) const {
  const FrameChart& ch = sys_->chart;
  OneForm form = [this, i](const Vec& z) { return Y_form(z, i); };
  const int r = ch.rank_D;
  Mat m = Mat::Zero(ch.dim, ch.dim);
  for (int a = 0; a < r; ++a)
    for (int b = a + 1; b < r; ++b) {
      const double v = exterior_derivative(form, ch, q, a, b);
      m(a, b) = v;
      m(b, a) = -v;
    }
  return m;
}

Mat GaugePack::dY_tilde(const Vec& x, int i) const {
  const FrameChart& ct = red_->chart_tilde;
  const int hor = ct.hor_count(), k = ct.rank_S;
  OneForm form = [&, i](const Vec& z) {
    Mat C(k, k);
    for (int j = 0; j < k; ++j)
      C.col(j) = ct.coeffs(z, Vec(ct.frame(z).col(hor + j))).segment(hor, k);
    Vec coeff = Vec::Zero(ct.dim);
    coeff.segment(hor, k) = C.inverse().row(i);
    return coeff;
  };
  return exterior_derivative_matrix(form, ct, x);
}

double GaugePack::dY_tilde_form(const Vec& x, int i, const PhaseVec& u, const PhaseVec& v) const {
  const FrameChart& ct = red_->chart_tilde;
  const Vec cu = ct.coeffs(x, u.base), cv = ct.coeffs(x, v.base);
  return contract_form(dY_tilde(x, i), cu, cv);
}

double GaugePack::B1(const MState& s, const PhaseVec& u, const PhaseVec& v) const {
  const FrameChart& ch = sys_->chart;
  const Vec cu = ch.coeffs(s.q, u.base), cv = ch.coeffs(s.q, v.base);
  double total = JK_pairing(*sys_, s, u, v);
  for (int i = 0; i < k(); ++i)
    total += J_i(s, i) * contract_form(dY_restricted(s.q, i), cu, cv);
  return total;
}

Vec GaugePack::hor_connection(const Vec& q, const Vec& v) const {
  const FrameChart& ch = sys_->chart;
  const Vec c = ch.coeffs(q, v);
  const Mat E = ch.frame(q);
  Vec vert = Vec::Zero(ch.ambient_dim);
  for (int a = ch.hor_count(); a < ch.dim; ++a) vert += c[a] * E.col(a);
  const Mat sigma = sys_->action.generators(q);
  return lstsq(sigma, vert);
}

double GaugePack::calB(const MState& s, const PhaseVec& u, const PhaseVec& v) const {
  const FrameChart& ch = sys_->chart;
  const int hor = ch.hor_count();
  const int l = sys_->action.dim_g;
  if (hor < 2) return 0.0;  // both terms are restricted to Hor

  const Mat E = ch.frame(s.q);
  const Mat sigma = sys_->action.generators(s.q);
  const Vec p = full_momentum(s);

  // Hor-projected coefficient vectors of the arguments.
  Vec cu = ch.coeffs(s.q, u.base), cv = ch.coeffs(s.q, v.base);
  cu.tail(ch.dim - hor).setZero();
  cv.tail(ch.dim - hor).setZero();

  // <J, K_V>: curvature of the Hor-connection paired with the momentum map.
  std::vector<Mat> dA(l);
  for (int j = 0; j < l; ++j) {
    OneForm form = [this, j](const Vec& z) {
      const FrameChart& c2 = sys_->chart;
      const Mat Ez = c2.frame(z);
      const Mat sz = sys_->action.generators(z);
      Eigen::ColPivHouseholderQR<Mat> qr(sz);
      Vec coeff = Vec::Zero(c2.dim);
      for (int a = c2.hor_count(); a < c2.dim; ++a) coeff[a] = qr.solve(Vec(Ez.col(a)))[j];
      return coeff;
    };
    Mat m = Mat::Zero(ch.dim, ch.dim);
    for (int a = 0; a < hor; ++a)
      for (int b = a + 1; b < hor; ++b) {
        const double val = exterior_derivative(form, ch, s.q, a, b);
        m(a, b) = val;
        m(b, a) = -val;
      }
    dA[j] = m;
  }
  double term1 = 0.0;
  for (int j = 0; j < l; ++j) {
    const double J_j = p.dot(ch.coeffs(s.q, Vec(sigma.col(j))));
    term1 += J_j * contract_form(dA[j], cu, cv);
  }

  // Z = P_V(X_nh): only its base projection enters the semi-basic wedge term.
  const XnhResult xnh = nonholonomic_vector_field(*sys_, s);
  const Vec xi_dyn = hor_connection(s.q, xnh.qdot);
  const Vec zb = sigma * xi_dyn;
  const Vec cz = ch.coeffs(s.q, zb);

  // G = K_W + d^C Y^i (x) zeta_i as a g-valued frame-pair tensor, contracted
  // as i_Z G on the second slot.
  const int nw = static_cast<int>(sys_->action.w_indices.size());
  std::vector<Mat> kw(nw);
  for (int w = 0; w < nw; ++w) kw[w] = curvature_KW_matrix(*sys_, s.q, w);
  std::vector<Mat> dY(k());
  for (int i = 0; i < k(); ++i) dY[i] = dY_restricted(s.q, i);

  auto G_of = [&](const Vec& ca, const Vec& cb) {
    Vec g = Vec::Zero(l);
    for (int w = 0; w < nw; ++w)
      g[sys_->action.w_indices[w]] += contract_form(kw[w], ca, cb);
    for (int i = 0; i < k(); ++i) {
      const Vec zeta = sections_.sections[i](s.q);
      g += contract_form(dY[i], ca, cb) * zeta;
    }
    return g;
  };

  // kappa_g(X)(eta) = kappa(T tau X, eta_Q), as a g* vector on the e-basis.
  auto kappa_g = [&](const Vec& carg) {
    Vec out(l);
    const Mat kframe = sys_->metric(s.q);
    for (int j = 0; j < l; ++j) {
      const Vec cgen = ch.coeffs(s.q, Vec(sigma.col(j)));
      out[j] = carg.dot(kframe * cgen);
    }
    return out;
  };

  const Vec Gu = G_of(cz, cu), Gv = G_of(cz, cv);
  const double wedge = kappa_g(cu).dot(Gv) - kappa_g(cv).dot(Gu);
  return term1 - 0.5 * wedge;
}

double GaugePack::B_total(const MState& s, const PhaseVec& u, const PhaseVec& v) const {
  return B1(s, u, v) + calB(s, u, v);
}

namespace {

PhaseVec lift_arg(const NonholonomicSystem& sys, const ReducedChart& red, const MState& lifted,
                  const CoVector& alpha, const PhaseVec& u) {
  const FrameChart& ct = red.chart_tilde;
  const Vec c = ct.coeffs(alpha.q, u.base);
  const Mat E = sys.chart.frame(lifted.q);
  PhaseVec out;
  out.base = E.leftCols(sys.chart.rank_D) * c;
  out.fiber = Vec::Zero(sys.chart.rank_D);
  return out;
}

}  // namespace

double GaugePack::B1_tilde(const CoVector& alpha, const PhaseVec& u, const PhaseVec& v) const {
  const MState s = lift_state(*sys_, *red_, alpha);
  return B1(s, lift_arg(*sys_, *red_, s, alpha, u), lift_arg(*sys_, *red_, s, alpha, v));
}

double GaugePack::calB_tilde(const CoVector& alpha, const PhaseVec& u, const PhaseVec& v) const {
  const MState s = lift_state(*sys_, *red_, alpha);
  return calB(s, lift_arg(*sys_, *red_, s, alpha, u), lift_arg(*sys_, *red_, s, alpha, v));
}

double GaugePack::B_tilde(const CoVector& alpha, const PhaseVec& u, const PhaseVec& v) const {
  return B1_tilde(alpha, u, v) + calB_tilde(alpha, u, v);
}

double GaugePack::B1_tilde_closed(const CoVector& alpha, const PhaseVec& u,
                                  const PhaseVec& v) const {
  ReducedPoint pt(*sys_, *red_, alpha);
  const FrameChart& ct = red_->chart_tilde;
  const Vec cu = ct.coeffs(alpha.q, u.base), cv = ct.coeffs(alpha.q, v.base);
  double total = pt.b_jk(u, v);
  for (int i = 0; i < k(); ++i)
    total += J_tilde(alpha, i) * contract_form(dY_tilde(alpha.q, i), cu, cv);
  return total;
}

double GaugePack::omegaB(const CoVector& alpha, const PhaseVec& u, const PhaseVec& v,
                         bool uncancelled) const {
  ReducedPoint pt(*sys_, *red_, alpha);
  if (uncancelled)
    return pt.omega_tilde(u, v) + B1_tilde(alpha, u, v) + calB_tilde(alpha, u, v);
  const FrameChart& ct = red_->chart_tilde;
  const Vec cu = ct.coeffs(alpha.q, u.base), cv = ct.coeffs(alpha.q, v.base);
  double total = pt.omega_canonical(u, v);
  for (int i = 0; i < k(); ++i)
    total += J_tilde(alpha, i) * contract_form(dY_tilde(alpha.q, i), cu, cv);
  return total + calB_tilde(alpha, u, v);
}

double momentum_relation_residual(
    const FrameChart& chart, const CoVector& alpha,
    const std::function<double(const PhaseVec&, const PhaseVec&)>& omega,
    const std::function<Vec(const Vec&)>& eta_field,
    const std::function<double(const CoVector&)>& J) {
  const int n = chart.dim;
  const Mat E = chart.frame(alpha.q);
  const PhaseVec lift = cotangent_lift_generator(chart, eta_field, alpha);
  double worst = 0.0;
  for (int i = 0; i < 2 * n; ++i) {
    PhaseVec e{Vec::Zero(chart.ambient_dim), Vec::Zero(n)};
    double dJ;
    if (i < n) {
      e.base = E.col(i);
      dJ = fd::directional([&](const Vec& z) { return J(CoVector{z, alpha.p}); }, alpha.q,
                           e.base);
    } else {
      e.fiber[i - n] = 1.0;
      dJ = fd::directional([&](const Vec& z) { return J(CoVector{alpha.q, z}); }, alpha.p,
                           Vec(e.fiber));
    }
    worst = std::max(worst, std::abs(omega(lift, e) - dJ));
  }
  return worst;
}

MomentumRelationReport verify_momentum_relation(const GaugePack& gauge,
                                                const std::vector<CoVector>& samples) {
  MomentumRelationReport rep;
  const FrameChart& ct = gauge.red().chart_tilde;
  for (const CoVector& alpha : samples) {
    for (int i = 0; i < gauge.k(); ++i) {
      auto omega = [&](const PhaseVec& a, const PhaseVec& b) { return gauge.omegaB(alpha, a, b); };
      auto eta = [&](const Vec& x) { return gauge.eta_field(x, i); };
      auto J = [&](const CoVector& a) { return gauge.J_tilde(a, i); };
      rep.max_residual =
          std::max(rep.max_residual, momentum_relation_residual(ct, alpha, omega, eta, J));
    }
  }
  return rep;
}

}  // namespace nhr
