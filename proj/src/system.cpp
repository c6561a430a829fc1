#include "nhr/system.hpp"

#include <Eigen/Cholesky>

namespace nhr {

MState make_state(const NonholonomicSystem& sys, const Vec& q, const Vec& pD) {
  sys.chart.require_domain(q);
  if (pD.size() != sys.chart.rank_D) throw ParameterError("pD has wrong length");
  MState s;
  s.q = q;
  s.pD = pD;
  const Mat kDD = sys.metric_DD(q);
  Eigen::LLT<Mat> llt(kDD);
  if (llt.info() != Eigen::Success) throw SingularMetricError("kappa_DD not positive definite");
  if (sys.chart.rank_W() > 0)
    s.pW = sys.metric_WD(q) * llt.solve(pD);
  else
    s.pW = Vec::Zero(0);
  return s;
}

Vec full_momentum(const MState& s) {
  Vec p(s.pD.size() + s.pW.size());
  p << s.pD, s.pW;
  return p;
}

double membership_residual(const NonholonomicSystem& sys, const MState& s) {
  if (sys.chart.rank_W() == 0) return 0.0;
  const Mat kDD = sys.metric_DD(s.q);
  const Vec expect = sys.metric_WD(s.q) * kDD.llt().solve(s.pD);
  return (expect - s.pW).lpNorm<Eigen::Infinity>();
}

MState legendre_to_M(const NonholonomicSystem& sys, const Vec& q, const Vec& v) {
  sys.chart.require_domain(q);
  const Mat kDD = sys.metric_DD(q);
  Eigen::LLT<Mat> llt(kDD);
  if (llt.info() != Eigen::Success) throw SingularMetricError("kappa_DD not positive definite");
  return make_state(sys, q, kDD * v);
}

Vec velocity_of(const NonholonomicSystem& sys, const MState& s) {
  return sys.metric_DD(s.q).llt().solve(s.pD);
}

double hamiltonian_M(const NonholonomicSystem& sys, const MState& s) {
  const Vec v = velocity_of(sys, s);
  return 0.5 * s.pD.dot(v) + sys.potential(s.q);
}

namespace {

// H as a function of the (q, pD) chart of M, for finite differencing.
double ham_chart(const NonholonomicSystem& sys, const Vec& q, const Vec& pD) {
  const Mat kDD = sys.metric_DD(q);
  const Vec v = kDD.llt().solve(pD);
  return 0.5 * pD.dot(v) + sys.potential(q);
}

Vec full_momentum_chart(const NonholonomicSystem& sys, const Vec& q, const Vec& pD) {
  Vec p(sys.chart.dim);
  p.head(sys.chart.rank_D) = pD;
  if (sys.chart.rank_W() > 0)
    p.tail(sys.chart.rank_W()) = sys.metric_WD(q) * sys.metric_DD(q).llt().solve(pD);
  return p;
}

}  // namespace

double theta_M(const NonholonomicSystem& sys, const MState& s, const PhaseVec& u) {
  return full_momentum(s).dot(sys.chart.coeffs(s.q, u.base));
}

double omega_M_generic(const NonholonomicSystem& sys, const MState& s, const PhaseVec& u,
                       const PhaseVec& v) {
  const FrameChart& ch = sys.chart;
  // Decompose u, v on the mixed frame basis {(X_a, 0), (0, e_a)} and apply
  // -dTheta with constant-coefficient extensions: frame-field brackets are the
  // only bracket terms.
  const Vec cu = ch.coeffs(s.q, u.base), cv = ch.coeffs(s.q, v.base);

  // Theta evaluated on the constant-coefficient extension of v, as a function
  // of the M-chart (q', pD').
  auto theta_of = [&](const Vec& cbase) {
    return [&sys, cbase](const Vec& q, const Vec& pD) {
      return full_momentum_chart(sys, q, pD).dot(cbase);
    };
  };
  auto dderiv = [&](const std::function<double(const Vec&, const Vec&)>& f, const PhaseVec& dir) {
    Vec z(s.q.size() + s.pD.size());
    z << s.q, s.pD;
    Vec d(z.size());
    d << dir.base, dir.fiber;
    const double h = fd::step(z) / std::max(1.0, d.lpNorm<Eigen::Infinity>());
    const Vec zp = z + h * d, zm = z - h * d;
    const auto split = [&](const Vec& w) {
      return std::pair<Vec, Vec>(w.head(s.q.size()), w.tail(s.pD.size()));
    };
    auto [qp, pp] = split(zp);
    auto [qm, pm] = split(zm);
    return (f(qp, pp) - f(qm, pm)) / (2.0 * h);
  };

  const double u_theta_v = dderiv(theta_of(cv), u);
  const double v_theta_u = dderiv(theta_of(cu), v);

  double on_bracket = 0.0;
  const Vec p = full_momentum(s);
  for (int a = 0; a < ch.dim; ++a)
    for (int b = 0; b < ch.dim; ++b) {
      if (std::abs(cu[a]) < 1e-15 || std::abs(cv[b]) < 1e-15 || a == b) continue;
      const Vec br = frame_bracket(ch, a, b, s.q);
      on_bracket += cu[a] * cv[b] * p.dot(ch.coeffs(s.q, br));
    }
  return -(u_theta_v - v_theta_u - on_bracket);
}

namespace {

// Pairings <p, [X_a, X_b]> for D-indexed pairs; the only nonconstant part of
// Omega_M on the C-basis.
Mat bracket_pairings(const NonholonomicSystem& sys, const MState& s) {
  const int r = sys.chart.rank_D;
  const Vec p = full_momentum(s);
  Mat out = Mat::Zero(r, r);
  for (int a = 0; a < r; ++a)
    for (int b = a + 1; b < r; ++b) {
      const Vec br = frame_bracket(sys.chart, a, b, s.q);
      const double val = p.dot(sys.chart.coeffs(s.q, br));
      out(a, b) = val;
      out(b, a) = -val;
    }
  return out;
}

// System matrix M_ij = Omega(e_j, e_i) on the C-basis, so that M x = dH
// with x the coefficients of X on {(X_a,0), (0,e_a)}.
Mat omega_solve_matrix(const NonholonomicSystem& sys, const MState& s) {
  const int r = sys.chart.rank_D;
  const Mat pb = bracket_pairings(sys, s);
  Mat M = Mat::Zero(2 * r, 2 * r);
  // Row a (base): Omega(e_b, e_a) = <p,[X_b,X_a]> = -pb(a,b); Omega(fiber_b, e_a) = -delta.
  M.topLeftCorner(r, r) = -pb;
  M.topRightCorner(r, r) = -Mat::Identity(r, r);
  M.bottomLeftCorner(r, r) = Mat::Identity(r, r);
  return M;
}

Vec differential_on_C(const NonholonomicSystem& sys, const MField& f, const MState& s) {
  const int r = sys.chart.rank_D;
  const Mat E = sys.chart.frame(s.q);
  Vec df(2 * r);
  for (int a = 0; a < r; ++a) {
    PhaseVec dir{E.col(a), Vec::Zero(r)};
    df[a] = m_directional(f, s, dir, sys);
  }
  for (int a = 0; a < r; ++a) {
    PhaseVec dir{Vec::Zero(sys.chart.ambient_dim), Vec::Unit(r, a)};
    df[r + a] = m_directional(f, s, dir, sys);
  }
  return df;
}

XnhResult solve_on_C(const NonholonomicSystem& sys, const MState& s, const Vec& rhs,
                     const Mat* B_base) {
  const int r = sys.chart.rank_D;
  Mat M = omega_solve_matrix(sys, s);
  if (B_base) {
    // Gauge shift: add B(e_b, e_a) on base-base entries (rows follow the
    // Omega(e_j, e_i) orientation).
    M.topLeftCorner(r, r) += B_base->topLeftCorner(r, r).transpose();
  }
  Eigen::JacobiSVD<Mat> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const double smin = svd.singularValues().minCoeff();
  if (smin < 1e-12 * std::max(1.0, svd.singularValues().maxCoeff()))
    throw DegenerateSectionError("Omega_M|_C degenerate at state");
  const Vec x = svd.solve(rhs);
  const double res = (M * x - rhs).norm();
  const double tol = 1e-10 * std::max(1.0, rhs.norm());
  if (res > tol) throw DegenerateSectionError("Omega_M|_C solve residual too large");
  XnhResult out;
  const Mat E = sys.chart.frame(s.q);
  out.qdot = E.leftCols(r) * x.head(r);
  out.pDdot = x.tail(r);
  out.solve_residual = res;
  out.smallest_singular_value = smin;
  return out;
}

}  // namespace

double m_directional(const MField& f, const MState& s, const PhaseVec& u,
                     const NonholonomicSystem& sys) {
  Vec z(s.q.size() + s.pD.size());
  z << s.q, s.pD;
  Vec d(z.size());
  d << u.base, u.fiber;
  auto eval = [&](const Vec& w) {
    MState t;
    t.q = w.head(s.q.size());
    t.pD = w.tail(s.pD.size());
    t.pW = full_momentum_chart(sys, t.q, t.pD).tail(sys.chart.rank_W());
    return f(t);
  };
  const double h = fd::step4(z) / std::max(1.0, d.lpNorm<Eigen::Infinity>());
  return (8.0 * (eval(z + h * d) - eval(z - h * d)) -
          (eval(z + 2.0 * h * d) - eval(z - 2.0 * h * d))) /
         (12.0 * h);
}

XnhResult nonholonomic_vector_field(const NonholonomicSystem& sys, const MState& s) {
  auto H = [&sys](const MState& t) { return ham_chart(sys, t.q, t.pD); };
  return hamiltonian_field_M(sys, H, s, nullptr);
}

XnhResult hamiltonian_field_M(const NonholonomicSystem& sys, const MField& f, const MState& s,
                              const Mat* B_base) {
  const Vec df = differential_on_C(sys, f, s);
  return solve_on_C(sys, s, df, B_base);
}

double nonholonomic_bracket(const NonholonomicSystem& sys, const MField& f, const MField& g,
                            const MState& s) {
  const XnhResult xg = hamiltonian_field_M(sys, g, s);
  PhaseVec dir{xg.qdot, xg.pDdot};
  return m_directional(f, s, dir, sys);
}

LdResult lagrange_dalembert_oracle(const NonholonomicSystem& sys, const AmbientLagrangian& amb,
                                   const Vec& q, const Vec& v) {
  const FrameChart& ch = sys.chart;
  const int na = ch.ambient_dim;
  const int r = ch.rank_D;
  const int nw = ch.rank_W();
  const Mat E = ch.frame(q);
  const Vec u = E.leftCols(r) * v;  // ambient velocity

  const Mat M0 = amb.mass(q);

  // Nonholonomic constraint rows: the W-dual coframe elements as ambient row
  // vectors a(q) with a(q) . qdot = 0 on D.  Build them from the frame by
  // completing with the holonomic normal space handled separately: rows are
  // obtained from the pseudoinverse rows for the W-columns.
  auto nh_rows = [&](const Vec& z) {
    const Mat Ez = ch.frame(z);
    // Rows of the coframe: solve Ez^T (via least squares) for each W index.
    // coeff_a(w) = e_a^T pinv(Ez) w ; the row is pinv(Ez)^T e_a restricted to
    // the tangent space.  Use QR-based pseudoinverse.
    Mat pinv = Ez.completeOrthogonalDecomposition().pseudoInverse();  // dim x na
    Mat rows(nw, na);
    for (int w = 0; w < nw; ++w) rows.row(w) = pinv.row(r + w);
    return rows;
  };

  // Holonomic constraint Jacobian via finite differences.
  const int nh = amb.n_holonomic;
  Mat Dphi(nh, na);
  if (nh > 0) {
    for (int i = 0; i < na; ++i) {
      Vec e = Vec::Zero(na);
      e[i] = 1.0;
      Dphi.col(i) = fd::vector_directional(amb.holonomic, q, e);
    }
  }

  const Mat A_nh = nh_rows(q);
  const int m = nw + nh;
  Mat A(m, na);
  A.topRows(nw) = A_nh;
  if (nh > 0) A.bottomRows(nh) = Dphi;

  // Force terms: d/dt(M qdot) - dL/dq = M qddot + (DM.u)u - 1/2 grad(u^T M u) + grad U.
  Mat Mdot = Mat::Zero(na, na);
  {
    const double h = fd::step4(q) / std::max(1.0, u.lpNorm<Eigen::Infinity>());
    auto mass_fn = [&](double t) { return amb.mass(q + t * u); };
    Mdot = (8.0 * (mass_fn(h) - mass_fn(-h)) - (mass_fn(2 * h) - mass_fn(-2 * h))) / (12.0 * h);
  }
  Vec grad_kin(na), gradU(na);
  {
    auto kin = [&](const Vec& z) { return 0.5 * u.dot(amb.mass(z) * u); };
    for (int i = 0; i < na; ++i) {
      const Vec e = Vec::Unit(na, i);
      grad_kin[i] = fd::directional4(kin, q, e);
      gradU[i] = fd::directional4(amb.potential, q, e);
    }
  }
  const Vec force = -(Mdot * u) + grad_kin - gradU;

  // Differentiated constraints: A qddot = -(dA/dt) qdot.
  Vec rhs_c(m);
  {
    auto rows_fn = [&](const Vec& z) {
      Mat rows(m, na);
      rows.topRows(nw) = nh_rows(z);
      if (nh > 0) {
        for (int i = 0; i < na; ++i) {
          Vec e = Vec::Zero(na);
          e[i] = 1.0;
          rows.block(nw, i, nh, 1) = fd::vector_directional(amb.holonomic, z, e);
        }
      }
      return rows;
    };
    const double h = fd::step4(q) / std::max(1.0, u.lpNorm<Eigen::Infinity>());
    const Mat Adot = (8.0 * (rows_fn(q + h * u) - rows_fn(q - h * u)) -
                      (rows_fn(q + 2 * h * u) - rows_fn(q - 2 * h * u))) /
                     (12.0 * h);
    rhs_c = -(Adot * u);
  }

  Mat KKT = Mat::Zero(na + m, na + m);
  KKT.topLeftCorner(na, na) = M0;
  KKT.topRightCorner(na, m) = -A.transpose();
  KKT.bottomLeftCorner(m, na) = A;
  Vec rhs(na + m);
  rhs << force, rhs_c;

  Eigen::FullPivLU<Mat> lu(KKT);
  if (!lu.isInvertible()) throw SingularMassMatrixError("constrained mass matrix singular");
  const Vec sol = lu.solve(rhs);

  LdResult out;
  out.qddot = sol.head(na);
  out.multipliers = sol.segment(na, nw);
  // v_dot from E_D v_dot = qddot - (D E_D . u) v.
  Mat dED(na, r);
  {
    const double h = fd::step4(q) / std::max(1.0, u.lpNorm<Eigen::Infinity>());
    auto ED = [&](double t) { return Mat(ch.frame(q + t * u).leftCols(r)); };
    dED = (8.0 * (ED(h) - ED(-h)) - (ED(2 * h) - ED(-2 * h))) / (12.0 * h);
  }
  out.vdot = lstsq(E.leftCols(r), out.qddot - dED * v);
  return out;
}

Vec oracle_momentum_rate(const NonholonomicSystem& sys, const Vec& q, const Vec& v,
                         const LdResult& ld) {
  const int r = sys.chart.rank_D;
  const Vec u = sys.chart.frame(q).leftCols(r) * v;
  auto kD = [&](double t) {
    return Mat(sys.metric(q + t * u).topRows(r).leftCols(r));
  };
  const double h = fd::step4(q) / std::max(1.0, u.lpNorm<Eigen::Infinity>());
  const Mat kdot = (8.0 * (kD(h) - kD(-h)) - (kD(2 * h) - kD(-2 * h))) / (12.0 * h);
  return kdot * v + sys.metric_DD(q) * ld.vdot;
}

}  // namespace nhr
