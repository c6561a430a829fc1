#include "nhr/mwreduce.hpp"

namespace nhr {

CoVector leaf_section(const ReducedChart& red, const LeafChart& leaf, const LeafPoint& pt,
                      const MomentumLevel& mu) {
  const FrameChart& ct = red.chart_tilde;
  CoVector alpha;
  alpha.q = leaf.section_base(pt.x);
  alpha.p = Vec(ct.dim);
  alpha.p.head(ct.hor_count()) = pt.ph;
  alpha.p.tail(ct.rank_S) = mu.c;
  return alpha;
}

Vec level_set_membership(const GaugePack& gauge, const CoVector& alpha, const MomentumLevel& mu) {
  Vec res(mu.c.size());
  for (int i = 0; i < mu.c.size(); ++i) res[i] = gauge.J_tilde(alpha, i) - mu.c[i];
  return res;
}

PhaseVec leaf_tangent_lift(const ReducedChart& red, const LeafChart& leaf, const LeafPoint& pt,
                           const MomentumLevel& mu, const Vec& dx, const Vec& dph) {
  const FrameChart& ct = red.chart_tilde;
  PhaseVec out;
  out.base = dx.lpNorm<Eigen::Infinity>() > 0.0
                 ? fd::vector_directional(leaf.section_base, pt.x, dx)
                 : Vec(Vec::Zero(ct.ambient_dim));
  out.fiber = Vec::Zero(ct.dim);
  out.fiber.head(ct.hor_count()) = dph;
  (void)mu;
  return out;
}

double reduced_omega_mu(const GaugePack& gauge, const LeafChart& leaf, const MomentumLevel& mu,
                        const LeafPoint& pt, const Vec& ux, const Vec& uph, const Vec& vx,
                        const Vec& vph) {
  const ReducedChart& red = gauge.red();
  const CoVector alpha = leaf_section(red, leaf, pt, mu);
  const PhaseVec u = leaf_tangent_lift(red, leaf, pt, mu, ux, uph);
  const PhaseVec v = leaf_tangent_lift(red, leaf, pt, mu, vx, vph);
  return gauge.omegaB(alpha, u, v);
}

BasicnessReport verify_basic(const GaugePack& gauge, const LeafChart& leaf,
                             const MomentumLevel& mu, const std::vector<LeafPoint>& samples,
                             Rng& rng, bool use_gauge) {
  BasicnessReport rep;
  const ReducedChart& red = gauge.red();
  const FrameChart& ct = red.chart_tilde;
  const int hor = ct.hor_count();

  for (const LeafPoint& pt : samples) {
    const CoVector alpha = leaf_section(red, leaf, pt, mu);
    ReducedPoint rp(gauge.sys(), red, alpha);
    auto omega = [&](const CoVector& a, const PhaseVec& u, const PhaseVec& v) {
      if (use_gauge) return gauge.omegaB(a, u, v);
      ReducedPoint p2(gauge.sys(), red, a);
      return p2.omega_tilde(u, v);
    };

    // (a) generators inserted into the pulled-back form over a level-set
    // tangent frame (all base directions, horizontal fiber directions).
    const Mat E = ct.frame(alpha.q);
    for (int i = 0; i < gauge.k(); ++i) {
      const PhaseVec gen =
          cotangent_lift_generator(ct, [&](const Vec& x) { return gauge.eta_field(x, i); },
                                   alpha);
      for (int j = 0; j < ct.dim + hor; ++j) {
        PhaseVec e{Vec::Zero(ct.ambient_dim), Vec::Zero(ct.dim)};
        if (j < ct.dim)
          e.base = E.col(j);
        else
          e.fiber[j - ct.dim] = 1.0;
        rep.generator_residual =
            std::max(rep.generator_residual, std::abs(omega(alpha, gen, e)));
      }
    }

    // (b) value drift along the F-orbit: rebuild coefficient-represented
    // arguments at a moved point (frame fields are F-invariant).
    if (red.f_move) {
      Vec cu = unit_sphere_sample(rng, ct.dim + hor);
      Vec cv = unit_sphere_sample(rng, ct.dim + hor);
      auto rebuild = [&](const CoVector& a, const Vec& c) {
        PhaseVec u{Vec::Zero(ct.ambient_dim), Vec::Zero(ct.dim)};
        const Mat Ez = ct.frame(a.q);
        for (int b = 0; b < ct.dim; ++b) u.base += c[b] * Ez.col(b);
        u.fiber.head(hor) = c.tail(hor);
        return u;
      };
      const double here = omega(alpha, rebuild(alpha, cu), rebuild(alpha, cv));
      const CoVector moved = red.f_move(alpha, rng);
      const double there = omega(moved, rebuild(moved, cu), rebuild(moved, cv));
      rep.orbit_residual = std::max(rep.orbit_residual, std::abs(here - there));
    }
  }
  return rep;
}

CoVector shift_map(const GaugePack& gauge, const CoVector& alpha, const MomentumLevel& mu) {
  const FrameChart& ct = gauge.red().chart_tilde;
  CoVector out = alpha;
  out.p.tail(ct.rank_S) -= mu.c;
  return out;
}

CoVector phi_zero(const GaugePack& gauge, const LeafChart& leaf, const CoVector& alpha) {
  const FrameChart& ct = gauge.red().chart_tilde;
  MomentumLevel zero{Vec::Zero(ct.rank_S)};
  const Vec res = level_set_membership(gauge, alpha, zero);
  if (res.lpNorm<Eigen::Infinity>() > 1e-10)
    throw LevelSetViolationError("phi_zero requires a zero-level covector");
  CoVector out;
  out.q = leaf.project_qbar(alpha.q);
  // Pair with horizontal lifts of the Q_bar frame vectors; in the adapted
  // coframe these are the leading frame columns.
  out.p = alpha.p.head(ct.hor_count());
  return out;
}

LeafPoint phi_mu_inverse(const GaugePack& gauge, const LeafChart& leaf, const MomentumLevel& mu,
                         const CoVector& bar_alpha) {
  const int hor = gauge.red().chart_tilde.hor_count();
  LeafPoint pt{bar_alpha.q, bar_alpha.p};
  auto forward = [&](const LeafPoint& p) {
    const CoVector a = leaf_section(gauge.red(), leaf, p, mu);
    return phi_zero(gauge, leaf, shift_map(gauge, a, mu));
  };
  for (int iter = 0; iter < 20; ++iter) {
    const CoVector img = forward(pt);
    Vec r(bar_alpha.q.size() + hor);
    r << img.q - bar_alpha.q, img.p - bar_alpha.p;
    if (r.lpNorm<Eigen::Infinity>() < 1e-12) return pt;
    // Newton step in the leaf-chart frame parametrization.
    const Mat Eb = leaf.qbar.frame(pt.x);
    const int nb = leaf.qbar.dim;
    Mat Jac(r.size(), nb + hor);
    const double h = 1e-6;
    for (int j = 0; j < nb + hor; ++j) {
      LeafPoint pp = pt, pm = pt;
      if (j < nb) {
        pp.x += h * Eb.col(j);
        pm.x -= h * Eb.col(j);
      } else {
        pp.ph[j - nb] += h;
        pm.ph[j - nb] -= h;
      }
      const CoVector ip = forward(pp), im = forward(pm);
      Vec d(r.size());
      d << (ip.q - im.q) / (2 * h), (ip.p - im.p) / (2 * h);
      Jac.col(j) = d;
    }
    const Vec step = Jac.colPivHouseholderQr().solve(r);
    if (!step.allFinite()) throw InversionFailure("phi_mu inverse Newton step failed");
    pt.x = leaf.qbar.project(pt.x - Eb * step.head(nb));
    pt.ph -= step.tail(hor);
  }
  throw InversionFailure("phi_mu inverse did not converge in 20 iterations");
}

double omega_qbar(const LeafChart& leaf, const CoVector& bar_alpha, const PhaseVec& u,
                  const PhaseVec& v) {
  const FrameChart& ch = leaf.qbar;
  const Vec cu = ch.coeffs(bar_alpha.q, u.base), cv = ch.coeffs(bar_alpha.q, v.base);
  double val = 0.0;
  for (int a = 0; a < ch.dim; ++a)
    for (int b = 0; b < ch.dim; ++b) {
      if (b <= a) continue;
      const Vec br = frame_bracket(ch, a, b, bar_alpha.q);
      const double pairing = bar_alpha.p.dot(ch.coeffs(bar_alpha.q, br));
      val += pairing * (cu[a] * cv[b] - cu[b] * cv[a]);
    }
  val += u.fiber.dot(cv) - v.fiber.dot(cu);
  return val;
}

IdentificationReport verify_identification(const GaugePack& gauge, const LeafChart& leaf,
                                           const MomentumLevel& mu,
                                           const std::vector<LeafPoint>& samples, Rng& rng) {
  IdentificationReport rep;
  const ReducedChart& red = gauge.red();
  const FrameChart& ct = red.chart_tilde;
  const int hor = ct.hor_count();
  const int nb = leaf.qbar.dim;

  for (const LeafPoint& pt : samples) {
    const CoVector alpha = leaf_section(red, leaf, pt, mu);
    const Mat Eb = leaf.qbar.frame(pt.x);
    for (int trial = 0; trial < 4; ++trial) {
      const Vec cu = unit_sphere_sample(rng, nb + hor);
      const Vec cv = unit_sphere_sample(rng, nb + hor);
      auto split = [&](const Vec& c) {
        Vec dx = Vec::Zero(leaf.qbar.ambient_dim);
        for (int b = 0; b < nb; ++b) dx += c[b] * Eb.col(b);
        return std::pair<Vec, Vec>(dx, c.tail(hor));
      };
      auto [uxa, upa] = split(cu);
      auto [vxa, vpa] = split(cv);

      // phi_mu is coefficient-wise identity in the adapted leaf chart, so the
      // pulled-back canonical form is evaluated on the same coordinates.
      CoVector bar{pt.x, pt.ph};
      PhaseVec ubar{uxa, upa}, vbar{vxa, vpa};
      const double lhs = omega_qbar(leaf, bar, ubar, vbar);

      const double om =
          reduced_omega_mu(gauge, leaf, mu, pt, uxa, upa, vxa, vpa);
      const PhaseVec ulift = leaf_tangent_lift(red, leaf, pt, mu, uxa, upa);
      const PhaseVec vlift = leaf_tangent_lift(red, leaf, pt, mu, vxa, vpa);
      const double bbar = gauge.calB_tilde(alpha, ulift, vlift);
      rep.max_residual = std::max(rep.max_residual, std::abs(lhs - (om - bbar)));
    }
  }
  return rep;
}

double magnetic_term(const GaugePack& gauge, const LeafChart& leaf, const MomentumLevel& mu,
                     const CoVector& bar_alpha, const PhaseVec& u, const PhaseVec& v) {
  const LeafPoint pt = phi_mu_inverse(gauge, leaf, mu, bar_alpha);
  const CoVector alpha = leaf_section(gauge.red(), leaf, pt, mu);
  const PhaseVec ulift =
      leaf_tangent_lift(gauge.red(), leaf, pt, mu, u.base, u.fiber);
  const PhaseVec vlift =
      leaf_tangent_lift(gauge.red(), leaf, pt, mu, v.base, v.fiber);
  return gauge.calB_tilde(alpha, ulift, vlift);
}

double casimir_residual(const GaugePack& gauge, const CoVector& alpha,
                        const std::function<double(const CoVector&)>& f) {
  const FrameChart& ct = gauge.red().chart_tilde;
  const int n = ct.dim;
  auto omega = [&](const PhaseVec& u, const PhaseVec& v) { return gauge.omegaB(alpha, u, v); };
  const Mat M = two_form_solve_matrix(ct, alpha.q, omega);
  const Mat E = ct.frame(alpha.q);
  Vec df(2 * n);
  for (int a = 0; a < n; ++a)
    df[a] = fd::directional([&](const Vec& z) { return f(CoVector{z, alpha.p}); }, alpha.q,
                            Vec(E.col(a)));
  for (int a = 0; a < n; ++a)
    df[n + a] = fd::directional([&](const Vec& z) { return f(CoVector{alpha.q, z}); }, alpha.p,
                                Vec(Vec::Unit(n, a)));
  Eigen::FullPivLU<Mat> lu(M);
  if (!lu.isInvertible()) throw DegenerateFormError("Omega~_B degenerate");
  const Vec x = lu.solve(df);
  PhaseVec flow{E * x.head(n), x.tail(n)};
  double worst = 0.0;
  for (int i = 0; i < gauge.k(); ++i) {
    auto Ji = [&](const CoVector& a) { return gauge.J_tilde(a, i); };
    const double dq = fd::directional([&](const Vec& z) { return Ji(CoVector{z, alpha.p}); },
                                      alpha.q, flow.base);
    const double dp = fd::directional([&](const Vec& z) { return Ji(CoVector{alpha.q, z}); },
                                      alpha.p, flow.fiber);
    worst = std::max(worst, std::abs(dq + dp));
  }
  return worst;
}

LeafField leaf_hamiltonian_field(const GaugePack& gauge, const LeafChart& leaf,
                                 const MomentumLevel& mu, const LeafPoint& pt) {
  const ReducedChart& red = gauge.red();
  const int hor = red.chart_tilde.hor_count();
  const int nb = leaf.qbar.dim;
  const Mat Eb = leaf.qbar.frame(pt.x);

  auto basis = [&](int j) {
    Vec dx = Vec::Zero(leaf.qbar.ambient_dim);
    Vec dp = Vec::Zero(hor);
    if (j < nb)
      dx = Eb.col(j);
    else
      dp[j - nb] = 1.0;
    return std::pair<Vec, Vec>(dx, dp);
  };

  const int dim = nb + hor;
  Mat M(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) {
      if (i == j) {
        M(i, j) = 0.0;
        continue;
      }
      auto [ux, up] = basis(j);
      auto [vx, vp] = basis(i);
      M(i, j) = reduced_omega_mu(gauge, leaf, mu, pt, ux, up, vx, vp);
    }

  auto H = [&](const LeafPoint& p) {
    return hamiltonian_reduced(gauge.sys(), red, leaf_section(red, leaf, p, mu));
  };
  Vec dH(dim);
  for (int j = 0; j < dim; ++j) {
    auto [dx, dp] = basis(j);
    const double h = 1e-6;
    LeafPoint pp = pt, pm = pt;
    pp.x += h * dx;
    pm.x -= h * dx;
    pp.ph += h * dp;
    pm.ph -= h * dp;
    dH[j] = (H(pp) - H(pm)) / (2 * h);
  }

  Eigen::JacobiSVD<Mat> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.singularValues().minCoeff() <
      1e-10 * std::max(1.0, svd.singularValues().maxCoeff()))
    throw DegenerateLeafFormError("omega_mu^B degenerate on the leaf");
  const Vec x = svd.solve(dH);
  LeafField out;
  out.xdot = Vec::Zero(leaf.qbar.ambient_dim);
  for (int j = 0; j < nb; ++j) out.xdot += x[j] * Eb.col(j);
  out.phdot = x.tail(hor);
  return out;
}

LeafField project_to_leaf(const GaugePack& gauge, const LeafChart& leaf, const MomentumLevel& mu,
                          const LeafPoint& pt) {
  const ReducedChart& red = gauge.red();
  const CoVector alpha = leaf_section(red, leaf, pt, mu);
  const ReducedField rf = reduced_vector_field(gauge.sys(), red, alpha);
  LeafField out;
  out.xdot = fd::vector_directional(leaf.project_qbar, alpha.q, rf.xdot);
  out.phdot = rf.pdot.head(red.chart_tilde.hor_count());
  return out;
}

}  // namespace nhr
