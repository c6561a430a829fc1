#include "nhr/verify.hpp"

#include <sstream>

namespace nhr {

namespace {

Vec pack(const MState& s) {
  Vec z(s.q.size() + s.pD.size());
  z << s.q, s.pD;
  return z;
}

MState unpack(const NonholonomicSystem& sys, const Vec& z) {
  MState s;
  s.q = z.head(sys.chart.ambient_dim);
  s.pD = z.tail(sys.chart.rank_D);
  return make_state(sys, s.q, s.pD);
}

MomentumLevel level_of(const Example& ex, const VerifyOptions& opt) {
  return MomentumLevel{opt.level.size() > 0 ? opt.level : ex.default_level};
}

PhaseVec random_m_tangent(const Example& ex, const MState& s, Rng& rng) {
  const FrameChart& ch = ex.sys.chart;
  const Mat E = ch.frame(s.q);
  const Vec c = unit_sphere_sample(rng, ch.dim + ch.rank_D);
  PhaseVec u{Vec(E * c.head(ch.dim)), Vec(c.tail(ch.rank_D))};
  return u;
}

PhaseVec random_t_tangent(const FrameChart& ct, const CoVector& a, Rng& rng) {
  const Mat E = ct.frame(a.q);
  const Vec c = unit_sphere_sample(rng, 2 * ct.dim);
  return PhaseVec{Vec(E * c.head(ct.dim)), Vec(c.tail(ct.dim))};
}

}  // namespace

Trajectory simulate(const Example& ex, const MState& initial, const IntegrateOptions& base) {
  const NonholonomicSystem sys = ex.sys;
  const int na = sys.chart.ambient_dim, r = sys.chart.rank_D;

  IntegrateOptions opts = base;
  opts.project = [sys, na, r](const Vec& z) {
    Vec out = z;
    out.head(na) = sys.chart.project(Vec(z.head(na)));
    return out;
  };
  opts.domain = [sys, na](const Vec& z) { return sys.chart.in_domain(Vec(z.head(na))); };
  opts.observers["H"] = [sys](const Vec& z) {
    return hamiltonian_M(sys, unpack(sys, z));
  };
  for (int i = 0; i < static_cast<int>(ex.sections.sections.size()); ++i) {
    const Section sec = ex.sections.sections[i];
    opts.observers["J_" + std::to_string(i + 1)] = [sys, sec](const Vec& z) {
      return nh_momentum(sys, unpack(sys, z), sec);
    };
  }
  opts.observers["constraint_residual"] = [sys](const Vec& z) {
    return membership_residual(sys, unpack(sys, z));
  };

  Rhs rhs = [sys](const Vec& z) {
    const MState s = unpack(sys, z);
    const XnhResult x = nonholonomic_vector_field(sys, s);
    Vec out(z.size());
    out << x.qdot, x.pDdot;
    return out;
  };
  return integrate(rhs, pack(initial), opts);
}

CheckResult check_conservation(const Example& ex, const VerifyOptions& opt) {
  CheckResult res{"conservation", ex.name};
  res.tolerance = ex.conservation_tol;
  IntegrateOptions io;
  io.dt = opt.dt;
  io.t_final = opt.t_final;
  io.store_every = 10;
  const Trajectory traj = simulate(ex, ex.initial_state(), io);
  std::ostringstream detail;
  for (const auto& [name, vals] : traj.diagnostics) {
    if (name == "constraint_residual") continue;
    const DriftReport dr = conservation_drift(vals);
    res.max_residual = std::max(res.max_residual, dr.max_rel_drift);
    detail << name << "=" << dr.max_rel_drift << " ";
  }
  res.samples = static_cast<int>(traj.times.size());
  res.detail = detail.str();
  res.pass = res.max_residual <= res.tolerance;
  return res;
}

CheckResult check_oracle_equivalence(const Example& ex, const VerifyOptions& opt) {
  CheckResult res{"oracle_equivalence", ex.name};
  res.tolerance = 1e-9;
  Rng rng(opt.seed);
  for (int i = 0; i < opt.samples; ++i) {
    const MState s = ex.sample_state(rng);
    const XnhResult x = nonholonomic_vector_field(ex.sys, s);
    const Vec v = velocity_of(ex.sys, s);
    const LdResult ld = lagrange_dalembert_oracle(ex.sys, ex.ambient, s.q, v);
    const Vec qdot_oracle = ex.sys.chart.frame(s.q).leftCols(ex.sys.chart.rank_D) * v;
    const Vec prate = oracle_momentum_rate(ex.sys, s.q, v, ld);
    const double scale = std::max({1.0, x.pDdot.lpNorm<Eigen::Infinity>(),
                                   x.qdot.lpNorm<Eigen::Infinity>()});
    res.max_residual = std::max(
        res.max_residual, (x.qdot - qdot_oracle).lpNorm<Eigen::Infinity>() / scale);
    res.max_residual =
        std::max(res.max_residual, (x.pDdot - prate).lpNorm<Eigen::Infinity>() / scale);
  }
  res.samples = opt.samples;
  res.pass = res.max_residual <= res.tolerance;
  return res;
}

CheckResult check_momentum_relation(const Example& ex, const VerifyOptions& opt) {
  CheckResult res{"momentum_relation", ex.name};
  res.tolerance = 1e-7;
  Rng rng(opt.seed);
  GaugePack gauge(ex.sys, ex.red, ex.sections);
  std::vector<CoVector> samples;
  for (int i = 0; i < opt.samples; ++i) samples.push_back(ex.sample_reduced(rng));
  res.max_residual = verify_momentum_relation(gauge, samples).max_residual;
  res.samples = opt.samples;
  res.pass = res.max_residual <= res.tolerance;
  return res;
}

CheckResult check_dynamical_condition(const Example& ex, const VerifyOptions& opt) {
  CheckResult res{"dynamical_condition", ex.name};
  res.tolerance = 1e-9;
  Rng rng(opt.seed);
  GaugePack gauge(ex.sys, ex.red, ex.sections);
  for (int i = 0; i < opt.samples; ++i) {
    // Upstairs: |B(X_nh, e)| over a frame.
    const MState s = ex.sample_state(rng);
    const XnhResult x = nonholonomic_vector_field(ex.sys, s);
    const PhaseVec flow{x.qdot, x.pDdot};
    const Mat E = ex.sys.chart.frame(s.q);
    for (int a = 0; a < ex.sys.chart.dim; ++a) {
      PhaseVec e{Vec(E.col(a)), Vec::Zero(ex.sys.chart.rank_D)};
      res.max_residual = std::max(res.max_residual, std::abs(gauge.B_total(s, flow, e)));
    }
    // Downstairs: |B~(X~_nh, e)|.
    const CoVector alpha = ex.sample_reduced(rng);
    const ReducedField rf = reduced_vector_field(ex.sys, ex.red, alpha);
    const PhaseVec tflow{rf.xdot, rf.pdot};
    const FrameChart& ct = ex.red.chart_tilde;
    const Mat Et = ct.frame(alpha.q);
    for (int a = 0; a < ct.dim; ++a) {
      PhaseVec e{Vec(Et.col(a)), Vec::Zero(ct.dim)};
      res.max_residual =
          std::max(res.max_residual, std::abs(gauge.B_tilde(alpha, tflow, e)));
    }
  }
  res.samples = opt.samples;
  res.pass = res.max_residual <= res.tolerance;
  return res;
}

CheckResult check_B_closed_form(const Example& ex, const VerifyOptions& opt) {
  CheckResult res{"B_closed_form", ex.name};
  res.tolerance = ex.name == "solid_of_revolution" ? 1e-6
                  : ex.name == "chaplygin_ball"    ? 1e-8
                                                   : 1e-10;
  Rng rng(opt.seed);
  GaugePack gauge(ex.sys, ex.red, ex.sections);
  for (int i = 0; i < opt.samples; ++i) {
    if (ex.oracle.B_total) {
      const MState s = ex.sample_state(rng);
      const PhaseVec u = random_m_tangent(ex, s, rng);
      const PhaseVec v = random_m_tangent(ex, s, rng);
      res.max_residual = std::max(
          res.max_residual, std::abs(gauge.B_total(s, u, v) - ex.oracle.B_total(s, u, v)));
    }
    if (ex.oracle.B_tilde) {
      const CoVector alpha = ex.sample_reduced(rng);
      const PhaseVec u = random_t_tangent(ex.red.chart_tilde, alpha, rng);
      const PhaseVec v = random_t_tangent(ex.red.chart_tilde, alpha, rng);
      res.max_residual =
          std::max(res.max_residual, std::abs(gauge.B_tilde(alpha, u, v) -
                                              ex.oracle.B_tilde(alpha, u, v)));
    }
  }
  res.samples = opt.samples;
  res.pass = res.max_residual <= res.tolerance;
  return res;
}

CheckResult check_reduced_form(const Example& ex, const VerifyOptions& opt) {
  CheckResult res{"reduced_form", ex.name};
  res.tolerance = 1e-7;
  Rng rng(opt.seed);
  GaugePack gauge(ex.sys, ex.red, ex.sections);
  const MomentumLevel mu = level_of(ex, opt);
  const int nb = ex.leaf.qbar.dim;
  const int hor = ex.red.chart_tilde.hor_count();

  std::vector<LeafPoint> pts;
  const int nsamp = std::max(10, opt.samples / 2);
  for (int i = 0; i < nsamp; ++i) pts.push_back(ex.sample_leaf(rng));

  for (const LeafPoint& pt : pts) {
    const Mat Eb = ex.leaf.qbar.frame(pt.x);
    for (int t = 0; t < 3; ++t) {
      const Vec cu = unit_sphere_sample(rng, nb + hor), cv = unit_sphere_sample(rng, nb + hor);
      Vec ux = Eb * cu.head(nb), vx = Eb * cv.head(nb);
      Vec up = cu.tail(hor), vp = cv.tail(hor);
      const double mine = reduced_omega_mu(gauge, ex.leaf, mu, pt, ux, up, vx, vp);
      if (ex.oracle.omega_mu) {
        const double theirs = ex.oracle.omega_mu(pt, mu.c, PhaseVec{ux, up}, PhaseVec{vx, vp});
        res.max_residual = std::max(res.max_residual, std::abs(mine - theirs));
      }
    }
  }

  const BasicnessReport basic =
      verify_basic(gauge, ex.leaf, mu, pts, rng, /*use_gauge=*/!opt.omit_gauge);
  if (opt.omit_gauge) {
    // Negative control: the ungauged form must fail to be basic.
    res.detail = "generator_residual=" + std::to_string(basic.generator_residual);
    res.max_residual = basic.generator_residual;
    res.pass = ex.name == "chaplygin_ball" ? basic.generator_residual > 1e-3 : true;
    res.samples = nsamp;
    return res;
  }
  res.max_residual = std::max(res.max_residual, basic.generator_residual);
  res.max_residual = std::max(res.max_residual, basic.orbit_residual);
  res.samples = nsamp;
  res.pass = res.max_residual <= res.tolerance;
  return res;
}

CheckResult check_shift_identification(const Example& ex, const VerifyOptions& opt) {
  CheckResult res{"shift_identification", ex.name};
  res.tolerance = 1e-6;
  Rng rng(opt.seed);
  GaugePack gauge(ex.sys, ex.red, ex.sections);
  const MomentumLevel mu = level_of(ex, opt);
  const FrameChart& ct = ex.red.chart_tilde;

  // Shift pullback identity (Lemma level): Shift^* Omega = Omega + c_i dY~^i.
  double shift_res = 0.0;
  for (int i = 0; i < 20; ++i) {
    const CoVector alpha = ex.sample_reduced(rng);
    const CoVector shifted = shift_map(gauge, alpha, mu);
    ReducedPoint here(ex.sys, ex.red, alpha);
    ReducedPoint there(ex.sys, ex.red, shifted);
    const PhaseVec u = random_t_tangent(ct, alpha, rng);
    const PhaseVec v = random_t_tangent(ct, alpha, rng);
    // The shift is a fiber translation: same tangent representatives, with
    // Shift^* Omega - Omega = tau^* c_i dY~^i.
    double correction = 0.0;
    for (int k = 0; k < gauge.k(); ++k)
      correction += mu.c[k] * gauge.dY_tilde_form(alpha.q, k, u, v);
    shift_res = std::max(shift_res,
                         std::abs(there.omega_canonical(u, v) -
                                  (here.omega_canonical(u, v) + correction)));
  }

  std::vector<LeafPoint> pts;
  for (int i = 0; i < 50; ++i) pts.push_back(ex.sample_leaf(rng));
  const IdentificationReport ident = verify_identification(gauge, ex.leaf, mu, pts, rng);

  res.max_residual = std::max(shift_res, ident.max_residual);
  res.detail = "shift=" + std::to_string(shift_res) +
               " identification=" + std::to_string(ident.max_residual);
  res.samples = 50;
  res.pass = res.max_residual <= res.tolerance;
  return res;
}

CheckResult check_projection_consistency(const Example& ex, const VerifyOptions& opt) {
  CheckResult res{"projection_consistency", ex.name};
  res.tolerance = 1e-8;
  Rng rng(opt.seed);
  GaugePack gauge(ex.sys, ex.red, ex.sections);
  for (int i = 0; i < opt.samples; ++i) {
    const CoVector alpha = ex.sample_reduced(rng);
    const ReducedField a = reduced_vector_field(ex.sys, ex.red, alpha);
    const ReducedField b = project_dynamics(ex.sys, ex.red, alpha);
    const double scale =
        std::max({1.0, a.xdot.lpNorm<Eigen::Infinity>(), a.pdot.lpNorm<Eigen::Infinity>()});
    res.max_residual =
        std::max(res.max_residual, (a.xdot - b.xdot).lpNorm<Eigen::Infinity>() / scale);
    res.max_residual =
        std::max(res.max_residual, (a.pdot - b.pdot).lpNorm<Eigen::Infinity>() / scale);
  }
  // Leaf dynamics match the projected reduced dynamics.
  const MomentumLevel mu = level_of(ex, opt);
  for (int i = 0; i < std::max(10, opt.samples / 4); ++i) {
    const LeafPoint pt = ex.sample_leaf(rng);
    const LeafField lf = leaf_hamiltonian_field(gauge, ex.leaf, mu, pt);
    const LeafField pf = project_to_leaf(gauge, ex.leaf, mu, pt);
    const double scale =
        std::max({1.0, lf.xdot.lpNorm<Eigen::Infinity>(), lf.phdot.lpNorm<Eigen::Infinity>()});
    res.max_residual =
        std::max(res.max_residual, (lf.xdot - pf.xdot).lpNorm<Eigen::Infinity>() / scale);
    res.max_residual =
        std::max(res.max_residual, (lf.phdot - pf.phdot).lpNorm<Eigen::Infinity>() / scale);
  }
  res.samples = opt.samples;
  res.pass = res.max_residual <= res.tolerance;
  return res;
}

CheckResult check_casimir(const Example& ex, const VerifyOptions& opt) {
  CheckResult res{"casimir", ex.name};
  res.tolerance = 1e-7;
  Rng rng(opt.seed);
  GaugePack gauge(ex.sys, ex.red, ex.sections);
  const int nfun = 20;
  for (int i = 0; i < nfun; ++i) {
    const CoVector alpha = ex.sample_reduced(rng);
    const Vec inv0 = ex.invariant_coords(alpha);
    const int m = static_cast<int>(inv0.size());
    // Random polynomial of degree <= 2 in the invariant coordinates.
    const Vec lin = unit_sphere_sample(rng, m);
    const Vec quad = unit_sphere_sample(rng, m);
    const Vec cross = unit_sphere_sample(rng, m);
    auto f = [&ex, lin, quad, cross, m](const CoVector& a) {
      const Vec w = ex.invariant_coords(a);
      double val = 0.0;
      for (int j = 0; j < m; ++j) {
        val += lin[j] * w[j] + quad[j] * w[j] * w[j] + cross[j] * w[j] * w[(j + 1) % m];
      }
      return val;
    };
    res.max_residual = std::max(res.max_residual, casimir_residual(gauge, alpha, f));
  }
  res.samples = nfun;
  res.pass = res.max_residual <= res.tolerance;
  return res;
}

CheckResult check_momentum_ode(const Example& ex, const VerifyOptions& opt) {
  CheckResult res{"momentum_ode", ex.name};
  res.tolerance = 1e-6;
  if (!ex.momentum_ode) {
    res.pass = true;
    res.detail = "no shape ODE for this system";
    return res;
  }
  const MomentumOdeSetup& setup = *ex.momentum_ode;
  MomentumOdeProblem prob{setup.sys.get(), setup.xi, setup.shape, setup.shape_point, 1.0,
                          20240811};
  double worst = 0.0;

  if (ex.name == "particle") {
    for (double y : {-0.8, -0.3, 0.1, 0.6, 1.2}) {
      const MomentumOdeSample smp = assemble_momentum_ode(prob, y);
      worst = std::max(worst, std::abs(smp.A(0, 0) - (-y / (1.0 + y * y))));
      worst = std::max(worst, smp.residual);
    }
  } else if (ex.name == "snakeboard") {
    res.tolerance = 1e-6;
    double qres = 0.0;
    auto A = momentum_ode_matrix(prob, 1e-6, &qres);
    const MatrixOdeSolution F =
        solve_momentum_ode(A, setup.lo, setup.hi, setup.origin, Mat::Identity(2, 2), 2e-3);
    for (double phi : {0.7, 1.1, 1.9, 2.4}) {
      const double expected = snakeboard_E(phi, ex.params);
      worst = std::max(worst, std::abs(F.value(phi)(0, 0) - expected));
      worst = std::max(worst, std::abs(F.value(phi)(1, 1) - 1.0));
      worst = std::max(worst, std::abs(F.value(phi)(0, 1)));
      worst = std::max(worst, std::abs(F.value(phi)(1, 0)));
    }
    worst = std::max(worst, qres);
  } else {
    // Solids: probe consistency certificate over the shape range.
    for (double g3 = -0.85; g3 <= 0.85; g3 += 0.1) {
      const MomentumOdeSample smp = assemble_momentum_ode(prob, g3);
      worst = std::max(worst, smp.residual);
    }
  }
  res.max_residual = worst;
  res.samples = opt.samples;
  res.pass = res.max_residual <= res.tolerance;
  return res;
}

std::vector<std::string> verify_check_names() {
  return {"conservation",         "oracle_equivalence", "momentum_relation",
          "dynamical_condition",  "B_closed_form",      "reduced_form",
          "shift_identification", "projection_consistency", "casimir", "momentum_ode"};
}

std::vector<CheckResult> run_checks(const Example& ex, const std::vector<std::string>& names,
                                    const VerifyOptions& opt) {
  std::vector<CheckResult> out;
  for (const std::string& n : names) {
    if (n == "conservation") out.push_back(check_conservation(ex, opt));
    else if (n == "oracle_equivalence") out.push_back(check_oracle_equivalence(ex, opt));
    else if (n == "momentum_relation") out.push_back(check_momentum_relation(ex, opt));
    else if (n == "dynamical_condition") out.push_back(check_dynamical_condition(ex, opt));
    else if (n == "B_closed_form") out.push_back(check_B_closed_form(ex, opt));
    else if (n == "reduced_form") out.push_back(check_reduced_form(ex, opt));
    else if (n == "shift_identification") out.push_back(check_shift_identification(ex, opt));
    else if (n == "projection_consistency") out.push_back(check_projection_consistency(ex, opt));
    else if (n == "casimir") out.push_back(check_casimir(ex, opt));
    else if (n == "momentum_ode") out.push_back(check_momentum_ode(ex, opt));
    else throw ParameterError("unknown check: " + n);
  }
  return out;
}

}  // namespace nhr
