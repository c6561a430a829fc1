#include "nhr/examples.hpp"

#include <cmath>

namespace nhr {

namespace {

constexpr double kPi = 3.14159265358979323846;

Eigen::Matrix3d mat3(const Vec& q, int off = 0) {
  Eigen::Matrix3d g;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) g(i, j) = q[off + 3 * i + j];
  return g;
}

void put_mat3(Vec& q, const Eigen::Matrix3d& g, int off = 0) {
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) q[off + 3 * i + j] = g(i, j);
}

Vec flat9(const Eigen::Matrix3d& g) {
  Vec q(9);
  put_mat3(q, g);
  return q;
}

Eigen::Matrix3d rot_z(double a) {
  Eigen::Matrix3d r;
  r << std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a), 0, 0, 0, 1;
  return r;
}

double orthogonality_residual(const Vec& q, int off = 0) {
  const Eigen::Matrix3d g = mat3(q, off);
  return (g.transpose() * g - Eigen::Matrix3d::Identity()).lpNorm<Eigen::Infinity>();
}

// Rotation with prescribed third row gamma (chart section of SO(3) -> S^2).
Eigen::Matrix3d so3_with_third_row(const Eigen::Vector3d& gamma_in) {
  const Eigen::Vector3d gamma = gamma_in.normalized();
  const Eigen::Vector3d ez(0, 0, 1);
  Eigen::Vector3d alpha = ez.cross(gamma);
  if (alpha.norm() < 1e-12) alpha = Eigen::Vector3d(1, 0, 0);
  alpha.normalize();
  const Eigen::Vector3d beta = gamma.cross(alpha);
  Eigen::Matrix3d g;
  g.row(0) = alpha;
  g.row(1) = beta;
  g.row(2) = gamma;
  return g;
}

Eigen::Matrix3d random_so3(Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Matrix3d m;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m(i, j) = n(rng);
  return orthonormalize(m);
}

// Cumulative adaptive-Simpson antiderivative on a uniform grid with exact
// nodal slopes, evaluated by cubic Hermite interpolation.
class Quadrature1D {
 public:
  Quadrature1D() = default;
  Quadrature1D(const std::function<double(double)>& f, double lo, double hi, double origin,
               double step) {
    lo_ = lo;
    const long n = std::max<long>(2, std::lround((hi - lo) / step));
    h_ = (hi - lo) / static_cast<double>(n);
    vals_.resize(n + 1);
    slopes_.resize(n + 1);
    vals_[0] = 0.0;
    slopes_[0] = f(lo);
    for (long i = 0; i < n; ++i) {
      vals_[i + 1] = vals_[i] + integrate_1d(f, lo + i * h_, lo + (i + 1) * h_, 1e-14);
      slopes_[i + 1] = f(lo + (i + 1) * h_);
    }
    offset_ = value_raw(origin);
  }

  double value(double t) const { return value_raw(t) - offset_; }

 private:
  double value_raw(double t) const {
    const double s = std::clamp((t - lo_) / h_, 0.0, static_cast<double>(vals_.size() - 1));
    const long i = std::min<long>(static_cast<long>(s), vals_.size() - 2);
    const double x = s - i;
    const double x2 = x * x, x3 = x2 * x;
    return (2 * x3 - 3 * x2 + 1) * vals_[i] + (x3 - 2 * x2 + x) * h_ * slopes_[i] +
           (-2 * x3 + 3 * x2) * vals_[i + 1] + (x3 - x2) * h_ * slopes_[i + 1];
  }

  double lo_ = 0.0, h_ = 1.0, offset_ = 0.0;
  std::vector<double> vals_, slopes_;
};

}  // namespace

double snakeboard_F(double phi, const ExampleParams& p) {
  const double s = std::sin(phi), c = std::cos(phi);
  return p.mass * p.radius * s * c / (p.mass * p.radius * p.radius - p.rotor_inertia * s * s);
}

double snakeboard_E(double phi, const ExampleParams& p) {
  auto integrand = [&p](double t) {
    const double s = std::sin(t);
    return p.radius * snakeboard_F(t, p) / (s * s);
  };
  return std::exp(integrate_1d(integrand, kPi / 2.0, phi, 1e-13));
}

// ---------------------------------------------------------------------------
// Nonholonomic particle: Q = R^3, D = span{dx+y dz direction, dy},
// G = R^2 translations in (x, z), W = span{dz}.
// ---------------------------------------------------------------------------

namespace {

Example build_particle(const ExampleParams& params) {
  Example ex;
  ex.name = "particle";
  ex.params = params;

  FrameChart chart;
  chart.ambient_dim = 3;
  chart.dim = 3;
  chart.rank_D = 2;
  chart.rank_S = 1;
  chart.coordinate_names = {"x", "y", "z"};
  chart.domain = [](const Vec&) { return true; };
  chart.frame = [](const Vec& q) {
    const double y = q[1];
    const double n = 1.0 / std::sqrt(1.0 + y * y);
    Mat E(3, 3);
    E << 0, n, 0,  //
        1, 0, 0,   //
        0, y * n, 1;
    return E;
  };
  chart.structure_functions = [](const Vec& q, int a, int b) {
    // Only the (Hor, S) pair is nonzero: [X_0, X_1] = d/dy of the S column.
    const double y = q[1];
    const double n = 1.0 / std::sqrt(1.0 + y * y);
    Vec ds(3);
    const double dn = -y * n * n * n;
    ds << dn, 0.0, y * dn + n;
    Vec zero = Vec::Zero(3);
    if (a == 0 && b == 1) return ds;
    if (a == 1 && b == 0) return Vec(-ds);
    return zero;
  };

  NonholonomicSystem sys;
  sys.chart = chart;
  sys.metric = [chart](const Vec& q) {
    const Mat E = chart.frame(q);
    return Mat(E.transpose() * E);
  };
  sys.potential = [](const Vec&) { return 0.0; };

  GroupData act;
  act.dim_g = 2;
  act.generators = [](const Vec&) {
    Mat s(3, 2);
    s << 1, 0, 0, 0, 0, 1;
    return s;
  };
  act.structure_constants = {Mat::Zero(2, 2), Mat::Zero(2, 2)};
  act.w_indices = {1};
  act.group_sample = [](Rng& rng) {
    GroupMove mv;
    const double a = uniform(rng, -1.0, 1.0), c = uniform(rng, -1.0, 1.0);
    mv.act_q = [a, c](const Vec& q) {
      Vec out = q;
      out[0] += a;
      out[2] += c;
      return out;
    };
    mv.Ad = Mat::Identity(2, 2);
    return mv;
  };
  sys.action = act;
  ex.sys = sys;

  ex.sections.sections = {[](const Vec& q) {
    const double y = q[1];
    const double n = 1.0 / std::sqrt(1.0 + y * y);
    Vec c(2);
    c << n, y * n;
    return c;
  }};

  ReducedChart red;
  FrameChart ct;
  ct.ambient_dim = 2;
  ct.dim = 2;
  ct.rank_D = 2;
  ct.rank_S = 1;
  ct.coordinate_names = {"x", "y"};
  ct.domain = [](const Vec&) { return true; };
  ct.frame = [](const Vec& x) {
    const double y = x[1];
    const double n = 1.0 / std::sqrt(1.0 + y * y);
    Mat E(2, 2);
    E << 0, n, 1, 0;
    return E;
  };
  red.chart_tilde = ct;
  red.project_q = [](const Vec& q) { return Vec(q.head(2)); };
  red.lift_q = [](const Vec& x, const Vec& fiber) {
    Vec q(3);
    q << x[0], x[1], fiber.size() > 0 ? fiber[0] : 0.0;
    return q;
  };
  red.default_fiber = Vec::Zero(1);
  red.eta = {[](const Vec& x) {
    Vec c(1);
    c << 1.0 / std::sqrt(1.0 + x[1] * x[1]);
    return c;
  }};
  red.f_move = [](const CoVector& a, Rng& rng) {
    CoVector out = a;
    out.q[0] += uniform(rng, -1.0, 1.0);
    return out;
  };
  red.gw_move_q = [](const Vec& q, Rng& rng) {
    Vec out = q;
    out[2] += uniform(rng, -1.0, 1.0);
    return out;
  };
  ex.red = red;

  LeafChart leaf;
  leaf.qbar.ambient_dim = 1;
  leaf.qbar.dim = 1;
  leaf.qbar.rank_D = 1;
  leaf.qbar.rank_S = 0;
  leaf.qbar.coordinate_names = {"y"};
  leaf.qbar.domain = [](const Vec&) { return true; };
  leaf.qbar.frame = [](const Vec&) { return Mat(Mat::Identity(1, 1)); };
  leaf.project_qbar = [](const Vec& x) { return Vec(x.tail(1)); };
  leaf.section_base = [](const Vec& y) {
    Vec x(2);
    x << 0.0, y[0];
    return x;
  };
  ex.leaf = leaf;

  ex.ambient.mass = [](const Vec&) { return Mat(Mat::Identity(3, 3)); };
  ex.ambient.potential = [](const Vec&) { return 0.0; };
  ex.ambient.n_holonomic = 0;

  ex.initial_q = Vec::Zero(3);
  ex.initial_q << 0.0, 0.3, 0.0;
  ex.initial_pD = Vec(2);
  ex.initial_pD << 0.6, 0.8;
  ex.default_level = Vec(1);
  ex.default_level << 0.4;

  const NonholonomicSystem sys_c = ex.sys;
  ex.sample_state = [sys_c](Rng& rng) {
    Vec q(3);
    q << uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -1, 1);
    const Vec pD = uniform(rng, 0.5, 1.5) * unit_sphere_sample(rng, 2);
    return make_state(sys_c, q, pD);
  };
  ex.sample_reduced = [](Rng& rng) {
    CoVector a;
    a.q = Vec(2);
    a.q << uniform(rng, -1, 1), uniform(rng, -1, 1);
    a.p = uniform(rng, 0.5, 1.5) * unit_sphere_sample(rng, 2);
    return a;
  };
  ex.sample_leaf = [](Rng& rng) {
    LeafPoint pt;
    pt.x = Vec(1);
    pt.x << uniform(rng, -1, 1);
    pt.ph = Vec(1);
    pt.ph << uniform(rng, -1.2, 1.2);
    return pt;
  };
  ex.invariant_coords = [](const CoVector& a) {
    Vec out(3);
    out << a.q[1], a.p[0], a.p[1];
    return out;
  };

  MomentumOdeSetup ode;
  ode.sys = std::make_shared<NonholonomicSystem>(ex.sys);
  ode.xi = {[](const Vec& q) {
    Vec c(2);
    c << 1.0, q[1];
    return c;
  }};
  ode.shape = [](const Vec& q) { return q[1]; };
  ode.shape_point = [](double y) {
    Vec q(3);
    q << 0.3, y, -0.2;
    return q;
  };
  ode.lo = -1.5;
  ode.hi = 1.5;
  ode.origin = 0.0;
  ex.momentum_ode = ode;

  OraclePack oc;
  oc.B_total = [](const MState&, const PhaseVec&, const PhaseVec&) { return 0.0; };
  oc.B_tilde = [](const CoVector&, const PhaseVec&, const PhaseVec&) { return 0.0; };
  oc.b_jk = [](const CoVector& a, const PhaseVec& u, const PhaseVec& v) {
    // (y/(1+y^2)) p_x^{coord} dx ^ dy with p_x^{coord} = sqrt(1+y^2) p_S.
    const double y = a.q[1];
    const double px = std::sqrt(1.0 + y * y) * a.p[1];
    return y / (1.0 + y * y) * px * (u.base[0] * v.base[1] - v.base[0] * u.base[1]);
  };
  oc.omega_mu = [](const LeafPoint&, const Vec&, const PhaseVec& u, const PhaseVec& v) {
    return u.base[0] * v.fiber[0] - v.base[0] * u.fiber[0];  // dy ^ dp_y
  };
  oc.J1 = [](const MState& s) {
    // p_x^{coord} / sqrt(1+y^2) in the paper chart equals the S-coefficient.
    return s.pD[1];
  };
  ex.oracle = oc;
  return ex;
}

// ---------------------------------------------------------------------------
// Snakeboard: Q = SE(2) x S^1 x S^1 with coordinates (theta, x, y, psi, phi).
// ---------------------------------------------------------------------------

Example build_snakeboard(const ExampleParams& params) {
  Example ex;
  ex.name = "snakeboard";
  ex.params = params;
  const double m = params.mass, r = params.radius;
  const double J = params.rotor_inertia, J0 = params.wheel_inertia;
  if (m * r * r - J <= 0.0)
    throw ParameterError("snakeboard requires m r^2 > rotor inertia");

  // E(phi) by adaptive quadrature of r F / sin^2 from pi/2, on a Hermite grid.
  auto integrand = [params](double t) {
    const double s = std::sin(t);
    return params.radius * snakeboard_F(t, params) / (s * s);
  };
  auto Egrid = std::make_shared<Quadrature1D>(integrand, 0.08, kPi - 0.08, kPi / 2.0, 5e-4);
  auto Efun = [Egrid](double phi) { return std::exp(Egrid->value(phi)); };

  FrameChart chart;
  chart.ambient_dim = 5;
  chart.dim = 5;
  chart.rank_D = 3;
  chart.rank_S = 2;
  chart.coordinate_names = {"theta", "x", "y", "psi", "phi"};
  chart.domain = [](const Vec& q) { return std::sin(q[4]) > 0.1; };
  chart.frame = [r, Efun](const Vec& q) {
    const double th = q[0], phi = q[4];
    const double cot = std::cos(phi) / std::sin(phi);
    const double E = Efun(phi);
    Mat F = Mat::Zero(5, 5);
    // Hor: d_phi.
    F(4, 0) = 1.0;
    // S1: E(phi) (Y_theta - d_psi).
    F(0, 1) = E;
    F(1, 1) = -E * r * std::cos(th) * cot;
    F(2, 1) = -E * r * std::sin(th) * cot;
    F(3, 1) = -E;
    // S2: d_psi.
    F(3, 2) = 1.0;
    // W: d_x, d_y.
    F(1, 3) = 1.0;
    F(2, 4) = 1.0;
    return F;
  };

  NonholonomicSystem sys;
  sys.chart = chart;
  sys.metric = [m, r, J, J0, Efun](const Vec& q) {
    const double th = q[0], phi = q[4];
    const double cot = std::cos(phi) / std::sin(phi);
    const double s2 = std::sin(phi) * std::sin(phi);
    Mat kcan(5, 5);  // basis {Y_theta, d_psi, d_phi, d_x, d_y}
    kcan << m * r * r / s2, J, 0, -m * r * std::cos(th) * cot, -m * r * std::sin(th) * cot,  //
        J, J, 0, 0, 0,                                                                       //
        0, 0, 2 * J0, 0, 0,                                                                  //
        -m * r * std::cos(th) * cot, 0, 0, m, 0,                                             //
        -m * r * std::sin(th) * cot, 0, 0, 0, m;
    const double E = Efun(phi);
    Mat C = Mat::Zero(5, 5);  // frame columns on the canonical basis
    C(2, 0) = 1.0;
    C(0, 1) = E;
    C(1, 1) = -E;
    C(1, 2) = 1.0;
    C(3, 3) = 1.0;
    C(4, 4) = 1.0;
    return Mat(C.transpose() * kcan * C);
  };
  sys.potential = [](const Vec&) { return 0.0; };

  GroupData act;
  act.dim_g = 4;  // (rot, Px, Py, psi)
  act.generators = [](const Vec& q) {
    Mat s = Mat::Zero(5, 4);
    s(0, 0) = 1.0;
    s(1, 0) = -q[2];
    s(2, 0) = q[1];
    s(1, 1) = 1.0;
    s(2, 2) = 1.0;
    s(3, 3) = 1.0;
    return s;
  };
  act.structure_constants = [] {
    std::vector<Mat> c(4, Mat::Zero(4, 4));
    c[2](0, 1) = 1.0;   // [rot, Px] = Py
    c[2](1, 0) = -1.0;
    c[1](0, 2) = -1.0;  // [rot, Py] = -Px
    c[1](2, 0) = 1.0;
    return c;
  }();
  act.w_indices = {1, 2};
  act.group_sample = [](Rng& rng) {
    const double al = uniform(rng, -kPi, kPi);
    const double a = uniform(rng, -1, 1), b = uniform(rng, -1, 1);
    const double be = uniform(rng, -kPi, kPi);
    GroupMove mv;
    mv.act_q = [al, a, b, be](const Vec& q) {
      Vec out(5);
      out << q[0] + al, q[1] * std::cos(al) - q[2] * std::sin(al) + a,
          q[1] * std::sin(al) + q[2] * std::cos(al) + b, q[3] + be, q[4];
      return out;
    };
    Mat Ad = Mat::Identity(4, 4);
    Ad(1, 1) = std::cos(al);
    Ad(1, 2) = -std::sin(al);
    Ad(2, 1) = std::sin(al);
    Ad(2, 2) = std::cos(al);
    Ad(1, 0) = b;
    Ad(2, 0) = -a;
    mv.Ad = Ad;
    return mv;
  };
  sys.action = act;
  ex.sys = sys;

  ex.sections.sections = {
      [r, Efun](const Vec& q) {
        const double th = q[0], phi = q[4];
        const double cot = std::cos(phi) / std::sin(phi);
        Vec c(4);
        c << 1.0, q[2] - r * std::cos(th) * cot, -q[1] - r * std::sin(th) * cot, -1.0;
        return Vec(Efun(phi) * c);
      },
      [](const Vec&) {
        Vec c(4);
        c << 0, 0, 0, 1;
        return c;
      }};

  ReducedChart red;
  FrameChart ct;
  ct.ambient_dim = 3;
  ct.dim = 3;
  ct.rank_D = 3;
  ct.rank_S = 2;
  ct.coordinate_names = {"theta", "psi", "phi"};
  ct.domain = [](const Vec& x) { return std::sin(x[2]) > 0.1; };
  ct.frame = [Efun](const Vec& x) {
    const double E = Efun(x[2]);
    Mat F = Mat::Zero(3, 3);
    F(2, 0) = 1.0;   // d_phi
    F(0, 1) = E;     // E (d_theta - d_psi)
    F(1, 1) = -E;
    F(1, 2) = 1.0;   // d_psi
    return F;
  };
  red.chart_tilde = ct;
  red.project_q = [](const Vec& q) {
    Vec x(3);
    x << q[0], q[3], q[4];
    return x;
  };
  red.lift_q = [](const Vec& x, const Vec& fiber) {
    Vec q(5);
    q << x[0], fiber.size() > 0 ? fiber[0] : 0.0, fiber.size() > 1 ? fiber[1] : 0.0, x[1], x[2];
    return q;
  };
  red.default_fiber = Vec::Zero(2);
  red.eta = {[Efun](const Vec& x) {
               Vec c(2);
               c << Efun(x[2]), -Efun(x[2]);
               return c;
             },
             [](const Vec&) {
               Vec c(2);
               c << 0.0, 1.0;
               return c;
             }};
  red.f_move = [](const CoVector& a, Rng& rng) {
    CoVector out = a;
    out.q[0] += uniform(rng, -kPi, kPi);
    out.q[1] += uniform(rng, -kPi, kPi);
    return out;
  };
  red.gw_move_q = [](const Vec& q, Rng& rng) {
    Vec out = q;
    out[1] += uniform(rng, -1, 1);
    out[2] += uniform(rng, -1, 1);
    return out;
  };
  ex.red = red;

  LeafChart leaf;
  leaf.qbar.ambient_dim = 1;
  leaf.qbar.dim = 1;
  leaf.qbar.rank_D = 1;
  leaf.qbar.rank_S = 0;
  leaf.qbar.coordinate_names = {"phi"};
  leaf.qbar.domain = [](const Vec& x) { return std::sin(x[0]) > 0.1; };
  leaf.qbar.frame = [](const Vec&) { return Mat(Mat::Identity(1, 1)); };
  leaf.project_qbar = [](const Vec& x) { return Vec(x.tail(1)); };
  leaf.section_base = [](const Vec& phi) {
    Vec x(3);
    x << 0.4, -0.3, phi[0];
    return x;
  };
  ex.leaf = leaf;

  ex.ambient.mass = [m, r, J, J0](const Vec&) {
    Mat M = Mat::Zero(5, 5);
    M(0, 0) = m * r * r;
    M(0, 3) = M(3, 0) = J;
    M(1, 1) = M(2, 2) = m;
    M(3, 3) = J;
    M(4, 4) = 2 * J0;
    return M;
  };
  ex.ambient.potential = [](const Vec&) { return 0.0; };
  ex.ambient.n_holonomic = 0;

  ex.initial_q = Vec(5);
  ex.initial_q << 0.2, 0.0, 0.0, 0.1, kPi / 2.0 - 0.4;
  ex.initial_pD = Vec(3);
  ex.initial_pD << 0.3, 0.5, -0.2;
  ex.default_level = Vec(2);
  ex.default_level << 0.3, -0.2;

  const NonholonomicSystem sys_c = ex.sys;
  ex.sample_state = [sys_c](Rng& rng) {
    Vec q(5);
    q << uniform(rng, -kPi, kPi), uniform(rng, -1, 1), uniform(rng, -1, 1),
        uniform(rng, -kPi, kPi), uniform(rng, 0.5, kPi - 0.5);
    const Vec pD = uniform(rng, 0.5, 1.5) * unit_sphere_sample(rng, 3);
    return make_state(sys_c, q, pD);
  };
  ex.sample_reduced = [](Rng& rng) {
    CoVector a;
    a.q = Vec(3);
    a.q << uniform(rng, -kPi, kPi), uniform(rng, -kPi, kPi), uniform(rng, 0.5, kPi - 0.5);
    a.p = uniform(rng, 0.5, 1.5) * unit_sphere_sample(rng, 3);
    return a;
  };
  ex.sample_leaf = [](Rng& rng) {
    LeafPoint pt;
    pt.x = Vec(1);
    pt.x << uniform(rng, 0.5, kPi - 0.5);
    pt.ph = Vec(1);
    pt.ph << uniform(rng, -1.2, 1.2);
    return pt;
  };
  ex.invariant_coords = [](const CoVector& a) {
    Vec out(4);
    out << a.q[2], a.p[0], a.p[1], a.p[2];
    return out;
  };

  MomentumOdeSetup ode;
  ode.sys = std::make_shared<NonholonomicSystem>(ex.sys);
  ode.xi = {[r](const Vec& q) {
              const double th = q[0], phi = q[4];
              const double cot = std::cos(phi) / std::sin(phi);
              Vec c(4);
              c << 1.0, q[2] - r * std::cos(th) * cot, -q[1] - r * std::sin(th) * cot, -1.0;
              return c;
            },
            [](const Vec&) {
              Vec c(4);
              c << 0, 0, 0, 1;
              return c;
            }};
  ode.shape = [](const Vec& q) { return q[4]; };
  ode.shape_point = [](double phi) {
    Vec q(5);
    q << 0.4, 0.1, -0.2, 0.7, phi;
    return q;
  };
  ode.lo = 0.5;
  ode.hi = kPi - 0.5;
  ode.origin = kPi / 2.0;
  ex.momentum_ode = ode;

  OraclePack oc;
  oc.B_total = [](const MState&, const PhaseVec&, const PhaseVec&) { return 0.0; };
  oc.B_tilde = [](const CoVector&, const PhaseVec&, const PhaseVec&) { return 0.0; };
  oc.b_jk = [r, params, Efun](const CoVector& a, const PhaseVec& u, const PhaseVec& v) {
    // -r F/sin^2 (p_theta - p_psi) dtheta ^ dphi, with p_theta - p_psi = p~_1 / E.
    const double phi = a.q[2];
    const double s = std::sin(phi);
    const double dd = u.base[0] * v.base[2] - v.base[0] * u.base[2];
    return -r * snakeboard_F(phi, params) / (s * s) * (a.p[1] / Efun(phi)) * dd;
  };
  oc.omega_mu = [](const LeafPoint&, const Vec&, const PhaseVec& u, const PhaseVec& v) {
    return u.base[0] * v.fiber[0] - v.base[0] * u.fiber[0];  // dphi ^ dp_phi
  };
  oc.J1 = [](const MState& s) { return s.pD[1]; };
  ex.oracle = oc;
  return ex;
}

// ---------------------------------------------------------------------------
// Chaplygin ball: Q = SO(3) x R^2 (9 + 2 ambient coordinates).
// ---------------------------------------------------------------------------

// Left-invariant field g e^_i as a 9-vector, for g given as a 9-vector.
Vec left_field(const Vec& g9, const Eigen::Vector3d& w) {
  const Eigen::Matrix3d g = mat3(g9);
  return flat9(g * hat(w));
}

Example build_ball(const ExampleParams& params) {
  Example ex;
  ex.name = "chaplygin_ball";
  ex.params = params;
  const double m = params.mass, r = params.radius;
  const Eigen::Vector3d I = params.inertia;
  if (I.minCoeff() <= 0.0) throw ParameterError("ball inertia must be positive");

  auto gamma_of = [](const Vec& q) { return Eigen::Vector3d(q[6], q[7], q[8]); };

  FrameChart chart;
  chart.ambient_dim = 11;
  chart.dim = 5;
  chart.rank_D = 3;
  chart.rank_S = 1;
  chart.rotation_blocks = {0};
  chart.coordinate_names = {"g", "x", "y"};
  chart.domain = [](const Vec& q) {
    return std::abs(q[8]) > 0.15 && orthogonality_residual(q) < 1e-6;
  };
  chart.frame = [m, r, gamma_of](const Vec& q) {
    const Eigen::Matrix3d g = mat3(q);
    const Eigen::Vector3d al = g.row(0), be = g.row(1), ga = g.row(2);
    Mat E = Mat::Zero(11, 5);
    // Rolling frame X_i = X_i^L + r beta_i d_x - r alpha_i d_y.
    auto X = [&](const Eigen::Vector3d& w) {
      Vec col = Vec::Zero(11);
      col.head(9) = flat9(g * hat(w));
      col[9] = r * be.dot(w);
      col[10] = -r * al.dot(w);
      return col;
    };
    const Eigen::Vector3d e1(1, 0, 0), e2(0, 1, 0);
    E.col(0) = X(e1 - ga[0] * ga);
    E.col(1) = X(e2 - ga[1] * ga);
    E.col(2) = X(ga);
    E(9, 3) = 1.0;
    E(10, 4) = 1.0;
    return E;
  };

  NonholonomicSystem sys;
  sys.chart = chart;
  sys.metric = [m, r, I, gamma_of](const Vec& q) {
    const Eigen::Vector3d ga = gamma_of(q);
    const Eigen::Matrix3d g = mat3(q);
    const Eigen::Vector3d al = g.row(0), be = g.row(1);
    Eigen::Matrix3d kxx = I.asDiagonal();
    kxx += m * r * r * (Eigen::Matrix3d::Identity() - ga * ga.transpose());
    Eigen::Matrix<double, 3, 2> kxw;
    kxw.col(0) = m * r * be;
    kxw.col(1) = -m * r * al;
    Mat kcan(5, 5);
    kcan.topLeftCorner(3, 3) = kxx;
    kcan.topRightCorner(3, 2) = kxw;
    kcan.bottomLeftCorner(2, 3) = kxw.transpose();
    kcan.bottomRightCorner(2, 2) = m * Eigen::Matrix2d::Identity();
    Mat C = Mat::Zero(5, 5);
    C.block<3, 1>(0, 0) = Eigen::Vector3d(1, 0, 0) - ga[0] * ga;
    C.block<3, 1>(0, 1) = Eigen::Vector3d(0, 1, 0) - ga[1] * ga;
    C.block<3, 1>(0, 2) = ga;
    C(3, 3) = 1.0;
    C(4, 4) = 1.0;
    return Mat(C.transpose() * kcan * C);
  };
  sys.potential = [](const Vec&) { return 0.0; };

  GroupData act;
  act.dim_g = 3;  // (rot, Px, Py)
  act.generators = [](const Vec& q) {
    Mat s = Mat::Zero(11, 3);
    const Eigen::Matrix3d g = mat3(q);
    s.col(0).head(9) = flat9(hat(Eigen::Vector3d(0, 0, 1)) * g);
    s(9, 0) = -q[10];
    s(10, 0) = q[9];
    s(9, 1) = 1.0;
    s(10, 2) = 1.0;
    return s;
  };
  act.structure_constants = [] {
    std::vector<Mat> c(3, Mat::Zero(3, 3));
    c[2](0, 1) = 1.0;
    c[2](1, 0) = -1.0;
    c[1](0, 2) = -1.0;
    c[1](2, 0) = 1.0;
    return c;
  }();
  act.w_indices = {1, 2};
  act.group_sample = [](Rng& rng) {
    const double al = uniform(rng, -kPi, kPi);
    const double a = uniform(rng, -1, 1), b = uniform(rng, -1, 1);
    GroupMove mv;
    mv.act_q = [al, a, b](const Vec& q) {
      Vec out = q;
      put_mat3(out, rot_z(al) * mat3(q));
      out[9] = q[9] * std::cos(al) - q[10] * std::sin(al) + a;
      out[10] = q[9] * std::sin(al) + q[10] * std::cos(al) + b;
      return out;
    };
    Mat Ad = Mat::Identity(3, 3);
    Ad(1, 1) = std::cos(al);
    Ad(1, 2) = -std::sin(al);
    Ad(2, 1) = std::sin(al);
    Ad(2, 2) = std::cos(al);
    Ad(1, 0) = b;
    Ad(2, 0) = -a;
    mv.Ad = Ad;
    return mv;
  };
  sys.action = act;
  ex.sys = sys;

  ex.sections.sections = {[](const Vec& q) {
    Vec c(3);
    c << 1.0, q[10], -q[9];
    return c;
  }};

  ReducedChart red;
  FrameChart ct;
  ct.ambient_dim = 9;
  ct.dim = 3;
  ct.rank_D = 3;
  ct.rank_S = 1;
  ct.rotation_blocks = {0};
  ct.coordinate_names = {"g"};
  ct.domain = [](const Vec& x) {
    return std::abs(x[8]) > 0.15 && orthogonality_residual(x) < 1e-6;
  };
  ct.frame = [](const Vec& x) {
    const Eigen::Matrix3d g = mat3(x);
    const Eigen::Vector3d ga = g.row(2);
    Mat E(9, 3);
    const Eigen::Vector3d e1(1, 0, 0), e2(0, 1, 0);
    E.col(0) = flat9(g * hat(e1 - ga[0] * ga));
    E.col(1) = flat9(g * hat(e2 - ga[1] * ga));
    E.col(2) = flat9(g * hat(ga));
    return E;
  };
  red.chart_tilde = ct;
  red.project_q = [](const Vec& q) { return Vec(q.head(9)); };
  red.lift_q = [](const Vec& x, const Vec& fiber) {
    Vec q(11);
    q.head(9) = x;
    q[9] = fiber.size() > 0 ? fiber[0] : 0.0;
    q[10] = fiber.size() > 1 ? fiber[1] : 0.0;
    return q;
  };
  red.default_fiber = Vec::Zero(2);
  red.eta = {[](const Vec&) {
    Vec c(1);
    c << 1.0;
    return c;
  }};
  red.f_move = [](const CoVector& a, Rng& rng) {
    CoVector out = a;
    Vec q = a.q;
    put_mat3(q, rot_z(uniform(rng, -kPi, kPi)) * mat3(a.q));
    out.q = q;
    return out;
  };
  red.gw_move_q = [](const Vec& q, Rng& rng) {
    Vec out = q;
    out[9] += uniform(rng, -1, 1);
    out[10] += uniform(rng, -1, 1);
    return out;
  };
  ex.red = red;

  LeafChart leaf;
  leaf.qbar.ambient_dim = 3;
  leaf.qbar.dim = 2;
  leaf.qbar.rank_D = 2;
  leaf.qbar.rank_S = 0;
  leaf.qbar.unit_blocks = {0};
  leaf.qbar.coordinate_names = {"gamma"};
  leaf.qbar.domain = [](const Vec& ga) {
    return std::abs(ga[2]) > 0.15 && std::abs(ga[2]) < 0.95 &&
           std::abs(ga.norm() - 1.0) < 1e-6;
  };
  leaf.qbar.frame = [](const Vec& ga) {
    Mat E(3, 2);
    const Eigen::Vector3d g(ga[0], ga[1], ga[2]);
    E.col(0) = g.cross(Eigen::Vector3d(1, 0, 0));
    E.col(1) = g.cross(Eigen::Vector3d(0, 1, 0));
    return E;
  };
  leaf.project_qbar = [](const Vec& x) { return Vec(x.tail(3)); };
  leaf.section_base = [](const Vec& ga) {
    return flat9(so3_with_third_row(Eigen::Vector3d(ga[0], ga[1], ga[2])));
  };
  ex.leaf = leaf;

  // Ambient multiplier-oracle data: kinetic form of Omega(gdot) plus the
  // plane part, with orthogonality as holonomic constraints.
  ex.ambient.mass = [m, I](const Vec& q) {
    const Eigen::Matrix3d g = mat3(q);
    Mat L(3, 9);  // Omega = L gdot (vee of the antisymmetric part of g^T gdot)
    for (int c = 0; c < 9; ++c) {
      Eigen::Matrix3d dg = Eigen::Matrix3d::Zero();
      dg(c / 3, c % 3) = 1.0;
      const Eigen::Matrix3d A = 0.5 * (g.transpose() * dg - dg.transpose() * g);
      L.col(c) = vee(A);
    }
    Mat M = Mat::Zero(11, 11);
    M.topLeftCorner(9, 9) = L.transpose() * I.asDiagonal() * L;
    M(9, 9) = m;
    M(10, 10) = m;
    return M;
  };
  ex.ambient.potential = [](const Vec&) { return 0.0; };
  ex.ambient.holonomic = [](const Vec& q) {
    const Eigen::Matrix3d g = mat3(q);
    const Eigen::Matrix3d R = g.transpose() * g - Eigen::Matrix3d::Identity();
    Vec phi(6);
    phi << R(0, 0), R(1, 1), R(2, 2), R(0, 1), R(0, 2), R(1, 2);
    return phi;
  };
  ex.ambient.n_holonomic = 6;

  ex.initial_q = Vec(11);
  ex.initial_q.head(9) = leaf.section_base((Vec(3) << 0.42, 0.25, 0.87).finished().normalized());
  ex.initial_q[9] = 0.0;
  ex.initial_q[10] = 0.0;
  ex.initial_pD = Vec(3);
  ex.initial_pD << 0.25, -0.2, 1.1;
  ex.default_level = Vec(1);
  ex.default_level << 0.7;

  const NonholonomicSystem sys_c = ex.sys;
  auto sample_base = [](Rng& rng) {
    for (;;) {
      const Eigen::Matrix3d g = random_so3(rng);
      if (std::abs(g(2, 2)) > 0.25 && std::abs(g(2, 2)) < 0.9) return g;
    }
  };
  ex.sample_state = [sys_c, sample_base](Rng& rng) {
    Vec q(11);
    put_mat3(q, sample_base(rng));
    q[9] = uniform(rng, -1, 1);
    q[10] = uniform(rng, -1, 1);
    const Vec pD = uniform(rng, 0.5, 1.5) * unit_sphere_sample(rng, 3);
    return make_state(sys_c, q, pD);
  };
  ex.sample_reduced = [sample_base](Rng& rng) {
    CoVector a;
    a.q = flat9(sample_base(rng));
    a.p = uniform(rng, 0.5, 1.5) * unit_sphere_sample(rng, 3);
    return a;
  };
  ex.sample_leaf = [](Rng& rng) {
    LeafPoint pt;
    const double g3 = (rng() % 2 ? 1.0 : -1.0) * uniform(rng, 0.35, 0.8);
    const double th = uniform(rng, -kPi, kPi);
    const double rho = std::sqrt(1.0 - g3 * g3);
    pt.x = Vec(3);
    pt.x << rho * std::cos(th), rho * std::sin(th), g3;
    pt.ph = unit_sphere_sample(rng, 2) * uniform(rng, 0.4, 1.2);
    return pt;
  };
  ex.invariant_coords = [](const CoVector& a) {
    Vec out(6);
    out << a.q[6], a.q[7], a.q[8], a.p[0], a.p[1], a.p[2];
    return out;
  };

  // Closed forms.  Body components of a rotational tangent: a = vee(g^T dg).
  auto body = [](const Vec& x9, const Vec& d9) {
    const Eigen::Matrix3d g = mat3(x9);
    Eigen::Matrix3d dg;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) dg(i, j) = d9[3 * i + j];
    return vee(Eigen::Matrix3d(0.5 * (g.transpose() * dg - dg.transpose() * g)));
  };
  // Omega from the reduced momenta (paper coordinates M on the lambda-duals).
  auto omega_body = [m, r, I](const Vec& x9, const Vec& p) {
    const Eigen::Vector3d ga = mat3(x9).row(2);
    Eigen::Vector3d M;
    M[0] = p[0] + ga[0] * p[2];
    M[1] = p[1] + ga[1] * p[2];
    M[2] = -(ga[0] * p[0] + ga[1] * p[1]) / ga[2] + ga[2] * p[2];
    Eigen::Matrix3d K = I.asDiagonal();
    K += m * r * r * (Eigen::Matrix3d::Identity() - ga * ga.transpose());
    return Eigen::Vector3d(K.ldlt().solve(M));
  };

  OraclePack oc;
  oc.B_total = [m, r, body, sys_c](const MState& s, const PhaseVec& u, const PhaseVec& v) {
    // m r^2 <Omega, d lambda>(u, v) = -m r^2 <Omega, a x b>.
    const Vec vel = velocity_of(sys_c, s);
    const Mat E = sys_c.chart.frame(s.q);
    const Vec qd = E.leftCols(3) * vel;
    const Eigen::Vector3d Om = body(Vec(s.q.head(9)), Vec(qd.head(9)));
    const Eigen::Vector3d a = body(Vec(s.q.head(9)), Vec(u.base.head(9)));
    const Eigen::Vector3d b = body(Vec(s.q.head(9)), Vec(v.base.head(9)));
    return -m * r * r * Om.dot(a.cross(b));
  };
  oc.B_tilde = [m, r, body, omega_body](const CoVector& al, const PhaseVec& u,
                                        const PhaseVec& v) {
    const Eigen::Vector3d Om = omega_body(al.q, al.p);
    const Eigen::Vector3d a = body(al.q, u.base), b = body(al.q, v.base);
    return -m * r * r * Om.dot(a.cross(b));
  };
  oc.b_jk = [m, r, body, omega_body](const CoVector& al, const PhaseVec& u, const PhaseVec& v) {
    const Eigen::Vector3d ga = mat3(al.q).row(2);
    const Eigen::Vector3d Om = omega_body(al.q, al.p);
    const Eigen::Vector3d a = body(al.q, u.base), b = body(al.q, v.base);
    return m * r * r * (Om - ga.dot(Om) * ga).dot(a.cross(b));
  };
  oc.omega_mu = [m, r, I](const LeafPoint& pt, const Vec& c, const PhaseVec& u,
                          const PhaseVec& v) {
    const Eigen::Vector3d ga(pt.x[0], pt.x[1], pt.x[2]);
    const Eigen::Vector3d du(u.base[0], u.base[1], u.base[2]);
    const Eigen::Vector3d dv(v.base[0], v.base[1], v.base[2]);
    // Canonical T*S^2 form in the gamma x e_i frame.
    const Eigen::Vector3d t1 = ga.cross(Eigen::Vector3d(1, 0, 0));
    const Eigen::Vector3d t2 = ga.cross(Eigen::Vector3d(0, 1, 0));
    Eigen::Matrix2d G;
    G << t1.dot(t1), t1.dot(t2), t2.dot(t1), t2.dot(t2);
    Eigen::Vector2d cu = G.ldlt().solve(Eigen::Vector2d(t1.dot(du), t2.dot(du)));
    Eigen::Vector2d cv = G.ldlt().solve(Eigen::Vector2d(t1.dot(dv), t2.dot(dv)));
    // [t1, t2] = gamma x e3 with coefficients (-g1/g3, -g2/g3) on (t1, t2).
    const double wedge = cu[0] * cv[1] - cu[1] * cv[0];
    const double pair_bracket =
        pt.ph[0] * (-ga[0] / ga[2]) * wedge + pt.ph[1] * (-ga[1] / ga[2]) * wedge;
    double canonical = v.fiber.dot(cu) - u.fiber.dot(cv) + pair_bracket;
    // Momentum level plus the dynamical-gauge magnetic correction.
    Eigen::Vector3d M;
    M[0] = pt.ph[0] + ga[0] * c[0];
    M[1] = pt.ph[1] + ga[1] * c[0];
    M[2] = -(ga[0] * pt.ph[0] + ga[1] * pt.ph[1]) / ga[2] + ga[2] * c[0];
    Eigen::Matrix3d K = I.asDiagonal();
    K += m * r * r * (Eigen::Matrix3d::Identity() - ga * ga.transpose());
    const Eigen::Vector3d Om = K.ldlt().solve(M);
    const double phi_s2 = ga.dot(du.cross(dv));
    return canonical + (c[0] - m * r * r * ga.dot(Om)) * phi_s2;
  };
  oc.J1 = [](const MState& s) { return s.pD[2]; };  // <gamma, M>
  ex.oracle = oc;
  ex.conservation_tol = 1e-8;
  return ex;
}

// ---------------------------------------------------------------------------
// Solid of revolution rolling on a plane (reference spheroid profile).
// ---------------------------------------------------------------------------

struct SolidGeometry {
  double a, c;
  double N(double g3) const { return std::sqrt(a * a * (1 - g3 * g3) + c * c * g3 * g3); }
  double rho(double g3) const { return -a * a / N(g3); }
  double zeta(double g3) const { return -c * c * g3 / N(g3); }
  double L(double g3) const { return (c * c - a * a) * g3 / N(g3); }
  double h(double g3) const {  // <gamma, s>
    return rho(g3) * (1 - g3 * g3) + zeta(g3) * g3;
  }
  Eigen::Vector3d s(const Eigen::Vector3d& ga) const {
    return {rho(ga[2]) * ga[0], rho(ga[2]) * ga[1], zeta(ga[2])};
  }
};

Example build_solid(const ExampleParams& params) {
  Example ex;
  ex.name = "solid_of_revolution";
  ex.params = params;
  const double m = params.mass, grav = params.gravity;
  const SolidGeometry geo{params.semi_axis_a, params.semi_axis_c};
  if (geo.a <= 0 || geo.c <= 0) throw ParameterError("spheroid semi-axes must be positive");
  const Eigen::Vector3d I(m * (geo.a * geo.a + geo.c * geo.c) / 5.0,
                          m * (geo.a * geo.a + geo.c * geo.c) / 5.0,
                          m * 2.0 * geo.a * geo.a / 5.0);

  // Rolling frame X_i = X_i^L + (alpha x s)_i d_x + (beta x s)_i d_y on the
  // (g, x, y) chart (z is eliminated through the holonomic contact relation).
  auto X_col = [geo](const Vec& q, const Eigen::Vector3d& w) {
    const Eigen::Matrix3d g = mat3(q);
    const Eigen::Vector3d al = g.row(0), be = g.row(1), ga = g.row(2);
    const Eigen::Vector3d s = geo.s(ga);
    Vec col = Vec::Zero(11);
    col.head(9) = flat9(g * hat(w));
    col[9] = al.cross(s).dot(w);
    col[10] = be.cross(s).dot(w);
    return col;
  };

  FrameChart chart;
  chart.ambient_dim = 11;
  chart.dim = 5;
  chart.rank_D = 3;
  chart.rank_S = 2;
  chart.rotation_blocks = {0};
  chart.coordinate_names = {"g", "x", "y"};
  chart.domain = [](const Vec& q) {
    return std::abs(q[8]) < 0.92 && orthogonality_residual(q) < 1e-6;
  };

  // Stage 1: plain section basis xi_1, xi_2 with generators -X_3 and <gamma, X>.
  FrameChart chart1 = chart;
  chart1.frame = [X_col](const Vec& q) {
    const Eigen::Vector3d ga = mat3(q).row(2);
    Mat E = Mat::Zero(11, 5);
    const Eigen::Vector3d e1(1, 0, 0), e2(0, 1, 0), e3(0, 0, 1);
    E.col(0) = X_col(q, ga[0] * e2 - ga[1] * e1);  // X_0 = g1 X_2 - g2 X_1
    E.col(1) = -X_col(q, e3);                      // (xi_1)_Q
    E.col(2) = X_col(q, ga);                       // (xi_2)_Q
    E(9, 3) = 1.0;
    E(10, 4) = 1.0;
    return E;
  };

  auto metric_for = [m, I, geo](std::function<Mat(const Vec&)> coeffs) {
    return [m, I, geo, coeffs](const Vec& q) {
      const Eigen::Matrix3d g = mat3(q);
      const Eigen::Vector3d al = g.row(0), be = g.row(1), ga = g.row(2);
      const Eigen::Vector3d s = geo.s(ga);
      Mat kcan(5, 5);
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
          const Eigen::Vector3d si = s.cross(Eigen::Vector3d::Unit(i));
          const Eigen::Vector3d sj = s.cross(Eigen::Vector3d::Unit(j));
          kcan(i, j) = (i == j ? I[i] : 0.0) + m * si.dot(sj);
        }
      for (int i = 0; i < 3; ++i) {
        kcan(i, 3) = kcan(3, i) = m * al.cross(s)[i];
        kcan(i, 4) = kcan(4, i) = m * be.cross(s)[i];
      }
      kcan(3, 3) = kcan(4, 4) = m;
      kcan(3, 4) = kcan(4, 3) = 0.0;
      const Mat C = coeffs(q);
      return Mat(C.transpose() * kcan * C);
    };
  };

  // Frame-column coefficients on the canonical rolling basis {X_1,X_2,X_3,dx,dy}.
  auto coeffs1 = [](const Vec& q) {
    const Eigen::Vector3d ga = mat3(q).row(2);
    Mat C = Mat::Zero(5, 5);
    C(1, 0) = ga[0];
    C(0, 0) = -ga[1];
    C(2, 1) = -1.0;
    C.block<3, 1>(0, 2) = ga;
    C(3, 3) = 1.0;
    C(4, 4) = 1.0;
    return C;
  };

  auto potential = [m, grav, geo](const Vec& q) { return -m * grav * geo.h(q[8]); };

  GroupData act;
  act.dim_g = 4;  // (s1, rot, Px, Py)
  act.generators = [](const Vec& q) {
    Mat s = Mat::Zero(11, 4);
    const Eigen::Matrix3d g = mat3(q);
    s.col(0).head(9) = -flat9(g * hat(Eigen::Vector3d(0, 0, 1)));
    s(9, 0) = -q[10];
    s(10, 0) = q[9];
    s.col(1).head(9) = flat9(hat(Eigen::Vector3d(0, 0, 1)) * g);
    s(9, 1) = -q[10];
    s(10, 1) = q[9];
    s(9, 2) = 1.0;
    s(10, 3) = 1.0;
    return s;
  };
  act.structure_constants = [] {
    std::vector<Mat> c(4, Mat::Zero(4, 4));
    for (int rot : {0, 1}) {
      c[3](rot, 2) = 1.0;   // [rot, Px] = Py
      c[3](2, rot) = -1.0;
      c[2](rot, 3) = -1.0;  // [rot, Py] = -Px
      c[2](3, rot) = 1.0;
    }
    return c;
  }();
  act.w_indices = {2, 3};
  act.group_sample = [](Rng& rng) {
    const double t1 = uniform(rng, -kPi, kPi), t2 = uniform(rng, -kPi, kPi);
    const double a = uniform(rng, -1, 1), b = uniform(rng, -1, 1);
    GroupMove mv;
    mv.act_q = [t1, t2, a, b](const Vec& q) {
      Vec out = q;
      put_mat3(out, rot_z(t2) * mat3(q) * rot_z(t1).transpose());
      const double cs = std::cos(t1 + t2), sn = std::sin(t1 + t2);
      out[9] = q[9] * cs - q[10] * sn + a;
      out[10] = q[9] * sn + q[10] * cs + b;
      return out;
    };
    Mat Ad = Mat::Identity(4, 4);
    const double cs = std::cos(t1 + t2), sn = std::sin(t1 + t2);
    Ad(2, 2) = cs;
    Ad(2, 3) = -sn;
    Ad(3, 2) = sn;
    Ad(3, 3) = cs;
    Ad(2, 0) = Ad(2, 1) = b;
    Ad(3, 0) = Ad(3, 1) = -a;
    mv.Ad = Ad;
    return mv;
  };

  auto xi1 = [geo](const Vec& q) {
    const Eigen::Matrix3d g = mat3(q);
    const double b3 = g(1, 2), a3 = g(0, 2);
    const double rho = geo.rho(q[8]);
    Vec c(4);
    c << 1.0, 0.0, q[10] + rho * b3, -q[9] - rho * a3;
    return c;
  };
  auto xi2 = [geo](const Vec& q) {
    const Eigen::Matrix3d g = mat3(q);
    const double b3 = g(1, 2), a3 = g(0, 2);
    const double L = geo.L(q[8]);
    Vec c(4);
    c << 0.0, 1.0, q[10] - L * b3, -q[9] + L * a3;
    return c;
  };

  auto stage1 = std::make_shared<NonholonomicSystem>();
  stage1->chart = chart1;
  stage1->metric = metric_for(coeffs1);
  stage1->potential = potential;
  stage1->action = act;

  // Reconstruct the gauge-momentum coefficient functions f_i^j(gamma_3) from
  // the shape ODE f' = A f on probe states, then rebuild the adapted frame.
  MomentumOdeSetup ode;
  ode.sys = stage1;
  ode.xi = {xi1, xi2};
  ode.shape = [](const Vec& q) { return q[8]; };
  ode.shape_point = [](double g3) {
    Vec q(11);
    q.head(9) = flat9(so3_with_third_row(Eigen::Vector3d(std::sqrt(1 - g3 * g3), 0.0, g3)));
    q[9] = 0.1;
    q[10] = -0.2;
    return q;
  };
  ode.lo = -0.94;
  ode.hi = 0.94;
  ode.origin = 0.0;
  ex.momentum_ode = ode;

  auto A_fn = momentum_ode_matrix(
      MomentumOdeProblem{stage1.get(), ode.xi, ode.shape, ode.shape_point, 1.0, 20240811},
      1e-6);
  auto F = std::make_shared<MatrixOdeSolution>(
      solve_momentum_ode(A_fn, ode.lo, ode.hi, ode.origin, Mat::Identity(2, 2), 1e-3));

  auto coeffsF = [F](const Vec& q) {
    const Eigen::Vector3d ga = mat3(q).row(2);
    const Mat f = F->value(q[8]);
    Mat C = Mat::Zero(5, 5);
    C(1, 0) = ga[0];
    C(0, 0) = -ga[1];
    // zeta_i = F_{1i} xi_1 + F_{2i} xi_2, generators -X_3 and <gamma, X>.
    for (int i = 0; i < 2; ++i) {
      C(2, 1 + i) += -f(0, i);
      C.block<3, 1>(0, 1 + i) += f(1, i) * ga;
    }
    C(3, 3) = 1.0;
    C(4, 4) = 1.0;
    return C;
  };

  chart.frame = [X_col, F](const Vec& q) {
    const Eigen::Vector3d ga = mat3(q).row(2);
    const Mat f = F->value(q[8]);
    Mat E = Mat::Zero(11, 5);
    const Eigen::Vector3d e1(1, 0, 0), e2(0, 1, 0), e3(0, 0, 1);
    E.col(0) = X_col(q, ga[0] * e2 - ga[1] * e1);
    E.col(1) = X_col(q, -f(0, 0) * e3 + f(1, 0) * ga);
    E.col(2) = X_col(q, -f(0, 1) * e3 + f(1, 1) * ga);
    E(9, 3) = 1.0;
    E(10, 4) = 1.0;
    return E;
  };

  NonholonomicSystem sys;
  sys.chart = chart;
  sys.metric = metric_for(coeffsF);
  sys.potential = potential;
  sys.action = act;
  ex.sys = sys;

  ex.sections.sections = {
      [F, xi1, xi2](const Vec& q) {
        const Mat f = F->value(q[8]);
        return Vec(f(0, 0) * xi1(q) + f(1, 0) * xi2(q));
      },
      [F, xi1, xi2](const Vec& q) {
        const Mat f = F->value(q[8]);
        return Vec(f(0, 1) * xi1(q) + f(1, 1) * xi2(q));
      }};

  ReducedChart red;
  FrameChart ct;
  ct.ambient_dim = 9;
  ct.dim = 3;
  ct.rank_D = 3;
  ct.rank_S = 2;
  ct.rotation_blocks = {0};
  ct.coordinate_names = {"g"};
  ct.domain = [](const Vec& x) {
    return std::abs(x[8]) < 0.92 && orthogonality_residual(x) < 1e-6;
  };
  ct.frame = [F](const Vec& x) {
    const Eigen::Matrix3d g = mat3(x);
    const Eigen::Vector3d ga = g.row(2);
    const Mat f = F->value(x[8]);
    Mat E(9, 3);
    const Eigen::Vector3d e1(1, 0, 0), e2(0, 1, 0), e3(0, 0, 1);
    E.col(0) = flat9(g * hat(ga[0] * e2 - ga[1] * e1));
    E.col(1) = flat9(g * hat(-f(0, 0) * e3 + f(1, 0) * ga));
    E.col(2) = flat9(g * hat(-f(0, 1) * e3 + f(1, 1) * ga));
    return E;
  };
  red.chart_tilde = ct;
  red.project_q = [](const Vec& q) { return Vec(q.head(9)); };
  red.lift_q = [](const Vec& x, const Vec& fiber) {
    Vec q(11);
    q.head(9) = x;
    q[9] = fiber.size() > 0 ? fiber[0] : 0.0;
    q[10] = fiber.size() > 1 ? fiber[1] : 0.0;
    return q;
  };
  red.default_fiber = Vec::Zero(2);
  red.eta = {[F](const Vec& x) {
               const Mat f = F->value(x[8]);
               return Vec(f.col(0));
             },
             [F](const Vec& x) {
               const Mat f = F->value(x[8]);
               return Vec(f.col(1));
             }};
  red.f_move = [](const CoVector& a, Rng& rng) {
    CoVector out = a;
    Vec q = a.q;
    put_mat3(q, rot_z(uniform(rng, -kPi, kPi)) * mat3(a.q) *
                    rot_z(uniform(rng, -kPi, kPi)).transpose());
    out.q = q;
    return out;
  };
  red.gw_move_q = [](const Vec& q, Rng& rng) {
    Vec out = q;
    out[9] += uniform(rng, -1, 1);
    out[10] += uniform(rng, -1, 1);
    return out;
  };
  ex.red = red;

  LeafChart leaf;
  leaf.qbar.ambient_dim = 1;
  leaf.qbar.dim = 1;
  leaf.qbar.rank_D = 1;
  leaf.qbar.rank_S = 0;
  leaf.qbar.coordinate_names = {"gamma3"};
  leaf.qbar.domain = [](const Vec& x) { return std::abs(x[0]) < 0.92; };
  leaf.qbar.frame = [](const Vec& x) {
    Mat E(1, 1);
    E(0, 0) = 1.0 - x[0] * x[0];  // projection of X_0
    return E;
  };
  leaf.project_qbar = [](const Vec& x) { return Vec(x.tail(1)); };
  leaf.section_base = [](const Vec& g3) {
    return flat9(
        so3_with_third_row(Eigen::Vector3d(std::sqrt(1.0 - g3[0] * g3[0]), 0.0, g3[0])));
  };
  ex.leaf = leaf;

  ex.ambient.mass = [m, I, geo](const Vec& q) {
    const Eigen::Matrix3d g = mat3(q);
    Mat L(3, 9);
    for (int c = 0; c < 9; ++c) {
      Eigen::Matrix3d dg = Eigen::Matrix3d::Zero();
      dg(c / 3, c % 3) = 1.0;
      L.col(c) = vee(Eigen::Matrix3d(0.5 * (g.transpose() * dg - dg.transpose() * g)));
    }
    Mat M = Mat::Zero(11, 11);
    M.topLeftCorner(9, 9) = L.transpose() * I.asDiagonal() * L;
    // zdot = L(gamma_3) d(gamma_3)/dt with gamma_3 = q[8].
    const double Lz = geo.L(q[8]);
    M(8, 8) += m * Lz * Lz;
    M(9, 9) = m;
    M(10, 10) = m;
    return M;
  };
  ex.ambient.potential = [m, grav, geo](const Vec& q) { return -m * grav * geo.h(q[8]); };
  ex.ambient.holonomic = [](const Vec& q) {
    const Eigen::Matrix3d g = mat3(q);
    const Eigen::Matrix3d R = g.transpose() * g - Eigen::Matrix3d::Identity();
    Vec phi(6);
    phi << R(0, 0), R(1, 1), R(2, 2), R(0, 1), R(0, 2), R(1, 2);
    return phi;
  };
  ex.ambient.n_holonomic = 6;

  ex.initial_q = ode.shape_point(0.35);
  ex.initial_pD = Vec(3);
  ex.initial_pD << 0.4, 0.45, 0.3;
  ex.default_level = Vec(2);
  ex.default_level << 0.25, -0.15;
  ex.conservation_tol = 1e-6;

  const NonholonomicSystem sys_c = ex.sys;
  auto sample_base9 = [](Rng& rng) {
    for (;;) {
      const Eigen::Matrix3d g = random_so3(rng);
      if (std::abs(g(2, 2)) < 0.82) return g;
    }
  };
  ex.sample_state = [sys_c, sample_base9](Rng& rng) {
    Vec q(11);
    put_mat3(q, sample_base9(rng));
    q[9] = uniform(rng, -1, 1);
    q[10] = uniform(rng, -1, 1);
    const Vec pD = uniform(rng, 0.4, 1.2) * unit_sphere_sample(rng, 3);
    return make_state(sys_c, q, pD);
  };
  ex.sample_reduced = [sample_base9](Rng& rng) {
    CoVector a;
    a.q = flat9(sample_base9(rng));
    a.p = uniform(rng, 0.4, 1.2) * unit_sphere_sample(rng, 3);
    return a;
  };
  ex.sample_leaf = [](Rng& rng) {
    LeafPoint pt;
    pt.x = Vec(1);
    pt.x << uniform(rng, -0.75, 0.75);
    pt.ph = Vec(1);
    pt.ph << uniform(rng, -1.0, 1.0);
    return pt;
  };
  ex.invariant_coords = [](const CoVector& a) {
    Vec out(4);
    out << a.q[8], a.p[0], a.p[1], a.p[2];
    return out;
  };

  auto body = [](const Vec& x9, const Vec& d9) {
    const Eigen::Matrix3d g = mat3(x9);
    Eigen::Matrix3d dg;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) dg(i, j) = d9[3 * i + j];
    return vee(Eigen::Matrix3d(0.5 * (g.transpose() * dg - dg.transpose() * g)));
  };

  OraclePack oc;
  const ReducedChart red_c = ex.red;
  auto metric_c = sys.metric;
  oc.B_tilde = [m, geo, body, red_c, metric_c](const CoVector& al, const PhaseVec& u,
                                               const PhaseVec& v) {
    // m rho <gamma, s> <Omega, d lambda>: Omega from the reduced velocity.
    const Vec q_up = red_c.lift_q(al.q, Vec::Zero(2));
    const Mat k = metric_c(q_up);
    const Vec vel = k.topLeftCorner(3, 3).llt().solve(al.p);
    const Mat Et = red_c.chart_tilde.frame(al.q);
    const Eigen::Vector3d Om = body(al.q, Vec(Et * vel));
    const Eigen::Vector3d a = body(al.q, u.base), b = body(al.q, v.base);
    const double g3 = al.q[8];
    return m * geo.rho(g3) * geo.h(g3) * (-Om.dot(a.cross(b)));
  };
  oc.omega_mu = [](const LeafPoint& pt, const Vec&, const PhaseVec& u, const PhaseVec& v) {
    const double g3 = pt.x[0];
    return (u.base[0] * v.fiber[0] - v.base[0] * u.fiber[0]) / (1.0 - g3 * g3);
  };
  ex.oracle = oc;
  return ex;
}

}  // namespace

const std::vector<std::string>& example_names() {
  static const std::vector<std::string> names = {"particle", "snakeboard", "chaplygin_ball",
                                                 "solid_of_revolution"};
  return names;
}

Example build_example(const std::string& name, const ExampleParams& params) {
  if (name == "particle") return build_particle(params);
  if (name == "snakeboard") return build_snakeboard(params);
  if (name == "chaplygin_ball") return build_ball(params);
  if (name == "solid_of_revolution") return build_solid(params);
  throw ParameterError("unknown example: " + name);
}

}  // namespace nhr
