#include "nhr/chart.hpp"

namespace nhr {

namespace {

Vec fd_bracket(const FrameChart& chart, int a, int b, const Vec& q, double scale) {
  // [X_a, X_b] = D_{X_a} X_b - D_{X_b} X_a, columns evaluated along straight
  // chart lines (ambient extension of the frame fields).  The 4th-order
  // stencil keeps the bracket noise floor near 1e-12; pairings <p, [X_a,X_b]>
  // feed the momentum equation directly, and the oracle-agreement budget is
  // 1e-9.
  const Mat E = chart.frame(q);
  const Vec xa = E.col(a), xb = E.col(b);
  const double h = scale * fd::step4(q);
  auto dcol = [&](const Vec& dir, int c) {
    const double hh = h / std::max(1.0, dir.lpNorm<Eigen::Infinity>());
    auto col = [&](const Vec& z) { return Vec(chart.frame(z).col(c)); };
    return Vec((8.0 * (col(q + hh * dir) - col(q - hh * dir)) -
                (col(q + 2.0 * hh * dir) - col(q - 2.0 * hh * dir))) /
               (12.0 * hh));
  };
  return dcol(xa, b) - dcol(xb, a);
}

}  // namespace

Vec frame_bracket(const FrameChart& chart, int a, int b, const Vec& q) {
  chart.require_domain(q);
  if (a < 0 || b < 0 || a >= chart.dim || b >= chart.dim)
    throw ChartDomainError("frame index out of range");
  if (chart.frame_condition(q) > 1e12) throw SingularFrameError("ill-conditioned frame");
  if (a == b) return Vec::Zero(chart.ambient_dim);
  if (chart.structure_functions) return chart.structure_functions(q, a, b);
  return fd_bracket(chart, a, b, q, 1.0);
}

double frame_bracket_consistency(const FrameChart& chart, const Vec& q) {
  double worst = 0.0;
  for (int a = 0; a < chart.dim; ++a) {
    for (int b = a + 1; b < chart.dim; ++b) {
      const Vec full = fd_bracket(chart, a, b, q, 1.0);
      const Vec half = fd_bracket(chart, a, b, q, 0.5);
      const double scale = std::max(1.0, full.lpNorm<Eigen::Infinity>());
      worst = std::max(worst, (full - half).lpNorm<Eigen::Infinity>() / scale);
    }
  }
  return worst;
}

double exterior_derivative(const OneForm& form, const FrameChart& chart, const Vec& q, int a,
                           int b) {
  chart.require_domain(q);
  if (a == b) return 0.0;
  const Mat E = chart.frame(q);
  auto coeff = [&](int idx) {
    return ScalarField([&form, idx](const Vec& z) { return form(z)[idx]; });
  };
  const double xa_ab = fd::directional(coeff(b), q, E.col(a));
  const double xb_aa = fd::directional(coeff(a), q, E.col(b));
  const Vec br = frame_bracket(chart, a, b, q);
  const double on_bracket = form(q).dot(chart.coeffs(q, br));
  return xa_ab - xb_aa - on_bracket;
}

Mat exterior_derivative_matrix(const OneForm& form, const FrameChart& chart, const Vec& q) {
  Mat d = Mat::Zero(chart.dim, chart.dim);
  for (int a = 0; a < chart.dim; ++a)
    for (int b = a + 1; b < chart.dim; ++b) {
      const double v = exterior_derivative(form, chart, q, a, b);
      d(a, b) = v;
      d(b, a) = -v;
    }
  return d;
}

double d_restricted(const OneForm& form, const FrameChart& chart, const Vec& q, int a, int b) {
  if (a >= chart.rank_D || b >= chart.rank_D) return 0.0;  // P_D annihilates W
  return exterior_derivative(form, chart, q, a, b);
}

}  // namespace nhr
