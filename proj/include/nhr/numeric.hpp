#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <limits>
#include <random>

namespace nhr {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Rng = std::mt19937_64;

using ScalarField = std::function<double(const Vec&)>;

namespace fd {

// Central-difference step: cbrt(eps) scaled by the point magnitude.
inline double step(const Vec& q) {
  static const double h0 = std::cbrt(std::numeric_limits<double>::epsilon());
  return h0 * std::max(1.0, q.lpNorm<Eigen::Infinity>());
}

// Step for 4th-order (five-point) stencils.
inline double step4(const Vec& q) {
  static const double h0 = std::pow(std::numeric_limits<double>::epsilon(), 0.2);
  return h0 * std::max(1.0, q.lpNorm<Eigen::Infinity>());
}

inline double directional(const ScalarField& f, const Vec& q, const Vec& dir) {
  const double h = step(q) / std::max(1.0, dir.lpNorm<Eigen::Infinity>());
  return (f(q + h * dir) - f(q - h * dir)) / (2.0 * h);
}

// 4th-order directional derivative (used where 1e-9-level agreement between
// independent evaluation paths is required).
inline double directional4(const ScalarField& f, const Vec& q, const Vec& dir) {
  const double h = step4(q) / std::max(1.0, dir.lpNorm<Eigen::Infinity>());
  return (8.0 * (f(q + h * dir) - f(q - h * dir)) -
          (f(q + 2.0 * h * dir) - f(q - 2.0 * h * dir))) /
         (12.0 * h);
}

inline Vec vector_directional4(const std::function<Vec(const Vec&)>& f, const Vec& q,
                               const Vec& dir) {
  const double h = step4(q) / std::max(1.0, dir.lpNorm<Eigen::Infinity>());
  return ((8.0 * (f(q + h * dir) - f(q - h * dir)) -
           (f(q + 2.0 * h * dir) - f(q - 2.0 * h * dir))) /
          (12.0 * h))
      .eval();
}

// Two-step Richardson comparison; returns the extrapolated value and the
// relative discrepancy between the h and h/2 estimates (test-mode probe).
struct RichardsonResult {
  double value;
  double discrepancy;
};

inline RichardsonResult directional_richardson(const ScalarField& f, const Vec& q,
                                               const Vec& dir) {
  const double h = step(q) / std::max(1.0, dir.lpNorm<Eigen::Infinity>());
  const double d1 = (f(q + h * dir) - f(q - h * dir)) / (2.0 * h);
  const double d2 = (f(q + 0.5 * h * dir) - f(q - 0.5 * h * dir)) / h;
  const double extrap = (4.0 * d2 - d1) / 3.0;
  const double scale = std::max({1.0, std::abs(d1), std::abs(d2)});
  return {extrap, std::abs(d2 - d1) / scale};
}

inline Vec vector_directional(const std::function<Vec(const Vec&)>& f, const Vec& q,
                              const Vec& dir) {
  const double h = step(q) / std::max(1.0, dir.lpNorm<Eigen::Infinity>());
  return ((f(q + h * dir) - f(q - h * dir)) / (2.0 * h)).eval();
}

inline Vec gradient(const ScalarField& f, const Vec& q) {
  Vec g(q.size());
  for (int i = 0; i < q.size(); ++i) {
    Vec e = Vec::Zero(q.size());
    e[i] = 1.0;
    g[i] = directional(f, q, e);
  }
  return g;
}

}  // namespace fd

// Least-squares solve; exact for consistent systems with full column rank.
inline Vec lstsq(const Mat& A, const Vec& b) {
  return A.colPivHouseholderQr().solve(b);
}

// Adaptive Simpson quadrature.
namespace detail {
inline double simpson(const std::function<double(double)>& f, double a, double b, double fa,
                      double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline double adaptive_simpson_rec(const std::function<double(double)>& f, double a, double b,
                                   double fa, double fm, double fb, double whole, double tol,
                                   int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = simpson(f, a, m, fa, flm, fm);
  const double right = simpson(f, m, b, fm, frm, fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
         adaptive_simpson_rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}
}  // namespace detail

inline double integrate_1d(const std::function<double(double)>& f, double a, double b,
                           double tol = 1e-12) {
  if (a == b) return 0.0;
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = detail::simpson(f, a, b, fa, fm, fb);
  return detail::adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, 48);
}

// Nearest special-orthogonal matrix in the Frobenius sense.
inline Eigen::Matrix3d orthonormalize(const Eigen::Matrix3d& g) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(g, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d r = svd.matrixU() * svd.matrixV().transpose();
  if (r.determinant() < 0.0) {
    Eigen::Matrix3d flip = Eigen::Matrix3d::Identity();
    flip(2, 2) = -1.0;
    r = svd.matrixU() * flip * svd.matrixV().transpose();
  }
  return r;
}

inline Eigen::Matrix3d hat(const Eigen::Vector3d& w) {
  Eigen::Matrix3d m;
  m << 0, -w.z(), w.y(), w.z(), 0, -w.x(), -w.y(), w.x(), 0;
  return m;
}

inline Eigen::Vector3d vee(const Eigen::Matrix3d& m) {
  return {m(2, 1), m(0, 2), m(1, 0)};
}

inline Vec unit_sphere_sample(Rng& rng, int dim) {
  std::normal_distribution<double> n(0.0, 1.0);
  Vec v(dim);
  for (int i = 0; i < dim; ++i) v[i] = n(rng);
  const double nrm = v.norm();
  return nrm > 1e-12 ? Vec(v / nrm) : Vec(Vec::Unit(dim, 0));
}

inline double uniform(Rng& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  return u(rng);
}

}  // namespace nhr
