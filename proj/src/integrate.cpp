#include "nhr/integrate.hpp"

#include "nhr/errors.hpp"

#include <cmath>

namespace nhr {

Vec rk4_step(const Rhs& rhs, const Vec& y, double dt) {
  const Vec k1 = rhs(y);
  const Vec k2 = rhs(y + 0.5 * dt * k1);
  const Vec k3 = rhs(y + 0.5 * dt * k2);
  const Vec k4 = rhs(y + dt * k3);
  return y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

namespace {

// Dormand–Prince 5(4) pair.
struct Dp45Result {
  Vec y5;
  double err;
};

Dp45Result dp45_step(const Rhs& rhs, const Vec& y, double dt) {
  static const double a21 = 1.0 / 5;
  static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                      a54 = -212.0 / 729;
  static const double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                      a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static const double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                      b6 = 11.0 / 84;
  static const double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                      e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
  const Vec k1 = rhs(y);
  const Vec k2 = rhs(y + dt * (a21 * k1));
  const Vec k3 = rhs(y + dt * (a31 * k1 + a32 * k2));
  const Vec k4 = rhs(y + dt * (a41 * k1 + a42 * k2 + a43 * k3));
  const Vec k5 = rhs(y + dt * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
  const Vec k6 = rhs(y + dt * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
  const Vec y5 = y + dt * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
  const Vec k7 = rhs(y5);
  const Vec errv = dt * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
  return {y5, errv.lpNorm<Eigen::Infinity>()};
}

void record(Trajectory& traj, const IntegrateOptions& opts, double t, const Vec& y) {
  traj.times.push_back(t);
  traj.states.push_back(y);
  for (const auto& [name, fn] : opts.observers) traj.diagnostics[name].push_back(fn(y));
}

}  // namespace

Trajectory integrate(const Rhs& rhs, const Vec& initial, const IntegrateOptions& opts) {
  Trajectory traj;
  Vec y = opts.project ? opts.project(initial) : initial;
  double t = 0.0;
  record(traj, opts, t, y);
  if (opts.t_final <= 0.0) return traj;

  if (opts.mode == IntegratorMode::Fixed) {
    const long nsteps = std::lround(opts.t_final / opts.dt);
    for (long i = 0; i < nsteps; ++i) {
      y = rk4_step(rhs, y, opts.dt);
      if (opts.project) y = opts.project(y);
      t = (i + 1) * opts.dt;
      if (opts.domain && !opts.domain(y))
        throw DomainExitError(t, "trajectory left the chart domain");
      if ((i + 1) % opts.store_every == 0 || i + 1 == nsteps) record(traj, opts, t, y);
    }
    return traj;
  }

  double dt = opts.dt;
  const double dt_min = 1e-14 * std::max(1.0, opts.t_final);
  while (t < opts.t_final) {
    dt = std::min(dt, opts.t_final - t);
    const Dp45Result step = dp45_step(rhs, y, dt);
    const double scale =
        opts.atol + opts.rtol * std::max(y.lpNorm<Eigen::Infinity>(),
                                         step.y5.lpNorm<Eigen::Infinity>());
    if (step.err <= scale) {
      y = opts.project ? opts.project(step.y5) : step.y5;
      t += dt;
      if (opts.domain && !opts.domain(y))
        throw DomainExitError(t, "trajectory left the chart domain");
      record(traj, opts, t, y);
    }
    const double factor =
        step.err > 0.0 ? 0.9 * std::pow(scale / step.err, 0.2) : 5.0;
    dt *= std::clamp(factor, 0.2, 5.0);
    if (dt < dt_min) throw ODEStepFailure("adaptive step size underflow");
  }
  return traj;
}

DriftReport conservation_drift(const std::vector<double>& values) {
  DriftReport rep;
  if (values.empty()) return rep;
  const double ref = values.front();
  for (double v : values) rep.max_abs_drift = std::max(rep.max_abs_drift, std::abs(v - ref));
  rep.max_rel_drift = rep.max_abs_drift / std::max(1.0, std::abs(ref));
  return rep;
}

DriftReport conservation_drift(const Trajectory& traj, const std::string& diagnostic) {
  const auto it = traj.diagnostics.find(diagnostic);
  if (it == traj.diagnostics.end()) return {};
  return conservation_drift(it->second);
}

StepHalvingReport step_halving_report(const Rhs& rhs, const Vec& initial, double dt, double T,
                                      const std::function<Vec(const Vec&)>& project) {
  auto run = [&](double step) {
    Vec y = initial;
    const long n = std::lround(T / step);
    for (long i = 0; i < n; ++i) {
      y = rk4_step(rhs, y, step);
      if (project) y = project(y);
    }
    return y;
  };
  const Vec y1 = run(dt);
  const Vec y2 = run(dt / 2.0);
  const Vec y4 = run(dt / 4.0);
  const double e1 = (y1 - y4).lpNorm<Eigen::Infinity>();
  const double e2 = (y2 - y4).lpNorm<Eigen::Infinity>();
  StepHalvingReport rep;
  const double floor = 1e-14 * std::max(1.0, initial.lpNorm<Eigen::Infinity>());
  if (e1 < floor && e2 < floor) {
    rep.ratio = std::numeric_limits<double>::quiet_NaN();
    rep.exact = true;
    rep.note = "exact";
    return rep;
  }
  rep.ratio = e2 > 0.0 ? e1 / e2 : std::numeric_limits<double>::infinity();
  rep.exact = false;
  if (!(rep.ratio >= 14.0 && rep.ratio <= 18.0))
    rep.note = "order ratio outside 4th-order window; consider adaptive mode";
  return rep;
}

MatrixOdeSolution::MatrixOdeSolution(std::function<Mat(double)> A, double t0, double t1,
                                     const Mat& init, double grid_step) {
  t0_ = t0;
  t1_ = t1;
  rows_ = static_cast<int>(init.rows());
  cols_ = static_cast<int>(init.cols());
  const long n = std::max<long>(1, std::lround((t1 - t0) / grid_step));
  h_ = (t1 - t0) / static_cast<double>(n);
  nodes_.reserve(n + 1);
  slopes_.reserve(n + 1);
  Mat F = init;
  nodes_.push_back(F);
  slopes_.push_back(A(t0) * F);
  min_det_ = std::abs(F.determinant());
  for (long i = 0; i < n; ++i) {
    const double t = t0 + i * h_;
    const Mat k1 = A(t) * F;
    const Mat k2 = A(t + 0.5 * h_) * (F + 0.5 * h_ * k1);
    const Mat k3 = A(t + 0.5 * h_) * (F + 0.5 * h_ * k2);
    const Mat k4 = A(t + h_) * (F + h_ * k3);
    F = F + h_ / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!F.allFinite()) throw ODEStepFailure("matrix ODE solution lost finiteness");
    nodes_.push_back(F);
    slopes_.push_back(A(t + h_) * F);
    min_det_ = std::min(min_det_, std::abs(F.determinant()));
  }
}

Mat MatrixOdeSolution::value(double t) const {
  if (t < t0_ - 1e-12 || t > t1_ + 1e-12)
    throw ODEStepFailure("matrix ODE solution evaluated outside its range");
  const double s = std::clamp((t - t0_) / h_, 0.0, static_cast<double>(nodes_.size() - 1));
  const long i = std::min<long>(static_cast<long>(s), nodes_.size() - 2);
  const double x = s - i;  // in [0, 1]
  const Mat &f0 = nodes_[i], &f1 = nodes_[i + 1];
  const Mat m0 = h_ * slopes_[i], m1 = h_ * slopes_[i + 1];
  const double x2 = x * x, x3 = x2 * x;
  return (2 * x3 - 3 * x2 + 1) * f0 + (x3 - 2 * x2 + x) * m0 + (-2 * x3 + 3 * x2) * f1 +
         (x3 - x2) * m1;
}

Mat MatrixOdeSolution::derivative(double t) const {
  const double s = std::clamp((t - t0_) / h_, 0.0, static_cast<double>(nodes_.size() - 1));
  const long i = std::min<long>(static_cast<long>(s), nodes_.size() - 2);
  const double x = s - i;
  const Mat &f0 = nodes_[i], &f1 = nodes_[i + 1];
  const Mat m0 = h_ * slopes_[i], m1 = h_ * slopes_[i + 1];
  const double x2 = x * x;
  return ((6 * x2 - 6 * x) * f0 + (3 * x2 - 4 * x + 1) * m0 + (-6 * x2 + 6 * x) * f1 +
          (3 * x2 - 2 * x) * m1) /
         h_;
}

}  // namespace nhr
