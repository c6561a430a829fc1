#pragma once

#include "nhr/chart.hpp"

#include <functional>
#include <map>
#include <string>
#include <vector>

namespace nhr {

/// Time series of flattened phase states with per-sample diagnostics.
struct Trajectory {
  std::vector<double> times;
  std::vector<Vec> states;
  std::map<std::string, std::vector<double>> diagnostics;
};

enum class IntegratorMode { Fixed, Adaptive };

struct IntegrateOptions {
  IntegratorMode mode = IntegratorMode::Fixed;
  double dt = 1e-3;
  double t_final = 10.0;
  double rtol = 1e-10;  // adaptive mode
  double atol = 1e-12;
  int store_every = 1;
  // Post-step chart maintenance (rotation re-orthonormalization, pW refresh).
  std::function<Vec(const Vec&)> project;
  // Domain check; DomainExitError is raised when it fails mid-trajectory.
  std::function<bool(const Vec&)> domain;
  // Named diagnostics recorded along the trajectory.
  std::map<std::string, std::function<double(const Vec&)>> observers;
};

using Rhs = std::function<Vec(const Vec&)>;

Trajectory integrate(const Rhs& rhs, const Vec& initial, const IntegrateOptions& opts);

// Single RK4 step (exposed for the order test).
Vec rk4_step(const Rhs& rhs, const Vec& y, double dt);

struct DriftReport {
  double max_abs_drift = 0.0;
  double max_rel_drift = 0.0;
};

DriftReport conservation_drift(const Trajectory& traj, const std::string& diagnostic);
DriftReport conservation_drift(const std::vector<double>& values);

struct StepHalvingReport {
  double ratio;       // error(dt) / error(dt/2) against a dt/4 reference
  bool exact;         // rhs integrates exactly (errors at roundoff)
  std::string note;   // set when the ratio leaves the 4th-order window
};

StepHalvingReport step_halving_report(const Rhs& rhs, const Vec& initial, double dt, double T,
                                      const std::function<Vec(const Vec&)>& project = {});

// Dense cubic-Hermite table of a matrix ODE solution F'(t) = A(t) F(t),
// integrated with fixed-step RK4 on a uniform grid.
class MatrixOdeSolution {
 public:
  MatrixOdeSolution() = default;
  MatrixOdeSolution(std::function<Mat(double)> A, double t0, double t1, const Mat& init,
                    double grid_step);

  Mat value(double t) const;
  Mat derivative(double t) const;  // A(t_cell-interpolated) via Hermite slope
  double t_min() const { return t0_; }
  double t_max() const { return t1_; }
  double min_abs_determinant() const { return min_det_; }

 private:
  double t0_ = 0.0, t1_ = 0.0, h_ = 0.0;
  int rows_ = 0, cols_ = 0;
  std::vector<Mat> nodes_;
  std::vector<Mat> slopes_;
  double min_det_ = 0.0;
};

}  // namespace nhr
