#pragma once

#include "nhr/integrate.hpp"
#include "nhr/system.hpp"

namespace nhr {

using Section = std::function<Vec(const Vec&)>;  // q -> Lie algebra coefficients

struct DimensionAssumptionReport {
  bool holds = false;
  int rank_S = 0;
};

// Numerical rank of [D-columns | sigma(q)]; also reports rank(D ∩ V).
DimensionAssumptionReport verify_dimension_assumption(const NonholonomicSystem& sys,
                                                      const Vec& q);

// J_xi(s) = <p(s), sigma(q) xi(q)> in the adapted coframe.
double nh_momentum(const NonholonomicSystem& sys, const MState& s, const Section& section);

// max over sampled g of |Ad_g xi(Psi_{g^-1} q) - xi(q)|.
double check_Ad_invariance(const NonholonomicSystem& sys, const Section& section,
                           const std::vector<Vec>& base_points, int samples, Rng& rng);

/// Linear shape ODE f'(gamma) = A(gamma) f(gamma) for gauge-momentum
/// coefficients, extracted from probe states on shape level sets.
struct MomentumOdeProblem {
  const NonholonomicSystem* sys = nullptr;
  std::vector<Section> xi_basis;                   // k sections of g_S
  std::function<double(const Vec&)> shape;         // G-invariant shape coordinate
  std::function<Vec(double)> shape_point;          // shape value -> chart point
  double probe_momentum_scale = 1.0;
  unsigned seed = 20240811;
};

struct MomentumOdeSample {
  Mat A;            // k x k
  double residual;  // relative least-squares inconsistency over the probe set
};

MomentumOdeSample assemble_momentum_ode(const MomentumOdeProblem& prob, double shape_value);

// A(gamma) as a function, throwing IllPosedMomentumODEError past the residual
// tolerance; worst residual seen is accumulated into *max_residual if given.
std::function<Mat(double)> momentum_ode_matrix(const MomentumOdeProblem& prob, double tol,
                                               double* max_residual = nullptr);

// Fundamental solution F(gamma) with F(gamma0) = init over [lo, hi].
MatrixOdeSolution solve_momentum_ode(const std::function<Mat(double)>& A, double lo, double hi,
                                     double gamma0, const Mat& init, double grid_step = 5e-4);

// Cotangent-lifted generator of the vector field Y on a cotangent chart: base
// part Y(q), fiber part <p, [Y, X_a]> on the adapted coframe.
PhaseVec cotangent_lift_generator(const FrameChart& chart,
                                  const std::function<Vec(const Vec&)>& field,
                                  const CoVector& alpha);

// Same on M (pD components only).
PhaseVec m_lift_generator(const NonholonomicSystem& sys,
                          const std::function<Vec(const Vec&)>& field, const MState& s);

}  // namespace nhr
