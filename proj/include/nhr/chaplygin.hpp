#pragma once

#include "nhr/symmetry.hpp"

namespace nhr {

/// First-step reduction data: the chart of Q~ = Q/G_W, projection/section of
/// rho_Q~, and the induced F-action data on Q~.
///
/// chart_tilde's frame columns are the rho_Q~-projections of the D-columns of
/// the upstairs frame, in the same order: momenta correspond coefficient-wise
/// under reduce/lift.
struct ReducedChart {
  FrameChart chart_tilde;  // dim = rank_D upstairs; trailing rank_S columns = F-generators
  std::function<Vec(const Vec&)> project_q;                 // Q chart -> Q~ chart
  std::function<Vec(const Vec&, const Vec&)> lift_q;        // (Q~ point, fiber) -> Q chart
  Vec default_fiber;
  // Partially reduced gauge symmetries eta_i as f-valued coefficient functions
  // on Q~ (coefficients on the f-basis = non-w generator classes).
  std::vector<std::function<Vec(const Vec&)>> eta;
  // F-action sampler on reduced covectors (frame fields are F-invariant, so
  // momentum coefficients transport unchanged).
  std::function<CoVector(const CoVector&, Rng&)> f_move;
  // Moves a Q-chart point along the G_W fiber (for basic-ness checks).
  std::function<Vec(const Vec&, Rng&)> gw_move_q;

  Vec lift_default(const Vec& x) const { return lift_q(x, default_fiber); }
};

// Principal-connection value A_W(v) in the w-basis: solves sigma_W(q) eta = P_W(v).
Vec connection_AW(const NonholonomicSystem& sys, const Vec& q, const Vec& v);

// w-valued curvature K_W = d^D A_W on frame indices (a, b).
Vec curvature_KW(const NonholonomicSystem& sys, const Vec& q, int a, int b);

// All frame pairs of one w-component (antisymmetric matrix), cached form.
Mat curvature_KW_matrix(const NonholonomicSystem& sys, const Vec& q, int w_component);

// <J, K_W>(u, v) at s: canonical momentum paired with the curvature of the
// base projections of u, v.  Semi-basic and G_W-basic.
double JK_pairing(const NonholonomicSystem& sys, const MState& s, const PhaseVec& u,
                  const PhaseVec& v);

// rho_{G_W}: M -> T*Q~ and its section.
CoVector reduce_state(const NonholonomicSystem& sys, const ReducedChart& red, const MState& s);
MState lift_state(const NonholonomicSystem& sys, const ReducedChart& red, const CoVector& alpha,
                  const Vec* fiber = nullptr);

double hamiltonian_reduced(const NonholonomicSystem& sys, const ReducedChart& red,
                           const CoVector& alpha);

/// Point-prepared evaluator for 2-forms on T*Q~ (caches the lifted state and
/// the canonical bracket pairings at alpha).
class ReducedPoint {
 public:
  ReducedPoint(const NonholonomicSystem& sys, const ReducedChart& red, const CoVector& alpha,
               const Vec* fiber = nullptr);

  // Canonical Omega_Q~ = -d Theta_Q~.
  double omega_canonical(const PhaseVec& u, const PhaseVec& v) const;
  // B_<JK>, evaluated upstairs through the lift.
  double b_jk(const PhaseVec& u, const PhaseVec& v) const;
  // Omega~ = Omega_Q~ - B_<JK>.
  double omega_tilde(const PhaseVec& u, const PhaseVec& v) const;

  const CoVector& alpha() const { return alpha_; }
  const MState& lifted() const { return lifted_; }
  const Mat& frame() const { return E_; }
  // D-horizontal lift of a Q~ base vector to the upstairs chart.
  Vec horizontal_lift(const Vec& base) const;

 private:
  const NonholonomicSystem* sys_;
  const ReducedChart* red_;
  CoVector alpha_;
  MState lifted_;
  Mat E_;         // reduced frame at alpha.q
  Mat pairings_;  // <p~, [X~_a, X~_b]>
};

// i_X Omega~ = dH~ on T*Q~; consistency with T rho(X_nh) is an invariant.
struct ReducedField {
  Vec xdot;   // ambient Q~ components
  Vec pdot;   // dim coefficients
};

ReducedField reduced_vector_field(const NonholonomicSystem& sys, const ReducedChart& red,
                                  const CoVector& alpha);

// T rho_{G_W}(X_nh) at the lift of alpha (projection-consistency reference).
ReducedField project_dynamics(const NonholonomicSystem& sys, const ReducedChart& red,
                              const CoVector& alpha, const Vec* fiber = nullptr);

// Generic hamiltonian solve on T*Q~ for an arbitrary 2-form given as a matrix
// on the mixed frame basis (base columns then fiber), orientation M x = df.
Mat two_form_solve_matrix(const FrameChart& chart, const Vec& q,
                          const std::function<double(const PhaseVec&, const PhaseVec&)>& form);

}  // namespace nhr
