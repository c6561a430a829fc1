#pragma once

#include "nhr/chaplygin.hpp"

namespace nhr {

/// Evaluators for the gauge 2-forms on M and their descents to T*Q~.
/// All of them are semi-basic: only base parts of the arguments enter.
class GaugePack {
 public:
  GaugePack(const NonholonomicSystem& sys, const ReducedChart& red, const SectionBasis& sections);

  int k() const { return static_cast<int>(sections_.sections.size()); }

  // 1-forms Y^i dual to the gauge symmetries (zero on Hor and W), as coframe
  // coefficient functions on Q.
  Vec Y_form(const Vec& q, int i) const;

  // Gauge momenta J_i = <J^nh, zeta_i> upstairs and J~_i downstairs.
  double J_i(const MState& s, int i) const;
  double J_tilde(const CoVector& alpha, int i) const;

  // The three 2-forms on M.
  double B1(const MState& s, const PhaseVec& u, const PhaseVec& v) const;
  double calB(const MState& s, const PhaseVec& u, const PhaseVec& v) const;
  double B_total(const MState& s, const PhaseVec& u, const PhaseVec& v) const;

  // Descents to T*Q~ (basic forms, evaluated through the lift).
  double B1_tilde(const CoVector& alpha, const PhaseVec& u, const PhaseVec& v) const;
  double calB_tilde(const CoVector& alpha, const PhaseVec& u, const PhaseVec& v) const;
  double B_tilde(const CoVector& alpha, const PhaseVec& u, const PhaseVec& v) const;

  // Omega~_B = Omega_Q~ + J~_i dY~^i + calB~ (the B_<JK> cancellation between
  // Omega~ and B~_1 is performed symbolically); `uncancelled` keeps the
  // numerically noisier assembly Omega~ + B~_1 + calB~ as a cross-check.
  double omegaB(const CoVector& alpha, const PhaseVec& u, const PhaseVec& v,
                bool uncancelled = false) const;

  // Eq:tildeB1: B~_1 = B_<JK> + J~_i dY~^i evaluated directly downstairs.
  double B1_tilde_closed(const CoVector& alpha, const PhaseVec& u, const PhaseVec& v) const;

  // Generator field of eta_i on Q~ (trailing frame columns of chart_tilde).
  Vec eta_field(const Vec& x, int i) const;

  // d Y~^i evaluated on reduced tangent pairs (base parts only).
  double dY_tilde_form(const Vec& x, int i, const PhaseVec& u, const PhaseVec& v) const;

  const NonholonomicSystem& sys() const { return *sys_; }
  const ReducedChart& red() const { return *red_; }
  const SectionBasis& sections() const { return sections_; }

 private:
  const NonholonomicSystem* sys_;
  const ReducedChart* red_;
  SectionBasis sections_;

  Mat dY_restricted(const Vec& q, int i) const;   // d^D Y^i frame-pair matrix
  Mat dY_tilde(const Vec& x, int i) const;        // d Y~^i on Q~
  Vec hor_connection(const Vec& q, const Vec& v) const;  // A(v) in the g-basis
};

struct MomentumRelationReport {
  double max_residual = 0.0;
};

// Residual of i_{(eta_i)_{T*Q~}} Omega~_B = d J~_i over a mixed-frame basis at
// each sample.
MomentumRelationReport verify_momentum_relation(const GaugePack& gauge,
                                                const std::vector<CoVector>& samples);

// Same identity for a caller-supplied 2-form/eta/J (canonical fixtures).
double momentum_relation_residual(
    const FrameChart& chart, const CoVector& alpha,
    const std::function<double(const PhaseVec&, const PhaseVec&)>& omega,
    const std::function<Vec(const Vec&)>& eta_field,
    const std::function<double(const CoVector&)>& J);

}  // namespace nhr
