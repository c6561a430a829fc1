#pragma once

#include "nhr/chart.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <vector>

namespace nhr {

/// A sampled finite group element: its action on the chart and the adjoint
/// representation on the Lie algebra basis.
struct GroupMove {
  std::function<Vec(const Vec&)> act_q;  // chart point -> chart point
  Mat Ad;                                // l x l adjoint matrix
};

/// Symmetry-group data for a nonholonomic system.
struct GroupData {
  int dim_g = 0;  // l
  // q -> ambient_dim x l matrix; column j is the infinitesimal generator of e_j.
  std::function<Mat(const Vec&)> generators;
  // structure[i](j,k): [e_j, e_k] = sum_i c^i_{jk} e_i.
  std::vector<Mat> structure_constants;
  // Indices (into the e-basis) spanning the ideal w = Lie(G_W).
  std::vector<int> w_indices;
  // Optional sampler of finite group elements for invariance spot checks.
  std::function<GroupMove(Rng&)> group_sample;

  bool has_samples() const { return static_cast<bool>(group_sample); }
  std::vector<int> f_indices() const {
    std::vector<int> out;
    for (int j = 0; j < dim_g; ++j)
      if (std::find(w_indices.begin(), w_indices.end(), j) == w_indices.end()) out.push_back(j);
    return out;
  }
};

/// Basis of g-valued (or f-valued, when reduced) coefficient functions housing
/// the gauge symmetries.  sections[i] maps a chart point to the coefficient
/// vector of zeta_i on the Lie-algebra basis.
struct SectionBasis {
  std::vector<std::function<Vec(const Vec&)>> sections;
  bool reduced = false;  // true when the coefficients live in f = g/w

  int size() const { return static_cast<int>(sections.size()); }
};

/// Complete nonholonomic problem statement: chart + adapted frame, kinetic
/// metric in frame components, potential, and the symmetry action.
struct NonholonomicSystem {
  FrameChart chart;
  std::function<Mat(const Vec&)> metric;  // q -> dim x dim kappa_ab = kappa(X_a, X_b)
  std::function<double(const Vec&)> potential;
  GroupData action;

  Mat metric_DD(const Vec& q) const {
    return metric(q).topLeftCorner(chart.rank_D, chart.rank_D);
  }
  Mat metric_WD(const Vec& q) const {
    return metric(q).bottomLeftCorner(chart.rank_W(), chart.rank_D);
  }
};

/// Point of M = kappa#(D): chart point plus momentum coefficients on the dual
/// coframe.  pW is derived from the constraint relation, never independent.
struct MState {
  Vec q;
  Vec pD;  // r coefficients on the D-column duals
  Vec pW;  // rank_W coefficients, cached: pW = kappa_WD kappa_DD^{-1} pD
};

MState make_state(const NonholonomicSystem& sys, const Vec& q, const Vec& pD);

// Full n-vector (pD, pW) of coframe momentum coefficients.
Vec full_momentum(const MState& s);

// Residual of the defining relation of M (diagnostic; ~1e-16 by construction).
double membership_residual(const NonholonomicSystem& sys, const MState& s);

// kappa#(q, v) restricted to D: momenta of the velocity v (D-frame components).
MState legendre_to_M(const NonholonomicSystem& sys, const Vec& q, const Vec& v);

// Inverse on D: v = kappa_DD^{-1} pD.
Vec velocity_of(const NonholonomicSystem& sys, const MState& s);

double hamiltonian_M(const NonholonomicSystem& sys, const MState& s);

/// Result of the almost-symplectic solve on the 2r-dimensional section C_s.
struct XnhResult {
  Vec qdot;       // ambient components, lies in D
  Vec pDdot;      // r components
  double solve_residual = 0.0;
  double smallest_singular_value = 0.0;  // nondegeneracy witness of [Omega|C]
};

XnhResult nonholonomic_vector_field(const NonholonomicSystem& sys, const MState& s);

// Omega_M = -d(Theta_M) evaluated generically on arbitrary tangent vectors of
// M in the (q, pD) chart; the fast assembly in nonholonomic_vector_field must
// agree with this path to 1e-8.
double omega_M_generic(const NonholonomicSystem& sys, const MState& s, const PhaseVec& u,
                       const PhaseVec& v);

double theta_M(const NonholonomicSystem& sys, const MState& s, const PhaseVec& u);

// Scalar fields on M take the state; they must be smooth in (q, pD) near s.
using MField = std::function<double(const MState&)>;

// df(X_g) where X_g solves i_{X_g} Omega_M|_C = dg|_C.
double nonholonomic_bracket(const NonholonomicSystem& sys, const MField& f, const MField& g,
                            const MState& s);

// Hamiltonian vector field of f on (M, Omega_M|_C); optionally gauge-shifted
// by a semi-basic 2-form B supplied as a frame-pair matrix on base directions.
XnhResult hamiltonian_field_M(const NonholonomicSystem& sys, const MField& f, const MState& s,
                              const Mat* B_base = nullptr);

// Directional derivative of a scalar field on M along a phase vector.
double m_directional(const MField& f, const MState& s, const PhaseVec& u,
                     const NonholonomicSystem& sys);

/// Independent multiplier-form oracle: constrained Euler-Lagrange equations in
/// ambient coordinates with Lagrange multipliers enforcing velocity in D (and,
/// for embedded charts, the manifold constraints).
struct AmbientLagrangian {
  // Ambient kinetic metric extension: q -> ambient_dim x ambient_dim, psd,
  // restricting to kappa on tangent vectors.
  std::function<Mat(const Vec&)> mass;
  std::function<double(const Vec&)> potential;
  // Holonomic constraint functions phi(q) = 0 pinning the embedded manifold
  // (empty for flat charts).
  std::function<Vec(const Vec&)> holonomic;
  int n_holonomic = 0;
};

struct LdResult {
  Vec vdot;         // r D-frame acceleration components
  Vec multipliers;  // nonholonomic multipliers (one per constraint form)
  Vec qddot;        // ambient acceleration
};

LdResult lagrange_dalembert_oracle(const NonholonomicSystem& sys, const AmbientLagrangian& amb,
                                   const Vec& q, const Vec& v);

// Momentum rate along the oracle solution: d/dt [kappa_D.(q) v] for comparison
// with the symplectic-path pDdot.
Vec oracle_momentum_rate(const NonholonomicSystem& sys, const Vec& q, const Vec& v,
                         const LdResult& ld);

}  // namespace nhr
