#pragma once

#include "nhr/errors.hpp"
#include "nhr/numeric.hpp"

#include <functional>
#include <string>
#include <vector>

namespace nhr {

/// Local chart of a configuration manifold together with an adapted moving
/// frame splitting TQ = D ⊕ W, with D = Hor ⊕ S.
///
/// Points are stored as `ambient_dim` real coordinates.  Rotation-group
/// factors use 9 row-major matrix entries (orthogonality is maintained by
/// projection, never integrated), so `ambient_dim` may exceed the manifold
/// dimension `dim`.  The frame is an ambient_dim × dim matrix whose columns
/// are the frame vector fields:
///   columns [0, rank_D-rank_S)          span Hor,
///   columns [rank_D-rank_S, rank_D)     span S,
///   columns [rank_D, dim)               span W.
struct FrameChart {
  int ambient_dim = 0;
  int dim = 0;     // manifold dimension n (number of frame columns)
  int rank_D = 0;  // r
  int rank_S = 0;  // k
  std::vector<std::string> coordinate_names;
  std::function<bool(const Vec&)> domain;
  std::function<Mat(const Vec&)> frame;
  // Optional analytic accelerator: (q, a, b) -> [X_a, X_b](q) ambient components.
  std::function<Vec(const Vec&, int, int)> structure_functions;
  // Offsets of 9-entry row-major rotation blocks inside the coordinates.
  std::vector<int> rotation_blocks;
  // Offsets of 3-entry unit-vector blocks (sphere charts).
  std::vector<int> unit_blocks;

  int rank_W() const { return dim - rank_D; }
  int hor_count() const { return rank_D - rank_S; }

  bool in_domain(const Vec& q) const { return !domain || domain(q); }

  void require_domain(const Vec& q) const {
    if (!in_domain(q)) throw ChartDomainError("point outside chart domain");
  }

  // Re-project rotation blocks onto SO(3); identity for flat charts.
  Vec project(Vec q) const {
    for (int off : rotation_blocks) {
      Eigen::Matrix3d g;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) g(i, j) = q[off + 3 * i + j];
      g = orthonormalize(g);
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) q[off + 3 * i + j] = g(i, j);
    }
    for (int off : unit_blocks) {
      const double n = q.segment<3>(off).norm();
      if (n > 1e-14) q.segment<3>(off) /= n;
    }
    return q;
  }

  // Coefficients of a tangent vector on the frame (solves E(q) c = v).
  Vec coeffs(const Vec& q, const Vec& v) const { return lstsq(frame(q), v); }

  // Condition number of the frame via singular values; large values signal a
  // chart-domain violation.
  double frame_condition(const Vec& q) const {
    Eigen::JacobiSVD<Mat> svd(frame(q));
    const double smin = svd.singularValues().minCoeff();
    if (smin <= 0.0) throw SingularFrameError("frame has rank deficiency");
    return svd.singularValues().maxCoeff() / smin;
  }
};

/// Covector in adapted-coframe coordinates: p[a] pairs with frame column a.
struct CoVector {
  Vec q;
  Vec p;
};

/// Tangent vector of a phase space (T*Q or M): ambient base part plus
/// momentum-coefficient fiber part.
struct PhaseVec {
  Vec base;
  Vec fiber;
};

// [X_a, X_b](q) in ambient components.  Uses structure_functions when
// supplied, otherwise central finite differences of the frame columns.
Vec frame_bracket(const FrameChart& chart, int a, int b, const Vec& q);

// Relative step-halving discrepancy of the finite-difference bracket; a
// consistency diagnostic for charts without structure functions.
double frame_bracket_consistency(const FrameChart& chart, const Vec& q);

// A 1-form field given by coframe coefficients: q -> n-vector, alpha = sum_a c_a eps^a.
using OneForm = std::function<Vec(const Vec&)>;

// d alpha(X_a, X_b)(q) = X_a(alpha_b) - X_b(alpha_a) - alpha([X_a, X_b]).
double exterior_derivative(const OneForm& form, const FrameChart& chart, const Vec& q, int a,
                           int b);

// All frame pairs at once (antisymmetric dim × dim matrix).
Mat exterior_derivative_matrix(const OneForm& form, const FrameChart& chart, const Vec& q);

// d^D alpha(X_a, X_b) = d alpha(P_D X_a, P_D X_b); W-indexed arguments give 0.
double d_restricted(const OneForm& form, const FrameChart& chart, const Vec& q, int a, int b);

// Contract an antisymmetric frame-pair matrix with two coefficient vectors.
inline double contract_form(const Mat& dmat, const Vec& ca, const Vec& cb) {
  return ca.dot(dmat * cb);
}

}  // namespace nhr
