#pragma once

#include "nhr/mwreduce.hpp"

#include <memory>
#include <optional>
#include <string>

namespace nhr {

struct ExampleParams {
  double mass = 1.0;
  double radius = 1.0;
  // Snakeboard.
  double rotor_inertia = 0.5;   // J
  double wheel_inertia = 0.2;   // J0
  // Chaplygin ball.
  Eigen::Vector3d inertia{1.0, 2.0, 3.0};
  // Solid of revolution (reference spheroid).
  double semi_axis_a = 1.0;
  double semi_axis_c = 0.6;
  double gravity = 1.0;
};

/// Shape-ODE reconstruction inputs (systems whose gauge momenta are defined
/// through the coefficient ODE, plus the fixtures that cross-check it).
struct MomentumOdeSetup {
  std::shared_ptr<NonholonomicSystem> sys;  // plain-section frame
  std::vector<Section> xi;
  std::function<double(const Vec&)> shape;
  std::function<Vec(double)> shape_point;
  double lo = 0.0, hi = 0.0, origin = 0.0;
};

/// Closed-form oracles stated for the system; empty functions mean the paper
/// gives no closed form for that object.
struct OraclePack {
  std::function<double(const MState&, const PhaseVec&, const PhaseVec&)> B_total;
  std::function<double(const CoVector&, const PhaseVec&, const PhaseVec&)> B_tilde;
  std::function<double(const CoVector&, const PhaseVec&, const PhaseVec&)> b_jk;
  std::function<double(const CoVector&, const PhaseVec&, const PhaseVec&)> omegaB;
  // Leaf-form oracle on leaf tangents (base ambient, fiber = horizontal p).
  std::function<double(const LeafPoint&, const Vec&, const PhaseVec&, const PhaseVec&)> omega_mu;
  // First gauge momentum in closed form, when stated.
  std::function<double(const MState&)> J1;
};

struct Example {
  std::string name;
  ExampleParams params;
  NonholonomicSystem sys;
  ReducedChart red;
  SectionBasis sections;
  LeafChart leaf;
  AmbientLagrangian ambient;
  OraclePack oracle;

  Vec initial_q, initial_pD;
  Vec default_level;
  double conservation_tol = 1e-8;  // solids relax to 1e-6 (ODE-built momenta)

  std::function<MState(Rng&)> sample_state;
  std::function<CoVector(Rng&)> sample_reduced;
  std::function<LeafPoint(Rng&)> sample_leaf;
  std::function<Vec(const CoVector&)> invariant_coords;

  std::optional<MomentumOdeSetup> momentum_ode;

  MState initial_state() const { return make_state(sys, initial_q, initial_pD); }
};

Example build_example(const std::string& name, const ExampleParams& params = {});

const std::vector<std::string>& example_names();

// Snakeboard helpers shared with tests.
double snakeboard_F(double phi, const ExampleParams& p);
double snakeboard_E(double phi, const ExampleParams& p);  // quadrature from pi/2

}  // namespace nhr
