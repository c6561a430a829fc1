#pragma once

#include "nhr/examples.hpp"

#include <string>
#include <vector>

namespace nhr {

struct CheckResult {
  std::string name;
  std::string system;
  int samples = 0;
  double max_residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string detail;
};

struct VerifyOptions {
  int samples = 100;
  int trajectory_checks = 1;
  unsigned seed = 7;
  Vec level;          // defaults to the example's level when empty
  bool omit_gauge = false;  // negative control: drop B~ in the basicness check
  double dt = 1e-3;
  double t_final = 10.0;
};

// Individual checks (names double as CLI identifiers).
CheckResult check_conservation(const Example& ex, const VerifyOptions& opt);
CheckResult check_oracle_equivalence(const Example& ex, const VerifyOptions& opt);
CheckResult check_momentum_relation(const Example& ex, const VerifyOptions& opt);
CheckResult check_dynamical_condition(const Example& ex, const VerifyOptions& opt);
CheckResult check_B_closed_form(const Example& ex, const VerifyOptions& opt);
CheckResult check_reduced_form(const Example& ex, const VerifyOptions& opt);
CheckResult check_shift_identification(const Example& ex, const VerifyOptions& opt);
CheckResult check_projection_consistency(const Example& ex, const VerifyOptions& opt);
CheckResult check_casimir(const Example& ex, const VerifyOptions& opt);
CheckResult check_momentum_ode(const Example& ex, const VerifyOptions& opt);

std::vector<std::string> verify_check_names();
std::vector<CheckResult> run_checks(const Example& ex, const std::vector<std::string>& names,
                                    const VerifyOptions& opt);

// Trajectory with standard diagnostics (H, J_1..J_k, constraint residual).
Trajectory simulate(const Example& ex, const MState& initial, const IntegrateOptions& base);

}  // namespace nhr
