#pragma once

#include <stdexcept>
#include <string>

namespace nhr {

struct ChartDomainError : std::runtime_error {
  explicit ChartDomainError(const std::string& what) : std::runtime_error(what) {}
};

struct SingularFrameError : std::runtime_error {
  explicit SingularFrameError(const std::string& what) : std::runtime_error(what) {}
};

struct SingularMetricError : std::runtime_error {
  explicit SingularMetricError(const std::string& what) : std::runtime_error(what) {}
};

struct SingularMassMatrixError : std::runtime_error {
  explicit SingularMassMatrixError(const std::string& what) : std::runtime_error(what) {}
};

struct SingularGeneratorError : std::runtime_error {
  explicit SingularGeneratorError(const std::string& what) : std::runtime_error(what) {}
};

struct DegenerateSectionError : std::runtime_error {
  explicit DegenerateSectionError(const std::string& what) : std::runtime_error(what) {}
};

struct DegenerateFormError : std::runtime_error {
  explicit DegenerateFormError(const std::string& what) : std::runtime_error(what) {}
};

struct DegenerateLeafFormError : std::runtime_error {
  explicit DegenerateLeafFormError(const std::string& what) : std::runtime_error(what) {}
};

struct MissingGroupSampleError : std::runtime_error {
  explicit MissingGroupSampleError(const std::string& what) : std::runtime_error(what) {}
};

struct IllPosedMomentumODEError : std::runtime_error {
  explicit IllPosedMomentumODEError(const std::string& what) : std::runtime_error(what) {}
};

struct ODEStepFailure : std::runtime_error {
  explicit ODEStepFailure(const std::string& what) : std::runtime_error(what) {}
};

struct LevelSetViolationError : std::runtime_error {
  explicit LevelSetViolationError(const std::string& what) : std::runtime_error(what) {}
};

struct InversionFailure : std::runtime_error {
  explicit InversionFailure(const std::string& what) : std::runtime_error(what) {}
};

struct DomainExitError : std::runtime_error {
  DomainExitError(double t, const std::string& what) : std::runtime_error(what), exit_time(t) {}
  double exit_time;
};

struct ParameterError : std::runtime_error {
  explicit ParameterError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace nhr
