#pragma once
#include <stdexcept>
#include <string>

namespace spnet {

// Hard failures throw; validation findings are returned as data (see ValidationReport).

struct SpnetError : std::runtime_error {
  explicit SpnetError(const std::string& msg) : std::runtime_error(msg) {}
};

struct NegativeRateError : SpnetError { using SpnetError::SpnetError; };
struct InfeasibleLpError : SpnetError { using SpnetError::SpnetError; };
struct UnboundedLpError : SpnetError { using SpnetError::SpnetError; };
struct WorkloadUnavailableError : SpnetError { using SpnetError::SpnetError; };
struct WorkloadInconsistentError : SpnetError { using SpnetError::SpnetError; };
struct NotContractiveError : SpnetError { using SpnetError::SpnetError; };
struct NoConvergenceError : SpnetError { using SpnetError::SpnetError; };
struct NotPsdError : SpnetError { using SpnetError::SpnetError; };
struct KernelNotStochasticError : SpnetError { using SpnetError::SpnetError; };
struct LatticeViolationError : SpnetError { using SpnetError::SpnetError; };
struct InfeasibleWorkloadError : SpnetError { using SpnetError::SpnetError; };
struct StateConstraintError : SpnetError { using SpnetError::SpnetError; };
struct PolicyInfeasibleError : SpnetError { using SpnetError::SpnetError; };
struct DirectionNotFoundError : SpnetError { using SpnetError::SpnetError; };
struct InvalidParamsError : SpnetError { using SpnetError::SpnetError; };
struct UnknownExampleError : SpnetError { using SpnetError::SpnetError; };
struct ParseError : SpnetError { using SpnetError::SpnetError; };

}  // namespace spnet
