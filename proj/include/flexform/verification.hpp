#ifndef FLEXFORM_VERIFICATION_HPP
#define FLEXFORM_VERIFICATION_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace flexform {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct VerificationOptions {
  int solver_starts = 2000;  // multi-start budget of the cardinality study
};

/// Numerical verification suite: closed-loop convergence of the two
/// reference runs, Lyapunov decrease, skew-symmetry, gradient and rigidity
/// oracles, the cardinality study, rest-equilibrium checks, solver
/// self-consistency and the integrator order check.
std::vector<CheckResult> run_verification_suite(
    const VerificationOptions& options = {});

/// Prints one PASS/FAIL line per check; returns true when all passed.
bool report_checks(const std::vector<CheckResult>& results, std::ostream& out);

}  // namespace flexform

#endif
