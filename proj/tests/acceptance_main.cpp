// Integration suite: runs every verification criterion at its stated
// tolerance and prints one PASS/FAIL line per criterion.
#include <iostream>

#include "flexform/verification.hpp"

int main() {
  const auto results = flexform::run_verification_suite();
  const bool ok = flexform::report_checks(results, std::cout);
  std::cout << (ok ? "ALL CRITERIA PASSED" : "CRITERIA FAILED") << std::endl;
  return ok ? 0 : 1;
}
