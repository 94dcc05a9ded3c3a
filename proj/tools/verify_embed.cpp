// In-process runner for the registered oracle/property suites. The test cases
// themselves are compiled into this binary from the shared object library, so
// `wdtn verify` executes exactly the checks the unit-test binary runs.
#define DOCTEST_CONFIG_IMPLEMENT
#include "doctest.h"

// Returns 0 when every check passes, 2 on any failure (the CLI's
// verification-failure exit code). grad_only restricts the run to the
// gradient-vs-finite-difference suites.
int run_verify(bool grad_only) {
  doctest::Context ctx;
  if (grad_only) ctx.addFilter("test-case", "*gradients*");
  const int rc = ctx.run();
  return rc == 0 ? 0 : 2;
}
