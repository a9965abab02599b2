#pragma once

namespace gmvo::cli {

/// Entry point behind the `gmvo` binary; also called in-process by tests.
/// Returns 0 on success, 1 on validation/usage errors, 2 on runtime failure.
int run(int argc, const char* const* argv);

}  // namespace gmvo::cli
