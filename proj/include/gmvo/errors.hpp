#pragma once

#include <stdexcept>
#include <string>

namespace gmvo {

/// Bad user input: malformed files, violated preconditions, inconsistent
/// configuration. The CLI maps these to exit code 1.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Training produced a non-finite loss. Carries the batch seed so the
/// failing epoch can be replayed.
struct DivergenceError : std::runtime_error {
  explicit DivergenceError(const std::string& what, std::uint64_t batch_seed)
      : std::runtime_error(what), batch_seed(batch_seed) {}
  std::uint64_t batch_seed;
};

}  // namespace gmvo
