#pragma once

#include <stdexcept>
#include <string>

namespace toruscope {

// Malformed or inconsistent input (bad file, bad schema, bad arguments).
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A computation that cannot proceed (divergence, degenerate data, overflow).
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace toruscope
