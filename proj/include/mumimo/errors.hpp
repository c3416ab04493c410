// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace mumimo {

/// Invalid user-facing configuration (bad parameter, unbracketable calibration).
class ConfigError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Internal numerical failure: non-convergence, loss of Hermitian symmetry, non-PSD input.
class NumericalError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

} // namespace mumimo
