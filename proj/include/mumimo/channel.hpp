// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "mumimo/largescale.hpp"
#include "mumimo/numerics.hpp"

namespace mumimo {

/// Amplitude weights of the LoS (eta) and scattered (gamma) parts; eta^2 + gamma^2 = 1.
struct RiceMix {
    double eta = 0.0;
    double gamma = 1.0;
};

/// K >= 0, linear. K = +inf gives the pure LoS mix (1, 0). Throws ConfigError for K < 0 or NaN.
RiceMix rice_mix(double k_factor);

/// ULA response, entry m = exp(j 2 pi d m cos(angle)).
ComplexVector steering(double angle, int antennas, double spacing);

/// g = eta * steering + gamma * R^{1/2} h, h ~ CN(0, I). Always consumes M complex normals.
ComplexVector synthesize(const TerminalProfile& profile, const HermitianMatrix& r_sqrt, RandomStream& rng);

/// Allocation-free form for inner loops. `los` is the terminal's steering vector and
/// `scratch` has length M.
void synthesize_into(Eigen::Ref<ComplexVector> out, const RiceMix& mix, const ComplexVector& los,
                     const HermitianMatrix& r_sqrt, RandomStream& rng, ComplexVector& scratch);

} // namespace mumimo
