// SPDX-License-Identifier: Apache-2.0

#include "mumimo/channel.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace mumimo {

RiceMix rice_mix(double k_factor) {
    if (!(k_factor >= 0.0)) {
        throw ConfigError("rice_mix: K-factor must be >= 0, got " + std::to_string(k_factor));
    }
    if (std::isinf(k_factor)) {
        return {1.0, 0.0};
    }
    return {std::sqrt(k_factor / (k_factor + 1.0)), std::sqrt(1.0 / (k_factor + 1.0))};
}

ComplexVector steering(double angle, int antennas, double spacing) {
    if (antennas < 1) {
        throw ConfigError("steering: antenna count must be >= 1");
    }
    const double step = 2.0 * std::numbers::pi * spacing * std::cos(angle);
    ComplexVector v(antennas);
    for (int m = 0; m < antennas; ++m) {
        v[m] = std::polar(1.0, step * m);
    }
    return v;
}

void synthesize_into(Eigen::Ref<ComplexVector> out, const RiceMix& mix, const ComplexVector& los,
                     const HermitianMatrix& r_sqrt, RandomStream& rng, ComplexVector& scratch) {
    const auto m = r_sqrt.dim();
    if (los.size() != m || out.size() != m) {
        throw NumericalError("synthesize: dimension mismatch (steering " + std::to_string(los.size()) + ", R^1/2 " +
                             std::to_string(m) + ", output " + std::to_string(out.size()) + ")");
    }
    scratch.resize(m);
    fill_cn(scratch, rng);
    out.noalias() = r_sqrt.matrix() * scratch;
    out *= mix.gamma;
    out += mix.eta * los;
}

ComplexVector synthesize(const TerminalProfile& profile, const HermitianMatrix& r_sqrt, RandomStream& rng) {
    if (r_sqrt.dim() != profile.one_ring.antennas()) {
        throw NumericalError("synthesize: profile has " + std::to_string(profile.one_ring.antennas()) +
                             " antennas but R^1/2 is " + std::to_string(r_sqrt.dim()) + "-dimensional");
    }
    const auto los = steering(profile.los_angle, profile.one_ring.antennas(), profile.one_ring.spacing());
    ComplexVector out(r_sqrt.dim());
    ComplexVector scratch;
    synthesize_into(out, rice_mix(profile.k_factor), los, r_sqrt, rng, scratch);
    return out;
}

} // namespace mumimo
