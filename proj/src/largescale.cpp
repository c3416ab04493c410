// SPDX-License-Identifier: Apache-2.0

#include "mumimo/largescale.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "mumimo/channel.hpp"
#include "mumimo/montecarlo.hpp"
#include "mumimo/parallel.hpp"

namespace mumimo {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;
constexpr std::uint64_t drop_domain = 0x64726f70;        // positions and large-scale draws
constexpr std::uint64_t calibration_domain = 0x63616c69; // calibration channel draws

} // namespace

BandProfile BandProfile::microwave() {
    BandProfile b;
    b.name = "microwave";
    b.alpha_los = 2.2;
    b.alpha_nlos = 3.67;
    b.shadow_std_los_db = 3.0;
    b.shadow_std_nlos_db = 4.0;
    b.k_mean_db = 9.0;
    b.k_std_db = 5.0;
    b.los_model = LosModel::threshold_exponential;
    return b;
}

BandProfile BandProfile::mmwave() {
    BandProfile b;
    b.name = "mmwave";
    b.alpha_los = 2.0;
    b.alpha_nlos = 2.92;
    b.shadow_std_los_db = 5.8;
    b.shadow_std_nlos_db = 8.7;
    b.k_mean_db = 12.0;
    b.k_std_db = 3.0;
    b.los_model = LosModel::exponential_decay;
    b.los_decay_length = 67.1;
    b.outage_probability = 0.0;
    return b;
}

std::optional<BandProfile> BandProfile::by_name(const std::string& name) {
    if (name == "microwave") {
        return microwave();
    }
    if (name == "mmwave") {
        return mmwave();
    }
    return std::nullopt;
}

void BandProfile::validate() const {
    auto fail = [&](const std::string& field) { throw ConfigError("band '" + name + "': invalid " + field); };
    if (!(alpha_los > 0.0)) fail("alpha_los");
    if (!(alpha_nlos > 0.0)) fail("alpha_nlos");
    if (!(shadow_std_los_db >= 0.0)) fail("shadow_std_los_db");
    if (!(shadow_std_nlos_db >= 0.0)) fail("shadow_std_nlos_db");
    if (!(k_std_db >= 0.0) || !std::isfinite(k_mean_db)) fail("k_mean_db/k_std_db");
    if (!(los_decay_length > 0.0)) fail("los_decay_length");
    if (!(outage_probability >= 0.0 && outage_probability <= 1.0)) fail("outage_probability");
}

void CellGeometry::validate() const {
    if (!(exclusion > 0.0 && exclusion < radius)) {
        throw ConfigError("cell geometry: need 0 < r_0 < R_c");
    }
}

double p_los(double r, const BandProfile& band) {
    if (!(r > 0.0)) {
        throw ConfigError("p_los: distance must be positive");
    }
    switch (band.los_model) {
    case LosModel::threshold_exponential: {
        const double e = std::exp(-r / 36.0);
        return std::min(18.0 / r, 1.0) * (1.0 - e) + e;
    }
    case LosModel::exponential_decay:
        return (1.0 - band.outage_probability) * std::exp(-r / band.los_decay_length);
    }
    return 0.0;
}

std::vector<TerminalPosition> drop_terminals(int count, const CellGeometry& geom, RandomStream& rng) {
    if (count < 1) {
        throw ConfigError("drop_terminals: terminal count must be >= 1");
    }
    geom.validate();
    const double r0sq = geom.exclusion * geom.exclusion;
    const double span = geom.radius * geom.radius - r0sq;
    std::vector<TerminalPosition> out(static_cast<std::size_t>(count));
    for (auto& p : out) {
        const double u = rng.uniform();
        p.distance = std::clamp(std::sqrt(r0sq + u * span), geom.exclusion, geom.radius);
        p.azimuth = two_pi * rng.uniform();
    }
    return out;
}

double link_gain(double varrho, double shadowing, double r0, double r, double alpha) {
    return varrho * shadowing * std::pow(r0 / r, alpha);
}

TerminalProfile make_terminal(const TerminalPosition& pos, const BandProfile& band, double varrho,
                              double angular_spread, const ArrayGeometry& array, const CellGeometry& geom,
                              const LargeScaleDraw& draw) {
    if (!(varrho > 0.0)) {
        throw ConfigError("realize_terminal: varrho must be positive");
    }
    TerminalProfile t;
    t.distance = pos.distance;
    t.is_los = draw.is_los;
    t.shadowing = db_to_linear(draw.shadowing_db);
    t.k_factor = draw.is_los ? db_to_linear(draw.k_db) : 0.0;
    t.los_angle = draw.los_angle;
    t.one_ring = OneRingParams(array.antennas, angular_spread, draw.ring_angle, array.spacing);
    const double alpha = draw.is_los ? band.alpha_los : band.alpha_nlos;
    t.link_gain = link_gain(varrho, t.shadowing, geom.exclusion, pos.distance, alpha);
    return t;
}

TerminalProfile realize_terminal(const TerminalPosition& pos, const BandProfile& band, double varrho,
                                 double angular_spread, const ArrayGeometry& array, const CellGeometry& geom,
                                 RandomStream& rng, const RealizeOptions& options) {
    LargeScaleDraw draw;
    draw.is_los = rng.uniform() < p_los(pos.distance, band);
    draw.shadowing_db = (draw.is_los ? band.shadow_std_los_db : band.shadow_std_nlos_db) * rng.normal();
    // Drawn for every link so the stream layout does not depend on the LoS outcome.
    const double k_db = band.k_mean_db + band.k_std_db * rng.normal();
    draw.k_db = k_db;
    draw.los_angle = two_pi * rng.uniform();
    const double ring = two_pi * rng.uniform();
    draw.ring_angle = options.tie_ring_to_los ? draw.los_angle : ring;
    return make_terminal(pos, band, varrho, angular_spread, array, geom, draw);
}

double KPolicy::apply(const TerminalProfile& t) const {
    switch (mode) {
    case Mode::statistical:
        return t.k_factor;
    case Mode::fixed:
        return std::pow(10.0, fixed_k_db / 10.0);
    case Mode::rayleigh:
        return 0.0;
    case Mode::pure_los:
        return std::numeric_limits<double>::infinity();
    }
    return t.k_factor;
}

std::vector<TerminalProfile> draw_drop(const DropSpec& spec, std::uint64_t seed, std::uint64_t drop_index) {
    spec.band.validate();
    spec.geometry.validate();
    const std::uint64_t drop_key = derive_key(derive_key(seed, drop_domain), drop_index);
    RandomStream position_rng(derive_key(drop_key, 0));
    const auto positions = drop_terminals(spec.terminals, spec.geometry, position_rng);
    std::vector<TerminalProfile> out;
    out.reserve(positions.size());
    for (std::size_t t = 0; t < positions.size(); ++t) {
        RandomStream rng(derive_key(drop_key, t + 1));
        auto profile = realize_terminal(positions[t], spec.band, spec.varrho, spec.angular_spread, spec.array,
                                        spec.geometry, rng, spec.realize);
        profile.k_factor = spec.k_policy.apply(profile);
        if (spec.correlation.equal) {
            profile.one_ring = OneRingParams(spec.array.antennas, spec.angular_spread, spec.correlation.fixed_angle,
                                             spec.array.spacing);
        }
        out.push_back(std::move(profile));
    }
    return out;
}

std::vector<TerminalProfile> with_varrho(std::vector<TerminalProfile> drop, double old_varrho, double new_varrho) {
    if (!(old_varrho > 0.0) || !(new_varrho > 0.0)) {
        throw ConfigError("with_varrho: varrho must be positive");
    }
    for (auto& t : drop) {
        t.link_gain *= new_varrho / old_varrho;
    }
    return drop;
}

double percentile(std::vector<double>& values, double pct) {
    if (values.empty()) {
        throw ConfigError("percentile: no samples");
    }
    const double h = (static_cast<double>(values.size()) - 1.0) * std::clamp(pct, 0.0, 100.0) / 100.0;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, values.size() - 1);
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(lo), values.end());
    const double v_lo = values[lo];
    if (hi == lo) {
        return v_lo;
    }
    const double v_hi = *std::min_element(values.begin() + static_cast<std::ptrdiff_t>(lo) + 1, values.end());
    return v_lo + (h - static_cast<double>(lo)) * (v_hi - v_lo);
}

namespace {

/// SINR(varrho) = rho varrho a / (b + rho varrho c) for a pooled sample drawn at varrho = 1.
struct SinrTerms {
    std::vector<double> signal;       // beta_l ||g_l||^4
    std::vector<double> noise;        // ||g_l||^2
    std::vector<double> interference; // sum_k beta_k |g_l^H g_k|^2

    std::vector<double> evaluate(CalibrationMetric metric, double rho, double varrho) const {
        std::vector<double> out(signal.size());
        const double s = rho * varrho;
        const double with_interference = metric == CalibrationMetric::sinr ? 1.0 : 0.0;
        for (std::size_t i = 0; i < out.size(); ++i) {
            out[i] = s * signal[i] / (noise[i] + with_interference * s * interference[i]);
        }
        return out;
    }
};

void validate(const CalibrationSpec& spec) {
    spec.band.validate();
    spec.geometry.validate();
    if (spec.antennas < 1 || spec.terminals < 1) {
        throw ConfigError("calibration: antenna and terminal counts must be >= 1");
    }
    if (spec.drops < 1 || spec.fading_per_drop < 1) {
        throw ConfigError("calibration: drop and fading counts must be >= 1");
    }
    if (!(spec.percentile > 0.0 && spec.percentile < 100.0)) {
        throw ConfigError("calibration: percentile must lie in (0, 100)");
    }
}

SinrTerms calibration_sample(const CalibrationSpec& spec, std::uint64_t seed) {
    validate(spec);
    DropSpec drop;
    drop.band = spec.band;
    drop.geometry = spec.geometry;
    drop.array = {spec.antennas, spec.spacing};
    drop.terminals = spec.terminals;
    drop.angular_spread = spec.angular_spread;
    drop.varrho = 1.0;
    drop.realize = spec.realize;

    const auto per_drop = static_cast<std::size_t>(spec.fading_per_drop) * static_cast<std::size_t>(spec.terminals);
    const auto total = per_drop * static_cast<std::size_t>(spec.drops);
    SinrTerms terms;
    terms.signal.resize(total);
    terms.noise.resize(total);
    terms.interference.resize(total);

    const std::uint64_t fading_seed = derive_key(seed, calibration_domain);
    for_each_index(static_cast<std::size_t>(spec.drops), [&](std::size_t d) {
        // Every drop has fresh angles, so the factors are built directly rather than cached.
        Scenario scenario({spec.antennas, spec.spacing, 1.0}, draw_drop(drop, seed, d), nullptr);
        ChannelSampler sampler(scenario);
        const auto gains = scenario.link_gains();
        ComplexMatrix g;
        ComplexMatrix gram;
        const std::uint64_t drop_seed = derive_key(fading_seed, d);
        for (int f = 0; f < spec.fading_per_drop; ++f) {
            sampler.sample(drop_seed, static_cast<std::uint64_t>(f), g);
            gram.noalias() = g.adjoint() * g;
            for (int l = 0; l < spec.terminals; ++l) {
                const std::size_t i = d * per_drop + static_cast<std::size_t>(f * spec.terminals + l);
                const double power = gram(l, l).real();
                double interference = 0.0;
                for (int k = 0; k < spec.terminals; ++k) {
                    if (k != l) {
                        interference += gains[static_cast<std::size_t>(k)] * std::norm(gram(l, k));
                    }
                }
                terms.signal[i] = gains[static_cast<std::size_t>(l)] * power * power;
                terms.noise[i] = power;
                terms.interference[i] = interference;
            }
        }
    });
    return terms;
}

double percentile_db(const SinrTerms& terms, CalibrationMetric metric, double rho, double varrho, double pct) {
    auto values = terms.evaluate(metric, rho, varrho);
    return 10.0 * std::log10(percentile(values, pct));
}

} // namespace

CalibrationResult calibrate_rho_constant(const CalibrationSpec& spec, std::uint64_t seed) {
    const auto terms = calibration_sample(spec, seed);
    const double rho = db_to_linear(spec.rho_db);
    const auto level = [&](double log_varrho) {
        return percentile_db(terms, spec.metric, rho, std::pow(10.0, log_varrho), spec.percentile);
    };

    double lo = -12.0;
    double hi = 12.0;
    const double at_lo = level(lo);
    const double at_hi = level(hi);
    if (!(at_lo <= spec.target_db && spec.target_db <= at_hi)) {
        throw ConfigError("calibration: cannot bracket the " + std::to_string(spec.percentile) + "th percentile " +
                          (spec.metric == CalibrationMetric::sinr ? "SINR" : "SNR") + " target of " +
                          std::to_string(spec.target_db) +
                          " dB within varrho in [1e-12, 1e12] (percentile spans " + std::to_string(at_lo) + " .. " +
                          std::to_string(at_hi) + " dB)");
    }
    CalibrationResult result;
    result.samples = terms.signal.size();
    double mid = 0.5 * (lo + hi);
    double at_mid = level(mid);
    for (result.iterations = 1; result.iterations < 200; ++result.iterations) {
        if (std::abs(at_mid - spec.target_db) < 1e-4 || hi - lo < 1e-12) {
            break;
        }
        if (at_mid < spec.target_db) {
            lo = mid;
        } else {
            hi = mid;
        }
        mid = 0.5 * (lo + hi);
        at_mid = level(mid);
    }
    result.varrho = std::pow(10.0, mid);
    result.achieved_db = at_mid;
    return result;
}

double sinr_percentile_db(const CalibrationSpec& spec, double varrho, std::uint64_t seed) {
    const auto terms = calibration_sample(spec, seed);
    return percentile_db(terms, spec.metric, db_to_linear(spec.rho_db), varrho, spec.percentile);
}

} // namespace mumimo
