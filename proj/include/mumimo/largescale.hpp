// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mumimo/correlation.hpp"
#include "mumimo/rng.hpp"

namespace mumimo {

enum class LosModel {
    threshold_exponential, ///< min(18/r, 1)(1 - e^{-r/36}) + e^{-r/36}
    exponential_decay,     ///< (1 - P_out) e^{-r / los_decay_length}
};

/// Large-scale propagation parameters of one frequency band.
struct BandProfile {
    std::string name;
    double alpha_los = 2.0;
    double alpha_nlos = 3.0;
    double shadow_std_los_db = 0.0;
    double shadow_std_nlos_db = 0.0;
    double k_mean_db = 0.0; ///< 10 log10(K) ~ N(k_mean_db, k_std_db^2) for LoS links
    double k_std_db = 0.0;
    LosModel los_model = LosModel::threshold_exponential;
    double los_decay_length = 67.1; ///< metres, exponential_decay only
    double outage_probability = 0.0;

    /// 2 GHz UMi.
    static BandProfile microwave();
    /// 28 GHz UMi.
    static BandProfile mmwave();
    static std::optional<BandProfile> by_name(const std::string& name);

    void validate() const;
};

struct CellGeometry {
    double radius = 100.0;    ///< R_c, metres
    double exclusion = 10.0;  ///< r_0, metres; also the path-loss reference distance

    void validate() const;
};

/// Antenna array shared by every terminal of a scenario.
struct ArrayGeometry {
    int antennas = 64;
    double spacing = 0.5; ///< wavelengths
};

struct TerminalPosition {
    double distance; ///< metres
    double azimuth;  ///< radians in [0, 2pi)
};

/// Everything the fast-fading model needs to know about one terminal.
struct TerminalProfile {
    double distance = 0.0;
    bool is_los = false;
    double k_factor = 0.0; ///< linear; +inf means a pure LoS link
    double link_gain = 0.0;
    double los_angle = 0.0; ///< azimuth of the LoS ray
    OneRingParams one_ring{1, 1.0, 0.0};
    double shadowing = 1.0; ///< linear zeta
};

/// LoS probability at distance `r` (metres). P_NLoS is its complement.
double p_los(double r, const BandProfile& band);

/// Area-uniform positions in the annulus [r_0, R_c].
std::vector<TerminalPosition> drop_terminals(int count, const CellGeometry& geom, RandomStream& rng);

/// varrho * zeta * (r_0 / r)^alpha
double link_gain(double varrho, double shadowing, double r0, double r, double alpha);

/// Explicit large-scale draws; realize_terminal samples one of these.
struct LargeScaleDraw {
    bool is_los = false;
    double shadowing_db = 0.0;
    double k_db = 0.0;         ///< ignored when !is_los
    double los_angle = 0.0;
    double ring_angle = 0.0;
};

TerminalProfile make_terminal(const TerminalPosition& pos, const BandProfile& band, double varrho,
                              double angular_spread, const ArrayGeometry& array, const CellGeometry& geom,
                              const LargeScaleDraw& draw);

struct RealizeOptions {
    bool tie_ring_to_los = false; ///< use the LoS azimuth as the one-ring central angle
};

/// Samples LoS state, shadowing, K and both angles, then builds the profile.
/// NLoS links get K = 0.
TerminalProfile realize_terminal(const TerminalPosition& pos, const BandProfile& band, double varrho,
                                 double angular_spread, const ArrayGeometry& array, const CellGeometry& geom,
                                 RandomStream& rng, const RealizeOptions& options = {});

/// How K-factors are assigned across a drop.
struct KPolicy {
    enum class Mode { statistical, fixed, rayleigh, pure_los };
    Mode mode = Mode::statistical;
    double fixed_k_db = 5.0;

    double apply(const TerminalProfile& t) const;
};

/// How one-ring central angles are assigned across a drop.
struct CorrelationPolicy {
    bool equal = false;
    double fixed_angle = 0.19634954084936207; ///< pi/16, used when equal
};

struct DropSpec {
    BandProfile band = BandProfile::microwave();
    CellGeometry geometry;
    ArrayGeometry array;
    int terminals = 4;
    double angular_spread = 0.3490658503988659; ///< 20 degrees
    double varrho = 1.0;
    KPolicy k_policy;
    CorrelationPolicy correlation;
    RealizeOptions realize;
};

/// One full drop, deterministic in (seed, drop_index). Terminal t draws from its own substream.
std::vector<TerminalProfile> draw_drop(const DropSpec& spec, std::uint64_t seed, std::uint64_t drop_index);

/// Returns `drop` with every link gain scaled to a new varrho.
std::vector<TerminalProfile> with_varrho(std::vector<TerminalProfile> drop, double old_varrho, double new_varrho);

/// Quantity whose percentile the calibration pins.
enum class CalibrationMetric {
    snr,  ///< interference-free rho beta ||g||^2 (the default; always attainable)
    sinr, ///< full MRC SINR; saturates with varrho, so the target may be unreachable
};

struct CalibrationSpec {
    BandProfile band = BandProfile::microwave();
    CellGeometry geometry;
    int antennas = 64;
    int terminals = 4;
    double spacing = 0.5;
    double angular_spread = 0.3490658503988659;
    double rho_db = 0.0;
    double target_db = 0.0;
    double percentile = 5.0;
    int drops = 20000;
    int fading_per_drop = 20;
    CalibrationMetric metric = CalibrationMetric::snr;
    RealizeOptions realize;
};

struct CalibrationResult {
    double varrho = 0.0;
    double achieved_db = 0.0; ///< percentile of the calibration sample at varrho
    int iterations = 0;
    std::size_t samples = 0;
};

/// Bisection (in log varrho over [1e-12, 1e12]) on the pooled per-terminal percentile of the
/// calibration metric. Channels are drawn once at varrho = 1 and reused at every step.
/// Throws ConfigError if the target cannot be bracketed.
CalibrationResult calibrate_rho_constant(const CalibrationSpec& spec, std::uint64_t seed);

/// Percentile (dB) of the pooled calibration metric at a given varrho on a fresh sample.
double sinr_percentile_db(const CalibrationSpec& spec, double varrho, std::uint64_t seed);

/// Linear-interpolated percentile (0..100) of unsorted data; reorders `values`.
double percentile(std::vector<double>& values, double pct);

} // namespace mumimo
