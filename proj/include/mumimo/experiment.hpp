// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mumimo/largescale.hpp"
#include "mumimo/montecarlo.hpp"

namespace mumimo {

/// Process exit codes of the command-line tool.
enum class ExitCode : int {
    success = 0,
    invalid_config = 1,
    validation_failure = 2,
    numerical_error = 3,
};

/// Resolved experiment definition. Angles are degrees and SNR/K are dB here; everything is
/// converted to radians / linear units when a DropSpec or Scenario is built.
struct ExperimentConfig {
    std::string band_name = "microwave";
    BandProfile band = BandProfile::microwave();
    CellGeometry geometry;
    int antennas = 32;
    int terminals = 3;
    std::vector<double> rho_db{-10, -5, 0, 5, 10, 15, 20, 25, 30};
    double cdf_rho_db = 10.0;
    double delta_deg = 20.0;
    double spacing = 0.5;
    bool equal_correlation = false;
    double equal_phi_deg = 11.25;
    KPolicy k_policy;
    bool tie_ring_to_los = false;
    std::size_t trials = 100000;
    std::size_t drops = 500;
    std::size_t fading_trials = 200;
    std::size_t drop_index = 0;
    std::uint64_t seed = 1;
    std::optional<double> varrho; ///< linear; unset means calibrate (or read varrho_file)
    std::optional<std::string> varrho_file;
    CalibrationSpec calibration;
    std::size_t replay_drops = 50000;
    int replay_fading = 2;

    /// Throws ConfigError naming the offending field.
    void validate() const;

    DropSpec drop_spec(double varrho) const;
    CalibrationSpec calibration_spec() const;

    nlohmann::json to_json() const;
    /// Fields absent from `j` keep their defaults. Unknown fields are rejected.
    static ExperimentConfig from_json(const nlohmann::json& j);
};

/// Sidecar written by `calibrate`, readable through `varrho_file`.
struct CalibrationRecord {
    CalibrationResult result;
    std::optional<double> replay_db;
    nlohmann::json to_json(const ExperimentConfig& config) const;
};

CalibrationRecord run_calibrate(const ExperimentConfig& config);

/// Explicit value, sidecar file, or a fresh calibration, in that order.
double resolve_varrho(const ExperimentConfig& config);

struct SweepRow {
    double rho_db;
    std::size_t terminal;
    double sinr_analytic;
    EstimatorOutput sinr_sim;
    double sumse_analytic;
    EstimatorOutput sumse_sim;
};

std::vector<SweepRow> sinr_sweep_rows(const ExperimentConfig& config, double varrho);

/// Writes the sinr-sweep CSV (with '#' config comments) and returns its rows.
std::vector<SweepRow> run_sinr_sweep(const ExperimentConfig& config, std::ostream& csv);

struct SumSeSamples {
    std::vector<double> analytic;  ///< one closed-form value per drop
    std::vector<double> simulated; ///< one fading-averaged value per drop
};

SumSeSamples sum_se_samples(const ExperimentConfig& config, double varrho);

SumSeSamples run_sum_se_cdf(const ExperimentConfig& config, std::ostream& csv);

struct ValidationCheck {
    std::string name;
    double measured;
    double tolerance;
    bool passed;
    std::string detail;
};

struct ValidationOptions {
    /// Replays the printed eta/gamma assignment of the moment formulas; the oracle must reject it.
    bool inject_printed_moments = false;
    std::size_t correlation_matrices = 200;
    std::size_t corollary_instances = 100;
};

std::vector<ValidationCheck> run_validate(const ExperimentConfig& config, const ValidationOptions& options,
                                          std::ostream& report);

/// printf-style "%.12g".
std::string format_number(double v);

} // namespace mumimo
