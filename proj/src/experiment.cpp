// SPDX-License-Identifier: Apache-2.0

#include "mumimo/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "mumimo/analytic.hpp"
#include "mumimo/channel.hpp"

namespace mumimo {

using nlohmann::json;

namespace {

constexpr double deg = std::numbers::pi / 180.0;
constexpr std::uint64_t calibration_key = 0x63616c;
constexpr std::uint64_t replay_key = 0x72706c;
constexpr std::uint64_t sweep_key = 0x737770;
constexpr std::uint64_t cdf_key = 0x636466;
constexpr std::uint64_t validate_key = 0x766c64;

template <class T>
T field(const json& j, const std::string& key) {
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError("config field '" + key + "': " + e.what());
    }
}

std::string los_model_name(LosModel m) {
    return m == LosModel::threshold_exponential ? "threshold-exponential" : "exponential-decay";
}

json band_to_json(const BandProfile& b) {
    return {{"alpha_los", b.alpha_los},
            {"alpha_nlos", b.alpha_nlos},
            {"shadow_std_los_db", b.shadow_std_los_db},
            {"shadow_std_nlos_db", b.shadow_std_nlos_db},
            {"k_mean_db", b.k_mean_db},
            {"k_std_db", b.k_std_db},
            {"los_model", los_model_name(b.los_model)},
            {"los_decay_length", b.los_decay_length},
            {"outage_probability", b.outage_probability}};
}

BandProfile band_from_json(const json& j) {
    BandProfile b;
    b.name = "custom";
    for (const auto& [key, value] : j.items()) {
        const json one{{key, value}};
        const std::string path = "custom_band." + key;
        auto number = [&] {
            try {
                return value.get<double>();
            } catch (const json::exception& e) {
                throw ConfigError("config field '" + path + "': " + e.what());
            }
        };
        if (key == "alpha_los") b.alpha_los = number();
        else if (key == "alpha_nlos") b.alpha_nlos = number();
        else if (key == "shadow_std_los_db") b.shadow_std_los_db = number();
        else if (key == "shadow_std_nlos_db") b.shadow_std_nlos_db = number();
        else if (key == "k_mean_db") b.k_mean_db = number();
        else if (key == "k_std_db") b.k_std_db = number();
        else if (key == "los_decay_length") b.los_decay_length = number();
        else if (key == "outage_probability") b.outage_probability = number();
        else if (key == "los_model") {
            const auto name = field<std::string>(one, key);
            if (name == "threshold-exponential") b.los_model = LosModel::threshold_exponential;
            else if (name == "exponential-decay") b.los_model = LosModel::exponential_decay;
            else throw ConfigError("config field '" + path + "': unknown model '" + name + "'");
        } else {
            throw ConfigError("config field '" + path + "': unknown field");
        }
    }
    return b;
}

std::string k_mode_name(KPolicy::Mode m) {
    switch (m) {
    case KPolicy::Mode::statistical: return "statistical";
    case KPolicy::Mode::fixed: return "fixed";
    case KPolicy::Mode::rayleigh: return "rayleigh";
    case KPolicy::Mode::pure_los: return "pure_los";
    }
    return "statistical";
}

void write_comment_header(std::ostream& os, const std::string& command, const ExperimentConfig& config,
                          double varrho, const std::vector<std::string>& extra) {
    os << "# mumimo " << command << "\n";
    os << "# config: " << config.to_json().dump() << "\n";
    os << "# band_parameters: " << band_to_json(config.band).dump() << "\n";
    os << "# varrho: " << format_number(varrho) << " linear, " << format_number(linear_to_db(varrho)) << " dB\n";
    for (const auto& line : extra) {
        os << "# " << line << "\n";
    }
}

} // namespace

std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

// ---------------------------------------------------------------------------- config

void ExperimentConfig::validate() const {
    auto fail = [](const std::string& f, const std::string& why) {
        throw ConfigError("config field '" + f + "': " + why);
    };
    band.validate();
    geometry.validate();
    if (antennas < 1) fail("antennas", "must be >= 1");
    if (terminals < 1) fail("terminals", "must be >= 1");
    if (rho_db.empty()) fail("rho_db", "sweep must be nonempty");
    for (double r : rho_db) {
        if (!std::isfinite(r)) fail("rho_db", "values must be finite");
    }
    if (!std::isfinite(cdf_rho_db)) fail("cdf_rho_db", "must be finite");
    if (!(delta_deg > 0.0 && delta_deg <= 360.0)) fail("delta_deg", "must lie in (0, 360]");
    if (!(spacing > 0.0) || !std::isfinite(spacing)) fail("spacing", "must be positive");
    if (!std::isfinite(equal_phi_deg)) fail("equal_phi_deg", "must be finite");
    if (!std::isfinite(k_policy.fixed_k_db)) fail("k_db", "must be finite");
    if (trials < min_estimator_trials) fail("trials", "must be >= 100");
    if (fading_trials < min_estimator_trials) fail("fading_trials", "must be >= 100");
    if (drops < 1) fail("drops", "must be >= 1");
    if (varrho && !(*varrho > 0.0 && std::isfinite(*varrho))) fail("varrho", "must be positive");
    if (calibration.antennas < 1) fail("calibration.antennas", "must be >= 1");
    if (calibration.terminals < 1) fail("calibration.terminals", "must be >= 1");
    if (calibration.drops < 1) fail("calibration.drops", "must be >= 1");
    if (calibration.fading_per_drop < 1) fail("calibration.fading", "must be >= 1");
    if (!(calibration.percentile > 0.0 && calibration.percentile < 100.0)) {
        fail("calibration.percentile", "must lie in (0, 100)");
    }
    if (replay_fading < 1) fail("replay_fading", "must be >= 1");
    // Throws for spreads below the one-ring minimum.
    OneRingParams(antennas, delta_deg * deg, 0.0, spacing);
}

DropSpec ExperimentConfig::drop_spec(double varrho_value) const {
    DropSpec spec;
    spec.band = band;
    spec.geometry = geometry;
    spec.array = {antennas, spacing};
    spec.terminals = terminals;
    spec.angular_spread = delta_deg * deg;
    spec.varrho = varrho_value;
    spec.k_policy = k_policy;
    spec.correlation.equal = equal_correlation;
    spec.correlation.fixed_angle = equal_phi_deg * deg;
    spec.realize.tie_ring_to_los = tie_ring_to_los;
    return spec;
}

CalibrationSpec ExperimentConfig::calibration_spec() const {
    CalibrationSpec spec = calibration;
    spec.band = band;
    spec.geometry = geometry;
    spec.spacing = spacing;
    spec.angular_spread = delta_deg * deg;
    spec.realize.tie_ring_to_los = tie_ring_to_los;
    return spec;
}

json ExperimentConfig::to_json() const {
    json j;
    j["band"] = band_name;
    if (band_name == "custom") {
        j["custom_band"] = band_to_json(band);
    }
    j["cell"] = {{"radius", geometry.radius}, {"exclusion", geometry.exclusion}};
    j["antennas"] = antennas;
    j["terminals"] = terminals;
    j["rho_db"] = rho_db;
    j["cdf_rho_db"] = cdf_rho_db;
    j["delta_deg"] = delta_deg;
    j["spacing"] = spacing;
    j["correlation"] = equal_correlation ? "equal" : "unequal";
    j["equal_phi_deg"] = equal_phi_deg;
    j["k_mode"] = k_mode_name(k_policy.mode);
    j["k_db"] = k_policy.fixed_k_db;
    j["tie_ring_to_los"] = tie_ring_to_los;
    j["trials"] = trials;
    j["drops"] = drops;
    j["fading_trials"] = fading_trials;
    j["drop_index"] = drop_index;
    j["seed"] = seed;
    if (varrho) {
        j["varrho"] = *varrho;
    } else if (varrho_file) {
        j["varrho_file"] = *varrho_file;
    } else {
        j["varrho"] = "calibrate";
    }
    j["calibration"] = {{"antennas", calibration.antennas},
                        {"terminals", calibration.terminals},
                        {"drops", calibration.drops},
                        {"fading", calibration.fading_per_drop},
                        {"rho_db", calibration.rho_db},
                        {"target_db", calibration.target_db},
                        {"percentile", calibration.percentile},
                        {"metric", calibration.metric == CalibrationMetric::snr ? "snr" : "sinr"}};
    j["replay_drops"] = replay_drops;
    j["replay_fading"] = replay_fading;
    return j;
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
    if (!j.is_object()) {
        throw ConfigError("config: expected a JSON object");
    }
    ExperimentConfig c;
    std::optional<json> custom;
    for (const auto& [key, value] : j.items()) {
        if (key == "band") c.band_name = field<std::string>(j, key);
        else if (key == "custom_band") custom = value;
        else if (key == "cell") {
            for (const auto& [ck, cv] : value.items()) {
                if (ck == "radius") c.geometry.radius = field<double>(value, ck);
                else if (ck == "exclusion") c.geometry.exclusion = field<double>(value, ck);
                else throw ConfigError("config field 'cell." + ck + "': unknown field");
            }
        } else if (key == "antennas") c.antennas = field<int>(j, key);
        else if (key == "terminals") c.terminals = field<int>(j, key);
        else if (key == "rho_db") c.rho_db = field<std::vector<double>>(j, key);
        else if (key == "cdf_rho_db") c.cdf_rho_db = field<double>(j, key);
        else if (key == "delta_deg") c.delta_deg = field<double>(j, key);
        else if (key == "spacing") c.spacing = field<double>(j, key);
        else if (key == "correlation") {
            const auto mode = field<std::string>(j, key);
            if (mode != "equal" && mode != "unequal") {
                throw ConfigError("config field 'correlation': expected 'equal' or 'unequal'");
            }
            c.equal_correlation = mode == "equal";
        } else if (key == "equal_phi_deg") c.equal_phi_deg = field<double>(j, key);
        else if (key == "k_mode") {
            const auto mode = field<std::string>(j, key);
            if (mode == "statistical") c.k_policy.mode = KPolicy::Mode::statistical;
            else if (mode == "fixed") c.k_policy.mode = KPolicy::Mode::fixed;
            else if (mode == "rayleigh") c.k_policy.mode = KPolicy::Mode::rayleigh;
            else if (mode == "pure_los") c.k_policy.mode = KPolicy::Mode::pure_los;
            else throw ConfigError("config field 'k_mode': unknown mode '" + mode + "'");
        } else if (key == "k_db") c.k_policy.fixed_k_db = field<double>(j, key);
        else if (key == "tie_ring_to_los") c.tie_ring_to_los = field<bool>(j, key);
        else if (key == "trials") c.trials = field<std::size_t>(j, key);
        else if (key == "drops") c.drops = field<std::size_t>(j, key);
        else if (key == "fading_trials") c.fading_trials = field<std::size_t>(j, key);
        else if (key == "drop_index") c.drop_index = field<std::size_t>(j, key);
        else if (key == "seed") c.seed = field<std::uint64_t>(j, key);
        else if (key == "varrho") {
            if (value.is_string()) {
                if (value.get<std::string>() != "calibrate") {
                    throw ConfigError("config field 'varrho': expected a number or \"calibrate\"");
                }
                c.varrho.reset();
            } else {
                c.varrho = field<double>(j, key);
            }
        } else if (key == "varrho_db") c.varrho = db_to_linear(field<double>(j, key));
        else if (key == "varrho_file") c.varrho_file = field<std::string>(j, key);
        else if (key == "calibration") {
            for (const auto& [ck, cv] : value.items()) {
                const std::string path = "calibration." + ck;
                try {
                    if (ck == "antennas") c.calibration.antennas = cv.get<int>();
                    else if (ck == "terminals") c.calibration.terminals = cv.get<int>();
                    else if (ck == "drops") c.calibration.drops = cv.get<int>();
                    else if (ck == "fading") c.calibration.fading_per_drop = cv.get<int>();
                    else if (ck == "rho_db") c.calibration.rho_db = cv.get<double>();
                    else if (ck == "target_db") c.calibration.target_db = cv.get<double>();
                    else if (ck == "percentile") c.calibration.percentile = cv.get<double>();
                    else if (ck == "metric") {
                        const auto m = cv.get<std::string>();
                        if (m == "snr") c.calibration.metric = CalibrationMetric::snr;
                        else if (m == "sinr") c.calibration.metric = CalibrationMetric::sinr;
                        else throw ConfigError("config field '" + path + "': expected 'snr' or 'sinr'");
                    } else throw ConfigError("config field '" + path + "': unknown field");
                } catch (const json::exception& e) {
                    throw ConfigError("config field '" + path + "': " + e.what());
                }
            }
        } else if (key == "replay_drops") c.replay_drops = field<std::size_t>(j, key);
        else if (key == "replay_fading") c.replay_fading = field<int>(j, key);
        else throw ConfigError("config field '" + key + "': unknown field");
    }
    if (c.band_name == "custom") {
        if (!custom) {
            throw ConfigError("config field 'custom_band': required when band is 'custom'");
        }
        c.band = band_from_json(*custom);
    } else if (auto b = BandProfile::by_name(c.band_name)) {
        if (custom) {
            throw ConfigError("config field 'custom_band': only allowed when band is 'custom'");
        }
        c.band = *b;
    } else {
        throw ConfigError("config field 'band': unknown band '" + c.band_name + "'");
    }
    return c;
}

// ---------------------------------------------------------------------------- calibrate

json CalibrationRecord::to_json(const ExperimentConfig& config) const {
    json j{{"band", config.band_name},
           {"delta_deg", config.delta_deg},
           {"seed", config.seed},
           {"varrho", result.varrho},
           {"varrho_db", linear_to_db(result.varrho)},
           {"achieved_percentile_db", result.achieved_db},
           {"iterations", result.iterations},
           {"samples", result.samples},
           {"calibration", config.to_json()["calibration"]}};
    if (replay_db) {
        j["replay_percentile_db"] = *replay_db;
        j["replay_drops"] = config.replay_drops;
        j["replay_fading"] = config.replay_fading;
    }
    return j;
}

CalibrationRecord run_calibrate(const ExperimentConfig& config) {
    config.validate();
    CalibrationRecord record;
    const auto spec = config.calibration_spec();
    record.result = calibrate_rho_constant(spec, derive_key(config.seed, calibration_key));
    if (config.replay_drops > 0) {
        auto replay = spec;
        replay.drops = static_cast<int>(config.replay_drops);
        replay.fading_per_drop = config.replay_fading;
        record.replay_db = sinr_percentile_db(replay, record.result.varrho, derive_key(config.seed, replay_key));
    }
    return record;
}

double resolve_varrho(const ExperimentConfig& config) {
    if (config.varrho) {
        return *config.varrho;
    }
    if (config.varrho_file) {
        std::ifstream in(*config.varrho_file);
        if (!in) {
            throw ConfigError("config field 'varrho_file': cannot open '" + *config.varrho_file + "'");
        }
        json j;
        try {
            in >> j;
        } catch (const json::exception& e) {
            throw ConfigError("config field 'varrho_file': " + std::string(e.what()));
        }
        const auto v = field<double>(j, "varrho");
        if (!(v > 0.0)) {
            throw ConfigError("config field 'varrho_file': stored varrho must be positive");
        }
        return v;
    }
    return calibrate_rho_constant(config.calibration_spec(), derive_key(config.seed, calibration_key)).varrho;
}

// ---------------------------------------------------------------------------- sinr-sweep

std::vector<SweepRow> sinr_sweep_rows(const ExperimentConfig& config, double varrho) {
    config.validate();
    const auto profiles = draw_drop(config.drop_spec(varrho), config.seed, config.drop_index);
    const Scenario scenario({config.antennas, config.spacing, 1.0}, profiles);
    const auto inputs = scenario.analytic_inputs();
    std::vector<double> rho(config.rho_db.size());
    std::transform(config.rho_db.begin(), config.rho_db.end(), rho.begin(), db_to_linear);
    const auto sim = estimate_sinr_sweep(scenario, rho, config.trials, derive_key(config.seed, sweep_key));

    std::vector<SweepRow> rows;
    for (std::size_t r = 0; r < rho.size(); ++r) {
        const auto analytic = expected_sinr_all(inputs, rho[r]);
        const double sumse = sum_se_approx(inputs, rho[r]);
        for (std::size_t l = 0; l < scenario.size(); ++l) {
            rows.push_back({config.rho_db[r], l, analytic[l], sim.sinr[r][l], sumse, sim.sum_se[r]});
        }
    }
    std::stable_sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
        return a.rho_db != b.rho_db ? a.rho_db < b.rho_db : a.terminal < b.terminal;
    });
    return rows;
}

std::vector<SweepRow> run_sinr_sweep(const ExperimentConfig& config, std::ostream& csv) {
    config.validate();
    const double varrho = resolve_varrho(config);
    auto rows = sinr_sweep_rows(config, varrho);
    write_comment_header(csv, "sinr-sweep", config, varrho,
                         {"estimator: " + std::to_string(config.trials) +
                              " fading trials per rho point (shared across points); 95% normal-approximation half-widths",
                          "units: rho_db, sinr_analytic_db, sinr_sim_db, sinr_sim_halfwidth_db in dB "
                          "(half-width = 10log10(mean+hw) - 10log10(mean)); sumse_* in bits/s/Hz"});
    csv << "rho_db,terminal,sinr_analytic_db,sinr_sim_db,sinr_sim_halfwidth_db,sumse_analytic,sumse_sim,"
           "sumse_sim_halfwidth\n";
    for (const auto& row : rows) {
        const double sim_db = linear_to_db(row.sinr_sim.mean);
        const double hw_db = linear_to_db(row.sinr_sim.mean + row.sinr_sim.half_width_95) - sim_db;
        csv << format_number(row.rho_db) << ',' << row.terminal << ',' << format_number(linear_to_db(row.sinr_analytic))
            << ',' << format_number(sim_db) << ',' << format_number(hw_db) << ',' << format_number(row.sumse_analytic)
            << ',' << format_number(row.sumse_sim.mean) << ',' << format_number(row.sumse_sim.half_width_95) << '\n';
    }
    return rows;
}

// ---------------------------------------------------------------------------- sum-se-cdf

SumSeSamples sum_se_samples(const ExperimentConfig& config, double varrho) {
    config.validate();
    const auto spec = config.drop_spec(varrho);
    const double rho = db_to_linear(config.cdf_rho_db);
    const std::uint64_t fading_seed = derive_key(config.seed, cdf_key);
    // Unequal correlation draws fresh angles per drop, so memoizing would only churn.
    OneRingCache* cache = config.equal_correlation ? &default_one_ring_cache() : nullptr;
    SumSeSamples out;
    out.analytic.resize(config.drops);
    out.simulated.resize(config.drops);
    for_each_index(config.drops, [&](std::size_t d) {
        const Scenario scenario({config.antennas, config.spacing, rho}, draw_drop(spec, config.seed, d), cache);
        out.analytic[d] = sum_se_approx(scenario.analytic_inputs(), rho);
        out.simulated[d] = ergodic_sum_se(scenario, config.fading_trials, derive_key(fading_seed, d)).mean;
    });
    return out;
}

SumSeSamples run_sum_se_cdf(const ExperimentConfig& config, std::ostream& csv) {
    config.validate();
    const double varrho = resolve_varrho(config);
    auto samples = sum_se_samples(config, varrho);
    write_comment_header(csv, "sum-se-cdf", config, varrho,
                         {"estimator: " + std::to_string(config.drops) + " drops x " +
                              std::to_string(config.fading_trials) + " fading trials per drop at rho = " +
                              format_number(config.cdf_rho_db) + " dB",
                          "units: sum_se_bits in bits/s/Hz; cdf_level is P(sum SE <= value)"});
    csv << "pipeline,sum_se_bits,cdf_level\n";
    for (const auto& [name, values] : {std::pair{"analytic", &samples.analytic}, std::pair{"simulated", &samples.simulated}}) {
        for (const auto& p : empirical_cdf(*values)) {
            csv << name << ',' << format_number(p.value) << ',' << format_number(p.level) << '\n';
        }
    }
    return samples;
}

// ---------------------------------------------------------------------------- validate

namespace {

struct Checker {
    std::vector<ValidationCheck> checks;

    /// Passes when measured <= tolerance.
    void at_most(std::string name, double measured, double tolerance, std::string detail = {}) {
        const bool ok = std::isfinite(measured) && measured <= tolerance;
        checks.push_back({std::move(name), measured, tolerance, ok, std::move(detail)});
    }
};

OneRingParams random_ring(RandomStream& rng, int antennas) {
    const double spread = 1e-3 + rng.uniform() * (2.0 * std::numbers::pi - 1e-3);
    const double spacing = 0.25 + 1.25 * rng.uniform();
    return OneRingParams(antennas, spread, 2.0 * std::numbers::pi * rng.uniform(), spacing);
}

TerminalProfile random_terminal(RandomStream& rng, int antennas, double k_factor) {
    TerminalProfile t;
    t.k_factor = k_factor;
    t.link_gain = 0.2 + 2.0 * rng.uniform();
    t.los_angle = 2.0 * std::numbers::pi * rng.uniform();
    t.is_los = k_factor > 0.0;
    t.one_ring = OneRingParams(antennas, (10.0 + 110.0 * rng.uniform()) * deg, 2.0 * std::numbers::pi * rng.uniform());
    return t;
}

void check_correlation(Checker& c, const ValidationOptions& options, std::uint64_t seed) {
    double asym = 0.0;
    double toeplitz = 0.0;
    double diag = 0.0;
    double negativity = 0.0;
    double refinement = 0.0;
    double sqrt_error = 0.0;
    for (std::size_t i = 0; i < options.correlation_matrices; ++i) {
        auto rng = RandomStream::substream(seed, 1, i);
        const int m = 1 + static_cast<int>(rng.uniform() * 32.0);
        const auto p = random_ring(rng, m);
        const auto r = one_ring_matrix(p);
        const auto& a = r.matrix();
        asym = std::max(asym, (a - a.adjoint()).cwiseAbs().maxCoeff());
        for (int row = 1; row < m; ++row) {
            for (int col = 1; col < m; ++col) {
                toeplitz = std::max(toeplitz, std::abs(a(row, col) - a(row - 1, col - 1)));
            }
        }
        diag = std::max(diag, (a.diagonal().array() - Complex(1.0)).abs().maxCoeff());
        const auto eig = hermitian_eig(r);
        negativity = std::max(negativity, -eig.values.minCoeff() / eig.values.maxCoeff());
        for (int lag : {1, m / 2, m - 1}) {
            if (lag < 1 || lag >= m) {
                continue;
            }
            const int panels = one_ring_panels(lag, p.angular_spread(), p.spacing());
            refinement = std::max(refinement, std::abs(a(lag, 0) - one_ring_entry(lag, p, 2 * panels)));
        }
        const auto s = psd_sqrt(r);
        sqrt_error = std::max(sqrt_error, relative_frobenius_error(s.matrix() * s.matrix(), a));
        std::ostringstream name;
        name << "one-ring[" << i << "] trace == M (M=" << m << ", spread=" << format_number(p.angular_spread())
             << " rad)";
        c.at_most(name.str(), std::abs(r.trace() - m), 0.0);
    }
    c.at_most("one-ring hermitian |R - R^H|_max", asym, 1e-12);
    c.at_most("one-ring toeplitz max deviation", toeplitz, 1e-12);
    c.at_most("one-ring unit diagonal max deviation", diag, 1e-12);
    c.at_most("one-ring PSD: max(-lambda_min / lambda_max)", negativity, tolerance::psd_clip);
    c.at_most("one-ring quadrature vs 2x refined panels", refinement, 1e-10);
    c.at_most("psd_sqrt reconstruction ||S S - R||_F / ||R||_F", sqrt_error, 1e-9);
}

void check_moments(Checker& c, const ExperimentConfig& config, const ValidationOptions& options, std::uint64_t seed) {
    const std::size_t trials = std::max(config.trials, min_oracle_trials);
    const MomentForm form = options.inject_printed_moments ? MomentForm::as_printed : MomentForm::corrected;
    std::size_t index = 0;
    for (int m : {2, 4, 8}) {
        for (double k : {0.0, 1.0, 3.16}) {
            auto rng = RandomStream::substream(seed, 2, index);
            std::vector<TerminalProfile> terms{random_terminal(rng, m, k), random_terminal(rng, m, k)};
            const Scenario s({m, 0.5, 1.0}, terms, nullptr);
            const auto inputs = s.analytic_inputs();
            const auto est = moment_oracle(s, 0, 1, trials, derive_key(seed, 100 + index));
            const double delta = lemma1_delta(inputs[0], form);
            const double phi = lemma2_phi(inputs[0], inputs[1], form);
            const double chi = lemma3_chi(m);
            std::ostringstream tag;
            tag << "(M=" << m << ", K=" << k << ", " << trials << " trials)";
            auto add = [&](const std::string& what, const EstimatorOutput& e, double analytic) {
                std::ostringstream detail;
                detail << "estimate=" << format_number(e.mean) << " +/- " << format_number(e.half_width_95)
                       << ", closed form=" << format_number(analytic)
                       << ", rel err=" << format_number(std::abs(e.mean - analytic) / analytic);
                c.at_most(what + " " + tag.str() + " |error| / half-width", std::abs(e.mean - analytic) / e.half_width_95,
                          3.0, detail.str());
            };
            add("moment E||g||^4", est.delta, delta);
            add("moment E|g_l^H g_k|^2", est.phi, phi);
            add("moment E||g||^2", est.chi, chi);
            ++index;
        }
    }
}

void check_corollaries(Checker& c, const ValidationOptions& options, std::uint64_t seed) {
    double worst[3] = {0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < options.corollary_instances; ++i) {
        auto rng = RandomStream::substream(seed, 3, i);
        const int m = 2 + static_cast<int>(rng.uniform() * 7.0);
        const int l_count = 2 + static_cast<int>(rng.uniform() * 3.0);
        const double rho = db_to_linear(-10.0 + 40.0 * rng.uniform());
        const auto shared = std::make_shared<const HermitianMatrix>(one_ring_matrix(random_ring(rng, m)));
        std::vector<TerminalAnalyticInputs> unequal, rayleigh_shared, ricean_shared;
        for (int l = 0; l < l_count; ++l) {
            TerminalAnalyticInputs t;
            t.los = steering(2.0 * std::numbers::pi * rng.uniform(), m, 0.5);
            t.link_gain = 0.1 + rng.uniform();
            t.correlation = std::make_shared<const HermitianMatrix>(one_ring_matrix(random_ring(rng, m)));
            t.k_factor = 0.0;
            unequal.push_back(t);
            t.correlation = shared;
            rayleigh_shared.push_back(t);
            t.k_factor = db_to_linear(-5.0 + 20.0 * rng.uniform());
            ricean_shared.push_back(t);
        }
        const std::vector<TerminalAnalyticInputs>* sets[3] = {&unequal, &rayleigh_shared, &ricean_shared};
        const SpecialCase cases[3] = {SpecialCase::c1, SpecialCase::c2, SpecialCase::c3};
        for (int which = 0; which < 3; ++which) {
            for (std::size_t l = 0; l < sets[which]->size(); ++l) {
                const double general = expected_sinr(l, *sets[which], rho);
                const double special = special_case_sinr(cases[which], l, *sets[which], rho);
                worst[which] = std::max(worst[which], std::abs(special - general) / std::abs(general));
            }
        }
    }
    c.at_most("corollary c1 (Rayleigh, unequal R) vs general, max rel diff", worst[0], 1e-12);
    c.at_most("corollary c2 (Rayleigh, shared R) vs general, max rel diff", worst[1], 1e-12);
    c.at_most("corollary c3 (Ricean, shared R) vs general, max rel diff", worst[2], 1e-12);
}

void check_rayleigh_quotient(Checker& c) {
    double worst = 0.0;
    for (double spread_deg : {5.0, 20.0, 90.0}) {
        const auto r = one_ring_matrix(OneRingParams(16, spread_deg * deg, 0.7));
        const auto eig = hermitian_eig(r);
        const double top = eig.values.maxCoeff();
        const ComplexVector aligned = std::sqrt(16.0) * eig.vectors.col(eig.values.size() - 1);
        worst = std::max(worst, std::abs(quad_form(aligned, r) - 16.0 * top) / (16.0 * top));
    }
    c.at_most("Rayleigh quotient: aligned h^H R h vs M lambda_max, rel diff", worst, 1e-8);
}

void check_determinism(Checker& c, std::uint64_t seed) {
    auto rng = RandomStream::substream(seed, 4);
    std::vector<TerminalProfile> terms{random_terminal(rng, 6, 2.0), random_terminal(rng, 6, 0.0),
                                       random_terminal(rng, 6, 0.5)};
    const Scenario s({6, 0.5, 10.0}, terms, nullptr);
    const auto serial = estimate_expected_sinr(s, 0, 5000, seed, Execution::serial_reference);
    const auto parallel = estimate_expected_sinr(s, 0, 5000, seed, Execution::parallel);
    const bool same = serial.mean == parallel.mean && serial.half_width_95 == parallel.half_width_95;
    c.at_most("serial reference vs OpenMP kernel (bitwise mismatch count)", same ? 0.0 : 1.0, 0.0);
}

} // namespace

std::vector<ValidationCheck> run_validate(const ExperimentConfig& config, const ValidationOptions& options,
                                          std::ostream& report) {
    config.validate();
    const std::uint64_t seed = derive_key(config.seed, validate_key);
    Checker c;
    check_correlation(c, options, seed);
    check_moments(c, config, options, seed);
    check_corollaries(c, options, seed);
    check_rayleigh_quotient(c);
    check_determinism(c, seed);

    std::size_t failed = 0;
    report << "# mumimo validate\n";
    report << "# config: " << config.to_json().dump() << "\n";
    if (options.inject_printed_moments) {
        report << "# test hook: moment formulas use the printed eta/gamma assignment\n";
    }
    for (const auto& check : c.checks) {
        failed += check.passed ? 0 : 1;
        report << (check.passed ? "PASS " : "FAIL ") << check.name << ": measured=" << format_number(check.measured)
               << " tolerance=" << format_number(check.tolerance);
        if (!check.detail.empty()) {
            report << " (" << check.detail << ")";
        }
        report << "\n";
    }
    report << "# " << (c.checks.size() - failed) << "/" << c.checks.size() << " checks passed\n";
    return c.checks;
}

} // namespace mumimo
