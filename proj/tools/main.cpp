// SPDX-License-Identifier: Apache-2.0

#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "mumimo/errors.hpp"
#include "mumimo/experiment.hpp"
#include "mumimo/parallel.hpp"

namespace {

using mumimo::ExitCode;

struct CommonOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::optional<std::size_t> trials;
    std::optional<std::size_t> drops;
    std::optional<std::size_t> fading_trials;
    std::optional<std::string> band;
    std::optional<double> varrho_db;
    std::optional<std::string> varrho_file;
    int threads = 0;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
    cmd->add_option("--config", o.config_path, "JSON experiment definition");
    cmd->add_option("--seed", o.seed, "Master seed (unsigned 64-bit)");
    cmd->add_option("--out", o.out, "Output path (stdout when omitted)");
    cmd->add_option("--trials", o.trials, "Fading trials per estimate");
    cmd->add_option("--drops", o.drops, "Large-scale drops");
    cmd->add_option("--fading-trials", o.fading_trials, "Fading trials per drop (sum-se-cdf)");
    cmd->add_option("--band", o.band, "microwave or mmwave");
    cmd->add_option("--varrho-db", o.varrho_db, "Explicit rho constant in dB (skips calibration)");
    cmd->add_option("--varrho-file", o.varrho_file, "Sidecar written by `calibrate`");
    cmd->add_option("--threads", o.threads, "Worker threads (0 = OpenMP default)")->check(CLI::NonNegativeNumber);
}

mumimo::ExperimentConfig load_config(const CommonOptions& o) {
    nlohmann::json j = nlohmann::json::object();
    if (!o.config_path.empty()) {
        std::ifstream in(o.config_path);
        if (!in) {
            throw mumimo::ConfigError("cannot open config file '" + o.config_path + "'");
        }
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw mumimo::ConfigError("config file '" + o.config_path + "': " + e.what());
        }
    }
    if (o.seed) j["seed"] = *o.seed;
    if (o.trials) j["trials"] = *o.trials;
    if (o.drops) j["drops"] = *o.drops;
    if (o.fading_trials) j["fading_trials"] = *o.fading_trials;
    if (o.band) j["band"] = *o.band;
    if (o.varrho_db) {
        j.erase("varrho");
        j.erase("varrho_file");
        j["varrho_db"] = *o.varrho_db;
    }
    if (o.varrho_file) {
        j.erase("varrho");
        j.erase("varrho_db");
        j["varrho_file"] = *o.varrho_file;
    }
    auto config = mumimo::ExperimentConfig::from_json(j);
    config.validate();
    return config;
}

/// Writes to --out when given, else stdout. The file only appears once the command succeeded.
template <class Fn>
void with_output(const std::string& path, Fn&& fn) {
    if (path.empty()) {
        fn(std::cout);
        std::cout.flush();
        return;
    }
    std::ostringstream buffer;
    fn(buffer);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw mumimo::ConfigError("cannot write output file '" + path + "'");
    }
    out << buffer.str();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Uplink MU-MIMO MRC: closed-form expected SINR vs Monte Carlo"};
    app.require_subcommand(1);

    CommonOptions o;
    auto* calibrate = app.add_subcommand("calibrate", "Calibrate the rho constant and write a sidecar JSON");
    auto* sweep = app.add_subcommand("sinr-sweep", "Per-terminal expected SINR over the rho sweep (CSV)");
    auto* cdf = app.add_subcommand("sum-se-cdf", "Sum spectral efficiency CDF over drops (CSV)");
    auto* validate = app.add_subcommand("validate", "Run the invariant suite");
    auto* bands = app.add_subcommand("bands", "Print the built-in band parameter tables");
    for (auto* cmd : {calibrate, sweep, cdf, validate}) {
        add_common(cmd, o);
    }
    bool inject = false;
    validate->add_flag("--inject-printed-lemmas", inject,
                       "Test hook: evaluate the moment formulas with eta and gamma swapped");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : static_cast<int>(ExitCode::invalid_config);
    }

    try {
        if (bands->parsed()) {
            nlohmann::json j;
            for (const char* name : {"microwave", "mmwave"}) {
                mumimo::ExperimentConfig c;
                c.band_name = "custom";
                c.band = *mumimo::BandProfile::by_name(name);
                j[name] = c.to_json()["custom_band"];
            }
            std::cout << j.dump(2) << "\n";
            return 0;
        }

        const auto config = load_config(o);
        mumimo::set_worker_threads(o.threads);

        if (calibrate->parsed()) {
            const auto record = mumimo::run_calibrate(config);
            const auto j = record.to_json(config);
            std::cout << "varrho = " << mumimo::format_number(record.result.varrho) << " ("
                      << mumimo::format_number(j["varrho_db"].get<double>()) << " dB), percentile "
                      << mumimo::format_number(record.result.achieved_db) << " dB";
            if (record.replay_db) {
                std::cout << ", replay " << mumimo::format_number(*record.replay_db) << " dB";
            }
            std::cout << "\n";
            const std::string path = o.out.empty() ? "calibration.json" : o.out;
            with_output(path, [&](std::ostream& os) { os << j.dump(2) << "\n"; });
            std::cout << "sidecar written to " << path << "\n";
        } else if (sweep->parsed()) {
            with_output(o.out, [&](std::ostream& os) { mumimo::run_sinr_sweep(config, os); });
        } else if (cdf->parsed()) {
            with_output(o.out, [&](std::ostream& os) { mumimo::run_sum_se_cdf(config, os); });
        } else if (validate->parsed()) {
            mumimo::ValidationOptions options;
            options.inject_printed_moments = inject;
            std::ostringstream report;
            const auto checks = mumimo::run_validate(config, options, report);
            // The report is written even when checks fail.
            with_output(o.out, [&](std::ostream& os) { os << report.str(); });
            for (const auto& c : checks) {
                if (!c.passed) {
                    std::cerr << "validation failed: " << c.name << "\n";
                    return static_cast<int>(ExitCode::validation_failure);
                }
            }
        }
        return 0;
    } catch (const mumimo::ConfigError& e) {
        std::cerr << "invalid configuration: " << e.what() << "\n";
        return static_cast<int>(ExitCode::invalid_config);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(ExitCode::numerical_error);
    }
}
