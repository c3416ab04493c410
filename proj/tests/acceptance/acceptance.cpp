// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <limits>
#include <memory>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "mumimo/analytic.hpp"
#include "mumimo/channel.hpp"
#include "mumimo/correlation.hpp"
#include "mumimo/experiment.hpp"
#include "mumimo/largescale.hpp"
#include "mumimo/montecarlo.hpp"
#include "mumimo/numerics.hpp"
#include "mumimo/parallel.hpp"
#include "mumimo/rng.hpp"
#include "support/gk_oracle.hpp"

using namespace mumimo;

namespace {

constexpr double pi = std::numbers::pi;
constexpr double deg = pi / 180.0;
constexpr double inf = std::numeric_limits<double>::infinity();
constexpr std::uint64_t acceptance_seed = 20240917;

struct Outcome {
    bool passed = true;
    std::string summary;
};

std::string fmt(const char* pattern, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, pattern, a);
    return buf;
}

void note(const std::string& line) { std::cout << "    " << line << '\n' << std::flush; }

double elapsed_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

TerminalProfile profile(int m, double k, double spread, double ring_angle, double los_angle, double gain) {
    TerminalProfile t;
    t.k_factor = k;
    t.link_gain = gain;
    t.los_angle = los_angle;
    t.is_los = k > 0.0;
    t.one_ring = OneRingParams(m, spread, ring_angle);
    return t;
}

double uniform(RandomStream& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

int uniform_int(RandomStream& rng, int lo, int hi) {
    return lo + static_cast<int>(rng.uniform() * (hi - lo + 1));
}

double relative(double value, double reference) { return std::abs(value - reference) / std::abs(reference); }

// Calibrations shared by the SINR and CDF criteria.
struct Calibrations {
    CalibrationRecord microwave;
    CalibrationRecord mmwave;
    double microwave_seconds = 0.0;
    double mmwave_seconds = 0.0;
};

Calibrations calibrate_bands() {
    Calibrations c;
    ExperimentConfig config;
    auto start = std::chrono::steady_clock::now();
    c.microwave = run_calibrate(config);
    c.microwave_seconds = elapsed_since(start);
    config.band_name = "mmwave";
    config.band = BandProfile::mmwave();
    start = std::chrono::steady_clock::now();
    c.mmwave = run_calibrate(config);
    c.mmwave_seconds = elapsed_since(start);
    return c;
}

Outcome moment_oracle_equivalence() {
    const std::array<int, 3> antennas{2, 4, 8};
    const std::array<double, 3> ks{0.0, 1.0, 3.16};
    Outcome out;
    double worst_sigma = 0.0;
    double worst_rel = 0.0;
    for (int i = 0; i < 20; ++i) {
        RandomStream rng = RandomStream::substream(acceptance_seed, 1, static_cast<std::uint64_t>(i));
        const int m = antennas[static_cast<std::size_t>(i % 3)];
        const double k_l = ks[static_cast<std::size_t>((i / 3) % 3)];
        const double k_k = ks[static_cast<std::size_t>(uniform_int(rng, 0, 2))];
        const Scenario s({m, 0.5, 1.0},
                         {profile(m, k_l, uniform(rng, 2.0, 180.0) * deg, uniform(rng, 0, 2 * pi),
                                  uniform(rng, 0, 2 * pi), 1.0),
                          profile(m, k_k, uniform(rng, 2.0, 180.0) * deg, uniform(rng, 0, 2 * pi),
                                  uniform(rng, 0, 2 * pi), uniform(rng, 0.1, 1.0))},
                         nullptr);
        const auto inputs = s.analytic_inputs();
        const auto est = moment_oracle(s, 0, 1, 1000000, derive_key(acceptance_seed, 100 + i));
        const std::array<std::pair<double, EstimatorOutput>, 2> pairs{
            std::pair{lemma1_delta(inputs[0]), est.delta}, std::pair{lemma2_phi(inputs[0], inputs[1]), est.phi}};
        for (const auto& [closed, sim] : pairs) {
            const double sigma = std::abs(sim.mean - closed) / (sim.half_width_95 / 1.96);
            const double hw = std::abs(sim.mean - closed) / sim.half_width_95;
            const double rel = relative(sim.mean, closed);
            worst_sigma = std::max(worst_sigma, hw);
            worst_rel = std::max(worst_rel, rel);
            if (hw > 3.0 || rel > 0.01) {
                out.passed = false;
                note("scenario " + std::to_string(i) + " M=" + std::to_string(m) + fmt(" K=%.2f", k_l) +
                     fmt(": %.3f half-widths", hw) + fmt(", rel %.2e", rel) + fmt(" (%.2f sigma)", sigma));
            }
        }
    }
    out.summary = "20 scenarios, worst " + fmt("%.2f half-widths", worst_sigma) + fmt(", worst rel %.2e", worst_rel);
    return out;
}

Outcome second_moment() {
    const std::array<double, 6> ks{0.0, 0.5, 1.0, 3.16, 31.6, inf};
    Outcome out;
    double lo = inf;
    double hi = 0.0;
    for (int i = 0; i < 24; ++i) {
        RandomStream rng = RandomStream::substream(acceptance_seed, 2, static_cast<std::uint64_t>(i));
        const int m = uniform_int(rng, 1, 64);
        const double k = ks[static_cast<std::size_t>(i % 6)];
        const Scenario s({m, 0.5, 1.0},
                         {profile(m, k, uniform(rng, 2.0, 180.0) * deg, uniform(rng, 0, 2 * pi),
                                  uniform(rng, 0, 2 * pi), 1.0),
                          profile(m, 0.0, 20.0 * deg, 0.0, 0.0, 1.0)},
                         nullptr);
        const double ratio = moment_oracle(s, 0, 1, 100000, derive_key(acceptance_seed, 200 + i)).chi.mean / m;
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
        if (ratio < 0.99 || ratio > 1.01) {
            out.passed = false;
            note("M=" + std::to_string(m) + fmt(" K=%g", k) + fmt(": ||g||^2/M = %.5f", ratio));
        }
    }
    out.summary = "24 (K, R) draws, ||g||^2/M in [" + fmt("%.5f", lo) + ", " + fmt("%.5f", hi) + "]";
    return out;
}

Outcome corollary_identities() {
    Outcome out;
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        RandomStream rng = RandomStream::substream(acceptance_seed, 3, static_cast<std::uint64_t>(i));
        const int m = uniform_int(rng, 2, 32);
        const int count = uniform_int(rng, 2, 6);
        const auto which = static_cast<SpecialCase>(i % 3);
        const auto shared = std::make_shared<const HermitianMatrix>(
            one_ring_matrix(OneRingParams(m, uniform(rng, 5.0, 90.0) * deg, uniform(rng, 0, 2 * pi))));
        std::vector<TerminalAnalyticInputs> ts;
        for (int t = 0; t < count; ++t) {
            auto r = which == SpecialCase::c1 ? std::make_shared<const HermitianMatrix>(one_ring_matrix(
                                                    OneRingParams(m, uniform(rng, 5.0, 90.0) * deg, uniform(rng, 0, 2 * pi))))
                                              : shared;
            const double k = which == SpecialCase::c3 ? db_to_linear(uniform(rng, -10.0, 15.0)) : 0.0;
            ts.push_back({k, r, steering(uniform(rng, 0, 2 * pi), m, 0.5), uniform(rng, 0.05, 1.0)});
        }
        const double rho = db_to_linear(uniform(rng, -10.0, 30.0));
        for (std::size_t l = 0; l < ts.size(); ++l) {
            const double rel = relative(special_case_sinr(which, l, ts, rho), expected_sinr(l, ts, rho));
            worst = std::max(worst, rel);
            if (rel > 1e-12) {
                out.passed = false;
                note("instance " + std::to_string(i) + fmt(": rel %.2e", rel));
            }
        }
    }
    out.summary = "100 instances over c1/c2/c3, worst rel " + fmt("%.2e", worst);
    return out;
}

ExperimentConfig sweep_config(double delta_deg, KPolicy::Mode mode) {
    ExperimentConfig c;
    c.delta_deg = delta_deg;
    c.k_policy.mode = mode;
    c.k_policy.fixed_k_db = 5.0;
    return c;
}

Outcome approximation_tightness(double varrho) {
    Outcome out;
    std::size_t within = 0;
    std::size_t total = 0;
    double worst = 0.0;
    for (const double delta : {20.0, 90.0}) {
        const auto config = sweep_config(delta, KPolicy::Mode::fixed);
        const auto start = std::chrono::steady_clock::now();
        const auto rows = sinr_sweep_rows(config, varrho);
        std::vector<double> per_rho(config.rho_db.size(), 0.0);
        for (const auto& row : rows) {
            const double rel = relative(row.sinr_analytic, row.sinr_sim.mean);
            const auto at = static_cast<std::size_t>(
                std::find(config.rho_db.begin(), config.rho_db.end(), row.rho_db) - config.rho_db.begin());
            per_rho[at] = std::max(per_rho[at], rel);
            worst = std::max(worst, rel);
            ++total;
            within += rel <= 0.05 ? 1 : 0;
        }
        std::string line = fmt("delta=%.0f deg worst rel per rho:", delta);
        for (std::size_t i = 0; i < per_rho.size(); ++i) {
            line += fmt(" %.0f:", config.rho_db[i]) + fmt("%.3f", per_rho[i]);
        }
        note(line + fmt(" (%.1f s)", elapsed_since(start)));
    }
    out.passed = within == total;
    out.summary = std::to_string(within) + "/" + std::to_string(total) + " points within 5%, worst rel " +
                  fmt("%.3f", worst);
    return out;
}

Scenario sweep_drop(double delta_deg, KPolicy::Mode mode, double varrho) {
    const auto config = sweep_config(delta_deg, mode);
    return Scenario({config.antennas, config.spacing, 1.0},
                    draw_drop(config.drop_spec(varrho), config.seed, config.drop_index), nullptr);
}

Outcome sweep_trends(double varrho) {
    Outcome out;
    const Scenario narrow = sweep_drop(20.0, KPolicy::Mode::fixed, varrho);
    const Scenario wide = sweep_drop(90.0, KPolicy::Mode::fixed, varrho);
    const Scenario rayleigh = sweep_drop(20.0, KPolicy::Mode::rayleigh, varrho);
    for (std::size_t l = 0; l < narrow.size(); ++l) {
        if (narrow.terminals()[l].distance != wide.terminals()[l].distance ||
            narrow.terminals()[l].distance != rayleigh.terminals()[l].distance) {
            out.passed = false;
            note("drops differ in geometry");
        }
    }
    const auto a_narrow = narrow.analytic_inputs();
    const auto a_wide = wide.analytic_inputs();
    const auto a_rayleigh = rayleigh.analytic_inputs();

    int a_fail = 0;
    int b_fail = 0;
    int points = 0;
    for (double rho_db = -10.0; rho_db <= 30.0; rho_db += 5.0) {
        const double rho = db_to_linear(rho_db);
        for (std::size_t l = 0; l < narrow.size(); ++l) {
            ++points;
            const double n = expected_sinr(l, a_narrow, rho);
            const double w = expected_sinr(l, a_wide, rho);
            const double r = expected_sinr(l, a_rayleigh, rho);
            if (!(w > n)) {
                ++a_fail;
                note(fmt("(a) rho=%.0f dB", rho_db) + " terminal " + std::to_string(l) + fmt(": 90 deg %.4g", w) +
                     fmt(" <= 20 deg %.4g", n));
            }
            if (!(r > n)) {
                ++b_fail;
                note(fmt("(b) rho=%.0f dB", rho_db) + " terminal " + std::to_string(l) + fmt(": Rayleigh %.4g", r) +
                     fmt(" <= K=5 dB %.4g", n));
            }
        }
    }
    double worst_growth = 0.0;
    for (const auto* inputs : {&a_narrow, &a_wide, &a_rayleigh}) {
        for (std::size_t l = 0; l < inputs->size(); ++l) {
            const double s40 = expected_sinr(l, *inputs, db_to_linear(40.0));
            const double s50 = expected_sinr(l, *inputs, db_to_linear(50.0));
            worst_growth = std::max(worst_growth, (s50 - s40) / s40);
        }
    }
    const bool c_ok = worst_growth < 0.01;

    // Monte Carlo spot check of the orderings at two SNRs.
    const std::vector<double> spot{1.0, 100.0};
    const auto seed = derive_key(acceptance_seed, 5);
    const auto m_narrow = estimate_sinr_sweep(narrow, spot, 20000, seed);
    const auto m_wide = estimate_sinr_sweep(wide, spot, 20000, seed);
    const auto m_rayleigh = estimate_sinr_sweep(rayleigh, spot, 20000, seed);
    int spot_fail = 0;
    for (std::size_t i = 0; i < spot.size(); ++i) {
        for (std::size_t l = 0; l < narrow.size(); ++l) {
            const double n = m_narrow.sinr[i][l].mean;
            if (!(m_wide.sinr[i][l].mean > n)) {
                ++spot_fail;
                note(fmt("(a, Monte Carlo) rho=%.0f dB", linear_to_db(spot[i])) + " terminal " + std::to_string(l));
            }
            if (!(m_rayleigh.sinr[i][l].mean > n)) {
                ++spot_fail;
                note(fmt("(b, Monte Carlo) rho=%.0f dB", linear_to_db(spot[i])) + " terminal " + std::to_string(l));
            }
        }
    }
    out.passed = out.passed && a_fail == 0 && b_fail == 0 && c_ok && spot_fail == 0;
    out.summary = "(a) " + std::to_string(points - a_fail) + "/" + std::to_string(points) + ", (b) " +
                  std::to_string(points - b_fail) + "/" + std::to_string(points) + ", (c) 40->50 dB growth " +
                  fmt("%.2e", worst_growth) + ", Monte Carlo spot check " + std::to_string(spot_fail) + " violations";
    return out;
}

struct CdfRun {
    std::string name;
    SumSeSamples samples;
};

std::array<double, 9> deciles(std::vector<double> values) {
    std::array<double, 9> d{};
    for (int i = 0; i < 9; ++i) {
        d[static_cast<std::size_t>(i)] = percentile(values, 10.0 * (i + 1));
    }
    return d;
}

Outcome cdf_trends(double varrho) {
    Outcome out;
    auto base = [] {
        ExperimentConfig c;
        c.antennas = 64;
        c.terminals = 8;
        c.cdf_rho_db = 10.0;
        c.delta_deg = 20.0;
        c.drops = 500;
        c.fading_trials = 200;
        return c;
    };
    std::vector<CdfRun> runs;
    for (const char* name : {"ricean-unequal", "ricean-equal", "rayleigh-unequal"}) {
        auto c = base();
        c.equal_correlation = std::string(name) == "ricean-equal";
        c.k_policy.mode = std::string(name) == "rayleigh-unequal" ? KPolicy::Mode::rayleigh : KPolicy::Mode::statistical;
        const auto start = std::chrono::steady_clock::now();
        runs.push_back({name, sum_se_samples(c, varrho)});
        const auto med_a = percentile(runs.back().samples.analytic, 50.0);
        const auto med_s = percentile(runs.back().samples.simulated, 50.0);
        const double rel = relative(med_a, med_s);
        note(std::string(name) + fmt(": median analytic %.4f", med_a) + fmt(", simulated %.4f", med_s) +
             fmt(", rel %.4f", rel) + fmt(" (%.1f s)", elapsed_since(start)));
        if (rel > 0.05) {
            out.passed = false;
        }
    }
    auto dominates = [&](const CdfRun& right, const CdfRun& left, const char* label) {
        bool ok = true;
        for (const bool analytic : {true, false}) {
            const auto r = deciles(analytic ? right.samples.analytic : right.samples.simulated);
            const auto l = deciles(analytic ? left.samples.analytic : left.samples.simulated);
            for (std::size_t i = 0; i < r.size(); ++i) {
                if (!(r[i] > l[i])) {
                    ok = false;
                    note(std::string(label) + (analytic ? " analytic" : " simulated") + " decile " +
                         std::to_string((i + 1) * 10) + fmt(": %.4f", r[i]) + fmt(" <= %.4f", l[i]));
                }
            }
        }
        return ok;
    };
    const bool unequal_right = dominates(runs[0], runs[1], "unequal vs equal");
    const bool rayleigh_right = dominates(runs[2], runs[0], "Rayleigh vs Ricean");
    const bool medians = out.passed;
    out.passed = unequal_right && rayleigh_right && medians;
    out.summary = std::string("unequal right of equal: ") + (unequal_right ? "yes" : "no") +
                  ", Rayleigh right of Ricean: " + (rayleigh_right ? "yes" : "no") +
                  ", medians within 5%: " + (medians ? "yes" : "no");
    return out;
}

Outcome correlation_invariants() {
    Outcome out;
    double herm = 0.0;
    double toeplitz = 0.0;
    double diag = 0.0;
    double trace = 0.0;
    double eig = inf;
    double quad = 0.0;
    for (int i = 0; i < 1000; ++i) {
        RandomStream rng = RandomStream::substream(acceptance_seed, 7, static_cast<std::uint64_t>(i));
        const int m = uniform_int(rng, 1, 32);
        const OneRingParams p(m, uniform(rng, 2.0, 180.0) * deg, uniform(rng, 0, 2 * pi), uniform(rng, 0.25, 1.0));
        const HermitianMatrix r = one_ring_matrix(p);
        const ComplexMatrix& a = r.matrix();
        herm = std::max(herm, (a - a.adjoint()).cwiseAbs().maxCoeff());
        for (int row = 0; row < m; ++row) {
            diag = std::max(diag, std::abs(a(row, row) - 1.0));
            for (int col = 0; col < m; ++col) {
                const int lag = row - col;
                const Complex expect =
                    lag >= 0 ? one_ring_entry(lag, p) : std::conj(one_ring_entry(-lag, p));
                toeplitz = std::max(toeplitz, std::abs(a(row, col) - expect));
            }
        }
        trace = std::max(trace, std::abs(r.trace() - m) / m);
        const auto values = hermitian_eig(r).values;
        eig = std::min(eig, values.minCoeff() / values.maxCoeff());
        for (int lag = 0; lag < m; ++lag) {
            const Complex oracle = testing::adaptive_one_ring_entry(lag, p.angular_spread(), p.central_angle(), p.spacing());
            quad = std::max(quad, std::abs(one_ring_entry(lag, p) - oracle));
        }
    }
    out.passed = herm <= 1e-12 && toeplitz <= 1e-12 && diag <= 1e-12 && trace <= 1e-12 && eig >= -1e-10 && quad <= 1e-10;
    out.summary = "1000 matrices: hermitian " + fmt("%.1e", herm) + ", toeplitz " + fmt("%.1e", toeplitz) +
                  ", diagonal " + fmt("%.1e", diag) + ", trace " + fmt("%.1e", trace) + ", min eig/max " +
                  fmt("%.1e", eig) + ", oracle " + fmt("%.1e", quad);
    return out;
}

Outcome rayleigh_quotient() {
    Outcome out;
    double worst_bound = 0.0;
    int trace_pairs = 0;
    int trace_fail = 0;
    int align_steps = 0;
    int align_fail = 0;
    for (int i = 0; i < 100; ++i) {
        RandomStream rng = RandomStream::substream(acceptance_seed, 8, static_cast<std::uint64_t>(i));
        const int m = uniform_int(rng, 2, 64);
        const double spread = uniform(rng, 5.0, 90.0) * deg;
        const double angle = uniform(rng, 0, 2 * pi);
        const auto r = std::make_shared<const HermitianMatrix>(one_ring_matrix(OneRingParams(m, spread, angle)));
        const auto eig = hermitian_eig(*r);
        const double top = eig.values.maxCoeff();
        const double root_m = std::sqrt(static_cast<double>(m));
        const ComplexVector aligned = root_m * eig.vectors.col(m - 1);
        worst_bound = std::max(worst_bound, relative(quad_form(aligned, *r), m * top));

        // Rayleigh interferers: the interference moment is exactly tr[R_k R_l].
        const ComplexVector h = steering(uniform(rng, 0, 2 * pi), m, 0.5);
        const auto other = std::make_shared<const HermitianMatrix>(
            one_ring_matrix(OneRingParams(m, spread, angle + uniform(rng, 0.2, pi))));
        const std::vector<TerminalAnalyticInputs> same{{0.0, r, h, 1.0}, {0.0, r, h, 0.5}};
        const std::vector<TerminalAnalyticInputs> rotated{{0.0, r, h, 1.0}, {0.0, other, h, 0.5}};
        const double t_same = trace_product(*r, *r);
        const double t_other = trace_product(*other, *r);
        if (std::abs(t_same - t_other) > 1e-9 * t_same) {
            ++trace_pairs;
            const bool more_similar_is_worse = (t_same > t_other) == (expected_sinr(0, same, 10.0) < expected_sinr(0, rotated, 10.0));
            trace_fail += more_similar_is_worse ? 0 : 1;
        }

        // LoS vector swept from the weakest to the dominant eigenvector against an uncorrelated interferer.
        if (top > eig.values.minCoeff() * (1.0 + 1e-9)) {
            const auto identity = std::make_shared<const HermitianMatrix>(HermitianMatrix::identity(m));
            double previous_q = -inf;
            double previous_s = -inf;
            for (int step = 0; step <= 8; ++step) {
                const double theta = 0.5 * pi * step / 8.0;
                const ComplexVector los =
                    root_m * (std::cos(theta) * eig.vectors.col(0) + std::sin(theta) * eig.vectors.col(m - 1));
                const std::vector<TerminalAnalyticInputs> ts{{db_to_linear(5.0), r, los, 1.0},
                                                             {0.0, identity, h, 0.7}};
                const double q = quad_form(los, *r);
                const double s = expected_sinr(0, ts, 10.0);
                if (step > 0 && q > previous_q) {
                    ++align_steps;
                    align_fail += s > previous_s ? 0 : 1;
                }
                previous_q = q;
                previous_s = s;
            }
        }
    }
    out.passed = worst_bound <= 1e-8 && trace_fail == 0 && align_fail == 0 && trace_pairs > 0 && align_steps > 0;
    out.summary = "top-eigenvector quad form rel " + fmt("%.1e", worst_bound) + ", trace ordering " +
                  std::to_string(trace_pairs - trace_fail) + "/" + std::to_string(trace_pairs) +
                  ", quad-form ordering " + std::to_string(align_steps - align_fail) + "/" +
                  std::to_string(align_steps);
    return out;
}

Outcome calibration_replay(const Calibrations& c) {
    Outcome out;
    for (const auto* rec : {&c.microwave, &c.mmwave}) {
        const bool is_micro = rec == &c.microwave;
        const double seconds = is_micro ? c.microwave_seconds : c.mmwave_seconds;
        const double replay = rec->replay_db.value_or(inf);
        const bool ok = std::abs(replay) <= 0.15 && seconds <= 600.0;
        out.passed = out.passed && ok;
        out.summary += std::string(out.summary.empty() ? "" : ", ") + (is_micro ? "microwave" : "mmwave") +
                       fmt(" varrho %.2f dB", linear_to_db(rec->result.varrho)) + fmt(" replay %+.3f dB", replay) +
                       fmt(" in %.0f s", seconds);
    }
    return out;
}

Outcome determinism() {
    Outcome out;
    ExperimentConfig c;
    c.trials = 5000;
    c.drops = 40;
    c.fading_trials = 100;
    c.calibration.drops = 2000;
    c.replay_drops = 2000;
    c.varrho = db_to_linear(21.7);
    ExperimentConfig cal = c;
    cal.varrho.reset();

    const std::vector<std::pair<std::string, std::function<std::string()>>> commands{
        {"sinr-sweep",
         [&] {
             std::ostringstream os;
             run_sinr_sweep(c, os);
             return os.str();
         }},
        {"sum-se-cdf",
         [&] {
             std::ostringstream os;
             run_sum_se_cdf(c, os);
             return os.str();
         }},
        {"calibrate", [&] { return run_calibrate(cal).to_json(cal).dump(2); }},
        {"validate",
         [&] {
             std::ostringstream os;
             run_validate(c, ValidationOptions{}, os);
             return os.str();
         }},
    };
    int identical = 0;
    for (const auto& [name, run] : commands) {
        set_worker_threads(1);
        const std::string first = run();
        const std::string again = run();
        set_worker_threads(4);
        const std::string wide = run();
        set_worker_threads(0);
        const bool same = !first.empty() && first == again && first == wide;
        identical += same ? 1 : 0;
        if (!same) {
            out.passed = false;
            note(name + " output differs across runs or worker counts");
        }
    }
    out.summary = std::to_string(identical) + "/4 commands byte-identical across reruns and 1 vs 4 workers";
    return out;
}

} // namespace

int main() {
    std::cout << "# mumimo acceptance\n" << std::flush;
    const auto setup = std::chrono::steady_clock::now();
    const Calibrations cal = calibrate_bands();
    std::cout << "# calibration done in " << fmt("%.0f s", elapsed_since(setup)) << '\n' << std::flush;
    const double varrho = cal.microwave.result.varrho;

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"moment-oracle equivalence", moment_oracle_equivalence},
        {"second moment equals M", second_moment},
        {"corollary identities", corollary_identities},
        {"approximation tightness across rho", [&] { return approximation_tightness(varrho); }},
        {"single-cell SINR trends", [&] { return sweep_trends(varrho); }},
        {"sum-SE CDF trends", [&] { return cdf_trends(varrho); }},
        {"correlation-matrix invariants", correlation_invariants},
        {"Rayleigh-quotient properties", rayleigh_quotient},
        {"calibration replay", [&] { return calibration_replay(cal); }},
        {"determinism", determinism},
    };
    int passed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        passed += o.passed ? 1 : 0;
        std::cout << (o.passed ? "PASS " : "FAIL ") << i + 1 << ' ' << criteria[i].first << ": " << o.summary
                  << fmt(" (%.1f s)", elapsed_since(start)) << '\n'
                  << std::flush;
    }
    std::cout << "# " << passed << "/" << criteria.size() << " criteria passed\n";
    return passed == static_cast<int>(criteria.size()) ? 0 : 1;
}
