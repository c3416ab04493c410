// SPDX-License-Identifier: Apache-2.0

#include "mumimo/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "trial_kernel.hpp"

namespace mumimo {

Scenario::Scenario(SystemConfig config, std::vector<TerminalProfile> terminals, OneRingCache* cache)
    : config_(config), terminals_(std::move(terminals)) {
    if (terminals_.empty()) {
        throw ConfigError("scenario: at least one terminal is required");
    }
    if (config_.antennas < 1) {
        throw ConfigError("scenario: antenna count must be >= 1");
    }
    if (!(config_.rho > 0.0)) {
        throw ConfigError("scenario: SNR must be positive");
    }
    factors_.reserve(terminals_.size());
    for (const auto& t : terminals_) {
        if (t.one_ring.antennas() != config_.antennas) {
            throw ConfigError("scenario: terminal one-ring matrix has " + std::to_string(t.one_ring.antennas()) +
                              " antennas, system has " + std::to_string(config_.antennas));
        }
        if (!(t.link_gain > 0.0) || !(t.k_factor >= 0.0)) {
            throw ConfigError("scenario: link gains must be > 0 and K-factors >= 0");
        }
        factors_.push_back(cache ? cache->get(t.one_ring)
                                 : std::make_shared<const CorrelationFactor>(make_correlation_factor(t.one_ring)));
    }
}

std::vector<double> Scenario::link_gains() const {
    std::vector<double> g(terminals_.size());
    std::transform(terminals_.begin(), terminals_.end(), g.begin(), [](const auto& t) { return t.link_gain; });
    return g;
}

Scenario Scenario::with_rho(double rho) const {
    if (!(rho > 0.0)) {
        throw ConfigError("scenario: SNR must be positive");
    }
    Scenario copy = *this;
    copy.config_.rho = rho;
    return copy;
}

std::vector<TerminalAnalyticInputs> Scenario::analytic_inputs() const {
    std::vector<TerminalAnalyticInputs> out;
    out.reserve(terminals_.size());
    for (std::size_t l = 0; l < terminals_.size(); ++l) {
        // Alias the cached factor so the matrix is shared, not copied.
        std::shared_ptr<const HermitianMatrix> r(factors_[l], &factors_[l]->matrix);
        out.push_back(mumimo::analytic_inputs(terminals_[l], std::move(r)));
    }
    return out;
}

double instantaneous_sinr(const ComplexMatrix& g, std::span<const double> gains, double rho, std::size_t l) {
    if (l >= static_cast<std::size_t>(g.cols()) || gains.size() != static_cast<std::size_t>(g.cols())) {
        throw NumericalError("instantaneous_sinr: index or gain vector does not match the " +
                             std::to_string(g.rows()) + "x" + std::to_string(g.cols()) + " channel matrix");
    }
    const auto col = g.col(static_cast<Eigen::Index>(l));
    const double power = col.squaredNorm();
    if (!(power > 0.0) || !std::isfinite(power)) {
        throw NumericalError("instantaneous_sinr: channel vector of terminal " + std::to_string(l) +
                             " is zero or non-finite");
    }
    double interference = 0.0;
    for (Eigen::Index k = 0; k < g.cols(); ++k) {
        if (static_cast<std::size_t>(k) != l) {
            interference += gains[static_cast<std::size_t>(k)] * std::norm(col.dot(g.col(k)));
        }
    }
    return rho * gains[l] * power * power / (power + rho * interference);
}

void instantaneous_sinr_all(const ComplexMatrix& gram, std::span<const double> gains, double rho,
                            std::span<double> out) {
    const auto n = static_cast<std::size_t>(gram.rows());
    for (std::size_t l = 0; l < n; ++l) {
        const auto li = static_cast<Eigen::Index>(l);
        const double power = gram(li, li).real();
        if (!(power > 0.0) || !std::isfinite(power)) {
            throw NumericalError("instantaneous_sinr: channel vector of terminal " + std::to_string(l) +
                                 " is zero or non-finite");
        }
        double interference = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            if (k != l) {
                interference += gains[k] * std::norm(gram(li, static_cast<Eigen::Index>(k)));
            }
        }
        out[l] = rho * gains[l] * power * power / (power + rho * interference);
    }
}

ChannelSampler::ChannelSampler(const Scenario& s) : scenario_(&s) {
    for (const auto& t : s.terminals()) {
        mixes_.push_back(rice_mix(t.k_factor));
        los_.push_back(steering(t.los_angle, s.config().antennas, s.config().spacing));
    }
    scratch_.resize(s.config().antennas);
}

void ChannelSampler::sample(std::uint64_t seed, std::uint64_t trial, ComplexMatrix& g) {
    const auto m = scenario_->config().antennas;
    const auto n = static_cast<Eigen::Index>(scenario_->size());
    g.resize(m, n);
    auto rng = RandomStream::substream(seed, fading_domain, trial);
    for (Eigen::Index l = 0; l < n; ++l) {
        const auto i = static_cast<std::size_t>(l);
        synthesize_into(g.col(l), mixes_[i], los_[i], scenario_->factor(i).sqrt, rng, scratch_);
    }
}

namespace {

void require_trials(std::size_t trials, std::size_t minimum, const char* what) {
    if (trials < minimum) {
        throw ConfigError(std::string(what) + ": need at least " + std::to_string(minimum) + " trials, got " +
                          std::to_string(trials));
    }
}

/// Per-thread state for estimators that only need the Gram matrix of each trial.
struct GramWorker {
    ChannelSampler sampler;
    ComplexMatrix g;
    ComplexMatrix gram;
    std::vector<double> gains;
    std::vector<double> sinr;

    explicit GramWorker(const Scenario& s) : sampler(s), gains(s.link_gains()), sinr(s.size()) {}

    void draw(std::uint64_t seed, std::uint64_t trial) {
        sampler.sample(seed, trial, g);
        gram.noalias() = g.adjoint() * g;
    }
};

} // namespace

EstimatorOutput estimate_expected_sinr(const Scenario& s, std::size_t l, std::size_t trials, std::uint64_t seed,
                                       Execution exec) {
    require_trials(trials, min_estimator_trials, "estimate_expected_sinr");
    if (l >= s.size()) {
        throw ConfigError("estimate_expected_sinr: terminal index out of range");
    }
    const double rho = s.config().rho;
    auto make = [&] {
        return [&, w = GramWorker(s)](std::size_t t, std::span<double> out) mutable {
            w.draw(seed, t);
            instantaneous_sinr_all(w.gram, w.gains, rho, w.sinr);
            out[0] = w.sinr[l];
        };
    };
    return detail::run_trials(trials, 1, make, exec).front();
}

SweepEstimate estimate_sinr_sweep(const Scenario& s, std::span<const double> rho, std::size_t trials,
                                  std::uint64_t seed, Execution exec) {
    require_trials(trials, min_estimator_trials, "estimate_sinr_sweep");
    if (rho.empty()) {
        throw ConfigError("estimate_sinr_sweep: SNR list is empty");
    }
    const std::size_t n_terms = s.size();
    const std::size_t per_rho = n_terms + 1;
    auto make = [&] {
        return [&, w = GramWorker(s)](std::size_t t, std::span<double> out) mutable {
            w.draw(seed, t);
            for (std::size_t r = 0; r < rho.size(); ++r) {
                instantaneous_sinr_all(w.gram, w.gains, rho[r], w.sinr);
                double sum_se = 0.0;
                for (std::size_t l = 0; l < n_terms; ++l) {
                    out[r * per_rho + l] = w.sinr[l];
                    sum_se += std::log2(1.0 + w.sinr[l]);
                }
                out[r * per_rho + n_terms] = sum_se;
            }
        };
    };
    const auto stats = detail::run_trials(trials, rho.size() * per_rho, make, exec);
    SweepEstimate est;
    est.rho.assign(rho.begin(), rho.end());
    for (std::size_t r = 0; r < rho.size(); ++r) {
        est.sinr.emplace_back(stats.begin() + static_cast<std::ptrdiff_t>(r * per_rho),
                              stats.begin() + static_cast<std::ptrdiff_t>(r * per_rho + n_terms));
        est.sum_se.push_back(stats[r * per_rho + n_terms]);
    }
    return est;
}

EstimatorOutput ergodic_sum_se(const Scenario& s, std::size_t trials, std::uint64_t seed, Execution exec) {
    require_trials(trials, min_estimator_trials, "ergodic_sum_se");
    const double rho = s.config().rho;
    auto make = [&] {
        return [&, w = GramWorker(s)](std::size_t t, std::span<double> out) mutable {
            w.draw(seed, t);
            instantaneous_sinr_all(w.gram, w.gains, rho, w.sinr);
            double sum = 0.0;
            for (double v : w.sinr) {
                sum += std::log2(1.0 + v);
            }
            out[0] = sum;
        };
    };
    return detail::run_trials(trials, 1, make, exec).front();
}

MomentEstimates moment_oracle(const Scenario& s, std::size_t l, std::size_t k, std::size_t trials,
                              std::uint64_t seed, Execution exec) {
    require_trials(trials, min_oracle_trials, "moment_oracle");
    if (l >= s.size() || k >= s.size() || l == k) {
        throw ConfigError("moment_oracle: need two distinct terminal indices in range");
    }
    auto make = [&] {
        return [&, sampler = ChannelSampler(s), g = ComplexMatrix()](std::size_t t, std::span<double> out) mutable {
            sampler.sample(seed, t, g);
            const auto gl = g.col(static_cast<Eigen::Index>(l));
            const double power = gl.squaredNorm();
            out[0] = power * power;
            out[1] = std::norm(gl.dot(g.col(static_cast<Eigen::Index>(k))));
            out[2] = power;
        };
    };
    const auto stats = detail::run_trials(trials, 3, make, exec);
    return {stats[0], stats[1], stats[2]};
}

RatioStudy ratio_study(const Scenario& s, std::size_t l, std::size_t trials, std::uint64_t seed, Execution exec) {
    require_trials(trials, min_estimator_trials, "ratio_study");
    if (l >= s.size()) {
        throw ConfigError("ratio_study: terminal index out of range");
    }
    const double rho = s.config().rho;
    auto make = [&] {
        return [&, w = GramWorker(s)](std::size_t t, std::span<double> out) mutable {
            w.draw(seed, t);
            const auto li = static_cast<Eigen::Index>(l);
            const double power = w.gram(li, li).real();
            double interference = 0.0;
            for (Eigen::Index k = 0; k < w.gram.cols(); ++k) {
                if (k != li) {
                    interference += w.gains[static_cast<std::size_t>(k)] * std::norm(w.gram(li, k));
                }
            }
            const double num = rho * w.gains[l] * power * power;
            const double den = power + rho * interference;
            out[0] = num / den;
            out[1] = num;
            out[2] = den;
        };
    };
    const auto stats = detail::run_trials(trials, 3, make, exec);
    RatioStudy r;
    r.mean_of_ratios = stats[0];
    r.numerator = stats[1];
    r.denominator = stats[2];
    r.ratio_of_means = stats[1].mean / stats[2].mean;
    r.denominator_cv = stats[2].std_dev / stats[2].mean;
    return r;
}

std::vector<CdfPoint> empirical_cdf(std::span<const double> samples) {
    if (samples.empty()) {
        throw ConfigError("empirical_cdf: no samples");
    }
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    std::vector<CdfPoint> cdf;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        if (i + 1 < sorted.size() && sorted[i + 1] == sorted[i]) {
            continue; // the step sits at the last copy of a tied value
        }
        cdf.push_back({sorted[i], static_cast<double>(i + 1) / n});
    }
    return cdf;
}

} // namespace mumimo
