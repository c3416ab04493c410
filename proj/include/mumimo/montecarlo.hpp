// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "mumimo/analytic.hpp"
#include "mumimo/correlation.hpp"
#include "mumimo/largescale.hpp"
#include "mumimo/parallel.hpp"

namespace mumimo {

struct SystemConfig {
    int antennas = 64;
    double spacing = 0.5;
    double rho = 1.0; ///< linear uplink SNR (noise power is 1)
};

/// One drop: the terminals' large-scale state plus their correlation factors.
class Scenario {
  public:
    /// Correlation factors are fetched from `cache` (built directly when null).
    Scenario(SystemConfig config, std::vector<TerminalProfile> terminals, OneRingCache* cache = &default_one_ring_cache());

    const SystemConfig& config() const noexcept { return config_; }
    std::size_t size() const noexcept { return terminals_.size(); }
    const std::vector<TerminalProfile>& terminals() const noexcept { return terminals_; }
    const CorrelationFactor& factor(std::size_t l) const { return *factors_.at(l); }
    std::vector<double> link_gains() const;

    Scenario with_rho(double rho) const;

    /// Inputs for the closed-form model sharing this scenario's matrices.
    std::vector<TerminalAnalyticInputs> analytic_inputs() const;

  private:
    SystemConfig config_;
    std::vector<TerminalProfile> terminals_;
    std::vector<std::shared_ptr<const CorrelationFactor>> factors_;
};

struct EstimatorOutput {
    double mean = 0.0;
    double half_width_95 = 0.0; ///< 1.96 * sample std / sqrt(trials)
    std::size_t trials = 0;
    double std_dev = 0.0;
};

/// rho b_l ||g_l||^4 / (||g_l||^2 + rho sum_{k != l} b_k |g_l^H g_k|^2) for columns g of G.
/// Throws NumericalError for a zero or non-finite column g_l.
double instantaneous_sinr(const ComplexMatrix& g, std::span<const double> gains, double rho, std::size_t l);

/// Same for every terminal, from the Gram matrix G^H G.
void instantaneous_sinr_all(const ComplexMatrix& gram, std::span<const double> gains, double rho,
                            std::span<double> out);

/// Fills column l of `g` with terminal l's channel for fading trial `trial`. Every trial uses
/// its own substream of `seed`, so results do not depend on scheduling.
class ChannelSampler {
  public:
    explicit ChannelSampler(const Scenario& s);
    void sample(std::uint64_t seed, std::uint64_t trial, ComplexMatrix& g);

  private:
    const Scenario* scenario_;
    std::vector<RiceMix> mixes_;
    std::vector<ComplexVector> los_;
    ComplexVector scratch_;
};

EstimatorOutput estimate_expected_sinr(const Scenario& s, std::size_t l, std::size_t trials, std::uint64_t seed,
                                       Execution exec = Execution::parallel);

/// Per-terminal SINR and sum-SE estimates at several SNRs; every SNR point sees the same
/// channel realizations.
struct SweepEstimate {
    std::vector<double> rho;
    std::vector<std::vector<EstimatorOutput>> sinr; ///< [rho point][terminal]
    std::vector<EstimatorOutput> sum_se;           ///< [rho point], bits/s/Hz
};

SweepEstimate estimate_sinr_sweep(const Scenario& s, std::span<const double> rho, std::size_t trials,
                                  std::uint64_t seed, Execution exec = Execution::parallel);

/// Fading average of sum_l log2(1 + SINR_l).
EstimatorOutput ergodic_sum_se(const Scenario& s, std::size_t trials, std::uint64_t seed,
                               Execution exec = Execution::parallel);

struct MomentEstimates {
    EstimatorOutput delta; ///< ||g_l||^4
    EstimatorOutput phi;   ///< |g_l^H g_k|^2
    EstimatorOutput chi;   ///< ||g_l||^2
};

/// Sample moments over i.i.d. fading; requires l != k and trials >= 1e4.
MomentEstimates moment_oracle(const Scenario& s, std::size_t l, std::size_t k, std::size_t trials,
                              std::uint64_t seed, Execution exec = Execution::parallel);

/// Mean of the SINR ratio against the ratio of the mean numerator and denominator.
struct RatioStudy {
    EstimatorOutput mean_of_ratios;
    EstimatorOutput numerator;
    EstimatorOutput denominator;
    double ratio_of_means = 0.0;
    double denominator_cv = 0.0; ///< std / mean of the denominator
};

RatioStudy ratio_study(const Scenario& s, std::size_t l, std::size_t trials, std::uint64_t seed,
                       Execution exec = Execution::parallel);

struct CdfPoint {
    double value;
    double level; ///< P(X <= value)
};

/// Right-continuous empirical CDF, one point per distinct sample value.
std::vector<CdfPoint> empirical_cdf(std::span<const double> samples);

inline constexpr std::size_t min_estimator_trials = 100;
inline constexpr std::size_t min_oracle_trials = 10000;
inline constexpr std::uint64_t fading_domain = 0x66616465; ///< substream domain of fading trials

} // namespace mumimo
