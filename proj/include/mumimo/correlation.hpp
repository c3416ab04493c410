// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <memory>
#include <shared_mutex>
#include <span>
#include <unordered_map>

#include "mumimo/numerics.hpp"

namespace mumimo {

/// Parameters of the one-ring receive correlation model.
///
/// The AoA integral runs over [central_angle - angular_spread, central_angle + angular_spread],
/// i.e. `angular_spread` is the half-width of the integration window.
class OneRingParams {
  public:
    static constexpr double min_angular_spread = 1e-8;

    /// Throws ConfigError unless antennas >= 1, spread in [1e-8, 2pi], spacing > 0.
    /// The central angle is wrapped into [0, 2pi).
    OneRingParams(int antennas, double angular_spread, double central_angle, double spacing = 0.5);

    int antennas() const noexcept { return antennas_; }
    double angular_spread() const noexcept { return angular_spread_; }
    double central_angle() const noexcept { return central_angle_; }
    double spacing() const noexcept { return spacing_; }

  private:
    int antennas_;
    double angular_spread_;
    double central_angle_;
    double spacing_;
};

/// Gauss-Legendre rule on [-1, 1].
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Cached n-point rule (Newton iteration on P_n, n >= 1).
const QuadratureRule& gauss_legendre(int points);

inline constexpr int one_ring_nodes_per_panel = 64;
inline constexpr int one_ring_min_panels = 8;

/// Panels used for a lag: one per oscillation period of the integrand, at least 8.
int one_ring_panels(int lag, double angular_spread, double spacing);

/// (1/2D) * integral_{phi-D}^{phi+D} exp(-j 2 pi d lag sin t) dt, composite 64-node Gauss-Legendre.
Complex one_ring_entry(int lag, const OneRingParams& p);

/// Same integral with an explicit panel count (used to check convergence under refinement).
Complex one_ring_entry(int lag, const OneRingParams& p, int panels);

/// Toeplitz Hermitian matrix R(i, j) = one_ring_entry(i - j), unit diagonal.
HermitianMatrix one_ring_matrix(const OneRingParams& p);

/// A correlation matrix together with its PSD square root.
struct CorrelationFactor {
    HermitianMatrix matrix;
    HermitianMatrix sqrt;
};

CorrelationFactor make_correlation_factor(const OneRingParams& p);

/// Bounded memo of one-ring factors keyed by (M, spread, central angle to 1e-12, spacing).
///
/// Concurrent readers share a lock; insertion takes it exclusively. Entries are immutable
/// and handed out as shared pointers, so eviction never invalidates a holder.
class OneRingCache {
  public:
    /// `capacity_bytes` bounds the matrix storage held by the cache (FIFO eviction).
    explicit OneRingCache(std::size_t capacity_bytes = std::size_t{256} << 20) : capacity_bytes_(capacity_bytes) {}

    std::shared_ptr<const CorrelationFactor> get(const OneRingParams& p);

    std::size_t size() const;
    void clear();

  private:
    struct Key {
        int antennas;
        std::uint64_t spread_bits;
        std::int64_t angle_quantum;
        std::uint64_t spacing_bits;
        bool operator==(const Key&) const = default;
    };
    struct KeyHash {
        std::size_t operator()(const Key& k) const noexcept;
    };
    static Key key_of(const OneRingParams& p);

    std::size_t capacity_bytes_;
    std::size_t held_bytes_ = 0;
    mutable std::shared_mutex mutex_;
    std::unordered_map<Key, std::shared_ptr<const CorrelationFactor>, KeyHash> entries_;
    std::deque<Key> order_;
};

OneRingCache& default_one_ring_cache();

} // namespace mumimo
