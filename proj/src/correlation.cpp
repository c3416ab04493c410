// SPDX-License-Identifier: Apache-2.0

#include "mumimo/correlation.hpp"

#include <bit>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <string>
#include <utility>

namespace mumimo {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

// Legendre P_n(x) and its derivative by the three-term recurrence.
std::pair<double, double> legendre(int n, double x) {
    double p0 = 1.0;
    double p1 = x;
    for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
    }
    return {p1, n * (x * p1 - p0) / (x * x - 1.0)};
}

QuadratureRule compute_gauss_legendre(int n) {
    if (n < 2) {
        throw ConfigError("gauss_legendre: need at least 2 points, got " + std::to_string(n));
    }
    QuadratureRule rule;
    rule.nodes.resize(static_cast<std::size_t>(n));
    rule.weights.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        for (int iter = 0; iter < 100; ++iter) {
            const auto [p, dp] = legendre(n, x);
            const double dx = p / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) {
                break;
            }
        }
        const double dp = legendre(n, x).second;
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[static_cast<std::size_t>(i)] = -x;
        rule.nodes[static_cast<std::size_t>(n - 1 - i)] = x;
        rule.weights[static_cast<std::size_t>(i)] = w;
        rule.weights[static_cast<std::size_t>(n - 1 - i)] = w;
    }
    return rule;
}

/// Nodes (sin theta) and normalized weights of the composite rule over the window;
/// weights already include the 1/(2D) prefactor.
struct WindowRule {
    std::vector<double> sines;
    std::vector<double> weights;
};

WindowRule window_rule(const OneRingParams& p, int panels) {
    const auto& base = gauss_legendre(one_ring_nodes_per_panel);
    const double lo = p.central_angle() - p.angular_spread();
    const double width = 2.0 * p.angular_spread() / panels;
    WindowRule out;
    out.sines.reserve(static_cast<std::size_t>(panels) * base.nodes.size());
    out.weights.reserve(out.sines.capacity());
    for (int k = 0; k < panels; ++k) {
        const double mid = lo + (k + 0.5) * width;
        for (std::size_t q = 0; q < base.nodes.size(); ++q) {
            out.sines.push_back(std::sin(mid + 0.5 * width * base.nodes[q]));
            // (width/2) * w_q / (2D) == w_q / (2 * panels)
            out.weights.push_back(base.weights[q] / (2.0 * panels));
        }
    }
    return out;
}

} // namespace

OneRingParams::OneRingParams(int antennas, double angular_spread, double central_angle, double spacing)
    : antennas_(antennas), angular_spread_(angular_spread), central_angle_(central_angle), spacing_(spacing) {
    if (antennas < 1) {
        throw ConfigError("one-ring: antenna count must be >= 1, got " + std::to_string(antennas));
    }
    if (!(angular_spread >= min_angular_spread && angular_spread <= two_pi)) {
        throw ConfigError("one-ring: angular spread must lie in [1e-8, 2pi] rad, got " + std::to_string(angular_spread));
    }
    if (!(spacing > 0.0) || !std::isfinite(spacing)) {
        throw ConfigError("one-ring: element spacing must be positive, got " + std::to_string(spacing));
    }
    if (!std::isfinite(central_angle)) {
        throw ConfigError("one-ring: central angle must be finite");
    }
    central_angle_ = std::fmod(central_angle, two_pi);
    if (central_angle_ < 0.0) {
        central_angle_ += two_pi;
    }
    if (central_angle_ >= two_pi) {
        central_angle_ = 0.0;
    }
}

const QuadratureRule& gauss_legendre(int points) {
    static std::shared_mutex mutex;
    static std::map<int, std::unique_ptr<QuadratureRule>> rules;
    {
        std::shared_lock lock(mutex);
        if (auto it = rules.find(points); it != rules.end()) {
            return *it->second;
        }
    }
    std::unique_lock lock(mutex);
    auto& slot = rules[points];
    if (!slot) {
        slot = std::make_unique<QuadratureRule>(compute_gauss_legendre(points));
    }
    return *slot;
}

int one_ring_panels(int lag, double angular_spread, double spacing) {
    const double periods = 2.0 * angular_spread * spacing * std::abs(lag);
    return std::max(one_ring_min_panels, static_cast<int>(std::ceil(periods)));
}

Complex one_ring_entry(int lag, const OneRingParams& p) {
    return one_ring_entry(lag, p, one_ring_panels(lag, p.angular_spread(), p.spacing()));
}

Complex one_ring_entry(int lag, const OneRingParams& p, int panels) {
    if (lag == 0) {
        return {1.0, 0.0};
    }
    if (panels < 1) {
        throw ConfigError("one_ring_entry: panel count must be >= 1");
    }
    const auto rule = window_rule(p, panels);
    const double k = -two_pi * p.spacing() * lag;
    double re = 0.0;
    double im = 0.0;
    for (std::size_t q = 0; q < rule.sines.size(); ++q) {
        const double phase = k * rule.sines[q];
        re += rule.weights[q] * std::cos(phase);
        im += rule.weights[q] * std::sin(phase);
    }
    return {re, im};
}

HermitianMatrix one_ring_matrix(const OneRingParams& p) {
    const int m = p.antennas();
    std::vector<Complex> first_col(static_cast<std::size_t>(m));
    first_col[0] = 1.0;
    if (m > 1) {
        const auto rule = window_rule(p, one_ring_panels(m - 1, p.angular_spread(), p.spacing()));
        const std::size_t n = rule.sines.size();
        // Successive lags by repeated multiplication with exp(-j 2 pi d sin t);
        // the unit-modulus base is re-evaluated exactly every 16 lags to cap drift.
        std::vector<Complex> base(n);
        std::vector<Complex> power(n);
        for (std::size_t q = 0; q < n; ++q) {
            base[q] = std::polar(1.0, -two_pi * p.spacing() * rule.sines[q]);
            power[q] = rule.weights[q];
        }
        for (int lag = 1; lag < m; ++lag) {
            Complex acc = 0.0;
            if (lag % 16 == 0) {
                for (std::size_t q = 0; q < n; ++q) {
                    power[q] = rule.weights[q] * std::polar(1.0, -two_pi * p.spacing() * lag * rule.sines[q]);
                    acc += power[q];
                }
            } else {
                for (std::size_t q = 0; q < n; ++q) {
                    power[q] *= base[q];
                    acc += power[q];
                }
            }
            first_col[static_cast<std::size_t>(lag)] = acc;
        }
    }
    ComplexMatrix r(m, m);
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
            const auto& v = first_col[static_cast<std::size_t>(std::abs(i - j))];
            r(i, j) = i >= j ? v : std::conj(v);
        }
        r(i, i) = 1.0;
    }
    return HermitianMatrix(std::move(r));
}

CorrelationFactor make_correlation_factor(const OneRingParams& p) {
    auto r = one_ring_matrix(p);
    auto s = psd_sqrt(r);
    return {std::move(r), std::move(s)};
}

std::size_t OneRingCache::KeyHash::operator()(const Key& k) const noexcept {
    std::uint64_t h = derive_key(static_cast<std::uint64_t>(k.antennas), k.spread_bits);
    h = derive_key(h, static_cast<std::uint64_t>(k.angle_quantum));
    h = derive_key(h, k.spacing_bits);
    return static_cast<std::size_t>(h);
}

OneRingCache::Key OneRingCache::key_of(const OneRingParams& p) {
    return {p.antennas(), std::bit_cast<std::uint64_t>(p.angular_spread()),
            static_cast<std::int64_t>(std::llround(p.central_angle() * 1e12)), std::bit_cast<std::uint64_t>(p.spacing())};
}

std::shared_ptr<const CorrelationFactor> OneRingCache::get(const OneRingParams& p) {
    const Key key = key_of(p);
    {
        std::shared_lock lock(mutex_);
        if (auto it = entries_.find(key); it != entries_.end()) {
            return it->second;
        }
    }
    // Built outside the lock; a concurrent duplicate build is discarded on insert.
    auto factor = std::make_shared<const CorrelationFactor>(make_correlation_factor(p));
    std::unique_lock lock(mutex_);
    if (auto it = entries_.find(key); it != entries_.end()) {
        return it->second;
    }
    const auto m = static_cast<std::size_t>(p.antennas());
    const std::size_t bytes = 2 * m * m * sizeof(Complex);
    if (bytes > capacity_bytes_) {
        return factor;
    }
    while (held_bytes_ + bytes > capacity_bytes_ && !order_.empty()) {
        const auto& oldest = order_.front();
        const auto mo = static_cast<std::size_t>(oldest.antennas);
        held_bytes_ -= 2 * mo * mo * sizeof(Complex);
        entries_.erase(oldest);
        order_.pop_front();
    }
    entries_.emplace(key, factor);
    order_.push_back(key);
    held_bytes_ += bytes;
    return factor;
}

std::size_t OneRingCache::size() const {
    std::shared_lock lock(mutex_);
    return entries_.size();
}

void OneRingCache::clear() {
    std::unique_lock lock(mutex_);
    entries_.clear();
    order_.clear();
    held_bytes_ = 0;
}

OneRingCache& default_one_ring_cache() {
    static OneRingCache cache;
    return cache;
}

} // namespace mumimo
