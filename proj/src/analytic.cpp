// SPDX-License-Identifier: Apache-2.0

#include "mumimo/analytic.hpp"

#include <cmath>
#include <string>

namespace mumimo {

namespace {

void check_same_dimension(std::span<const TerminalAnalyticInputs> terminals) {
    if (terminals.empty()) {
        throw ConfigError("analytic: at least one terminal is required");
    }
    for (const auto& t : terminals) {
        t.validate();
        if (t.antennas() != terminals.front().antennas()) {
            throw ConfigError("analytic: terminals disagree on the antenna count");
        }
    }
}

bool same_matrix(const HermitianMatrix& a, const HermitianMatrix& b) {
    return &a == &b || (a.dim() == b.dim() && (a.matrix() - b.matrix()).cwiseAbs().maxCoeff() <= 1e-12);
}

double tr_square(const HermitianMatrix& r) { return trace_product(r, r); }

} // namespace

void TerminalAnalyticInputs::validate() const {
    if (!correlation) {
        throw ConfigError("analytic: terminal has no correlation matrix");
    }
    if (correlation->dim() != los.size()) {
        throw ConfigError("analytic: correlation matrix is " + std::to_string(correlation->dim()) +
                          "-dimensional but the steering vector has " + std::to_string(los.size()) + " entries");
    }
    if (!(k_factor >= 0.0)) {
        throw ConfigError("analytic: K-factor must be >= 0");
    }
    if (!(link_gain > 0.0)) {
        throw ConfigError("analytic: link gain must be > 0");
    }
}

TerminalAnalyticInputs analytic_inputs(const TerminalProfile& profile,
                                       std::shared_ptr<const HermitianMatrix> correlation) {
    TerminalAnalyticInputs t;
    t.k_factor = profile.k_factor;
    t.los = steering(profile.los_angle, profile.one_ring.antennas(), profile.one_ring.spacing());
    t.correlation = std::move(correlation);
    t.link_gain = profile.link_gain;
    t.validate();
    return t;
}

double lemma1_delta(const TerminalAnalyticInputs& t, MomentForm form) {
    const auto mix = rice_mix(t.k_factor);
    const double m = static_cast<double>(t.antennas());
    double eta2 = mix.eta * mix.eta;
    double gamma2 = mix.gamma * mix.gamma;
    const double aligned = quad_form(t.los, *t.correlation);
    const double nlos_weight = form == MomentForm::corrected ? gamma2 : eta2;
    const double los_weight = form == MomentForm::corrected ? eta2 : gamma2;
    return nlos_weight * nlos_weight * (m * m + tr_square(*t.correlation)) + 2.0 * m * m * eta2 * gamma2 +
           2.0 * gamma2 * eta2 * aligned + los_weight * los_weight * m * m;
}

double lemma2_phi(const TerminalAnalyticInputs& l, const TerminalAnalyticInputs& k, MomentForm form) {
    if (l.antennas() != k.antennas()) {
        throw ConfigError("lemma2_phi: terminals disagree on the antenna count");
    }
    auto ml = rice_mix(l.k_factor);
    auto mk = rice_mix(k.k_factor);
    if (form == MomentForm::as_printed) {
        std::swap(ml.eta, ml.gamma);
        std::swap(mk.eta, mk.gamma);
    }
    const double gl2 = ml.gamma * ml.gamma;
    const double gk2 = mk.gamma * mk.gamma;
    const double el2 = ml.eta * ml.eta;
    const double ek2 = mk.eta * mk.eta;
    const double cross = std::norm(l.los.dot(k.los));
    // Skip forms whose weight is exactly zero so pure-LoS inputs need no correlation products.
    double phi = 0.0;
    if (gl2 * gk2 != 0.0) {
        phi += gl2 * gk2 * trace_product(*k.correlation, *l.correlation);
    }
    if (gl2 * ek2 != 0.0) {
        phi += gl2 * ek2 * quad_form(k.los, *l.correlation);
    }
    if (el2 * gk2 != 0.0) {
        phi += el2 * gk2 * quad_form(l.los, *k.correlation);
    }
    phi += el2 * ek2 * cross;
    return phi;
}

double lemma3_chi(int antennas) {
    if (antennas < 1) {
        throw ConfigError("lemma3_chi: antenna count must be >= 1");
    }
    return static_cast<double>(antennas);
}

double expected_sinr(std::size_t l, std::span<const TerminalAnalyticInputs> terminals, double rho, MomentForm form) {
    check_same_dimension(terminals);
    if (l >= terminals.size()) {
        throw ConfigError("expected_sinr: terminal index out of range");
    }
    const auto& target = terminals[l];
    double interference = 0.0;
    for (std::size_t k = 0; k < terminals.size(); ++k) {
        if (k != l) {
            interference += terminals[k].link_gain * lemma2_phi(target, terminals[k], form);
        }
    }
    const double chi = lemma3_chi(static_cast<int>(target.antennas()));
    return rho * target.link_gain * lemma1_delta(target, form) / (chi + rho * interference);
}

std::vector<double> expected_sinr_all(std::span<const TerminalAnalyticInputs> terminals, double rho, MomentForm form) {
    std::vector<double> out(terminals.size());
    for (std::size_t l = 0; l < terminals.size(); ++l) {
        out[l] = expected_sinr(l, terminals, rho, form);
    }
    return out;
}

double special_case_sinr(SpecialCase which, std::size_t l, std::span<const TerminalAnalyticInputs> terminals,
                         double rho) {
    check_same_dimension(terminals);
    if (l >= terminals.size()) {
        throw ConfigError("special_case_sinr: terminal index out of range");
    }
    const bool needs_rayleigh = which != SpecialCase::c3;
    const bool needs_shared = which != SpecialCase::c1;
    for (const auto& t : terminals) {
        if (needs_rayleigh && t.k_factor != 0.0) {
            throw ConfigError("special_case_sinr: this case requires K = 0 for every terminal");
        }
        if (needs_shared && !same_matrix(*t.correlation, *terminals[l].correlation)) {
            throw ConfigError("special_case_sinr: this case requires one shared correlation matrix");
        }
    }
    const auto& target = terminals[l];
    const auto& r_l = *target.correlation;
    const double m = static_cast<double>(target.antennas());
    const double trace_rl2 = tr_square(r_l);

    switch (which) {
    case SpecialCase::c1: {
        double interference = 0.0;
        for (std::size_t k = 0; k < terminals.size(); ++k) {
            if (k != l) {
                interference += terminals[k].link_gain * trace_product(*terminals[k].correlation, r_l);
            }
        }
        return rho * target.link_gain * (m * m + trace_rl2) / (m + rho * interference);
    }
    case SpecialCase::c2: {
        double gains = 0.0;
        for (std::size_t k = 0; k < terminals.size(); ++k) {
            if (k != l) {
                gains += terminals[k].link_gain;
            }
        }
        return rho * target.link_gain * (m * m + trace_rl2) / (m + rho * gains * trace_rl2);
    }
    case SpecialCase::c3: {
        const auto ml = rice_mix(target.k_factor);
        const double el2 = ml.eta * ml.eta;
        const double gl2 = ml.gamma * ml.gamma;
        const double aligned_l = quad_form(target.los, r_l);
        const double delta = gl2 * gl2 * (m * m + trace_rl2) + 2.0 * m * m * el2 * gl2 + 2.0 * gl2 * el2 * aligned_l +
                             el2 * el2 * m * m;
        double interference = 0.0;
        for (std::size_t k = 0; k < terminals.size(); ++k) {
            if (k == l) {
                continue;
            }
            const auto mk = rice_mix(terminals[k].k_factor);
            const double ek2 = mk.eta * mk.eta;
            const double gk2 = mk.gamma * mk.gamma;
            const double phi = gl2 * gk2 * trace_rl2 + gl2 * ek2 * quad_form(terminals[k].los, r_l) +
                               el2 * gk2 * aligned_l + el2 * ek2 * std::norm(target.los.dot(terminals[k].los));
            interference += terminals[k].link_gain * phi;
        }
        return rho * target.link_gain * delta / (m + rho * interference);
    }
    }
    throw ConfigError("special_case_sinr: unknown case");
}

double sum_se_approx(std::span<const TerminalAnalyticInputs> terminals, double rho) {
    double total = 0.0;
    for (double s : expected_sinr_all(terminals, rho)) {
        total += std::log2(1.0 + s);
    }
    return total;
}

} // namespace mumimo
