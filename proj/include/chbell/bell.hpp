#pragma once

#include <cstdint>
#include <optional>

#include "chbell/model.hpp"
#include "chbell/prediction.hpp"

// Clauser-Horne statistics. The CH sum over the six measured configurations
//
//   CH = N(t1,t2) - N(t1,t2') + N(t1',t2) + N(t1',t2') - N(t1',oo) - N(oo,t2)
//
// is <= 0 for every local realistic model (with no-enhancement), while the
// ratio R = [four coincidence terms] / [N(t1',oo) + N(oo,t2)] exceeds 1 under
// the same condition iff CH > 0.

namespace chbell {

/// The six counts entering the CH sum, measured sequentially with equal live
/// time per configuration.
struct CoincidenceCounts {
    std::uint64_t n_ab = 0;               // N(t1, t2)
    std::uint64_t n_ab_prime = 0;         // N(t1, t2')
    std::uint64_t n_a_prime_b = 0;        // N(t1', t2)
    std::uint64_t n_a_prime_b_prime = 0;  // N(t1', t2')
    std::uint64_t n_a_prime_open = 0;     // N(t1', oo)
    std::uint64_t n_open_b = 0;           // N(oo, t2)
    double duration_s = 1.0;
};

enum class ChUnits { Counts, CountsPerSecond };

struct ChResult {
    double ch = 0.0;
    double ch_sigma = 0.0;
    std::optional<double> r;       // absent when N(t1',oo) + N(oo,t2) = 0
    std::optional<double> r_sigma;
    double significance = 0.0;     // ch / ch_sigma, 0 when ch_sigma = 0
    ChUnits units = ChUnits::CountsPerSecond;
};

/// CH and R with Poisson error propagation. The six counts are treated as
/// independent Poisson variables; all CH coefficients are +-1, so
/// ch_sigma^2 = sum of the six counts.
inline ChResult ch_from_counts(const CoincidenceCounts& c,
                               ChUnits units = ChUnits::CountsPerSecond) {
    if (!(c.duration_s > 0.0))
        throw ValidationError("ch_from_counts: duration_s must be > 0");

    const double n1 = static_cast<double>(c.n_ab);
    const double n2 = static_cast<double>(c.n_ab_prime);
    const double n3 = static_cast<double>(c.n_a_prime_b);
    const double n4 = static_cast<double>(c.n_a_prime_b_prime);
    const double n5 = static_cast<double>(c.n_a_prime_open);
    const double n6 = static_cast<double>(c.n_open_b);

    const double scale = (units == ChUnits::CountsPerSecond) ? 1.0 / c.duration_s : 1.0;

    ChResult res;
    res.units = units;
    res.ch = (n1 - n2 + n3 + n4 - n5 - n6) * scale;
    res.ch_sigma = std::sqrt(n1 + n2 + n3 + n4 + n5 + n6) * scale;
    res.significance = (res.ch_sigma > 0.0) ? res.ch / res.ch_sigma : 0.0;

    const double num = n1 - n2 + n3 + n4;
    const double den = n5 + n6;
    if (den > 0.0) {
        res.r = num / den;
        // var(num) = n1+n2+n3+n4, var(den) = n5+n6; standard ratio propagation
        // written to stay finite when num = 0.
        const double var_num = n1 + n2 + n3 + n4;
        const double var_den = den;
        res.r_sigma = std::sqrt(var_num / (den * den) + num * num * var_den / (den * den * den * den));
    }
    return res;
}

namespace detail {

struct ChTerms {
    double p_ab, p_ab_prime, p_a_prime_b, p_a_prime_b_prime, s_a_prime, s_b;
};

inline ChTerms ch_terms(const EntangledState& state, const AnalyzerConfig& cfg) {
    const Setting a = Setting::angle(cfg.theta1());
    const Setting ap = Setting::angle(cfg.theta1_prime());
    const Setting b = Setting::angle(cfg.theta2());
    const Setting bp = Setting::angle(cfg.theta2_prime());
    const Setting open = Setting::open();
    return {coincidence_probability(state, a, b, cfg.pol1(), cfg.pol2()),
            coincidence_probability(state, a, bp, cfg.pol1(), cfg.pol2()),
            coincidence_probability(state, ap, b, cfg.pol1(), cfg.pol2()),
            coincidence_probability(state, ap, bp, cfg.pol1(), cfg.pol2()),
            coincidence_probability(state, ap, open, cfg.pol1(), cfg.pol2()),
            coincidence_probability(state, open, b, cfg.pol1(), cfg.pol2())};
}

} // namespace detail

/// CH with counts replaced by per-pair probabilities (OPEN for the oo
/// entries). Positive values witness a quantum violation.
inline double ch_from_probabilities(const EntangledState& state, const AnalyzerConfig& cfg) {
    const auto t = detail::ch_terms(state, cfg);
    return t.p_ab - t.p_ab_prime + t.p_a_prime_b + t.p_a_prime_b_prime - t.s_a_prime - t.s_b;
}

/// R with probabilities substituted for counts; > 1 signals violation.
inline double r_from_probabilities(const EntangledState& state, const AnalyzerConfig& cfg) {
    const auto t = detail::ch_terms(state, cfg);
    const double den = t.s_a_prime + t.s_b;
    if (den <= 0.0)
        throw UndefinedValueError("r_from_probabilities: zero denominator");
    return (t.p_ab - t.p_ab_prime + t.p_a_prime_b + t.p_a_prime_b_prime) / den;
}

} // namespace chbell
