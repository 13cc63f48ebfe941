#include "chbell/lhv.hpp"

#include <cmath>
#include <vector>

#include "chbell/rng.hpp"

namespace chbell {

namespace {

// bits = {b(angle), b(angle'), b(OPEN)} packed from a 3-bit index
std::array<int, 3> unpack(int m) { return {(m >> 0) & 1, (m >> 1) & 1, (m >> 2) & 1}; }

bool no_enhancement_ok(const std::array<int, 3>& bits) {
    return bits[2] >= bits[0] && bits[2] >= bits[1];
}

} // namespace

int strategy_ch(const DeterministicStrategy& s) {
    const auto& u = s.arm1;
    const auto& v = s.arm2;
    // N(t1,t2) - N(t1,t2') + N(t1',t2) + N(t1',t2') - N(t1',oo) - N(oo,t2)
    return u[0] * v[0] - u[0] * v[1] + u[1] * v[0] + u[1] * v[1] - u[1] * v[2] - u[2] * v[0];
}

LhvReport enumerate_counts_form(bool no_enhancement) {
    LhvReport rep;
    rep.mode = LhvReport::Form::Counts;
    rep.no_enhancement = no_enhancement;
    int best = std::numeric_limits<int>::min();
    for (int m1 = 0; m1 < 8; ++m1) {
        const auto a1 = unpack(m1);
        if (no_enhancement && !no_enhancement_ok(a1)) continue;
        for (int m2 = 0; m2 < 8; ++m2) {
            const auto a2 = unpack(m2);
            if (no_enhancement && !no_enhancement_ok(a2)) continue;
            DeterministicStrategy s{a1, a2};
            ++rep.strategies_checked;
            const int ch = strategy_ch(s);
            if (ch > best) {
                best = ch;
                rep.argmax = s;
            }
        }
    }
    rep.max_ch = best;
    return rep;
}

LhvReport enumerate_probability_form() {
    LhvReport rep;
    rep.mode = LhvReport::Form::Probability;
    int best = std::numeric_limits<int>::min();
    for (int m1 = 0; m1 < 4; ++m1) {
        const int x = m1 & 1, xp = (m1 >> 1) & 1;
        for (int m2 = 0; m2 < 4; ++m2) {
            const int y = m2 & 1, yp = (m2 >> 1) & 1;
            ++rep.strategies_checked;
            const int ch = x * y - x * yp + xp * y + xp * yp - xp - y;
            if (ch > best) {
                best = ch;
                // OPEN plays no role in the probability form; record it as
                // always-detect so the table still satisfies no-enhancement.
                rep.argmax = {{x, xp, 1}, {y, yp, 1}};
            }
        }
    }
    rep.max_ch = best;
    return rep;
}

std::vector<DeterministicStrategy> admissible_strategies(bool no_enhancement) {
    std::vector<DeterministicStrategy> vertices;
    for (int m1 = 0; m1 < 8; ++m1)
        for (int m2 = 0; m2 < 8; ++m2) {
            DeterministicStrategy s{unpack(m1), unpack(m2)};
            if (!no_enhancement || (no_enhancement_ok(s.arm1) && no_enhancement_ok(s.arm2)))
                vertices.push_back(s);
        }
    return vertices;
}

double mixture_ch(const std::vector<DeterministicStrategy>& vertices,
                  const std::vector<double>& weights) {
    if (weights.size() != vertices.size())
        throw ValidationError("mixture_ch: one weight per strategy required");
    double wsum = 0.0;
    for (const double w : weights) {
        if (!(w >= 0.0)) throw ValidationError("mixture_ch: weights must be >= 0");
        wsum += w;
    }
    if (!(wsum > 0.0)) throw ValidationError("mixture_ch: weights sum to zero");

    // mixed expected counts, six bilinear terms
    double n[6] = {0, 0, 0, 0, 0, 0};
    for (size_t i = 0; i < vertices.size(); ++i) {
        const double wi = weights[i] / wsum;
        const auto& u = vertices[i].arm1;
        const auto& v = vertices[i].arm2;
        n[0] += wi * u[0] * v[0];
        n[1] += wi * u[0] * v[1];
        n[2] += wi * u[1] * v[0];
        n[3] += wi * u[1] * v[1];
        n[4] += wi * u[1] * v[2];
        n[5] += wi * u[2] * v[0];
    }
    return n[0] - n[1] + n[2] + n[3] - n[4] - n[5];
}

double mixture_bound_check(std::uint64_t samples, std::uint64_t seed) {
    if (samples < 1)
        throw ValidationError("mixture_bound_check: need at least one sample");

    const std::vector<DeterministicStrategy> vertices = admissible_strategies(true);
    int vmax = std::numeric_limits<int>::min();
    for (const auto& s : vertices) vmax = std::max(vmax, strategy_ch(s));

    Rng rng(derive_seed(seed, 0x4c4856 /* "LHV" */));
    std::vector<double> w(vertices.size());
    double worst = -std::numeric_limits<double>::infinity();
    for (std::uint64_t k = 0; k < samples; ++k) {
        double wsum = 0.0;
        double ch_linear = 0.0;
        for (auto& wi : w) wi = rng.uniform();
        for (size_t i = 0; i < vertices.size(); ++i) {
            wsum += w[i];
            ch_linear += w[i] * strategy_ch(vertices[i]);
        }
        ch_linear /= wsum;
        const double ch_mix = mixture_ch(vertices, w);
        // CH is linear in the hidden-variable distribution, so the mixture
        // value is the weight-average of the vertex values
        if (std::abs(ch_mix - ch_linear) > 1e-12)
            throw std::logic_error("mixture_bound_check: CH not linear in the mixture");
        if (ch_mix > vmax + 1e-12)
            throw std::logic_error("mixture_bound_check: mixture exceeded the vertex bound");
        worst = std::max(worst, ch_mix);
    }
    return worst;
}

} // namespace chbell
