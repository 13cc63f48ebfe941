#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "chbell/model.hpp"

// Deterministic local-hidden-variable strategies for the six-configuration
// CH experiment, enumerated exhaustively. Each arm assigns a detection bit
// to each of its settings {angle, angle', OPEN}; a joint count is
// N(x, y) = bit1(x) * bit2(y). The CH combination is linear in the
// hidden-variable distribution, so the extreme value over all LHV models is
// attained at one of these vertices.
//
// no-enhancement = removing the polarizer never loses the photon:
// bit(OPEN) >= bit(angle) for both angles of an arm. That leaves 5 of the 8
// bit patterns per arm (25 joint strategies) and pins max CH = 0 exactly.
// Without it, setting-dependent detection pushes max CH to 2 although no
// signalling is involved — the detection loophole as an executable fact.

namespace chbell {

struct DeterministicStrategy {
    // detection bits for {angle, angle', OPEN}
    std::array<int, 3> arm1{0, 0, 0};
    std::array<int, 3> arm2{0, 0, 0};
};

struct LhvReport {
    enum class Form { Counts, Probability };
    Form mode = Form::Counts;
    bool no_enhancement = false;
    int max_ch = 0;
    DeterministicStrategy argmax;
    std::uint64_t strategies_checked = 0;
};

/// CH over all admissible deterministic strategies of the six-term count
/// form. 25 strategies with no-enhancement (max 0), 64 without (max 2).
LhvReport enumerate_counts_form(bool no_enhancement);

/// CH_prob = xy - xy' + x'y + x'y' - x' - y over the 16 strategies on angled
/// settings only (singles replaced by the arm's own detection bit). Max 0.
LhvReport enumerate_probability_form();

/// Samples random convex mixtures of the no-enhancement strategies and
/// returns the largest mixture CH seen; linearity keeps every mixture at or
/// below the vertex maximum (checked to 1e-12 internally).
double mixture_bound_check(std::uint64_t samples, std::uint64_t seed);

/// Count-form CH of one strategy (integer arithmetic).
int strategy_ch(const DeterministicStrategy& s);

/// All strategies admitted by the counts-form enumeration, in its order.
std::vector<DeterministicStrategy> admissible_strategies(bool no_enhancement);

/// CH of a convex mixture, computed from the mixed expected counts.
/// weights need not be normalized; their size must match the vertex list.
double mixture_ch(const std::vector<DeterministicStrategy>& vertices,
                  const std::vector<double>& weights);

inline const char* to_string(LhvReport::Form f) {
    return f == LhvReport::Form::Counts ? "counts-form" : "probability-form";
}

} // namespace chbell
