#pragma once

#include <utility>
#include <vector>

#include "chbell/model.hpp"
#include "chbell/optimizer.hpp"

// Detection-efficiency threshold. With symmetric efficiency eta on both arms
// and no background, the probability-form CH scales as
//
//   CH(eta) = eta^2 [P(t1,t2) - P(t1,t2') + P(t1',t2) + P(t1',t2')]
//           - eta  [P1(t1') + P2(t2)]
//
// which is positive iff eta > [P1 + P2] / [coincidence combination]. The
// critical efficiency is the minimum of that ratio over analyzer settings,
// i.e. the reciprocal of the maximal R, computed with the optimizer's
// grid + refinement machinery.
//
// The experimental count-form CH uses polarizer-removed *coincidences* for
// its last two terms; those scale as eta^2 like everything else, so the
// count-form CH is efficiency-independent and blind to the loophole (that is
// what the fair-sampling hypothesis hides). The threshold below is therefore
// defined on the probability form with true single-arm detection terms.

namespace chbell {

struct ThresholdCurve {
    std::vector<std::pair<double, double>> points; // (f, eta_crit), f ascending
};

/// Smallest symmetric efficiency allowing CH > 0 for this state. Requires
/// 0 < |f| <= 1.
double eta_critical(const EntangledState& state, const Polarizer& pol1, const Polarizer& pol2,
                    int grid_n = 180);

/// eta_critical sampled on a uniform f grid (endpoints included).
ThresholdCurve threshold_curve(double f_min, double f_max, int steps, const Polarizer& pol1,
                               const Polarizer& pol2, int grid_n = 180);

} // namespace chbell
