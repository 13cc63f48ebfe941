#pragma once

#include <array>
#include <cstdint>

#include "chbell/bell.hpp"
#include "chbell/kernels.hpp"
#include "chbell/model.hpp"

// Global angle optimization: exhaustive 1-degree grid certification over
// [0,180)^4, derivative-free compass refinement from the best grid point,
// then a canonical-representative step.
//
// The maximum of the CH objective is degenerate along an exactly flat
// one-parameter ridge for every f (for f = 1 it is the rotation orbit of the
// maximally entangled state; for f != 1 the degeneracy is accidental but
// numerically exact). The ridge crosses the slice (theta2, theta2') =
// (45, 0), which is the conventional representative, so after the free
// refinement the optimizer re-optimizes (theta1, theta1') on that slice and
// keeps the slice point iff it loses nothing (within 1e-10 of the free
// optimum and still above the certified grid value). Objectives whose optima
// are isolated and off-slice (R for f < 1) reject the anchor and report the
// free refined point.

namespace chbell {

struct OptimizationResult {
    std::array<double, 4> angles_deg{}; // theta1, theta1', theta2, theta2'
    Objective objective = Objective::CH;
    double value = 0.0;
    std::uint64_t evaluations = 0; // grid quadruples certified + refinement calls
    double grid_value = 0.0;       // certified exhaustive-grid lower bound
    bool slice_anchored = false;   // canonical slice representative was lossless
};

OptimizationResult optimize_angles(const EntangledState& state, const Polarizer& pol1,
                                   const Polarizer& pol2, Objective objective, int grid_n = 180);

/// Canonical representative of the symmetry orbit of an angle quadruple under
/// {+90 shift on all four} x {global reflection} x {arm exchange}. The shift
/// (and shift-reflection) legs exchange the H/V labels and preserve the
/// objective exactly only for |f| = 1; arm exchange and reflection are exact
/// for any f with equal polarizers.
std::array<double, 4> canonicalize_angles(const std::array<double, 4>& angles_deg);

namespace detail {

/// Objective value at arbitrary (unwrapped) angles. R returns -inf where the
/// singles sum vanishes.
double objective_value(const EntangledState& state, const Polarizer& pol1, const Polarizer& pol2,
                       Objective obj, const std::array<double, 4>& angles_deg);

/// Orbit canonicalization restricted to transforms that leave the given
/// objective unchanged within 1e-12. Used on optimizer outputs so the
/// reported value never moves.
std::array<double, 4> canonicalize_preserving(const EntangledState& state, const Polarizer& pol1,
                                              const Polarizer& pol2, Objective obj,
                                              const std::array<double, 4>& angles_deg);

} // namespace detail

} // namespace chbell
