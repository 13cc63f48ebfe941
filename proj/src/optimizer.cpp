#include "chbell/optimizer.hpp"

#include <algorithm>
#include <cmath>

#include "chbell/prediction.hpp"

namespace chbell {

namespace detail {

double objective_value(const EntangledState& state, const Polarizer& pol1, const Polarizer& pol2,
                       Objective obj, const std::array<double, 4>& q) {
    const auto a = arm_factors(q[0], pol1.eps_par(), pol1.eps_perp());
    const auto ap = arm_factors(q[1], pol1.eps_par(), pol1.eps_perp());
    const auto b = arm_factors(q[2], pol2.eps_par(), pol2.eps_perp());
    const auto bp = arm_factors(q[3], pol2.eps_par(), pol2.eps_perp());
    const double combo = (joint_pass(state, a, b) + joint_pass(state, ap, b)) +
                         (joint_pass(state, ap, bp) - joint_pass(state, a, bp));
    const double singles = single_pass(state, ap) + single_pass(state, b);
    if (obj == Objective::CH) return combo - singles;
    if (singles < 1e-12) return -std::numeric_limits<double>::infinity();
    return combo / singles;
}

} // namespace detail

namespace {

constexpr double kCompassStart = 1.0;   // degrees, matches the default grid
constexpr double kCompassStop = 1e-5;   // well below the 1e-3 degree contract
constexpr double kAnchorLoss = 1e-10;   // max value loss accepted for the slice
constexpr std::uint64_t kMaxRefineEvals = 1000000;

struct Refined {
    std::array<double, 4> x;
    double value;
    std::uint64_t evals = 0;
};

// Compass (pattern) search: strict-improvement moves along +-h on each
// coordinate, halving h on failure. free_coords limits which coordinates may
// move (the slice anchor freezes theta2, theta2').
template <typename Fn>
Refined compass(Fn&& fn, std::array<double, 4> x, int free_coords, double h0) {
    Refined r{x, fn(x), 1};
    double h = h0;
    while (h >= kCompassStop && r.evals < kMaxRefineEvals) {
        double best_v = r.value;
        int best_i = -1;
        double best_d = 0.0;
        for (int i = 0; i < free_coords; ++i) {
            for (double d : {h, -h}) {
                auto xt = r.x;
                xt[i] += d;
                const double vt = fn(xt);
                ++r.evals;
                if (vt > best_v) {
                    best_v = vt;
                    best_i = i;
                    best_d = d;
                }
            }
        }
        if (best_i >= 0) {
            r.x[best_i] += best_d;
            r.value = best_v;
        } else {
            h *= 0.5;
        }
    }
    return r;
}

double wrap180(double x) {
    double y = std::fmod(x, 180.0);
    if (y < 0.0) y += 180.0;
    return y;
}

using Quad = std::array<double, 4>;

std::array<Quad, 8> orbit(const Quad& q) {
    auto shift = [](const Quad& x) {
        return Quad{wrap180(x[0] + 90.0), wrap180(x[1] + 90.0), wrap180(x[2] + 90.0),
                    wrap180(x[3] + 90.0)};
    };
    auto refl = [](const Quad& x) {
        return Quad{wrap180(180.0 - x[0]), wrap180(180.0 - x[1]), wrap180(180.0 - x[2]),
                    wrap180(180.0 - x[3])};
    };
    auto exch = [](const Quad& x) { return Quad{x[3], x[2], x[1], x[0]}; };

    const Quad base{wrap180(q[0]), wrap180(q[1]), wrap180(q[2]), wrap180(q[3])};
    std::array<Quad, 8> out;
    int k = 0;
    for (int e = 0; e < 2; ++e)
        for (int r = 0; r < 2; ++r)
            for (int s = 0; s < 2; ++s) {
                Quad c = base;
                if (s) c = shift(c);
                if (r) c = refl(c);
                if (e) c = exch(c);
                out[k++] = c;
            }
    return out;
}

// Prefer candidates with all angles in [0, 90); pick the smallest
// (theta2', theta2, theta1', theta1) key. Deterministic regression anchor.
Quad pick_canonical(const std::array<Quad, 8>& cands, const std::array<bool, 8>& allowed) {
    auto key = [](const Quad& c) { return Quad{c[3], c[2], c[1], c[0]}; };
    auto in_quarter = [](const Quad& c) {
        return c[0] < 90.0 && c[1] < 90.0 && c[2] < 90.0 && c[3] < 90.0;
    };
    int best = -1;
    bool best_quarter = false;
    for (int i = 0; i < 8; ++i) {
        if (!allowed[i]) continue;
        const bool q = in_quarter(cands[i]);
        if (best < 0 || (q && !best_quarter) ||
            (q == best_quarter && key(cands[i]) < key(cands[best]))) {
            best = i;
            best_quarter = q;
        }
    }
    return cands[best < 0 ? 0 : best];
}

} // namespace

std::array<double, 4> canonicalize_angles(const std::array<double, 4>& angles_deg) {
    const auto cands = orbit(angles_deg);
    std::array<bool, 8> allowed;
    allowed.fill(true);
    return pick_canonical(cands, allowed);
}

namespace detail {

std::array<double, 4> canonicalize_preserving(const EntangledState& state, const Polarizer& pol1,
                                              const Polarizer& pol2, Objective obj,
                                              const std::array<double, 4>& angles_deg) {
    const double v0 = objective_value(state, pol1, pol2, obj, angles_deg);
    const auto cands = orbit(angles_deg);
    std::array<bool, 8> allowed;
    for (int i = 0; i < 8; ++i)
        allowed[i] = std::abs(objective_value(state, pol1, pol2, obj, cands[i]) - v0) <= 1e-12;
    return pick_canonical(cands, allowed);
}

} // namespace detail

OptimizationResult optimize_angles(const EntangledState& state, const Polarizer& pol1,
                                   const Polarizer& pol2, Objective objective, int grid_n) {
    if (state.is_product())
        throw NoViolationError("optimize_angles: product state (f = 0), objective <= 0 everywhere");

    const auto tables = make_tables(state, pol1, pol2, grid_n);
    const GridResult grid = grid_search(tables, objective);
    if (!std::isfinite(grid.value))
        throw NoViolationError("optimize_angles: no admissible grid point");

    auto fn = [&](const std::array<double, 4>& q) {
        return detail::objective_value(state, pol1, pol2, objective, q);
    };

    const Refined free4 = compass(fn, grid.angles_deg(tables), 4,
                                  std::max(kCompassStart, tables.step_deg));

    // Canonical-slice anchor: best (theta1, theta1') with (theta2, theta2')
    // frozen at (45, 0), kept only when lossless.
    std::array<double, 4> slice_start{0.0, 0.0, 45.0, 0.0};
    double slice_grid = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < 180; ++a)
        for (int ap = 0; ap < 180; ++ap) {
            const double v = fn({static_cast<double>(a), static_cast<double>(ap), 45.0, 0.0});
            if (v > slice_grid) {
                slice_grid = v;
                slice_start = {static_cast<double>(a), static_cast<double>(ap), 45.0, 0.0};
            }
        }
    const Refined slice = compass(fn, slice_start, 2, kCompassStart);

    OptimizationResult res;
    res.objective = objective;
    res.grid_value = grid.value;
    res.evaluations = grid.points + free4.evals + 180 * 180 + slice.evals;
    if (slice.value >= free4.value - kAnchorLoss && slice.value >= grid.value) {
        res.angles_deg = slice.x;
        res.value = slice.value;
        res.slice_anchored = true;
    } else {
        res.angles_deg = free4.x;
        res.value = free4.value;
    }
    res.angles_deg =
        detail::canonicalize_preserving(state, pol1, pol2, objective, res.angles_deg);
    if (res.value < grid.value)
        throw std::logic_error("optimize_angles: refinement lost the grid bound");
    return res;
}

} // namespace chbell
