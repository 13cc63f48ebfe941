#include "doctest.h"

#include <cmath>

#include "chbell/bell.hpp"
#include "chbell/optimizer.hpp"
#include "chbell/rng.hpp"

using namespace chbell;

namespace {

const Polarizer kIdeal = Polarizer::ideal();

double paper_value(double f, Objective obj) {
    const AnalyzerConfig cfg = f == 1.0 ? AnalyzerConfig(67.5, 22.5, 45, 0)
                                        : AnalyzerConfig(72.24, 17.76, 45, 0);
    const EntangledState st(f);
    return obj == Objective::CH ? ch_from_probabilities(st, cfg) : r_from_probabilities(st, cfg);
}

double angle_gap(const std::array<double, 4>& a, const std::array<double, 4>& b) {
    double worst = 0.0;
    for (int i = 0; i < 4; ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
    return worst;
}

} // namespace

TEST_CASE("maximally entangled state: CH optimum at the canonical quadruple") {
    const OptimizationResult res = optimize_angles(EntangledState(1), kIdeal, kIdeal,
                                                   Objective::CH);
    CHECK(res.value == doctest::Approx((std::sqrt(2.0) - 1.0) / 2.0).epsilon(1e-9));
    CHECK(angle_gap(res.angles_deg, {67.5, 22.5, 45.0, 0.0}) < 1e-3);
    CHECK(res.slice_anchored);
    CHECK(res.value >= res.grid_value);
    CHECK(res.value >= paper_value(1.0, Objective::CH) - 1e-9);
    CHECK(res.evaluations > 180ull * 180 * 180 * 180);
}

TEST_CASE("maximally entangled state: R optimum is 1.207107 at the same angles") {
    const OptimizationResult res = optimize_angles(EntangledState(1), kIdeal, kIdeal,
                                                   Objective::R);
    CHECK(res.value == doctest::Approx(1.2071067811865475).epsilon(1e-9));
    CHECK(angle_gap(res.angles_deg, {67.5, 22.5, 45.0, 0.0}) < 1e-3);
    CHECK(res.slice_anchored);
}

TEST_CASE("measured state f=0.4: CH optimum sits 0.46 degrees off the quoted angles") {
    const OptimizationResult res = optimize_angles(EntangledState(0.4), kIdeal, kIdeal,
                                                   Objective::CH);
    // exact ridge value, frozen from a 50-digit evaluation
    CHECK(res.value == doctest::Approx(0.1073763777175358).epsilon(1e-10));
    CHECK(res.value >= paper_value(0.4, Objective::CH));
    CHECK(res.slice_anchored);
    CHECK(angle_gap(res.angles_deg, {72.7038556562, 17.2961443438, 45.0, 0.0}) < 1e-3);
    // within the experiment's own rounding of its optimum
    CHECK(angle_gap(res.angles_deg, {72.24, 17.76, 45.0, 0.0}) < 1.5);
}

TEST_CASE("measured state f=0.4: R optimum is isolated and off the canonical slice") {
    const OptimizationResult res = optimize_angles(EntangledState(0.4), kIdeal, kIdeal,
                                                   Objective::R);
    CHECK(res.value == doctest::Approx(1.3617687803).epsilon(1e-8));
    CHECK_FALSE(res.slice_anchored);
    // reported angles reproduce the reported value
    const double re_eval = detail::objective_value(EntangledState(0.4), kIdeal, kIdeal,
                                                   Objective::R, res.angles_deg);
    CHECK(re_eval == doctest::Approx(res.value).epsilon(1e-12));
    CHECK(res.value >= paper_value(0.4, Objective::R));
}

TEST_CASE("product state refuses to optimize") {
    CHECK_THROWS_AS(optimize_angles(EntangledState(0), kIdeal, kIdeal, Objective::CH),
                    NoViolationError);
}

TEST_CASE("max CH grows with the entanglement parameter") {
    double prev = -1.0;
    for (int k = 1; k <= 20; ++k) {
        const double f = 0.05 * k;
        const OptimizationResult res = optimize_angles(EntangledState(f), kIdeal, kIdeal,
                                                       Objective::CH);
        CHECK(res.value >= prev - 1e-9);
        CHECK(res.value >= res.grid_value);
        prev = res.value;
    }
    CHECK(prev == doctest::Approx((std::sqrt(2.0) - 1.0) / 2.0).epsilon(1e-9));
}

TEST_CASE("canonicalize_angles regression anchors") {
    const std::array<double, 4> canonical{67.5, 22.5, 45.0, 0.0};
    CHECK(canonicalize_angles({157.5, 112.5, 135.0, 90.0}) == canonical);
    CHECK(canonicalize_angles(canonical) == canonical);
    // prime-swapped, shifted input: same orbit value, different representative
    const auto c3 = canonicalize_angles({112.5, 157.5, 135.0, 90.0});
    CHECK(c3 == std::array<double, 4>{22.5, 67.5, 45.0, 0.0});
    const EntangledState max_ent(1);
    const double v_in = ch_from_probabilities(max_ent, AnalyzerConfig(112.5, 157.5, 135.0, 90.0));
    const double v_out = ch_from_probabilities(max_ent, AnalyzerConfig(c3[0], c3[1], c3[2], c3[3]));
    CHECK(v_out == doctest::Approx(v_in).epsilon(1e-12));
}

TEST_CASE("the full transform group preserves CH at f=1") {
    Rng rng(41);
    const EntangledState st(1);
    for (int k = 0; k < 300; ++k) {
        const std::array<double, 4> q{rng.uniform() * 180, rng.uniform() * 180,
                                      rng.uniform() * 180, rng.uniform() * 180};
        const double v = detail::objective_value(st, kIdeal, kIdeal, Objective::CH, q);
        const auto c = canonicalize_angles(q);
        const double vc = detail::objective_value(st, kIdeal, kIdeal, Objective::CH, c);
        CHECK(vc == doctest::Approx(v).epsilon(1e-12));
    }
}

TEST_CASE("reflection and arm exchange preserve CH for any f") {
    Rng rng(43);
    for (int k = 0; k < 300; ++k) {
        const EntangledState st(rng.uniform() * 1.5 + 0.01);
        const std::array<double, 4> q{rng.uniform() * 180, rng.uniform() * 180,
                                      rng.uniform() * 180, rng.uniform() * 180};
        const double v = detail::objective_value(st, kIdeal, kIdeal, Objective::CH, q);
        const std::array<double, 4> refl{180 - q[0], 180 - q[1], 180 - q[2], 180 - q[3]};
        const std::array<double, 4> exch{q[3], q[2], q[1], q[0]};
        CHECK(detail::objective_value(st, kIdeal, kIdeal, Objective::CH, refl) ==
              doctest::Approx(v).epsilon(1e-12));
        CHECK(detail::objective_value(st, kIdeal, kIdeal, Objective::CH, exch) ==
              doctest::Approx(v).epsilon(1e-12));
    }
}

TEST_CASE("objective-preserving canonicalization never moves the value") {
    Rng rng(47);
    for (int k = 0; k < 200; ++k) {
        const EntangledState st(rng.uniform() * 1.2 + 0.05);
        const std::array<double, 4> q{rng.uniform() * 180, rng.uniform() * 180,
                                      rng.uniform() * 180, rng.uniform() * 180};
        const double v = detail::objective_value(st, kIdeal, kIdeal, Objective::CH, q);
        const auto c = detail::canonicalize_preserving(st, kIdeal, kIdeal, Objective::CH, q);
        CHECK(detail::objective_value(st, kIdeal, kIdeal, Objective::CH, c) ==
              doctest::Approx(v).epsilon(1e-12));
    }
}

TEST_CASE("coarse grids still certify a lower bound") {
    const OptimizationResult res = optimize_angles(EntangledState(0.7), kIdeal, kIdeal,
                                                   Objective::CH, 36);
    CHECK(res.value >= res.grid_value);
    const OptimizationResult fine = optimize_angles(EntangledState(0.7), kIdeal, kIdeal,
                                                    Objective::CH, 180);
    CHECK(res.value == doctest::Approx(fine.value).epsilon(1e-8));
}
