#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <vector>

#include "chbell/model.hpp"

// Exhaustive grid certification of the CH / R objectives over analyzer
// angles. The objective at a quadruple (a, a', b, b') only needs the joint
// pass-pass table p[a][b] and the singles tables s1, s2, so the full
// [0,180)^4 grid maximum decomposes exactly: for fixed (a, a') the best b'
// maximizes d(b') = p[a'][b'] - p[a][b'] independently of b. That turns the
// O(n^4) scan into O(n^3) without changing a single per-point value — every
// candidate quadruple is still dominated by construction.
//
// A plain four-loop reference implementation is kept for testing and for the
// benchmark target. All kernels evaluate each point with the identical
// floating-point expression and break ties toward the lexicographically
// smallest (a, a', b, b'), so serial, OpenMP and reference runs agree.

namespace chbell {

enum class Objective { CH, R };

struct AngleTables {
    int n = 0;            // grid divisions of [0, 180)
    double step_deg = 0;  // 180 / n
    std::vector<double> p;  // joint pass-pass, p[a * n + b]
    std::vector<double> s1; // arm-1 singles
    std::vector<double> s2; // arm-2 singles
};

AngleTables make_tables(const EntangledState& state, const Polarizer& pol1, const Polarizer& pol2,
                        int n = 180);

struct GridResult {
    double value = -std::numeric_limits<double>::infinity();
    std::array<int, 4> idx{0, 0, 0, 0}; // lex-first argmax (a, a', b, b')
    std::uint64_t points = 0;           // candidate quadruples certified

    std::array<double, 4> angles_deg(const AngleTables& t) const {
        return {idx[0] * t.step_deg, idx[1] * t.step_deg, idx[2] * t.step_deg,
                idx[3] * t.step_deg};
    }
};

/// Brute-force four-loop scan. Serial reference for the fast kernels.
GridResult grid_search_reference(const AngleTables& t, Objective obj);

/// Decomposed scan, serial.
GridResult grid_search_serial(const AngleTables& t, Objective obj);

/// Decomposed scan, OpenMP over the outer angle. Identical result to serial.
GridResult grid_search_omp(const AngleTables& t, Objective obj);

/// OpenMP when available and not already inside a parallel region.
GridResult grid_search(const AngleTables& t, Objective obj);

} // namespace chbell
