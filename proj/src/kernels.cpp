#include "chbell/kernels.hpp"

#include "chbell/prediction.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace chbell {

namespace {

constexpr double kMinSinglesSum = 1e-12;

// One evaluation, shared by every kernel. The association order is fixed so
// that reference, serial and OpenMP paths produce bit-identical doubles.
inline double point_value(const AngleTables& t, Objective obj, int a, int ap, int b, int bp,
                          bool& ok) {
    const int n = t.n;
    const double combo =
        (t.p[a * n + b] + t.p[ap * n + b]) + (t.p[ap * n + bp] - t.p[a * n + bp]);
    const double singles = t.s1[ap] + t.s2[b];
    if (obj == Objective::CH) {
        ok = true;
        return combo - singles;
    }
    if (singles < kMinSinglesSum) {
        ok = false;
        return 0.0;
    }
    ok = true;
    return combo / singles;
}

struct Best {
    double value = -std::numeric_limits<double>::infinity();
    int a = 0, ap = 0, b = 0, bp = 0;
};

// Scan all (a', b, b') for one fixed a. Lex order within the slice.
inline Best scan_outer_angle(const AngleTables& t, Objective obj, int a) {
    const int n = t.n;
    const double* p = t.p.data();
    const double* pa = p + static_cast<size_t>(a) * n;
    Best best;
    for (int ap = 0; ap < n; ++ap) {
        const double* pap = p + static_cast<size_t>(ap) * n;
        // best b' maximizes d(b') = p[a'][b'] - p[a][b'], first index on ties
        double dmax = pap[0] - pa[0];
        int darg = 0;
        for (int bp = 1; bp < n; ++bp) {
            const double d = pap[bp] - pa[bp];
            if (d > dmax) {
                dmax = d;
                darg = bp;
            }
        }
        const double s1ap = t.s1[ap];
        if (obj == Objective::CH) {
            for (int b = 0; b < n; ++b) {
                const double v = ((pa[b] + pap[b]) + dmax) - (s1ap + t.s2[b]);
                if (v > best.value) {
                    best = {v, a, ap, b, darg};
                }
            }
        } else {
            for (int b = 0; b < n; ++b) {
                const double singles = s1ap + t.s2[b];
                if (singles < kMinSinglesSum) continue;
                const double v = ((pa[b] + pap[b]) + dmax) / singles;
                if (v > best.value) {
                    best = {v, a, ap, b, darg};
                }
            }
        }
    }
    return best;
}

GridResult to_result(const Best& best, std::uint64_t points) {
    GridResult r;
    r.value = best.value;
    r.idx = {best.a, best.ap, best.b, best.bp};
    r.points = points;
    return r;
}

} // namespace

AngleTables make_tables(const EntangledState& state, const Polarizer& pol1, const Polarizer& pol2,
                        int n) {
    if (n < 2)
        throw ValidationError("make_tables: need at least 2 grid divisions");
    AngleTables t;
    t.n = n;
    t.step_deg = 180.0 / n;
    t.p.resize(static_cast<size_t>(n) * n);
    t.s1.resize(n);
    t.s2.resize(n);
    std::vector<detail::ArmFactors> f1(n), f2(n);
    for (int i = 0; i < n; ++i) {
        const double ang = i * t.step_deg;
        f1[i] = detail::arm_factors(ang, pol1.eps_par(), pol1.eps_perp());
        f2[i] = detail::arm_factors(ang, pol2.eps_par(), pol2.eps_perp());
        t.s1[i] = detail::single_pass(state, f1[i]);
        t.s2[i] = detail::single_pass(state, f2[i]);
    }
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            t.p[static_cast<size_t>(a) * n + b] = detail::joint_pass(state, f1[a], f2[b]);
    return t;
}

GridResult grid_search_reference(const AngleTables& t, Objective obj) {
    const int n = t.n;
    Best best;
    for (int a = 0; a < n; ++a)
        for (int ap = 0; ap < n; ++ap)
            for (int b = 0; b < n; ++b)
                for (int bp = 0; bp < n; ++bp) {
                    bool ok;
                    const double v = point_value(t, obj, a, ap, b, bp, ok);
                    if (ok && v > best.value) {
                        best = {v, a, ap, b, bp};
                    }
                }
    return to_result(best, static_cast<std::uint64_t>(n) * n * n * n);
}

GridResult grid_search_serial(const AngleTables& t, Objective obj) {
    Best best;
    for (int a = 0; a < t.n; ++a) {
        const Best local = scan_outer_angle(t, obj, a);
        if (local.value > best.value) best = local;
    }
    return to_result(best, static_cast<std::uint64_t>(t.n) * t.n * t.n * t.n);
}

GridResult grid_search_omp(const AngleTables& t, Objective obj) {
    std::vector<Best> per_a(t.n);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int a = 0; a < t.n; ++a)
        per_a[a] = scan_outer_angle(t, obj, a);
    // merge in ascending a: same selection as the serial loop
    Best best;
    for (int a = 0; a < t.n; ++a)
        if (per_a[a].value > best.value) best = per_a[a];
    return to_result(best, static_cast<std::uint64_t>(t.n) * t.n * t.n * t.n);
}

GridResult grid_search(const AngleTables& t, Objective obj) {
#ifdef _OPENMP
    if (!omp_in_parallel()) return grid_search_omp(t, obj);
#endif
    return grid_search_serial(t, obj);
}

} // namespace chbell
