#include "chbell/threshold.hpp"

#include <cmath>

namespace chbell {

double eta_critical(const EntangledState& state, const Polarizer& pol1, const Polarizer& pol2,
                    int grid_n) {
    const double fabs = std::sqrt(state.f_abs2());
    if (fabs == 0.0)
        throw NoViolationError("eta_critical: product state (f = 0) never violates");
    if (fabs > 1.0)
        throw ValidationError("eta_critical: |f| must be <= 1 (use the 1/f-equivalent state)");

    const OptimizationResult best = optimize_angles(state, pol1, pol2, Objective::R, grid_n);
    // R <= 1 means the coincidence combination never beats the singles sum:
    // no efficiency below 1 can produce CH > 0.
    if (!(best.value > 1.0))
        throw NoViolationError("eta_critical: no settings with positive CH numerator found");
    return 1.0 / best.value;
}

ThresholdCurve threshold_curve(double f_min, double f_max, int steps, const Polarizer& pol1,
                               const Polarizer& pol2, int grid_n) {
    if (!(f_min > 0.0) || !(f_min < f_max) || !(f_max <= 1.0))
        throw ValidationError("threshold_curve: need 0 < f_min < f_max <= 1");
    if (steps < 2)
        throw ValidationError("threshold_curve: need steps >= 2");

    ThresholdCurve curve;
    curve.points.resize(steps);
    const double df = (f_max - f_min) / (steps - 1);
    std::exception_ptr failure;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
    for (int k = 0; k < steps; ++k) {
        try {
            const double f = f_min + k * df;
            curve.points[k] = {f, eta_critical(EntangledState(f), pol1, pol2, grid_n)};
        } catch (...) {
#ifdef _OPENMP
#pragma omp critical(chbell_threshold_failure)
#endif
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    return curve;
}

} // namespace chbell
