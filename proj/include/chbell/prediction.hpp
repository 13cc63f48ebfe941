#pragma once

#include <utility>
#include <vector>

#include "chbell/model.hpp"

// Closed-form quantum predictions for per-emitted-pair probabilities.
//
// Pass operator of arm i at analyzer angle theta with transmissions
// (eps_par, eps_perp), written in the (H, V) basis:
//
//     E(theta) = [ TH  K ]     TH = eps_par sin^2 + eps_perp cos^2
//                [ K  TV ]     TV = eps_par cos^2 + eps_perp sin^2
//                              K  = (eps_par - eps_perp) sin cos
//
// The convention (H pass-amplitude = sin theta) makes the HH term of the
// coincidence probability eps1_par eps2_par sin^2(t1) sin^2(t2).
// An OPEN arm uses the identity: TH = TV = 1, K = 0.
//
// Detector efficiency is applied downstream (threshold, simulate), never here.

namespace chbell {

namespace detail {

constexpr double kDegToRad = 0.017453292519943295;

struct ArmFactors {
    double th, tv, k;
};

inline ArmFactors arm_factors(double angle_deg, double eps_par, double eps_perp) {
    const double s = std::sin(angle_deg * kDegToRad);
    const double c = std::cos(angle_deg * kDegToRad);
    return {eps_par * s * s + eps_perp * c * c, eps_par * c * c + eps_perp * s * s,
            (eps_par - eps_perp) * s * c};
}

inline ArmFactors open_factors() { return {1.0, 1.0, 0.0}; }

inline ArmFactors factors(const Setting& s, const Polarizer& pol) {
    return s.is_open() ? open_factors() : arm_factors(s.degrees(), pol.eps_par(), pol.eps_perp());
}

inline double joint_pass(const EntangledState& st, const ArmFactors& a1, const ArmFactors& a2) {
    return (a1.th * a2.th + st.f_abs2() * a1.tv * a2.tv + st.f_plus_conj() * a1.k * a2.k) /
           st.norm();
}

inline double single_pass(const EntangledState& st, const ArmFactors& a) {
    return (a.th + st.f_abs2() * a.tv) / st.norm();
}

} // namespace detail

/// P(pass, pass) per emitted pair, in [0, 1].
inline double coincidence_probability(const EntangledState& state, const Setting& s1,
                                      const Setting& s2, const Polarizer& pol1,
                                      const Polarizer& pol2) {
    return detail::joint_pass(state, detail::factors(s1, pol1), detail::factors(s2, pol2));
}

/// P(pass) on one arm, the other arm untouched. OPEN -> 1.
inline double singles_probability(const EntangledState& state, int arm, const Setting& s,
                                  const Polarizer& pol) {
    if (arm != 1 && arm != 2)
        throw ValidationError("singles_probability: arm must be 1 or 2");
    if (s.is_open()) return 1.0;
    return detail::single_pass(state, detail::factors(s, pol));
}

/// Coincidence fringe: one analyzer fixed, the other scanned over [0, 180).
struct FringeScan {
    int fixed_arm = 1; // 1 or 2
    double fixed_angle_deg = 0.0;
    std::vector<std::pair<double, double>> samples; // (scan angle deg, probability)
};

inline FringeScan fringe_scan(const EntangledState& state, int fixed_arm, double fixed_angle,
                              const Polarizer& pol1, const Polarizer& pol2, double step_deg) {
    if (fixed_arm != 1 && fixed_arm != 2)
        throw ValidationError("fringe_scan: fixed_arm must be 1 or 2");
    if (!(step_deg > 0.0) || step_deg > 5.0)
        throw ValidationError("fringe_scan: step must be in (0, 5] degrees, got " +
                              std::to_string(step_deg));
    const Setting fixed = Setting::angle(fixed_angle);
    FringeScan scan{fixed_arm, fixed_angle, {}};
    scan.samples.reserve(static_cast<size_t>(180.0 / step_deg) + 1);
    for (double a = 0.0; a < 180.0; a += step_deg) {
        const Setting moving = Setting::angle(a);
        const double p = (fixed_arm == 1)
                             ? coincidence_probability(state, fixed, moving, pol1, pol2)
                             : coincidence_probability(state, moving, fixed, pol1, pol2);
        scan.samples.emplace_back(a, p);
    }
    return scan;
}

/// (max - min) / (max + min) over the scan samples.
inline double visibility(const FringeScan& scan) {
    if (scan.samples.empty())
        throw ValidationError("visibility: empty scan");
    double lo = scan.samples.front().second, hi = lo;
    for (const auto& [a, p] : scan.samples) {
        lo = std::min(lo, p);
        hi = std::max(hi, p);
    }
    if (hi + lo == 0.0)
        throw UndefinedValueError("visibility: all samples zero, fringe undefined");
    return (hi - lo) / (hi + lo);
}

} // namespace chbell
