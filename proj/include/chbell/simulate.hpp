#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "chbell/bell.hpp"
#include "chbell/model.hpp"

// Monte-Carlo generation of a full six-configuration CH run. Each emitted
// pair is sampled from the exact four-outcome (pass/block x pass/block)
// distribution implied by the measurement-operator model: P(pass,pass) from
// the coincidence probability, the marginals from the singles, P(block,block)
// by complement; detection is an independent Bernoulli(eta) per passed
// photon. Every configuration draws from its own label-derived RNG stream,
// so results do not depend on scheduling.
//
// simulate_counts adds accidentals as a Poisson term with mean
// r1 * r2 * (2 * window) * T (the analyzer matches |t1 - t2| <= window, a
// 2-window-wide acceptance), where r_i = dark_i + unpaired detected singles.
// simulate_events instead produces the raw timestamp streams and leaves the
// window entirely to the analyzer; the two paths are cross-validated in the
// tests.

namespace chbell {

struct RunPlan {
    EntangledState state;
    AnalyzerConfig cfg;
    DetectorModel detector;
    double duration_s = 1.0;
    std::uint64_t seed = 0;
    double jitter_sigma_ns = 0.0;

    RunPlan(EntangledState s, AnalyzerConfig c, DetectorModel d, double dur, std::uint64_t sd,
            double jitter = 0.0)
        : state(s), cfg(c), detector(d), duration_s(dur), seed(sd), jitter_sigma_ns(jitter) {
        if (!(dur > 0.0)) throw ValidationError("RunPlan: duration_s must be > 0");
        if (!(jitter >= 0.0)) throw ValidationError("RunPlan: jitter sigma must be >= 0");
    }
};

struct SettingPair {
    Setting s1 = Setting::open();
    Setting s2 = Setting::open();
};

/// The six CH configurations in canonical order:
/// (t1,t2), (t1,t2'), (t1',t2), (t1',t2'), (t1',open), (open,t2).
std::array<SettingPair, 6> ch_configurations(const AnalyzerConfig& cfg);

/// Per-channel detection timestamps of one configuration, sorted ascending.
struct EventStream {
    int channel = 1;
    std::vector<std::uint64_t> timestamps_ns;
    double duration_s = 0.0;
};

struct ConfigRun {
    SettingPair settings;
    EventStream ch1, ch2;
    double duration_s = 0.0;
};

/// Six coincidence counts (true coincidences + accidentals), no timestamps.
CoincidenceCounts simulate_counts(const RunPlan& plan);

/// Timestamped streams, two per configuration. Darks are independent Poisson
/// processes; pair detections carry the emission time plus optional Gaussian
/// jitter.
std::array<ConfigRun, 6> simulate_events(const RunPlan& plan);

namespace detail {

struct OutcomeProbs {
    double p_pp, p1, p2; // joint pass-pass and the two pass marginals
};

OutcomeProbs outcome_probs(const EntangledState& state, const SettingPair& sp,
                           const Polarizer& pol1, const Polarizer& pol2);

} // namespace detail

} // namespace chbell
