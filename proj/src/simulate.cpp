#include "chbell/simulate.hpp"

#include <algorithm>
#include <cmath>

#include "chbell/prediction.hpp"
#include "chbell/rng.hpp"

namespace chbell {

namespace detail {

OutcomeProbs outcome_probs(const EntangledState& state, const SettingPair& sp,
                           const Polarizer& pol1, const Polarizer& pol2) {
    return {coincidence_probability(state, sp.s1, sp.s2, pol1, pol2),
            singles_probability(state, 1, sp.s1, pol1),
            singles_probability(state, 2, sp.s2, pol2)};
}

} // namespace detail

namespace {

// stream labels: (purpose << 8) | configuration index
constexpr std::uint64_t kCountsPurpose = 0x11;
constexpr std::uint64_t kEventsPurpose = 0x22;

struct PairOutcome {
    bool pass1, pass2;
};

// Sample the four-outcome joint distribution. Thresholds are cumulative
// [p_pp, p_pb, p_bp, p_bb]; the complements are consistent because
// p_pp <= min(p1, p2) and p1 + p2 - p_pp <= 1 in the operator model.
inline PairOutcome sample_outcome(Rng& rng, const detail::OutcomeProbs& q) {
    const double u = rng.uniform();
    const double t_pp = q.p_pp;
    const double t_pb = t_pp + std::max(0.0, q.p1 - q.p_pp);
    const double t_bp = t_pb + std::max(0.0, q.p2 - q.p_pp);
    if (u < t_pp) return {true, true};
    if (u < t_pb) return {true, false};
    if (u < t_bp) return {false, true};
    return {false, false};
}

double accidental_mean(const RunPlan& plan, const detail::OutcomeProbs& q) {
    const auto& d = plan.detector;
    const double paired = d.eta1() * d.eta2() * q.p_pp * d.pair_rate();
    const double r1 = d.dark1() + std::max(0.0, d.pair_rate() * d.eta1() * q.p1 - paired);
    const double r2 = d.dark2() + std::max(0.0, d.pair_rate() * d.eta2() * q.p2 - paired);
    // the matcher accepts |t1 - t2| <= w: a 2w-wide window
    return r1 * r2 * (2.0 * d.window_ns() * 1e-9) * plan.duration_s;
}

std::uint64_t count_one_config(const RunPlan& plan, const SettingPair& sp, int k) {
    Rng rng(derive_seed(plan.seed, (kCountsPurpose << 8) | static_cast<std::uint64_t>(k)));
    const auto q = detail::outcome_probs(plan.state, sp, plan.cfg.pol1(), plan.cfg.pol2());
    const std::uint64_t n_pairs = rng.poisson(plan.detector.pair_rate() * plan.duration_s);
    std::uint64_t coinc = 0;
    for (std::uint64_t i = 0; i < n_pairs; ++i) {
        const PairOutcome o = sample_outcome(rng, q);
        const bool det1 = o.pass1 && rng.bernoulli(plan.detector.eta1());
        const bool det2 = o.pass2 && rng.bernoulli(plan.detector.eta2());
        if (det1 && det2) ++coinc;
    }
    return coinc + rng.poisson(accidental_mean(plan, q));
}

ConfigRun events_one_config(const RunPlan& plan, const SettingPair& sp, int k,
                            std::uint64_t duration_ns) {
    Rng rng(derive_seed(plan.seed, (kEventsPurpose << 8) | static_cast<std::uint64_t>(k)));
    const auto q = detail::outcome_probs(plan.state, sp, plan.cfg.pol1(), plan.cfg.pol2());

    std::vector<std::uint64_t> ch1, ch2;

    const std::uint64_t n_pairs = rng.poisson(plan.detector.pair_rate() * plan.duration_s);
    std::vector<std::uint64_t> emissions(n_pairs);
    for (auto& t : emissions) t = rng.uniform_below(duration_ns);
    std::sort(emissions.begin(), emissions.end());

    auto stamp = [&](std::vector<std::uint64_t>& out, std::uint64_t t) {
        if (plan.jitter_sigma_ns == 0.0) {
            out.push_back(t);
            return;
        }
        const double jt = static_cast<double>(t) + rng.normal() * plan.jitter_sigma_ns;
        if (jt < 0.0) return;
        const auto ts = static_cast<std::uint64_t>(std::llround(jt));
        if (ts < duration_ns) out.push_back(ts);
    };

    for (const std::uint64_t t : emissions) {
        const PairOutcome o = sample_outcome(rng, q);
        if (o.pass1 && rng.bernoulli(plan.detector.eta1())) stamp(ch1, t);
        if (o.pass2 && rng.bernoulli(plan.detector.eta2())) stamp(ch2, t);
    }

    for (int ch = 0; ch < 2; ++ch) {
        auto& out = ch ? ch2 : ch1;
        const double rate = ch ? plan.detector.dark2() : plan.detector.dark1();
        const std::uint64_t n_dark = rng.poisson(rate * plan.duration_s);
        for (std::uint64_t i = 0; i < n_dark; ++i) out.push_back(rng.uniform_below(duration_ns));
    }

    std::sort(ch1.begin(), ch1.end());
    std::sort(ch2.begin(), ch2.end());

    ConfigRun run;
    run.settings = sp;
    run.duration_s = plan.duration_s;
    run.ch1 = {1, std::move(ch1), plan.duration_s};
    run.ch2 = {2, std::move(ch2), plan.duration_s};
    return run;
}

} // namespace

std::array<SettingPair, 6> ch_configurations(const AnalyzerConfig& cfg) {
    const Setting a = Setting::angle(cfg.theta1());
    const Setting ap = Setting::angle(cfg.theta1_prime());
    const Setting b = Setting::angle(cfg.theta2());
    const Setting bp = Setting::angle(cfg.theta2_prime());
    const Setting open = Setting::open();
    return {SettingPair{a, b},   SettingPair{a, bp},    SettingPair{ap, b},
            SettingPair{ap, bp}, SettingPair{ap, open}, SettingPair{open, b}};
}

CoincidenceCounts simulate_counts(const RunPlan& plan) {
    const auto configs = ch_configurations(plan.cfg);
    std::array<std::uint64_t, 6> counts{};
    std::exception_ptr failure;

#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int k = 0; k < 6; ++k) {
        try {
            counts[k] = count_one_config(plan, configs[k], k);
        } catch (...) {
#ifdef _OPENMP
#pragma omp critical(chbell_sim_counts_failure)
#endif
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);

    CoincidenceCounts c;
    c.n_ab = counts[0];
    c.n_ab_prime = counts[1];
    c.n_a_prime_b = counts[2];
    c.n_a_prime_b_prime = counts[3];
    c.n_a_prime_open = counts[4];
    c.n_open_b = counts[5];
    c.duration_s = plan.duration_s;
    return c;
}

std::array<ConfigRun, 6> simulate_events(const RunPlan& plan) {
    const auto configs = ch_configurations(plan.cfg);
    const auto duration_ns = static_cast<std::uint64_t>(std::llround(plan.duration_s * 1e9));
    if (duration_ns == 0)
        throw ValidationError("simulate_events: duration below 1 ns");

    std::array<ConfigRun, 6> runs;
    std::exception_ptr failure;

#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int k = 0; k < 6; ++k) {
        try {
            runs[k] = events_one_config(plan, configs[k], k, duration_ns);
        } catch (...) {
#ifdef _OPENMP
#pragma omp critical(chbell_sim_events_failure)
#endif
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    return runs;
}

} // namespace chbell
