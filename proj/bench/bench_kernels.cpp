// Timing comparison of the grid-search kernels: brute-force reference vs the
// decomposed scan, serial vs OpenMP, at the production 1-degree resolution.
//
//   ./bench_kernels [grid_n]

#include <chrono>
#include <cstdio>
#include <cstdlib>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "chbell/kernels.hpp"
#include "chbell/simulate.hpp"

using namespace chbell;

namespace {

template <typename Fn>
double time_ms(Fn&& fn, int reps = 3) {
    double best = 1e300;
    for (int i = 0; i < reps; ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        fn();
        const auto t1 = std::chrono::steady_clock::now();
        best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
    return best;
}

} // namespace

int main(int argc, char** argv) {
    const int n = argc > 1 ? std::atoi(argv[1]) : 180;
#ifdef _OPENMP
    std::printf("grid %d^4 quadruples, OpenMP threads: %d\n", n, omp_get_max_threads());
#else
    std::printf("grid %d^4 quadruples, OpenMP not enabled\n", n);
#endif

    const EntangledState state(0.4);
    const Polarizer ideal = Polarizer::ideal();
    const AngleTables tables = make_tables(state, ideal, ideal, n);

    for (const Objective obj : {Objective::CH, Objective::R}) {
        const char* name = obj == Objective::CH ? "CH" : "R ";
        GridResult ref, ser, par;
        const double t_ref = time_ms([&] { ref = grid_search_reference(tables, obj); }, 1);
        const double t_ser = time_ms([&] { ser = grid_search_serial(tables, obj); });
        const double t_par = time_ms([&] { par = grid_search_omp(tables, obj); });
        std::printf("%s reference %9.2f ms   decomposed %8.3f ms   decomposed+omp %8.3f ms\n",
                    name, t_ref, t_ser, t_par);
        std::printf("   max %.12f / %.12f / %.12f  (must agree)\n", ref.value, ser.value,
                    par.value);
        if (ser.value != par.value || ref.value != ser.value) {
            std::printf("KERNEL MISMATCH\n");
            return 1;
        }
    }

    // six-configuration event simulation, serial vs parallel over configs
    const AnalyzerConfig cfg(72.24, 17.76, 45.0, 0.0);
    const RunPlan plan(state, cfg, DetectorModel(0.535, 0.535, 50, 50, 200000, 10), 1.0, 42);
    const double t_sim = time_ms([&] { (void)simulate_events(plan); });
    std::printf("simulate_events, 2e5 pairs/s x 6 configs: %.1f ms\n", t_sim);
    return 0;
}
