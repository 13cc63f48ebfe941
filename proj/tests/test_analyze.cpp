#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <vector>

#include "chbell/analyze.hpp"
#include "chbell/io.hpp"
#include "chbell/rng.hpp"
#include "chbell/simulate.hpp"

using namespace chbell;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const char* tag) {
    const fs::path p = fs::temp_directory_path() / (std::string("chbell_test_") + tag);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::vector<std::uint64_t> random_sorted(Rng& rng, size_t n, std::uint64_t span) {
    std::vector<std::uint64_t> v(n);
    for (auto& t : v) t = rng.uniform_below(span);
    std::sort(v.begin(), v.end());
    return v;
}

} // namespace

TEST_CASE("hand-enumerated coincidence counts") {
    const std::vector<std::uint64_t> empty;
    const std::vector<std::uint64_t> ch1{100, 500, 900};
    const std::vector<std::uint64_t> ch2{120, 700};
    CHECK(count_coincidences(empty, ch2, 50) == 0);
    CHECK(count_coincidences(ch1, ch2, 50) == 1);  // 100 <-> 120
    CHECK(count_coincidences(ch1, ch2, 250) == 2); // 100 <-> 120, 500 <-> 700
    // equal-distance candidates on both sides: the earlier partner wins and
    // the later one stays available
    const std::vector<std::uint64_t> a{100, 121};
    const std::vector<std::uint64_t> b{80, 120};
    CHECK(count_coincidences(a, b, 20) == 2);
    // each event is consumed at most once
    const std::vector<std::uint64_t> c{100};
    const std::vector<std::uint64_t> d{95, 105};
    CHECK(count_coincidences(c, d, 10) == 1);
}

TEST_CASE("matching is symmetric, windowed-monotone and size-bounded") {
    Rng rng(55);
    for (int k = 0; k < 50; ++k) {
        const auto ch1 = random_sorted(rng, 200 + k, 100000);
        const auto ch2 = random_sorted(rng, 150 + 2 * k, 100000);
        const auto w1 = count_coincidences(ch1, ch2, 50);
        CHECK(count_coincidences(ch2, ch1, 50) == w1);
        const auto w2 = count_coincidences(ch1, ch2, 400);
        CHECK(w1 <= w2);
        CHECK(w2 <= std::min(ch1.size(), ch2.size()));
    }
}

TEST_CASE("unsorted input is reported with the offending index") {
    const std::vector<std::uint64_t> bad{5, 3};
    const std::vector<std::uint64_t> good{1, 2};
    CHECK_THROWS_WITH_AS(count_coincidences(bad, good, 10), doctest::Contains("index 1"),
                         FormatError);
    CHECK_THROWS_AS(count_coincidences(good, bad, 10), FormatError);
    CHECK_THROWS_AS(count_coincidences(good, good, 0.0), ValidationError);
}

TEST_CASE("file-based matching equals the in-memory matcher") {
    Rng rng(77);
    const auto dir = temp_dir("files");
    const auto ch1 = random_sorted(rng, 5000, 10000000);
    const auto ch2 = random_sorted(rng, 4000, 10000000);
    {
        std::ofstream o1(dir / "a.csv"), o2(dir / "b.csv");
        io::write_event_csv(o1, EventStream{1, ch1, 1.0});
        io::write_event_csv(o2, EventStream{2, ch2, 1.0});
    }
    CHECK(count_coincidences_files(dir / "a.csv", dir / "b.csv", 123.0) ==
          count_coincidences(ch1, ch2, 123.0));
    CHECK_THROWS_AS(count_coincidences_files(dir / "missing.csv", dir / "b.csv", 10.0), IoError);
    fs::remove_all(dir);
}

TEST_CASE("simulate -> write -> load -> analyze round trip") {
    const auto dir = temp_dir("roundtrip");
    const RunPlan plan(EntangledState(0.4), AnalyzerConfig(72.24, 17.76, 45, 0),
                       DetectorModel(1.0, 1.0, 0, 0, 50000, 10.0), 1.0, 987);
    const auto runs = simulate_events(plan);
    io::write_run_directory(dir, runs);

    const RunManifest manifest = load_manifest(dir / "manifest.json");
    REQUIRE(manifest.runs.size() == 6);
    const AnalysisResult res = analyze_run(manifest, 10.0);

    // analysis must agree with matching the in-memory streams directly
    const std::array<std::uint64_t, 6> direct{
        count_coincidences(runs[0].ch1.timestamps_ns, runs[0].ch2.timestamps_ns, 10.0),
        count_coincidences(runs[1].ch1.timestamps_ns, runs[1].ch2.timestamps_ns, 10.0),
        count_coincidences(runs[2].ch1.timestamps_ns, runs[2].ch2.timestamps_ns, 10.0),
        count_coincidences(runs[3].ch1.timestamps_ns, runs[3].ch2.timestamps_ns, 10.0),
        count_coincidences(runs[4].ch1.timestamps_ns, runs[4].ch2.timestamps_ns, 10.0),
        count_coincidences(runs[5].ch1.timestamps_ns, runs[5].ch2.timestamps_ns, 10.0)};
    CHECK(res.counts.n_ab == direct[0]);
    CHECK(res.counts.n_ab_prime == direct[1]);
    CHECK(res.counts.n_a_prime_b == direct[2]);
    CHECK(res.counts.n_a_prime_b_prime == direct[3]);
    CHECK(res.counts.n_a_prime_open == direct[4]);
    CHECK(res.counts.n_open_b == direct[5]);

    // f=0.4 at the measured angles with eta=1 violates loudly
    CHECK(res.ch.ch > 0.0);
    CHECK(res.ch.significance > 3.0);
    REQUIRE(res.ch.r.has_value());
    CHECK(*res.ch.r > 1.0);
    fs::remove_all(dir);
}

TEST_CASE("manifest classification survives run shuffling") {
    const auto dir = temp_dir("shuffle");
    const RunPlan plan(EntangledState(0.4), AnalyzerConfig(72.24, 17.76, 45, 0),
                       DetectorModel(1.0, 1.0, 0, 0, 10000, 10.0), 0.5, 11);
    io::write_run_directory(dir, simulate_events(plan));
    RunManifest manifest = load_manifest(dir / "manifest.json");
    const double ch0 = analyze_run(manifest, 10.0).ch.ch;
    std::swap(manifest.runs[0], manifest.runs[5]);
    std::swap(manifest.runs[2], manifest.runs[3]);
    CHECK(analyze_run(manifest, 10.0).ch.ch == ch0);
    fs::remove_all(dir);
}

TEST_CASE("manifest validation failures") {
    const auto dir = temp_dir("badmanifest");
    const RunPlan plan(EntangledState(0.4), AnalyzerConfig(72.24, 17.76, 45, 0),
                       DetectorModel(1.0, 1.0, 0, 0, 1000, 10.0), 0.5, 13);
    io::write_run_directory(dir, simulate_events(plan));
    const RunManifest good = load_manifest(dir / "manifest.json");

    RunManifest five = good;
    five.runs.pop_back();
    CHECK_THROWS_WITH_AS(analyze_run(five, 10.0), doctest::Contains("six"), ManifestError);

    RunManifest dup = good;
    dup.runs[1] = dup.runs[0]; // two (t1,t2) runs, (t1,t2') missing
    CHECK_THROWS_AS(analyze_run(dup, 10.0), ManifestError);

    RunManifest no_open = good;
    no_open.runs[5].setting1 = "10"; // was "open"
    CHECK_THROWS_WITH_AS(analyze_run(no_open, 10.0), doctest::Contains("open"), ManifestError);

    RunManifest both_open = good;
    both_open.runs[5].setting2 = "open";
    CHECK_THROWS_AS(analyze_run(both_open, 10.0), ManifestError);

    RunManifest uneven = good;
    uneven.runs[2].duration_s *= 2.0;
    CHECK_THROWS_WITH_AS(analyze_run(uneven, 10.0), doctest::Contains("duration"), ManifestError);

    RunManifest garbled = good;
    garbled.runs[3].setting2 = "forty-five";
    CHECK_THROWS_AS(analyze_run(garbled, 10.0), ManifestError);

    CHECK_THROWS_AS(load_manifest(dir / "nope.json"), IoError);

    RunManifest missing_file = good;
    missing_file.runs[4].file1 = "not_there.csv";
    CHECK_THROWS_AS(analyze_run(missing_file, 10.0), IoError);
    fs::remove_all(dir);
}

TEST_CASE("all-empty event files give ch = 0 with r undefined") {
    const auto dir = temp_dir("empty");
    const RunPlan plan(EntangledState(0.4), AnalyzerConfig(72.24, 17.76, 45, 0),
                       DetectorModel(1.0, 1.0, 0, 0, 0, 10.0), 1.0, 3);
    io::write_run_directory(dir, simulate_events(plan));
    const AnalysisResult res = analyze_run(load_manifest(dir / "manifest.json"), 10.0);
    CHECK(res.ch.ch == 0.0);
    CHECK(res.ch.ch_sigma == 0.0);
    CHECK_FALSE(res.ch.r.has_value());
    fs::remove_all(dir);
}

TEST_CASE("accidental subtraction removes the estimated window term") {
    const auto dir = temp_dir("subtract");
    const RunPlan plan(EntangledState(0.4), AnalyzerConfig(72.24, 17.76, 45, 0),
                       DetectorModel(1.0, 1.0, 2000.0, 2000.0, 20000, 200.0), 2.0, 17);
    const auto runs = simulate_events(plan);
    io::write_run_directory(dir, runs);
    const RunManifest manifest = load_manifest(dir / "manifest.json");
    const AnalysisResult raw = analyze_run(manifest, 200.0, ChUnits::Counts, false);
    const AnalysisResult sub = analyze_run(manifest, 200.0, ChUnits::Counts, true);

    // expected adjustment from the per-channel event totals
    double expected = 0.0;
    const double sign[6] = {1, -1, 1, 1, -1, -1};
    for (int k = 0; k < 6; ++k) {
        const double r1 = static_cast<double>(runs[k].ch1.timestamps_ns.size()) / 2.0;
        const double r2 = static_cast<double>(runs[k].ch2.timestamps_ns.size()) / 2.0;
        expected += sign[k] * r1 * r2 * (2.0 * 200.0 * 1e-9) * 2.0;
    }
    CHECK(sub.ch.ch == doctest::Approx(raw.ch.ch - expected).epsilon(1e-9));
    CHECK(sub.ch.ch_sigma == raw.ch.ch_sigma);
    fs::remove_all(dir);
}
