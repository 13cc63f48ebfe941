#include "chbell/analyze.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>

#include "json.hpp"

namespace chbell {

namespace {

inline std::uint64_t distance(std::uint64_t a, std::uint64_t b) { return a > b ? a - b : b - a; }

void validate_sorted(std::span<const std::uint64_t> ts, const char* name) {
    for (size_t i = 1; i < ts.size(); ++i)
        if (ts[i] < ts[i - 1])
            throw FormatError(std::string(name) + " timestamps unsorted at index " +
                              std::to_string(i));
}

// Line-at-a-time reader over a timestamp CSV; O(1) state.
class TimestampReader {
  public:
    explicit TimestampReader(const std::filesystem::path& path) : path_(path), in_(path) {
        if (!in_) throw IoError("cannot open event file " + path.string());
    }

    // Returns false at EOF. Validates ordering while reading.
    bool next(std::uint64_t& out) {
        std::string line;
        while (std::getline(in_, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            if (index_ == 0 && line == "timestamp_ns") continue;
            std::uint64_t v = 0;
            const auto [p, ec] = std::from_chars(line.data(), line.data() + line.size(), v);
            if (ec != std::errc() || p != line.data() + line.size())
                throw FormatError(path_.string() + ": bad timestamp at index " +
                                  std::to_string(index_));
            if (index_ > 0 && v < last_)
                throw FormatError(path_.string() + ": timestamps unsorted at index " +
                                  std::to_string(index_));
            last_ = v;
            ++index_;
            out = v;
            return true;
        }
        return false;
    }

    std::uint64_t events_read() const { return index_; }

  private:
    std::filesystem::path path_;
    std::ifstream in_;
    std::uint64_t last_ = 0;
    std::uint64_t index_ = 0;
};

struct MatchStats {
    std::uint64_t coincidences = 0;
    std::uint64_t n1 = 0, n2 = 0;
};

MatchStats match_streams(TimestampReader& s1, TimestampReader& s2, double window_ns) {
    if (!(window_ns > 0.0)) throw ValidationError("count_coincidences: window must be > 0");
    MatchStats st;
    std::uint64_t ta = 0, tb = 0;
    bool a_ok = s1.next(ta);
    bool b_ok = s2.next(tb);
    while (a_ok && b_ok) {
        if (static_cast<double>(distance(ta, tb)) <= window_ns) {
            ++st.coincidences;
            a_ok = s1.next(ta);
            b_ok = s2.next(tb);
        } else if (ta < tb) {
            a_ok = s1.next(ta);
        } else {
            b_ok = s2.next(tb);
        }
    }
    // drain the tails so ordering is validated end to end
    while (a_ok) a_ok = s1.next(ta);
    while (b_ok) b_ok = s2.next(tb);
    st.n1 = s1.events_read();
    st.n2 = s2.events_read();
    return st;
}

struct ParsedSetting {
    bool open = false;
    double angle = 0.0;
};

ParsedSetting parse_setting(const std::string& s) {
    if (s == "open") return {true, 0.0};
    double v = 0.0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        throw ManifestError("manifest: setting '" + s + "' is neither an angle nor \"open\"");
    return {false, v};
}

} // namespace

std::uint64_t count_coincidences(std::span<const std::uint64_t> ch1,
                                 std::span<const std::uint64_t> ch2, double window_ns) {
    if (!(window_ns > 0.0)) throw ValidationError("count_coincidences: window must be > 0");
    validate_sorted(ch1, "channel 1");
    validate_sorted(ch2, "channel 2");
    std::uint64_t count = 0;
    size_t i = 0, j = 0;
    while (i < ch1.size() && j < ch2.size()) {
        if (static_cast<double>(distance(ch1[i], ch2[j])) <= window_ns) {
            ++count;
            ++i;
            ++j;
        } else if (ch1[i] < ch2[j]) {
            ++i;
        } else {
            ++j;
        }
    }
    return count;
}

std::uint64_t count_coincidences_files(const std::filesystem::path& file1,
                                       const std::filesystem::path& file2, double window_ns) {
    TimestampReader r1(file1), r2(file2);
    return match_streams(r1, r2, window_ns).coincidences;
}

RunManifest load_manifest(const std::filesystem::path& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) throw IoError("cannot open manifest " + manifest_path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ManifestError("manifest " + manifest_path.string() + ": " + e.what());
    }
    if (!j.contains("runs") || !j["runs"].is_array())
        throw ManifestError("manifest: missing \"runs\" array");
    RunManifest m;
    m.base_dir = manifest_path.parent_path();
    for (const auto& r : j["runs"]) {
        try {
            m.runs.push_back({r.at("setting1").get<std::string>(),
                              r.at("setting2").get<std::string>(),
                              r.at("file1").get<std::string>(), r.at("file2").get<std::string>(),
                              r.at("duration_s").get<double>()});
        } catch (const nlohmann::json::exception& e) {
            throw ManifestError(std::string("manifest run entry: ") + e.what());
        }
    }
    return m;
}

AnalysisResult analyze_run(const RunManifest& manifest, double window_ns, ChUnits units,
                           bool subtract_accidentals) {
    if (manifest.runs.size() != 6)
        throw ManifestError("manifest must list exactly the six CH configurations, got " +
                            std::to_string(manifest.runs.size()));

    struct Parsed {
        ParsedSetting s1, s2;
    };
    std::vector<Parsed> parsed;
    for (const auto& r : manifest.runs)
        parsed.push_back({parse_setting(r.setting1), parse_setting(r.setting2)});

    int open1 = -1, open2 = -1;
    for (int i = 0; i < 6; ++i) {
        if (parsed[i].s1.open && parsed[i].s2.open)
            throw ManifestError("manifest: run with both arms open is not a CH configuration");
        if (parsed[i].s1.open) {
            if (open1 >= 0) throw ManifestError("manifest: duplicate (open, theta2) run");
            open1 = i;
        }
        if (parsed[i].s2.open) {
            if (open2 >= 0) throw ManifestError("manifest: duplicate (theta1', open) run");
            open2 = i;
        }
    }
    if (open1 < 0) throw ManifestError("manifest: missing the (open, theta2) configuration");
    if (open2 < 0) throw ManifestError("manifest: missing the (theta1', open) configuration");

    const double theta2 = parsed[open1].s2.angle;
    const double theta1p = parsed[open2].s1.angle;

    double theta1 = 0.0, theta2p = 0.0;
    bool have1 = false, have2p = false;
    for (int i = 0; i < 6; ++i) {
        if (i == open1 || i == open2) continue;
        const double a1 = parsed[i].s1.angle, a2 = parsed[i].s2.angle;
        if (a1 != theta1p) {
            if (have1 && theta1 != a1)
                throw ManifestError("manifest: more than two arm-1 angles present");
            theta1 = a1;
            have1 = true;
        }
        if (a2 != theta2) {
            if (have2p && theta2p != a2)
                throw ManifestError("manifest: more than two arm-2 angles present");
            theta2p = a2;
            have2p = true;
        }
    }
    if (!have1) throw ManifestError("manifest: theta1 never appears (theta1 = theta1'?)");
    if (!have2p) throw ManifestError("manifest: theta2' never appears (theta2 = theta2'?)");

    // slot order: (t1,t2) (t1,t2') (t1',t2) (t1',t2') (t1',open) (open,t2)
    static const char* kSlotNames[6] = {"(theta1, theta2)",  "(theta1, theta2')",
                                        "(theta1', theta2)", "(theta1', theta2')",
                                        "(theta1', open)",   "(open, theta2)"};
    std::array<int, 6> slot_run;
    slot_run.fill(-1);
    auto assign = [&](int slot, int run) {
        if (slot_run[slot] >= 0)
            throw ManifestError(std::string("manifest: duplicate configuration ") +
                                kSlotNames[slot]);
        slot_run[slot] = run;
    };
    assign(4, open2);
    assign(5, open1);
    for (int i = 0; i < 6; ++i) {
        if (i == open1 || i == open2) continue;
        const double a1 = parsed[i].s1.angle, a2 = parsed[i].s2.angle;
        if (a1 == theta1 && a2 == theta2) assign(0, i);
        else if (a1 == theta1 && a2 == theta2p) assign(1, i);
        else if (a1 == theta1p && a2 == theta2) assign(2, i);
        else if (a1 == theta1p && a2 == theta2p) assign(3, i);
        else
            throw ManifestError("manifest: run (" + manifest.runs[i].setting1 + ", " +
                                manifest.runs[i].setting2 + ") fits no CH configuration");
    }
    for (int s = 0; s < 6; ++s)
        if (slot_run[s] < 0)
            throw ManifestError(std::string("manifest: missing configuration ") + kSlotNames[s]);

    const double duration = manifest.runs[0].duration_s;
    for (const auto& r : manifest.runs) {
        if (!(r.duration_s > 0.0))
            throw ManifestError("manifest: duration_s must be > 0");
        if (r.duration_s != duration)
            throw ManifestError("manifest: configurations have unequal durations");
    }

    AnalysisResult res;
    res.per_run.resize(6);
    std::array<MatchStats, 6> stats;
    std::exception_ptr failure;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
    for (int i = 0; i < 6; ++i) {
        try {
            TimestampReader r1(manifest.base_dir / manifest.runs[i].file1);
            TimestampReader r2(manifest.base_dir / manifest.runs[i].file2);
            stats[i] = match_streams(r1, r2, window_ns);
            res.per_run[i] = {manifest.runs[i], stats[i].coincidences};
        } catch (...) {
#ifdef _OPENMP
#pragma omp critical(chbell_analyze_failure)
#endif
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);

    std::array<std::uint64_t, 6> n;
    for (int s = 0; s < 6; ++s) n[s] = stats[slot_run[s]].coincidences;
    res.counts = {n[0], n[1], n[2], n[3], n[4], n[5], duration};
    res.ch = ch_from_counts(res.counts, units);

    if (subtract_accidentals) {
        const double scale = (units == ChUnits::CountsPerSecond) ? 1.0 / duration : 1.0;
        double adj[6];
        for (int s = 0; s < 6; ++s) {
            const auto& st = stats[slot_run[s]];
            const double r1 = static_cast<double>(st.n1) / duration;
            const double r2 = static_cast<double>(st.n2) / duration;
            adj[s] = static_cast<double>(n[s]) - r1 * r2 * (2.0 * window_ns * 1e-9) * duration;
        }
        res.ch.ch = (adj[0] - adj[1] + adj[2] + adj[3] - adj[4] - adj[5]) * scale;
        res.ch.significance = (res.ch.ch_sigma > 0.0) ? res.ch.ch / res.ch.ch_sigma : 0.0;
        const double den = adj[4] + adj[5];
        if (den > 0.0)
            res.ch.r = (adj[0] - adj[1] + adj[2] + adj[3]) / den;
    }
    return res;
}

} // namespace chbell
