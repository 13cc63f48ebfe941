#include "chbell/io.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>

namespace chbell::io {

namespace {

std::string fmt9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

void open_or_throw(std::ofstream& os, const std::filesystem::path& p) {
    os.open(p);
    if (!os) throw IoError("cannot write " + p.string());
}

} // namespace

std::string setting_to_string(const Setting& s) {
    if (s.is_open()) return "open";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", s.degrees());
    return buf;
}

void write_fringe_csv(std::ostream& os, const FringeScan& scan) {
    os << "angle_deg,probability\n";
    for (const auto& [a, p] : scan.samples) os << fmt9(a) << ',' << fmt9(p) << '\n';
}

void write_threshold_csv(std::ostream& os, const ThresholdCurve& curve) {
    os << "f,eta_crit\n";
    for (const auto& [f, eta] : curve.points) os << fmt9(f) << ',' << fmt9(eta) << '\n';
}

void write_event_csv(std::ostream& os, const EventStream& stream) {
    os << "timestamp_ns\n";
    for (const auto t : stream.timestamps_ns) os << t << '\n';
}

void write_run_directory(const std::filesystem::path& dir, const std::array<ConfigRun, 6>& runs) {
    std::filesystem::create_directories(dir);
    nlohmann::json manifest;
    manifest["runs"] = nlohmann::json::array();
    for (int k = 0; k < 6; ++k) {
        const std::string f1 = "run" + std::to_string(k + 1) + "_ch1.csv";
        const std::string f2 = "run" + std::to_string(k + 1) + "_ch2.csv";
        std::ofstream o1, o2;
        open_or_throw(o1, dir / f1);
        write_event_csv(o1, runs[k].ch1);
        open_or_throw(o2, dir / f2);
        write_event_csv(o2, runs[k].ch2);
        manifest["runs"].push_back({{"setting1", setting_to_string(runs[k].settings.s1)},
                                    {"setting2", setting_to_string(runs[k].settings.s2)},
                                    {"file1", f1},
                                    {"file2", f2},
                                    {"duration_s", runs[k].duration_s}});
    }
    std::ofstream om;
    open_or_throw(om, dir / "manifest.json");
    om << manifest.dump(2) << '\n';
}

nlohmann::json ch_result_to_json(const ChResult& r) {
    nlohmann::json j;
    j["ch"] = r.ch;
    j["ch_sigma"] = r.ch_sigma;
    j["r"] = r.r ? nlohmann::json(*r.r) : nlohmann::json();
    j["r_sigma"] = r.r_sigma ? nlohmann::json(*r.r_sigma) : nlohmann::json();
    j["significance"] = r.significance;
    j["units"] = (r.units == ChUnits::CountsPerSecond) ? "counts/s" : "counts";
    return j;
}

nlohmann::json optimization_to_json(const OptimizationResult& r) {
    return {{"angles_deg", r.angles_deg},
            {"objective", r.objective == Objective::CH ? "CH" : "R"},
            {"value", r.value},
            {"evaluations", r.evaluations}};
}

nlohmann::json lhv_report_to_json(const LhvReport& r) {
    return {{"mode", to_string(r.mode)},
            {"no_enhancement", r.no_enhancement},
            {"max_ch", r.max_ch},
            {"argmax", {{"arm1", r.argmax.arm1}, {"arm2", r.argmax.arm2}}},
            {"strategies_checked", r.strategies_checked}};
}

nlohmann::json counts_to_json(const CoincidenceCounts& c, std::uint64_t seed) {
    return {{"counts",
             {{"n_t1_t2", c.n_ab},
              {"n_t1_t2p", c.n_ab_prime},
              {"n_t1p_t2", c.n_a_prime_b},
              {"n_t1p_t2p", c.n_a_prime_b_prime},
              {"n_t1p_open", c.n_a_prime_open},
              {"n_open_t2", c.n_open_b}}},
            {"duration_s", c.duration_s},
            {"seed", seed}};
}

SimConfig load_sim_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("config " + path.string() + ": " + e.what());
    }
    try {
        const auto& jf = j.at("f");
        EntangledState state(jf.at("re").get<double>(), jf.value("im", 0.0));
        auto pol = [&](const char* key) {
            const auto& jp = j.at(key);
            return Polarizer(jp.at("eps_par").get<double>(), jp.at("eps_perp").get<double>());
        };
        const auto& jd = j.at("detector");
        DetectorModel det(jd.value("eta1", 0.535), jd.value("eta2", 0.535),
                          jd.value("dark1", 50.0), jd.value("dark2", 50.0),
                          jd.at("pair_rate").get<double>(), jd.value("window_ns", 10.0));
        const auto& ja = j.at("angles_deg");
        if (!ja.is_array() || ja.size() != 4)
            throw ValidationError("config: angles_deg must be an array of four degrees");
        AnalyzerConfig cfg(ja[0].get<double>(), ja[1].get<double>(), ja[2].get<double>(),
                           ja[3].get<double>(), pol("pol1"), pol("pol2"));
        return SimConfig{state, cfg, det, j.at("duration_s").get<double>(),
                         j.value("seed", std::uint64_t{0}), j.value("jitter_sigma_ns", 0.0)};
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("config " + path.string() + ": " + e.what());
    }
}

} // namespace chbell::io
