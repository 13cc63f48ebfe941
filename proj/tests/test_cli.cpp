#include "doctest.h"

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "schema_check.hpp"

namespace fs = std::filesystem;

namespace {

struct CliResult {
    int exit_code;
    std::string out;
};

CliResult run_cli(const std::string& args, const std::string& env_prefix = "") {
    const std::string cmd = env_prefix + std::string(CHBELL_BIN) + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string out;
    char buf[4096];
    size_t n;
    while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, n);
    const int status = pclose(pipe);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string schema_path(const char* name) {
    return std::string(CHBELL_SCHEMA_DIR) + "/" + name;
}

fs::path temp_dir(const char* tag) {
    const fs::path p = fs::temp_directory_path() / (std::string("chbell_cli_") + tag);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_config(const fs::path& p, double pair_rate, double duration, std::uint64_t seed) {
    std::ofstream os(p);
    os << R"({"f": {"re": 0.4}, "pol1": {"eps_par": 1, "eps_perp": 0},
              "pol2": {"eps_par": 1, "eps_perp": 0},
              "detector": {"eta1": 0.535, "eta2": 0.535, "dark1": 50, "dark2": 50,
                           "pair_rate": )"
       << pair_rate << R"(, "window_ns": 10},
              "angles_deg": [72.24, 17.76, 45, 0],
              "duration_s": )"
       << duration << R"(, "seed": )" << seed << "}";
}

} // namespace

TEST_CASE("predict reproduces the maximal-state ratio") {
    const auto res = run_cli("predict --f 1 --angles 67.5,22.5,45,0");
    REQUIRE(res.exit_code == 0);
    const auto j = nlohmann::json::parse(res.out);
    CHECK(schema::validate_against_file(j, schema_path("predict.schema.json")).empty());
    CHECK(j["r"].get<double>() == doctest::Approx(1.207107).epsilon(1e-6));
    CHECK(j["ch"].get<double>() == doctest::Approx(0.207107).epsilon(1e-6));
}

TEST_CASE("predict honours polarizer flags and complex f") {
    const auto res = run_cli(
        "predict --f 0.4,0.1 --angles 72.24,17.76,45,0 --eps-par1 0.95 --eps-perp1 0.01");
    REQUIRE(res.exit_code == 0);
    const auto j = nlohmann::json::parse(res.out);
    CHECK(j["f"]["im"].get<double>() == 0.1);
    CHECK(j["probabilities"]["p_t1_t2"].get<double>() < 0.5);
}

TEST_CASE("predict fringe scan in both output modes") {
    const auto csv = run_cli("predict --f 1 --fringe-arm 1 --fringe-angle 45 --step 1 "
                             "--output csv");
    REQUIRE(csv.exit_code == 0);
    CHECK(csv.out.rfind("angle_deg,probability\n", 0) == 0);

    const auto js = run_cli("predict --f 1 --fringe-arm 1 --fringe-angle 45 --step 1 "
                            "--output json");
    REQUIRE(js.exit_code == 0);
    const auto j = nlohmann::json::parse(js.out);
    CHECK(schema::validate_against_file(j, schema_path("fringe.schema.json")).empty());
    CHECK(j["visibility"].get<double>() == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(j["samples"].size() == 180);
}

TEST_CASE("optimize emits the canonical maximal-state angles") {
    const auto res = run_cli("optimize --f 1 --objective ch");
    REQUIRE(res.exit_code == 0);
    const auto j = nlohmann::json::parse(res.out);
    CHECK(schema::validate_against_file(j, schema_path("optimize.schema.json")).empty());
    CHECK(j["objective"] == "CH");
    CHECK(j["value"].get<double>() == doctest::Approx(0.207107).epsilon(1e-6));
    const auto a = j["angles_deg"];
    CHECK(a[0].get<double>() == doctest::Approx(67.5).epsilon(1e-3));
    CHECK(a[3].get<double>() == doctest::Approx(0.0).scale(1).epsilon(1e-3));
}

TEST_CASE("threshold single point and curve") {
    const auto pt = run_cli("threshold --f 0.4");
    REQUIRE(pt.exit_code == 0);
    const auto j = nlohmann::json::parse(pt.out);
    CHECK(schema::validate_against_file(j, schema_path("threshold_point.schema.json")).empty());
    CHECK(j["eta_crit"].get<double>() == doctest::Approx(0.734339).epsilon(1e-4));

    const auto dir = temp_dir("curve");
    const auto curve = run_cli("threshold --f-min 0.01 --f-max 1 --steps 100 -o " +
                               (dir / "curve.csv").string());
    REQUIRE(curve.exit_code == 0);
    const std::string text = slurp(dir / "curve.csv");
    CHECK(text.rfind("f,eta_crit\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 101);
    // last row reaches the maximal-entanglement limit 2(sqrt2 - 1)
    const auto last_comma = text.rfind(',');
    const double last_eta = std::stod(text.substr(last_comma + 1));
    CHECK(last_eta == doctest::Approx(0.8284).epsilon(1e-3));
    fs::remove_all(dir);
}

TEST_CASE("optimize output is identical across thread counts") {
    const auto a = run_cli("optimize --f 0.7 --objective r");
    const auto b = run_cli("optimize --f 0.7 --objective r", "OMP_NUM_THREADS=1 ");
    REQUIRE(a.exit_code == 0);
    CHECK(a.out == b.out);
}

TEST_CASE("lhv reports the exact bounds") {
    const auto on = run_cli("lhv --form counts --no-enhancement");
    REQUIRE(on.exit_code == 0);
    const auto j = nlohmann::json::parse(on.out);
    CHECK(schema::validate_against_file(j, schema_path("lhv.schema.json")).empty());
    CHECK(j["max_ch"].get<int>() == 0);
    CHECK(j["strategies_checked"].get<int>() == 25);

    const auto off = run_cli("lhv --form counts");
    CHECK(nlohmann::json::parse(off.out)["max_ch"].get<int>() == 2);

    const auto prob = run_cli("lhv --form prob");
    CHECK(nlohmann::json::parse(prob.out)["max_ch"].get<int>() == 0);

    const auto mix = run_cli("lhv --form counts --no-enhancement --mixtures 200 --seed 42");
    const auto jm = nlohmann::json::parse(mix.out);
    CHECK(jm["mixtures"]["max_ch"].get<double>() <= 1e-12);
}

TEST_CASE("simulate counts mode writes a schema-conforming summary") {
    const auto dir = temp_dir("counts");
    write_config(dir / "cfg.json", 2000, 1.0, 7);
    const auto res = run_cli("simulate --config " + (dir / "cfg.json").string() + " --out " +
                             (dir / "out").string());
    REQUIRE(res.exit_code == 0);
    const auto j = nlohmann::json::parse(slurp(dir / "out" / "counts.json"));
    CHECK(schema::validate_against_file(j, schema_path("counts.schema.json")).empty());
    CHECK(j["seed"].get<int>() == 7);
    fs::remove_all(dir);
}

TEST_CASE("simulate --events output feeds analyze unmodified") {
    const auto dir = temp_dir("pipeline");
    write_config(dir / "cfg.json", 20000, 1.0, 11);
    const auto sim = run_cli("simulate --config " + (dir / "cfg.json").string() + " --out " +
                             (dir / "run").string() + " --events");
    REQUIRE(sim.exit_code == 0);

    const auto ana = run_cli("analyze --manifest " + (dir / "run" / "manifest.json").string() +
                             " --window-ns 10 --runs-csv " + (dir / "runs.csv").string());
    REQUIRE(ana.exit_code == 0);
    const auto j = nlohmann::json::parse(ana.out);
    CHECK(schema::validate_against_file(j, schema_path("ch_result.schema.json")).empty());
    CHECK(j["ch"].get<double>() > 0.0);
    CHECK(j["units"] == "counts/s");

    const std::string runs_csv = slurp(dir / "runs.csv");
    CHECK(runs_csv.rfind("setting1,setting2,coincidences,duration_s\n", 0) == 0);
    CHECK(std::count(runs_csv.begin(), runs_csv.end(), '\n') == 7);
    fs::remove_all(dir);
}

TEST_CASE("seeded simulation is byte-identical, also across thread counts") {
    const auto dir = temp_dir("determinism");
    write_config(dir / "cfg.json", 5000, 1.0, 31);
    const std::string base = "simulate --config " + (dir / "cfg.json").string() + " --events";
    REQUIRE(run_cli(base + " --out " + (dir / "a").string()).exit_code == 0);
    REQUIRE(run_cli(base + " --out " + (dir / "b").string()).exit_code == 0);
    REQUIRE(run_cli(base + " --out " + (dir / "c").string(), "OMP_NUM_THREADS=1 ").exit_code ==
            0);
    for (int k = 1; k <= 6; ++k)
        for (const char* ch : {"_ch1.csv", "_ch2.csv"}) {
            const std::string name = "run" + std::to_string(k) + ch;
            const std::string a = slurp(dir / "a" / name);
            CHECK(a == slurp(dir / "b" / name));
            CHECK(a == slurp(dir / "c" / name));
        }
    CHECK(slurp(dir / "a" / "manifest.json") == slurp(dir / "b" / "manifest.json"));

    // a different seed must change the streams
    const auto res = run_cli(base + " --out " + (dir / "d").string() + " --seed 32");
    REQUIRE(res.exit_code == 0);
    CHECK(slurp(dir / "a" / "run1_ch1.csv") != slurp(dir / "d" / "run1_ch1.csv"));
    fs::remove_all(dir);
}

TEST_CASE("exit codes: 2 for validation, 1 for I/O") {
    CHECK(run_cli("predict --f 1 --angles 67.5,22.5,45,0 --bogus-flag").exit_code == 2);
    CHECK(run_cli("nosuchcommand").exit_code == 2);
    CHECK(run_cli("predict --f nonsense --angles 0,0,0,0").exit_code == 2);
    CHECK(run_cli("predict --f 1 --angles 190,0,0,0").exit_code == 2);
    CHECK(run_cli("predict --f 1").exit_code == 2);
    CHECK(run_cli("optimize --f 0").exit_code == 2);          // product state
    CHECK(run_cli("threshold --f 0").exit_code == 2);         // no violation
    CHECK(run_cli("threshold --f-min 0.5 --f-max 0.5 --steps 2").exit_code == 2);
    CHECK(run_cli("lhv --form nonsense").exit_code == 2);
    CHECK(run_cli("analyze --manifest /nonexistent/m.json --window-ns 10").exit_code == 1);
    CHECK(run_cli("simulate --config /nonexistent/c.json --out /tmp/x").exit_code == 1);
    const auto help = run_cli("--help");
    CHECK(help.exit_code == 0);
}
