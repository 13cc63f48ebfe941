// chbell: command-line front end for the Clauser-Horne toolkit.
//
// Subcommands: predict, optimize, threshold, lhv, simulate, analyze.
// Exit codes: 0 success, 1 I/O failure, 2 validation error.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "chbell/io.hpp"

namespace {

using namespace chbell;

struct FValue {
    double re = 0.0, im = 0.0;
};

FValue parse_f(const std::string& s) {
    FValue f;
    std::istringstream is(s);
    char comma = 0;
    if (!(is >> f.re)) throw ValidationError("--f: cannot parse '" + s + "'");
    if (is >> comma) {
        if (comma != ',' || !(is >> f.im))
            throw ValidationError("--f: expected RE or RE,IM, got '" + s + "'");
    }
    std::string rest;
    if (is >> rest) throw ValidationError("--f: trailing input '" + rest + "'");
    return f;
}

std::array<double, 4> parse_angles(const std::string& s) {
    std::array<double, 4> a{};
    std::istringstream is(s);
    for (int i = 0; i < 4; ++i) {
        char comma = 0;
        if (i > 0 && (!(is >> comma) || comma != ','))
            throw ValidationError("--angles: expected four comma-separated degrees");
        if (!(is >> a[i]))
            throw ValidationError("--angles: expected four comma-separated degrees");
    }
    std::string rest;
    if (is >> rest) throw ValidationError("--angles: trailing input '" + rest + "'");
    return a;
}

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream os(out_path);
    if (!os) throw IoError("cannot write " + out_path);
    os << text;
}

struct PolFlags {
    double eps_par1 = 1.0, eps_perp1 = 0.0, eps_par2 = 1.0, eps_perp2 = 0.0;

    void add_to(CLI::App* cmd) {
        cmd->add_option("--eps-par1", eps_par1, "arm-1 parallel transmission");
        cmd->add_option("--eps-perp1", eps_perp1, "arm-1 perpendicular transmission");
        cmd->add_option("--eps-par2", eps_par2, "arm-2 parallel transmission");
        cmd->add_option("--eps-perp2", eps_perp2, "arm-2 perpendicular transmission");
    }
    Polarizer pol1() const { return Polarizer(eps_par1, eps_perp1); }
    Polarizer pol2() const { return Polarizer(eps_par2, eps_perp2); }
};

int run_cli(int argc, char** argv) {
    CLI::App app{"Clauser-Horne Bell-test toolkit for non-maximally entangled photon pairs"};
    app.require_subcommand(1);

    // ---- predict ----------------------------------------------------------
    auto* predict = app.add_subcommand(
        "predict", "closed-form CH/R prediction or a polarization fringe scan");
    std::string p_f, p_angles, p_output = "json", p_out;
    PolFlags p_pols;
    int p_fringe_arm = 0;
    double p_fringe_angle = 0.0, p_step = 1.0;
    predict->add_option("--f", p_f, "state parameter f as RE or RE,IM")->required();
    predict->add_option("--angles", p_angles, "theta1,theta1',theta2,theta2' in degrees");
    p_pols.add_to(predict);
    predict->add_option("--fringe-arm", p_fringe_arm, "fixed arm (1 or 2) for a fringe scan");
    predict->add_option("--fringe-angle", p_fringe_angle, "fixed analyzer angle in degrees");
    predict->add_option("--step", p_step, "fringe scan step in degrees")->capture_default_str();
    predict->add_option("--output", p_output, "json or csv")->capture_default_str();
    predict->add_option("-o,--out", p_out, "write to file instead of stdout");

    // ---- optimize ---------------------------------------------------------
    auto* optimize = app.add_subcommand("optimize", "maximize CH or R over analyzer angles");
    std::string o_f, o_objective = "ch", o_out;
    PolFlags o_pols;
    double o_grid_step = 1.0;
    optimize->add_option("--f", o_f, "state parameter f as RE or RE,IM")->required();
    optimize->add_option("--objective", o_objective, "ch or r")->capture_default_str();
    o_pols.add_to(optimize);
    optimize->add_option("--grid-step", o_grid_step, "certification grid step in degrees")
        ->capture_default_str();
    optimize->add_option("-o,--out", o_out, "write to file instead of stdout");

    // ---- threshold --------------------------------------------------------
    auto* threshold = app.add_subcommand(
        "threshold", "critical detection efficiency, single f or a curve");
    double t_fmin = 0.0, t_fmax = 0.0, t_f = 0.0;
    int t_steps = 0;
    std::string t_output = "csv", t_out;
    PolFlags t_pols;
    auto* t_fmin_opt = threshold->add_option("--f-min", t_fmin, "curve start");
    threshold->add_option("--f-max", t_fmax, "curve end")->needs(t_fmin_opt);
    threshold->add_option("--steps", t_steps, "number of curve points")->needs(t_fmin_opt);
    auto* t_f_opt = threshold->add_option("--f", t_f, "single-point evaluation");
    t_f_opt->excludes(t_fmin_opt);
    t_pols.add_to(threshold);
    threshold->add_option("--output", t_output, "csv or json")->capture_default_str();
    threshold->add_option("-o,--out", t_out, "write to file instead of stdout");

    // ---- lhv --------------------------------------------------------------
    auto* lhv = app.add_subcommand(
        "lhv", "exhaustive deterministic local-hidden-variable bounds");
    std::string l_form = "counts", l_out;
    bool l_noenh = false;
    std::uint64_t l_mixtures = 0, l_seed = 0;
    lhv->add_option("--form", l_form, "counts or prob")->capture_default_str();
    lhv->add_flag("--no-enhancement", l_noenh, "restrict to no-enhancement strategies");
    lhv->add_option("--mixtures", l_mixtures, "also sample N random convex mixtures");
    lhv->add_option("--seed", l_seed, "mixture sampling seed")->capture_default_str();
    lhv->add_option("-o,--out", l_out, "write to file instead of stdout");

    // ---- simulate ---------------------------------------------------------
    auto* simulate = app.add_subcommand(
        "simulate", "Monte-Carlo six-configuration CH run from a JSON config");
    std::string s_config, s_outdir;
    bool s_events = false;
    std::uint64_t s_seed = 0;
    bool s_seed_set = false;
    simulate->add_option("--config", s_config, "JSON run configuration")->required();
    simulate->add_option("--out", s_outdir, "output directory")->required();
    simulate->add_flag("--events", s_events, "write timestamped event streams + manifest");
    simulate->add_option_function<std::uint64_t>(
        "--seed", [&](std::uint64_t v) { s_seed = v; s_seed_set = true; },
        "override the config seed");

    // ---- analyze ----------------------------------------------------------
    auto* analyze = app.add_subcommand(
        "analyze", "coincidence counting + CH statistics from a run manifest");
    std::string a_manifest, a_out, a_runs_csv, a_units = "counts/s";
    double a_window = 10.0;
    bool a_subtract = false;
    analyze->add_option("--manifest", a_manifest, "run manifest JSON")->required();
    analyze->add_option("--window-ns", a_window, "coincidence window (|t1-t2| <= w), ns")
        ->capture_default_str();
    analyze->add_option("--units", a_units, "counts/s or counts")->capture_default_str();
    analyze->add_flag("--subtract-accidentals", a_subtract,
                      "subtract r1*r2*(2w)*T estimated from the singles rates");
    analyze->add_option("--runs-csv", a_runs_csv, "also write per-run coincidences CSV");
    analyze->add_option("-o,--out", a_out, "write to file instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }

    if (predict->parsed()) {
        const FValue f = parse_f(p_f);
        const EntangledState state(f.re, f.im);
        const bool fringe_mode = predict->count("--fringe-arm") > 0;
        if (fringe_mode) {
            const FringeScan scan = fringe_scan(state, p_fringe_arm, p_fringe_angle,
                                                p_pols.pol1(), p_pols.pol2(), p_step);
            if (p_output == "csv") {
                std::ostringstream os;
                io::write_fringe_csv(os, scan);
                emit(os.str(), p_out);
            } else if (p_output == "json") {
                nlohmann::json j{{"fixed_arm", scan.fixed_arm},
                                 {"fixed_angle_deg", scan.fixed_angle_deg},
                                 {"step_deg", p_step},
                                 {"visibility", visibility(scan)},
                                 {"samples", nlohmann::json::array()}};
                for (const auto& [a, p] : scan.samples) j["samples"].push_back({a, p});
                emit(j.dump(2) + "\n", p_out);
            } else {
                throw ValidationError("--output must be json or csv");
            }
            return 0;
        }
        if (predict->count("--angles") == 0)
            throw ValidationError("predict: need --angles (or --fringe-arm for a scan)");
        if (p_output != "json")
            throw ValidationError("predict: point predictions support --output json only");
        const auto ang = parse_angles(p_angles);
        const AnalyzerConfig cfg(ang[0], ang[1], ang[2], ang[3], p_pols.pol1(), p_pols.pol2());
        const auto t = detail::ch_terms(state, cfg);
        nlohmann::json j;
        j["f"] = {{"re", f.re}, {"im", f.im}};
        j["angles_deg"] = ang;
        j["probabilities"] = {{"p_t1_t2", t.p_ab},         {"p_t1_t2p", t.p_ab_prime},
                              {"p_t1p_t2", t.p_a_prime_b}, {"p_t1p_t2p", t.p_a_prime_b_prime},
                              {"p_t1p_open", t.s_a_prime}, {"p_open_t2", t.s_b}};
        j["ch"] = ch_from_probabilities(state, cfg);
        const double den = t.s_a_prime + t.s_b;
        j["r"] = den > 0.0 ? nlohmann::json(r_from_probabilities(state, cfg)) : nlohmann::json();
        emit(j.dump(2) + "\n", p_out);
        return 0;
    }

    if (optimize->parsed()) {
        const FValue f = parse_f(o_f);
        Objective obj;
        if (o_objective == "ch" || o_objective == "CH") obj = Objective::CH;
        else if (o_objective == "r" || o_objective == "R") obj = Objective::R;
        else throw ValidationError("--objective must be ch or r");
        if (!(o_grid_step > 0.0) || o_grid_step > 45.0)
            throw ValidationError("--grid-step must be in (0, 45] degrees");
        const int grid_n = static_cast<int>(180.0 / o_grid_step + 0.5);
        const auto res = optimize_angles(EntangledState(f.re, f.im), o_pols.pol1(),
                                         o_pols.pol2(), obj, grid_n);
        emit(io::optimization_to_json(res).dump(2) + "\n", o_out);
        return 0;
    }

    if (threshold->parsed()) {
        if (threshold->count("--f") > 0) {
            const double eta = eta_critical(EntangledState(t_f), t_pols.pol1(), t_pols.pol2());
            emit(nlohmann::json{{"f", t_f}, {"eta_crit", eta}}.dump(2) + "\n", t_out);
            return 0;
        }
        if (threshold->count("--f-min") == 0 || threshold->count("--f-max") == 0 ||
            threshold->count("--steps") == 0)
            throw ValidationError("threshold: need --f-min, --f-max and --steps (or --f)");
        const ThresholdCurve curve =
            threshold_curve(t_fmin, t_fmax, t_steps, t_pols.pol1(), t_pols.pol2());
        if (t_output == "csv") {
            std::ostringstream os;
            io::write_threshold_csv(os, curve);
            emit(os.str(), t_out);
        } else if (t_output == "json") {
            nlohmann::json j{{"points", nlohmann::json::array()}};
            for (const auto& [fv, eta] : curve.points) j["points"].push_back({fv, eta});
            emit(j.dump(2) + "\n", t_out);
        } else {
            throw ValidationError("--output must be json or csv");
        }
        return 0;
    }

    if (lhv->parsed()) {
        LhvReport rep;
        if (l_form == "counts") rep = enumerate_counts_form(l_noenh);
        else if (l_form == "prob") rep = enumerate_probability_form();
        else throw ValidationError("--form must be counts or prob");
        nlohmann::json j = io::lhv_report_to_json(rep);
        if (l_mixtures > 0) {
            j["mixtures"] = {{"samples", l_mixtures},
                             {"seed", l_seed},
                             {"max_ch", mixture_bound_check(l_mixtures, l_seed)}};
        }
        emit(j.dump(2) + "\n", l_out);
        return 0;
    }

    if (simulate->parsed()) {
        io::SimConfig sc = io::load_sim_config(s_config);
        const std::uint64_t seed = s_seed_set ? s_seed : sc.seed;
        const RunPlan plan(sc.state, sc.cfg, sc.detector, sc.duration_s, seed,
                           sc.jitter_sigma_ns);
        std::filesystem::create_directories(s_outdir);
        if (s_events) {
            io::write_run_directory(s_outdir, simulate_events(plan));
        } else {
            const CoincidenceCounts counts = simulate_counts(plan);
            std::ofstream os(std::filesystem::path(s_outdir) / "counts.json");
            if (!os) throw IoError("cannot write " + s_outdir + "/counts.json");
            os << io::counts_to_json(counts, seed).dump(2) << '\n';
        }
        return 0;
    }

    if (analyze->parsed()) {
        ChUnits units;
        if (a_units == "counts/s") units = ChUnits::CountsPerSecond;
        else if (a_units == "counts") units = ChUnits::Counts;
        else throw ValidationError("--units must be counts/s or counts");
        const RunManifest manifest = load_manifest(a_manifest);
        const AnalysisResult res = analyze_run(manifest, a_window, units, a_subtract);
        if (!a_runs_csv.empty()) {
            std::ofstream os(a_runs_csv);
            if (!os) throw IoError("cannot write " + a_runs_csv);
            os << "setting1,setting2,coincidences,duration_s\n";
            for (const auto& pr : res.per_run)
                os << pr.run.setting1 << ',' << pr.run.setting2 << ',' << pr.coincidences << ','
                   << pr.run.duration_s << '\n';
        }
        emit(io::ch_result_to_json(res.ch).dump(2) + "\n", a_out);
        return 0;
    }

    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run_cli(argc, argv);
    } catch (const chbell::IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const chbell::ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const chbell::NoViolationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const chbell::ManifestError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const chbell::FormatError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const chbell::UndefinedValueError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
