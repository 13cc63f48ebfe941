#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "json.hpp"

#include "chbell/analyze.hpp"
#include "chbell/bell.hpp"
#include "chbell/lhv.hpp"
#include "chbell/model.hpp"
#include "chbell/optimizer.hpp"
#include "chbell/prediction.hpp"
#include "chbell/simulate.hpp"
#include "chbell/threshold.hpp"

// File formats of the toolkit:
//   fringe CSV      header "angle_deg,probability", 9 significant digits
//   threshold CSV   header "f,eta_crit"
//   event CSV       header "timestamp_ns", one unsigned integer per line
//   run directory   run<k>_ch<1|2>.csv for k = 1..6 plus manifest.json
// JSON payloads match the schema files shipped under schemas/.

namespace chbell::io {

std::string setting_to_string(const Setting& s);

void write_fringe_csv(std::ostream& os, const FringeScan& scan);
void write_threshold_csv(std::ostream& os, const ThresholdCurve& curve);
void write_event_csv(std::ostream& os, const EventStream& stream);

/// Writes run1_ch1.csv ... run6_ch2.csv and manifest.json into dir.
void write_run_directory(const std::filesystem::path& dir, const std::array<ConfigRun, 6>& runs);

nlohmann::json ch_result_to_json(const ChResult& r);
nlohmann::json optimization_to_json(const OptimizationResult& r);
nlohmann::json lhv_report_to_json(const LhvReport& r);
nlohmann::json counts_to_json(const CoincidenceCounts& c, std::uint64_t seed);

/// Simulation config: state, polarizers, detector, angles, duration, seed.
struct SimConfig {
    EntangledState state;
    AnalyzerConfig cfg;
    DetectorModel detector;
    double duration_s;
    std::uint64_t seed;
    double jitter_sigma_ns;
};

SimConfig load_sim_config(const std::filesystem::path& path);

} // namespace chbell::io
