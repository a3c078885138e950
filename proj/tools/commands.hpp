#pragma once

// Implementations behind the bodynet subcommands, kept out of main() so tests
// can drive them directly.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "bodynet/analysis.hpp"
#include "bodynet/scenario.hpp"

namespace bodynet::cli {

// Exit statuses.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitIo = 3;
inline constexpr int kExitValidation = 4;
inline constexpr int kExitAnalysis = 5;

// Maps a library exception to its exit status.
int exit_code_for(const std::exception& e);

// Runs the scenario and writes every output file into `out`.
RunOutput simulate(const std::filesystem::path& scenario, const std::filesystem::path& out,
                   std::optional<std::uint64_t> seed_override = std::nullopt);

// The preset whose sensor ids match the recording's. Throws ConfigError when none does.
SensorPlacement placement_for(const std::vector<RecordingFrame>& frames);

struct AnalyzeOptions {
  std::vector<std::string> joints;
  std::string placement;  // empty: inferred
  CalibrationPose pose = CalibrationPose::Neutral;
  double window_s = 1.0;
};

struct AnalyzeResult {
  std::vector<AngleSeries> angles;
  std::vector<RateSeries> rates;
  std::vector<SeriesSummary> summaries;  // angle series first, then rates
};

// angles_<joint>.csv, rates_<sensor>.csv and summary.json.
AnalyzeResult analyze(const std::filesystem::path& recording, const AnalyzeOptions& options,
                      const std::filesystem::path& out);

struct CompareResult {
  double mae_deg = 0.0;
  double pearson = 0.0;
  std::vector<AlignedAngle> aligned;
};

// Each recording is calibrated from its own first frames. Writes aligned.csv
// and compare.json when `out` is set.
CompareResult compare(const std::filesystem::path& a, const std::filesystem::path& b, const std::string& joint,
                      const std::string& placement, CalibrationPose pose,
                      const std::optional<std::filesystem::path>& out);

struct BenchRun {
  std::uint64_t seed = 0;
  std::vector<SessionMetrics> metrics;  // one per protocol, in request order
};

struct BenchReport {
  std::vector<std::string> protocols;
  std::vector<BenchRun> runs;
  // Filled when both cw and ble-baseline ran.
  std::optional<double> cw_dominates_fraction;
  std::optional<double> ble_min_below_10_fraction;
  std::optional<double> cw_min_at_least_40_fraction;
  std::uint64_t cw_hops = 0;
};

// Seeds base, base + 1, ... Each seed's sessions are independent.
BenchReport bench(const Scenario& scenario, const std::vector<std::string>& protocols, std::size_t seeds,
                  std::uint64_t base_seed);
std::string bench_json(const BenchReport& report);

}  // namespace bodynet::cli
