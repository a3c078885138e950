#include <CLI11.hpp>
#include <fstream>
#include <iomanip>
#include <iostream>

#include "commands.hpp"

namespace {

using namespace bodynet;

void print_metrics(const SessionMetrics& m) {
  std::cout << "protocol " << m.protocol << ", " << m.duration_s << " s, hops " << m.hops << ", resyncs "
            << m.resyncs << ", max skew " << m.max_skew_ms << " ms\n";
  for (const auto& s : m.sensors) {
    std::cout << "  sensor " << s.sensor << ": mean " << s.mean_rate_hz << " Hz, min window " << s.min_window_rate_hz
              << " Hz, pdr " << s.pdr << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Body-area sensor network simulator and recording analysis"};
  app.require_subcommand(1);

  std::string scenario_path, out_dir;
  std::optional<std::uint64_t> seed;

  auto* sim = app.add_subcommand("simulate", "Run a scenario and write recording, traces and metrics");
  sim->add_option("--scenario", scenario_path, "Scenario YAML file")->required();
  sim->add_option("--out", out_dir, "Output directory")->required();
  sim->add_option("--seed", seed, "Override the scenario seed");

  std::string recording, placement, pose = "neutral";
  std::vector<std::string> joints;
  double window_s = 1.0;
  auto* ana = app.add_subcommand("analyze", "Joint angles, rate series and summaries of a recording");
  ana->add_option("recording", recording, "Recording CSV")->required();
  ana->add_option("--joints", joints, "Joint labels, e.g. right-elbow,left-elbow")->delimiter(',');
  ana->add_option("--placement", placement, "Placement preset (inferred from the sensor ids by default)");
  ana->add_option("--pose", pose, "Calibration pose: neutral or t-pose");
  ana->add_option("--window", window_s, "Rate window in seconds");
  ana->add_option("--out", out_dir, "Output directory")->required();

  std::string rec_a, rec_b, joint;
  auto* cmp = app.add_subcommand("compare", "MAE and Pearson correlation of one joint across two recordings");
  cmp->add_option("a", rec_a, "First recording (comparison grid)")->required();
  cmp->add_option("b", rec_b, "Second recording")->required();
  cmp->add_option("--joint", joint, "Joint label")->required();
  cmp->add_option("--placement", placement, "Placement preset (inferred by default)");
  cmp->add_option("--pose", pose, "Calibration pose: neutral or t-pose");
  cmp->add_option("--out", out_dir, "Output directory for aligned.csv and compare.json");

  std::vector<std::string> protocols{"cw", "ble-baseline"};
  std::size_t seeds = 10;
  auto* bch = app.add_subcommand("bench", "Run a scenario under several protocols and seeds");
  bch->add_option("--scenario", scenario_path, "Scenario YAML file")->required();
  bch->add_option("--protocols", protocols, "Protocols to compare")->delimiter(',');
  bch->add_option("--seeds", seeds, "Number of seeds");
  bch->add_option("--seed", seed, "First seed (defaults to the scenario seed)");
  bch->add_option("--out", out_dir, "Output directory for report.json")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? cli::kExitOk : cli::kExitConfig;
  }

  try {
    if (sim->parsed()) {
      const RunOutput run = cli::simulate(scenario_path, out_dir, seed);
      print_metrics(run.metrics);
    } else if (ana->parsed()) {
      cli::AnalyzeOptions opts{joints, placement, pose_from_name(pose), window_s};
      const auto result = cli::analyze(recording, opts, out_dir);
      for (const auto& s : result.summaries) {
        std::cout << s.label << ": min " << s.min << ", max " << s.max << ", mean " << s.mean << ", peaks "
                  << s.peaks << (s.zero_range ? ", zero range" : "") << "\n";
      }
    } else if (cmp->parsed()) {
      std::optional<std::filesystem::path> out;
      if (!out_dir.empty()) {
        out = out_dir;
      }
      const auto r = cli::compare(rec_a, rec_b, joint, placement, pose_from_name(pose), out);
      std::cout << std::setprecision(6) << "mae_deg " << r.mae_deg << "\npearson " << r.pearson << "\n";
    } else if (bch->parsed()) {
      const Scenario s = load_scenario(scenario_path);
      const auto report = cli::bench(s, protocols, seeds, seed.value_or(s.seed));
      std::filesystem::create_directories(out_dir);
      std::ofstream os(std::filesystem::path(out_dir) / "report.json", std::ios::binary);
      if (!os || !(os << cli::bench_json(report))) {
        throw IoError("cannot write report.json");
      }
      std::cout << "seeds " << report.runs.size() << ", cw hops " << report.cw_hops << "\n";
      if (report.cw_dominates_fraction) {
        std::cout << "cw dominates " << *report.cw_dominates_fraction << ", ble min < 10 Hz "
                  << *report.ble_min_below_10_fraction << ", cw min >= 40 Hz "
                  << *report.cw_min_at_least_40_fraction << "\n";
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "bodynet: " << e.what() << "\n";
    return cli::exit_code_for(e);
  }
  return cli::kExitOk;
}
