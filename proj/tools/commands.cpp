#include "commands.hpp"

#include <charconv>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

namespace bodynet::cli {

namespace {

using nlohmann::ordered_json;

std::string num(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os || !(os << text)) {
    throw IoError("cannot write '" + path.string() + "'");
  }
}

void make_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw IoError("cannot create '" + dir.string() + "': " + ec.message());
  }
}

ordered_json summary_json(const SeriesSummary& s) {
  ordered_json j;
  j["label"] = s.label;
  j["count"] = s.count;
  j["min"] = s.min;
  j["max"] = s.max;
  j["mean"] = s.mean;
  j["zero_range"] = s.zero_range;
  j["peaks"] = s.peaks;
  return j;
}

ordered_json metrics_object(const SessionMetrics& m) { return ordered_json::parse(metrics_json(m)); }

SensorPlacement resolve_placement(const std::string& name, const std::vector<RecordingFrame>& frames) {
  return name.empty() ? placement_for(frames) : SensorPlacement::preset(name);
}

AngleSeries series_for(const std::vector<RecordingFrame>& frames, const SensorPlacement& placement,
                       CalibrationPose pose, const JointSpec& joint) {
  const CalibrationRecord calib = calibrate_from_first_frames(frames, placement, pose);
  return joint_angle_series(frames, calib, Skeleton(), joint);
}

}  // namespace

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const InvalidInput*>(&e)) {
    return kExitConfig;
  }
  if (dynamic_cast<const IoError*>(&e) || dynamic_cast<const ParseError*>(&e)) {
    return kExitIo;
  }
  if (dynamic_cast<const ValidationError*>(&e)) {
    return kExitValidation;
  }
  if (dynamic_cast<const AnalysisError*>(&e)) {
    return kExitAnalysis;
  }
  return kExitInternal;
}

RunOutput simulate(const std::filesystem::path& scenario, const std::filesystem::path& out,
                   std::optional<std::uint64_t> seed_override) {
  Scenario s = load_scenario(scenario);
  if (seed_override) {
    s.seed = *seed_override;
  }
  RunOutput run = run_scenario(s);
  write_outputs(run, out);
  return run;
}

SensorPlacement placement_for(const std::vector<RecordingFrame>& frames) {
  std::set<SensorId> ids;
  for (const auto& f : frames) {
    ids.insert(f.sensor_id);
  }
  for (const auto& name : SensorPlacement::preset_names()) {
    const SensorPlacement p = SensorPlacement::preset(name);
    const auto sensors = p.sensors();
    if (std::set<SensorId>(sensors.begin(), sensors.end()) == ids) {
      return p;
    }
  }
  throw ConfigError("cannot infer a placement for " + std::to_string(ids.size()) +
                    " sensor(s); pass --placement");
}

AnalyzeResult analyze(const std::filesystem::path& recording, const AnalyzeOptions& options,
                      const std::filesystem::path& out) {
  const auto frames = read_recording(recording);
  if (frames.empty()) {
    throw AnalysisError("recording '" + recording.string() + "' has no frames");
  }
  std::vector<JointSpec> joints;
  for (const auto& label : options.joints) {
    joints.push_back(joint_from_label(label));
  }
  const SensorPlacement placement = resolve_placement(options.placement, frames);
  AnalyzeResult result;
  if (!joints.empty()) {
    const CalibrationRecord calib = calibrate_from_first_frames(frames, placement, options.pose);
    for (const auto& joint : joints) {
      result.angles.push_back(joint_angle_series(frames, calib, Skeleton(), joint));
    }
  }
  result.rates = rate_series(frames, options.window_s);

  make_dir(out);
  ordered_json summary;
  summary["angles"] = ordered_json::array();
  for (const auto& series : result.angles) {
    std::string csv = "timestamp_us,angle_deg\n";
    std::vector<double> values;
    for (const auto& s : series.samples) {
      csv += std::to_string(s.timestamp_us) + "," + num(s.deg) + "\n";
      values.push_back(s.deg);
    }
    write_text(out / ("angles_" + series.label + ".csv"), csv);
    result.summaries.push_back(summarize(series.label, values));
    summary["angles"].push_back(summary_json(result.summaries.back()));
  }
  summary["rates"] = ordered_json::array();
  for (const auto& series : result.rates) {
    std::string csv = "time_us,rate_hz\n";
    std::vector<double> values;
    for (const auto& [t, hz] : series.points) {
      csv += std::to_string(t) + "," + num(hz) + "\n";
      values.push_back(hz);
    }
    const std::string label = "sensor-" + std::to_string(series.sensor);
    write_text(out / ("rates_" + std::to_string(series.sensor) + ".csv"), csv);
    result.summaries.push_back(summarize(label, values));
    summary["rates"].push_back(summary_json(result.summaries.back()));
  }
  write_text(out / "summary.json", summary.dump(2) + "\n");
  return result;
}

CompareResult compare(const std::filesystem::path& a, const std::filesystem::path& b, const std::string& joint,
                      const std::string& placement, CalibrationPose pose,
                      const std::optional<std::filesystem::path>& out) {
  const JointSpec spec = joint_from_label(joint);
  const auto fa = read_recording(a);
  const auto fb = read_recording(b);
  if (fa.empty() || fb.empty()) {
    throw AnalysisError("cannot compare an empty recording");
  }
  const AngleSeries sa = series_for(fa, resolve_placement(placement, fa), pose, spec);
  const AngleSeries sb = series_for(fb, resolve_placement(placement, fb), pose, spec);
  CompareResult r;
  r.mae_deg = mae(sa, sb);
  r.pearson = pearson(sa, sb);
  r.aligned = align(sa, sb);
  if (out) {
    make_dir(*out);
    std::string csv = "timestamp_us,a_deg,b_deg\n";
    for (const auto& p : r.aligned) {
      csv += std::to_string(p.timestamp_us) + "," + num(p.a_deg) + "," + num(p.b_deg) + "\n";
    }
    write_text(*out / "aligned.csv", csv);
    ordered_json j;
    j["joint"] = spec.label;
    j["points"] = r.aligned.size();
    j["mae_deg"] = r.mae_deg;
    j["pearson"] = r.pearson;
    write_text(*out / "compare.json", j.dump(2) + "\n");
  }
  return r;
}

BenchReport bench(const Scenario& scenario, const std::vector<std::string>& protocols, std::size_t seeds,
                  std::uint64_t base_seed) {
  if (protocols.empty()) {
    throw ConfigError("no protocols to benchmark");
  }
  if (seeds == 0) {
    throw ConfigError("--seeds must be at least 1");
  }
  BenchReport report;
  std::vector<ProtocolKind> kinds;
  for (const auto& p : protocols) {
    kinds.push_back(protocol_from_name(p));
    report.protocols.emplace_back(protocol_name(kinds.back()));
  }
  // Surface roster errors before any session runs.
  for (ProtocolKind k : kinds) {
    Scenario s = scenario;
    s.session.protocol = k;
    build_session(s, preset_scenario(s.motion_preset, s.motion_params));
  }
  for (std::size_t i = 0; i < seeds; ++i) {
    BenchRun run;
    run.seed = base_seed + i;
    for (ProtocolKind k : kinds) {
      Scenario s = scenario;
      s.seed = run.seed;
      s.session.protocol = k;
      run.metrics.push_back(run_scenario(s).metrics);
    }
    report.runs.push_back(std::move(run));
  }

  const auto cw = std::find(kinds.begin(), kinds.end(), ProtocolKind::Cw);
  const auto ble = std::find(kinds.begin(), kinds.end(), ProtocolKind::BleBaseline);
  if (cw != kinds.end()) {
    for (const auto& run : report.runs) {
      report.cw_hops += run.metrics[cw - kinds.begin()].hops;
    }
  }
  if (cw != kinds.end() && ble != kinds.end()) {
    std::size_t dominates = 0, ble_low = 0, cw_high = 0;
    for (const auto& run : report.runs) {
      const auto& mc = run.metrics[cw - kinds.begin()];
      const auto& mb = run.metrics[ble - kinds.begin()];
      bool all = true;
      for (std::size_t s = 0; s < mc.sensors.size(); ++s) {
        all = all && mc.sensors[s].mean_rate_hz > mb.sensors[s].mean_rate_hz;
      }
      dominates += all ? 1 : 0;
      ble_low += std::any_of(mb.sensors.begin(), mb.sensors.end(),
                             [](const SensorMetrics& m) { return m.min_window_rate_hz < 10.0; })
                     ? 1
                     : 0;
      cw_high += std::all_of(mc.sensors.begin(), mc.sensors.end(),
                             [](const SensorMetrics& m) { return m.min_window_rate_hz >= 40.0; })
                     ? 1
                     : 0;
    }
    const double n = static_cast<double>(report.runs.size());
    report.cw_dominates_fraction = static_cast<double>(dominates) / n;
    report.ble_min_below_10_fraction = static_cast<double>(ble_low) / n;
    report.cw_min_at_least_40_fraction = static_cast<double>(cw_high) / n;
  }
  return report;
}

std::string bench_json(const BenchReport& report) {
  ordered_json j;
  j["protocols"] = report.protocols;
  j["seeds"] = report.runs.size();
  ordered_json summary;
  summary["cw_hops"] = report.cw_hops;
  if (report.cw_dominates_fraction) {
    summary["cw_dominates_fraction"] = *report.cw_dominates_fraction;
    summary["ble_min_below_10_fraction"] = *report.ble_min_below_10_fraction;
    summary["cw_min_at_least_40_fraction"] = *report.cw_min_at_least_40_fraction;
  }
  j["summary"] = summary;
  j["runs"] = ordered_json::array();
  for (const auto& run : report.runs) {
    ordered_json r;
    r["seed"] = run.seed;
    for (std::size_t i = 0; i < run.metrics.size(); ++i) {
      r[report.protocols[i]] = metrics_object(run.metrics[i]);
    }
    j["runs"].push_back(r);
  }
  return j.dump(2) + "\n";
}

}  // namespace bodynet::cli
