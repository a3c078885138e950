#pragma once

// Scenario files: one YAML document fully describing a run.
//
//   session:      duration_s, warmup_s, seed
//   motion:       preset, params {...}, noise {...}, mounting (identity|random)
//   placement:    preset (defaults to the motion preset's placement), or
//                 bindings {sensor_id: bone-name, ...}
//   protocol:     kind (cw|ble-baseline), p_floor, timing {...}, hop {...}, ble {...}
//   interference: preset (clean|crowded), interferers [ {wifi|bt|jammer: {...}} ]
//   output:       ground_truth_hz
//
// Unknown keys are rejected with the full key path in the message.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "bodynet/motion.hpp"
#include "bodynet/protocol.hpp"

namespace bodynet {

// A jammer either names its band directly or sits on a channel; the special
// channel "initial" resolves to the first data channel the CW master uses.
struct JammerSpec {
  std::optional<int> channel;
  bool initial_channel = false;
  std::optional<Band> band;
  double start_s = 0.0;  // recording clock
  std::optional<double> stop_s;
};

using InterfererSpec = std::variant<WifiAp, BtDevice, JammerSpec>;

struct Scenario {
  std::optional<double> duration_s;  // defaults to the trajectory length
  double warmup_s = 2.0;
  std::uint64_t seed = 0;

  std::string motion_preset;
  PresetParams motion_params;
  NoiseModel noise;
  bool random_mounting = false;
  std::string placement;  // empty: the preset's own
  std::vector<std::pair<SensorId, BoneId>> bindings;  // explicit placement, overrides both

  SessionConfig session;  // protocol, timing, hop, ble, p_floor
  std::string interference = "clean";
  std::vector<InterfererSpec> interferers;

  double ground_truth_hz = 60.0;
};

// Throws ConfigError naming the offending key.
Scenario parse_scenario(const std::string& yaml_text);
// Throws IoError when unreadable, ConfigError when invalid.
Scenario load_scenario(const std::filesystem::path& path);

struct RunOutput {
  MotionPreset motion;
  SessionConfig config;
  SessionResult session;
  SessionMetrics metrics;
  // Noise-free readings on a uniform grid over the recording window.
  std::vector<RecordingFrame> ground_truth;
};

// Builds the trajectory, sensors and radio environment and runs the session.
RunOutput run_scenario(const Scenario& scenario);

// Placement a run uses: explicit bindings, else the named preset, else the motion preset's.
SensorPlacement scenario_placement(const Scenario& scenario, const MotionPreset& motion);

// Session configuration and motion as run_scenario() would build them.
SessionConfig build_session(const Scenario& scenario, const MotionPreset& motion);

// Ordered JSON with a fixed key set.
std::string metrics_json(const SessionMetrics& m);

// recording.csv, ground_truth.csv, radio_trace.csv, session_trace.csv, metrics.json.
void write_outputs(const RunOutput& run, const std::filesystem::path& dir);

}  // namespace bodynet
