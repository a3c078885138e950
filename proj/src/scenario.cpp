#include "bodynet/scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

namespace bodynet {

namespace {

using Keys = std::initializer_list<std::string_view>;

std::string join_path(const std::string& parent, const std::string& key) {
  return parent.empty() ? key : parent + "." + key;
}

void require_map(const YAML::Node& node, const std::string& path) {
  if (!node.IsMap()) {
    throw ConfigError("'" + (path.empty() ? std::string("<root>") : path) + "' must be a mapping");
  }
}

void check_keys(const YAML::Node& node, const std::string& path, Keys allowed) {
  require_map(node, path);
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError("unknown key '" + join_path(path, key) + "'");
    }
  }
}

template <typename T>
std::optional<T> get(const YAML::Node& map, const std::string& key, const std::string& path) {
  const YAML::Node n = map[key];
  if (!n) {
    return std::nullopt;
  }
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError("'" + join_path(path, key) + "' has an invalid value");
  }
}

template <typename T>
void assign(T& target, const YAML::Node& map, const std::string& key, const std::string& path) {
  if (auto v = get<T>(map, key, path)) {
    target = *v;
  }
}

void read_noise(const YAML::Node& n, const std::string& path, NoiseModel& noise) {
  check_keys(n, path,
             {"static_sigma_deg", "dynamic_sigma_deg", "static_max_deg", "dynamic_max_deg", "drift_deg_per_min",
              "reference_speed_dps"});
  assign(noise.static_sigma_deg, n, "static_sigma_deg", path);
  assign(noise.dynamic_sigma_deg, n, "dynamic_sigma_deg", path);
  assign(noise.static_max_deg, n, "static_max_deg", path);
  assign(noise.dynamic_max_deg, n, "dynamic_max_deg", path);
  assign(noise.drift_deg_per_min, n, "drift_deg_per_min", path);
  assign(noise.reference_speed_dps, n, "reference_speed_dps", path);
}

void read_timing(const YAML::Node& n, const std::string& path, TimingProfile& t) {
  check_keys(n, path,
             {"poll_bytes", "response_bytes", "beacon_bytes", "hop_bytes", "ack_bytes", "turnaround_us", "guard_us",
              "host_cost_us", "poll_cap_hz", "beacon_interval_us", "resync_timeout_us"});
  assign(t.poll_bytes, n, "poll_bytes", path);
  assign(t.response_bytes, n, "response_bytes", path);
  assign(t.beacon_bytes, n, "beacon_bytes", path);
  assign(t.hop_bytes, n, "hop_bytes", path);
  assign(t.ack_bytes, n, "ack_bytes", path);
  assign(t.turnaround_us, n, "turnaround_us", path);
  assign(t.guard_us, n, "guard_us", path);
  assign(t.host_cost_us, n, "host_cost_us", path);
  assign(t.poll_cap_hz, n, "poll_cap_hz", path);
  assign(t.beacon_interval_us, n, "beacon_interval_us", path);
  assign(t.resync_timeout_us, n, "resync_timeout_us", path);
}

void read_hop(const YAML::Node& n, const std::string& path, HopPolicy& h) {
  check_keys(n, path, {"loss_threshold", "loss_window", "blacklist_length", "announce_repeats", "drop_after_misses"});
  assign(h.loss_threshold, n, "loss_threshold", path);
  assign(h.loss_window, n, "loss_window", path);
  assign(h.blacklist_length, n, "blacklist_length", path);
  assign(h.announce_repeats, n, "announce_repeats", path);
  assign(h.drop_after_misses, n, "drop_after_misses", path);
}

void read_ble(const YAML::Node& n, const std::string& path, BleSettings& b) {
  check_keys(n, path,
             {"interval_ms", "poll_bytes", "data_bytes", "empty_bytes", "us_per_byte", "ifs_us", "sample_rate_hz",
              "queue_limit"});
  assign(b.interval_ms, n, "interval_ms", path);
  assign(b.poll_bytes, n, "poll_bytes", path);
  assign(b.data_bytes, n, "data_bytes", path);
  assign(b.empty_bytes, n, "empty_bytes", path);
  assign(b.us_per_byte, n, "us_per_byte", path);
  assign(b.ifs_us, n, "ifs_us", path);
  assign(b.sample_rate_hz, n, "sample_rate_hz", path);
  assign(b.queue_limit, n, "queue_limit", path);
}

InterfererSpec read_interferer(const YAML::Node& item, const std::string& path) {
  require_map(item, path);
  if (item.size() != 1) {
    throw ConfigError("'" + path + "' must hold exactly one of wifi, bt, jammer");
  }
  const auto kind = item.begin()->first.as<std::string>();
  const YAML::Node body = item.begin()->second;
  const std::string sub = join_path(path, kind);
  if (kind == "wifi") {
    check_keys(body, sub, {"channel", "duty", "mean_burst_ms", "session_s", "duty_on", "duty_off"});
    WifiAp w;
    assign(w.channel, body, "channel", sub);
    assign(w.duty, body, "duty", sub);
    assign(w.mean_burst_ms, body, "mean_burst_ms", sub);
    assign(w.session_s, body, "session_s", sub);
    assign(w.duty_on, body, "duty_on", sub);
    assign(w.duty_off, body, "duty_off", sub);
    return w;
  }
  if (kind == "bt") {
    check_keys(body, sub, {"event_interval_ms", "burst_us"});
    BtDevice b;
    assign(b.event_interval_ms, body, "event_interval_ms", sub);
    assign(b.burst_us, body, "burst_us", sub);
    return b;
  }
  if (kind == "jammer") {
    check_keys(body, sub, {"channel", "lo_mhz", "hi_mhz", "start_s", "stop_s"});
    JammerSpec j;
    if (const YAML::Node ch = body["channel"]) {
      if (ch.IsScalar() && ch.as<std::string>() == "initial") {
        j.initial_channel = true;
      } else {
        j.channel = get<int>(body, "channel", sub);
      }
    }
    const auto lo = get<double>(body, "lo_mhz", sub);
    const auto hi = get<double>(body, "hi_mhz", sub);
    if (lo.has_value() != hi.has_value()) {
      throw ConfigError("'" + sub + "' needs both lo_mhz and hi_mhz");
    }
    if (lo) {
      j.band = Band{*lo, *hi};
    }
    if ((j.channel || j.initial_channel) == j.band.has_value()) {
      throw ConfigError("'" + sub + "' needs either channel or lo_mhz/hi_mhz");
    }
    assign(j.start_s, body, "start_s", sub);
    j.stop_s = get<double>(body, "stop_s", sub);
    return j;
  }
  throw ConfigError("unknown interferer kind '" + sub + "'");
}

std::uint64_t mix(std::uint64_t seed, std::uint64_t salt) {
  // splitmix64 finalizer
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) {
    throw IoError("cannot open '" + path.string() + "'");
  }
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os || !(os << text)) {
    throw IoError("cannot write '" + path.string() + "'");
  }
}

}  // namespace

Scenario parse_scenario(const std::string& yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("scenario is not valid YAML: ") + e.what());
  }
  check_keys(root, "", {"session", "motion", "placement", "protocol", "interference", "output"});
  Scenario s;

  if (const YAML::Node n = root["session"]) {
    check_keys(n, "session", {"duration_s", "warmup_s", "seed"});
    s.duration_s = get<double>(n, "duration_s", "session");
    assign(s.warmup_s, n, "warmup_s", "session");
    assign(s.seed, n, "seed", "session");
  }

  const YAML::Node motion = root["motion"];
  if (!motion) {
    throw ConfigError("missing section 'motion'");
  }
  check_keys(motion, "motion", {"preset", "params", "noise", "mounting"});
  const auto preset = get<std::string>(motion, "preset", "motion");
  if (!preset) {
    throw ConfigError("missing key 'motion.preset'");
  }
  s.motion_preset = *preset;
  if (const YAML::Node p = motion["params"]) {
    require_map(p, "motion.params");
    for (const auto& kv : p) {
      const auto key = kv.first.as<std::string>();
      s.motion_params[key] = *get<double>(p, key, "motion.params");
    }
  }
  if (const YAML::Node n = motion["noise"]) {
    if (n.IsScalar() && n.as<std::string>() == "none") {
      s.noise = NoiseModel::none();
    } else {
      read_noise(n, "motion.noise", s.noise);
    }
  }
  if (auto m = get<std::string>(motion, "mounting", "motion")) {
    if (*m != "identity" && *m != "random") {
      throw ConfigError("'motion.mounting' must be identity or random");
    }
    s.random_mounting = *m == "random";
  }

  if (const YAML::Node n = root["placement"]) {
    check_keys(n, "placement", {"preset", "bindings"});
    assign(s.placement, n, "preset", "placement");
    if (const YAML::Node b = n["bindings"]) {
      require_map(b, "placement.bindings");
      if (!s.placement.empty()) {
        throw ConfigError("'placement' takes either a preset or bindings, not both");
      }
      for (const auto& kv : b) {
        const std::string key = kv.first.as<std::string>();
        SensorId id = -1;
        try {
          id = kv.first.as<SensorId>();
        } catch (const YAML::Exception&) {
          throw ConfigError("'placement.bindings." + key + "' is not a sensor id");
        }
        const auto bone = get<std::string>(b, key, "placement.bindings");
        s.bindings.emplace_back(id, bone_from_name(*bone));
      }
      SensorPlacement("custom", s.bindings);
    }
  }

  if (const YAML::Node n = root["protocol"]) {
    check_keys(n, "protocol", {"kind", "p_floor", "timing", "hop", "ble"});
    if (auto kind = get<std::string>(n, "kind", "protocol")) {
      s.session.protocol = protocol_from_name(*kind);
    }
    assign(s.session.p_floor, n, "p_floor", "protocol");
    if (const YAML::Node t = n["timing"]) {
      read_timing(t, "protocol.timing", s.session.timing);
    }
    if (const YAML::Node h = n["hop"]) {
      read_hop(h, "protocol.hop", s.session.policy);
    }
    if (const YAML::Node b = n["ble"]) {
      read_ble(b, "protocol.ble", s.session.ble);
    }
  }

  if (const YAML::Node n = root["interference"]) {
    check_keys(n, "interference", {"preset", "interferers"});
    assign(s.interference, n, "preset", "interference");
    if (const YAML::Node list = n["interferers"]) {
      if (!list.IsSequence()) {
        throw ConfigError("'interference.interferers' must be a list");
      }
      for (std::size_t i = 0; i < list.size(); ++i) {
        s.interferers.push_back(read_interferer(list[i], "interference.interferers[" + std::to_string(i) + "]"));
      }
    }
  }

  if (const YAML::Node n = root["output"]) {
    check_keys(n, "output", {"ground_truth_hz"});
    assign(s.ground_truth_hz, n, "ground_truth_hz", "output");
  }

  // Surface semantic errors at load time.
  if (s.duration_s && !(*s.duration_s > 0.0)) {
    throw ConfigError("'session.duration_s' must be positive");
  }
  if (!(s.warmup_s >= 0.0)) {
    throw ConfigError("'session.warmup_s' must be non-negative");
  }
  if (!(s.ground_truth_hz > 0.0)) {
    throw ConfigError("'output.ground_truth_hz' must be positive");
  }
  s.noise.validate();
  interference_preset(s.interference, 0);
  const MotionPreset m = preset_scenario(s.motion_preset, s.motion_params);
  if (!s.placement.empty()) {
    SensorPlacement::preset(s.placement);
  }
  build_session(s, m);
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) { return parse_scenario(read_file(path)); }

SensorPlacement scenario_placement(const Scenario& scenario, const MotionPreset& motion) {
  if (!scenario.bindings.empty()) {
    return SensorPlacement("custom", scenario.bindings);
  }
  return scenario.placement.empty() ? motion.placement : SensorPlacement::preset(scenario.placement);
}

SessionConfig build_session(const Scenario& scenario, const MotionPreset& motion) {
  SessionConfig cfg = scenario.session;
  cfg.roster = scenario_placement(scenario, motion).sensors();
  cfg.seed = scenario.seed;
  cfg.warmup_s = scenario.warmup_s;
  cfg.duration_s = scenario.duration_s.value_or(motion.trajectory.duration_s);
  cfg.interferers = interference_preset(scenario.interference, scenario.seed);
  const Micros warmup_us = std::llround(cfg.warmup_s * 1e6);
  for (std::size_t i = 0; i < scenario.interferers.size(); ++i) {
    const std::uint64_t seed = mix(scenario.seed, 100 + i);
    const auto& spec = scenario.interferers[i];
    if (const auto* w = std::get_if<WifiAp>(&spec)) {
      cfg.interferers.push_back({*w, seed});
    } else if (const auto* b = std::get_if<BtDevice>(&spec)) {
      cfg.interferers.push_back({*b, seed});
    } else {
      const auto& j = std::get<JammerSpec>(spec);
      Jammer jam;
      if (j.band) {
        jam.band = *j.band;
      } else {
        const int ch = j.initial_channel ? HopState::fresh(cfg.plan, cfg.seed).current : *j.channel;
        if (ch < 0 || ch >= ChannelPlan::kChannelCount) {
          throw ConfigError("jammer channel " + std::to_string(ch) + " outside 0..79");
        }
        jam.band = ChannelPlan::band(ch);
      }
      jam.start_us = warmup_us + std::llround(j.start_s * 1e6);
      if (j.stop_s) {
        jam.stop_us = warmup_us + std::llround(*j.stop_s * 1e6);
      }
      cfg.interferers.push_back({jam, seed});
    }
  }
  for (const auto& i : cfg.interferers) {
    i.validate();
  }
  if (cfg.protocol == ProtocolKind::Cw) {
    if (cfg.roster.size() > 12) {
      throw ConfigError("cw supports at most 12 sensors, placement has " + std::to_string(cfg.roster.size()));
    }
    cfg.timing.validate();
    cfg.policy.validate();
  } else {
    if (cfg.roster.size() > 5) {
      throw ConfigError("ble-baseline supports at most 5 sensors, placement has " +
                        std::to_string(cfg.roster.size()));
    }
    cfg.ble.validate();
  }
  if (!(cfg.p_floor >= 0.0 && cfg.p_floor <= 1.0)) {
    throw ConfigError("'protocol.p_floor' must lie in [0, 1]");
  }
  return cfg;
}

RunOutput run_scenario(const Scenario& scenario) {
  RunOutput out;
  out.motion = preset_scenario(scenario.motion_preset, scenario.motion_params);
  out.motion.placement = scenario_placement(scenario, out.motion);
  out.config = build_session(scenario, out.motion);
  NoiseModel noise = scenario.noise;
  noise.seed = mix(scenario.seed, 2);
  const MountingOffset mounting = scenario.random_mounting
                                      ? MountingOffset::random(out.motion.placement, mix(scenario.seed, 3))
                                      : MountingOffset::identity(out.motion.placement);
  ImuSimulator imu(out.motion.trajectory, Skeleton(), out.motion.placement, mounting, noise);
  const SampleSource source = [&imu](SensorId id, double t) { return imu.reading(id, t); };
  out.session = run_session(out.config, source);
  out.metrics = session_metrics(out.session);

  const auto duration_us = out.session.duration_us;
  for (SensorId id : out.motion.placement.sensors()) {
    for (std::int64_t k = 0;; ++k) {
      const std::int64_t t = std::llround(static_cast<double>(k) * 1e6 / scenario.ground_truth_hz);
      if (t > duration_us) {
        break;
      }
      out.ground_truth.push_back(make_frame(t, id, k, imu.ideal_reading(id, static_cast<double>(t) * 1e-6)));
    }
  }
  std::stable_sort(out.ground_truth.begin(), out.ground_truth.end(),
                   [](const RecordingFrame& a, const RecordingFrame& b) { return a.timestamp_us < b.timestamp_us; });
  return out;
}

std::string metrics_json(const SessionMetrics& m) {
  nlohmann::ordered_json j;
  j["protocol"] = m.protocol;
  j["duration_s"] = m.duration_s;
  j["window_s"] = m.window_s;
  j["hops"] = m.hops;
  j["resyncs"] = m.resyncs;
  j["max_skew_ms"] = m.max_skew_ms;
  j["sensors"] = nlohmann::ordered_json::array();
  for (const auto& s : m.sensors) {
    nlohmann::ordered_json e;
    e["sensor_id"] = s.sensor;
    e["mean_rate_hz"] = s.mean_rate_hz;
    e["min_window_rate_hz"] = s.min_window_rate_hz;
    e["pdr"] = s.pdr;
    e["sent"] = s.sent;
    e["delivered"] = s.delivered;
    e["collided"] = s.collided;
    e["floor_lost"] = s.floor_lost;
    e["resyncs"] = s.resyncs;
    j["sensors"].push_back(e);
  }
  return j.dump(2) + "\n";
}

void write_outputs(const RunOutput& run, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw IoError("cannot create '" + dir.string() + "': " + ec.message());
  }
  write_recording(dir / "recording.csv", run.session.frames);
  write_recording(dir / "ground_truth.csv", run.ground_truth);
  std::ostringstream radio;
  write_radio_trace(radio, run.session.radio_trace);
  write_file(dir / "radio_trace.csv", radio.str());
  std::ostringstream session;
  write_session_trace(session, run.session.trace);
  write_file(dir / "session_trace.csv", session.str());
  write_file(dir / "metrics.json", metrics_json(run.metrics));
}

}  // namespace bodynet
