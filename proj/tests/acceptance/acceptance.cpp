// End-to-end acceptance run: one PASS/FAIL line per criterion, nonzero exit
// when any criterion fails.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "commands.hpp"

using namespace bodynet;
namespace fs = std::filesystem;

namespace {

const fs::path kScenarios = BODYNET_SCENARIO_DIR;

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  std::array<char, 512> buf{};
  std::snprintf(buf.data(), buf.size(), f, args...);
  return buf.data();
}

// --- 1: quaternion oracle --------------------------------------------------

using Mat3 = std::array<std::array<double, 3>, 3>;

// Rodrigues' formula, independent of the quaternion code.
Mat3 rodrigues(const std::array<double, 3>& axis, double angle_rad) {
  const double n = std::sqrt(axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]);
  const double x = axis[0] / n, y = axis[1] / n, z = axis[2] / n;
  const double c = std::cos(angle_rad), s = std::sin(angle_rad), t = 1.0 - c;
  return {{{t * x * x + c, t * x * y - s * z, t * x * z + s * y},
           {t * x * y + s * z, t * y * y + c, t * y * z - s * x},
           {t * x * z - s * y, t * y * z + s * x, t * z * z + c}}};
}

Mat3 matmul(const Mat3& a, const Mat3& b) {
  Mat3 r{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) r[i][j] += a[i][k] * b[k][j];
  return r;
}

// Columns are the rotated basis vectors.
Mat3 to_matrix(const UnitQuaternion& q) {
  Mat3 m{};
  const std::array<Vector3, 3> basis{Vector3{1, 0, 0}, Vector3{0, 1, 0}, Vector3{0, 0, 1}};
  for (int j = 0; j < 3; ++j) {
    const Vector3 c = rotate(q, basis[j]);
    m[0][j] = c.x;
    m[1][j] = c.y;
    m[2][j] = c.z;
  }
  return m;
}

Verdict quaternion_oracle() {
  std::mt19937_64 rng(20240101);
  std::normal_distribution<double> n;
  std::uniform_real_distribution<double> ang(-360.0, 360.0);
  double worst_product = 0.0, worst_dot = 0.0;
  for (int k = 0; k < 10'000; ++k) {
    const std::array<double, 3> ax{n(rng), n(rng), n(rng)}, bx{n(rng), n(rng), n(rng)};
    const double a_deg = ang(rng), b_deg = ang(rng);
    const UnitQuaternion a = from_axis_angle({ax[0], ax[1], ax[2]}, a_deg);
    const UnitQuaternion b = from_axis_angle({bx[0], bx[1], bx[2]}, b_deg);
    const Mat3 expected = matmul(rodrigues(ax, a_deg * std::numbers::pi / 180), rodrigues(bx, b_deg * std::numbers::pi / 180));
    const Mat3 got = to_matrix(a * b);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) worst_product = std::max(worst_product, std::abs(got[i][j] - expected[i][j]));
    worst_dot = std::max(worst_dot, std::abs(dot4(enu_to_left_handed(a), enu_to_left_handed(b)) - dot4(a, b)));
  }
  return {worst_product <= 1e-9 && worst_dot <= 1e-9,
          fmt("10000 pairs, max |product - matrix oracle| %.2e, max |dot4 change| %.2e (tol 1e-9)", worst_product,
              worst_dot)};
}

// --- 2, 3: artificial joint ------------------------------------------------

// Mean and worst error of the left-elbow angle over the dwell at the set angle.
std::pair<double, double> dwell_error(const Scenario& s, double set_deg) {
  const RunOutput run = run_scenario(s);
  const auto p = SensorPlacement::preset("p2-joint");
  const auto series =
      joint_angle_series(run.session.frames, calibrate_from_first_frames(run.session.frames, p, CalibrationPose::Neutral),
                         Skeleton(), joint_from_label("left-elbow"));
  const double hold = s.motion_params.at("hold_s"), ramp = s.motion_params.at("ramp_s");
  const double dwell = s.motion_params.at("dwell_s");
  const auto from = std::llround((hold + ramp + 0.1) * 1e6), to = std::llround((hold + ramp + dwell - 0.1) * 1e6);
  double sum = 0.0, worst = 0.0;
  int count = 0;
  for (const auto& a : series.samples) {
    if (a.timestamp_us < from || a.timestamp_us > to) continue;
    sum += a.deg - set_deg;
    worst = std::max(worst, std::abs(a.deg - set_deg));
    ++count;
  }
  if (count == 0) throw AnalysisError("no samples in the dwell window");
  return {sum / count, worst};
}

Verdict zero_noise_exactness() {
  Scenario s = load_scenario(kScenarios / "artificial_joint.yaml");
  s.noise = NoiseModel::none();
  double worst = 0.0;
  for (int angle = 10; angle <= 100; angle += 10) {
    s.motion_params["angle_deg"] = angle;
    worst = std::max(worst, dwell_error(s, angle).second);
  }
  return {worst <= 1e-6, fmt("angles 10..100 deg, zero noise, worst |error| %.2e deg (tol 1e-6)", worst)};
}

Verdict noisy_static_accuracy() {
  Scenario s = load_scenario(kScenarios / "artificial_joint.yaml");
  s.noise = NoiseModel{};
  double worst_mean = 0.0;
  int worst_angle = 0;
  for (int angle = 10; angle <= 100; angle += 10) {
    s.motion_params["angle_deg"] = angle;
    double sum = 0.0;
    for (std::uint64_t trial = 1; trial <= 5; ++trial) {
      s.seed = 1000 * static_cast<std::uint64_t>(angle) + trial;
      sum += dwell_error(s, angle).first;
    }
    const double mean = std::abs(sum / 5.0);
    if (mean >= worst_mean) {
      worst_mean = mean;
      worst_angle = angle;
    }
  }
  return {worst_mean < 1.0,
          fmt("default noise, 5 trials per angle, worst |mean error| %.3f deg at %d deg (tol 1)", worst_mean, worst_angle)};
}

// --- 4: dynamic test ---------------------------------------------------------

Verdict dynamic_test() {
  Scenario s = load_scenario(kScenarios / "elbow_flexion.yaml");
  s.noise = NoiseModel{};
  const RunOutput run = run_scenario(s);
  const auto p = SensorPlacement::preset("p5-upper");
  const auto rec_calib = calibrate_from_first_frames(run.session.frames, p, CalibrationPose::Neutral);
  const auto gt_calib = calibrate_from_first_frames(run.ground_truth, p, CalibrationPose::Neutral);
  bool pass = true;
  std::string detail;
  for (const char* label : {"right-elbow", "left-elbow"}) {
    const JointSpec j = joint_from_label(label);
    const auto a = joint_angle_series(run.session.frames, rec_calib, Skeleton(), j);
    const auto b = joint_angle_series(run.ground_truth, gt_calib, Skeleton(), j);
    const double e = mae(a, b), r = pearson(a, b);
    pass = pass && e < 5.0 && r > 0.99;
    detail += fmt("%s MAE %.3f deg, r %.6f; ", label, e, r);
  }
  return {pass, detail + "(MAE < 5, r > 0.99)"};
}

// --- 5: throughput -----------------------------------------------------------

Verdict throughput() {
  auto rates = [](const fs::path& file) {
    const auto m = run_scenario(load_scenario(file)).metrics;
    double lo = 1e9, hi = 0.0;
    for (const auto& s : m.sensors) {
      lo = std::min(lo, s.mean_rate_hz);
      hi = std::max(hi, s.mean_rate_hz);
    }
    return std::pair{lo, hi};
  };
  const auto [lo10, hi10] = rates(kScenarios / "half_jacks_p10.yaml");
  const auto [lo12, hi12] = rates(kScenarios / "half_jacks_p12.yaml");
  SessionConfig one;
  one.roster = {1};
  one.duration_s = 10.0;
  const auto m1 = session_metrics(run_session(one, [](SensorId, double) { return UnitQuaternion::identity(); }));
  const double r1 = m1.sensors.at(0).mean_rate_hz;
  const bool pass = lo10 >= 40.0 && hi10 <= 60.0 && lo12 >= 28.0 && hi12 <= 42.0 && r1 == 60.0;
  return {pass, fmt("10 sensors %.2f..%.2f Hz (50 +- 10), 12 sensors %.2f..%.2f Hz ([28, 42]), 1 sensor %.4f Hz (60)",
                    lo10, hi10, lo12, hi12, r1)};
}

// --- 6: interference ordering ----------------------------------------------

Verdict interference_ordering() {
  const Scenario s = load_scenario(kScenarios / "arm_raise_crowded_cw.yaml");
  const auto report = cli::bench(s, {"cw", "ble-baseline"}, 100, 0);
  const std::size_t n = report.runs.size();
  const auto dom = std::llround(*report.cw_dominates_fraction * n);
  const auto ble = std::llround(*report.ble_min_below_10_fraction * n);
  const auto cw = std::llround(*report.cw_min_at_least_40_fraction * n);
  return {dom >= 95 && ble >= 80 && cw >= 80,
          fmt("crowded, 5 sensors, seeds 0..99: cw dominates %lld/100 (>= 95), baseline min window < 10 Hz "
              "%lld/100 (>= 80), cw min window >= 40 Hz %lld/100 (>= 80)",
              dom, ble, cw)};
}

// --- 7: hop correctness ------------------------------------------------------

Verdict hop_correctness() {
  const RunOutput run = run_scenario(load_scenario(kScenarios / "jam_initial_channel.yaml"));
  const SessionResult& r = run.session;
  const Jammer* jam = nullptr;
  for (const auto& i : run.config.interferers) {
    if (const auto* j = std::get_if<Jammer>(&i.kind)) jam = j;
  }
  if (!jam) return {false, "fixture has no jammer"};
  if (r.hops.empty()) return {false, "no hop"};
  const Micros first_hop = r.hops.front().time_us;
  std::size_t jammed_deliveries = 0;
  for (const auto& row : r.trace) {
    if (row.time_us >= first_hop && row.channel >= 0 && row.outcome == Outcome::Delivered &&
        overlaps(row.channel, jam->band)) {
      ++jammed_deliveries;
    }
  }
  const Micros bound = run.config.timing.worst_case_resync_us();
  const auto delays = rejoin_delays_us(r);
  Micros worst = 0;
  bool all_rejoined = true;
  for (const auto& d : delays) {
    all_rejoined = all_rejoined && d.has_value();
    if (d) worst = std::max(worst, *d);
  }
  const bool pass = first_hop >= jam->start_us && !overlaps(r.hops.front().to, jam->band) && jammed_deliveries == 0 &&
                    all_rejoined && worst <= bound;
  return {pass, fmt("%zu hop(s), first %.3f s after jam onset, %zu deliveries on the jammed band after the hop, "
                    "slowest rejoin %.1f ms (bound %.1f ms)",
                    r.hops.size(), static_cast<double>(first_hop - jam->start_us) * 1e-6, jammed_deliveries,
                    static_cast<double>(worst) * 1e-3, static_cast<double>(bound) * 1e-3)};
}

// --- 8: determinism and conservation ---------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

Verdict determinism_and_conservation(const fs::path& scratch) {
  int scenarios = 0, mismatches = 0, violations = 0;
  for (const auto& entry : fs::directory_iterator(kScenarios)) {
    if (entry.path().extension() != ".yaml") continue;
    ++scenarios;
    const fs::path a = scratch / "det" / entry.path().stem() / "a", b = scratch / "det" / entry.path().stem() / "b";
    const RunOutput run = cli::simulate(entry.path(), a);
    cli::simulate(entry.path(), b);
    for (const auto& f : fs::directory_iterator(a)) {
      if (slurp(f.path()) != slurp(b / f.path().filename())) ++mismatches;
    }
    std::map<SensorId, std::uint64_t> rows;
    for (const auto& t : run.session.trace) {
      if (t.frame == "Response" || t.frame == "Data") ++rows[t.sensor_id];
    }
    for (const auto& [id, c] : run.session.counters) {
      if (c.sent != c.delivered + c.collided + c.floor_lost || rows[id] != c.sent) ++violations;
    }
  }
  return {scenarios > 0 && mismatches == 0 && violations == 0,
          fmt("%d scenarios simulated twice: %d differing files, %d conservation violations", scenarios, mismatches,
              violations)};
}

// --- 9: CSV round trip -------------------------------------------------------

Verdict csv_round_trip(const fs::path& scratch) {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> n;
  std::vector<RecordingFrame> frames;
  frames.reserve(100'000);
  for (int k = 0; k < 100'000; ++k) {
    const SensorId id = k % 12;
    frames.push_back(make_frame(std::int64_t{1389} * k, id, k / 12, UnitQuaternion(n(rng), n(rng), n(rng), n(rng)), k % 4));
  }
  const fs::path file = scratch / "round_trip.csv";
  write_recording(file, frames);
  const auto back = read_recording(file);
  std::size_t differing = back.size() == frames.size() ? 0 : frames.size();
  for (std::size_t k = 0; differing == 0 && k < frames.size(); ++k) differing += !(back[k] == frames[k]);
  std::ostringstream rewritten;
  write_recording(rewritten, back);
  const bool stable = rewritten.str() == slurp(file);
  return {differing == 0 && stable, fmt("%zu frames written and read back, %zu differ, rewrite %s", frames.size(),
                                        differing, stable ? "byte-identical" : "differs")};
}

}  // namespace

int main() {
  const fs::path scratch = fs::temp_directory_path() / "bodynet_acceptance";
  fs::remove_all(scratch);
  fs::create_directories(scratch);

  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria{
      {"quaternion oracle equivalence", quaternion_oracle},
      {"zero-noise pipeline exactness", zero_noise_exactness},
      {"noisy static accuracy", noisy_static_accuracy},
      {"dynamic elbow test", dynamic_test},
      {"throughput calibration", throughput},
      {"interference ordering", interference_ordering},
      {"hop correctness", hop_correctness},
      {"determinism and conservation", [&] { return determinism_and_conservation(scratch); }},
      {"csv round trip", [&] { return csv_round_trip(scratch); }},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %zu %s: %s [%.1f s]\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, v.detail.c_str(), secs);
    std::fflush(stdout);
    failures += !v.pass;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
