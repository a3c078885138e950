#pragma once

// Master/slave polling protocol with loss-driven channel hopping, and a
// BLE-style baseline with independent connections and blind hopping.

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bodynet/radio.hpp"
#include "bodynet/recording.hpp"

namespace bodynet {

enum class FrameType { Beacon, Poll, Response, Hop, Ack };

std::string_view frame_name(FrameType t);

struct FrameHeader {
  FrameType type = FrameType::Poll;
  std::uint32_t session_id = 0;
  SensorId sensor_id = -1;  // -1 for broadcast frames
  std::int64_t seq = 0;
  int channel = -1;
  std::optional<int> next_channel;  // Beacon and Hop only
};

struct TimingProfile {
  static constexpr double kAirRateMbps = 2.0;

  int poll_bytes = 12;
  int response_bytes = 32;
  int beacon_bytes = 16;
  int hop_bytes = 12;
  int ack_bytes = 8;
  int turnaround_us = 150;
  int guard_us = 50;
  // Receiver-side processing per delivered sample, spent before the next poll.
  int host_cost_us = 1700;
  double poll_cap_hz = 60.0;
  int beacon_interval_us = 20'000;
  int resync_timeout_us = 200'000;

  // 4 us per byte at 2 Mbps.
  int airtime_us(FrameType t) const;
  // Poll, turnaround, Response, guard.
  int slot_us() const;
  double cap_period_us() const { return 1e6 / poll_cap_hz; }
  // Slave dwell on each sync channel while scanning.
  int scan_dwell_us() const { return 2 * beacon_interval_us; }
  // Longest silence-to-rejoin after a missed hop: timeout plus one dwell per sync channel.
  int worst_case_resync_us() const { return resync_timeout_us + 3 * scan_dwell_us(); }

  // Throws ConfigError.
  void validate() const;
};

struct HopPolicy {
  int loss_threshold = 3;
  int loss_window = 8;
  int blacklist_length = 8;
  int announce_repeats = 3;
  // An active slave missing this many polls in a row is treated as gone.
  int drop_after_misses = 8;

  void validate() const;
};

// Position in the seeded walk over the data channels.
struct HopState {
  std::vector<int> permutation;
  std::size_t position = 0;
  int current = -1;
  std::deque<int> blacklist;

  // Current channel is permutation[0].
  static HopState fresh(const ChannelPlan& plan, std::uint64_t seed);
};

// Advances to the next permutation entry that is neither blacklisted nor the
// current channel, pushes the old channel onto the bounded blacklist and
// returns the new one.
int select_next_channel(HopState& state, const HopPolicy& policy);

// Fused orientation of a sensor at a session time in seconds.
using SampleSource = std::function<UnitQuaternion(SensorId, double)>;

enum class ProtocolKind { Cw, BleBaseline };

std::string_view protocol_name(ProtocolKind k);
ProtocolKind protocol_from_name(const std::string& name);

// BLE channel selection #1 over the 37 data channels: (last + increment) mod 37.
// Throws InvalidInput for a channel outside 0..36 or an increment outside 5..16.
int csa1_next(int last, int hop_increment);

struct BleSettings {
  double interval_ms = 15.0;
  int poll_bytes = 10;
  int data_bytes = 40;
  int empty_bytes = 10;
  double us_per_byte = 8.0;
  int ifs_us = 150;
  double sample_rate_hz = 60.0;
  std::size_t queue_limit = 32;

  void validate() const;
};

struct SessionConfig {
  ProtocolKind protocol = ProtocolKind::Cw;
  std::vector<SensorId> roster;
  // Sensors connect and settle for warmup_s before the recording window of
  // duration_s opens; samples delivered during the warm-up are not recorded.
  double warmup_s = 2.0;
  double duration_s = 10.0;
  TimingProfile timing;
  HopPolicy policy;
  BleSettings ble;
  ChannelPlan plan;
  std::vector<Interferer> interferers;
  double p_floor = 0.0;
  std::uint64_t seed = 0;
};

// Node id 0 is the master; slave s is s + 1. Channel -1 means not on a data channel.
struct ChannelChange {
  Micros time_us = 0;
  SensorId node = -1;
  int channel = -1;
};

struct HopRecord {
  Micros time_us = 0;
  int from = -1;
  int to = -1;
};

struct SensorCounters {
  std::uint64_t sent = 0;
  std::uint64_t delivered = 0;
  std::uint64_t collided = 0;
  std::uint64_t floor_lost = 0;
  std::uint64_t resyncs = 0;
};

// Traces, hops and the channel log run on the session clock, which starts at
// the beginning of the warm-up. Recording timestamps count from the end of the
// warm-up; the sample source is queried on that recording clock (negative
// during the warm-up).
struct SessionResult {
  ProtocolKind protocol = ProtocolKind::Cw;
  std::vector<SensorId> roster;
  Micros warmup_us = 0;
  // Length of the recording window.
  Micros duration_us = 0;
  // Delivered samples in delivery order, recording window only.
  std::vector<RecordingFrame> frames;
  // Protocol transmissions with outcome, frame type and sensor id.
  std::vector<TraceRecord> trace;
  // Protocol transmissions merged with interferer bursts.
  std::vector<TraceRecord> radio_trace;
  // Data frames (Response / BLE data) per sensor over the whole session.
  std::map<SensorId, SensorCounters> counters;
  std::vector<HopRecord> hops;
  std::vector<ChannelChange> channel_log;
};

// Source id used for a sensor's transmissions in traces.
constexpr int node_source(SensorId sensor) { return sensor + 1; }
inline constexpr int kMasterSource = 0;

// Throws ConfigError for an empty roster, more than 12 sensors (5 for the
// baseline) or invalid timing/policy.
SessionResult run_session(const SessionConfig& config, const SampleSource& source);

// Longest stretch during which a synced slave listened on a channel other
// than the master's.
Micros max_channel_disagreement_us(const SessionResult& result);

// For each hop, how long until every slave is synced on the channel the
// master moved to; nullopt when some slave never rejoins before the next hop
// or the end of the session.
std::vector<std::optional<Micros>> rejoin_delays_us(const SessionResult& result);

struct SensorMetrics {
  SensorId sensor = 0;
  std::uint64_t sent = 0;
  std::uint64_t delivered = 0;
  std::uint64_t collided = 0;
  std::uint64_t floor_lost = 0;
  std::uint64_t resyncs = 0;
  double mean_rate_hz = 0.0;
  double min_window_rate_hz = 0.0;
  double pdr = 0.0;
};

struct SessionMetrics {
  std::string protocol;
  double duration_s = 0.0;
  double window_s = 1.0;
  std::vector<SensorMetrics> sensors;
  std::uint64_t hops = 0;
  std::uint64_t resyncs = 0;
  double max_skew_ms = 0.0;
};

// Mean rate is recorded samples over the recording duration; the window
// minimum slides a trailing window of `window_s` over the recording in 100 ms
// steps; skew is the largest spread between the newest samples of any two
// sensors once every sensor has delivered.
SessionMetrics session_metrics(const SessionResult& result, double window_s = 1.0);

}  // namespace bodynet
