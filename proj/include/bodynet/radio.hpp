#pragma once

// Discrete-event model of the 2.4 GHz band: channel plan, interferer
// occupancy, a deterministic scheduler and the collision arbiter.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <queue>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "bodynet/errors.hpp"

namespace bodynet {

using Micros = std::int64_t;

// Closed frequency interval in MHz.
struct Band {
  double lo_mhz = 0.0;
  double hi_mhz = 0.0;
};

// True when the intervals share a stretch of positive length; touching
// endpoints do not count.
constexpr bool overlaps(const Band& a, const Band& b) {
  return a.lo_mhz < b.hi_mhz && b.lo_mhz < a.hi_mhz;
}

// 80 channels of 2 MHz, 1 MHz apart, centered at 2400 + k MHz. Three fixed
// sync channels, the rest carry data.
class ChannelPlan {
 public:
  static constexpr int kChannelCount = 80;

  ChannelPlan() : ChannelPlan({2, 26, 79}) {}
  // Throws ConfigError unless the three channels are distinct and in range.
  explicit ChannelPlan(const std::vector<int>& sync_channels);

  static double center_mhz(int k);
  // Throws InvalidInput for k outside 0..79.
  static Band band(int k);

  const std::vector<int>& sync_channels() const { return sync_; }
  const std::vector<int>& data_channels() const { return data_; }
  bool is_sync(int k) const;

 private:
  std::vector<int> sync_;
  std::vector<int> data_;
};

// Does channel k's occupied band intersect `band`? Throws InvalidInput for k outside 0..79.
bool overlaps(int k, const Band& band);

// 22 MHz Wi-Fi channel 1..13 centered at 2407 + 5 ch MHz.
Band wifi_band(int wifi_channel);
// BLE data channel 0..36: centers 2404 + 2i (i <= 10) and 2406 + 2i (i >= 11),
// stepping over the advertising channel at 2426 MHz.
Band ble_data_band(int index);
// Classic Bluetooth-style 2 MHz hop channel 0..39 centered at 2402 + 2k MHz.
Band bt_hop_band(int index);

struct WifiAp {
  int channel = 1;
  double duty = 0.25;
  double mean_burst_ms = 2.0;
  // Traffic sessions: the AP alternates between busy periods at `duty_on`
  // and quiet periods at `duty_off`, with exponential lengths averaging
  // `session_s`. Disabled when session_s is 0, leaving a flat `duty`.
  double session_s = 0.0;
  double duty_on = 0.0;
  double duty_off = 0.0;
};

struct BtDevice {
  double event_interval_ms = 15.0;
  double burst_us = 296.0;
};

// Constant carrier over [start, stop).
struct Jammer {
  Band band;
  Micros start_us = 0;
  Micros stop_us = std::numeric_limits<Micros>::max();
};

using InterfererKind = std::variant<WifiAp, BtDevice, Jammer>;

struct Interferer {
  InterfererKind kind;
  std::uint64_t seed = 0;

  // Throws ConfigError for out-of-range parameters.
  void validate() const;
  // "wifi", "bt" or "jammer".
  std::string kind_name() const;
};

// "clean" (no interferers) or "crowded" (12 Wi-Fi APs, four each on
// channels 1, 6 and 11, plus 8 Bluetooth devices). Throws ConfigError otherwise.
std::vector<Interferer> interference_preset(const std::string& name, std::uint64_t seed);

// An occupied stretch of spectrum and time. Protocol nodes fill `channel`;
// interferers only carry a band.
struct Transmission {
  int source = 0;
  std::optional<int> channel;
  Band band;
  Micros start_us = 0;
  Micros duration_us = 0;

  Micros end_us() const { return start_us + duration_us; }
};

// Seeded burst list of interferer `i` within [t0, t1), sorted and disjoint.
// Throws InvalidInput unless t0 < t1.
std::vector<Transmission> occupancy(const Interferer& i, Micros t0, Micros t1, int source = 0);

// Single-threaded event queue with a virtual microsecond clock. Events at the
// same time run in (source id, insertion order) order.
class EventScheduler {
 public:
  using Action = std::function<void()>;

  Micros now() const { return now_; }
  // Throws InvalidInput for a time in the past.
  void schedule(Micros at_us, int source, Action action);
  // Runs one event; false when the queue is empty.
  bool step();
  // Runs every event with time <= t_end, then advances the clock to t_end.
  void run_until(Micros t_end);
  std::size_t pending() const { return queue_.size(); }
  std::uint64_t dispatched() const { return dispatched_; }

 private:
  struct Event {
    Micros at;
    int source;
    std::uint64_t order;
    Action action;
  };
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      if (a.at != b.at) return a.at > b.at;
      if (a.source != b.source) return a.source > b.source;
      return a.order > b.order;
    }
  };

  Micros now_ = 0;
  std::uint64_t next_order_ = 0;
  std::uint64_t dispatched_ = 0;
  std::priority_queue<Event, std::vector<Event>, Later> queue_;
};

enum class Outcome { Delivered, Collided, FloorLost, Background };

std::string_view outcome_name(Outcome o);

struct Arbitration {
  Outcome outcome = Outcome::Delivered;
  // Source id of the first conflicting transmission, when collided.
  std::optional<int> cause;
};

// One row of the radio trace. `frame` and `sensor_id` are only filled for
// protocol frames (session trace).
struct TraceRecord {
  Micros time_us = 0;
  int source = 0;
  int channel = -1;
  std::string kind;
  Outcome outcome = Outcome::Delivered;
  std::string frame;
  int sensor_id = -1;
};

void write_radio_trace(std::ostream& os, const std::vector<TraceRecord>& trace);
void write_session_trace(std::ostream& os, const std::vector<TraceRecord>& trace);

// Shared medium for one session. Interferer bursts are generated up front for
// [0, horizon); node transmissions register when they start and are
// arbitrated when they end.
class Medium {
 public:
  // Source ids of interferers are kInterfererSourceBase + index.
  static constexpr int kInterfererSourceBase = 1000;

  Medium(const std::vector<Interferer>& interferers, Micros horizon_us, double p_floor = 0.0,
         std::uint64_t floor_seed = 0);

  void begin(const Transmission& tx);
  // Collided iff any spectrally overlapping interferer burst or other node
  // transmission is active during part of tx; else Delivered, possibly
  // downgraded to FloorLost. Also appends the trace row.
  Arbitration finish(const Transmission& tx, const std::string& kind, const std::string& frame = {},
                     int sensor_id = -1);

  // Arbitration without side effects (no trace, no floor draw, no registration).
  Arbitration probe(const Transmission& tx) const;

  const std::vector<TraceRecord>& trace() const { return trace_; }
  // Node trace merged with every interferer burst, ordered by time.
  std::vector<TraceRecord> full_trace() const;
  const std::vector<std::vector<Transmission>>& interferer_bursts() const { return bursts_; }

 private:
  std::vector<Interferer> interferers_;
  std::vector<std::vector<Transmission>> bursts_;
  std::vector<Transmission> active_;
  std::vector<TraceRecord> trace_;
  double p_floor_;
  std::mt19937_64 floor_rng_;
};

}  // namespace bodynet
