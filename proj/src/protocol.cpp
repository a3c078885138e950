#include "bodynet/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "bodynet/analysis.hpp"

namespace bodynet {

namespace {

constexpr std::size_t kMaxRoster = 12;
constexpr std::size_t kMaxBleRoster = 5;
constexpr int kBleChannels = 37;

void check_roster(const std::vector<SensorId>& roster, std::size_t limit, const char* what) {
  if (roster.empty()) {
    throw ConfigError(std::string(what) + " roster is empty");
  }
  if (roster.size() > limit) {
    throw ConfigError(std::string(what) + " supports at most " + std::to_string(limit) + " sensors, got " +
                      std::to_string(roster.size()));
  }
  std::set<SensorId> unique(roster.begin(), roster.end());
  if (unique.size() != roster.size()) {
    throw ConfigError("sensor ids in the roster must be unique");
  }
  if (*unique.begin() < 0) {
    throw ConfigError("sensor ids must be non-negative");
  }
}

Micros to_us(double s) { return static_cast<Micros>(std::llround(s * 1e6)); }

Micros session_end(const SessionConfig& cfg) {
  if (!(cfg.duration_s > 0.0) || !std::isfinite(cfg.duration_s)) {
    throw ConfigError("session duration must be positive");
  }
  if (!(cfg.warmup_s >= 0.0) || !std::isfinite(cfg.warmup_s)) {
    throw ConfigError("warm-up must be non-negative");
  }
  return to_us(cfg.warmup_s) + to_us(cfg.duration_s);
}

// Common bookkeeping for both session kinds.
class SessionBase {
 protected:
  SessionBase(const SessionConfig& cfg, const SampleSource& source, ProtocolKind kind)
      : cfg_(cfg),
        source_(source),
        warmup_us_(to_us(cfg.warmup_s)),
        end_us_(session_end(cfg)),
        medium_(cfg.interferers, end_us_, cfg.p_floor, cfg.seed ^ 0x5bd1e995ULL) {
    result_.protocol = kind;
    result_.roster = cfg.roster;
    result_.warmup_us = warmup_us_;
    result_.duration_us = end_us_ - warmup_us_;
    for (SensorId id : cfg.roster) {
      result_.counters[id];
    }
  }

  UnitQuaternion sample(SensorId id, Micros session_t) const {
    return source_(id, static_cast<double>(session_t - warmup_us_) * 1e-6);
  }

  void record(Micros session_t, SensorId id, std::int64_t seq, const UnitQuaternion& q) {
    if (session_t >= warmup_us_) {
      result_.frames.push_back(make_frame(session_t - warmup_us_, id, seq, q));
    }
  }

  SessionResult finish() {
    sched_.run_until(end_us_);
    result_.trace = medium_.trace();
    result_.radio_trace = medium_.full_trace();
    return std::move(result_);
  }

  const SessionConfig& cfg_;
  const SampleSource& source_;
  Micros warmup_us_;
  Micros end_us_;
  EventScheduler sched_;
  Medium medium_;
  SessionResult result_;
};

// ---------------------------------------------------------------------------
// Channel-hopping master/slave session.

class CwSession : SessionBase {
 public:
  CwSession(const SessionConfig& cfg, const SampleSource& source)
      : SessionBase(cfg, source, ProtocolKind::Cw), hop_(HopState::fresh(cfg.plan, cfg.seed)) {
    for (std::size_t i = 0; i < cfg.roster.size(); ++i) {
      Slave s;
      s.id = cfg.roster[i];
      s.index = i;
      s.scan_index = static_cast<std::size_t>(s.id) % 3;
      s.channel = cfg.plan.sync_channels()[s.scan_index];
      slaves_.push_back(s);
      links_.emplace_back();
    }
  }

  SessionResult run() {
    log_channel(0, kMasterSource, hop_.current);
    for (auto& s : slaves_) {
      log_channel(0, node_source(s.id), -1);
      arm_dwell(s);
    }
    sched_.schedule(0, kMasterSource, [this] { start_cycle(0); });
    return finish();
  }

 private:
  enum class Phase { Scanning, Joining, Synced };
  enum class LinkStatus { Unconfirmed, Active };

  struct Slave {
    SensorId id = 0;
    std::size_t index = 0;
    Phase phase = Phase::Scanning;
    int channel = -1;
    Micros listen_since = 0;
    Micros last_heard = 0;
    std::uint64_t dwell_gen = 0;
    std::uint64_t timeout_gen = 0;
    std::size_t scan_index = 0;
    std::int64_t seq = 0;
  };

  struct Link {
    LinkStatus status = LinkStatus::Unconfirmed;
    std::deque<bool> window;  // true = lost
    int misses = 0;
    bool got_response = false;
    bool got_ack = false;
  };

  int air(FrameType t) const { return cfg_.timing.airtime_us(t); }

  void log_channel(Micros t, int node, int channel) { result_.channel_log.push_back({t, node, channel}); }

  bool hears(const Slave& s, const Transmission& tx) const {
    return s.channel == tx.channel && s.listen_since <= tx.start_us;
  }

  Transmission make_tx(int source, int channel, Micros start, FrameType type) const {
    return {source, channel, ChannelPlan::band(channel), start, air(type)};
  }

  // --- slave timers ---------------------------------------------------------

  void arm_dwell(Slave& s) {
    const std::uint64_t gen = ++s.dwell_gen;
    const Micros at = s.listen_since + cfg_.timing.scan_dwell_us();
    if (at > end_us_) {
      return;
    }
    sched_.schedule(at, node_source(s.id), [this, &s, gen] {
      if (s.dwell_gen != gen || s.phase != Phase::Scanning) {
        return;
      }
      s.scan_index = (s.scan_index + 1) % 3;
      s.channel = cfg_.plan.sync_channels()[s.scan_index];
      s.listen_since = sched_.now();
      arm_dwell(s);
    });
  }

  void heard(Slave& s) {
    s.last_heard = sched_.now();
    const std::uint64_t gen = ++s.timeout_gen;
    const Micros at = s.last_heard + cfg_.timing.resync_timeout_us;
    if (at > end_us_) {
      return;
    }
    sched_.schedule(at, node_source(s.id), [this, &s, gen] {
      if (s.timeout_gen != gen || s.phase != Phase::Synced) {
        return;
      }
      s.phase = Phase::Scanning;
      s.channel = cfg_.plan.sync_channels()[s.scan_index];
      s.listen_since = sched_.now();
      ++result_.counters[s.id].resyncs;
      log_channel(sched_.now(), node_source(s.id), -1);
      arm_dwell(s);
    });
  }

  void join(Slave& s, int channel) {
    s.phase = Phase::Synced;
    s.channel = channel;
    s.listen_since = sched_.now();
    ++s.dwell_gen;
    log_channel(sched_.now(), node_source(s.id), channel);
  }

  // Ack from slave `s` at time `at`, on `channel`; afterwards the slave moves
  // to `next_channel`.
  void send_ack(Slave& s, Micros at, int channel, int next_channel) {
    if (at + air(FrameType::Ack) > end_us_) {
      return;
    }
    sched_.schedule(at, node_source(s.id), [this, &s, channel, next_channel] {
      const Transmission tx = make_tx(node_source(s.id), channel, sched_.now(), FrameType::Ack);
      medium_.begin(tx);
      sched_.schedule(tx.end_us(), node_source(s.id), [this, &s, tx, next_channel] {
        const Arbitration arb = medium_.finish(tx, "cw", "Ack", s.id);
        join(s, next_channel);
        if (arb.outcome == Outcome::Delivered && master_rx_ == *tx.channel) {
          links_[s.index].got_ack = true;
        }
      });
    });
  }

  // --- master ---------------------------------------------------------------

  bool any_unconfirmed() const {
    return std::any_of(links_.begin(), links_.end(), [](const Link& l) { return l.status == LinkStatus::Unconfirmed; });
  }

  void start_cycle(Micros t) {
    if (any_unconfirmed()) {
      beacon(0, t);
    } else {
      poll(0, t);
    }
  }

  void beacon(std::size_t j, Micros t) {
    const int channel = cfg_.plan.sync_channels()[j];
    const Micros window =
        cfg_.timing.turnaround_us +
        static_cast<Micros>(slaves_.size()) * (air(FrameType::Ack) + cfg_.timing.guard_us);
    if (t + air(FrameType::Beacon) + window > end_us_) {
      return;
    }
    master_rx_ = channel;
    for (auto& l : links_) {
      l.got_ack = false;
    }
    const Transmission tx = make_tx(kMasterSource, channel, t, FrameType::Beacon);
    medium_.begin(tx);
    const int announced = hop_.current;
    sched_.schedule(tx.end_us(), kMasterSource, [this, tx, j, window, announced] {
      const Arbitration arb = medium_.finish(tx, "cw", "Beacon");
      if (arb.outcome == Outcome::Delivered) {
        for (auto& s : slaves_) {
          if (s.phase == Phase::Scanning && hears(s, tx)) {
            s.phase = Phase::Joining;
            ++s.dwell_gen;
            heard(s);
            const Micros slot = static_cast<Micros>(s.index) * (air(FrameType::Ack) + cfg_.timing.guard_us);
            send_ack(s, tx.end_us() + cfg_.timing.turnaround_us + slot, *tx.channel, announced);
          }
        }
      }
      sched_.schedule(tx.end_us() + window, kMasterSource, [this, j] {
        for (auto& l : links_) {
          if (l.got_ack) {
            activate(l);
          }
        }
        if (j + 1 < cfg_.plan.sync_channels().size()) {
          beacon(j + 1, sched_.now());
        } else {
          poll(0, sched_.now());
        }
      });
    });
  }

  static void activate(Link& l) {
    l.status = LinkStatus::Active;
    l.window.clear();
    l.misses = 0;
  }

  void poll(std::size_t i, Micros t) {
    if (i == slaves_.size()) {
      end_cycle(t);
      return;
    }
    if (t + cfg_.timing.slot_us() > end_us_) {
      return;
    }
    master_rx_ = hop_.current;
    Slave& s = slaves_[i];
    links_[i].got_response = false;
    const Transmission tx = make_tx(kMasterSource, hop_.current, t, FrameType::Poll);
    medium_.begin(tx);
    sched_.schedule(tx.end_us(), kMasterSource, [this, tx, &s] {
      const Arbitration arb = medium_.finish(tx, "cw", "Poll", s.id);
      if (arb.outcome == Outcome::Delivered && s.phase == Phase::Synced && hears(s, tx)) {
        heard(s);
        respond(s, sched_.now() + cfg_.timing.turnaround_us);
      }
    });
    sched_.schedule(t + cfg_.timing.slot_us(), kMasterSource, [this, i] {
      Link& l = links_[i];
      const bool received = l.got_response;
      if (received) {
        if (l.status != LinkStatus::Active) {
          activate(l);
        }
        l.misses = 0;
        push_outcome(l, false);
      } else if (l.status == LinkStatus::Active) {
        push_outcome(l, true);
        if (++l.misses >= cfg_.policy.drop_after_misses) {
          l.status = LinkStatus::Unconfirmed;
          l.window.clear();
        }
      }
      poll(i + 1, sched_.now() + (received ? cfg_.timing.host_cost_us : 0));
    });
  }

  void push_outcome(Link& l, bool lost) {
    l.window.push_back(lost);
    while (l.window.size() > static_cast<std::size_t>(cfg_.policy.loss_window)) {
      l.window.pop_front();
    }
  }

  void respond(Slave& s, Micros at) {
    sched_.schedule(at, node_source(s.id), [this, &s] {
      const Micros t = sched_.now();
      const Transmission tx = make_tx(node_source(s.id), s.channel, t, FrameType::Response);
      const std::int64_t seq = s.seq++;
      const UnitQuaternion q = sample(s.id, t);
      auto& c = result_.counters[s.id];
      ++c.sent;
      medium_.begin(tx);
      sched_.schedule(tx.end_us(), node_source(s.id), [this, &s, &c, tx, seq, q] {
        const Arbitration arb = medium_.finish(tx, "cw", "Response", s.id);
        switch (arb.outcome) {
          case Outcome::Delivered:
            ++c.delivered;
            break;
          case Outcome::Collided:
            ++c.collided;
            break;
          default:
            ++c.floor_lost;
        }
        if (arb.outcome == Outcome::Delivered && master_rx_ == *tx.channel) {
          links_[s.index].got_response = true;
          record(tx.end_us(), s.id, seq, q);
        }
      });
    });
  }

  void end_cycle(Micros t) {
    const auto threshold = static_cast<long>(cfg_.policy.loss_threshold);
    const bool hop = std::any_of(links_.begin(), links_.end(), [&](const Link& l) {
      return l.status == LinkStatus::Active && std::count(l.window.begin(), l.window.end(), true) >= threshold;
    });
    if (!hop) {
      next_cycle(t);
      return;
    }
    const int from = hop_.current;
    const int to = select_next_channel(hop_, cfg_.policy);
    hop_.current = from;  // the master stays put until the handshake is done
    announce(0, 0, t, from, to);
  }

  Micros hop_exchange_us() const {
    return air(FrameType::Hop) + cfg_.timing.turnaround_us + air(FrameType::Ack) + cfg_.timing.guard_us;
  }

  void announce(std::size_t i, int attempt, Micros t, int from, int to) {
    while (i < slaves_.size() && links_[i].status != LinkStatus::Active) {
      ++i;
    }
    if (i == slaves_.size()) {
      complete_hop(t, from, to);
      return;
    }
    if (t + hop_exchange_us() > end_us_) {
      return;
    }
    master_rx_ = from;
    Slave& s = slaves_[i];
    links_[i].got_ack = false;
    Transmission tx = make_tx(kMasterSource, from, t, FrameType::Hop);
    medium_.begin(tx);
    sched_.schedule(tx.end_us(), kMasterSource, [this, tx, &s, to] {
      const Arbitration arb = medium_.finish(tx, "cw", "Hop", s.id);
      if (arb.outcome == Outcome::Delivered && s.phase == Phase::Synced && hears(s, tx)) {
        heard(s);
        send_ack(s, sched_.now() + cfg_.timing.turnaround_us, *tx.channel, to);
      }
    });
    sched_.schedule(t + hop_exchange_us(), kMasterSource, [this, i, attempt, from, to] {
      const Micros now = sched_.now();
      if (links_[i].got_ack) {
        announce(i + 1, 0, now, from, to);
      } else if (attempt + 1 < cfg_.policy.announce_repeats) {
        announce(i, attempt + 1, now, from, to);
      } else {
        links_[i].status = LinkStatus::Unconfirmed;
        links_[i].window.clear();
        announce(i + 1, 0, now, from, to);
      }
    });
  }

  void complete_hop(Micros t, int from, int to) {
    hop_.current = to;
    master_rx_ = to;
    result_.hops.push_back({t, from, to});
    log_channel(t, kMasterSource, to);
    for (auto& l : links_) {
      l.window.clear();
      l.misses = 0;
    }
    next_cycle(t);
  }

  void next_cycle(Micros t) {
    ideal_start_ += cfg_.timing.cap_period_us();
    if (ideal_start_ < static_cast<double>(t)) {
      ideal_start_ = static_cast<double>(t);
    }
    const Micros next = std::max<Micros>(std::llround(ideal_start_), t);
    if (next < end_us_) {
      sched_.schedule(next, kMasterSource, [this, next] { start_cycle(next); });
    }
  }

  HopState hop_;
  std::vector<Slave> slaves_;
  std::vector<Link> links_;
  int master_rx_ = -1;
  double ideal_start_ = 0.0;
};

// ---------------------------------------------------------------------------
// BLE-style baseline: one independent connection per sensor.

class BleSession : SessionBase {
 public:
  BleSession(const SessionConfig& cfg, const SampleSource& source)
      : SessionBase(cfg, source, ProtocolKind::BleBaseline) {
    std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
    std::uniform_int_distribution<int> increment(5, 16);
    std::uniform_int_distribution<int> start(0, kBleChannels - 1);
    std::uniform_real_distribution<double> anchor(0.0, cfg.ble.interval_ms * 1000.0);
    std::uniform_real_distribution<double> sample_phase(0.0, 1e6 / cfg.ble.sample_rate_hz);
    for (SensorId id : cfg.roster) {
      Connection c;
      c.id = id;
      c.hop_increment = increment(rng);
      c.last_channel = start(rng);
      c.anchor_us = anchor(rng);
      c.sample_phase_us = sample_phase(rng);
      conns_.push_back(std::move(c));
    }
  }

  SessionResult run() {
    for (auto& c : conns_) {
      schedule_sample(c, 0);
      schedule_event(c, 0);
    }
    return finish();
  }

 private:
  struct Pending {
    std::int64_t seq;
    UnitQuaternion q;
  };

  struct Connection {
    SensorId id = 0;
    int hop_increment = 5;
    int last_channel = 0;
    double anchor_us = 0.0;
    double sample_phase_us = 0.0;
    std::deque<Pending> queue;
  };

  Micros dur(int bytes) const { return static_cast<Micros>(std::llround(bytes * cfg_.ble.us_per_byte)); }

  void schedule_sample(Connection& c, std::int64_t j) {
    const Micros at = std::llround(c.sample_phase_us + static_cast<double>(j) * 1e6 / cfg_.ble.sample_rate_hz);
    if (at >= end_us_) {
      return;
    }
    sched_.schedule(at, node_source(c.id), [this, &c, j] {
      c.queue.push_back({j, sample(c.id, sched_.now())});
      while (c.queue.size() > cfg_.ble.queue_limit) {
        c.queue.pop_front();
      }
      schedule_sample(c, j + 1);
    });
  }

  void schedule_event(Connection& c, std::int64_t k) {
    const Micros at = std::llround(c.anchor_us + static_cast<double>(k) * cfg_.ble.interval_ms * 1000.0);
    const Micros longest = dur(cfg_.ble.poll_bytes) + cfg_.ble.ifs_us + dur(cfg_.ble.data_bytes);
    if (at + longest > end_us_) {
      return;
    }
    sched_.schedule(at, kMasterSource, [this, &c, k] {
      c.last_channel = csa1_next(c.last_channel, c.hop_increment);
      const int ch = c.last_channel;
      const Transmission poll{kMasterSource, ch, ble_data_band(ch), sched_.now(), dur(cfg_.ble.poll_bytes)};
      medium_.begin(poll);
      sched_.schedule(poll.end_us(), kMasterSource, [this, &c, poll] {
        const Arbitration arb = medium_.finish(poll, "ble", "Poll", c.id);
        if (arb.outcome == Outcome::Delivered) {
          transmit(c, *poll.channel, sched_.now() + cfg_.ble.ifs_us);
        }
      });
      schedule_event(c, k + 1);
    });
  }

  void transmit(Connection& c, int ch, Micros at) {
    sched_.schedule(at, node_source(c.id), [this, &c, ch] {
      const bool has_data = !c.queue.empty();
      const Transmission tx{node_source(c.id), ch, ble_data_band(ch), sched_.now(),
                            dur(has_data ? cfg_.ble.data_bytes : cfg_.ble.empty_bytes)};
      medium_.begin(tx);
      if (!has_data) {
        sched_.schedule(tx.end_us(), node_source(c.id), [this, &c, tx] { medium_.finish(tx, "ble", "Empty", c.id); });
        return;
      }
      const Pending pending = c.queue.front();
      auto& counters = result_.counters[c.id];
      ++counters.sent;
      sched_.schedule(tx.end_us(), node_source(c.id), [this, &c, &counters, tx, pending] {
        const Arbitration arb = medium_.finish(tx, "ble", "Data", c.id);
        if (arb.outcome == Outcome::Collided) {
          ++counters.collided;
          return;
        }
        if (arb.outcome == Outcome::FloorLost) {
          ++counters.floor_lost;
          return;
        }
        ++counters.delivered;
        if (!c.queue.empty() && c.queue.front().seq == pending.seq) {
          c.queue.pop_front();
        }
        record(tx.end_us(), c.id, pending.seq, pending.q);
      });
    });
  }

  std::vector<Connection> conns_;
};

}  // namespace

std::string_view frame_name(FrameType t) {
  switch (t) {
    case FrameType::Beacon:
      return "Beacon";
    case FrameType::Poll:
      return "Poll";
    case FrameType::Response:
      return "Response";
    case FrameType::Hop:
      return "Hop";
    case FrameType::Ack:
      return "Ack";
  }
  return "?";
}

int TimingProfile::airtime_us(FrameType t) const {
  const double us_per_byte = 8.0 / kAirRateMbps;
  int bytes = 0;
  switch (t) {
    case FrameType::Beacon:
      bytes = beacon_bytes;
      break;
    case FrameType::Poll:
      bytes = poll_bytes;
      break;
    case FrameType::Response:
      bytes = response_bytes;
      break;
    case FrameType::Hop:
      bytes = hop_bytes;
      break;
    case FrameType::Ack:
      bytes = ack_bytes;
      break;
  }
  return static_cast<int>(bytes * us_per_byte);
}

int TimingProfile::slot_us() const {
  return airtime_us(FrameType::Poll) + turnaround_us + airtime_us(FrameType::Response) + guard_us;
}

void TimingProfile::validate() const {
  for (int b : {poll_bytes, response_bytes, beacon_bytes, hop_bytes, ack_bytes}) {
    if (b <= 0) {
      throw ConfigError("frame sizes must be positive");
    }
  }
  if (turnaround_us < 0 || guard_us < 0 || host_cost_us < 0) {
    throw ConfigError("turnaround_us, guard_us and host_cost_us must be non-negative");
  }
  if (!(poll_cap_hz > 0.0) || !std::isfinite(poll_cap_hz)) {
    throw ConfigError("poll_cap_hz must be positive");
  }
  if (beacon_interval_us <= 0 || resync_timeout_us <= 0) {
    throw ConfigError("beacon_interval_us and resync_timeout_us must be positive");
  }
}

void HopPolicy::validate() const {
  if (loss_threshold < 1) {
    throw ConfigError("loss_threshold must be at least 1");
  }
  if (loss_window < loss_threshold) {
    throw ConfigError("loss_window must be at least loss_threshold");
  }
  if (blacklist_length < 0 || blacklist_length > 70) {
    throw ConfigError("blacklist_length must lie in 0..70");
  }
  if (announce_repeats < 1) {
    throw ConfigError("announce_repeats must be at least 1");
  }
  if (drop_after_misses < 1) {
    throw ConfigError("drop_after_misses must be at least 1");
  }
}

void BleSettings::validate() const {
  if (!(interval_ms >= 7.5) || !std::isfinite(interval_ms)) {
    throw ConfigError("ble interval_ms must be at least 7.5");
  }
  if (poll_bytes <= 0 || data_bytes <= 0 || empty_bytes <= 0 || !(us_per_byte > 0.0) || ifs_us < 0) {
    throw ConfigError("ble frame sizes and timings must be positive");
  }
  if ((poll_bytes + data_bytes) * us_per_byte + ifs_us >= interval_ms * 1000.0) {
    throw ConfigError("ble connection event does not fit in the interval");
  }
  if (!(sample_rate_hz > 0.0) || queue_limit == 0) {
    throw ConfigError("ble sample_rate_hz and queue_limit must be positive");
  }
}

HopState HopState::fresh(const ChannelPlan& plan, std::uint64_t seed) {
  HopState s;
  s.permutation = plan.data_channels();
  std::mt19937_64 rng(seed);
  // Fisher-Yates with an explicit draw so the walk is identical across standard libraries.
  for (std::size_t i = s.permutation.size() - 1; i > 0; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % (i + 1));
    std::swap(s.permutation[i], s.permutation[j]);
  }
  s.current = s.permutation.front();
  return s;
}

int select_next_channel(HopState& state, const HopPolicy& policy) {
  const std::size_t n = state.permutation.size();
  for (std::size_t step = 1; step <= n; ++step) {
    const std::size_t pos = (state.position + step) % n;
    const int candidate = state.permutation[pos];
    if (candidate == state.current ||
        std::find(state.blacklist.begin(), state.blacklist.end(), candidate) != state.blacklist.end()) {
      continue;
    }
    state.blacklist.push_back(state.current);
    while (state.blacklist.size() > static_cast<std::size_t>(policy.blacklist_length)) {
      state.blacklist.pop_front();
    }
    state.position = pos;
    state.current = candidate;
    return candidate;
  }
  throw AnalysisError("no data channel left to hop to");
}

int csa1_next(int last, int hop_increment) {
  if (last < 0 || last >= kBleChannels || hop_increment < 5 || hop_increment > 16) {
    throw InvalidInput("csa1_next: channel must lie in 0..36 and hop increment in 5..16");
  }
  return (last + hop_increment) % kBleChannels;
}

std::string_view protocol_name(ProtocolKind k) { return k == ProtocolKind::Cw ? "cw" : "ble-baseline"; }

ProtocolKind protocol_from_name(const std::string& name) {
  if (name == "cw") {
    return ProtocolKind::Cw;
  }
  if (name == "ble-baseline") {
    return ProtocolKind::BleBaseline;
  }
  throw ConfigError("unknown protocol '" + name + "' (expected cw or ble-baseline)");
}

SessionResult run_session(const SessionConfig& config, const SampleSource& source) {
  for (const auto& i : config.interferers) {
    i.validate();
  }
  if (!(config.p_floor >= 0.0 && config.p_floor <= 1.0)) {
    throw ConfigError("p_floor must lie in [0, 1]");
  }
  if (config.protocol == ProtocolKind::Cw) {
    check_roster(config.roster, kMaxRoster, "cw");
    config.timing.validate();
    config.policy.validate();
    return CwSession(config, source).run();
  }
  check_roster(config.roster, kMaxBleRoster, "ble-baseline");
  config.ble.validate();
  return BleSession(config, source).run();
}

Micros max_channel_disagreement_us(const SessionResult& result) {
  int master = -1;
  std::map<int, int> slave;
  std::map<int, Micros> since;
  Micros worst = 0;
  auto settle = [&](Micros t) {
    for (const auto& [node, ch] : slave) {
      const bool disagree = ch >= 0 && ch != master;
      auto it = since.find(node);
      if (disagree && it == since.end()) {
        since[node] = t;
      } else if (!disagree && it != since.end()) {
        worst = std::max(worst, t - it->second);
        since.erase(it);
      }
    }
  };
  for (const auto& c : result.channel_log) {
    if (c.node <= 0) {
      master = c.channel;
    } else {
      slave[c.node] = c.channel;
    }
    settle(c.time_us);
  }
  for (const auto& [node, t] : since) {
    worst = std::max(worst, result.warmup_us + result.duration_us - t);
  }
  return worst;
}

std::vector<std::optional<Micros>> rejoin_delays_us(const SessionResult& result) {
  std::vector<std::optional<Micros>> out;
  for (std::size_t h = 0; h < result.hops.size(); ++h) {
    const HopRecord& hop = result.hops[h];
    const Micros limit =
        h + 1 < result.hops.size() ? result.hops[h + 1].time_us : result.warmup_us + result.duration_us;
    std::map<int, int> state;
    Micros done_at = -1;
    for (const auto& c : result.channel_log) {
      if (c.time_us > limit) {
        break;
      }
      if (c.node > 0) {
        state[c.node] = c.channel;
      }
      if (c.time_us < hop.time_us) {
        continue;
      }
      const bool all = std::all_of(result.roster.begin(), result.roster.end(), [&](SensorId s) {
        auto it = state.find(node_source(s));
        return it != state.end() && it->second == hop.to;
      });
      if (all) {
        done_at = c.time_us;
        break;
      }
    }
    out.push_back(done_at >= 0 ? std::optional<Micros>(done_at - hop.time_us) : std::nullopt);
  }
  return out;
}

SessionMetrics session_metrics(const SessionResult& result, double window_s) {
  SessionMetrics m;
  m.protocol = std::string(protocol_name(result.protocol));
  m.duration_s = static_cast<double>(result.duration_us) * 1e-6;
  m.window_s = window_s;
  m.hops = result.hops.size();
  if (result.duration_us <= 0) {
    return m;
  }
  const auto rates = rate_series(result.frames, window_s, 0.1, TimeSpan{0, result.duration_us}, result.roster);
  for (std::size_t i = 0; i < result.roster.size(); ++i) {
    const SensorId id = result.roster[i];
    SensorMetrics s;
    s.sensor = id;
    if (auto it = result.counters.find(id); it != result.counters.end()) {
      s.sent = it->second.sent;
      s.delivered = it->second.delivered;
      s.collided = it->second.collided;
      s.floor_lost = it->second.floor_lost;
      s.resyncs = it->second.resyncs;
    }
    const auto frames = std::count_if(result.frames.begin(), result.frames.end(),
                                      [&](const RecordingFrame& f) { return f.sensor_id == id; });
    s.mean_rate_hz = static_cast<double>(frames) / m.duration_s;
    s.pdr = s.sent ? static_cast<double>(s.delivered) / static_cast<double>(s.sent) : 0.0;
    const auto& pts = rates[i].points;
    s.min_window_rate_hz = pts.empty() ? 0.0
                                       : std::min_element(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
                                           return a.second < b.second;
                                         })->second;
    m.resyncs += s.resyncs;
    m.sensors.push_back(s);
  }
  std::map<SensorId, Micros> newest;
  Micros skew = 0;
  for (const auto& f : result.frames) {
    newest[f.sensor_id] = f.timestamp_us;
    if (newest.size() == result.roster.size()) {
      const auto [lo, hi] = std::minmax_element(newest.begin(), newest.end(),
                                                [](const auto& a, const auto& b) { return a.second < b.second; });
      skew = std::max(skew, hi->second - lo->second);
    }
  }
  m.max_skew_ms = static_cast<double>(skew) * 1e-3;
  return m;
}

}  // namespace bodynet
