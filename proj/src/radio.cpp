#include "bodynet/radio.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>

namespace bodynet {

namespace {

void check_channel(int k) {
  if (k < 0 || k >= ChannelPlan::kChannelCount) {
    throw InvalidInput("channel " + std::to_string(k) + " outside 0..79");
  }
}

Micros to_micros(double us) { return static_cast<Micros>(std::llround(us)); }

void push_burst(std::vector<Transmission>& out, int source, const Band& band, double a_us, double b_us) {
  const Micros a = to_micros(a_us);
  const Micros b = to_micros(b_us);
  if (b <= a) {
    return;
  }
  if (!out.empty() && out.back().end_us() >= a) {
    // Rounding can make neighbours touch; merge them.
    out.back().duration_us = std::max(out.back().end_us(), b) - out.back().start_us;
    return;
  }
  out.push_back({source, std::nullopt, band, a, b - a});
}

// Alternating busy/idle renewal process with exponential periods, started in
// its stationary state.
void renewal(std::vector<Transmission>& out, int source, const Band& band, double duty, double mean_burst_us,
             double t0, double t1, std::mt19937_64& rng) {
  if (duty <= 0.0 || t1 <= t0) {
    return;
  }
  if (duty >= 1.0) {
    push_burst(out, source, band, t0, t1);
    return;
  }
  std::exponential_distribution<double> busy(1.0 / mean_burst_us);
  std::exponential_distribution<double> idle(duty / (mean_burst_us * (1.0 - duty)));
  std::bernoulli_distribution start_busy(duty);
  bool is_busy = start_busy(rng);
  double t = t0;
  while (t < t1) {
    const double len = is_busy ? busy(rng) : idle(rng);
    const double end = std::min(t + len, t1);
    if (is_busy) {
      push_burst(out, source, band, t, end);
    }
    t = end;
    is_busy = !is_busy;
  }
}

}  // namespace

ChannelPlan::ChannelPlan(const std::vector<int>& sync_channels) : sync_(sync_channels) {
  std::set<int> unique(sync_.begin(), sync_.end());
  if (sync_.size() != 3 || unique.size() != 3) {
    throw ConfigError("exactly three distinct sync channels are required");
  }
  for (int k : sync_) {
    if (k < 0 || k >= kChannelCount) {
      throw ConfigError("sync channel " + std::to_string(k) + " outside 0..79");
    }
  }
  for (int k = 0; k < kChannelCount; ++k) {
    if (!unique.contains(k)) {
      data_.push_back(k);
    }
  }
}

double ChannelPlan::center_mhz(int k) {
  check_channel(k);
  return 2400.0 + k;
}

Band ChannelPlan::band(int k) {
  const double c = center_mhz(k);
  return {c - 1.0, c + 1.0};
}

bool ChannelPlan::is_sync(int k) const { return std::find(sync_.begin(), sync_.end(), k) != sync_.end(); }

bool overlaps(int k, const Band& band) { return overlaps(ChannelPlan::band(k), band); }

Band wifi_band(int wifi_channel) {
  if (wifi_channel < 1 || wifi_channel > 13) {
    throw InvalidInput("Wi-Fi channel " + std::to_string(wifi_channel) + " outside 1..13");
  }
  const double c = 2407.0 + 5.0 * wifi_channel;
  return {c - 11.0, c + 11.0};
}

Band ble_data_band(int index) {
  if (index < 0 || index > 36) {
    throw InvalidInput("BLE data channel " + std::to_string(index) + " outside 0..36");
  }
  const double c = index <= 10 ? 2404.0 + 2.0 * index : 2406.0 + 2.0 * index;
  return {c - 1.0, c + 1.0};
}

Band bt_hop_band(int index) {
  if (index < 0 || index > 39) {
    throw InvalidInput("Bluetooth hop channel " + std::to_string(index) + " outside 0..39");
  }
  const double c = 2402.0 + 2.0 * index;
  return {c - 1.0, c + 1.0};
}

void Interferer::validate() const {
  if (const auto* w = std::get_if<WifiAp>(&kind)) {
    if (w->channel < 1 || w->channel > 13) {
      throw ConfigError("wifi channel must lie in 1..13");
    }
    if (!(w->duty >= 0.0 && w->duty <= 1.0)) {
      throw ConfigError("wifi duty must lie in [0, 1]");
    }
    if (!(w->mean_burst_ms > 0.0)) {
      throw ConfigError("wifi mean_burst_ms must be positive");
    }
    if (w->session_s < 0.0 || !std::isfinite(w->session_s)) {
      throw ConfigError("wifi session_s must be non-negative");
    }
    if (w->session_s > 0.0 &&
        !(w->duty_off >= 0.0 && w->duty_off <= w->duty && w->duty <= w->duty_on && w->duty_on <= 1.0 &&
          w->duty_off < w->duty_on)) {
      throw ConfigError("wifi sessions need 0 <= duty_off <= duty <= duty_on <= 1 with duty_off < duty_on");
    }
  } else if (const auto* b = std::get_if<BtDevice>(&kind)) {
    if (!(b->event_interval_ms > 0.0) || !(b->burst_us > 0.0) || b->burst_us >= b->event_interval_ms * 1000.0) {
      throw ConfigError("bt device needs 0 < burst_us < event_interval_ms");
    }
  } else {
    const auto& j = std::get<Jammer>(kind);
    if (!(j.band.lo_mhz < j.band.hi_mhz) || j.start_us < 0 || j.stop_us <= j.start_us) {
      throw ConfigError("jammer needs a non-empty band and start < stop");
    }
  }
}

std::string Interferer::kind_name() const {
  switch (kind.index()) {
    case 0:
      return "wifi";
    case 1:
      return "bt";
    default:
      return "jammer";
  }
}

std::vector<Interferer> interference_preset(const std::string& name, std::uint64_t seed) {
  if (name == "clean") {
    return {};
  }
  if (name != "crowded") {
    throw ConfigError("unknown interference preset '" + name + "'");
  }
  std::vector<Interferer> out;
  std::uint64_t n = 0;
  for (int ch : {1, 6, 11}) {
    for (int i = 0; i < 4; ++i) {
      // Long-run duty 0.25, delivered as bursty traffic sessions.
      out.push_back({WifiAp{ch, 0.25, 2.0, 2.0, 0.9, 0.05}, seed * 1000003ULL + ++n});
    }
  }
  for (int i = 0; i < 8; ++i) {
    out.push_back({BtDevice{15.0, 296.0}, seed * 1000003ULL + ++n});
  }
  return out;
}

std::vector<Transmission> occupancy(const Interferer& i, Micros t0, Micros t1, int source) {
  if (!(t0 < t1)) {
    throw InvalidInput("occupancy window must satisfy t0 < t1");
  }
  i.validate();
  std::vector<Transmission> out;
  std::mt19937_64 rng(i.seed);
  const double a = static_cast<double>(t0);
  const double b = static_cast<double>(t1);
  if (const auto* w = std::get_if<WifiAp>(&i.kind)) {
    const Band band = wifi_band(w->channel);
    const double burst_us = w->mean_burst_ms * 1000.0;
    if (w->session_s <= 0.0) {
      renewal(out, source, band, w->duty, burst_us, a, b, rng);
      return out;
    }
    const double p_on = (w->duty - w->duty_off) / (w->duty_on - w->duty_off);
    if (p_on <= 0.0 || p_on >= 1.0) {
      renewal(out, source, band, p_on <= 0.0 ? w->duty_off : w->duty_on, burst_us, a, b, rng);
      return out;
    }
    const double on_mean = w->session_s * 1e6;
    std::exponential_distribution<double> on_len(1.0 / on_mean);
    std::exponential_distribution<double> off_len(p_on / (on_mean * (1.0 - p_on)));
    bool on = std::bernoulli_distribution(p_on)(rng);
    for (double t = a; t < b;) {
      const double end = std::min(t + (on ? on_len(rng) : off_len(rng)), b);
      renewal(out, source, band, on ? w->duty_on : w->duty_off, burst_us, t, end, rng);
      t = end;
      on = !on;
    }
  } else if (const auto* bt = std::get_if<BtDevice>(&i.kind)) {
    const double interval = bt->event_interval_ms * 1000.0;
    std::uniform_real_distribution<double> phase(0.0, interval);
    std::uniform_int_distribution<int> hop(0, 39);
    // Events before t0 still draw a hop so a window's bursts do not depend on where it starts.
    for (double t = phase(rng); t < b; t += interval) {
      const int ch = hop(rng);
      const double s = std::max(t, a);
      const double e = std::min(t + bt->burst_us, b);
      if (e > s) {
        push_burst(out, source, bt_hop_band(ch), s, e);
      }
    }
  } else {
    const auto& j = std::get<Jammer>(i.kind);
    const Micros s = std::max(j.start_us, t0);
    const Micros e = std::min(j.stop_us, t1);
    if (e > s) {
      out.push_back({source, std::nullopt, j.band, s, e - s});
    }
  }
  return out;
}

void EventScheduler::schedule(Micros at_us, int source, Action action) {
  if (at_us < now_) {
    throw InvalidInput("event scheduled in the past");
  }
  queue_.push({at_us, source, next_order_++, std::move(action)});
}

bool EventScheduler::step() {
  if (queue_.empty()) {
    return false;
  }
  Event e = queue_.top();
  queue_.pop();
  now_ = e.at;
  ++dispatched_;
  e.action();
  return true;
}

void EventScheduler::run_until(Micros t_end) {
  while (!queue_.empty() && queue_.top().at <= t_end) {
    step();
  }
  now_ = std::max(now_, t_end);
}

std::string_view outcome_name(Outcome o) {
  switch (o) {
    case Outcome::Delivered:
      return "delivered";
    case Outcome::Collided:
      return "collided";
    case Outcome::FloorLost:
      return "floor-lost";
    case Outcome::Background:
      return "background";
  }
  return "unknown";
}

void write_radio_trace(std::ostream& os, const std::vector<TraceRecord>& trace) {
  os << "time_us,source,channel,kind,outcome\n";
  for (const auto& r : trace) {
    os << r.time_us << ',' << r.source << ',' << r.channel << ',' << r.kind << ',' << outcome_name(r.outcome) << '\n';
  }
}

void write_session_trace(std::ostream& os, const std::vector<TraceRecord>& trace) {
  os << "time_us,source,channel,kind,outcome,frame,sensor_id\n";
  for (const auto& r : trace) {
    os << r.time_us << ',' << r.source << ',' << r.channel << ',' << r.kind << ',' << outcome_name(r.outcome) << ','
       << r.frame << ',' << r.sensor_id << '\n';
  }
}

Medium::Medium(const std::vector<Interferer>& interferers, Micros horizon_us, double p_floor, std::uint64_t floor_seed)
    : interferers_(interferers), p_floor_(p_floor), floor_rng_(floor_seed) {
  if (!(p_floor >= 0.0 && p_floor <= 1.0)) {
    throw ConfigError("floor loss probability must lie in [0, 1]");
  }
  const Micros horizon = std::max<Micros>(horizon_us, 1);
  for (std::size_t i = 0; i < interferers_.size(); ++i) {
    bursts_.push_back(occupancy(interferers_[i], 0, horizon, kInterfererSourceBase + static_cast<int>(i)));
  }
}

void Medium::begin(const Transmission& tx) {
  if (tx.duration_us <= 0) {
    throw InvalidInput("transmission duration must be positive");
  }
  active_.push_back(tx);
}

Arbitration Medium::probe(const Transmission& tx) const {
  for (std::size_t i = 0; i < bursts_.size(); ++i) {
    const auto& list = bursts_[i];
    // First burst ending after tx starts; bursts are disjoint and sorted.
    auto it = std::upper_bound(list.begin(), list.end(), tx.start_us,
                               [](Micros t, const Transmission& b) { return t < b.end_us(); });
    for (; it != list.end() && it->start_us < tx.end_us(); ++it) {
      if (overlaps(it->band, tx.band)) {
        return {Outcome::Collided, it->source};
      }
    }
  }
  for (const auto& other : active_) {
    if (other.source == tx.source && other.start_us == tx.start_us) {
      continue;
    }
    if (other.start_us < tx.end_us() && tx.start_us < other.end_us() && overlaps(other.band, tx.band)) {
      return {Outcome::Collided, other.source};
    }
  }
  return {};
}

Arbitration Medium::finish(const Transmission& tx, const std::string& kind, const std::string& frame, int sensor_id) {
  Arbitration result = probe(tx);
  if (result.outcome == Outcome::Delivered && p_floor_ > 0.0 &&
      std::bernoulli_distribution(p_floor_)(floor_rng_)) {
    result.outcome = Outcome::FloorLost;
  }
  trace_.push_back({tx.start_us, tx.source, tx.channel.value_or(-1), kind, result.outcome, frame, sensor_id});
  // Finished transmissions stay registered while a longer one that began
  // before their end may still be on air.
  const Micros horizon = tx.end_us();
  std::erase_if(active_, [&](const Transmission& t) { return t.end_us() < horizon - 10'000; });
  return result;
}

std::vector<TraceRecord> Medium::full_trace() const {
  std::vector<TraceRecord> out = trace_;
  for (std::size_t i = 0; i < bursts_.size(); ++i) {
    const std::string kind = interferers_[i].kind_name();
    for (const auto& b : bursts_[i]) {
      out.push_back({b.start_us, b.source, -1, kind, Outcome::Background, {}, -1});
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const TraceRecord& a, const TraceRecord& b) {
    if (a.time_us != b.time_us) return a.time_us < b.time_us;
    return a.source < b.source;
  });
  return out;
}

}  // namespace bodynet
