#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "bodynet/radio.hpp"

using namespace bodynet;

namespace {

Interferer wifi(int ch, double duty, double burst_ms = 2.0, std::uint64_t seed = 5) {
  WifiAp ap;
  ap.channel = ch;
  ap.duty = duty;
  ap.mean_burst_ms = burst_ms;
  return {ap, seed};
}

Interferer jammer(Band band, Micros start, Micros stop) { return {Jammer{band, start, stop}, 0}; }

Micros busy_time(const std::vector<Transmission>& bursts) {
  Micros total = 0;
  for (const auto& b : bursts) total += b.duration_us;
  return total;
}

Transmission on_channel(int k, Micros start, Micros duration, int source = 1) {
  return {source, k, ChannelPlan::band(k), start, duration};
}

}  // namespace

TEST(Overlaps, Examples) {
  EXPECT_TRUE(overlaps(37, wifi_band(6)));
  EXPECT_FALSE(overlaps(79, wifi_band(1)));
  // [2423, 2425] touches [2401, 2423] only at its endpoint.
  EXPECT_FALSE(overlaps(24, wifi_band(1)));
  EXPECT_TRUE(overlaps(23, wifi_band(1)));
  EXPECT_THROW(overlaps(80, wifi_band(1)), InvalidInput);
}

TEST(Overlaps, MatchesIntervalArithmetic) {
  // Channel k occupies [2399 + k, 2401 + k]; positive-measure intersection by hand.
  for (int k = 0; k < ChannelPlan::kChannelCount; ++k) {
    for (int ch = 1; ch <= 13; ++ch) {
      const double lo = 2407.0 + 5 * ch - 11, hi = 2407.0 + 5 * ch + 11;
      const bool expected = std::min(2401.0 + k, hi) - std::max(2399.0 + k, lo) > 0.0;
      EXPECT_EQ(overlaps(k, wifi_band(ch)), expected) << k << " vs wifi " << ch;
    }
  }
}

TEST(ChannelPlan, SyncAndDataPartitionAllChannels) {
  const ChannelPlan plan;
  EXPECT_EQ(plan.sync_channels().size(), 3u);
  EXPECT_EQ(plan.data_channels().size(), 77u);
  std::set<int> all(plan.data_channels().begin(), plan.data_channels().end());
  for (int s : plan.sync_channels()) {
    EXPECT_TRUE(plan.is_sync(s));
    EXPECT_TRUE(all.insert(s).second);
  }
  EXPECT_EQ(all.size(), 80u);
  EXPECT_EQ(*all.begin(), 0);
  EXPECT_EQ(*all.rbegin(), 79);
  EXPECT_DOUBLE_EQ(ChannelPlan::center_mhz(37), 2437.0);
  EXPECT_THROW(ChannelPlan({2, 2, 79}), ConfigError);
  EXPECT_THROW(ChannelPlan({2, 26, 80}), ConfigError);
}

TEST(Bands, WifiBleBt) {
  EXPECT_DOUBLE_EQ(wifi_band(6).lo_mhz, 2426.0);
  EXPECT_DOUBLE_EQ(wifi_band(6).hi_mhz, 2448.0);
  EXPECT_THROW(wifi_band(14), InvalidInput);
  EXPECT_DOUBLE_EQ(ble_data_band(0).lo_mhz, 2403.0);
  EXPECT_DOUBLE_EQ(ble_data_band(10).hi_mhz, 2425.0);
  EXPECT_DOUBLE_EQ(ble_data_band(11).lo_mhz, 2427.0);
  EXPECT_DOUBLE_EQ(ble_data_band(36).hi_mhz, 2479.0);
  EXPECT_DOUBLE_EQ(bt_hop_band(39).hi_mhz, 2481.0);
}

TEST(Occupancy, DutyExtremes) {
  EXPECT_TRUE(occupancy(wifi(6, 0.0), 0, 1'000'000).empty());
  const auto full = occupancy(wifi(6, 1.0), 100, 1'000'000);
  ASSERT_EQ(full.size(), 1u);
  EXPECT_EQ(full[0].start_us, 100);
  EXPECT_EQ(full[0].end_us(), 1'000'000);
  EXPECT_THROW(occupancy(wifi(6, 0.5), 10, 10), InvalidInput);
  EXPECT_THROW(occupancy(wifi(6, 1.5), 0, 10), ConfigError);
}

TEST(Occupancy, HalfDutyOverTenSeconds) {
  for (std::uint64_t seed : {1u, 2u, 3u, 4u}) {
    const Micros window = 10'000'000;
    const double frac = static_cast<double>(busy_time(occupancy(wifi(6, 0.5, 2.0, seed), 0, window))) / window;
    EXPECT_NEAR(frac, 0.5, 0.05) << seed;
  }
}

TEST(Occupancy, SortedDisjointAndSeeded) {
  WifiAp ap;
  ap.channel = 11;
  ap.session_s = 2.0;
  ap.duty_on = 0.9;
  ap.duty_off = 0.05;
  const Interferer i{ap, 42};
  const auto a = occupancy(i, 0, 20'000'000, 7);
  ASSERT_FALSE(a.empty());
  for (std::size_t k = 1; k < a.size(); ++k) EXPECT_LT(a[k - 1].end_us(), a[k].start_us);
  for (const auto& t : a) {
    EXPECT_GT(t.duration_us, 0);
    EXPECT_EQ(t.source, 7);
  }
  const auto b = occupancy(i, 0, 20'000'000, 7);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t k = 0; k < a.size(); ++k) EXPECT_EQ(a[k].start_us, b[k].start_us);
}

TEST(Occupancy, BluetoothOneBurstPerEvent) {
  const Interferer bt{BtDevice{15.0, 296.0}, 9};
  const auto bursts = occupancy(bt, 0, 3'000'000);
  EXPECT_GE(bursts.size(), 199u);
  EXPECT_LE(bursts.size(), 200u);
  for (std::size_t k = 0; k < bursts.size(); ++k) {
    if (k > 0) EXPECT_NEAR(bursts[k].start_us - bursts[k - 1].start_us, 15'000, 1);
    if (bursts[k].start_us > 0 && bursts[k].end_us() < 3'000'000) EXPECT_EQ(bursts[k].duration_us, 296);
    EXPECT_NEAR(bursts[k].band.hi_mhz - bursts[k].band.lo_mhz, 2.0, 1e-12);
  }
}

TEST(Occupancy, JammerClippedToWindow) {
  const auto b = occupancy(jammer(ChannelPlan::band(30), 5'000, 9'000), 0, 7'000);
  ASSERT_EQ(b.size(), 1u);
  EXPECT_EQ(b[0].start_us, 5'000);
  EXPECT_EQ(b[0].end_us(), 7'000);
}

TEST(InterferencePreset, CleanAndCrowded) {
  EXPECT_TRUE(interference_preset("clean", 1).empty());
  const auto crowded = interference_preset("crowded", 1);
  int aps = 0, bts = 0;
  std::map<int, int> per_channel;
  for (const auto& i : crowded) {
    if (const auto* ap = std::get_if<WifiAp>(&i.kind)) {
      ++aps;
      ++per_channel[ap->channel];
      EXPECT_DOUBLE_EQ(ap->duty, 0.25);
    } else if (const auto* bt = std::get_if<BtDevice>(&i.kind)) {
      ++bts;
      EXPECT_DOUBLE_EQ(bt->event_interval_ms, 15.0);
      EXPECT_DOUBLE_EQ(bt->burst_us, 296.0);
    }
  }
  EXPECT_EQ(aps, 12);
  EXPECT_EQ(bts, 8);
  EXPECT_EQ(per_channel, (std::map<int, int>{{1, 4}, {6, 4}, {11, 4}}));
  EXPECT_THROW(interference_preset("busy", 1), ConfigError);
}

TEST(Scheduler, OrdersByTimeThenSourceThenInsertion) {
  EventScheduler s;
  std::vector<std::string> log;
  s.schedule(20, 1, [&] { log.push_back("t20 s1"); });
  s.schedule(10, 2, [&] { log.push_back("t10 s2 a"); });
  s.schedule(10, 1, [&] { log.push_back("t10 s1"); });
  s.schedule(10, 2, [&] { log.push_back("t10 s2 b"); });
  s.schedule(5, 9, [&] {
    log.push_back("t5 s9");
    s.schedule(10, 0, [&] { log.push_back("t10 s0"); });
  });
  s.run_until(15);
  EXPECT_EQ(log, (std::vector<std::string>{"t5 s9", "t10 s0", "t10 s1", "t10 s2 a", "t10 s2 b"}));
  EXPECT_EQ(s.now(), 15);
  EXPECT_EQ(s.pending(), 1u);
  EXPECT_THROW(s.schedule(14, 0, [] {}), InvalidInput);
  EXPECT_TRUE(s.step());
  EXPECT_EQ(s.now(), 20);
  EXPECT_FALSE(s.step());
  EXPECT_EQ(s.dispatched(), 6u);
}

TEST(Medium, LoneTransmissionDelivered) {
  Medium m({}, 1'000'000);
  const auto tx = on_channel(37, 100, 128);
  m.begin(tx);
  EXPECT_EQ(m.finish(tx, "poll").outcome, Outcome::Delivered);
  ASSERT_EQ(m.trace().size(), 1u);
  EXPECT_EQ(m.trace()[0].channel, 37);
}

TEST(Medium, FullOverlapWithWifiBurstCollides) {
  Medium m({jammer(wifi_band(6), 0, 10'000)}, 1'000'000);
  const auto tx = on_channel(37, 1'000, 128);
  m.begin(tx);
  const auto r = m.finish(tx, "poll");
  EXPECT_EQ(r.outcome, Outcome::Collided);
  EXPECT_EQ(r.cause, Medium::kInterfererSourceBase);
}

TEST(Medium, OneMicrosecondTailOverlapCollides) {
  const auto tx = on_channel(37, 1'000, 128);
  Medium hit({jammer(wifi_band(6), tx.end_us() - 1, tx.end_us() + 500)}, 1'000'000);
  EXPECT_EQ(hit.probe(tx).outcome, Outcome::Collided);
  // Starting exactly at the end is a touch, not an overlap.
  Medium touch({jammer(wifi_band(6), tx.end_us(), tx.end_us() + 500)}, 1'000'000);
  EXPECT_EQ(touch.probe(tx).outcome, Outcome::Delivered);
  // Same time, spectrally disjoint channel.
  Medium far({jammer(wifi_band(6), 0, 10'000)}, 1'000'000);
  EXPECT_EQ(far.probe(on_channel(70, 1'000, 128)).outcome, Outcome::Delivered);
}

TEST(Medium, NodeTransmissionsCollideWithEachOther) {
  Medium m({}, 1'000'000);
  const auto a = on_channel(40, 0, 200, 1);
  const auto b = on_channel(41, 100, 200, 2);
  m.begin(a);
  m.begin(b);
  EXPECT_EQ(m.finish(a, "x").outcome, Outcome::Collided);
  EXPECT_EQ(m.finish(b, "x").outcome, Outcome::Collided);
}

TEST(Medium, NoInterferersDeliversEverything) {
  Medium m({}, 10'000'000);
  for (Micros t = 0; t < 1'000'000; t += 400) {
    const auto tx = on_channel(static_cast<int>(t / 400) % 80, t, 376);
    m.begin(tx);
    ASSERT_EQ(m.finish(tx, "x").outcome, Outcome::Delivered);
  }
}

TEST(Medium, FloorLossRateAndValidation) {
  Medium m({}, 10'000'000, 0.2, 3);
  int lost = 0;
  const int n = 20'000;
  for (int k = 0; k < n; ++k) {
    const auto tx = on_channel(10, k * 400, 300);
    m.begin(tx);
    lost += m.finish(tx, "x").outcome == Outcome::FloorLost;
  }
  EXPECT_NEAR(static_cast<double>(lost) / n, 0.2, 0.015);
  EXPECT_THROW(Medium({}, 10, 1.5), ConfigError);
}

TEST(Medium, FullTraceMergesBurstsInTimeOrder) {
  Medium m({jammer(ChannelPlan::band(5), 50, 60)}, 1'000);
  const auto tx = on_channel(70, 10, 20);
  m.begin(tx);
  m.finish(tx, "poll", "Poll", 3);
  const auto full = m.full_trace();
  ASSERT_EQ(full.size(), 2u);
  EXPECT_EQ(full[0].time_us, 10);
  EXPECT_EQ(full[1].kind, "jammer");
  EXPECT_EQ(full[1].outcome, Outcome::Background);
}

TEST(TraceCsv, Headers) {
  const std::vector<TraceRecord> rows{{12, 1, 37, "cw", Outcome::Collided, "Response", 0}};
  std::ostringstream radio, session;
  write_radio_trace(radio, rows);
  write_session_trace(session, rows);
  EXPECT_EQ(radio.str(), "time_us,source,channel,kind,outcome\n12,1,37,cw,collided\n");
  EXPECT_EQ(session.str(), "time_us,source,channel,kind,outcome,frame,sensor_id\n12,1,37,cw,collided,Response,0\n");
}
