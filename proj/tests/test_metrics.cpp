#include <map>

#include "doctest.h"
#include "satmm/metrics.hpp"
#include "support.hpp"

using namespace satmm;
using satmm::testing::Gen;

namespace {

std::vector<SlotRecord> synthetic_log(Gen& gen, int users, int slots) {
  std::vector<SlotRecord> log;
  for (int t = 0; t < slots; ++t) {
    SlotRecord rec;
    rec.t = t;
    for (int u = 0; u < users; ++u) {
      UserSlot us;
      us.user = node(u * 7 + 1);
      us.connected_up = gen.coin(0.9);
      us.connected_down = gen.coin(0.85);
      if (us.connected_up && us.connected_down) us.rtt_ms = gen.real(20.0, 400.0);
      us.address_changed = gen.coin(0.02);
      us.handover = gen.coin(0.05);
      rec.users.push_back(us);
    }
    rec.control_message_hops = gen.uniform(0, 50);
    rec.route_update_hops = gen.coin(0.1) ? gen.uniform(0, 5000) : 0;
    log.push_back(std::move(rec));
  }
  return log;
}

// One pass, fixed-size running state, no sorting of anything but the RTT sample.
MetricsSummary streaming_summary(const std::vector<SlotRecord>& log, double slot_seconds) {
  std::map<int, std::array<long, 4>> per_user;  // up, down, ip, handovers
  long location = 0;
  long route = 0;
  double rtt_sum = 0.0;
  std::vector<double> rtts;
  for (const auto& rec : log) {
    location += rec.control_message_hops;
    route += rec.route_update_hops;
    for (const auto& u : rec.users) {
      auto& c = per_user[index_of(u.user)];
      c[0] += u.connected_up;
      c[1] += u.connected_down;
      c[2] += u.address_changed;
      c[3] += u.handover;
      if (u.rtt_ms) {
        rtt_sum += *u.rtt_ms;
        rtts.push_back(*u.rtt_ms);
      }
    }
  }
  MetricsSummary s;
  const double T = static_cast<double>(log.size());
  const double hours = T * slot_seconds / 3600.0;
  for (const auto& [id, c] : per_user) {
    s.cur_up += c[0] / T / static_cast<double>(per_user.size());
    s.cur_down += c[1] / T / static_cast<double>(per_user.size());
    s.ip_changes_per_hour += c[2] / hours / static_cast<double>(per_user.size());
    s.handovers_per_hour += c[3] / hours / static_cast<double>(per_user.size());
  }
  std::sort(rtts.begin(), rtts.end());
  if (!rtts.empty()) {
    s.rtt_ms.mean = rtt_sum / static_cast<double>(rtts.size());
    s.rtt_ms.p50 = rtts[static_cast<std::size_t>(std::ceil(0.50 * static_cast<double>(rtts.size()))) - 1];
    s.rtt_ms.p95 = rtts[static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(rtts.size()))) - 1];
    s.rtt_ms.max = rtts.back();
  }
  s.overhead.location_mgmt = static_cast<double>(location) / (T * slot_seconds);
  s.overhead.route_mgmt = static_cast<double>(route) / (T * slot_seconds);
  return s;
}

void check_same(const MetricsSummary& a, const MetricsSummary& b) {
  CHECK(a.cur_up == doctest::Approx(b.cur_up));
  CHECK(a.cur_down == doctest::Approx(b.cur_down));
  CHECK(a.ip_changes_per_hour == doctest::Approx(b.ip_changes_per_hour));
  CHECK(a.handovers_per_hour == doctest::Approx(b.handovers_per_hour));
  CHECK(a.rtt_ms.mean == doctest::Approx(b.rtt_ms.mean));
  CHECK(a.rtt_ms.p50 == b.rtt_ms.p50);
  CHECK(a.rtt_ms.p95 == b.rtt_ms.p95);
  CHECK(a.rtt_ms.max == b.rtt_ms.max);
  CHECK(a.overhead.location_mgmt == doctest::Approx(b.overhead.location_mgmt));
  CHECK(a.overhead.route_mgmt == doctest::Approx(b.overhead.route_mgmt));
}

}  // namespace

TEST_CASE("percentiles use the nearest rank") {
  const std::vector<double> v{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  CHECK(percentile(v, 0.5) == 5);
  CHECK(percentile(v, 0.95) == 10);
  CHECK(percentile(v, 0.0) == 1);
  CHECK_THROWS_AS(percentile({}, 0.5), MetricsError);
}

TEST_CASE("all-connected log") {
  std::vector<SlotRecord> log(10);
  for (int t = 0; t < 10; ++t) {
    log[static_cast<std::size_t>(t)].t = t;
    UserSlot u;
    u.connected_up = u.connected_down = true;
    u.rtt_ms = 10.0 + t;
    log[static_cast<std::size_t>(t)].users.push_back(u);
  }
  const auto s = summarize(log, 1.0);
  CHECK(s.cur_up == 1.0);
  CHECK(s.cur_down == 1.0);
  CHECK(s.rtt_ms.mean == doctest::Approx(14.5));
  CHECK(s.rtt_ms.max == 19.0);
  REQUIRE(s.rtt_ms.timeseries.size() == 10);
  CHECK(*s.rtt_ms.timeseries[3] == 13.0);
}

TEST_CASE("two address changes over one hour") {
  std::vector<SlotRecord> log(3600);
  for (int t = 0; t < 3600; ++t) {
    UserSlot u;
    u.address_changed = t == 100 || t == 2000;
    log[static_cast<std::size_t>(t)].users.push_back(u);
  }
  const auto s = summarize(log, 1.0);
  CHECK(s.ip_changes_per_hour == doctest::Approx(2.0));
  CHECK(s.cur_up == 0.0);
  CHECK(s.rtt_ms.samples == 0);
  // Only the change at t=100 falls inside the first 1800 slots, which span one hour at 2 s.
  CHECK(summarize(std::span(log).first(1800), 2.0).ip_changes_per_hour == doctest::Approx(1.0));
}

TEST_CASE("summary agrees with an independent streaming implementation") {
  Gen gen(41);
  for (int round = 0; round < 30; ++round) {
    const auto log = synthetic_log(gen, gen.uniform(1, 6), gen.uniform(2, 400));
    const double slot_s = gen.real(0.5, 5.0);
    const auto s = summarize(log, slot_s);
    check_same(s, streaming_summary(log, slot_s));
    CHECK(s.cur_up >= 0.0);
    CHECK(s.cur_up <= 1.0);
    CHECK(s.cur_down <= 1.0);
    CHECK(s.rtt_ms.p50 <= s.rtt_ms.p95);
    CHECK(s.rtt_ms.p95 <= s.rtt_ms.max);
    CHECK(s.overhead.total() == doctest::Approx(s.overhead.location_mgmt + s.overhead.route_mgmt));
  }
}

TEST_CASE("summary ignores user order and slot order") {
  Gen gen(42);
  auto log = synthetic_log(gen, 5, 200);
  const auto reference = summarize(log, 1.0);
  for (auto& rec : log) std::shuffle(rec.users.begin(), rec.users.end(), gen.engine());
  std::shuffle(log.begin(), log.end(), gen.engine());
  const auto shuffled = summarize(log, 1.0);
  check_same(reference, shuffled);
}

TEST_CASE("warm-up exclusion drops the slots before first connection") {
  std::vector<SlotRecord> log(10);
  for (int t = 0; t < 10; ++t) {
    UserSlot u;
    u.connected_up = u.connected_down = t >= 2;
    log[static_cast<std::size_t>(t)].users.push_back(u);
  }
  CHECK(summarize(log, 1.0).cur_down == doctest::Approx(0.8));
  CHECK(summarize(log, 1.0, {true}).cur_down == doctest::Approx(1.0));
}

TEST_CASE("empty log is rejected") {
  CHECK_THROWS_AS(summarize(std::span<const SlotRecord>{}, 1.0), MetricsError);
}

TEST_CASE("comparison") {
  Gen gen(43);
  const auto log = synthetic_log(gen, 3, 100);
  const auto s = summarize(log, 1.0);

  SUBCASE("identical summaries give zero deltas") {
    const std::vector<LabelledSummary> same{{MechanismKind::ClusterAnchor, "f", s}, {MechanismKind::GroundAnchor, "f", s}};
    const auto c = compare(same);
    CHECK(c.rows.size() == 10);
    for (const auto& r : c.rows) CHECK(r.delta == 0.0);
  }

  SUBCASE("orderings are flagged") {
    MetricsSummary better = s;
    better.cur_down = 0.99;
    better.overhead.route_mgmt = 0.0;
    MetricsSummary worse = s;
    worse.cur_down = 0.5;
    worse.overhead.route_mgmt = 10.0;
    const std::vector<LabelledSummary> good{{MechanismKind::ClusterAnchor, "f", better},
                                            {MechanismKind::GroundAnchor, "f", worse}};
    CHECK_FALSE(compare(good).any_violation());
    const std::vector<LabelledSummary> bad{{MechanismKind::ClusterAnchor, "f", worse},
                                           {MechanismKind::GroundAnchor, "f", better}};
    const auto c = compare(bad);
    CHECK(c.any_violation());
    const auto v = c.violations();
    CHECK(std::find(v.begin(), v.end(), "cur_down vs ground-anchor") != v.end());
    CHECK(std::find(v.begin(), v.end(), "route_mgmt_hops_per_s vs ground-anchor") != v.end());
  }

  SUBCASE("mismatched scenarios are rejected") {
    const std::vector<LabelledSummary> mixed{{MechanismKind::ClusterAnchor, "a", s}, {MechanismKind::GroundAnchor, "b", s}};
    CHECK_THROWS_AS(compare(mixed), MetricsError);
    const std::vector<LabelledSummary> no_ref{{MechanismKind::GroundAnchor, "a", s}};
    CHECK_THROWS_AS(compare(no_ref), MetricsError);
  }
}
