#include "satmm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace satmm {

namespace {

struct UserCounters {
  int first_connected = -1;  // first slot with either direction up
  int up = 0;
  int down = 0;
  int up_after_warmup = 0;
  int down_after_warmup = 0;
  int address_changes = 0;
  int handovers = 0;
};

void add_row(Comparison& out, std::string metric, MechanismKind other_kind, double reference, double other,
             std::optional<bool> expect_reference_not_worse) {
  ComparisonRow row;
  row.metric = std::move(metric);
  row.baseline = other_kind;
  row.reference = reference;
  row.other = other;
  row.delta = reference - other;
  if (other != 0.0) row.ratio = reference / other;
  if (expect_reference_not_worse) {
    row.ordering_expected = true;
    row.ordering_violated = !*expect_reference_not_worse;
  }
  out.rows.push_back(std::move(row));
}

}  // namespace

double percentile(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw MetricsError("percentile of an empty sample");
  const auto n = static_cast<double>(sorted.size());
  const auto rank = static_cast<std::size_t>(std::max(1.0, std::ceil(q * n)));
  return sorted[std::min(rank, sorted.size()) - 1];
}

MetricsSummary summarize(std::span<const SlotRecord> log, double slot_seconds, SummaryOptions options) {
  if (log.empty()) throw MetricsError("empty run log");
  if (!(slot_seconds > 0.0)) throw MetricsError("slot_seconds must be > 0");

  std::unordered_map<std::int32_t, UserCounters> users;
  std::vector<double> samples;
  MetricsSummary s;
  s.slots = static_cast<int>(log.size());
  s.rtt_ms.timeseries.resize(log.size());
  std::int64_t location_hops = 0;
  std::int64_t route_hops = 0;

  for (std::size_t k = 0; k < log.size(); ++k) {
    const SlotRecord& rec = log[k];
    double slot_sum = 0.0;
    int slot_n = 0;
    for (const UserSlot& u : rec.users) {
      UserCounters& c = users[index_of(u.user)];
      const bool warm = c.first_connected >= 0;
      c.up += u.connected_up;
      c.down += u.connected_down;
      if (warm) {
        c.up_after_warmup += u.connected_up;
        c.down_after_warmup += u.connected_down;
      }
      if (!warm && (u.connected_up || u.connected_down)) c.first_connected = static_cast<int>(k);
      c.address_changes += u.address_changed;
      c.handovers += u.handover;
      if (u.rtt_ms) {
        samples.push_back(*u.rtt_ms);
        slot_sum += *u.rtt_ms;
        ++slot_n;
      }
    }
    if (slot_n > 0) s.rtt_ms.timeseries[k] = slot_sum / slot_n;
    location_hops += rec.control_message_hops;
    route_hops += rec.route_update_hops;
  }

  const double span_s = static_cast<double>(log.size()) * slot_seconds;
  const double hours = span_s / 3600.0;
  s.users = static_cast<int>(users.size());
  if (!users.empty()) {
    double up = 0.0;
    double down = 0.0;
    double ip = 0.0;
    double ho = 0.0;
    const auto total = static_cast<double>(log.size());
    for (const auto& [id, c] : users) {
      if (options.exclude_warmup) {
        const double rest = c.first_connected < 0 ? 0.0 : total - c.first_connected - 1;
        up += rest > 0 ? c.up_after_warmup / rest : 0.0;
        down += rest > 0 ? c.down_after_warmup / rest : 0.0;
      } else {
        up += c.up / total;
        down += c.down / total;
      }
      ip += c.address_changes / hours;
      ho += c.handovers / hours;
    }
    const auto n = static_cast<double>(users.size());
    s.cur_up = up / n;
    s.cur_down = down / n;
    s.ip_changes_per_hour = ip / n;
    s.handovers_per_hour = ho / n;
  }

  std::sort(samples.begin(), samples.end());
  s.rtt_ms.samples = samples.size();
  if (!samples.empty()) {
    double sum = 0.0;
    for (double v : samples) sum += v;
    s.rtt_ms.mean = sum / static_cast<double>(samples.size());
    s.rtt_ms.p50 = percentile(samples, 0.50);
    s.rtt_ms.p95 = percentile(samples, 0.95);
    s.rtt_ms.max = samples.back();
  }
  s.overhead.location_mgmt = static_cast<double>(location_hops) / span_s;
  s.overhead.route_mgmt = static_cast<double>(route_hops) / span_s;
  return s;
}

MetricsSummary summarize(const RunLog& log, SummaryOptions options) {
  return summarize(log.slots, log.slot_seconds, options);
}

bool Comparison::any_violation() const {
  return std::any_of(rows.begin(), rows.end(), [](const ComparisonRow& r) { return r.ordering_violated; });
}

std::vector<std::string> Comparison::violations() const {
  std::vector<std::string> out;
  for (const auto& r : rows) {
    if (r.ordering_violated) out.push_back(r.metric + " vs " + to_string(r.baseline));
  }
  return out;
}

Comparison compare(std::span<const LabelledSummary> summaries) {
  const LabelledSummary* ref = nullptr;
  for (const auto& s : summaries) {
    if (s.scenario_fingerprint != summaries.front().scenario_fingerprint) {
      throw MetricsError("summaries come from different scenarios");
    }
    if (s.mechanism == MechanismKind::ClusterAnchor) {
      if (ref) throw MetricsError("duplicate cluster-anchor summary");
      ref = &s;
    }
  }
  if (!ref) throw MetricsError("no cluster-anchor summary to compare against");

  Comparison out;
  const MetricsSummary& a = ref->summary;
  for (const auto& s : summaries) {
    if (&s == ref) continue;
    const MetricsSummary& b = s.summary;
    const MechanismKind k = s.mechanism;
    add_row(out, "cur_up", k, a.cur_up, b.cur_up, a.cur_up >= b.cur_up);
    add_row(out, "cur_down", k, a.cur_down, b.cur_down, a.cur_down >= b.cur_down);
    add_row(out, "rtt_mean_ms", k, a.rtt_ms.mean, b.rtt_ms.mean, std::nullopt);
    add_row(out, "rtt_p50_ms", k, a.rtt_ms.p50, b.rtt_ms.p50, std::nullopt);
    add_row(out, "rtt_p95_ms", k, a.rtt_ms.p95, b.rtt_ms.p95, std::nullopt);
    add_row(out, "rtt_max_ms", k, a.rtt_ms.max, b.rtt_ms.max,
            k == MechanismKind::FixedSatAnchor ? std::optional<bool>(a.rtt_ms.max <= b.rtt_ms.max) : std::nullopt);
    add_row(out, "ip_changes_per_hour", k, a.ip_changes_per_hour, b.ip_changes_per_hour,
            k == MechanismKind::GroundAnchor ? std::optional<bool>(a.ip_changes_per_hour <= b.ip_changes_per_hour)
                                             : std::nullopt);
    add_row(out, "handovers_per_hour", k, a.handovers_per_hour, b.handovers_per_hour,
            k == MechanismKind::GroundAnchor ? std::optional<bool>(a.handovers_per_hour <= b.handovers_per_hour)
                                             : std::nullopt);
    add_row(out, "location_mgmt_hops_per_s", k, a.overhead.location_mgmt, b.overhead.location_mgmt, std::nullopt);
    add_row(out, "route_mgmt_hops_per_s", k, a.overhead.route_mgmt, b.overhead.route_mgmt,
            a.overhead.route_mgmt == 0.0);
  }
  return out;
}

}  // namespace satmm
