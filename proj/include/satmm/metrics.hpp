#pragma once

// Aggregates run logs into per-mechanism summaries and cross-mechanism comparisons.

#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "satmm/simulator.hpp"

namespace satmm {

struct MetricsError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RttStats {
  double mean = 0.0;
  double p50 = 0.0;
  double p95 = 0.0;
  double max = 0.0;
  std::size_t samples = 0;
  // Mean over users with a sample in each slot; empty where none had one.
  std::vector<std::optional<double>> timeseries;
};

struct OverheadRates {
  double location_mgmt = 0.0;  // message-hops per second
  double route_mgmt = 0.0;

  double total() const { return location_mgmt + route_mgmt; }
};

struct MetricsSummary {
  double cur_up = 0.0;
  double cur_down = 0.0;
  RttStats rtt_ms;
  double ip_changes_per_hour = 0.0;  // per user
  double handovers_per_hour = 0.0;   // per user
  OverheadRates overhead;
  int users = 0;
  int slots = 0;
};

struct SummaryOptions {
  // Slots before a user's first connected slot (and that slot itself) are
  // dropped from its CUR denominator.
  bool exclude_warmup = false;
};

// Nearest-rank percentile of an ascending sample, q in [0, 1].
double percentile(std::span<const double> sorted, double q);

MetricsSummary summarize(std::span<const SlotRecord> log, double slot_seconds, SummaryOptions options = {});
MetricsSummary summarize(const RunLog& log, SummaryOptions options = {});

struct ComparisonRow {
  std::string metric;
  MechanismKind baseline = MechanismKind::GroundAnchor;
  double reference = 0.0;  // ClusterAnchor value
  double other = 0.0;
  double delta = 0.0;                // reference - other
  std::optional<double> ratio;       // reference / other, absent when other is 0
  bool ordering_expected = false;    // a qualitative direction is checked for this row
  bool ordering_violated = false;
};

struct Comparison {
  std::vector<ComparisonRow> rows;

  bool any_violation() const;
  std::vector<std::string> violations() const;
};

struct LabelledSummary {
  MechanismKind mechanism = MechanismKind::ClusterAnchor;
  std::string scenario_fingerprint;
  MetricsSummary summary;
};

// Rows compare ClusterAnchor against every other mechanism present. Expected
// directions: higher CUR both ways, fewer IP changes and handovers, lower max
// RTT than FixedSatAnchor, no route-management overhead. Throws when the
// fingerprints differ or ClusterAnchor is missing.
Comparison compare(std::span<const LabelledSummary> summaries);

}  // namespace satmm
