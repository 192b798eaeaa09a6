#include "satmm/artifacts.hpp"

#include <fstream>

#include <fmt/core.h>
#include <fmt/ostream.h>

namespace satmm {

using nlohmann::json;

namespace {

std::string fixed(double v) { return fmt::format("{:.6f}", v); }

std::string opt_fixed(const std::optional<double>& v) { return v ? fixed(*v) : std::string(); }

void write_file(const std::filesystem::path& path, const auto& writer) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  writer(out);
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace

void write_slots_csv(std::ostream& out, const RunLog& log) {
  out << "t,user,connected_up,connected_down,rtt_ms,ingress,anchor,address_changed,handover,msg_hops\n";
  for (const SlotRecord& rec : log.slots) {
    for (const UserSlot& u : rec.users) {
      fmt::print(out, "{},{},{},{},{},{},{},{},{},{}\n", rec.t, index_of(u.user), int(u.connected_up),
                 int(u.connected_down), opt_fixed(u.rtt_ms),
                 u.ingress ? std::to_string(index_of(*u.ingress)) : std::string(),
                 u.anchor ? to_string(*u.anchor) : std::string(), int(u.address_changed), int(u.handover),
                 rec.control_message_hops);
    }
  }
}

void write_summary_csv(std::ostream& out, MechanismKind mechanism, std::uint64_t seed, const MetricsSummary& s) {
  out << "mechanism,seed,users,slots,cur_up,cur_down,rtt_mean_ms,rtt_p50_ms,rtt_p95_ms,rtt_max_ms,rtt_samples,"
         "ip_changes_per_hour,handovers_per_hour,location_mgmt_hops_per_s,route_mgmt_hops_per_s\n";
  fmt::print(out, "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", to_string(mechanism), seed, s.users, s.slots,
             fixed(s.cur_up), fixed(s.cur_down), fixed(s.rtt_ms.mean), fixed(s.rtt_ms.p50), fixed(s.rtt_ms.p95),
             fixed(s.rtt_ms.max), s.rtt_ms.samples, fixed(s.ip_changes_per_hour), fixed(s.handovers_per_hour),
             fixed(s.overhead.location_mgmt), fixed(s.overhead.route_mgmt));
}

void write_timeseries_csv(std::ostream& out, const RunLog& log, const MetricsSummary& s) {
  out << "t,rtt_mean_ms,users_up,users_down,control_message_hops,route_update_hops,gs_handovers\n";
  for (std::size_t k = 0; k < log.slots.size(); ++k) {
    const SlotRecord& rec = log.slots[k];
    int up = 0;
    int down = 0;
    for (const auto& u : rec.users) {
      up += u.connected_up;
      down += u.connected_down;
    }
    fmt::print(out, "{},{},{},{},{},{},{}\n", rec.t, opt_fixed(s.rtt_ms.timeseries[k]), up, down,
               rec.control_message_hops, rec.route_update_hops, rec.gs_handovers);
  }
}

void write_comparison_csv(std::ostream& out, std::uint64_t seed, const Comparison& c, bool header) {
  if (header) out << "seed,metric,baseline,cluster_anchor,baseline_value,delta,ratio,ordering_checked,ordering_violated\n";
  for (const auto& r : c.rows) {
    fmt::print(out, "{},{},{},{},{},{},{},{},{}\n", seed, r.metric, to_string(r.baseline), fixed(r.reference),
               fixed(r.other), fixed(r.delta), opt_fixed(r.ratio), int(r.ordering_expected),
               int(r.ordering_violated));
  }
}

json division_json(const AnchorPlan& plan, const ShellConfig& shell) {
  json offsets = json::array();
  for (const Offset& o : plan.discovery.pattern.offsets) offsets.push_back({o.dx, o.dy});
  json clusters = json::array();
  for (const auto& [anchor, members] : plan.division.clusters()) {
    json m = json::array();
    for (SatelliteId id : members) m.push_back(index_of(id));
    const GridCoord c = to_coord(anchor, shell);
    clusters.push_back({{"anchor", index_of(anchor)}, {"anchor_xy", {c.x, c.y}}, {"members", std::move(m)}});
  }
  return {{"H", plan.params.H},
          {"discovery_window", plan.params.discovery_window},
          {"visible_union_size", plan.visible_union.size()},
          {"pattern",
           {{"size", plan.discovery.pattern.offsets.size()},
            {"discovered_at", index_of(plan.discovery.anchor)},
            {"offsets", std::move(offsets)}}},
          {"cluster_count", plan.division.clusters().size()},
          {"clusters", std::move(clusters)},
          {"delay_audit",
           {{"passed", plan.audit.passed},
            {"violations", plan.audit.violations},
            {"worst_member", index_of(plan.audit.worst_member)},
            {"worst_anchor", index_of(plan.audit.worst_anchor)},
            {"worst_detour", plan.audit.worst_detour},
            {"slack", plan.audit.slack()}}}};
}

bool MatrixResult::any_violation() const {
  for (const auto& [seed, c] : comparisons) {
    if (c.any_violation()) return true;
  }
  return false;
}

MatrixResult run_matrix(const Scenario& scenario, const std::vector<MechanismKind>& mechanisms,
                        const std::vector<std::uint64_t>& seeds, const std::filesystem::path& out_dir) {
  if (mechanisms.empty()) throw SimulationError("no mechanisms to run");
  if (seeds.empty()) throw SimulationError("no seeds to run");
  if (const auto errors = scenario.validate(); !errors.empty()) throw ScenarioFileError(errors);
  std::filesystem::create_directories(out_dir);

  MatrixResult result;
  for (std::uint64_t seed : seeds) {
    Scenario seeded = scenario;
    seeded.rng_seed = seed;
    const auto env = std::make_shared<const Environment>(seeded);
    const std::string fingerprint = scenario_fingerprint(seeded);
    std::vector<LabelledSummary> labelled;

    for (MechanismKind kind : mechanisms) {
      Scenario cell = seeded;
      cell.mechanism.kind = kind;
      const RunLog log = run(cell, env);
      const MetricsSummary summary = summarize(log);
      const auto dir = out_dir / fmt::format("{}-seed{}", to_string(kind), seed);
      std::filesystem::create_directories(dir);

      write_file(dir / "slots.csv", [&](std::ostream& o) { write_slots_csv(o, log); });
      write_file(dir / "summary.csv", [&](std::ostream& o) { write_summary_csv(o, kind, seed, summary); });
      write_file(dir / "timeseries.csv", [&](std::ostream& o) { write_timeseries_csv(o, log, summary); });
      write_file(dir / "scenario.resolved.json", [&](std::ostream& o) { o << to_json(cell, {kind}).dump(2) << '\n'; });
      if (log.plan) {
        write_file(dir / "division.json",
                   [&](std::ostream& o) { o << division_json(*log.plan, cell.shell).dump(2) << '\n'; });
      }
      result.runs.push_back({kind, seed, dir, summary});
      labelled.push_back({kind, fingerprint, summary});
    }
    const bool has_reference = std::any_of(labelled.begin(), labelled.end(), [](const LabelledSummary& l) {
      return l.mechanism == MechanismKind::ClusterAnchor;
    });
    if (has_reference && labelled.size() > 1) result.comparisons.emplace_back(seed, compare(labelled));
  }

  result.comparison_path = out_dir / "comparison.csv";
  write_file(result.comparison_path, [&](std::ostream& o) {
    bool header = true;
    if (result.comparisons.empty()) {
      o << "seed,metric,baseline,cluster_anchor,baseline_value,delta,ratio,ordering_checked,ordering_violated\n";
    }
    for (const auto& [seed, c] : result.comparisons) {
      write_comparison_csv(o, seed, c, header);
      header = false;
    }
  });
  return result;
}

}  // namespace satmm
