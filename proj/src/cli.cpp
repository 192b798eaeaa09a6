#include "satmm/cli.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <fmt/core.h>
#include <fmt/ostream.h>

#include "CLI11.hpp"
#include "satmm/artifacts.hpp"

namespace satmm {

namespace {

using nlohmann::json;

struct OracleInstance {
  ShellConfig shell;
  ClusterDivision division;
  std::vector<VisibilityTimeline> timelines;
};

// {"X": 4, "Y": 4, "anchor_of": [...], "users": [[[ids at slot 0], [ids at slot 1], ...], ...]}
OracleInstance read_oracle_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioFileError({path + ": cannot open instance"});
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ScenarioFileError({path + ": " + e.what()});
  }
  OracleInstance inst;
  std::vector<std::string> errors;
  try {
    inst.shell.num_orbits = doc.at("X").get<int>();
    inst.shell.sats_per_orbit = doc.at("Y").get<int>();
    for (const auto& e : inst.shell.validate()) errors.push_back(e);
    std::vector<SatelliteId> anchors;
    for (int a : doc.at("anchor_of").get<std::vector<int>>()) anchors.push_back(sat(a));
    if (errors.empty() && static_cast<int>(anchors.size()) != inst.shell.size()) {
      errors.emplace_back("anchor_of must list every satellite");
    }
    if (errors.empty()) {
      inst.division = ClusterDivision(std::move(anchors));
      for (const auto& e : inst.division.validate(inst.shell)) errors.push_back("anchor_of: " + e);
    }
    int node_id = 0;
    for (const auto& user : doc.at("users")) {
      VisibilityTimeline tl;
      tl.node = node_id++;
      for (const auto& slot : user) {
        std::vector<SatelliteId> vis;
        for (int s : slot.get<std::vector<int>>()) {
          if (s < 0 || s >= inst.shell.size()) errors.push_back(fmt::format("users[{}]: satellite {} out of range", tl.node, s));
          vis.push_back(sat(s));
        }
        std::sort(vis.begin(), vis.end());
        vis.erase(std::unique(vis.begin(), vis.end()), vis.end());
        tl.slots.push_back(std::move(vis));
      }
      inst.timelines.push_back(std::move(tl));
    }
  } catch (const json::exception& e) {
    errors.push_back(e.what());
  }
  if (!errors.empty()) {
    for (auto& e : errors) e = path + ": " + e;
    throw ScenarioFileError(std::move(errors));
  }
  return inst;
}

int cmd_validate(const std::string& path, std::ostream& out) {
  const LoadedScenario loaded = load_scenario(path);
  const Scenario& s = loaded.scenario;
  std::string mechs;
  for (auto k : loaded.mechanisms) mechs += std::string(mechs.empty() ? "" : ",") + to_string(k);
  const Scenario resolved = resolve_users(s);
  fmt::print(out, "ok: {} satellites ({}x{}), {} ground stations, {} users, {} slots, mechanisms {}\n",
             s.shell.size(), s.shell.num_orbits, s.shell.sats_per_orbit, s.ground_stations.size(),
             resolved.users.size(), s.horizon, mechs);
  return kExitOk;
}

int cmd_run(const std::string& path, const std::vector<std::string>& mechanism_names,
            const std::vector<std::uint64_t>& seeds, const std::string& out_dir, bool assert_orderings,
            std::ostream& out, std::ostream& err) {
  const LoadedScenario loaded = load_scenario(path);
  std::vector<MechanismKind> mechanisms;
  for (const auto& name : mechanism_names) {
    const auto k = parse_mechanism(name);
    if (!k) {
      fmt::print(err, "error: unknown mechanism '{}'\n", name);
      return kExitInvalidInput;
    }
    if (std::find(mechanisms.begin(), mechanisms.end(), *k) == mechanisms.end()) mechanisms.push_back(*k);
  }
  if (mechanisms.empty()) mechanisms = loaded.mechanisms;
  std::vector<std::uint64_t> run_seeds = seeds.empty() ? std::vector<std::uint64_t>{loaded.scenario.rng_seed} : seeds;

  const MatrixResult result = run_matrix(loaded.scenario, mechanisms, run_seeds, out_dir);
  for (const RunResult& r : result.runs) {
    fmt::print(out, "{:<17} seed {:<4} cur_up {:.6f} cur_down {:.6f} rtt_mean {:.6f} ms ip/h {:.6f} ho/h {:.6f}  {}\n",
               to_string(r.mechanism), r.seed, r.summary.cur_up, r.summary.cur_down, r.summary.rtt_ms.mean,
               r.summary.ip_changes_per_hour, r.summary.handovers_per_hour, r.directory.string());
  }
  fmt::print(out, "comparison: {}\n", result.comparison_path.string());
  if (assert_orderings && result.any_violation()) {
    for (const auto& [seed, c] : result.comparisons) {
      for (const auto& v : c.violations()) fmt::print(err, "ordering violated (seed {}): {}\n", seed, v);
    }
    return kExitOrderingViolated;
  }
  return kExitOk;
}

int cmd_ada_plan(const std::string& path, bool as_json, std::ostream& out) {
  const LoadedScenario loaded = load_scenario(path);
  const Scenario& s = loaded.scenario;
  const AnchorPlan plan = plan_anchors(s.shell, s.reference_point, effective_ada(s), s.slot_seconds);
  if (as_json) {
    out << division_json(plan, s.shell).dump(2) << '\n';
  } else {
    std::size_t smallest = plan.division.satellite_count();
    std::size_t largest = 0;
    for (const auto& [a, m] : plan.division.clusters()) {
      smallest = std::min(smallest, m.size());
      largest = std::max(largest, m.size());
    }
    fmt::print(out, "shell        {}x{} ({} satellites)\n", s.shell.num_orbits, s.shell.sats_per_orbit, s.shell.size());
    fmt::print(out, "H            {}\n", plan.params.H);
    fmt::print(out, "window       {} slots, {} satellites visible from the reference point\n",
               plan.params.discovery_window, plan.visible_union.size());
    fmt::print(out, "pattern      {} offsets, discovered at S{}\n", plan.discovery.pattern.offsets.size(),
               index_of(plan.discovery.anchor));
    fmt::print(out, "clusters     {} (sizes {}..{})\n", plan.division.clusters().size(), smallest, largest);
    fmt::print(out, "delay audit  {} (violations {}, worst detour {} at S{} -> S{}, slack {})\n",
               plan.audit.passed ? "passed" : "FAILED", plan.audit.violations, plan.audit.worst_detour,
               index_of(plan.audit.worst_member), index_of(plan.audit.worst_anchor), plan.audit.slack());
  }
  const bool partition_ok = plan.division.validate(s.shell).empty();
  return plan.audit.passed && partition_ok ? kExitOk : kExitAuditFailed;
}

int cmd_oracle_assign(const std::string& path, std::ostream& out) {
  const OracleInstance inst = read_oracle_instance(path);
  bool all_equal = true;
  std::int64_t greedy_total = 0;
  std::int64_t brute_total = 0;
  for (const auto& tl : inst.timelines) {
    const AssignmentTimeline g = assign_greedy(tl, inst.division);
    const AssignmentTimeline b = assign_bruteforce(tl, inst.division);
    const auto gv = objective_value(std::span(&g, 1), inst.division);
    const auto bv = objective_value(std::span(&b, 1), inst.division);
    greedy_total += gv;
    brute_total += bv;
    all_equal = all_equal && gv == bv;
    fmt::print(out, "user {}: greedy {} brute-force {} {}\n", tl.node, gv, bv, gv == bv ? "equal" : "MISMATCH");
  }
  fmt::print(out, "total: greedy {} brute-force {}\n", greedy_total, brute_total);
  return all_equal ? kExitOk : kExitOracleMismatch;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"LEO mobility-management simulator"};
  app.require_subcommand(1);

  std::string scenario_path;
  auto* validate = app.add_subcommand("validate", "Load and check a scenario file");
  validate->add_option("scenario", scenario_path, "Scenario file")->required();

  std::vector<std::string> mechanisms;
  std::vector<std::uint64_t> seeds;
  std::string out_dir = "runs";
  bool assert_orderings = false;
  auto* run_cmd = app.add_subcommand("run", "Run every (mechanism, seed) cell and write artifacts");
  run_cmd->add_option("scenario", scenario_path, "Scenario file")->required();
  run_cmd->add_option("--mechanism", mechanisms, "cluster-anchor, ground-anchor or fixed-sat-anchor (repeatable)");
  run_cmd->add_option("--seed", seeds, "RNG seed (repeatable); defaults to sim.rng_seed");
  run_cmd->add_option("--out", out_dir, "Artifact directory")->capture_default_str();
  run_cmd->add_flag("--assert-orderings", assert_orderings, "Exit 1 when an expected ordering fails");

  bool as_json = false;
  auto* ada = app.add_subcommand("ada", "Anchor deployment tools");
  ada->require_subcommand(1);
  auto* plan = ada->add_subcommand("plan", "Print pattern, division and delay audit");
  plan->add_option("scenario", scenario_path, "Scenario file")->required();
  plan->add_flag("--json", as_json, "Print the full division as JSON");

  std::string instance_path;
  auto* oracle = app.add_subcommand("oracle", "Small-instance oracles");
  oracle->require_subcommand(1);
  auto* assign = oracle->add_subcommand("assign", "Greedy vs brute-force anchor assignment");
  assign->add_option("instance", instance_path, "Instance file")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kExitInvalidInput;
  }

  try {
    if (validate->parsed()) return cmd_validate(scenario_path, out);
    if (run_cmd->parsed()) return cmd_run(scenario_path, mechanisms, seeds, out_dir, assert_orderings, out, err);
    if (plan->parsed()) return cmd_ada_plan(scenario_path, as_json, out);
    if (assign->parsed()) return cmd_oracle_assign(instance_path, out);
  } catch (const ScenarioFileError& e) {
    for (const auto& msg : e.errors()) fmt::print(err, "error: {}\n", msg);
    return kExitInvalidInput;
  } catch (const std::exception& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kExitInvalidInput;
  }
  return kExitInvalidInput;
}

}  // namespace satmm
