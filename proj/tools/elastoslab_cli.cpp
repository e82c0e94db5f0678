#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "elastoslab/checks.hpp"
#include "elastoslab/config.hpp"
#include "elastoslab/diagnostics.hpp"
#include "elastoslab/runner.hpp"
#include "elastoslab/snapshot.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace elastoslab;

namespace {

enum ExitCode { kOk = 0, kChecksFailed = 1, kUsageError = 2, kHalted = 3 };

struct CommonFlags {
  std::string config, out, grid;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* app, CommonFlags& f) {
  app->add_option("--config", f.config, "key = value configuration file")->check(CLI::ExistingFile);
  app->add_option("--out", f.out, "output directory (overrides config)");
  app->add_option("--seed", f.seed, "random seed (overrides config)");
  app->add_option("--grid", f.grid, "N1xN2xNz, Nz = vertical node count (overrides config)");
}

RunConfig resolve(const CommonFlags& f) {
  RunConfig c = f.config.empty() ? parse_config(std::string("schema = ") + kConfigSchema) : load_config(f.config);
  if (!f.grid.empty()) c.grid = parse_grid(f.grid, "--grid");
  if (!f.out.empty()) c.out = f.out;
  if (f.seed) c.seed = *f.seed;
  return c;
}

std::string grid_text(const GridSpec& g) {
  return std::to_string(g.n1) + "x" + std::to_string(g.n2) + "x" + std::to_string(g.levels);
}

std::string path_in(const RunConfig& c, const std::string& name) {
  fs::create_directories(c.out);
  return (fs::path(c.out) / name).string();
}

void write_json(const std::string& path, const ordered_json& j) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::Io, "cannot write '" + path + "'");
  os << j.dump(2) << '\n';
}

ordered_json region_json(const Region& r) {
  auto a = ordered_json::array();
  for (const auto& x : r.rects) a.push_back({x.x1_lo, x.x1_hi, x.x2_lo, x.x2_hi});
  return a;
}

ordered_json config_json(const RunConfig& c) {
  const auto& o = c.options;
  return {{"scenario", c.scenario}, {"grid", grid_text(c.grid)}, {"s", o.s},
          {"eps", o.eps},           {"c0", o.c0},                {"amplitude", o.amplitude},
          {"c", o.c},               {"gamma1", region_json(o.gamma1)}, {"gamma2", region_json(o.gamma2)},
          {"T", c.T},               {"dt", c.dt},                {"seed", c.seed},
          {"monitor", c.monitor},   {"reproject", c.reproject},  {"theta", c.theta}};
}

std::string step_tag(int k) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%06d", k);
  return buf;
}

int cmd_run(const RunConfig& c) {
  const auto grid = c.grid.make();
  auto st = make_scenario(c.scenario, grid, c.options);
  st.params.reproject = c.reproject;
  if (c.theta) st = with_theta(st);

  const double dt0 = c.dt > 0.0 ? c.dt : stable_dt_bound(st);
  const int planned = step_count(c.T, dt0);
  const double dt = c.T / planned;

  std::ofstream csv(path_in(c, "diagnostics.csv"));
  if (!csv) throw Error(ErrorKind::Io, "cannot write diagnostics.csv");
  write_csv_header(csv);
  int last_row = -1, last_snap = -1;
  auto snapshot = [&](const FlowState& s, int k) {
    write_snapshot(path_in(c, "state_" + step_tag(k) + ".eslb"), state_snapshot(s));
    write_snapshot(path_in(c, "interface_" + step_tag(k) + ".eslb"), interface_snapshot(s));
    last_snap = k;
  };
  auto observe = [&](const FlowState& s, int k) {
    if (k % c.output_every == 0 || k == planned) {
      write_csv_row(csv, collect_diagnostics(s, k, dt));
      last_row = k;
    }
    if (k == 0 || (c.snapshot_every > 0 && k % c.snapshot_every == 0) || k == planned) snapshot(s, k);
  };
  const auto out = run_to(st, {c.T, dt, c.monitor}, observe);
  if (last_row != out.steps) write_csv_row(csv, collect_diagnostics(out.state, out.steps, dt));
  if (last_snap != out.steps) snapshot(out.state, out.steps);

  ordered_json j = {{"schema", "elastoslab-run/1"},
                    {"config", config_json(c)},
                    {"dt", dt},
                    {"steps_planned", planned},
                    {"steps_taken", out.steps},
                    {"t_final", out.state.t},
                    {"halt", to_string(out.reason)},
                    {"message", out.message}};
  write_json(path_in(c, "run.json"), j);
  std::printf("halt: %s after %d of %d steps, t = %.6g\n", to_string(out.reason), out.steps, planned, out.state.t);
  if (!out.message.empty()) std::printf("  %s\n", out.message.c_str());
  return out.reason == HaltReason::Completed ? kOk : kHalted;
}

ordered_json results_json(const CheckLog& log) {
  auto a = ordered_json::array();
  for (const auto& r : log.results())
    a.push_back({{"criterion", r.criterion},
                 {"name", r.name},
                 {"value", r.value},
                 {"bound", to_string(r.bound)},
                 {"tolerance", r.tolerance},
                 {"pass", r.pass}});
  return a;
}

void print_results(const CheckLog& log) {
  for (const auto& r : log.results()) {
    if (r.bound == Bound::Info)
      std::printf("%2d  %-44s %14.6e  %-8s %10s  info\n", r.criterion, r.name.c_str(), r.value, "", "");
    else
      std::printf("%2d  %-44s %14.6e  %-8s %10.3g  %s\n", r.criterion, r.name.c_str(), r.value, to_string(r.bound),
                  r.tolerance, r.pass ? "PASS" : "FAIL");
  }
}

void require_square(const GridSpec& g) {
  if (g.n1 != g.n2) throw Error(ErrorKind::ConfigInvalid, "grid: checks need N1 == N2");
}

int cmd_checks(const RunConfig& c, int truncate_after, bool strict) {
  require_square(c.grid);
  CheckOptions o;
  o.n = c.grid.n1;
  o.nz = c.grid.nz();
  o.seed = c.seed;
  o.truncate_after = truncate_after;
  const auto log = run_checks(o);

  ordered_json criteria = ordered_json::object();
  for (int k = 1; k <= 11; ++k) criteria[std::to_string(k)] = log.passes(k);
  ordered_json j = {{"schema", "elastoslab-checks/1"},
                    {"grid", grid_text(c.grid)},
                    {"seed", c.seed},
                    {"truncate_after", truncate_after},
                    {"criteria", criteria},
                    {"all_pass", log.all_pass()},
                    {"results", results_json(log)}};
  write_json(path_in(c, "checks.json"), j);
  print_results(log);
  std::printf("checks: %s\n", log.all_pass() ? "all pass" : "failures present");
  return strict && !log.all_pass() ? kChecksFailed : kOk;
}

int cmd_convergence(const RunConfig& c, bool strict) {
  require_square(c.grid);
  std::mt19937_64 rng(c.seed);
  CheckLog log;
  checks::flat_symbols(log, c.grid.n1, c.grid.nz(), rng);
  checks::rk4_self_convergence(log, 0, std::min(c.grid.n1, 16), std::min(c.grid.nz(), 16));
  checks::evo_refinement(log, 0, c.grid.n1);

  std::ofstream csv(path_in(c, "convergence.csv"));
  csv << "name,value,bound,tolerance,pass\n";
  for (const auto& r : log.results())
    csv << r.name << ',' << format_double(r.value) << ',' << to_string(r.bound) << ',' << format_double(r.tolerance)
        << ',' << int(r.pass) << '\n';
  print_results(log);
  return strict && !log.all_pass() ? kChecksFailed : kOk;
}

int cmd_dispersion(const RunConfig& c, bool from_config, bool strict) {
  const auto grid = c.grid.make();
  std::vector<std::pair<std::string, ScenarioOptions>> cases;
  for (const char* name : {"elastic-mode", "eps-mode", "combined"})
    if (from_config && c.scenario == name) cases.emplace_back(name, c.options);
  if (cases.empty())
    for (const char* name : {"elastic-mode", "eps-mode", "combined"}) cases.emplace_back(name, default_options(name));

  std::ofstream csv(path_in(c, "dispersion.csv"));
  csv << "scenario,omega_measured,omega_predicted,rel_error,pass\n";
  bool ok = true;
  for (const auto& [name, o] : cases) {
    const auto d = checks::measure_dispersion(name, grid, o);
    const bool pass = d.rel_error() <= 0.05;
    ok = ok && pass;
    csv << name << ',' << format_double(d.measured_omega) << ',' << format_double(d.predicted_omega) << ','
        << format_double(d.rel_error()) << ',' << int(pass) << '\n';
    std::printf("%-14s omega %.6f  predicted %.6f  rel %.3e  %s\n", name.c_str(), d.measured_omega, d.predicted_omega,
                d.rel_error(), pass ? "PASS" : "FAIL");
  }
  return strict && !ok ? kChecksFailed : kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Free-boundary elastodynamics on a periodic slab"};
  app.require_subcommand(1);

  CommonFlags run_f, checks_f, conv_f, disp_f;
  int truncate_after = 0;
  bool strict = false;
  auto* run = app.add_subcommand("run", "integrate a scenario and write diagnostics and snapshots");
  add_common(run, run_f);
  auto* chk = app.add_subcommand("checks", "run the property suite and write checks.json");
  add_common(chk, checks_f);
  chk->add_option("--truncate-after", truncate_after, "cap Krylov iterations (negative control)")->check(CLI::NonNegativeNumber);
  auto* conv = app.add_subcommand("convergence", "spatial and temporal refinement studies");
  add_common(conv, conv_f);
  auto* disp = app.add_subcommand("dispersion", "measured oscillation frequency against the linear relation");
  add_common(disp, disp_f);
  for (auto* sub : {chk, conv, disp}) sub->add_flag("--strict", strict, "exit 1 when any entry fails");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return cmd_run(resolve(run_f));
    if (*chk) return cmd_checks(resolve(checks_f), truncate_after, strict);
    if (*conv) return cmd_convergence(resolve(conv_f), strict);
    if (*disp) return cmd_dispersion(resolve(disp_f), !disp_f.config.empty(), strict);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsageError;
  } catch (const fs::filesystem_error& e) {
    std::fprintf(stderr, "error: Io: %s\n", e.what());
    return kUsageError;
  }
  return kUsageError;
}
