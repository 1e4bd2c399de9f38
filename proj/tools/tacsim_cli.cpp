#include "tacsim/camera.hpp"
#include "tacsim/errors.hpp"
#include "tacsim/fixtures.hpp"
#include "tacsim/io.hpp"
#include "tacsim/metrics.hpp"
#include "tacsim/parallel.hpp"
#include "tacsim/runner.hpp"
#include "tacsim/scenario.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

namespace fs = std::filesystem;
using namespace tacsim;

namespace {

enum Exit { kOk = 0, kInput = 2, kConsistency = 3, kRuntime = 4 };

struct RunArgs {
  fs::path scenario;
  fs::path out;
  int frames = 0;
  bool deterministic = false;
  int threads = 0;
  bool batch = false;
};

void print_summary(const std::string& name, const RunSummary& s, const fs::path& out) {
  std::printf("%s: %d frames, %zu particles, %zu grid nodes -> %s\n", name.c_str(), s.frames, s.particles,
              s.grid_nodes, out.string().c_str());
  std::printf("  steady-state: %.3f physics frames/s, %.3f pipeline frames/s (setup %.2f s, physics %.2f s, "
              "imaging %.2f s, io %.2f s)\n",
              s.physics_fps, s.pipeline_fps, s.timing.setup_s, s.timing.physics_s, s.timing.imaging_s,
              s.timing.io_s);
}

int cmd_run(const RunArgs& args) {
  set_thread_count(args.threads);
  const Scenario base = load_scenario(args.scenario);
  RunOptions opts;
  opts.deterministic = args.deterministic;
  if (args.frames > 0) opts.frames = args.frames;
  const fs::path out = args.out.empty() ? base.output : args.out;
  if (!args.batch) {
    opts.out_dir = out;
    print_summary(base.name, run_scenario(base, opts), out);
    return kOk;
  }
  Scenario root = base;
  root.output = out;
  const auto runs = expand_batch(root, default_batch_recipe(base));
  for (const auto& sc : runs) {
    opts.out_dir = sc.output;
    print_summary(sc.name, run_scenario(sc, opts), sc.output);
  }
  return kOk;
}

int cmd_metrics(const fs::path& pred, const fs::path& truth, const fs::path& out) {
  const auto runs = pair_run_trees(pred, truth);
  const auto rows = report(runs);
  if (!out.empty()) write_file_atomic(out, format_report_csv(rows));
  std::cout << format_report_summary(rows);
  return kOk;
}

int cmd_project(const fs::path& calib, const fs::path& points, const fs::path& out) {
  const CameraModel cam = load_calibration(calib);
  const CsvTable t = parse_csv(read_text_file(points));
  const auto cx = t.column("x"), cy = t.column("y"), cz = t.column("z");
  std::vector<Vec3> pts;
  for (const auto& r : t.rows) {
    if (r.size() != t.header.size()) throw SchemaError(points.string(), "row with wrong field count");
    pts.emplace_back(parse_double(r[cx], "x"), parse_double(r[cy], "y"), parse_double(r[cz], "z"));
  }
  std::string csv = "u,v,visible\n";
  for (const auto& p : project_points(cam, pts)) {
    csv += format_double(p.pixel.x()) + "," + format_double(p.pixel.y()) + "," + (p.visible ? "true" : "false") + "\n";
  }
  if (out.empty()) {
    std::cout << csv;
  } else {
    write_file_atomic(out, csv);
  }
  return kOk;
}

int cmd_info(const fs::path& scenario_path) {
  const Scenario sc = load_scenario(scenario_path);
  const SimulationSetup setup = build_simulation(sc);
  const auto& g = setup.scene.grid;
  std::size_t contact = 0;
  for (bool c : setup.in_contact) contact += c;
  std::printf("scenario      %s (%s)\n", sc.name.c_str(), std::string(to_string(sc.trajectory.kind)).c_str());
  std::printf("config hash   %s\n", sc.config_hash.c_str());
  std::printf("particles     %zu elastomer, %zu indenter\n", setup.elastomer.size(),
              setup.scene.particles.size() - setup.elastomer.size());
  std::printf("grid          %d x %d x %d nodes, dx %.6g m\n", g.dims()[0], g.dims()[1], g.dims()[2], g.dx());
  std::printf("markers       %zu groups, %zu in contact\n", setup.groups.size(), contact);
  std::printf("time step     %.3g s (stability bound %.3g s), %d substeps/frame, %d frames\n", sc.sim.dt,
              sc.sim.stable_time_step(g.dx()), sc.sim.substeps, sc.frames);
  std::printf("threads       %d\n", thread_count());
  return kOk;
}

int report_error(const std::exception& e, int code) {
  std::fprintf(stderr, "tacsim: error: %s\n", e.what());
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Marker-based vision tactile sensor simulator"};
  app.require_subcommand(1, 1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Simulate a scenario and write frames plus a manifest");
  run_cmd->add_option("--scenario", run.scenario, "Scenario JSON file")->required();
  run_cmd->add_option("--out", run.out, "Output directory (default: the scenario's output field)");
  run_cmd->add_option("--frames", run.frames, "Override the frame count")->check(CLI::PositiveNumber);
  run_cmd->add_flag("--deterministic", run.deterministic, "Fixed-order reductions (bit-identical output)");
  run_cmd->add_option("--threads", run.threads, "Worker threads (default: TACSIM_THREADS or all cores)")
      ->check(CLI::NonNegativeNumber);
  run_cmd->add_flag("--batch", run.batch, "Expand the default depth x indenter x motion recipe");

  fs::path pred, truth, metrics_out;
  auto* metrics_cmd = app.add_subcommand("metrics", "Compare predicted and ground-truth marker tables");
  metrics_cmd->add_option("--pred", pred, "Predicted run directory")->required();
  metrics_cmd->add_option("--truth", truth, "Ground-truth run directory")->required();
  metrics_cmd->add_option("--out", metrics_out, "Metrics CSV to write");

  fs::path calib, points, project_out;
  auto* project_cmd = app.add_subcommand("project", "Project world points through a calibration");
  project_cmd->add_option("--calib", calib, "Calibration JSON")->required();
  project_cmd->add_option("--points", points, "CSV with columns x,y,z (metres)")->required();
  project_cmd->add_option("--out", project_out, "Output CSV (default: stdout)");

  fs::path fixtures_out = "scenarios";
  auto* fixtures_cmd = app.add_subcommand("gen-fixtures", "Write bundled indenters, calibrations and scenarios");
  fixtures_cmd->add_option("--out", fixtures_out, "Destination directory")->capture_default_str();

  fs::path info_scenario;
  auto* info_cmd = app.add_subcommand("info", "Describe the simulation a scenario sets up");
  info_cmd->add_option("--scenario", info_scenario, "Scenario JSON file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInput;
  }

  try {
    if (*run_cmd) return cmd_run(run);
    if (*metrics_cmd) return cmd_metrics(pred, truth, metrics_out);
    if (*project_cmd) return cmd_project(calib, points, project_out);
    if (*fixtures_cmd) {
      write_fixtures(fixtures_out);
      std::printf("fixtures written to %s\n", fixtures_out.string().c_str());
      return kOk;
    }
    if (*info_cmd) return cmd_info(info_scenario);
  } catch (const InputError& e) {
    return report_error(e, kInput);
  } catch (const ConsistencyError& e) {
    return report_error(e, kConsistency);
  } catch (const RuntimeFailure& e) {
    return report_error(e, kRuntime);
  } catch (const std::exception& e) {
    return report_error(e, kRuntime);
  }
  return kInput;
}
