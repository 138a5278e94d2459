// Command-line driver: scenario file in, schedule and trajectories out.
#include <cstdio>
#include <iostream>

#include "CLI11.hpp"
#include "vtol/pipeline.hpp"

int main(int argc, char** argv) {
  vtol::RunConfig cfg;
  cfg.out_dir = "out";

  CLI::App app{"Collision-free one-at-a-time scheduling of VTOL flights"};
  app.add_option("--scenario", cfg.scenario_path, "scenario JSON file")->required();
  app.add_option("--alpha", cfg.alpha, "weight of flight duration in the objective")
      ->capture_default_str();
  app.add_option("--eps0", cfg.eps0, "initial linearization tolerance [s]")->capture_default_str();
  app.add_option("--eps", cfg.eps, "final linearization tolerance [s]")->capture_default_str();
  app.add_option("--split-points", cfg.split_points, "new grid points per refined interval")
      ->capture_default_str();
  app.add_option("--dx", cfg.dx, "spatial grid step [m]")->capture_default_str();
  app.add_option("--controls", cfg.n_controls, "number of discrete headings")
      ->capture_default_str();
  app.add_option("--length-scale", cfg.length_scale, "value transform length scale [m]")
      ->capture_default_str();
  app.add_option("--threads", cfg.threads, "value iteration threads (0 = all cores)")
      ->capture_default_str();
  app.add_option("--node-limit", cfg.node_limit, "branch-and-bound node limit per round")
      ->capture_default_str();
  app.add_option("--out", cfg.out_dir, "output directory")->capture_default_str();
  app.add_flag("--export-field", cfg.export_field, "write field.csv");
  app.add_flag("--export-durations", cfg.export_durations, "write durations_<id>.csv");
  app.add_flag("--export-node-log", cfg.export_node_log, "write node_log.csv");
  app.add_flag("--export-round-log", cfg.export_round_log, "write round_log.csv");
  app.add_flag("--export-model", cfg.export_model, "write the last round's model.lp");
  app.add_option("--plot-data", cfg.plot_data, "write plot_<id>.csv for these vehicle ids");
  bool no_symmetry = false;
  app.add_flag("--no-symmetry", no_symmetry, "do not pre-order vehicles with identical durations");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : vtol::kExitUsage;
  }
  cfg.break_symmetry = !no_symmetry;

  vtol::RunOutcome r = vtol::run_pipeline(cfg);
  if (r.exit_code != vtol::kExitOk) {
    std::cerr << "error [" << r.stage << "]: " << r.message << "\n";
    return r.exit_code;
  }
  std::printf("objective %.6f after %d rounds (%s)\n", r.refinement.objective,
              r.refinement.rounds, vtol::to_string(r.refinement.status));
  std::printf("%-8s %-8s %10s %10s %10s\n", "order", "vehicle", "start", "end", "duration");
  for (const auto& row : r.schedule) {
    std::printf("%-8d %-8d %10.4f %10.4f %10.4f\n", row.starting_number, row.original_number,
                row.start, row.end, row.duration);
  }
  std::printf("field %.2f s, schedule %.2f s, trajectories %.2f s; output in %s\n",
              r.times.field, r.times.milp, r.times.trajectories, cfg.out_dir.c_str());
  return 0;
}
