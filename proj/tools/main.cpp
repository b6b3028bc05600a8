#include <CLI11.hpp>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>

#include "iesdr/config.hpp"
#include "iesdr/experiment.hpp"
#include "iesdr/profiles.hpp"

namespace {

iesdr::RunConfig load_config(const std::string& path) {
  if (path.empty()) return iesdr::RunConfig{};
  return iesdr::RunConfig::from_file(path);
}

int cmd_gen_profiles(const std::string& config_path, std::uint64_t seed,
                     int days, const std::string& out_dir) {
  iesdr::RunConfig cfg = load_config(config_path);
  if (seed != 0) cfg.gen_seed = seed;
  if (days != 0) cfg.gen_days = days;
  if (!out_dir.empty()) cfg.out_dir = out_dir;

  iesdr::GeneratorOptions opt;
  opt.days = cfg.gen_days;
  const iesdr::ProfileSet set = iesdr::generate_profiles(
      cfg.gen_seed, opt, cfg.system.building, cfg.system.comfort.t_comfort_c);
  const std::string out = iesdr::resolve_out_dir(cfg.out_dir);
  std::filesystem::create_directories(out);
  const std::string path = out + "/profiles.csv";
  iesdr::save_profiles(set, path);
  std::cout << "wrote " << path << " (" << set.days.size() << " days)\n";
  return 0;
}

int cmd_train(const std::string& config_path, std::uint64_t seed, int mode,
              int scenario, const std::string& out_dir) {
  iesdr::RunConfig cfg = load_config(config_path);
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  const std::uint64_t run_seed = seed != 0 ? seed : cfg.seeds.front();

  const iesdr::TrainOutcome outcome =
      iesdr::run_training(cfg, mode, scenario, run_seed);
  std::cout << "checkpoint: " << outcome.checkpoint_path << '\n'
            << "curves: " << outcome.curves_path << '\n';
  return 0;
}

int cmd_evaluate(const std::string& config_path, std::uint64_t seed, int mode,
                 int scenario, const std::string& attack,
                 const std::string& out_dir) {
  iesdr::RunConfig cfg = load_config(config_path);
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  const std::uint64_t run_seed = seed != 0 ? seed : cfg.seeds.front();

  // --attack overrides the mode's default adversary
  int eval_mode = mode;
  if (attack == "on") eval_mode = iesdr::mode_uses_sasac(mode) ? 4 : 2;
  if (attack == "off") eval_mode = iesdr::mode_uses_sasac(mode) ? 3 : 1;
  // checkpoints are shared between the attacked/clean variant of an algorithm
  iesdr::RunConfig cell_cfg = cfg;
  const iesdr::ProfileSet profiles = iesdr::acquire_profiles(cfg);
  std::vector<iesdr::StepInfo> trace;
  iesdr::RunRow row = iesdr::evaluate_cell(cell_cfg, profiles, eval_mode,
                                           scenario, run_seed, &trace);
  row.mode = mode;

  const std::string out = iesdr::resolve_out_dir(cfg.out_dir);
  std::filesystem::create_directories(out + "/plotdata");
  const iesdr::Report report = iesdr::aggregate_rows({row});
  iesdr::emit_report_csv(report, out + "/report.csv");
  iesdr::emit_report_json(report, out + "/report.json");
  iesdr::emit_dispatch_trace(
      trace, out + "/plotdata/dispatch_m" + std::to_string(eval_mode) + "_s" +
                 std::to_string(scenario) + "_seed" + std::to_string(run_seed) +
                 ".csv");
  std::cout << "profit " << row.profit << " reward " << row.reward_mean << '\n';
  return 0;
}

int cmd_matrix(const std::string& config_path, const std::string& out_dir) {
  iesdr::RunConfig cfg = load_config(config_path);
  if (!out_dir.empty()) cfg.out_dir = out_dir;

  const iesdr::Report report = iesdr::run_matrix(cfg);
  const std::string out = iesdr::resolve_out_dir(cfg.out_dir);
  std::filesystem::create_directories(out + "/plotdata");
  iesdr::emit_report_csv(report, out + "/report.csv");
  iesdr::emit_report_json(report, out + "/report.json");

  const iesdr::ProfileSet profiles = iesdr::acquire_profiles(cfg);
  for (const iesdr::RunRow& row : report.rows) {
    std::vector<iesdr::StepInfo> trace;
    iesdr::evaluate_cell(cfg, profiles, row.mode, row.scenario, row.seed, &trace);
    iesdr::emit_dispatch_trace(
        trace, out + "/plotdata/dispatch_m" + std::to_string(row.mode) + "_s" +
                   std::to_string(row.scenario) + "_seed" +
                   std::to_string(row.seed) + ".csv");
  }
  std::cout << "rows " << report.rows.size() << " total_profit "
            << report.total_profit << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Integrated energy system scheduling with demand response, "
               "heat-load attack simulation, and robust SAC training"};
  app.require_subcommand(1);

  std::string config_path, out_dir, attack;
  std::uint64_t seed = 0;
  int mode = 1, scenario = 1, days = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "run-config JSON file");
    sub->add_option("--seed", seed, "seed override");
    sub->add_option("--out", out_dir, "output directory override");
  };

  CLI::App* gen = app.add_subcommand("gen-profiles", "write a synthetic profile CSV");
  add_common(gen);
  gen->add_option("--days", days, "number of days");

  CLI::App* train = app.add_subcommand("train", "train one policy");
  add_common(train);
  train->add_option("--mode", mode, "1/2: SAC, 3/4: SA-SAC")->check(CLI::Range(1, 4));
  train->add_option("--scenario", scenario, "1..4")->check(CLI::Range(1, 4));

  CLI::App* eval = app.add_subcommand("evaluate", "evaluate one checkpoint");
  add_common(eval);
  eval->add_option("--mode", mode, "1..4")->check(CLI::Range(1, 4));
  eval->add_option("--scenario", scenario, "1..4")->check(CLI::Range(1, 4));
  eval->add_option("--attack", attack, "on|off override")
      ->check(CLI::IsMember({"on", "off"}));

  CLI::App* matrix = app.add_subcommand("matrix", "run the mode x scenario grid");
  add_common(matrix);

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_gen_profiles(config_path, seed, days, out_dir);
    if (train->parsed()) return cmd_train(config_path, seed, mode, scenario, out_dir);
    if (eval->parsed())
      return cmd_evaluate(config_path, seed, mode, scenario, attack, out_dir);
    if (matrix->parsed()) return cmd_matrix(config_path, out_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
