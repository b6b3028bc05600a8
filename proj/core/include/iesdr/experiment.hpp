#pragma once

#include <string>
#include <vector>

#include "iesdr/config.hpp"
#include "iesdr/trainer.hpp"

namespace iesdr {

struct RunRow {
  int mode = 0;
  int scenario = 0;
  std::uint64_t seed = 0;
  double profit = 0.0;  // mean daily net profit over the evaluation episodes
  double reward_mean = 0.0;
  double reward_std = 0.0;
  double c1_mean = 0.0;
  double c2_mean = 0.0;
  int residual_steps = 0;
  int pmv_violations = 0;

  bool operator==(const RunRow&) const = default;
};

struct Aggregate {
  int mode = 0;
  int scenario = 0;
  double profit_mean = 0.0;  // over seeds
  double profit_se = 0.0;    // standard error over seeds

  bool operator==(const Aggregate&) const = default;
};

struct Report {
  std::vector<RunRow> rows;         // ordered by (mode, scenario, seed)
  std::vector<Aggregate> aggregates;
  double total_profit = 0.0;        // sum of the rows' profit column

  bool operator==(const Report&) const = default;
};

// Evaluates the configured mode x scenario x seed grid against existing
// checkpoints under cfg.checkpoint_root. Cells run on a worker pool; the
// report itself is assembled serially.
Report run_matrix(const RunConfig& cfg);

Report aggregate_rows(std::vector<RunRow> rows);

void emit_report_csv(const Report& report, const std::string& path);
void emit_report_json(const Report& report, const std::string& path);
Report parse_report_json(const std::string& path);

// Writes one evaluation cell's hourly dispatch series for plotting.
void emit_dispatch_trace(const std::vector<StepInfo>& trace,
                         const std::string& path);

void emit_curves_csv(const std::vector<EpisodeLog>& curves,
                     const std::string& path);

struct TrainOutcome {
  std::string checkpoint_path;
  std::string curves_path;
  std::vector<EpisodeLog> curves;
};

// Trains the algorithm implied by `mode` (1/2: plain SAC, 3/4: SA-SAC) in the
// scenario's environment with the attack off, then saves the checkpoint and
// learning curves under out_dir.
TrainOutcome run_training(const RunConfig& cfg, int mode, int scenario,
                          std::uint64_t seed);

// Evaluation cell used by run_matrix, exposed for single-cell CLI runs.
RunRow evaluate_cell(const RunConfig& cfg, const ProfileSet& profiles, int mode,
                     int scenario, std::uint64_t seed,
                     std::vector<StepInfo>* trace_out = nullptr);

}  // namespace iesdr
