#include "iesdr/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <thread>

#include <json.hpp>

namespace iesdr {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct Cell {
  int mode, scenario;
  std::uint64_t seed;
};

}  // namespace

RunRow evaluate_cell(const RunConfig& cfg, const ProfileSet& profiles, int mode,
                     int scenario, std::uint64_t seed,
                     std::vector<StepInfo>* trace_out) {
  const std::string root =
      cfg.checkpoint_root.empty() ? cfg.out_dir : cfg.checkpoint_root;
  const std::string path =
      resolve_out_dir(root) + "/" + checkpoint_name(mode, scenario, seed);
  if (!std::filesystem::exists(path))
    throw std::runtime_error("matrix: missing checkpoint for mode " +
                             std::to_string(mode) + ": " + path);
  const GaussianPolicy policy = load_policy(path);

  EnvOptions opt = scenario_options(scenario);
  if (mode_attacked(mode)) {
    opt.adversary = PerturbMode::Itdsa;
    opt.attack = cfg.attack;
  }
  Environment env(cfg.system, profiles, opt, seed);
  const EvalMetrics m =
      evaluate(policy, env, cfg.eval_episodes, cfg.eval_first_episode);

  RunRow row;
  row.mode = mode;
  row.scenario = scenario;
  row.seed = seed;
  row.profit = m.profit_mean;
  row.reward_mean = m.reward_mean;
  row.reward_std = m.reward_std;
  row.c1_mean = m.c1_mean;
  row.c2_mean = m.c2_mean;
  row.residual_steps = m.residual_steps;
  row.pmv_violations = m.pmv_violations;
  if (trace_out) *trace_out = m.trace;
  return row;
}

Report aggregate_rows(std::vector<RunRow> rows) {
  std::sort(rows.begin(), rows.end(), [](const RunRow& a, const RunRow& b) {
    if (a.mode != b.mode) return a.mode < b.mode;
    if (a.scenario != b.scenario) return a.scenario < b.scenario;
    return a.seed < b.seed;
  });

  Report report;
  report.rows = std::move(rows);
  for (const RunRow& r : report.rows) report.total_profit += r.profit;

  for (int mode = 1; mode <= 4; ++mode) {
    for (int scenario = 1; scenario <= 4; ++scenario) {
      std::vector<double> profits;
      for (const RunRow& r : report.rows)
        if (r.mode == mode && r.scenario == scenario) profits.push_back(r.profit);
      if (profits.empty()) continue;
      Aggregate agg;
      agg.mode = mode;
      agg.scenario = scenario;
      for (double p : profits) agg.profit_mean += p;
      agg.profit_mean /= static_cast<double>(profits.size());
      if (profits.size() > 1) {
        double var = 0.0;
        for (double p : profits)
          var += (p - agg.profit_mean) * (p - agg.profit_mean);
        var /= static_cast<double>(profits.size() - 1);
        agg.profit_se = std::sqrt(var / static_cast<double>(profits.size()));
      }
      report.aggregates.push_back(agg);
    }
  }
  return report;
}

Report run_matrix(const RunConfig& cfg) {
  cfg.validate();
  const ProfileSet profiles = acquire_profiles(cfg);

  std::vector<Cell> cells;
  for (int mode : cfg.modes)
    for (int scenario : cfg.scenarios)
      for (std::uint64_t seed : cfg.seeds) cells.push_back({mode, scenario, seed});

  std::vector<RunRow> rows(cells.size());
  std::vector<std::string> errors(cells.size());
  std::atomic<size_t> next{0};
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const size_t workers = std::min<size_t>(
      cells.size(), cfg.workers > 0 ? static_cast<size_t>(cfg.workers) : hw);

  auto worker = [&]() {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      try {
        rows[i] = evaluate_cell(cfg, profiles, cells[i].mode, cells[i].scenario,
                                cells[i].seed);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  for (size_t w = 0; w + 1 < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  for (const auto& err : errors)
    if (!err.empty()) throw std::runtime_error(err);

  return aggregate_rows(std::move(rows));
}

void emit_report_csv(const Report& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("report: cannot write " + path);
  out << "mode,scenario,seed,profit,reward_mean,reward_std,c1_mean,c2_mean,"
         "residual_steps,pmv_violations\n";
  for (const RunRow& r : report.rows) {
    out << r.mode << ',' << r.scenario << ',' << r.seed << ',' << fmt(r.profit)
        << ',' << fmt(r.reward_mean) << ',' << fmt(r.reward_std) << ','
        << fmt(r.c1_mean) << ',' << fmt(r.c2_mean) << ',' << r.residual_steps
        << ',' << r.pmv_violations << '\n';
  }
  if (!out) throw std::runtime_error("report: write failed " + path);
}

void emit_report_json(const Report& report, const std::string& path) {
  nlohmann::json j;
  j["rows"] = nlohmann::json::array();
  for (const RunRow& r : report.rows)
    j["rows"].push_back({{"mode", r.mode},
                         {"scenario", r.scenario},
                         {"seed", r.seed},
                         {"profit", r.profit},
                         {"reward_mean", r.reward_mean},
                         {"reward_std", r.reward_std},
                         {"c1_mean", r.c1_mean},
                         {"c2_mean", r.c2_mean},
                         {"residual_steps", r.residual_steps},
                         {"pmv_violations", r.pmv_violations}});
  j["aggregates"] = nlohmann::json::array();
  for (const Aggregate& a : report.aggregates)
    j["aggregates"].push_back({{"mode", a.mode},
                               {"scenario", a.scenario},
                               {"profit_mean", a.profit_mean},
                               {"profit_se", a.profit_se}});
  j["total_profit"] = report.total_profit;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("report: cannot write " + path);
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("report: write failed " + path);
}

Report parse_report_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("report: cannot open " + path);
  nlohmann::json j;
  in >> j;
  Report report;
  for (const auto& rj : j.at("rows")) {
    RunRow r;
    rj.at("mode").get_to(r.mode);
    rj.at("scenario").get_to(r.scenario);
    rj.at("seed").get_to(r.seed);
    rj.at("profit").get_to(r.profit);
    rj.at("reward_mean").get_to(r.reward_mean);
    rj.at("reward_std").get_to(r.reward_std);
    rj.at("c1_mean").get_to(r.c1_mean);
    rj.at("c2_mean").get_to(r.c2_mean);
    rj.at("residual_steps").get_to(r.residual_steps);
    rj.at("pmv_violations").get_to(r.pmv_violations);
    report.rows.push_back(r);
  }
  for (const auto& aj : j.at("aggregates")) {
    Aggregate a;
    aj.at("mode").get_to(a.mode);
    aj.at("scenario").get_to(a.scenario);
    aj.at("profit_mean").get_to(a.profit_mean);
    aj.at("profit_se").get_to(a.profit_se);
    report.aggregates.push_back(a);
  }
  j.at("total_profit").get_to(report.total_profit);
  return report;
}

void emit_dispatch_trace(const std::vector<StepInfo>& trace,
                         const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("trace: cannot write " + path);
  out << "hour,wt_kw,p_grid_kw,p_mt_kw,p_eb_kw,p_p2g_kw,esd_flow_kw,p_load_kw,"
         "h_eb_kw,h_mt_kw,hsd_flow_kw,h_load_kw,h_cut_kw,q_grid_m3,q_p2g_m3,"
         "q_mt_m3,q_load_m3,price_p,price_q,price_h,t_in_c,revenue,cost,c1,c2\n";
  for (size_t h = 0; h < trace.size(); ++h) {
    const DispatchResult& d = trace[h].dispatch;
    out << h << ',' << fmt(d.p_wt_kw) << ',' << fmt(d.p_grid_kw) << ','
        << fmt(d.conv.p_mt_kw) << ',' << fmt(d.action.p_eb_kw) << ','
        << fmt(d.action.p_p2g_kw) << ',' << fmt(d.esd_flow_kw) << ','
        << fmt(d.p_load_kw) << ',' << fmt(d.conv.h_eb_kw) << ','
        << fmt(d.conv.h_mt_kw) << ',' << fmt(d.hsd_flow_kw) << ','
        << fmt(d.h_load_kw) << ',' << fmt(d.h_cut_kw) << ',' << fmt(d.q_grid_m3)
        << ',' << fmt(d.conv.q_p2g_m3) << ',' << fmt(d.action.q_mt_m3) << ','
        << fmt(d.q_load_m3) << ',' << fmt(d.action.price_p) << ','
        << fmt(d.action.price_q) << ',' << fmt(d.action.price_h) << ','
        << fmt(d.t_in_next_c) << ',' << fmt(trace[h].revenue) << ','
        << fmt(trace[h].cost) << ',' << fmt(trace[h].c1) << ','
        << fmt(trace[h].c2) << '\n';
  }
}

void emit_curves_csv(const std::vector<EpisodeLog>& curves,
                     const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("curves: cannot write " + path);
  out << "episode,reward,c1,c2,alpha,eps,beta\n";
  for (const EpisodeLog& l : curves)
    out << l.episode << ',' << fmt(l.reward) << ',' << fmt(l.c1) << ','
        << fmt(l.c2) << ',' << fmt(l.alpha) << ',' << fmt(l.eps) << ','
        << fmt(l.beta) << '\n';
}

TrainOutcome run_training(const RunConfig& cfg, int mode, int scenario,
                          std::uint64_t seed) {
  cfg.trainer.validate();
  const ProfileSet profiles = acquire_profiles(cfg);

  EnvOptions opt = scenario_options(scenario);  // training sees no adversary
  Environment env(cfg.system, profiles, opt, seed);

  TrainerConfig tc = cfg.trainer;
  tc.seed = seed;
  if (!mode_uses_sasac(mode)) tc.kappa = 0.0;  // plain SAC baseline

  SacTrainer trainer(env, tc);
  TrainResult result = trainer.train();

  const std::string out = resolve_out_dir(cfg.out_dir);
  std::filesystem::create_directories(out);
  TrainOutcome outcome;
  outcome.checkpoint_path = out + "/" + checkpoint_name(mode, scenario, seed);
  save_policy(result.policy, outcome.checkpoint_path);
  outcome.curves_path = out + "/curves_" +
                        std::string(mode_uses_sasac(mode) ? "sasac" : "sac") +
                        "_s" + std::to_string(scenario) + "_seed" +
                        std::to_string(seed) + ".csv";
  emit_curves_csv(result.curves, outcome.curves_path);
  outcome.curves = std::move(result.curves);
  return outcome;
}

}  // namespace iesdr
