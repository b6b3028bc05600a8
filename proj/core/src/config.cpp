#include "iesdr/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace iesdr {

namespace {

using nlohmann::json;

void check_keys(const json& j, const std::set<std::string>& allowed,
                const std::string& where) {
  if (!j.is_object())
    throw std::runtime_error("config: " + where + " must be an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key()))
      throw std::runtime_error("config: unknown key '" + it.key() + "' in " + where);
}

template <typename T>
void get_to(const json& j, const char* key, T& out) {
  if (j.contains(key)) j.at(key).get_to(out);
}

void parse_building(const json& j, BuildingParams& b) {
  check_keys(j, {"k_w_m2c", "area_m2", "volume_m3", "c_air_kj_kgc",
                 "rho_air_kg_m3", "dt_h"}, "system.building");
  get_to(j, "k_w_m2c", b.k_w_m2c);
  get_to(j, "area_m2", b.area_m2);
  get_to(j, "volume_m3", b.volume_m3);
  get_to(j, "c_air_kj_kgc", b.c_air_kj_kgc);
  get_to(j, "rho_air_kg_m3", b.rho_air_kg_m3);
  get_to(j, "dt_h", b.dt_h);
}

void parse_comfort(const json& j, ComfortParams& c) {
  check_keys(j, {"t_skin_c", "clothing", "day_band", "night_band", "t_comfort_c"},
             "system.comfort");
  double t_skin = c.t_skin_c, clothing = c.clothing, t_comfort = c.t_comfort_c;
  get_to(j, "t_skin_c", t_skin);
  get_to(j, "clothing", clothing);
  get_to(j, "t_comfort_c", t_comfort);
  c = ComfortParams::calibrated(t_skin, clothing, t_comfort);
  get_to(j, "day_band", c.day_band);
  get_to(j, "night_band", c.night_band);
}

void parse_storage(const json& j, StorageParams& s, const std::string& where) {
  check_keys(j, {"c_max_kwh", "c_min_kwh", "c0_kwh", "p_ch_max_kw",
                 "p_dc_max_kw", "eta_ch", "eta_dc"}, where);
  if (j.contains("c_max_kwh")) {
    // derived defaults follow the maximum unless given explicitly
    j.at("c_max_kwh").get_to(s.c_max_kwh);
    s.c_min_kwh = 0.1 * s.c_max_kwh;
    s.c0_kwh = 0.5 * s.c_max_kwh;
  }
  get_to(j, "c_min_kwh", s.c_min_kwh);
  get_to(j, "c0_kwh", s.c0_kwh);
  get_to(j, "p_ch_max_kw", s.p_ch_max_kw);
  get_to(j, "p_dc_max_kw", s.p_dc_max_kw);
  get_to(j, "eta_ch", s.eta_ch);
  get_to(j, "eta_dc", s.eta_dc);
}

void parse_conv(const json& j, ConverterParams& c) {
  check_keys(j, {"eb_eta", "eb_h_max_kw", "p2g_eta", "p2g_min_kw", "p2g_max_kw",
                 "p2g_ramp_down_kw", "p2g_ramp_up_kw", "mt_eta_e", "mt_eta_h",
                 "mt_eta_loss", "mt_min_m3", "mt_max_m3", "mt_ramp_down_m3",
                 "mt_ramp_up_m3", "hhv_kwh_m3"}, "system.converters");
  get_to(j, "eb_eta", c.eb_eta);
  get_to(j, "eb_h_max_kw", c.eb_h_max_kw);
  get_to(j, "p2g_eta", c.p2g_eta);
  get_to(j, "p2g_min_kw", c.p2g_min_kw);
  get_to(j, "p2g_max_kw", c.p2g_max_kw);
  get_to(j, "p2g_ramp_down_kw", c.p2g_ramp_down_kw);
  get_to(j, "p2g_ramp_up_kw", c.p2g_ramp_up_kw);
  get_to(j, "mt_eta_e", c.mt_eta_e);
  get_to(j, "mt_eta_h", c.mt_eta_h);
  get_to(j, "mt_eta_loss", c.mt_eta_loss);
  get_to(j, "mt_min_m3", c.mt_min_m3);
  get_to(j, "mt_max_m3", c.mt_max_m3);
  get_to(j, "mt_ramp_down_m3", c.mt_ramp_down_m3);
  get_to(j, "mt_ramp_up_m3", c.mt_ramp_up_m3);
  get_to(j, "hhv_kwh_m3", c.hhv_kwh_m3);
}

void parse_system(const json& j, SystemParams& sp) {
  check_keys(j,
             {"building", "comfort", "flex_e", "flex_g", "esd", "hsd",
              "converters", "grid", "penalty", "pricing", "detector",
              "gamma_ch", "sell_ratio"},
             "system");
  if (j.contains("building")) parse_building(j.at("building"), sp.building);
  if (j.contains("comfort")) parse_comfort(j.at("comfort"), sp.comfort);
  for (const char* key : {"flex_e", "flex_g"}) {
    if (!j.contains(key)) continue;
    FlexLoadParams& f = key == std::string("flex_e") ? sp.flex_e : sp.flex_g;
    const json& jf = j.at(key);
    check_keys(jf, {"sigma_mean", "sigma_std", "eta_mean", "eta_std", "gamma_comp"},
               std::string("system.") + key);
    get_to(jf, "sigma_mean", f.sigma_mean);
    get_to(jf, "sigma_std", f.sigma_std);
    get_to(jf, "eta_mean", f.eta_mean);
    get_to(jf, "eta_std", f.eta_std);
    get_to(jf, "gamma_comp", f.gamma_comp);
  }
  if (j.contains("esd")) parse_storage(j.at("esd"), sp.esd, "system.esd");
  if (j.contains("hsd")) parse_storage(j.at("hsd"), sp.hsd, "system.hsd");
  if (j.contains("converters")) parse_conv(j.at("converters"), sp.conv);
  if (j.contains("grid")) {
    const json& jg = j.at("grid");
    check_keys(jg, {"p_min_kw", "p_max_kw", "q_min_m3", "q_max_m3"}, "system.grid");
    get_to(jg, "p_min_kw", sp.grid.p_min_kw);
    get_to(jg, "p_max_kw", sp.grid.p_max_kw);
    get_to(jg, "q_min_m3", sp.grid.q_min_m3);
    get_to(jg, "q_max_m3", sp.grid.q_max_m3);
  }
  if (j.contains("penalty")) {
    const json& jp = j.at("penalty");
    check_keys(jp, {"delta1", "delta2", "a_umax", "a_dmax", "beta_lr", "beta_el"},
               "system.penalty");
    get_to(jp, "delta1", sp.penalty.delta1);
    get_to(jp, "delta2", sp.penalty.delta2);
    get_to(jp, "a_umax", sp.penalty.a_umax);
    get_to(jp, "a_dmax", sp.penalty.a_dmax);
    get_to(jp, "beta_lr", sp.penalty.beta_lr);
    get_to(jp, "beta_el", sp.penalty.beta_el);
  }
  if (j.contains("pricing")) {
    const json& jp = j.at("pricing");
    check_keys(jp, {"zeta_p", "zeta_q", "k_p", "k_q", "k_h", "l_p", "l_q", "l_h"},
               "system.pricing");
    get_to(jp, "zeta_p", sp.pricing.zeta_p);
    get_to(jp, "zeta_q", sp.pricing.zeta_q);
    get_to(jp, "k_p", sp.pricing.k_p);
    get_to(jp, "k_q", sp.pricing.k_q);
    get_to(jp, "k_h", sp.pricing.k_h);
    get_to(jp, "l_p", sp.pricing.l_p);
    get_to(jp, "l_q", sp.pricing.l_q);
    get_to(jp, "l_h", sp.pricing.l_h);
  }
  if (j.contains("detector")) {
    const json& jd = j.at("detector");
    check_keys(jd, {"tau_thresh", "noise_sigma"}, "system.detector");
    get_to(jd, "tau_thresh", sp.detector.tau_thresh);
    get_to(jd, "noise_sigma", sp.detector.noise_sigma);
  }
  get_to(j, "gamma_ch", sp.gamma_ch);
  get_to(j, "sell_ratio", sp.sell_ratio);
}

void parse_trainer(const json& j, TrainerConfig& t) {
  check_keys(j,
             {"hidden_width", "hidden_layers", "lr_actor", "lr_critic",
              "lr_alpha", "gamma", "batch", "tau", "episodes", "warm_episodes",
              "ramp_episodes", "hold_episodes", "replay_capacity",
              "warmup_transitions", "updates_per_step", "kappa", "target_eps",
              "entropy_target", "reward_scale", "bound_batch", "init_alpha"},
             "trainer");
  bool phases_given = j.contains("warm_episodes") || j.contains("ramp_episodes") ||
                      j.contains("hold_episodes");
  get_to(j, "episodes", t.episodes);
  if (!phases_given) {
    const TrainerConfig scaled = TrainerConfig::scaled(t.episodes);
    t.warm_episodes = scaled.warm_episodes;
    t.ramp_episodes = scaled.ramp_episodes;
    t.hold_episodes = scaled.hold_episodes;
  }
  get_to(j, "hidden_width", t.hidden_width);
  get_to(j, "hidden_layers", t.hidden_layers);
  get_to(j, "lr_actor", t.lr_actor);
  get_to(j, "lr_critic", t.lr_critic);
  get_to(j, "lr_alpha", t.lr_alpha);
  get_to(j, "gamma", t.gamma);
  get_to(j, "batch", t.batch);
  get_to(j, "tau", t.tau);
  get_to(j, "warm_episodes", t.warm_episodes);
  get_to(j, "ramp_episodes", t.ramp_episodes);
  get_to(j, "hold_episodes", t.hold_episodes);
  get_to(j, "replay_capacity", t.replay_capacity);
  get_to(j, "warmup_transitions", t.warmup_transitions);
  get_to(j, "updates_per_step", t.updates_per_step);
  get_to(j, "kappa", t.kappa);
  get_to(j, "target_eps", t.target_eps);
  get_to(j, "entropy_target", t.entropy_target);
  get_to(j, "reward_scale", t.reward_scale);
  get_to(j, "bound_batch", t.bound_batch);
  get_to(j, "init_alpha", t.init_alpha);
}

void parse_attack(const json& j, ItdsaSpec& a) {
  check_keys(j, {"lambda", "a", "window_start", "window_end"}, "attack");
  get_to(j, "lambda", a.lambda);
  get_to(j, "a", a.a);
  get_to(j, "window_start", a.window_start);
  get_to(j, "window_end", a.window_end);
}

}  // namespace

void RunConfig::validate() const {
  for (int m : modes)
    if (m < 1 || m > 4) throw std::invalid_argument("config: mode out of 1..4");
  for (int s : scenarios)
    if (s < 1 || s > 4) throw std::invalid_argument("config: scenario out of 1..4");
  if (seeds.empty()) throw std::invalid_argument("config: need at least one seed");
  if (eval_episodes <= 0)
    throw std::invalid_argument("config: eval_episodes must be positive");
  if (gen_days <= 0) throw std::invalid_argument("config: gen_days must be positive");
  trainer.validate();
  attack.validate();
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

RunConfig RunConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(std::string("config: JSON parse error: ") + e.what());
  }
  check_keys(j,
             {"profiles_path", "gen_days", "gen_seed", "system", "trainer",
              "attack", "modes", "scenarios", "seeds", "out_dir",
              "checkpoint_root", "eval_episodes", "eval_first_episode",
              "workers"},
             "top level");
  RunConfig cfg;
  get_to(j, "profiles_path", cfg.profiles_path);
  get_to(j, "gen_days", cfg.gen_days);
  get_to(j, "gen_seed", cfg.gen_seed);
  if (j.contains("system")) parse_system(j.at("system"), cfg.system);
  if (j.contains("trainer")) parse_trainer(j.at("trainer"), cfg.trainer);
  if (j.contains("attack")) parse_attack(j.at("attack"), cfg.attack);
  get_to(j, "modes", cfg.modes);
  get_to(j, "scenarios", cfg.scenarios);
  get_to(j, "seeds", cfg.seeds);
  get_to(j, "out_dir", cfg.out_dir);
  get_to(j, "checkpoint_root", cfg.checkpoint_root);
  get_to(j, "eval_episodes", cfg.eval_episodes);
  get_to(j, "eval_first_episode", cfg.eval_first_episode);
  get_to(j, "workers", cfg.workers);
  cfg.validate();
  return cfg;
}

std::string RunConfig::to_json_text() const {
  json j;
  j["profiles_path"] = profiles_path;
  j["gen_days"] = gen_days;
  j["gen_seed"] = gen_seed;
  j["modes"] = modes;
  j["scenarios"] = scenarios;
  j["seeds"] = seeds;
  j["out_dir"] = out_dir;
  j["checkpoint_root"] = checkpoint_root;
  j["eval_episodes"] = eval_episodes;
  j["eval_first_episode"] = eval_first_episode;
  j["workers"] = workers;
  j["trainer"] = {{"hidden_width", trainer.hidden_width},
                  {"hidden_layers", trainer.hidden_layers},
                  {"lr_actor", trainer.lr_actor},
                  {"lr_critic", trainer.lr_critic},
                  {"lr_alpha", trainer.lr_alpha},
                  {"gamma", trainer.gamma},
                  {"batch", trainer.batch},
                  {"tau", trainer.tau},
                  {"episodes", trainer.episodes},
                  {"warm_episodes", trainer.warm_episodes},
                  {"ramp_episodes", trainer.ramp_episodes},
                  {"hold_episodes", trainer.hold_episodes},
                  {"replay_capacity", trainer.replay_capacity},
                  {"warmup_transitions", trainer.warmup_transitions},
                  {"updates_per_step", trainer.updates_per_step},
                  {"kappa", trainer.kappa},
                  {"target_eps", trainer.target_eps},
                  {"entropy_target", trainer.entropy_target},
                  {"reward_scale", trainer.reward_scale},
                  {"bound_batch", trainer.bound_batch},
                  {"init_alpha", trainer.init_alpha}};
  j["attack"] = {{"lambda", attack.lambda},
                 {"a", attack.a},
                 {"window_start", attack.window_start},
                 {"window_end", attack.window_end}};
  return j.dump(2);
}

std::string resolve_out_dir(const std::string& dir) {
  const char* root = std::getenv("IESDR_OUT_ROOT");
  if (!root || dir.empty() || dir.front() == '/') return dir;
  return std::string(root) + "/" + dir;
}

ProfileSet acquire_profiles(const RunConfig& cfg) {
  if (!cfg.profiles_path.empty()) return load_profiles(cfg.profiles_path);
  GeneratorOptions opt;
  opt.days = cfg.gen_days;
  return generate_profiles(cfg.gen_seed, opt, cfg.system.building,
                           cfg.system.comfort.t_comfort_c);
}

EnvOptions scenario_options(int scenario) {
  EnvOptions opt;
  switch (scenario) {
    case 1: opt.hsd_enabled = true;  opt.idr_enabled = true;  break;
    case 2: opt.hsd_enabled = true;  opt.idr_enabled = false; break;
    case 3: opt.hsd_enabled = false; opt.idr_enabled = true;  break;
    case 4: opt.hsd_enabled = false; opt.idr_enabled = false; break;
    default: throw std::invalid_argument("scenario out of 1..4");
  }
  return opt;
}

bool mode_uses_sasac(int mode) {
  if (mode < 1 || mode > 4) throw std::invalid_argument("mode out of 1..4");
  return mode >= 3;
}

bool mode_attacked(int mode) {
  if (mode < 1 || mode > 4) throw std::invalid_argument("mode out of 1..4");
  return mode == 2 || mode == 4;
}

std::string checkpoint_name(int mode, int scenario, std::uint64_t seed) {
  return std::string(mode_uses_sasac(mode) ? "sasac" : "sac") + "_s" +
         std::to_string(scenario) + "_seed" + std::to_string(seed) + ".json";
}

}  // namespace iesdr
