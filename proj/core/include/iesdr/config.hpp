#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "iesdr/attack.hpp"
#include "iesdr/environment.hpp"
#include "iesdr/trainer.hpp"

namespace iesdr {

// Run configuration. The file format is JSON; every field has a default and
// any subset may be given. Unknown keys are rejected.
struct RunConfig {
  std::string profiles_path;  // empty: generate the synthetic set below
  int gen_days = 8;
  std::uint64_t gen_seed = 7;

  SystemParams system;
  TrainerConfig trainer;
  ItdsaSpec attack;

  std::vector<int> modes = {1, 2, 3, 4};
  std::vector<int> scenarios = {1, 2, 3, 4};
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};

  std::string out_dir = "out";
  std::string checkpoint_root;  // defaults to out_dir when empty
  int eval_episodes = 10;
  int eval_first_episode = 10000;  // disjoint episode indices from training
  int workers = 0;                 // 0 = hardware concurrency

  void validate() const;
  static RunConfig from_file(const std::string& path);
  static RunConfig from_json_text(const std::string& text);
  std::string to_json_text() const;
};

// Resolves an output directory against the IESDR_OUT_ROOT environment
// variable when it is set and the path is relative.
std::string resolve_out_dir(const std::string& dir);

ProfileSet acquire_profiles(const RunConfig& cfg);

// Scenario toggles: 1 = HSD+IDR, 2 = HSD only, 3 = IDR only, 4 = neither.
EnvOptions scenario_options(int scenario);

// Mode semantics: 1 = SAC clean, 2 = SAC attacked, 3 = SA-SAC clean,
// 4 = SA-SAC attacked.
bool mode_uses_sasac(int mode);
bool mode_attacked(int mode);
std::string checkpoint_name(int mode, int scenario, std::uint64_t seed);

}  // namespace iesdr
