#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "iesdr/attack.hpp"
#include "iesdr/devices.hpp"
#include "iesdr/pricing.hpp"
#include "iesdr/profiles.hpp"

namespace iesdr {

struct GridLimits {
  double p_min_kw = -1000.0;  // symmetric export limit
  double p_max_kw = 1000.0;
  double q_min_m3 = -80.0;
  double q_max_m3 = 80.0;
};

// Reward shaping coefficients. Action change-rate limits are expressed in
// normalized action units (component range mapped to [-1,1]); defaults carry
// the device ramp limits over and leave the unconstrained components free.
struct PenaltyParams {
  std::array<double, 6> delta1{1, 1, 1, 1, 1, 1};
  std::array<double, 6> delta2{1, 1, 1, 1, 1, 1};
  std::array<double, 6> a_umax{};
  std::array<double, 6> a_dmax{};
  double beta_lr = 5.0;  // demand-side heat penalty, CNY/kWh
  double beta_el = 5.0;  // supply-side heat penalty, CNY/kWh

  static PenaltyParams defaults_for(const ConverterParams& conv);
};

struct SystemParams {
  BuildingParams building;
  ComfortParams comfort = ComfortParams::calibrated();
  FlexLoadParams flex_e;
  FlexLoadParams flex_g;
  StorageParams esd = StorageParams::esd_defaults();
  StorageParams hsd = StorageParams::hsd_defaults();
  ConverterParams conv;
  GridLimits grid;
  PenaltyParams penalty = PenaltyParams::defaults_for(ConverterParams{});
  PricingParams pricing;      // zero gains mean: derive from the TOU schedule
  DetectorSpec detector;
  double gamma_ch = 0.1;      // heat-cut compensation, CNY/kWh
  double sell_ratio = 0.5;    // selling price = ratio * buying price

  static SystemParams defaults();
  void validate() const;
};

// Full simulator state. The observation is a normalized projection of this;
// adversaries only ever touch the observation.
struct EnvState {
  int hour = 0;
  bool done = false;
  int day_index = 0;
  double c_esd_kwh = 0.0;
  double c_hsd_kwh = 0.0;
  double t_in_prev_c = 21.0;
  FlexLoadLedger ledger_e;
  FlexLoadLedger ledger_g;
  std::array<double, 6> prev_action_native{};  // [P2G, EB, MT, prH, prP, prQ]
};

struct Action {
  double p_p2g_kw = 0.0;
  double p_eb_kw = 0.0;
  double q_mt_m3 = 0.0;
  double price_h = 0.0;
  double price_p = 0.0;
  double price_q = 0.0;

  std::array<double, 6> as_array() const {
    return {p_p2g_kw, p_eb_kw, q_mt_m3, price_h, price_p, price_q};
  }
};

struct DecodedAction {
  Action realized;
  std::array<double, 6> requested_native{};  // after affine map, before clamps
  std::array<double, 6> requested_norm{};
  std::array<double, 6> realized_norm{};
  std::array<double, 6> prev_norm{};  // previous realized action, same scale
  bool p2g_infeasible = false;
  bool mt_infeasible = false;
};

struct DispatchResult {
  Action action;
  LevelTriple levels;
  double p_wt_kw = 0.0;

  double p_load_kw = 0.0;  // served electric load (after shift and paybacks)
  double q_load_m3 = 0.0;
  double h_load_kw = 0.0;  // demanded heat after the cut
  double p_shift_kw = 0.0;
  double q_shift_m3 = 0.0;
  double p_payback_kw = 0.0;
  double q_payback_m3 = 0.0;
  double h_basic_kw = 0.0;
  double h_cut_kw = 0.0;
  double h_cut_max_kw = 0.0;

  ConverterFlows conv;

  double esd_flow_kw = 0.0;  // discharge positive, charge negative
  double hsd_flow_kw = 0.0;
  double p_grid_kw = 0.0;    // buy positive, sell negative
  double q_grid_m3 = 0.0;
  double grid_buy_price_e = 0.0;
  double grid_buy_price_g = 0.0;

  // Irreducible closure residuals (positive = surplus curtailed, negative =
  // unserved demand). The balance identities hold exactly with these terms.
  double elec_residual_kw = 0.0;
  double heat_residual_kw = 0.0;
  double gas_residual_m3 = 0.0;

  double served_e_kw = 0.0;
  double served_g_m3 = 0.0;
  double served_h_kw = 0.0;

  double c_esd_next_kwh = 0.0;
  double c_hsd_next_kwh = 0.0;
  double t_in_next_c = 0.0;

  bool any_residual() const {
    return elec_residual_kw != 0.0 || heat_residual_kw != 0.0 ||
           gas_residual_m3 != 0.0;
  }
};

struct StepInfo {
  DispatchResult dispatch;
  double revenue = 0.0;
  double cost = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
};

struct StepResult {
  std::vector<double> observation;
  double reward = 0.0;
  bool done = false;
  StepInfo info;
};

struct EnvOptions {
  bool idr_enabled = true;   // off: prices pinned to benchmarks, levels zero
  bool hsd_enabled = true;   // off: HSD capacity forced to zero
  PerturbMode adversary = PerturbMode::None;
  ItdsaSpec attack;
  AdversaryBudget budget;
};

// --- stateless building blocks (unit-test surface) ------------------------

std::vector<double> observe(const EnvState& state, const SystemParams& sp,
                            const DayProfile& day, const ObsBounds& bounds,
                            PerturbMode adversary, const ItdsaSpec& attack,
                            const AdversaryBudget& budget);

DecodedAction decode_action(const std::array<double, 6>& raw,
                            const EnvState& state, const SystemParams& sp,
                            const TouSchedule& tou, bool idr_enabled);

DispatchResult dispatch(EnvState& state, const DecodedAction& action,
                        const SystemParams& sp, const DayProfile& day,
                        const TouSchedule& tou, std::mt19937_64& rng,
                        const StorageParams& hsd_effective);

void revenue_and_cost(const DispatchResult& d, const SystemParams& sp,
                      double& revenue, double& cost);

void penalties(const EnvState& state_before, const DecodedAction& action,
               const DispatchResult& d, const SystemParams& sp,
               const StorageParams& hsd_effective, double& c1, double& c2);

// Falsified heat demand: Eq.-faithful temperature scaling of the reported
// current and previous indoor readings, pushed through the building model.
double falsified_heat_demand(const EnvState& state, const SystemParams& sp,
                             const DayProfile& day, const ItdsaSpec& attack);

// --- episode engine --------------------------------------------------------

class Environment {
 public:
  static constexpr int kObsDim = 9;
  static constexpr int kActDim = 6;

  Environment(SystemParams sp, ProfileSet profiles, EnvOptions opt,
              std::uint64_t seed);

  // Starts episode `episode`; day = episode % days. Returns the observation.
  std::vector<double> reset(int episode);

  // Advances one hour. Throws if the episode is already done.
  StepResult step(const std::array<double, 6>& raw_action);

  const EnvState& state() const { return state_; }
  const SystemParams& params() const { return sp_; }
  const ObsBounds& bounds() const { return bounds_; }
  const ProfileSet& profiles() const { return profiles_; }
  const DayProfile& current_day() const;
  const TouSchedule& tou() const { return tou_; }
  const EnvOptions& options() const { return opt_; }
  const StorageParams& hsd_effective() const { return hsd_eff_; }

  std::vector<double> observation() const;

 private:
  SystemParams sp_;
  ProfileSet profiles_;
  EnvOptions opt_;
  ObsBounds bounds_;
  TouSchedule tou_;
  StorageParams hsd_eff_;
  EnvState state_;
  std::mt19937_64 rng_;
  std::uint64_t seed_ = 0;
};

}  // namespace iesdr
