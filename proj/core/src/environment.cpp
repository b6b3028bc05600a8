#include "iesdr/environment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "iesdr/rng.hpp"

namespace iesdr {

namespace {

double norm_to(double v, double lo, double hi) {
  if (hi <= lo) return 0.0;
  return std::clamp(2.0 * (v - lo) / (hi - lo) - 1.0, -1.0, 1.0);
}

double lerp(double raw, double lo, double hi) {
  // raw in [-1,1] onto [lo,hi]
  const double t = (std::clamp(raw, -1.0, 1.0) + 1.0) / 2.0;
  return lo + t * (hi - lo);
}

struct ActionRange {
  double lo = 0.0;
  double hi = 1.0;
};

// Native-unit range of each action component at the given hour; used both to
// decode raw actions and to express change-rate limits in normalized units.
std::array<ActionRange, 6> action_ranges(const SystemParams& sp,
                                         const TouSchedule& tou, int hour) {
  const PriceBand bh = heat_band(tou, sp.pricing, hour);
  const PriceBand bp = elec_band(tou, sp.pricing);
  const PriceBand bq = gas_band(tou, sp.pricing);
  return {ActionRange{sp.conv.p2g_min_kw, sp.conv.p2g_max_kw},
          ActionRange{0.0, sp.conv.eb_p_max_kw()},
          ActionRange{sp.conv.mt_min_m3, sp.conv.mt_max_m3},
          ActionRange{bh.lo, bh.hi},
          ActionRange{bp.lo, bp.hi},
          ActionRange{bq.lo, bq.hi}};
}

std::array<double, 6> normalize_action(const std::array<double, 6>& native,
                                       const std::array<ActionRange, 6>& ranges) {
  std::array<double, 6> out{};
  for (int i = 0; i < 6; ++i) {
    const auto& r = ranges[static_cast<size_t>(i)];
    out[static_cast<size_t>(i)] =
        r.hi > r.lo ? 2.0 * (native[static_cast<size_t>(i)] - r.lo) / (r.hi - r.lo) - 1.0
                    : 0.0;
  }
  return out;
}

}  // namespace

PenaltyParams PenaltyParams::defaults_for(const ConverterParams& conv) {
  PenaltyParams p;
  const double p2g_span = conv.p2g_max_kw - conv.p2g_min_kw;
  const double mt_span = conv.mt_max_m3 - conv.mt_min_m3;
  p.a_umax = {2.0 * conv.p2g_ramp_up_kw / p2g_span, 2.0,
              2.0 * conv.mt_ramp_up_m3 / mt_span, 2.0, 2.0, 2.0};
  p.a_dmax = {2.0 * -conv.p2g_ramp_down_kw / p2g_span, 2.0,
              2.0 * -conv.mt_ramp_down_m3 / mt_span, 2.0, 2.0, 2.0};
  return p;
}

SystemParams SystemParams::defaults() { return SystemParams{}; }

void SystemParams::validate() const {
  building.validate();
  comfort.validate();
  esd.validate();
  hsd.validate();
  conv.validate();
  if (grid.p_min_kw > grid.p_max_kw || grid.q_min_m3 > grid.q_max_m3)
    throw std::invalid_argument("SystemParams: grid limits must be ordered");
  for (int i = 0; i < 6; ++i) {
    if (penalty.delta1[(size_t)i] < 0 || penalty.delta2[(size_t)i] < 0 ||
        penalty.a_umax[(size_t)i] < 0 || penalty.a_dmax[(size_t)i] < 0)
      throw std::invalid_argument("SystemParams: penalty coefficients must be >= 0");
  }
  if (penalty.beta_lr < 0 || penalty.beta_el < 0)
    throw std::invalid_argument("SystemParams: heat penalty coefficients must be >= 0");
  if (sell_ratio < 0 || sell_ratio > 1)
    throw std::invalid_argument("SystemParams: sell_ratio must be in [0,1]");
}

double falsified_heat_demand(const EnvState& state, const SystemParams& sp,
                             const DayProfile& day, const ItdsaSpec& attack) {
  const int h = std::min(state.hour, 23);
  const double m_now = itdsa_multiplier(h, attack);
  const double m_prev = itdsa_multiplier(h - 1, attack);
  // The reported temperature pair is the comfort reading for the current hour
  // and the measured indoor temperature of the previous one, each scaled by
  // its own hour's multiplier. With both multipliers at 1 this reproduces the
  // clean demand exactly.
  return building_heat_demand(m_now * sp.comfort.t_comfort_c,
                              m_prev * state.t_in_prev_c,
                              day.t_out_c[static_cast<size_t>(h)], sp.building);
}

std::vector<double> observe(const EnvState& state, const SystemParams& sp,
                            const DayProfile& day, const ObsBounds& bounds,
                            PerturbMode adversary, const ItdsaSpec& attack,
                            const AdversaryBudget& budget) {
  const int h = std::min(state.hour, 23);
  const auto hi = static_cast<size_t>(h);

  const double soc_esd =
      sp.esd.c_max_kwh > 0 ? state.c_esd_kwh / sp.esd.c_max_kwh : 0.0;
  const double soc_hsd =
      sp.hsd.c_max_kwh > 0 ? state.c_hsd_kwh / sp.hsd.c_max_kwh : 0.0;
  const double h_basic = building_heat_demand(
      sp.comfort.t_comfort_c, state.t_in_prev_c, day.t_out_c[hi], sp.building);

  const std::array<double, 9> raw = {
      soc_esd,          soc_hsd,          day.tou_e[hi],
      day.tou_g[hi],    day.wt_kw[hi],    day.basic_e_kw[hi],
      day.basic_g_m3[hi], h_basic,        static_cast<double>(state.hour)};

  std::vector<double> obs(9);
  for (int i = 0; i < 9; ++i)
    obs[static_cast<size_t>(i)] =
        norm_to(raw[static_cast<size_t>(i)], bounds.lo[static_cast<size_t>(i)],
                bounds.hi[static_cast<size_t>(i)]);

  if (adversary == PerturbMode::None) return obs;

  PerturbContext ctx;
  ctx.heat_component = 7;
  ctx.heat_lo_kw = bounds.lo[7];
  ctx.heat_hi_kw = bounds.hi[7];
  if (adversary == PerturbMode::Itdsa)
    ctx.falsified_heat_kw = falsified_heat_demand(state, sp, day, attack);
  return perturb_observation(obs, budget, adversary, ctx);
}

DecodedAction decode_action(const std::array<double, 6>& raw,
                            const EnvState& state, const SystemParams& sp,
                            const TouSchedule& tou, bool idr_enabled) {
  for (double v : raw)
    if (!std::isfinite(v))
      throw std::invalid_argument("decode_action: non-finite raw action");

  const auto ranges = action_ranges(sp, tou, std::min(state.hour, 23));
  DecodedAction d;

  for (int i = 0; i < 6; ++i)
    d.requested_native[(size_t)i] =
        lerp(raw[(size_t)i], ranges[(size_t)i].lo, ranges[(size_t)i].hi);

  const auto p2g = clamp_ramp(d.requested_native[0], state.prev_action_native[0],
                              sp.conv.p2g_min_kw, sp.conv.p2g_max_kw,
                              sp.conv.p2g_ramp_down_kw, sp.conv.p2g_ramp_up_kw);
  const auto mt = clamp_ramp(d.requested_native[2], state.prev_action_native[2],
                             sp.conv.mt_min_m3, sp.conv.mt_max_m3,
                             sp.conv.mt_ramp_down_m3, sp.conv.mt_ramp_up_m3);
  d.p2g_infeasible = p2g.infeasible;
  d.mt_infeasible = mt.infeasible;

  d.realized.p_p2g_kw = p2g.value;
  d.realized.p_eb_kw = std::clamp(d.requested_native[1], 0.0, sp.conv.eb_p_max_kw());
  d.realized.q_mt_m3 = mt.value;

  if (idr_enabled) {
    d.realized.price_h = d.requested_native[3];
    d.realized.price_p = d.requested_native[4];
    d.realized.price_q = d.requested_native[5];
  } else {
    // IDR off: demand sees the benchmark price, so all levels are zero.
    const PriceTriple b = benchmarks(tou, sp.pricing, std::min(state.hour, 23));
    d.realized.price_h = b.heat;
    d.realized.price_p = b.elec;
    d.realized.price_q = b.gas;
    d.requested_native[3] = b.heat;
    d.requested_native[4] = b.elec;
    d.requested_native[5] = b.gas;
  }

  d.requested_norm = normalize_action(d.requested_native, ranges);
  d.realized_norm = normalize_action(d.realized.as_array(), ranges);
  d.prev_norm = normalize_action(state.prev_action_native, ranges);
  return d;
}

DispatchResult dispatch(EnvState& state, const DecodedAction& action,
                        const SystemParams& sp, const DayProfile& day,
                        const TouSchedule& tou, std::mt19937_64& rng,
                        const StorageParams& hsd_effective) {
  const int h = state.hour;
  if (h < 0 || h >= 24) throw std::out_of_range("dispatch: hour out of range");
  const auto hi = static_cast<size_t>(h);

  DispatchResult d;
  d.action = action.realized;
  d.p_wt_kw = day.wt_kw[hi];
  d.grid_buy_price_e = day.tou_e[hi];
  d.grid_buy_price_g = day.tou_g[hi];

  // (a) price levels drive the flexible loads and the heat cut
  d.levels = levels_from_prices(
      {action.realized.price_p, action.realized.price_q, action.realized.price_h},
      tou, sp.pricing, h);

  state.ledger_e.sigma = sample_sigma(sp.flex_e, rng);
  state.ledger_g.sigma = sample_sigma(sp.flex_g, rng);
  const FlexShiftResult fe = flex_shift(state.ledger_e, h, d.levels.tse, rng);
  const FlexShiftResult fg = flex_shift(state.ledger_g, h, d.levels.tsq, rng);
  d.p_load_kw = fe.served;
  d.q_load_m3 = fg.served;
  d.p_shift_kw = fe.shifted;
  d.q_shift_m3 = fg.shifted;
  d.p_payback_kw = fe.payback;
  d.q_payback_m3 = fg.payback;

  d.h_basic_kw = building_heat_demand(sp.comfort.t_comfort_c, state.t_in_prev_c,
                                      day.t_out_c[hi], sp.building);
  d.h_cut_max_kw = max_cuttable_heat(state.t_in_prev_c, day.t_out_c[hi], h,
                                     sp.building, sp.comfort);
  d.h_cut_kw = d.levels.ch * d.h_cut_max_kw;
  d.h_load_kw = d.h_basic_kw - d.h_cut_kw;

  // (b) converters
  d.conv = converters(action.realized.p_eb_kw, action.realized.p_p2g_kw,
                      action.realized.q_mt_m3, sp.conv);

  // (c) heat closure: HSD takes the mismatch, the rest is flagged
  const double heat_surplus = d.conv.h_mt_kw + d.conv.h_eb_kw - d.h_load_kw;
  StorageStepResult hsd;
  if (heat_surplus >= 0.0) {
    hsd = storage_step(state.c_hsd_kwh, heat_surplus, 0.0, hsd_effective);
    d.hsd_flow_kw = -hsd.p_ch_kw;
  } else {
    hsd = storage_step(state.c_hsd_kwh, 0.0, -heat_surplus, hsd_effective);
    d.hsd_flow_kw = hsd.p_dc_kw;
  }
  d.c_hsd_next_kwh = hsd.c_next_kwh;
  d.heat_residual_kw = d.conv.h_mt_kw + d.conv.h_eb_kw + d.hsd_flow_kw - d.h_load_kw;
  d.served_h_kw = d.h_load_kw + std::min(0.0, d.heat_residual_kw);

  // (d) electric closure: ESD first, grid exchange takes the remainder
  const double elec_net = d.p_wt_kw + d.conv.p_mt_kw - d.p_load_kw -
                          action.realized.p_eb_kw - action.realized.p_p2g_kw;
  StorageStepResult esd;
  if (elec_net >= 0.0) {
    esd = storage_step(state.c_esd_kwh, elec_net, 0.0, sp.esd);
    d.esd_flow_kw = -esd.p_ch_kw;
  } else {
    esd = storage_step(state.c_esd_kwh, 0.0, -elec_net, sp.esd);
    d.esd_flow_kw = esd.p_dc_kw;
  }
  d.c_esd_next_kwh = esd.c_next_kwh;
  const double p_grid_unclamped = -(elec_net + d.esd_flow_kw);
  d.p_grid_kw = std::clamp(p_grid_unclamped, sp.grid.p_min_kw, sp.grid.p_max_kw);
  d.elec_residual_kw = d.p_grid_kw + d.p_wt_kw + d.esd_flow_kw + d.conv.p_mt_kw -
                       action.realized.p_eb_kw - action.realized.p_p2g_kw -
                       d.p_load_kw;
  d.served_e_kw = d.p_load_kw + std::min(0.0, d.elec_residual_kw);

  // (e) gas closure
  const double q_grid_unclamped = d.q_load_m3 + action.realized.q_mt_m3 - d.conv.q_p2g_m3;
  d.q_grid_m3 = std::clamp(q_grid_unclamped, sp.grid.q_min_m3, sp.grid.q_max_m3);
  d.gas_residual_m3 =
      d.q_grid_m3 + d.conv.q_p2g_m3 - action.realized.q_mt_m3 - d.q_load_m3;
  d.served_g_m3 = d.q_load_m3 + std::min(0.0, d.gas_residual_m3);

  // indoor temperature follows the heat actually delivered to the building
  d.t_in_next_c =
      indoor_temp_from_heat(d.served_h_kw, state.t_in_prev_c, day.t_out_c[hi],
                            sp.building);
  return d;
}

void revenue_and_cost(const DispatchResult& d, const SystemParams& sp,
                      double& revenue, double& cost) {
  const double sell_e = std::max(0.0, -d.p_grid_kw);
  const double sell_g = std::max(0.0, -d.q_grid_m3);
  const double buy_e = std::max(0.0, d.p_grid_kw);
  const double buy_g = std::max(0.0, d.q_grid_m3);

  revenue = d.action.price_p * d.served_e_kw + d.action.price_q * d.served_g_m3 +
            d.action.price_h * d.served_h_kw +
            sp.sell_ratio * d.grid_buy_price_e * sell_e +
            sp.sell_ratio * d.grid_buy_price_g * sell_g;

  cost = buy_e * d.grid_buy_price_e + buy_g * d.grid_buy_price_g +
         sp.gamma_ch * d.h_cut_kw +
         sp.flex_e.gamma_comp * std::max(d.p_shift_kw, 0.0) +
         sp.flex_g.gamma_comp * std::max(d.q_shift_m3, 0.0);
}

void penalties(const EnvState& state_before, const DecodedAction& action,
               const DispatchResult& d, const SystemParams& sp,
               const StorageParams& hsd_effective, double& c1, double& c2) {
  c1 = 0.0;
  for (int i = 0; i < 6; ++i) {
    const auto s = static_cast<size_t>(i);
    const double cur = action.requested_norm[s];
    const double prev = action.prev_norm[s];
    c1 += sp.penalty.delta1[s] * std::max(cur - prev - sp.penalty.a_umax[s], 0.0);
    c1 += sp.penalty.delta2[s] * std::max(prev - cur - sp.penalty.a_dmax[s], 0.0);
  }

  const double supply = d.conv.h_eb_kw + d.conv.h_mt_kw;
  const double stored = state_before.c_hsd_kwh;
  c2 = 0.0;
  if (supply + stored < d.h_load_kw) {
    c2 = sp.penalty.beta_lr * (d.h_load_kw - (supply + stored));
  } else if (supply > d.h_load_kw + hsd_effective.c_max_kwh - stored) {
    c2 = sp.penalty.beta_el *
         (supply - (d.h_load_kw + hsd_effective.c_max_kwh - stored));
  }
}

const DayProfile& Environment::current_day() const {
  return profiles_.days[static_cast<size_t>(state_.day_index)];
}

Environment::Environment(SystemParams sp, ProfileSet profiles, EnvOptions opt,
                         std::uint64_t seed)
    : sp_(std::move(sp)), profiles_(std::move(profiles)), opt_(opt), seed_(seed) {
  if (profiles_.days.empty())
    throw std::invalid_argument("Environment: empty profile set");
  tou_ = profiles_.days[0].tou();
  if (sp_.pricing.k_p <= 0 || sp_.pricing.k_q <= 0 || sp_.pricing.k_h <= 0)
    sp_.pricing.fill_gains(tou_);
  sp_.pricing.validate();
  sp_.validate();
  if (opt_.adversary == PerturbMode::Itdsa) opt_.attack.validate();

  hsd_eff_ = opt_.hsd_enabled ? sp_.hsd : StorageParams{};
  bounds_ = derive_obs_bounds(profiles_);
  rng_ = make_rng(seed_, 0);
  reset(0);
}

std::vector<double> Environment::reset(int episode) {
  state_ = EnvState{};
  state_.day_index = episode % static_cast<int>(profiles_.days.size());
  state_.c_esd_kwh = sp_.esd.c0_kwh;
  state_.c_hsd_kwh = hsd_eff_.c0_kwh;
  state_.t_in_prev_c = sp_.comfort.t_comfort_c;

  rng_ = make_rng(seed_, 1000 + static_cast<std::uint64_t>(episode));

  const DayProfile& day = current_day();
  state_.ledger_e = FlexLoadLedger{Carrier::Electric, day.basic_e_kw, 0.0,
                                   sample_eta(sp_.flex_e, rng_), sp_.flex_e.gamma_comp,
                                   {}};
  state_.ledger_g = FlexLoadLedger{Carrier::Gas, day.basic_g_m3, 0.0,
                                   sample_eta(sp_.flex_g, rng_), sp_.flex_g.gamma_comp,
                                   {}};

  const PriceTriple b = benchmarks(tou_, sp_.pricing, 0);
  state_.prev_action_native = {
      0.5 * (sp_.conv.p2g_min_kw + sp_.conv.p2g_max_kw), 0.0,
      0.5 * (sp_.conv.mt_min_m3 + sp_.conv.mt_max_m3), b.heat, b.elec, b.gas};
  return observation();
}

std::vector<double> Environment::observation() const {
  return observe(state_, sp_, current_day(), bounds_, opt_.adversary,
                 opt_.attack, opt_.budget);
}

StepResult Environment::step(const std::array<double, 6>& raw_action) {
  if (state_.done) throw std::runtime_error("Environment::step: episode is done");

  const DayProfile& day = current_day();
  const DecodedAction decoded =
      decode_action(raw_action, state_, sp_, tou_, opt_.idr_enabled);

  const EnvState before = state_;
  DispatchResult d = dispatch(state_, decoded, sp_, day, tou_, rng_, hsd_eff_);

  StepResult r;
  revenue_and_cost(d, sp_, r.info.revenue, r.info.cost);
  penalties(before, decoded, d, sp_, hsd_eff_, r.info.c1, r.info.c2);
  r.reward = r.info.revenue - r.info.cost - r.info.c1 - r.info.c2;

  state_.c_esd_kwh = d.c_esd_next_kwh;
  state_.c_hsd_kwh = d.c_hsd_next_kwh;
  state_.t_in_prev_c = d.t_in_next_c;
  state_.prev_action_native = decoded.realized.as_array();
  state_.hour += 1;
  state_.done = state_.hour >= 24;

  r.done = state_.done;
  r.info.dispatch = std::move(d);
  r.observation = observation();
  return r;
}

}  // namespace iesdr
