#pragma once

#include <random>
#include <vector>

namespace iesdr {

// ---------------------------------------------------------------------------
// Building thermodynamics and thermal comfort
// ---------------------------------------------------------------------------

struct BuildingParams {
  double k_w_m2c = 0.5;        // heat transfer coefficient K, W/(m^2*C)
  double area_m2 = 2400.0;     // envelope surface area F
  double volume_m3 = 36000.0;  // building volume V
  double c_air_kj_kgc = 1.007; // specific heat of indoor air
  double rho_air_kg_m3 = 1.2;  // indoor air density
  double dt_h = 1.0;           // step length, fixed at 1 h

  // K*F in kW/C
  double kf_kw_c() const { return k_w_m2c * area_m2 / 1000.0; }
  // c_air*rho_air*V in kWh/C
  double thermal_mass_kwh_c() const {
    return c_air_kj_kgc * rho_air_kg_m3 * volume_m3 / 3600.0;
  }
  void validate() const;
};

struct ComfortParams {
  double t_skin_c = 33.5;   // skin comfort temperature T_s
  double clothing = 1.5;    // clothing thermal resistance I_cl
  double metabolic = 0.0;   // metabolic rate M; see calibrated()
  double day_band = 0.5;    // |PMV| limit, daytime hours
  double night_band = 0.9;  // |PMV| limit, nighttime hours
  double t_comfort_c = 21.0;

  // M is not a published constant; it is fixed once so that the comfort
  // temperature scores PMV = 0.
  static ComfortParams calibrated(double t_skin = 33.5, double clothing = 1.5,
                                  double t_comfort = 21.0);
  void validate() const;
};

// PMV = 2.43 - 3.76 (T_s - T_in) / (M (I_cl + 0.1)); increasing in T_in.
double pmv(double t_in_c, const ComfortParams& c);

// |PMV| limit for a 0-based hour index: 0.5 for hours 7..18, 0.9 for hours
// 0..6 and 19..23. Throws std::out_of_range outside [0,24).
double pmv_band(int hour);

// Lowest indoor temperature whose PMV magnitude stays within the hour's band.
double min_band_temperature(int hour, const ComfortParams& c);

// Heat power (kW) required to reach t_in_target at the end of the step given
// the previous indoor temperature and the outdoor temperature.
double building_heat_demand(double t_in_target_c, double t_in_prev_c,
                            double t_out_c, const BuildingParams& b);

// Closed-form inverse of building_heat_demand in its first argument.
double indoor_temp_from_heat(double heat_kw, double t_in_prev_c,
                             double t_out_c, const BuildingParams& b);

// Maximum cuttable heat power: demand at the comfort target minus demand at
// the band-limited minimum temperature. Never negative.
double max_cuttable_heat(double t_in_prev_c, double t_out_c, int hour,
                         const BuildingParams& b, const ComfortParams& c);

// ---------------------------------------------------------------------------
// Price-responsive flexible loads (time-shift with probabilistic payback)
// ---------------------------------------------------------------------------

enum class Carrier { Electric, Gas };

struct FlexLoadParams {
  double sigma_mean = 0.2;  // sensitivity factor distribution, clamped [0,1]
  double sigma_std = 0.2;
  double eta_mean = 10.0;   // patience factor distribution (h), clamped [1,24]
  double eta_std = 6.0;
  double gamma_comp = 0.1;  // compensation per positively shifted unit
};

struct FlexShiftEntry {
  int origin_hour = 0;
  double amount = 0.0;  // signed; carries the sign of the originating shift
};

struct FlexLoadLedger {
  Carrier carrier = Carrier::Electric;
  std::vector<double> basic;    // per-hour base demand (kW or m3/h)
  double sigma = 0.2;           // sensitivity sampled per step by the caller
  double eta_patience = 10.0;   // patience sampled per episode
  double gamma_comp = 0.1;
  std::vector<FlexShiftEntry> outstanding;
};

struct FlexShiftResult {
  double served = 0.0;   // basic - shifted + paybacks
  double shifted = 0.0;  // basic * clamp(sigma * level, -1, 1)
  double payback = 0.0;  // sum of entries repaid this hour
};

// One hour of flexible-load response at the given price level. Each
// outstanding entry is repaid with probability
//   clip(-level * sign(amount) / 2 + (hour - origin) / eta, 0, 1)
// and removed once repaid. Throws on non-finite level or hour out of range.
FlexShiftResult flex_shift(FlexLoadLedger& ledger, int hour, double price_level,
                           std::mt19937_64& rng);

double sample_sigma(const FlexLoadParams& p, std::mt19937_64& rng);
double sample_eta(const FlexLoadParams& p, std::mt19937_64& rng);

// ---------------------------------------------------------------------------
// Storage devices
// ---------------------------------------------------------------------------

struct StorageParams {
  double c_max_kwh = 0.0;
  double c_min_kwh = 0.0;
  double c0_kwh = 0.0;
  double p_ch_max_kw = 0.0;
  double p_dc_max_kw = 0.0;
  double eta_ch = 1.0;
  double eta_dc = 1.0;
  double dt_h = 1.0;

  static StorageParams esd_defaults();
  static StorageParams hsd_defaults();
  void validate() const;
};

struct StorageStepResult {
  double c_next_kwh = 0.0;
  double soc = 0.0;
  double p_ch_kw = 0.0;  // realized, after power and capacity clamps
  double p_dc_kw = 0.0;
};

// Applies one step of the storage balance. Requests beyond power or capacity
// limits are clamped and the realized values reported; requesting charge and
// discharge simultaneously is a contract violation.
StorageStepResult storage_step(double c_kwh, double p_ch_kw, double p_dc_kw,
                               const StorageParams& s);

// ---------------------------------------------------------------------------
// Energy converters: electric boiler, power-to-gas, micro gas turbine
// ---------------------------------------------------------------------------

struct ConverterParams {
  double eb_eta = 0.99;
  double eb_h_max_kw = 300.0;

  double p2g_eta = 0.6;
  double p2g_min_kw = 100.0;
  double p2g_max_kw = 500.0;
  double p2g_ramp_down_kw = -200.0;
  double p2g_ramp_up_kw = 200.0;

  double mt_eta_e = 0.4;
  double mt_eta_h = 0.5;
  double mt_eta_loss = 0.1;
  double mt_min_m3 = 10.0;
  double mt_max_m3 = 40.0;
  double mt_ramp_down_m3 = -10.0;
  double mt_ramp_up_m3 = 10.0;

  double hhv_kwh_m3 = 9.7;  // gas calorific value; not a published constant

  double eb_p_max_kw() const { return eb_h_max_kw / eb_eta; }
  void validate() const;
};

struct ConverterFlows {
  double h_eb_kw = 0.0;
  double q_p2g_m3 = 0.0;
  double p_mt_kw = 0.0;
  double h_mt_kw = 0.0;
};

// Device conversion laws. Inputs must lie in [0, max]; operational minima are
// the caller's concern (actions are decoded onto them before dispatch).
ConverterFlows converters(double p_eb_kw, double p_p2g_kw, double q_mt_m3,
                          const ConverterParams& cp);

struct ClampResult {
  double value = 0.0;
  bool infeasible = false;  // range and ramp interval did not intersect
};

// Nearest feasible value to `requested` in [lo,hi] intersected with
// [previous+ramp_down, previous+ramp_up]. If the intersection is empty the
// range endpoint nearest the ramp interval is returned and flagged.
ClampResult clamp_ramp(double requested, double previous, double lo, double hi,
                       double ramp_down, double ramp_up);

}  // namespace iesdr
