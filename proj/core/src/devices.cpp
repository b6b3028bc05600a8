#include "iesdr/devices.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "iesdr/rng.hpp"

namespace iesdr {

namespace {

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

int sign_of(double x) { return (x > 0.0) - (x < 0.0); }

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

}  // namespace

void BuildingParams::validate() const {
  require(k_w_m2c > 0 && area_m2 > 0 && volume_m3 > 0 && c_air_kj_kgc > 0 &&
              rho_air_kg_m3 > 0 && dt_h > 0,
          "BuildingParams: all fields must be strictly positive");
}

ComfortParams ComfortParams::calibrated(double t_skin, double clothing,
                                        double t_comfort) {
  ComfortParams c;
  c.t_skin_c = t_skin;
  c.clothing = clothing;
  c.t_comfort_c = t_comfort;
  c.metabolic = 3.76 * (t_skin - t_comfort) / (2.43 * (clothing + 0.1));
  return c;
}

void ComfortParams::validate() const {
  require(metabolic > 0 && clothing > 0, "ComfortParams: M and I_cl must be positive");
  require(day_band > 0 && day_band <= night_band,
          "ComfortParams: 0 < day_band <= night_band");
}

double pmv(double t_in_c, const ComfortParams& c) {
  return 2.43 - 3.76 * (c.t_skin_c - t_in_c) / (c.metabolic * (c.clothing + 0.1));
}

double pmv_band(int hour) {
  if (hour < 0 || hour >= 24) throw std::out_of_range("pmv_band: hour out of [0,24)");
  return (hour >= 7 && hour <= 18) ? 0.5 : 0.9;
}

double min_band_temperature(int hour, const ComfortParams& c) {
  const double band = pmv_band(hour);
  // PMV(T) = -band, solved for T.
  return c.t_skin_c - (2.43 + band) * c.metabolic * (c.clothing + 0.1) / 3.76;
}

double building_heat_demand(double t_in_target_c, double t_in_prev_c,
                            double t_out_c, const BuildingParams& b) {
  const double kf = b.kf_kw_c();
  const double cap = b.thermal_mass_kwh_c();
  const double num = (t_in_target_c - t_out_c) +
                     kf / cap * b.dt_h * (t_in_prev_c - t_out_c);
  const double den = 1.0 / kf + b.dt_h / cap;
  return num / den;
}

double indoor_temp_from_heat(double heat_kw, double t_in_prev_c, double t_out_c,
                             const BuildingParams& b) {
  const double kf = b.kf_kw_c();
  const double cap = b.thermal_mass_kwh_c();
  const double den = 1.0 / kf + b.dt_h / cap;
  return heat_kw * den - kf / cap * b.dt_h * (t_in_prev_c - t_out_c) + t_out_c;
}

double max_cuttable_heat(double t_in_prev_c, double t_out_c, int hour,
                         const BuildingParams& b, const ComfortParams& c) {
  const double t_min = min_band_temperature(hour, c);
  if (t_min >= c.t_comfort_c) return 0.0;  // degenerate band
  const double h_comfort =
      building_heat_demand(c.t_comfort_c, t_in_prev_c, t_out_c, b);
  const double h_min = building_heat_demand(t_min, t_in_prev_c, t_out_c, b);
  return std::max(0.0, h_comfort - h_min);
}

FlexShiftResult flex_shift(FlexLoadLedger& ledger, int hour, double price_level,
                           std::mt19937_64& rng) {
  if (!std::isfinite(price_level))
    throw std::invalid_argument("flex_shift: non-finite price level");
  if (hour < 0 || hour >= static_cast<int>(ledger.basic.size()))
    throw std::out_of_range("flex_shift: hour out of range");

  const double basic = ledger.basic[static_cast<size_t>(hour)];
  const double shifted =
      basic * std::clamp(ledger.sigma * price_level, -1.0, 1.0);

  double payback = 0.0;
  auto it = ledger.outstanding.begin();
  while (it != ledger.outstanding.end()) {
    const double prob =
        clamp01(-price_level * sign_of(it->amount) / 2.0 +
                static_cast<double>(hour - it->origin_hour) / ledger.eta_patience);
    const double u = uniform01(rng);
    if (u < prob) {
      payback += it->amount;
      it = ledger.outstanding.erase(it);
    } else {
      ++it;
    }
  }

  if (shifted != 0.0) ledger.outstanding.push_back({hour, shifted});

  return {basic - shifted + payback, shifted, payback};
}

double sample_sigma(const FlexLoadParams& p, std::mt19937_64& rng) {
  return std::clamp(normal(rng, p.sigma_mean, p.sigma_std), 0.0, 1.0);
}

double sample_eta(const FlexLoadParams& p, std::mt19937_64& rng) {
  return std::clamp(normal(rng, p.eta_mean, p.eta_std), 1.0, 24.0);
}

StorageParams StorageParams::esd_defaults() {
  StorageParams s;
  s.c_max_kwh = 200.0;
  s.c_min_kwh = 20.0;
  s.c0_kwh = 100.0;
  s.p_ch_max_kw = 100.0;
  s.p_dc_max_kw = 100.0;
  s.eta_ch = 0.9;
  s.eta_dc = 0.9;
  return s;
}

StorageParams StorageParams::hsd_defaults() {
  StorageParams s;
  s.c_max_kwh = 180.0;
  s.c_min_kwh = 18.0;
  s.c0_kwh = 90.0;
  s.p_ch_max_kw = 90.0;
  s.p_dc_max_kw = 90.0;
  s.eta_ch = 1.0;
  s.eta_dc = 1.0;
  return s;
}

void StorageParams::validate() const {
  require(c_min_kwh <= c0_kwh && c0_kwh <= c_max_kwh,
          "StorageParams: need c_min <= c0 <= c_max");
  require(eta_ch > 0 && eta_ch <= 1 && eta_dc > 0 && eta_dc <= 1,
          "StorageParams: efficiencies must be in (0,1]");
  require(p_ch_max_kw >= 0 && p_dc_max_kw >= 0 && dt_h > 0,
          "StorageParams: powers and dt must be nonnegative");
}

StorageStepResult storage_step(double c_kwh, double p_ch_kw, double p_dc_kw,
                               const StorageParams& s) {
  if (p_ch_kw > 0.0 && p_dc_kw > 0.0)
    throw std::invalid_argument("storage_step: simultaneous charge and discharge");

  double ch = std::clamp(p_ch_kw, 0.0, s.p_ch_max_kw);
  double dc = std::clamp(p_dc_kw, 0.0, s.p_dc_max_kw);

  const double headroom = std::max(0.0, s.c_max_kwh - c_kwh);
  if (s.eta_ch * ch * s.dt_h > headroom) ch = headroom / (s.eta_ch * s.dt_h);

  const double stored = std::max(0.0, c_kwh - s.c_min_kwh);
  if (dc * s.dt_h / s.eta_dc > stored) dc = stored * s.eta_dc / s.dt_h;

  StorageStepResult r;
  r.p_ch_kw = ch;
  r.p_dc_kw = dc;
  r.c_next_kwh = c_kwh + (s.eta_ch * ch - dc / s.eta_dc) * s.dt_h;
  r.c_next_kwh = std::clamp(r.c_next_kwh, s.c_min_kwh, s.c_max_kwh);
  r.soc = s.c_max_kwh > 0.0 ? r.c_next_kwh / s.c_max_kwh : 0.0;
  return r;
}

void ConverterParams::validate() const {
  require(std::abs(mt_eta_e + mt_eta_h + mt_eta_loss - 1.0) < 1e-9,
          "ConverterParams: MT efficiencies must sum to 1");
  require(eb_eta > 0 && eb_eta < 1 && p2g_eta > 0 && p2g_eta < 1,
          "ConverterParams: efficiencies must be in (0,1)");
  require(p2g_min_kw <= p2g_max_kw && mt_min_m3 <= mt_max_m3,
          "ConverterParams: ranges must be ordered");
  require(p2g_ramp_down_kw <= p2g_ramp_up_kw && mt_ramp_down_m3 <= mt_ramp_up_m3,
          "ConverterParams: ramps must be ordered");
  require(hhv_kwh_m3 > 0, "ConverterParams: HHV must be positive");
}

ConverterFlows converters(double p_eb_kw, double p_p2g_kw, double q_mt_m3,
                          const ConverterParams& cp) {
  if (p_eb_kw < 0 || p_eb_kw > cp.eb_p_max_kw() + 1e-9)
    throw std::out_of_range("converters: EB power outside [0, max]");
  if (p_p2g_kw < 0 || p_p2g_kw > cp.p2g_max_kw + 1e-9)
    throw std::out_of_range("converters: P2G power outside [0, max]");
  if (q_mt_m3 < 0 || q_mt_m3 > cp.mt_max_m3 + 1e-9)
    throw std::out_of_range("converters: MT gas volume outside [0, max]");

  ConverterFlows f;
  f.h_eb_kw = cp.eb_eta * p_eb_kw;
  f.q_p2g_m3 = cp.p2g_eta * p_p2g_kw / cp.hhv_kwh_m3;
  f.p_mt_kw = (1.0 - cp.mt_eta_h - cp.mt_eta_loss) * q_mt_m3 * cp.hhv_kwh_m3;
  f.h_mt_kw = (1.0 - cp.mt_eta_e - cp.mt_eta_loss) * q_mt_m3 * cp.hhv_kwh_m3;
  return f;
}

ClampResult clamp_ramp(double requested, double previous, double lo, double hi,
                       double ramp_down, double ramp_up) {
  const double rlo = previous + ramp_down;
  const double rhi = previous + ramp_up;
  const double flo = std::max(lo, rlo);
  const double fhi = std::min(hi, rhi);
  if (flo > fhi) {
    // Ramp window lies entirely outside the range; take the nearer endpoint.
    return {rlo > hi ? hi : lo, true};
  }
  return {std::clamp(requested, flo, fhi), false};
}

}  // namespace iesdr
