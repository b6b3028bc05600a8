#include "iesdr/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace iesdr {

namespace {

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

void check_hour(const TouSchedule& tou, int hour) {
  if (hour < 0 || hour >= static_cast<int>(tou.elec.size()))
    throw std::out_of_range("pricing: hour out of range");
}

}  // namespace

TouSchedule TouSchedule::from_hourly(std::vector<double> elec,
                                     std::vector<double> gas,
                                     std::vector<double> heat) {
  TouSchedule t;
  t.elec = std::move(elec);
  t.gas = std::move(gas);
  t.heat = std::move(heat);
  require(!t.elec.empty() && t.elec.size() == t.gas.size() &&
              t.elec.size() == t.heat.size(),
          "TouSchedule: hourly schedules must be nonempty and equal length");
  t.elec_peak = *std::max_element(t.elec.begin(), t.elec.end());
  t.elec_offpeak = *std::min_element(t.elec.begin(), t.elec.end());
  t.gas_peak = *std::max_element(t.gas.begin(), t.gas.end());
  t.gas_offpeak = *std::min_element(t.gas.begin(), t.gas.end());
  t.validate();
  return t;
}

void TouSchedule::validate() const {
  for (double v : elec)
    require(v >= elec_offpeak && v <= elec_peak,
            "TouSchedule: hourly elec price outside [offpeak, peak]");
  for (double v : gas)
    require(v >= gas_offpeak && v <= gas_peak,
            "TouSchedule: hourly gas price outside [offpeak, peak]");
  for (double v : heat) require(v > 0, "TouSchedule: heat price must be positive");
  require(elec_offpeak > 0 && gas_offpeak > 0,
          "TouSchedule: prices must be positive");
}

void PricingParams::fill_gains(const TouSchedule& tou) {
  k_p = (l_p * tou.elec_peak - l_p * tou.elec_offpeak) / 4.0;  // levels span [-2,2]
  k_q = (l_q * tou.gas_peak - l_q * tou.gas_offpeak) / 4.0;
  const double h_mean =
      std::accumulate(tou.heat.begin(), tou.heat.end(), 0.0) /
      static_cast<double>(tou.heat.size());
  k_h = (l_h - 1.0) * h_mean;  // heat level spans [0,1]
}

PricingParams PricingParams::defaults_for(const TouSchedule& tou) {
  PricingParams p;
  p.fill_gains(tou);
  return p;
}

void PricingParams::validate() const {
  require(k_p > 0 && k_q > 0 && k_h > 0, "PricingParams: gains must be positive");
  require(zeta_p > 0 && zeta_q > 0, "PricingParams: blend coefficients must be positive");
  require(l_p > 0 && l_q > 0 && l_h >= 1.0,
          "PricingParams: thresholds must be positive (heat >= 1)");
}

PriceTriple benchmarks(const TouSchedule& tou, const PricingParams& p, int hour) {
  check_hour(tou, hour);
  PriceTriple b;
  b.elec = p.zeta_p * (tou.elec_peak + tou.elec_offpeak);
  b.gas = p.zeta_q * (tou.gas_peak + tou.gas_offpeak);
  b.heat = tou.heat[static_cast<size_t>(hour)];
  return b;
}

PriceBand elec_band(const TouSchedule& tou, const PricingParams& p) {
  return {p.l_p * tou.elec_offpeak, p.l_p * tou.elec_peak};
}

PriceBand gas_band(const TouSchedule& tou, const PricingParams& p) {
  return {p.l_q * tou.gas_offpeak, p.l_q * tou.gas_peak};
}

PriceBand heat_band(const TouSchedule& tou, const PricingParams& p, int hour) {
  check_hour(tou, hour);
  const double h = tou.heat[static_cast<size_t>(hour)];
  return {h, p.l_h * h};
}

PriceTriple realtime_prices(const LevelTriple& levels, const TouSchedule& tou,
                            const PricingParams& p, int hour) {
  require(std::isfinite(levels.tse) && levels.tse >= -2.0 && levels.tse <= 2.0,
          "realtime_prices: TSE level outside [-2,2]");
  require(std::isfinite(levels.tsq) && levels.tsq >= -2.0 && levels.tsq <= 2.0,
          "realtime_prices: TSQ level outside [-2,2]");
  require(std::isfinite(levels.ch) && levels.ch >= 0.0 && levels.ch <= 1.0,
          "realtime_prices: CH level outside [0,1]");

  const PriceTriple b = benchmarks(tou, p, hour);
  const PriceBand be = elec_band(tou, p);
  const PriceBand bg = gas_band(tou, p);
  const PriceBand bh = heat_band(tou, p, hour);

  PriceTriple out;
  out.elec = std::clamp(b.elec + levels.tse * p.k_p, be.lo, be.hi);
  out.gas = std::clamp(b.gas + levels.tsq * p.k_q, bg.lo, bg.hi);
  out.heat = std::clamp(b.heat + levels.ch * p.k_h, bh.lo, bh.hi);
  return out;
}

LevelTriple levels_from_prices(const PriceTriple& prices, const TouSchedule& tou,
                               const PricingParams& p, int hour) {
  require(p.k_p != 0 && p.k_q != 0 && p.k_h != 0,
          "levels_from_prices: zero gain");
  const PriceTriple b = benchmarks(tou, p, hour);
  LevelTriple out;
  out.tse = std::clamp((prices.elec - b.elec) / p.k_p, -2.0, 2.0);
  out.tsq = std::clamp((prices.gas - b.gas) / p.k_q, -2.0, 2.0);
  out.ch = std::clamp((prices.heat - b.heat) / p.k_h, 0.0, 1.0);
  return out;
}

}  // namespace iesdr
