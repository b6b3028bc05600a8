#pragma once

#include <array>
#include <vector>

namespace iesdr {

// Time-of-use tariff schedules. Peak/off-peak scalars are the extremes of the
// hourly schedules and anchor both benchmark prices and real-time price bands.
struct TouSchedule {
  std::vector<double> elec;  // per-hour, CNY/kWh
  std::vector<double> gas;   // per-hour, CNY/m3
  std::vector<double> heat;  // per-hour, CNY/kWh
  double elec_peak = 0.0;
  double elec_offpeak = 0.0;
  double gas_peak = 0.0;
  double gas_offpeak = 0.0;

  // Derives the peak/off-peak scalars from the hourly schedules.
  static TouSchedule from_hourly(std::vector<double> elec, std::vector<double> gas,
                                 std::vector<double> heat);
  void validate() const;
};

struct PricingParams {
  double zeta_p = 0.5;  // benchmark blend coefficients
  double zeta_q = 0.5;
  double k_p = 0.0;     // level-to-price gains; see defaults_for()
  double k_q = 0.0;
  double k_h = 0.0;
  double l_p = 1.0;     // band threshold coefficients
  double l_q = 1.0;
  double l_h = 1.5;

  // Gains sized so the full level range spans the price band exactly:
  // electricity/gas levels in [-2,2], heat level in [0,1]. fill_gains keeps
  // the blend and threshold coefficients already set on the object.
  void fill_gains(const TouSchedule& tou);
  static PricingParams defaults_for(const TouSchedule& tou);
  void validate() const;
};

struct PriceTriple {
  double elec = 0.0;
  double gas = 0.0;
  double heat = 0.0;
};

struct LevelTriple {
  double tse = 0.0;  // electricity shift level, [-2,2]
  double tsq = 0.0;  // gas shift level, [-2,2]
  double ch = 0.0;   // heat cut level, [0,1]
};

struct PriceBand {
  double lo = 0.0;
  double hi = 0.0;
};

// Benchmark prices: blend of TOU peak and off-peak for electricity and gas,
// the hourly TOU price for heat.
PriceTriple benchmarks(const TouSchedule& tou, const PricingParams& p, int hour);

// Admissible real-time price bands for the hour.
PriceBand elec_band(const TouSchedule& tou, const PricingParams& p);
PriceBand gas_band(const TouSchedule& tou, const PricingParams& p);
PriceBand heat_band(const TouSchedule& tou, const PricingParams& p, int hour);

// Real-time prices: benchmark plus level*gain, clamped into the band.
// Throws if a level is outside its admissible range.
PriceTriple realtime_prices(const LevelTriple& levels, const TouSchedule& tou,
                            const PricingParams& p, int hour);

// Inverse map from in-band prices back to demand-response levels, clamped to
// the level ranges. Exact inverse of realtime_prices when no clamp binds.
LevelTriple levels_from_prices(const PriceTriple& prices, const TouSchedule& tou,
                               const PricingParams& p, int hour);

}  // namespace iesdr
