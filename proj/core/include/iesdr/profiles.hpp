#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "iesdr/devices.hpp"
#include "iesdr/pricing.hpp"

namespace iesdr {

// One day of exogenous data, 24 hourly rows.
struct DayProfile {
  std::vector<double> t_out_c;
  std::vector<double> wt_kw;
  std::vector<double> basic_e_kw;
  std::vector<double> basic_g_m3;
  std::vector<double> basic_h_kw;  // nominal (steady-state) heat demand
  std::vector<double> tou_e;
  std::vector<double> tou_g;
  std::vector<double> tou_h;

  TouSchedule tou() const {
    return TouSchedule::from_hourly(tou_e, tou_g, tou_h);
  }
};

struct ProfileSet {
  std::vector<DayProfile> days;
};

// CSV contract: header
//   hour,t_out_c,wt_kw,basic_e_kw,basic_g_m3,basic_h_kw,tou_e,tou_g,tou_h
// one row per hour, 24 rows per day, days concatenated. Unknown columns are
// ignored; missing columns, non-24-multiple row counts and non-finite values
// are rejected.
ProfileSet load_profiles(const std::string& path);
void save_profiles(const ProfileSet& set, const std::string& path);

struct GeneratorOptions {
  int days = 8;
  // Deep-winter climate: the nominal heat demand then straddles the MT's
  // minimum co-generation, so heat tracking is a live control problem.
  double temp_mean_c = -22.0;
  double temp_swing_c = 6.0;
  // Weather noise makes the heat demand observation informative beyond what
  // the hour index already carries.
  double temp_day_shift_c = 3.0;
  double temp_hour_jitter_c = 2.0;
  double day_load_jitter = 0.10;
  double hour_load_jitter = 0.04;
};

// Seeded synthetic profile set: sinusoidal outdoor temperature, bimodal
// electric/gas load shapes, night-heavy wind, TOU tariffs with midday and
// evening peaks. The nominal heat column follows the building model at the
// comfort target.
ProfileSet generate_profiles(std::uint64_t seed, const GeneratorOptions& opt,
                             const BuildingParams& building,
                             double t_comfort_c = 21.0);

// Min-max normalization bounds for the nine observation components, derived
// from the profile set with margins for transients and attack inflation.
struct ObsBounds {
  std::array<double, 9> lo{};
  std::array<double, 9> hi{};
};

ObsBounds derive_obs_bounds(const ProfileSet& set);

}  // namespace iesdr
