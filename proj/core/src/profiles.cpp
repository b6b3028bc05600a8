#include "iesdr/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "iesdr/rng.hpp"

namespace iesdr {

namespace {

constexpr const char* kColumns[] = {"hour",       "t_out_c",    "wt_kw",
                                    "basic_e_kw", "basic_g_m3", "basic_h_kw",
                                    "tou_e",      "tou_g",      "tou_h"};

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

double parse_double(const std::string& s, int line_no) {
  try {
    size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite");
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("profiles: bad numeric value '" + s + "' on line " +
                             std::to_string(line_no));
  }
}

double gauss_bump(double h, double center, double width) {
  const double z = (h - center) / width;
  return std::exp(-z * z);
}

}  // namespace

ProfileSet load_profiles(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("profiles: cannot open " + path);

  std::string header;
  if (!std::getline(in, header)) throw std::runtime_error("profiles: empty file");
  if (!header.empty() && header.back() == '\r') header.pop_back();

  const auto names = split_csv_line(header);
  std::map<std::string, int> col;
  for (size_t i = 0; i < names.size(); ++i) col[names[i]] = static_cast<int>(i);
  for (const char* want : kColumns)
    if (!col.count(want))
      throw std::runtime_error(std::string("profiles: missing column ") + want);

  std::vector<std::array<double, 9>> rows;
  std::string line;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() < names.size())
      throw std::runtime_error("profiles: short row on line " + std::to_string(line_no));
    std::array<double, 9> row{};
    for (int c = 0; c < 9; ++c)
      row[static_cast<size_t>(c)] =
          parse_double(fields[static_cast<size_t>(col[kColumns[c]])], line_no);
    rows.push_back(row);
  }

  if (rows.empty() || rows.size() % 24 != 0)
    throw std::runtime_error("profiles: row count must be a positive multiple of 24, got " +
                             std::to_string(rows.size()));

  ProfileSet set;
  for (size_t d = 0; d < rows.size() / 24; ++d) {
    DayProfile day;
    for (int h = 0; h < 24; ++h) {
      const auto& r = rows[d * 24 + static_cast<size_t>(h)];
      if (static_cast<int>(r[0]) != h)
        throw std::runtime_error("profiles: expected hour " + std::to_string(h) +
                                 " in day " + std::to_string(d));
      day.t_out_c.push_back(r[1]);
      day.wt_kw.push_back(r[2]);
      day.basic_e_kw.push_back(r[3]);
      day.basic_g_m3.push_back(r[4]);
      day.basic_h_kw.push_back(r[5]);
      day.tou_e.push_back(r[6]);
      day.tou_g.push_back(r[7]);
      day.tou_h.push_back(r[8]);
    }
    day.tou();  // validates tariff positivity
    set.days.push_back(std::move(day));
  }
  return set;
}

void save_profiles(const ProfileSet& set, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("profiles: cannot write " + path);
  out << "hour,t_out_c,wt_kw,basic_e_kw,basic_g_m3,basic_h_kw,tou_e,tou_g,tou_h\n";
  char buf[64];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out << ',' << buf;
  };
  for (const auto& day : set.days) {
    for (int h = 0; h < 24; ++h) {
      const auto i = static_cast<size_t>(h);
      out << h;
      put(day.t_out_c[i]);
      put(day.wt_kw[i]);
      put(day.basic_e_kw[i]);
      put(day.basic_g_m3[i]);
      put(day.basic_h_kw[i]);
      put(day.tou_e[i]);
      put(day.tou_g[i]);
      put(day.tou_h[i]);
      out << '\n';
    }
  }
  if (!out) throw std::runtime_error("profiles: write failed for " + path);
}

ProfileSet generate_profiles(std::uint64_t seed, const GeneratorOptions& opt,
                             const BuildingParams& building, double t_comfort_c) {
  if (opt.days <= 0) throw std::invalid_argument("generate_profiles: days must be positive");
  ProfileSet set;
  auto rng = make_rng(seed, 17);

  // Static TOU tariffs: off-peak night, peaks at midday and evening.
  auto tou_e_at = [](int h) {
    if (h >= 23 || h < 7) return 0.40;
    if ((h >= 10 && h < 15) || (h >= 18 && h < 22)) return 1.20;
    return 0.75;
  };
  auto tou_g_at = [](int h) {
    if (h >= 23 || h < 7) return 1.80;
    if ((h >= 10 && h < 15) || (h >= 18 && h < 22)) return 3.00;
    return 2.40;
  };
  const double tou_h_flat = 0.80;

  for (int d = 0; d < opt.days; ++d) {
    DayProfile day;
    const double temp_shift = normal(rng, 0.0, opt.temp_day_shift_c);
    const double wt_scale = 1.0 + opt.day_load_jitter *
                                      (2.0 * uniform01(rng) - 1.0) * 1.5;
    const double e_scale = 1.0 + opt.day_load_jitter * (2.0 * uniform01(rng) - 1.0);
    const double g_scale = 1.0 + opt.day_load_jitter * (2.0 * uniform01(rng) - 1.0);

    for (int h = 0; h < 24; ++h) {
      const double hh = static_cast<double>(h);
      const double t_out = opt.temp_mean_c -
                           opt.temp_swing_c * std::cos(2.0 * M_PI * (hh - 14.0) / 24.0) +
                           temp_shift + normal(rng, 0.0, opt.temp_hour_jitter_c);
      const double wt =
          std::max(0.0, (260.0 + 120.0 * std::cos(2.0 * M_PI * (hh - 2.0) / 24.0)) *
                            wt_scale * (1.0 + opt.hour_load_jitter * normal(rng, 0.0, 1.0)));
      const double be = (220.0 + 100.0 * gauss_bump(hh, 9.5, 2.2) +
                         130.0 * gauss_bump(hh, 19.5, 2.2)) *
                        e_scale * (1.0 + opt.hour_load_jitter * normal(rng, 0.0, 1.0));
      const double bg = (18.0 + 8.0 * gauss_bump(hh, 8.5, 2.0) +
                         12.0 * gauss_bump(hh, 19.0, 2.5)) *
                        g_scale * (1.0 + opt.hour_load_jitter * normal(rng, 0.0, 1.0));
      // Steady-state demand at the comfort target.
      const double bh =
          building_heat_demand(t_comfort_c, t_comfort_c, t_out, building);

      day.t_out_c.push_back(t_out);
      day.wt_kw.push_back(wt);
      day.basic_e_kw.push_back(std::max(0.0, be));
      day.basic_g_m3.push_back(std::max(0.0, bg));
      day.basic_h_kw.push_back(std::max(0.0, bh));
      day.tou_e.push_back(tou_e_at(h));
      day.tou_g.push_back(tou_g_at(h));
      day.tou_h.push_back(tou_h_flat);
    }
    set.days.push_back(std::move(day));
  }
  return set;
}

ObsBounds derive_obs_bounds(const ProfileSet& set) {
  if (set.days.empty()) throw std::invalid_argument("derive_obs_bounds: empty profile set");

  auto minmax = [&](auto getter) {
    double lo = 1e300, hi = -1e300;
    for (const auto& day : set.days)
      for (int h = 0; h < 24; ++h) {
        const double v = getter(day, h);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    return std::pair<double, double>{lo, hi};
  };

  const auto [pe_lo, pe_hi] = minmax([](const DayProfile& d, int h) { return d.tou_e[(size_t)h]; });
  const auto [pg_lo, pg_hi] = minmax([](const DayProfile& d, int h) { return d.tou_g[(size_t)h]; });
  const auto [wt_lo, wt_hi] = minmax([](const DayProfile& d, int h) { return d.wt_kw[(size_t)h]; });
  const auto [be_lo, be_hi] = minmax([](const DayProfile& d, int h) { return d.basic_e_kw[(size_t)h]; });
  const auto [bg_lo, bg_hi] = minmax([](const DayProfile& d, int h) { return d.basic_g_m3[(size_t)h]; });
  const auto [bh_lo, bh_hi] = minmax([](const DayProfile& d, int h) { return d.basic_h_kw[(size_t)h]; });

  auto widen = [](double lo, double hi, double frac) {
    const double pad = std::max(1e-6, frac * std::max(std::abs(lo), std::abs(hi)));
    return std::pair<double, double>{lo - pad, hi + pad};
  };

  ObsBounds b;
  b.lo[0] = 0.0;  b.hi[0] = 1.0;   // SOC ESD
  b.lo[1] = 0.0;  b.hi[1] = 1.0;   // SOC HSD
  std::tie(b.lo[2], b.hi[2]) = widen(pe_lo, pe_hi, 0.05);
  std::tie(b.lo[3], b.hi[3]) = widen(pg_lo, pg_hi, 0.05);
  std::tie(b.lo[4], b.hi[4]) = widen(std::min(0.0, wt_lo), wt_hi, 0.05);
  std::tie(b.lo[5], b.hi[5]) = widen(be_lo, be_hi, 0.10);
  std::tie(b.lo[6], b.hi[6]) = widen(bg_lo, bg_hi, 0.10);
  // Margin covers indoor-temperature transients and moderate attack
  // inflation; larger falsified values clip at the box edge.
  std::tie(b.lo[7], b.hi[7]) = widen(bh_lo, bh_hi, 0.15);
  b.lo[8] = 0.0;  b.hi[8] = 23.0;  // hour index
  return b;
}

}  // namespace iesdr
