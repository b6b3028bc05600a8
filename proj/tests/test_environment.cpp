#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "iesdr/environment.hpp"
#include "iesdr/rng.hpp"

using namespace iesdr;

namespace {

DayProfile flat_day(double t_out, double wt, double be, double bg) {
  DayProfile d;
  for (int h = 0; h < 24; ++h) {
    d.t_out_c.push_back(t_out);
    d.wt_kw.push_back(wt);
    d.basic_e_kw.push_back(be);
    d.basic_g_m3.push_back(bg);
    d.basic_h_kw.push_back(std::max(0.1, 1.2 * (21.0 - t_out)));
    d.tou_e.push_back(h < 7 ? 0.4 : (h < 15 ? 1.2 : 0.75));
    d.tou_g.push_back(h < 7 ? 1.8 : (h < 15 ? 3.0 : 2.4));
    d.tou_h.push_back(0.45);
  }
  return d;
}

ProfileSet one_day_set(double t_out = -10.0, double wt = 200.0, double be = 250.0,
                       double bg = 20.0) {
  ProfileSet set;
  set.days.push_back(flat_day(t_out, wt, be, bg));
  return set;
}

Environment make_env(EnvOptions opt = {}, std::uint64_t seed = 11,
                     ProfileSet set = one_day_set()) {
  SystemParams sp = SystemParams::defaults();
  return Environment(sp, std::move(set), opt, seed);
}

// dispatch with everything pinned to zero, bypassing the decode minima
DecodedAction zero_action(const Environment& env) {
  DecodedAction a;
  const PriceTriple b = benchmarks(env.tou(), env.params().pricing, 0);
  a.realized.price_h = b.heat;
  a.realized.price_p = b.elec;
  a.realized.price_q = b.gas;
  return a;
}

}  // namespace

TEST_CASE("observe: deterministic, normalized, hour component at the ends") {
  Environment env = make_env();
  const auto obs1 = env.observation();
  const auto obs2 = env.observation();
  CHECK(obs1 == obs2);
  REQUIRE(obs1.size() == 9);
  for (double v : obs1) {
    CHECK(v >= -1.0);
    CHECK(v <= 1.0);
  }
  CHECK(obs1[8] == doctest::Approx(-1.0));  // hour 0
}

TEST_CASE("observe: component pinned at its profile maximum normalizes to 1") {
  // flat profiles: wt equals both min and max, padded by the margin; use the
  // SOC component instead, which has natural [0,1] bounds
  SystemParams sp = SystemParams::defaults();
  ProfileSet set = one_day_set();
  Environment env(sp, set, {}, 1);
  EnvState st = env.state();
  st.c_esd_kwh = sp.esd.c_max_kwh;  // SOC = 1
  const auto obs = observe(st, sp, set.days[0], env.bounds(), PerturbMode::None,
                           {}, {});
  CHECK(obs[0] == doctest::Approx(1.0));
}

TEST_CASE("observe: ITDSA at the window onset equals the clean observation") {
  EnvOptions attacked;
  attacked.adversary = PerturbMode::Itdsa;
  attacked.attack.window_start = 0;
  attacked.attack.window_end = 24;
  Environment env_a = make_env(attacked);
  Environment env_c = make_env();
  CHECK(env_a.reset(0) == env_c.reset(0));  // hour 0 = onset: multiplier 1
}

TEST_CASE("observe: ITDSA inflates the heat component after the onset") {
  EnvOptions attacked;
  attacked.adversary = PerturbMode::Itdsa;
  attacked.attack.window_start = 0;
  attacked.attack.window_end = 24;
  Environment env_a = make_env(attacked);
  Environment env_c = make_env();
  env_a.reset(0);
  env_c.reset(0);
  const std::array<double, 6> act{0.0, -1.0, 0.0, 0.0, 0.0, 0.0};
  StepResult ra = env_a.step(act), rc = env_c.step(act);
  for (int t = 1; t < 6; ++t) {
    CHECK(ra.observation[7] > rc.observation[7]);
    ra = env_a.step(act);
    rc = env_c.step(act);
  }
}

TEST_CASE("falsified heat demand composes the scaled temperatures") {
  SystemParams sp = SystemParams::defaults();
  ProfileSet set = one_day_set();
  Environment env(sp, set, {}, 3);
  ItdsaSpec spec;
  spec.window_start = 0;
  spec.window_end = 24;
  EnvState st = env.state();
  st.hour = 2;
  st.t_in_prev_c = 21.0;
  const double expect = building_heat_demand(
      itdsa_multiplier(2, spec) * 21.0, itdsa_multiplier(1, spec) * 21.0,
      set.days[0].t_out_c[2], sp.building);
  CHECK(falsified_heat_demand(st, sp, set.days[0], spec) ==
        doctest::Approx(expect).epsilon(1e-12));
  // clean multiplier path reproduces the true demand exactly
  spec.window_start = 20;
  spec.window_end = 24;
  CHECK(falsified_heat_demand(st, sp, set.days[0], spec) ==
        doctest::Approx(building_heat_demand(21.0, 21.0, set.days[0].t_out_c[2],
                                             sp.building)));
}

TEST_CASE("decode_action: affine endpoints and the published P2G mapping") {
  Environment env = make_env();
  const auto lo =
      decode_action({-1, -1, -1, -1, -1, -1}, env.state(), env.params(),
                    env.tou(), true);
  CHECK(lo.requested_native[0] == doctest::Approx(100.0));
  CHECK(lo.requested_native[1] == doctest::Approx(0.0));
  CHECK(lo.requested_native[2] == doctest::Approx(10.0));

  const auto mid = decode_action({0, 0, 0, 0, 0, 0}, env.state(), env.params(),
                                 env.tou(), true);
  CHECK(mid.requested_native[0] == doctest::Approx(300.0));

  const auto hi = decode_action({1, 1, 1, 1, 1, 1}, env.state(), env.params(),
                                env.tou(), true);
  CHECK(hi.requested_native[0] == doctest::Approx(500.0));
}

TEST_CASE("decode_action: MT ramp clamps a requested jump") {
  Environment env = make_env();
  EnvState st = env.state();
  st.prev_action_native[2] = 10.0;
  const auto d = decode_action({0, -1, 1, 0, 0, 0}, st, env.params(), env.tou(), true);
  CHECK(d.requested_native[2] == doctest::Approx(40.0));
  CHECK(d.realized.q_mt_m3 == doctest::Approx(20.0));
}

TEST_CASE("decode_action: IDR off pins prices to the benchmarks") {
  Environment env = make_env();
  const auto d = decode_action({0, 0, 0, 1, 1, 1}, env.state(), env.params(),
                               env.tou(), false);
  const auto b = benchmarks(env.tou(), env.params().pricing, 0);
  CHECK(d.realized.price_h == doctest::Approx(b.heat));
  CHECK(d.realized.price_p == doctest::Approx(b.elec));
  CHECK(d.realized.price_q == doctest::Approx(b.gas));
}

TEST_CASE("dispatch: zero loads, zero action, all flows zero") {
  ProfileSet set;
  DayProfile d = flat_day(21.0, 0.0, 0.0, 0.0);  // t_out = comfort: no heat load
  for (auto& v : d.basic_h_kw) v = 0.0;
  set.days.push_back(d);
  Environment env = make_env({}, 5, set);
  EnvState st = env.state();
  st.t_in_prev_c = 21.0;
  auto rng = make_rng(1);
  const auto res = dispatch(st, zero_action(env), env.params(), set.days[0],
                            env.tou(), rng, env.hsd_effective());
  CHECK(res.p_load_kw == doctest::Approx(0.0));
  CHECK(res.h_load_kw == doctest::Approx(0.0));
  CHECK(res.q_grid_m3 == doctest::Approx(0.0));
  CHECK(res.p_grid_kw == doctest::Approx(0.0));
  CHECK(res.esd_flow_kw == doctest::Approx(0.0));
  CHECK(res.hsd_flow_kw == doctest::Approx(0.0));
  CHECK(res.elec_residual_kw == doctest::Approx(0.0));
}

TEST_CASE("dispatch: wind surplus charges the ESD before exporting") {
  ProfileSet set;
  DayProfile d = flat_day(21.0, 50.0, 0.0, 0.0);
  for (auto& v : d.basic_h_kw) v = 0.0;
  set.days.push_back(d);
  Environment env = make_env({}, 5, set);
  EnvState st = env.state();  // ESD at c0 = 100 of 200: headroom exists
  st.t_in_prev_c = 21.0;
  auto rng = make_rng(2);
  const auto res = dispatch(st, zero_action(env), env.params(), set.days[0],
                            env.tou(), rng, env.hsd_effective());
  CHECK(res.esd_flow_kw == doctest::Approx(-50.0));
  CHECK(res.p_grid_kw == doctest::Approx(0.0));
}

TEST_CASE("dispatch: gas balance with P2G production") {
  ProfileSet set;
  DayProfile day = flat_day(21.0, 0.0, 0.0, 30.0);
  for (auto& v : day.basic_h_kw) v = 0.0;
  set.days.push_back(day);
  Environment env = make_env({}, 5, set);
  EnvState st = env.state();
  st.ledger_g.sigma = 0.0;  // pins the gas load at its basic value
  st.t_in_prev_c = 21.0;
  DecodedAction a = zero_action(env);
  a.realized.p_p2g_kw = 200.0;
  a.realized.q_mt_m3 = 20.0;
  auto rng = make_rng(3);
  SystemParams sp = env.params();
  sp.flex_g.sigma_mean = 0.0;
  sp.flex_g.sigma_std = 0.0;
  const auto res =
      dispatch(st, a, sp, set.days[0], env.tou(), rng, env.hsd_effective());
  const double q_p2g = 0.6 * 200.0 / 9.7;
  CHECK(res.conv.q_p2g_m3 == doctest::Approx(q_p2g));
  CHECK(res.q_grid_m3 == doctest::Approx(30.0 + 20.0 - q_p2g));
  CHECK(res.q_grid_m3 == doctest::Approx(37.6288659793814).epsilon(1e-9));
}

TEST_CASE("revenue_and_cost: zero flows, single carrier, payback guard") {
  const SystemParams sp = SystemParams::defaults();
  DispatchResult d;
  double rev = 0, cost = 0;
  revenue_and_cost(d, sp, rev, cost);
  CHECK(rev == 0.0);
  CHECK(cost == 0.0);

  d.action.price_p = 1.0;
  d.served_e_kw = 100.0;
  revenue_and_cost(d, sp, rev, cost);
  CHECK(rev == doctest::Approx(100.0));
  CHECK(cost == 0.0);

  d.p_shift_kw = -25.0;  // load pulled forward: no compensation owed
  revenue_and_cost(d, sp, rev, cost);
  CHECK(cost == 0.0);
  d.p_shift_kw = 25.0;
  revenue_and_cost(d, sp, rev, cost);
  CHECK(cost == doctest::Approx(sp.flex_e.gamma_comp * 25.0));
}

TEST_CASE("penalties: zero change, demand-side shortfall, neither condition") {
  SystemParams sp = SystemParams::defaults();
  Environment env = make_env();
  DecodedAction a;
  a.requested_norm = a.prev_norm = {0.1, -0.2, 0.3, 0.0, 0.5, -0.5};
  DispatchResult d;
  double c1 = -1, c2 = -1;

  // supply 150 (eb 50 + mt 100) plus stored 0 < load 200
  EnvState st = env.state();
  st.c_hsd_kwh = 0.0;
  d.conv.h_eb_kw = 50.0;
  d.conv.h_mt_kw = 100.0;
  d.h_load_kw = 200.0;
  sp.penalty.beta_lr = 10.0;
  StorageParams hsd = sp.hsd;
  penalties(st, a, d, sp, hsd, c1, c2);
  CHECK(c1 == doctest::Approx(0.0));
  CHECK(c2 == doctest::Approx(500.0));

  // balanced case: neither inequality holds
  st.c_hsd_kwh = 90.0;
  d.h_load_kw = 150.0;
  penalties(st, a, d, sp, hsd, c1, c2);
  CHECK(c2 == 0.0);
}

TEST_CASE("penalties: supply-side overrun without HSD headroom") {
  SystemParams sp = SystemParams::defaults();
  Environment env = make_env();
  DecodedAction a;
  DispatchResult d;
  EnvState st = env.state();
  StorageParams hsd{};  // scenario without HSD: c_max = 0
  st.c_hsd_kwh = 0.0;
  d.conv.h_eb_kw = 80.0;
  d.conv.h_mt_kw = 50.0;
  d.h_load_kw = 100.0;
  double c1 = 0, c2 = 0;
  penalties(st, a, d, sp, hsd, c1, c2);
  CHECK(c2 == doctest::Approx(sp.penalty.beta_el * 30.0));
}

TEST_CASE("step: deterministic replay is bitwise identical") {
  auto run = [](std::uint64_t seed) {
    Environment env = make_env({}, seed);
    env.reset(0);
    std::vector<double> out;
    auto rng = make_rng(99);
    for (int t = 0; t < 24; ++t) {
      std::array<double, 6> a{};
      for (auto& v : a) v = 2.0 * uniform01(rng) - 1.0;
      const auto r = env.step(a);
      out.push_back(r.reward);
      out.insert(out.end(), r.observation.begin(), r.observation.end());
    }
    return out;
  };
  const auto a = run(42), b = run(42), c = run(43);
  CHECK(a == b);
  CHECK(a != c);
}

TEST_CASE("step: reward decomposition identity is exact") {
  Environment env = make_env();
  env.reset(0);
  auto rng = make_rng(7);
  for (int t = 0; t < 24; ++t) {
    std::array<double, 6> a{};
    for (auto& v : a) v = 2.0 * uniform01(rng) - 1.0;
    const auto r = env.step(a);
    CHECK(r.reward - (r.info.revenue - r.info.cost - r.info.c1 - r.info.c2) == 0.0);
  }
}

TEST_CASE("step: balance identities close at every step") {
  Environment env = make_env();
  auto rng = make_rng(8);
  for (int ep = 0; ep < 4; ++ep) {
    env.reset(ep);
    for (int t = 0; t < 24; ++t) {
      std::array<double, 6> a{};
      for (auto& v : a) v = 2.0 * uniform01(rng) - 1.0;
      const auto r = env.step(a);
      const auto& d = r.info.dispatch;
      const double elec = d.p_grid_kw + d.p_wt_kw + d.esd_flow_kw + d.conv.p_mt_kw -
                          d.action.p_eb_kw - d.action.p_p2g_kw - d.p_load_kw -
                          d.elec_residual_kw;
      const double heat = d.conv.h_mt_kw + d.hsd_flow_kw + d.conv.h_eb_kw -
                          d.h_load_kw - d.heat_residual_kw;
      const double gas = d.q_grid_m3 + d.conv.q_p2g_m3 - d.action.q_mt_m3 -
                         d.q_load_m3 - d.gas_residual_m3;
      CHECK(std::abs(elec) < 1e-6);
      CHECK(std::abs(heat) < 1e-6);
      CHECK(std::abs(gas) < 1e-6);
    }
  }
}

TEST_CASE("step: SOC and PMV bands hold under random actions") {
  Environment env = make_env();
  const auto& sp = env.params();
  auto rng = make_rng(9);
  for (int ep = 0; ep < 4; ++ep) {
    env.reset(ep);
    for (int t = 0; t < 24; ++t) {
      const int hour = env.state().hour;
      std::array<double, 6> a{};
      for (auto& v : a) v = 2.0 * uniform01(rng) - 1.0;
      const auto r = env.step(a);
      const auto& st = env.state();
      CHECK(st.c_esd_kwh >= sp.esd.c_min_kwh - 1e-9);
      CHECK(st.c_esd_kwh <= sp.esd.c_max_kwh + 1e-9);
      CHECK(st.c_hsd_kwh >= sp.hsd.c_min_kwh - 1e-9);
      CHECK(st.c_hsd_kwh <= sp.hsd.c_max_kwh + 1e-9);
      CHECK(std::abs(pmv(r.info.dispatch.t_in_next_c, sp.comfort)) <=
            pmv_band(hour) + 1e-9);
    }
  }
}

TEST_CASE("step: adversary only touches observations, never the state") {
  EnvOptions attacked;
  attacked.adversary = PerturbMode::Itdsa;
  attacked.attack.window_start = 0;
  attacked.attack.window_end = 24;
  Environment env_a = make_env(attacked, 17);
  Environment env_c = make_env({}, 17);
  env_a.reset(1);
  env_c.reset(1);
  auto rng = make_rng(10);
  for (int t = 0; t < 24; ++t) {
    std::array<double, 6> a{};
    for (auto& v : a) v = 2.0 * uniform01(rng) - 1.0;
    const auto ra = env_a.step(a);
    const auto rc = env_c.step(a);
    CHECK(ra.reward == rc.reward);
    CHECK(env_a.state().c_esd_kwh == env_c.state().c_esd_kwh);
    CHECK(env_a.state().c_hsd_kwh == env_c.state().c_hsd_kwh);
    CHECK(env_a.state().t_in_prev_c == env_c.state().t_in_prev_c);
  }
}

TEST_CASE("step: stepping a finished episode throws") {
  Environment env = make_env();
  env.reset(0);
  const std::array<double, 6> a{};
  for (int t = 0; t < 24; ++t) env.step(a);
  CHECK(env.state().done);
  CHECK_THROWS_AS(env.step(a), std::runtime_error);
}

TEST_CASE("scenario toggles: HSD removal and IDR pinning") {
  EnvOptions no_hsd;
  no_hsd.hsd_enabled = false;
  Environment env = make_env(no_hsd);
  env.reset(0);
  const std::array<double, 6> a{0.0, 1.0, 0.5, 0.0, 0.0, 0.0};
  const auto r = env.step(a);
  CHECK(env.state().c_hsd_kwh == 0.0);
  CHECK(r.info.dispatch.hsd_flow_kw == 0.0);
  CHECK(r.observation[1] == doctest::Approx(-1.0));  // SOC HSD pinned at zero

  EnvOptions no_idr;
  no_idr.idr_enabled = false;
  Environment env2 = make_env(no_idr);
  env2.reset(0);
  const auto r2 = env2.step({0.0, 0.0, 0.0, 1.0, 1.0, 1.0});
  CHECK(r2.info.dispatch.levels.tse == doctest::Approx(0.0));
  CHECK(r2.info.dispatch.levels.tsq == doctest::Approx(0.0));
  CHECK(r2.info.dispatch.levels.ch == doctest::Approx(0.0));
  CHECK(r2.info.dispatch.p_shift_kw == doctest::Approx(0.0));
  CHECK(r2.info.dispatch.h_cut_kw == doctest::Approx(0.0));
}

TEST_CASE("episode profit accumulates exactly from the step infos") {
  Environment env = make_env();
  env.reset(0);
  double profit = 0.0;
  const std::array<double, 6> a{0.2, -0.5, 0.1, 0.3, -0.2, 0.4};
  for (int t = 0; t < 24; ++t) {
    const auto r = env.step(a);
    profit += r.info.revenue - r.info.cost;
  }
  CHECK(std::isfinite(profit));
}
