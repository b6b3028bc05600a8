#pragma once

// Central finite-difference gradient checking against analytic gradients of
// piecewise-smooth losses. Samples whose one-sided slopes disagree are
// breakpoint-adjacent (ReLU stability class, bound selection, or min/max tie
// crossings); they are excluded from the comparison and counted.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <vector>

#include "iesdr/mlp.hpp"

namespace fdtest {

inline std::vector<double*> param_ptrs(iesdr::MlpParams& p) {
  std::vector<double*> out;
  for (auto& m : p.w)
    for (Eigen::Index i = 0; i < m.size(); ++i) out.push_back(m.data() + i);
  for (auto& v : p.b)
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v.data() + i);
  return out;
}

inline std::vector<double> grad_values(const iesdr::MlpGrads& g) {
  std::vector<double> out;
  for (const auto& m : g.w)
    for (Eigen::Index i = 0; i < m.size(); ++i) out.push_back(m.data()[i]);
  for (const auto& v : g.b)
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v.data()[i]);
  return out;
}

struct FdReport {
  int checked = 0;
  int excluded = 0;
  int failed = 0;
  double max_rel_err = 0.0;
};

// `loss` is evaluated on the current (mutated) state of `net`; `analytic`
// must be the gradient at the unperturbed point.
inline FdReport fd_check(iesdr::MlpParams& net, const iesdr::MlpGrads& analytic,
                         const std::function<double()>& loss, double h,
                         double tol, int max_params, std::mt19937_64& rng,
                         const char* label) {
  FdReport rep;
  auto ptrs = param_ptrs(net);
  const auto grads = grad_values(analytic);

  std::vector<size_t> order(ptrs.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  const size_t n = std::min<size_t>(order.size(), (size_t)max_params);

  const double l0 = loss();
  for (size_t t = 0; t < n; ++t) {
    const size_t i = order[t];
    double* p = ptrs[i];
    const double saved = *p;
    *p = saved + h;
    const double lp = loss();
    *p = saved - h;
    const double lm = loss();
    *p = saved;

    const double fd = (lp - lm) / (2.0 * h);
    const double f_plus = (lp - l0) / h;
    const double f_minus = (l0 - lm) / h;
    const double slope_scale =
        std::max({std::abs(f_plus), std::abs(f_minus), 1e-6});
    if (std::abs(f_plus - f_minus) / slope_scale > 0.02) {
      rep.excluded += 1;  // derivative jump inside the stencil
      continue;
    }

    const double g = grads[i];
    const double rel =
        std::abs(fd - g) / std::max({std::abs(fd), std::abs(g), 1e-6});
    rep.max_rel_err = std::max(rep.max_rel_err, rel);
    rep.checked += 1;
    if (rel > tol) {
      rep.failed += 1;
      std::printf("fd mismatch [%s] param %zu: analytic %.9g fd %.9g rel %.3g\n",
                  label, i, g, fd, rel);
    }
  }
  if (rep.excluded > 0)
    std::printf("fd check [%s]: %d breakpoint-adjacent samples excluded\n",
                label, rep.excluded);
  return rep;
}

}  // namespace fdtest
