#include "iesdr/attack.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace iesdr {

void ItdsaSpec::validate() const {
  if (lambda <= -1.0) throw std::invalid_argument("ItdsaSpec: lambda must exceed -1");
  if (a <= 0.0) throw std::invalid_argument("ItdsaSpec: delay rate must be positive");
  if (window_start < 0 || window_end > 24 || window_start >= window_end)
    throw std::invalid_argument("ItdsaSpec: window must be a nonempty subset of [0,24)");
}

double itdsa_multiplier(int hour, const ItdsaSpec& spec) {
  if (!spec.in_window(hour)) return 1.0;
  const double dt = static_cast<double>(hour - spec.window_start);
  return 1.0 + spec.lambda * (1.0 - std::exp(-spec.a * dt));
}

double itdsa_temperature(double t_in_c, int hour, const ItdsaSpec& spec) {
  if (hour < 0 || hour >= 24)
    throw std::out_of_range("itdsa_temperature: hour out of [0,24)");
  return itdsa_multiplier(hour, spec) * t_in_c;
}

ResidualResult residual_check(const std::vector<double>& measured,
                              const std::vector<double>& predicted,
                              const DetectorSpec& d) {
  if (measured.size() != predicted.size())
    throw std::invalid_argument("residual_check: vector length mismatch");
  double ss = 0.0;
  for (size_t i = 0; i < measured.size(); ++i) {
    const double r = measured[i] - predicted[i];
    ss += r * r;
  }
  ResidualResult out;
  out.residual = std::sqrt(ss);
  out.flagged = out.residual > d.tau_thresh;
  return out;
}

std::vector<double> perturb_observation(const std::vector<double>& obs,
                                        const AdversaryBudget& b,
                                        PerturbMode mode,
                                        const PerturbContext& ctx) {
  std::vector<double> out = obs;
  for (int idx : b.mask)
    if (idx < 0 || idx >= static_cast<int>(obs.size()))
      throw std::out_of_range("perturb_observation: mask index out of range");

  switch (mode) {
    case PerturbMode::None:
      return out;
    case PerturbMode::Itdsa: {
      if (ctx.heat_component < 0 ||
          ctx.heat_component >= static_cast<int>(obs.size()))
        throw std::out_of_range("perturb_observation: heat component out of range");
      const double span = ctx.heat_hi_kw - ctx.heat_lo_kw;
      if (span <= 0.0)
        throw std::invalid_argument("perturb_observation: bad heat bounds");
      const double norm =
          2.0 * (ctx.falsified_heat_kw - ctx.heat_lo_kw) / span - 1.0;
      out[static_cast<size_t>(ctx.heat_component)] = std::clamp(norm, -1.0, 1.0);
      return out;
    }
    case PerturbMode::LinfWorst: {
      if (b.epsilon == 0.0) return out;
      for (int idx : b.mask) {
        const size_t i = static_cast<size_t>(idx);
        double dir = 1.0;
        if (i < ctx.direction.size() && ctx.direction[i] != 0.0)
          dir = ctx.direction[i] > 0.0 ? 1.0 : -1.0;
        out[i] = std::clamp(out[i] + dir * b.epsilon, -1.0, 1.0);
      }
      return out;
    }
  }
  return out;
}

}  // namespace iesdr
