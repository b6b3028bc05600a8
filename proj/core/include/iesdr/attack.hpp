#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace iesdr {

// Indoor temperature delay scaling attack: inside the attacked window the
// reported temperature is multiplied by 1 + lambda * (1 - exp(-a (t - t0))).
struct ItdsaSpec {
  double lambda = 0.2;  // scaling amplitude, > -1
  double a = 0.3;       // delay rate, 1/h
  int window_start = 0;      // t0
  int window_end = 24;       // exclusive; window = [start, end) intersect [0,24)

  bool in_window(int hour) const {
    return hour >= window_start && hour < window_end;
  }
  void validate() const;
};

// Residual-test bad data detector.
struct DetectorSpec {
  double tau_thresh = 0.0;   // residual threshold, > 0 once calibrated
  double noise_sigma = 0.5;  // measurement noise std dev (kW on heat channel)
};

// l_inf budget on the normalized observation.
struct AdversaryBudget {
  double epsilon = 0.0;
  std::vector<int> mask;  // perturbable component indices
};

enum class PerturbMode { None, Itdsa, LinfWorst };

// Context the observation perturbation needs from the environment: where the
// heat-demand component sits, how it is normalized, and the falsified value
// the environment derived from the scaled temperature reports.
struct PerturbContext {
  int heat_component = 7;   // index of H_basic in the observation vector
  double heat_lo_kw = 0.0;  // normalization bounds of that component
  double heat_hi_kw = 1.0;
  double falsified_heat_kw = 0.0;
  std::vector<double> direction;  // LinfWorst sign pattern; defaults to +1
};

double itdsa_multiplier(int hour, const ItdsaSpec& spec);

// Eq.-faithful falsified temperature; identity outside the window and at the
// window onset.
double itdsa_temperature(double t_in_c, int hour, const ItdsaSpec& spec);

struct ResidualResult {
  double residual = 0.0;
  bool flagged = false;
};

// L2 residual of measured vs predicted; flagged when it exceeds the
// threshold (estimates are valid iff residual <= tau).
ResidualResult residual_check(const std::vector<double>& measured,
                              const std::vector<double>& predicted,
                              const DetectorSpec& d);

// Applies the selected perturbation to a normalized observation. The caller
// guarantees obs components lie in [-1,1]; outputs are clipped back into it.
std::vector<double> perturb_observation(const std::vector<double>& obs,
                                        const AdversaryBudget& b,
                                        PerturbMode mode,
                                        const PerturbContext& ctx);

}  // namespace iesdr
