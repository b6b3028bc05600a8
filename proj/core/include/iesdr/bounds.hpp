#pragma once

#include <Eigen/Core>
#include <vector>

#include "iesdr/mlp.hpp"

namespace iesdr {

struct BoxBounds {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
};

// Affine output bounds valid over the input box:
//   lower_slope * x + lower_intercept <= f(x) <= upper_slope * x + upper_intercept
struct LinearBounds {
  Eigen::MatrixXd upper_slope;
  Eigen::MatrixXd lower_slope;
  Eigen::VectorXd upper_intercept;
  Eigen::VectorXd lower_intercept;
};

struct CrownBounds {
  LinearBounds linear;
  BoxBounds box;  // concretized and tightened against the IBP box
};

// Interval bound propagation over the l_inf ball of radius eps around center.
BoxBounds ibp(const MlpParams& net, const Eigen::VectorXd& center, double eps);

// Backward linear relaxation (CROWN) using IBP intermediate pre-activation
// bounds. Unstable ReLUs use the upper chord and a lower line of slope
// alpha in {0,1} chosen adaptively (1 iff |l| < u). The returned box is the
// concretized linear bound intersected with the IBP box, so its width never
// exceeds the IBP width.
CrownBounds crown(const MlpParams& net, const Eigen::VectorXd& center, double eps);

// Convex mix of the IBP and CROWN boxes: (1-beta)*IBP + beta*CROWN.
BoxBounds crown_ibp(const MlpParams& net, const Eigen::VectorXd& center,
                    double eps, double beta);

struct RegularizerResult {
  double loss = 0.0;
  MlpGrads grads;
};

// Mean squared l2 width of the mixed box over the batch, with exact
// piecewise gradients through both the IBP and CROWN computations.
RegularizerResult sa_regularizer(const MlpParams& net,
                                 const std::vector<Eigen::VectorXd>& obs_batch,
                                 double eps, double beta);

}  // namespace iesdr
