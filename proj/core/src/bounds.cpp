#include "iesdr/bounds.hpp"

#include <cmath>
#include <stdexcept>

namespace iesdr {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Everything backward needs from the forward passes. Layers are indexed
// 0..L-1; hidden layers 0..L-2 carry a ReLU whose pre-activation bounds are
// (zl[k], zu[k]).
struct Tape {
  double eps = 0.0;
  VectorXd center;
  // IBP
  std::vector<VectorXd> c, r;    // input center/radius of each affine layer
  std::vector<VectorXd> zl, zu;  // pre-activation bounds per layer
  // CROWN backward substitution, one record per processed hidden layer in
  // processing order (hidden layer L-2 first, layer 0 last).
  struct Side {
    std::vector<MatrixXd> B;      // coefficients before the ReLU relaxation
    std::vector<MatrixXd> Brelu;  // after multiplying the selected slopes
    MatrixXd B_final;             // coefficients over the network input
    VectorXd d;                   // accumulated intercept
    VectorXd concrete;            // concretized bound over the input box
  };
  Side up, low;
  VectorXd ibp_l, ibp_u;
  VectorXd crown_l, crown_u;  // after intersection with the IBP box
  Eigen::Array<bool, Eigen::Dynamic, 1> use_crown_u, use_crown_l;
};

void ibp_forward(const MlpParams& net, const VectorXd& center, double eps,
                 Tape& t) {
  const size_t L = net.w.size();
  t.eps = eps;
  t.center = center;
  t.c.assign(L, VectorXd());
  t.r.assign(L, VectorXd());
  t.zl.assign(L, VectorXd());
  t.zu.assign(L, VectorXd());

  VectorXd c = center;
  VectorXd r = VectorXd::Constant(center.size(), eps);
  for (size_t k = 0; k < L; ++k) {
    t.c[k] = c;
    t.r[k] = r;
    const VectorXd zc = net.w[k] * c + net.b[k];
    const VectorXd zr = net.w[k].cwiseAbs() * r;
    t.zl[k] = zc - zr;
    t.zu[k] = zc + zr;
    if (k + 1 < L) {
      const VectorXd pl = t.zl[k].cwiseMax(0.0);
      const VectorXd pu = t.zu[k].cwiseMax(0.0);
      c = 0.5 * (pl + pu);
      r = 0.5 * (pu - pl);
    }
  }
  t.ibp_l = t.zl[L - 1];
  t.ibp_u = t.zu[L - 1];
}

// ReLU relaxation pieces for one neuron given pre-activation bounds (l, u).
struct Relax {
  double s_up = 0.0;   // chord slope (or exact slope when stable)
  double t_up = 0.0;   // chord intercept
  double s_low = 0.0;  // lower line slope (alpha for unstable neurons)
  bool unstable = false;
};

Relax relax_of(double l, double u) {
  Relax x;
  if (l >= 0.0) {
    x.s_up = x.s_low = 1.0;
  } else if (u <= 0.0) {
    x.s_up = x.s_low = 0.0;
  } else {
    x.unstable = true;
    x.s_up = u / (u - l);
    x.t_up = -l * u / (u - l);
    x.s_low = (-l < u) ? 1.0 : 0.0;  // adaptive alpha
  }
  return x;
}

void crown_side_forward(const MlpParams& net, Tape& t, bool upper) {
  const size_t L = net.w.size();
  Tape::Side& side = upper ? t.up : t.low;
  side.B.clear();
  side.Brelu.clear();

  MatrixXd B = net.w[L - 1];
  VectorXd d = net.b[L - 1];
  for (size_t k = L - 1; k-- > 0;) {
    side.B.push_back(B);
    MatrixXd Brelu(B.rows(), B.cols());
    for (Eigen::Index j = 0; j < B.cols(); ++j) {
      const Relax x = relax_of(t.zl[k](j), t.zu[k](j));
      for (Eigen::Index i = 0; i < B.rows(); ++i) {
        const double a = B(i, j);
        const bool chord = upper ? (a >= 0.0) : (a < 0.0);
        Brelu(i, j) = a * (chord ? x.s_up : x.s_low);
        if (chord) d(i) += a * x.t_up;
      }
    }
    side.Brelu.push_back(Brelu);
    d += Brelu * net.b[k];
    B = Brelu * net.w[k];
  }
  side.B_final = B;
  side.d = d;
  const VectorXd span = t.eps * B.cwiseAbs().rowwise().sum();
  side.concrete = upper ? VectorXd(B * t.center + span + d)
                        : VectorXd(B * t.center - span + d);
}

void forward_all(const MlpParams& net, const VectorXd& center, double eps,
                 Tape& t) {
  net.validate();
  if (center.size() != net.input_dim())
    throw std::invalid_argument("bounds: center dimension mismatch");
  if (eps < 0.0) throw std::invalid_argument("bounds: eps must be >= 0");
  ibp_forward(net, center, eps, t);
  crown_side_forward(net, t, true);
  crown_side_forward(net, t, false);
  // Both boxes are sound, so their intersection is sound and at most as wide
  // as either; ties resolve to the CROWN side.
  t.use_crown_u = (t.up.concrete.array() <= t.ibp_u.array());
  t.use_crown_l = (t.low.concrete.array() >= t.ibp_l.array());
  t.crown_u = t.use_crown_u.select(t.up.concrete.array(), t.ibp_u.array());
  t.crown_l = t.use_crown_l.select(t.low.concrete.array(), t.ibp_l.array());
}

// Accumulates gradients of a scalar loss into `g` given its gradients with
// respect to the pre-activation bounds of every layer.
void ibp_backward(const MlpParams& net, const Tape& t, std::vector<VectorXd>& dzl,
                  std::vector<VectorXd>& dzu, MlpGrads& g) {
  const size_t L = net.w.size();
  for (size_t k = L; k-- > 0;) {
    const VectorXd sum = dzl[k] + dzu[k];
    const VectorXd diff = dzu[k] - dzl[k];
    g.w[k] += sum * t.c[k].transpose() +
              net.w[k].array().sign().matrix().cwiseProduct(
                  diff * t.r[k].transpose());
    g.b[k] += sum;
    if (k > 0) {
      const VectorXd dc = net.w[k].transpose() * sum;
      const VectorXd dr = net.w[k].cwiseAbs().transpose() * diff;
      const VectorXd dpl = 0.5 * (dc - dr);
      const VectorXd dpu = 0.5 * (dc + dr);
      dzl[k - 1] += dpl.cwiseProduct(
          (t.zl[k - 1].array() > 0.0).cast<double>().matrix());
      dzu[k - 1] += dpu.cwiseProduct(
          (t.zu[k - 1].array() > 0.0).cast<double>().matrix());
    }
  }
}

// Backward through one CROWN side; accumulates parameter gradients directly
// and relaxation gradients into the pre-activation bound buffers.
void crown_side_backward(const MlpParams& net, const Tape& t, bool upper,
                         const VectorXd& gout, std::vector<VectorXd>& dzl,
                         std::vector<VectorXd>& dzu, MlpGrads& g) {
  if (gout.isZero(0.0)) return;
  const size_t L = net.w.size();
  const Tape::Side& side = upper ? t.up : t.low;

  // concretization
  const double sgn = upper ? 1.0 : -1.0;
  MatrixXd dB = gout * t.center.transpose() +
                sgn * t.eps *
                    side.B_final.array().sign().matrix().cwiseProduct(
                        gout * Eigen::RowVectorXd::Ones(t.center.size()));
  const VectorXd& dd = gout;  // d only ever accumulates additively

  // stages were processed for hidden layers k = L-2 .. 0; reverse them
  for (size_t stage = side.B.size(); stage-- > 0;) {
    const size_t k = L - 2 - stage;  // hidden layer index of this stage
    const MatrixXd& B = side.B[stage];
    const MatrixXd& Brelu = side.Brelu[stage];

    // A_next = Brelu * W[k], d += Brelu * b[k]
    MatrixXd dBrelu = dB * net.w[k].transpose() + dd * net.b[k].transpose();
    g.w[k] += Brelu.transpose() * dB;
    g.b[k] += Brelu.transpose() * dd;

    // Brelu = B .* sel_s, d += sum_j B(:,j) * sel_t(:,j)
    MatrixXd dBpre(B.rows(), B.cols());
    for (Eigen::Index j = 0; j < B.cols(); ++j) {
      const double l = t.zl[k](j);
      const double u = t.zu[k](j);
      const Relax x = relax_of(l, u);
      double ds_up = 0.0, dt_up = 0.0;
      for (Eigen::Index i = 0; i < B.rows(); ++i) {
        const double a = B(i, j);
        const bool chord = upper ? (a >= 0.0) : (a < 0.0);
        const double s = chord ? x.s_up : x.s_low;
        dBpre(i, j) = dBrelu(i, j) * s + (chord ? dd(i) * x.t_up : 0.0);
        if (chord && x.unstable) {
          ds_up += dBrelu(i, j) * a;
          dt_up += dd(i) * a;
        }
      }
      if (x.unstable) {
        const double denom = (u - l) * (u - l);
        dzl[k](j) += ds_up * (u / denom) + dt_up * (-u * u / denom);
        dzu[k](j) += ds_up * (-l / denom) + dt_up * (l * l / denom);
      }
    }
    dB = std::move(dBpre);
  }

  // chain start: B = W[L-1], d = b[L-1]
  g.w[L - 1] += dB;
  g.b[L - 1] += dd;
}

BoxBounds mixed_box(const Tape& t, double beta) {
  BoxBounds out;
  out.upper = (1.0 - beta) * t.ibp_u + beta * t.crown_u;
  out.lower = (1.0 - beta) * t.ibp_l + beta * t.crown_l;
  return out;
}

// Full backward through the mixed box given loss gradients on it.
void mixed_backward(const MlpParams& net, const Tape& t, double beta,
                    const VectorXd& du_mix, const VectorXd& dl_mix,
                    MlpGrads& g) {
  const size_t L = net.w.size();
  const Eigen::Index m = du_mix.size();

  VectorXd du_ibp = (1.0 - beta) * du_mix;
  VectorXd dl_ibp = (1.0 - beta) * dl_mix;
  VectorXd du_crown = VectorXd::Zero(m);
  VectorXd dl_crown = VectorXd::Zero(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    if (t.use_crown_u(i)) du_crown(i) = beta * du_mix(i);
    else du_ibp(i) += beta * du_mix(i);
    if (t.use_crown_l(i)) dl_crown(i) = beta * dl_mix(i);
    else dl_ibp(i) += beta * dl_mix(i);
  }

  std::vector<VectorXd> dzl(L), dzu(L);
  for (size_t k = 0; k < L; ++k) {
    dzl[k] = VectorXd::Zero(net.w[k].rows());
    dzu[k] = VectorXd::Zero(net.w[k].rows());
  }
  crown_side_backward(net, t, true, du_crown, dzl, dzu, g);
  crown_side_backward(net, t, false, dl_crown, dzl, dzu, g);
  dzu[L - 1] += du_ibp;
  dzl[L - 1] += dl_ibp;
  ibp_backward(net, t, dzl, dzu, g);
}

}  // namespace

BoxBounds ibp(const MlpParams& net, const Eigen::VectorXd& center, double eps) {
  net.validate();
  if (center.size() != net.input_dim())
    throw std::invalid_argument("ibp: center dimension mismatch");
  if (eps < 0.0) throw std::invalid_argument("ibp: eps must be >= 0");
  Tape t;
  ibp_forward(net, center, eps, t);
  return {t.ibp_l, t.ibp_u};
}

CrownBounds crown(const MlpParams& net, const Eigen::VectorXd& center, double eps) {
  Tape t;
  forward_all(net, center, eps, t);
  CrownBounds out;
  out.linear.upper_slope = t.up.B_final;
  out.linear.lower_slope = t.low.B_final;
  out.linear.upper_intercept = t.up.d;
  out.linear.lower_intercept = t.low.d;
  out.box = {t.crown_l, t.crown_u};
  return out;
}

BoxBounds crown_ibp(const MlpParams& net, const Eigen::VectorXd& center,
                    double eps, double beta) {
  if (beta < 0.0 || beta > 1.0)
    throw std::invalid_argument("crown_ibp: beta must be in [0,1]");
  Tape t;
  forward_all(net, center, eps, t);
  return mixed_box(t, beta);
}

RegularizerResult sa_regularizer(const MlpParams& net,
                                 const std::vector<Eigen::VectorXd>& obs_batch,
                                 double eps, double beta) {
  if (obs_batch.empty())
    throw std::invalid_argument("sa_regularizer: empty batch");
  if (beta < 0.0 || beta > 1.0)
    throw std::invalid_argument("sa_regularizer: beta must be in [0,1]");

  RegularizerResult out;
  out.grads = MlpGrads::zeros_like(net);
  if (eps == 0.0) return out;  // degenerate box has zero width exactly
  const double inv_n = 1.0 / static_cast<double>(obs_batch.size());

  Tape t;
  for (const auto& obs : obs_batch) {
    forward_all(net, obs, eps, t);
    const BoxBounds box = mixed_box(t, beta);
    const VectorXd width = box.upper - box.lower;
    out.loss += inv_n * width.squaredNorm();
    const VectorXd du = 2.0 * inv_n * width;
    mixed_backward(net, t, beta, du, -du, out.grads);
  }
  return out;
}

}  // namespace iesdr
