#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace iesdr {

// Dense ReLU network: hidden layers ReLU, linear output. Weight matrices are
// (out x in); batches are column-major (one sample per column).
struct MlpParams {
  std::vector<Eigen::MatrixXd> w;
  std::vector<Eigen::VectorXd> b;

  int input_dim() const { return w.empty() ? 0 : static_cast<int>(w.front().cols()); }
  int output_dim() const { return w.empty() ? 0 : static_cast<int>(w.back().rows()); }
  size_t layers() const { return w.size(); }
  size_t param_count() const;

  // He-initialized hidden layers, small uniform output layer. Deterministic
  // for a given generator state.
  static MlpParams random(const std::vector<int>& dims, std::mt19937_64& rng,
                          double out_scale = 1e-3);
  void validate() const;
};

struct MlpGrads {
  std::vector<Eigen::MatrixXd> w;
  std::vector<Eigen::VectorXd> b;

  static MlpGrads zeros_like(const MlpParams& p);
  void scale(double a);
  void add(const MlpGrads& other, double a = 1.0);
  double squared_norm() const;
};

struct MlpCache {
  Eigen::MatrixXd input;
  std::vector<Eigen::MatrixXd> pre;   // pre-activations per layer
  std::vector<Eigen::MatrixXd> post;  // post-ReLU activations (hidden layers)
};

// Forward pass; `cache` retains what backward needs.
Eigen::MatrixXd mlp_forward(const MlpParams& net, const Eigen::MatrixXd& x,
                            MlpCache* cache = nullptr);

// Reverse-mode gradients of a scalar loss whose output gradient is dy
// (same shape as the forward output, one column per sample). Returns the
// parameter gradients summed over the batch; optionally the input gradient.
MlpGrads mlp_backward(const MlpParams& net, const MlpCache& cache,
                      const Eigen::MatrixXd& dy, Eigen::MatrixXd* dx = nullptr);

// In-place axpy over parameters (used by finite-difference harnesses).
void mlp_axpy(MlpParams& p, const MlpGrads& g, double a);

struct AdamParams {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  std::vector<Eigen::MatrixXd> mw, vw;
  std::vector<Eigen::VectorXd> mb, vb;
  long step = 0;

  static AdamState zeros_like(const MlpParams& p);
};

// Standard Adam update with bias correction.
void adam_step(MlpParams& params, const MlpGrads& grads, AdamState& st,
               const AdamParams& ap);

// ---------------------------------------------------------------------------
// Gaussian policy with tanh squashing
// ---------------------------------------------------------------------------

inline constexpr double kLogStdMin = -20.0;
inline constexpr double kLogStdMax = 2.0;

struct GaussianPolicy {
  MlpParams mean_net;     // obs -> pre-squash action mean
  MlpParams logstd_net;   // obs -> log standard deviation (clamped)

  int obs_dim() const { return mean_net.input_dim(); }
  int act_dim() const { return mean_net.output_dim(); }
  static GaussianPolicy random(int obs_dim, int act_dim,
                               const std::vector<int>& hidden,
                               std::mt19937_64& rng);
};

struct PolicySample {
  Eigen::VectorXd action;     // tanh(u), strictly inside (-1,1)
  Eigen::VectorXd presquash;  // u = mu + noise .* sigma
  Eigen::VectorXd mu;
  Eigen::VectorXd log_std;    // after clamping
  Eigen::VectorXd noise;
  double log_prob = 0.0;
};

// Numerically stable log(1 - tanh(u)^2).
double log_one_minus_tanh_sq(double u);

// Reparameterized sample with externally supplied standard-normal noise.
PolicySample policy_sample_with_noise(const GaussianPolicy& p,
                                      const Eigen::VectorXd& obs,
                                      const Eigen::VectorXd& noise);

PolicySample sample_action(const GaussianPolicy& p, const Eigen::VectorXd& obs,
                           std::mt19937_64& rng);

// Deterministic evaluation action tanh(mu).
Eigen::VectorXd mean_action(const GaussianPolicy& p, const Eigen::VectorXd& obs);

// ---------------------------------------------------------------------------
// Checkpoints: versioned JSON with exact double round-trip
// ---------------------------------------------------------------------------

void save_policy(const GaussianPolicy& p, const std::string& path);
GaussianPolicy load_policy(const std::string& path);

}  // namespace iesdr
