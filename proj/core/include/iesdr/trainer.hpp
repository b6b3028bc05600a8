#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "iesdr/environment.hpp"
#include "iesdr/mlp.hpp"

namespace iesdr {

struct Transition {
  std::array<double, 9> obs{};
  std::array<double, 6> action{};
  double reward = 0.0;
  std::array<double, 9> next_obs{};
  bool done = false;
};

// Fixed-capacity ring buffer, oldest evicted first, uniform sampling.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(size_t capacity);
  void push(const Transition& t);
  size_t size() const { return full_ ? data_.size() : head_; }
  size_t capacity() const { return data_.size(); }
  // i-th oldest stored transition
  const Transition& at(size_t i) const;
  std::vector<size_t> sample_indices(size_t n, std::mt19937_64& rng) const;

 private:
  std::vector<Transition> data_;
  size_t head_ = 0;
  bool full_ = false;
};

struct TrainerConfig {
  int hidden_width = 128;
  int hidden_layers = 2;
  double lr_actor = 0.0005;
  double lr_critic = 0.002;
  double lr_alpha = 0.0005;
  double gamma = 0.95;
  int batch = 256;
  double tau = 0.005;
  int episodes = 1000;
  int warm_episodes = 500;   // regularizer off
  int ramp_episodes = 300;   // epsilon ramps up, beta ramps CROWN -> IBP
  int hold_episodes = 200;   // target epsilon held
  size_t replay_capacity = 100000;
  int warmup_transitions = 1000;  // random exploration until this many samples
  int updates_per_step = 1;
  double kappa = 1.0;
  double target_eps = 0.1;        // l_inf radius in normalized obs units
  double entropy_target = -6.0;   // H0 = -dim(action)
  double reward_scale = 0.001;    // scales rewards inside the critic targets
  int bound_batch = 0;            // samples used by the regularizer; 0 = all
  double init_alpha = 0.2;
  std::uint64_t seed = 1;

  void validate() const;
  double eps_at(int episode) const;
  double beta_at(int episode) const;
  // Same 50/30/20 phase proportions at a different episode count.
  static TrainerConfig scaled(int episodes);
};

struct EpisodeLog {
  int episode = 0;
  double reward = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  double alpha = 0.0;
  double eps = 0.0;
  double beta = 0.0;
};

struct TrainResult {
  GaussianPolicy policy;
  std::vector<EpisodeLog> curves;
};

struct CriticPair {
  MlpParams q1, q2;
};

struct Batch {
  Eigen::MatrixXd obs;       // obs_dim x n
  Eigen::MatrixXd act;       // act_dim x n
  Eigen::VectorXd reward;    // already reward-scaled
  Eigen::MatrixXd next_obs;
  Eigen::VectorXd not_done;  // 1 for non-terminal transitions
};

// --- pure loss/gradient computations (shared by updates and tests) ---------

// Soft Bellman targets y = r + gamma * not_done * (min_i Qbar_i(s',a') -
// alpha * log pi(a'|s')) with a' reparameterized from `next_noise`.
Eigen::VectorXd soft_targets(const GaussianPolicy& policy,
                             const CriticPair& targets, const Batch& b,
                             const Eigen::MatrixXd& next_noise, double alpha,
                             double gamma);

struct CriticLossGrads {
  double loss = 0.0;
  MlpGrads grads;
};
CriticLossGrads critic_loss_and_grads(const MlpParams& qnet,
                                      const Eigen::MatrixXd& obs,
                                      const Eigen::MatrixXd& act,
                                      const Eigen::VectorXd& targets);

struct ActorLossGrads {
  double loss = 0.0;       // includes kappa * regularizer
  double sac_loss = 0.0;   // E[alpha log pi - min Q]
  double reg_loss = 0.0;   // bound width term, zero when skipped
  double mean_log_pi = 0.0;
  MlpGrads mean_grads;
  MlpGrads logstd_grads;
};
ActorLossGrads actor_loss_and_grads(const GaussianPolicy& policy,
                                    const CriticPair& critics,
                                    const Eigen::MatrixXd& obs,
                                    const Eigen::MatrixXd& noise, double alpha,
                                    double kappa, double eps, double beta,
                                    int bound_batch);

struct TemperatureLossGrad {
  double loss = 0.0;
  double dlog_alpha = 0.0;
  double mean_log_pi = 0.0;
};
TemperatureLossGrad temperature_loss_and_grad(const GaussianPolicy& policy,
                                              const Eigen::MatrixXd& obs,
                                              const Eigen::MatrixXd& noise,
                                              double log_alpha,
                                              double entropy_target);

void soft_update(MlpParams& target, const MlpParams& online, double tau);

// --- trainer ----------------------------------------------------------------

class SacTrainer {
 public:
  SacTrainer(Environment& env, TrainerConfig cfg);

  TrainResult train();

  Batch sample_batch();
  std::pair<double, double> update_critics(const Batch& b);
  double update_actor(const Batch& b, double eps, double beta);
  double update_temperature(const Batch& b);
  void update_targets();

  double alpha() const;
  ReplayBuffer& buffer() { return buffer_; }
  GaussianPolicy& policy() { return policy_; }
  CriticPair& critics() { return online_; }
  CriticPair& target_critics() { return target_; }
  const TrainerConfig& config() const { return cfg_; }

 private:
  Environment& env_;
  TrainerConfig cfg_;
  GaussianPolicy policy_;
  CriticPair online_;
  CriticPair target_;
  AdamState adam_q1_, adam_q2_, adam_mean_, adam_logstd_;
  double log_alpha_ = 0.0;
  double alpha_m_ = 0.0, alpha_v_ = 0.0;  // scalar Adam state for log alpha
  long alpha_step_ = 0;
  ReplayBuffer buffer_;
  std::mt19937_64 rng_policy_, rng_explore_, rng_sample_;
};

// --- evaluation --------------------------------------------------------------

struct EvalMetrics {
  double reward_mean = 0.0;
  double reward_std = 0.0;
  double profit_mean = 0.0;  // mean daily sum of revenue - cost
  double c1_mean = 0.0;
  double c2_mean = 0.0;
  int residual_steps = 0;
  int pmv_violations = 0;
  std::vector<double> episode_rewards;
  std::vector<double> episode_profits;
  std::vector<StepInfo> trace;  // hourly dispatch of the first episode
};

// Deterministic-policy rollouts (action = tanh(mean)).
EvalMetrics evaluate(const GaussianPolicy& policy, Environment& env,
                     int episodes, int first_episode = 0);

}  // namespace iesdr
