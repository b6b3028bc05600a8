#include "iesdr/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "iesdr/bounds.hpp"
#include "iesdr/rng.hpp"

namespace iesdr {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

void check_finite(double v, const char* what) {
  if (!std::isfinite(v))
    throw std::runtime_error(std::string("trainer: non-finite ") + what);
}

MatrixXd stack_obs_action(const MatrixXd& obs, const MatrixXd& act) {
  MatrixXd x(obs.rows() + act.rows(), obs.cols());
  x.topRows(obs.rows()) = obs;
  x.bottomRows(act.rows()) = act;
  return x;
}

// Squashed-Gaussian quantities for a whole batch with fixed noise.
struct SampleBatch {
  MatrixXd mu, logstd_raw, logstd, sigma, presquash, action;
  VectorXd log_pi;
  MlpCache mean_cache, logstd_cache;
};

SampleBatch sample_batch_with_noise(const GaussianPolicy& p, const MatrixXd& obs,
                                    const MatrixXd& noise) {
  SampleBatch s;
  s.mu = mlp_forward(p.mean_net, obs, &s.mean_cache);
  s.logstd_raw = mlp_forward(p.logstd_net, obs, &s.logstd_cache);
  s.logstd = s.logstd_raw.cwiseMax(kLogStdMin).cwiseMin(kLogStdMax);
  s.sigma = s.logstd.array().exp();
  s.presquash = s.mu + noise.cwiseProduct(s.sigma);
  s.action = s.presquash.array().tanh();

  const double log2pi = std::log(2.0 * M_PI);
  s.log_pi = VectorXd::Zero(obs.cols());
  for (Eigen::Index j = 0; j < obs.cols(); ++j) {
    double lp = 0.0;
    for (Eigen::Index i = 0; i < s.mu.rows(); ++i) {
      lp += -0.5 * log2pi - s.logstd(i, j) - 0.5 * noise(i, j) * noise(i, j);
      lp -= log_one_minus_tanh_sq(s.presquash(i, j));
    }
    s.log_pi(j) = lp;
  }
  return s;
}

}  // namespace

ReplayBuffer::ReplayBuffer(size_t capacity) : data_(capacity) {
  if (capacity == 0) throw std::invalid_argument("ReplayBuffer: zero capacity");
}

void ReplayBuffer::push(const Transition& t) {
  data_[head_] = t;
  head_ += 1;
  if (head_ == data_.size()) {
    head_ = 0;
    full_ = true;
  }
}

const Transition& ReplayBuffer::at(size_t i) const {
  if (i >= size()) throw std::out_of_range("ReplayBuffer::at");
  const size_t base = full_ ? head_ : 0;
  return data_[(base + i) % data_.size()];
}

std::vector<size_t> ReplayBuffer::sample_indices(size_t n,
                                                 std::mt19937_64& rng) const {
  if (size() == 0) throw std::runtime_error("ReplayBuffer: empty");
  std::uniform_int_distribution<size_t> pick(0, size() - 1);
  std::vector<size_t> idx(n);
  for (auto& i : idx) i = pick(rng);
  return idx;
}

void TrainerConfig::validate() const {
  if (warm_episodes + ramp_episodes + hold_episodes != episodes)
    throw std::invalid_argument("TrainerConfig: phases must sum to episodes");
  if (gamma <= 0.0 || gamma >= 1.0)
    throw std::invalid_argument("TrainerConfig: gamma must be in (0,1)");
  if (tau <= 0.0 || tau > 1.0)
    throw std::invalid_argument("TrainerConfig: tau must be in (0,1]");
  if (batch <= 0 || episodes <= 0 || hidden_width <= 0 || hidden_layers <= 0)
    throw std::invalid_argument("TrainerConfig: sizes must be positive");
  if (lr_actor <= 0 || lr_critic <= 0 || reward_scale <= 0)
    throw std::invalid_argument("TrainerConfig: rates must be positive");
  if (lr_alpha < 0)  // zero freezes the temperature
    throw std::invalid_argument("TrainerConfig: lr_alpha must be >= 0");
  if (kappa < 0 || target_eps < 0)
    throw std::invalid_argument("TrainerConfig: kappa and eps must be >= 0");
  if (bound_batch < 0 || bound_batch > batch)
    throw std::invalid_argument("TrainerConfig: bound_batch out of range");
}

double TrainerConfig::eps_at(int episode) const {
  if (episode < warm_episodes || target_eps == 0.0) return 0.0;
  if (ramp_episodes == 0) return target_eps;
  const int into = episode - warm_episodes;
  if (into >= ramp_episodes) return target_eps;
  return target_eps * static_cast<double>(into + 1) /
         static_cast<double>(ramp_episodes);
}

double TrainerConfig::beta_at(int episode) const {
  if (episode < warm_episodes) return 1.0;
  if (ramp_episodes == 0) return 0.0;
  const int into = episode - warm_episodes;
  if (into >= ramp_episodes) return 0.0;
  return 1.0 - static_cast<double>(into) / static_cast<double>(ramp_episodes);
}

TrainerConfig TrainerConfig::scaled(int episodes) {
  TrainerConfig cfg;
  cfg.episodes = episodes;
  cfg.warm_episodes = episodes / 2;
  cfg.ramp_episodes = episodes * 3 / 10;
  cfg.hold_episodes = episodes - cfg.warm_episodes - cfg.ramp_episodes;
  return cfg;
}

VectorXd soft_targets(const GaussianPolicy& policy, const CriticPair& targets,
                      const Batch& b, const MatrixXd& next_noise, double alpha,
                      double gamma) {
  const SampleBatch next = sample_batch_with_noise(policy, b.next_obs, next_noise);
  const MatrixXd xnext = stack_obs_action(b.next_obs, next.action);
  const MatrixXd q1 = mlp_forward(targets.q1, xnext);
  const MatrixXd q2 = mlp_forward(targets.q2, xnext);
  VectorXd y(b.reward.size());
  for (Eigen::Index j = 0; j < y.size(); ++j) {
    const double qmin = std::min(q1(0, j), q2(0, j));
    y(j) = b.reward(j) +
           gamma * b.not_done(j) * (qmin - alpha * next.log_pi(j));
  }
  return y;
}

CriticLossGrads critic_loss_and_grads(const MlpParams& qnet,
                                      const MatrixXd& obs, const MatrixXd& act,
                                      const VectorXd& targets) {
  const MatrixXd x = stack_obs_action(obs, act);
  MlpCache cache;
  const MatrixXd q = mlp_forward(qnet, x, &cache);
  const double n = static_cast<double>(x.cols());

  CriticLossGrads out;
  MatrixXd dy(1, x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double e = q(0, j) - targets(j);
    out.loss += 0.5 * e * e / n;
    dy(0, j) = e / n;
  }
  out.grads = mlp_backward(qnet, cache, dy);
  return out;
}

ActorLossGrads actor_loss_and_grads(const GaussianPolicy& policy,
                                    const CriticPair& critics,
                                    const MatrixXd& obs, const MatrixXd& noise,
                                    double alpha, double kappa, double eps,
                                    double beta, int bound_batch) {
  const Eigen::Index n = obs.cols();
  const double inv_n = 1.0 / static_cast<double>(n);
  const SampleBatch s = sample_batch_with_noise(policy, obs, noise);

  const MatrixXd x = stack_obs_action(obs, s.action);
  MlpCache c1, c2;
  const MatrixXd q1 = mlp_forward(critics.q1, x, &c1);
  const MatrixXd q2 = mlp_forward(critics.q2, x, &c2);

  // per-sample argmin critic; input gradients via masked backward passes
  MatrixXd mask1 = MatrixXd::Zero(1, n), mask2 = MatrixXd::Zero(1, n);
  VectorXd qmin(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    if (q1(0, j) <= q2(0, j)) {
      qmin(j) = q1(0, j);
      mask1(0, j) = 1.0;
    } else {
      qmin(j) = q2(0, j);
      mask2(0, j) = 1.0;
    }
  }
  MatrixXd dx1, dx2;
  mlp_backward(critics.q1, c1, mask1, &dx1);
  mlp_backward(critics.q2, c2, mask2, &dx2);
  const MatrixXd dq_da =
      dx1.bottomRows(s.action.rows()) + dx2.bottomRows(s.action.rows());

  ActorLossGrads out;
  out.mean_log_pi = s.log_pi.mean();
  out.sac_loss = (alpha * s.log_pi - qmin).mean();

  // dLoss/dU and the direct log-std term
  const MatrixXd sech2 =
      (1.0 - s.action.array().square()).matrix();  // d tanh(u)/du
  const MatrixXd tanh_u = s.action;
  MatrixXd du =
      (alpha * 2.0 * tanh_u.array() - dq_da.array() * sech2.array()).matrix() *
      inv_n;
  MatrixXd dlogstd = du.cwiseProduct(noise).cwiseProduct(s.sigma);
  dlogstd.array() -= alpha * inv_n;  // d(alpha log pi)/d logstd direct term

  // clamp mask
  const MatrixXd clamp_mask =
      ((s.logstd_raw.array() > kLogStdMin) * (s.logstd_raw.array() < kLogStdMax))
          .cast<double>();
  dlogstd = dlogstd.cwiseProduct(clamp_mask);

  out.mean_grads = mlp_backward(policy.mean_net, s.mean_cache, du);
  out.logstd_grads = mlp_backward(policy.logstd_net, s.logstd_cache, dlogstd);

  out.loss = out.sac_loss;
  if (kappa > 0.0 && eps > 0.0) {
    const int nb = bound_batch > 0 ? std::min<Eigen::Index>(bound_batch, n)
                                   : n;
    std::vector<VectorXd> centers;
    centers.reserve(static_cast<size_t>(nb));
    for (Eigen::Index j = 0; j < nb; ++j) centers.push_back(obs.col(j));
    const RegularizerResult reg = sa_regularizer(policy.mean_net, centers, eps, beta);
    out.reg_loss = reg.loss;
    out.mean_grads.add(reg.grads, kappa);
    out.loss += kappa * reg.loss;
  }
  return out;
}

TemperatureLossGrad temperature_loss_and_grad(const GaussianPolicy& policy,
                                              const MatrixXd& obs,
                                              const MatrixXd& noise,
                                              double log_alpha,
                                              double entropy_target) {
  const SampleBatch s = sample_batch_with_noise(policy, obs, noise);
  const double alpha = std::exp(log_alpha);
  TemperatureLossGrad out;
  out.mean_log_pi = s.log_pi.mean();
  out.loss = -alpha * (out.mean_log_pi + entropy_target);
  // d/d(log alpha) = alpha * d/d(alpha)
  out.dlog_alpha = -alpha * (out.mean_log_pi + entropy_target);
  return out;
}

void soft_update(MlpParams& target, const MlpParams& online, double tau) {
  if (target.w.size() != online.w.size())
    throw std::invalid_argument("soft_update: shape mismatch");
  for (size_t k = 0; k < target.w.size(); ++k) {
    if (target.w[k].rows() != online.w[k].rows() ||
        target.w[k].cols() != online.w[k].cols())
      throw std::invalid_argument("soft_update: shape mismatch");
    target.w[k] = tau * online.w[k] + (1.0 - tau) * target.w[k];
    target.b[k] = tau * online.b[k] + (1.0 - tau) * target.b[k];
  }
}

SacTrainer::SacTrainer(Environment& env, TrainerConfig cfg)
    : env_(env), cfg_(cfg), buffer_(cfg.replay_capacity) {
  cfg_.validate();
  auto init_rng = make_rng(cfg_.seed, 5);
  std::vector<int> hidden(static_cast<size_t>(cfg_.hidden_layers),
                          cfg_.hidden_width);
  policy_ = GaussianPolicy::random(Environment::kObsDim, Environment::kActDim,
                                   hidden, init_rng);
  std::vector<int> qdims;
  qdims.push_back(Environment::kObsDim + Environment::kActDim);
  qdims.insert(qdims.end(), hidden.begin(), hidden.end());
  qdims.push_back(1);
  online_.q1 = MlpParams::random(qdims, init_rng);
  online_.q2 = MlpParams::random(qdims, init_rng);
  target_ = online_;

  adam_q1_ = AdamState::zeros_like(online_.q1);
  adam_q2_ = AdamState::zeros_like(online_.q2);
  adam_mean_ = AdamState::zeros_like(policy_.mean_net);
  adam_logstd_ = AdamState::zeros_like(policy_.logstd_net);
  log_alpha_ = std::log(cfg_.init_alpha);

  rng_policy_ = make_rng(cfg_.seed, 2);
  rng_explore_ = make_rng(cfg_.seed, 3);
  rng_sample_ = make_rng(cfg_.seed, 4);
}

double SacTrainer::alpha() const { return std::exp(log_alpha_); }

Batch SacTrainer::sample_batch() {
  const auto idx =
      buffer_.sample_indices(static_cast<size_t>(cfg_.batch), rng_sample_);
  const Eigen::Index n = static_cast<Eigen::Index>(idx.size());
  Batch b;
  b.obs.resize(Environment::kObsDim, n);
  b.act.resize(Environment::kActDim, n);
  b.next_obs.resize(Environment::kObsDim, n);
  b.reward.resize(n);
  b.not_done.resize(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const Transition& t = buffer_.at(idx[static_cast<size_t>(j)]);
    for (int i = 0; i < Environment::kObsDim; ++i) {
      b.obs(i, j) = t.obs[static_cast<size_t>(i)];
      b.next_obs(i, j) = t.next_obs[static_cast<size_t>(i)];
    }
    for (int i = 0; i < Environment::kActDim; ++i)
      b.act(i, j) = t.action[static_cast<size_t>(i)];
    b.reward(j) = t.reward * cfg_.reward_scale;
    b.not_done(j) = t.done ? 0.0 : 1.0;
  }
  return b;
}

std::pair<double, double> SacTrainer::update_critics(const Batch& b) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  MatrixXd noise(Environment::kActDim, b.obs.cols());
  for (Eigen::Index j = 0; j < noise.cols(); ++j)
    for (Eigen::Index i = 0; i < noise.rows(); ++i) noise(i, j) = gauss(rng_policy_);

  const VectorXd y = soft_targets(policy_, target_, b, noise, alpha(), cfg_.gamma);

  CriticLossGrads g1 = critic_loss_and_grads(online_.q1, b.obs, b.act, y);
  CriticLossGrads g2 = critic_loss_and_grads(online_.q2, b.obs, b.act, y);
  check_finite(g1.loss, "critic-1 loss");
  check_finite(g2.loss, "critic-2 loss");
  AdamParams ap;
  ap.lr = cfg_.lr_critic;
  adam_step(online_.q1, g1.grads, adam_q1_, ap);
  adam_step(online_.q2, g2.grads, adam_q2_, ap);
  return {g1.loss, g2.loss};
}

double SacTrainer::update_actor(const Batch& b, double eps, double beta) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  MatrixXd noise(Environment::kActDim, b.obs.cols());
  for (Eigen::Index j = 0; j < noise.cols(); ++j)
    for (Eigen::Index i = 0; i < noise.rows(); ++i) noise(i, j) = gauss(rng_policy_);

  ActorLossGrads g =
      actor_loss_and_grads(policy_, online_, b.obs, noise, alpha(), cfg_.kappa,
                           eps, beta, cfg_.bound_batch);
  check_finite(g.loss, "actor loss");
  AdamParams ap;
  ap.lr = cfg_.lr_actor;
  adam_step(policy_.mean_net, g.mean_grads, adam_mean_, ap);
  adam_step(policy_.logstd_net, g.logstd_grads, adam_logstd_, ap);
  return g.loss;
}

double SacTrainer::update_temperature(const Batch& b) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  MatrixXd noise(Environment::kActDim, b.obs.cols());
  for (Eigen::Index j = 0; j < noise.cols(); ++j)
    for (Eigen::Index i = 0; i < noise.rows(); ++i) noise(i, j) = gauss(rng_policy_);

  const TemperatureLossGrad g = temperature_loss_and_grad(
      policy_, b.obs, noise, log_alpha_, cfg_.entropy_target);
  check_finite(g.loss, "temperature loss");

  // scalar Adam on log alpha
  alpha_step_ += 1;
  alpha_m_ = 0.9 * alpha_m_ + 0.1 * g.dlog_alpha;
  alpha_v_ = 0.999 * alpha_v_ + 0.001 * g.dlog_alpha * g.dlog_alpha;
  const double mc = alpha_m_ / (1.0 - std::pow(0.9, (double)alpha_step_));
  const double vc = alpha_v_ / (1.0 - std::pow(0.999, (double)alpha_step_));
  log_alpha_ -= cfg_.lr_alpha * mc / (std::sqrt(vc) + 1e-8);
  return g.loss;
}

void SacTrainer::update_targets() {
  soft_update(target_.q1, online_.q1, cfg_.tau);
  soft_update(target_.q2, online_.q2, cfg_.tau);
}

TrainResult SacTrainer::train() {
  TrainResult result;
  std::uniform_real_distribution<double> unif(-1.0, 1.0);

  for (int ep = 0; ep < cfg_.episodes; ++ep) {
    const double eps = cfg_.eps_at(ep);
    const double beta = cfg_.beta_at(ep);
    std::vector<double> obs = env_.reset(ep);
    EpisodeLog log;
    log.episode = ep;

    bool done = false;
    while (!done) {
      std::array<double, 6> raw{};
      if (buffer_.size() < static_cast<size_t>(cfg_.warmup_transitions)) {
        for (auto& v : raw) v = unif(rng_explore_);
      } else {
        Eigen::VectorXd o = Eigen::Map<const Eigen::VectorXd>(obs.data(), 9);
        const PolicySample s = sample_action(policy_, o, rng_policy_);
        for (int i = 0; i < 6; ++i) raw[static_cast<size_t>(i)] = s.action(i);
      }

      const StepResult sr = env_.step(raw);
      Transition t;
      std::copy(obs.begin(), obs.end(), t.obs.begin());
      t.action = raw;
      t.reward = sr.reward;
      std::copy(sr.observation.begin(), sr.observation.end(), t.next_obs.begin());
      t.done = sr.done;
      buffer_.push(t);

      log.reward += sr.reward;
      log.c1 += sr.info.c1;
      log.c2 += sr.info.c2;
      obs = sr.observation;
      done = sr.done;

      if (buffer_.size() >= static_cast<size_t>(cfg_.warmup_transitions) &&
          buffer_.size() >= static_cast<size_t>(cfg_.batch)) {
        for (int u = 0; u < cfg_.updates_per_step; ++u) {
          const Batch batch = sample_batch();
          update_critics(batch);
          update_actor(batch, eps, beta);
          update_temperature(batch);
          update_targets();
        }
      }
    }

    log.alpha = alpha();
    log.eps = eps;
    log.beta = beta;
    result.curves.push_back(log);
  }
  result.policy = policy_;
  return result;
}

EvalMetrics evaluate(const GaussianPolicy& policy, Environment& env,
                     int episodes, int first_episode) {
  if (episodes <= 0) throw std::invalid_argument("evaluate: episodes must be positive");
  EvalMetrics m;
  for (int e = 0; e < episodes; ++e) {
    std::vector<double> obs = env.reset(first_episode + e);
    double ep_reward = 0.0, ep_profit = 0.0;
    bool done = false;
    while (!done) {
      const int hour = env.state().hour;
      Eigen::VectorXd o = Eigen::Map<const Eigen::VectorXd>(obs.data(), 9);
      const Eigen::VectorXd a = mean_action(policy, o);
      std::array<double, 6> raw{};
      for (int i = 0; i < 6; ++i) raw[static_cast<size_t>(i)] = a(i);
      const StepResult sr = env.step(raw);

      ep_reward += sr.reward;
      ep_profit += sr.info.revenue - sr.info.cost;
      m.c1_mean += sr.info.c1;
      m.c2_mean += sr.info.c2;
      if (std::abs(sr.info.dispatch.elec_residual_kw) > 1e-6 ||
          std::abs(sr.info.dispatch.heat_residual_kw) > 1e-6 ||
          std::abs(sr.info.dispatch.gas_residual_m3) > 1e-6)
        m.residual_steps += 1;
      const double band = pmv_band(hour);
      if (std::abs(pmv(sr.info.dispatch.t_in_next_c, env.params().comfort)) >
          band + 1e-9)
        m.pmv_violations += 1;
      if (e == 0) m.trace.push_back(sr.info);

      obs = sr.observation;
      done = sr.done;
    }
    m.episode_rewards.push_back(ep_reward);
    m.episode_profits.push_back(ep_profit);
  }

  const double n = static_cast<double>(episodes);
  for (double r : m.episode_rewards) m.reward_mean += r / n;
  for (double p : m.episode_profits) m.profit_mean += p / n;
  double var = 0.0;
  for (double r : m.episode_rewards)
    var += (r - m.reward_mean) * (r - m.reward_mean) / n;
  m.reward_std = std::sqrt(var);
  m.c1_mean /= n;
  m.c2_mean /= n;
  return m;
}

}  // namespace iesdr
