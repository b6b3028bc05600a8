#include "iesdr/mlp.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace iesdr {

size_t MlpParams::param_count() const {
  size_t n = 0;
  for (size_t k = 0; k < w.size(); ++k)
    n += static_cast<size_t>(w[k].size()) + static_cast<size_t>(b[k].size());
  return n;
}

MlpParams MlpParams::random(const std::vector<int>& dims, std::mt19937_64& rng,
                            double out_scale) {
  if (dims.size() < 2) throw std::invalid_argument("MlpParams: need >= 2 dims");
  MlpParams p;
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (size_t k = 0; k + 1 < dims.size(); ++k) {
    const int in = dims[k];
    const int out = dims[k + 1];
    Eigen::MatrixXd w(out, in);
    const bool last = (k + 2 == dims.size());
    const double he = std::sqrt(2.0 / static_cast<double>(in));
    for (int i = 0; i < out; ++i)
      for (int j = 0; j < in; ++j)
        w(i, j) = last ? out_scale * unif(rng) : he * gauss(rng);
    p.w.push_back(std::move(w));
    p.b.push_back(Eigen::VectorXd::Zero(out));
  }
  return p;
}

void MlpParams::validate() const {
  if (w.size() != b.size() || w.empty())
    throw std::invalid_argument("MlpParams: inconsistent layer lists");
  for (size_t k = 0; k < w.size(); ++k) {
    if (w[k].rows() != b[k].size())
      throw std::invalid_argument("MlpParams: bias / weight mismatch");
    if (k + 1 < w.size() && w[k + 1].cols() != w[k].rows())
      throw std::invalid_argument("MlpParams: layer dimensions do not chain");
    if (!w[k].allFinite() || !b[k].allFinite())
      throw std::invalid_argument("MlpParams: non-finite parameters");
  }
}

MlpGrads MlpGrads::zeros_like(const MlpParams& p) {
  MlpGrads g;
  for (size_t k = 0; k < p.w.size(); ++k) {
    g.w.push_back(Eigen::MatrixXd::Zero(p.w[k].rows(), p.w[k].cols()));
    g.b.push_back(Eigen::VectorXd::Zero(p.b[k].size()));
  }
  return g;
}

void MlpGrads::scale(double a) {
  for (auto& m : w) m *= a;
  for (auto& v : b) v *= a;
}

void MlpGrads::add(const MlpGrads& other, double a) {
  for (size_t k = 0; k < w.size(); ++k) {
    w[k] += a * other.w[k];
    b[k] += a * other.b[k];
  }
}

double MlpGrads::squared_norm() const {
  double s = 0.0;
  for (const auto& m : w) s += m.squaredNorm();
  for (const auto& v : b) s += v.squaredNorm();
  return s;
}

Eigen::MatrixXd mlp_forward(const MlpParams& net, const Eigen::MatrixXd& x,
                            MlpCache* cache) {
  if (x.rows() != net.input_dim())
    throw std::invalid_argument("mlp_forward: input dimension mismatch");
  if (cache) {
    cache->input = x;
    cache->pre.clear();
    cache->post.clear();
  }
  Eigen::MatrixXd h = x;
  for (size_t k = 0; k < net.w.size(); ++k) {
    Eigen::MatrixXd z = (net.w[k] * h).colwise() + net.b[k];
    if (cache) cache->pre.push_back(z);
    if (k + 1 < net.w.size()) {
      h = z.cwiseMax(0.0);
      if (cache) cache->post.push_back(h);
    } else {
      h = std::move(z);
    }
  }
  return h;
}

MlpGrads mlp_backward(const MlpParams& net, const MlpCache& cache,
                      const Eigen::MatrixXd& dy, Eigen::MatrixXd* dx) {
  const size_t L = net.w.size();
  if (cache.pre.size() != L)
    throw std::invalid_argument("mlp_backward: cache does not match network");
  if (dy.rows() != net.output_dim() || dy.cols() != cache.input.cols())
    throw std::invalid_argument("mlp_backward: dy shape mismatch");

  MlpGrads g = MlpGrads::zeros_like(net);
  Eigen::MatrixXd delta = dy;
  for (size_t k = L; k-- > 0;) {
    const Eigen::MatrixXd& in = k == 0 ? cache.input : cache.post[k - 1];
    g.w[k] = delta * in.transpose();
    g.b[k] = delta.rowwise().sum();
    if (k > 0) {
      delta = net.w[k].transpose() * delta;
      delta = delta.cwiseProduct(
          (cache.pre[k - 1].array() > 0.0).cast<double>().matrix());
    } else if (dx) {
      *dx = net.w[0].transpose() * delta;
    }
  }
  return g;
}

void mlp_axpy(MlpParams& p, const MlpGrads& g, double a) {
  for (size_t k = 0; k < p.w.size(); ++k) {
    p.w[k] += a * g.w[k];
    p.b[k] += a * g.b[k];
  }
}

AdamState AdamState::zeros_like(const MlpParams& p) {
  AdamState st;
  for (size_t k = 0; k < p.w.size(); ++k) {
    st.mw.push_back(Eigen::MatrixXd::Zero(p.w[k].rows(), p.w[k].cols()));
    st.vw.push_back(Eigen::MatrixXd::Zero(p.w[k].rows(), p.w[k].cols()));
    st.mb.push_back(Eigen::VectorXd::Zero(p.b[k].size()));
    st.vb.push_back(Eigen::VectorXd::Zero(p.b[k].size()));
  }
  return st;
}

void adam_step(MlpParams& params, const MlpGrads& grads, AdamState& st,
               const AdamParams& ap) {
  if (st.mw.size() != params.w.size())
    throw std::invalid_argument("adam_step: state does not match parameters");
  st.step += 1;
  const double bc1 = 1.0 - std::pow(ap.beta1, static_cast<double>(st.step));
  const double bc2 = 1.0 - std::pow(ap.beta2, static_cast<double>(st.step));
  for (size_t k = 0; k < params.w.size(); ++k) {
    st.mw[k] = ap.beta1 * st.mw[k] + (1.0 - ap.beta1) * grads.w[k];
    st.vw[k] = ap.beta2 * st.vw[k] +
               (1.0 - ap.beta2) * grads.w[k].cwiseProduct(grads.w[k]);
    st.mb[k] = ap.beta1 * st.mb[k] + (1.0 - ap.beta1) * grads.b[k];
    st.vb[k] = ap.beta2 * st.vb[k] +
               (1.0 - ap.beta2) * grads.b[k].cwiseProduct(grads.b[k]);

    params.w[k].array() -= ap.lr * (st.mw[k].array() / bc1) /
                           ((st.vw[k].array() / bc2).sqrt() + ap.eps);
    params.b[k].array() -= ap.lr * (st.mb[k].array() / bc1) /
                           ((st.vb[k].array() / bc2).sqrt() + ap.eps);
  }
}

GaussianPolicy GaussianPolicy::random(int obs_dim, int act_dim,
                                      const std::vector<int>& hidden,
                                      std::mt19937_64& rng) {
  std::vector<int> dims;
  dims.push_back(obs_dim);
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(act_dim);
  GaussianPolicy p;
  p.mean_net = MlpParams::random(dims, rng);
  p.logstd_net = MlpParams::random(dims, rng);
  return p;
}

double log_one_minus_tanh_sq(double u) {
  const double a = std::abs(u);
  return 2.0 * (std::log(2.0) - a - std::log1p(std::exp(-2.0 * a)));
}

PolicySample policy_sample_with_noise(const GaussianPolicy& p,
                                      const Eigen::VectorXd& obs,
                                      const Eigen::VectorXd& noise) {
  PolicySample s;
  s.mu = mlp_forward(p.mean_net, obs);
  s.log_std = mlp_forward(p.logstd_net, obs)
                  .cwiseMax(kLogStdMin)
                  .cwiseMin(kLogStdMax);
  s.noise = noise;
  const Eigen::VectorXd sigma = s.log_std.array().exp().matrix();
  s.presquash = s.mu + noise.cwiseProduct(sigma);
  s.action = s.presquash.array().tanh().matrix();

  double lp = 0.0;
  const double log2pi = std::log(2.0 * M_PI);
  for (int i = 0; i < s.mu.size(); ++i) {
    lp += -0.5 * log2pi - s.log_std(i) - 0.5 * noise(i) * noise(i);
    lp -= log_one_minus_tanh_sq(s.presquash(i));
  }
  s.log_prob = lp;
  return s;
}

PolicySample sample_action(const GaussianPolicy& p, const Eigen::VectorXd& obs,
                           std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::VectorXd noise(p.act_dim());
  for (int i = 0; i < noise.size(); ++i) noise(i) = gauss(rng);
  return policy_sample_with_noise(p, obs, noise);
}

Eigen::VectorXd mean_action(const GaussianPolicy& p, const Eigen::VectorXd& obs) {
  return mlp_forward(p.mean_net, obs).array().tanh().matrix();
}

namespace {

nlohmann::json net_to_json(const MlpParams& net) {
  nlohmann::json layers = nlohmann::json::array();
  for (size_t k = 0; k < net.w.size(); ++k) {
    nlohmann::json layer;
    layer["rows"] = net.w[k].rows();
    layer["cols"] = net.w[k].cols();
    std::vector<double> wf(net.w[k].data(), net.w[k].data() + net.w[k].size());
    std::vector<double> bf(net.b[k].data(), net.b[k].data() + net.b[k].size());
    layer["w"] = wf;  // column-major flat
    layer["b"] = bf;
    layers.push_back(std::move(layer));
  }
  return layers;
}

MlpParams net_from_json(const nlohmann::json& layers) {
  MlpParams net;
  for (const auto& layer : layers) {
    const auto rows = layer.at("rows").get<Eigen::Index>();
    const auto cols = layer.at("cols").get<Eigen::Index>();
    const auto wf = layer.at("w").get<std::vector<double>>();
    const auto bf = layer.at("b").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(wf.size()) != rows * cols ||
        static_cast<Eigen::Index>(bf.size()) != rows)
      throw std::runtime_error("checkpoint: layer size mismatch");
    Eigen::MatrixXd w(rows, cols);
    std::copy(wf.begin(), wf.end(), w.data());
    Eigen::VectorXd b(rows);
    std::copy(bf.begin(), bf.end(), b.data());
    net.w.push_back(std::move(w));
    net.b.push_back(std::move(b));
  }
  net.validate();
  return net;
}

}  // namespace

void save_policy(const GaussianPolicy& p, const std::string& path) {
  nlohmann::json j;
  j["format"] = "iesdr-policy";
  j["version"] = 1;
  j["obs_dim"] = p.obs_dim();
  j["act_dim"] = p.act_dim();
  j["mean_net"] = net_to_json(p.mean_net);
  j["logstd_net"] = net_to_json(p.logstd_net);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_policy: cannot write " + path);
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("save_policy: write failed " + path);
}

GaussianPolicy load_policy(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_policy: cannot open " + path);
  nlohmann::json j;
  in >> j;
  if (j.value("format", "") != "iesdr-policy" || j.value("version", 0) != 1)
    throw std::runtime_error("load_policy: unsupported checkpoint format");
  GaussianPolicy p;
  p.mean_net = net_from_json(j.at("mean_net"));
  p.logstd_net = net_from_json(j.at("logstd_net"));
  return p;
}

}  // namespace iesdr
