#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "iesdr/bounds.hpp"
#include "iesdr/rng.hpp"
#include "support/fd_check.hpp"

using namespace iesdr;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

MlpParams random_net(std::mt19937_64& rng, std::vector<int> dims) {
  MlpParams p = MlpParams::random(dims, rng, 0.8);
  // shift biases so plenty of neurons straddle zero
  std::normal_distribution<double> gauss(0.0, 0.3);
  for (auto& b : p.b)
    for (Eigen::Index i = 0; i < b.size(); ++i) b(i) += gauss(rng);
  return p;
}

VectorXd random_point_in_ball(const VectorXd& center, double eps,
                              std::mt19937_64& rng) {
  VectorXd x = center;
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) += eps * u(rng);
  return x;
}

}  // namespace

TEST_CASE("ibp: zero radius degenerates to the forward pass") {
  auto rng = make_rng(301);
  const MlpParams net = random_net(rng, {4, 8, 8, 3});
  const VectorXd c = VectorXd::Random(4);
  const BoxBounds box = ibp(net, c, 0.0);
  const VectorXd y = mlp_forward(net, c);
  CHECK((box.lower - y).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((box.upper - y).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("ibp: single-layer interval arithmetic by hand") {
  MlpParams net;
  MatrixXd w(2, 2);
  w << 1.0, -1.0, 2.0, 0.0;
  VectorXd b(2);
  b << 0.0, 1.0;
  net.w = {w};
  net.b = {b};
  const VectorXd c = VectorXd::Constant(2, 0.5);  // box [0,1]^2
  const BoxBounds box = ibp(net, c, 0.5);
  CHECK(box.lower(0) == doctest::Approx(-1.0));
  CHECK(box.upper(0) == doctest::Approx(1.0));
  CHECK(box.lower(1) == doctest::Approx(1.0));
  CHECK(box.upper(1) == doctest::Approx(3.0));
}

TEST_CASE("ibp: soundness on random networks") {
  auto rng = make_rng(302);
  for (int trial = 0; trial < 20; ++trial) {
    const MlpParams net = random_net(rng, {5, 12, 12, 4});
    const VectorXd c = VectorXd::Random(5);
    const double eps = 0.2;
    const BoxBounds box = ibp(net, c, eps);
    for (int s = 0; s < 500; ++s) {
      const VectorXd y = mlp_forward(net, random_point_in_ball(c, eps, rng));
      CHECK(((y - box.lower).array() >= -1e-9).all());
      CHECK(((box.upper - y).array() >= -1e-9).all());
    }
  }
}

TEST_CASE("crown: zero radius is exact") {
  auto rng = make_rng(303);
  const MlpParams net = random_net(rng, {4, 10, 3});
  const VectorXd c = VectorXd::Random(4);
  const CrownBounds cb = crown(net, c, 0.0);
  const VectorXd y = mlp_forward(net, c);
  CHECK((cb.box.lower - y).cwiseAbs().maxCoeff() < 1e-9);
  CHECK((cb.box.upper - y).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("crown: exact on an all-stable network") {
  // Large positive biases keep every hidden pre-activation interval above 0,
  // so the network is affine over the box and CROWN must be exact.
  auto rng = make_rng(304);
  MlpParams net = MlpParams::random({3, 6, 2}, rng, 0.8);
  for (auto& b : net.b) b.array() += 10.0;
  const VectorXd c = VectorXd::Random(3);
  const double eps = 0.1;

  const MatrixXd m = net.w[1] * net.w[0];  // affine composition
  const VectorXd off = net.w[1] * net.b[0] + net.b[1];
  const VectorXd span = eps * m.cwiseAbs().rowwise().sum();
  const VectorXd exact_lo = m * c - span + off;
  const VectorXd exact_hi = m * c + span + off;

  const CrownBounds cb = crown(net, c, eps);
  CHECK((cb.box.lower - exact_lo).cwiseAbs().maxCoeff() < 1e-9);
  CHECK((cb.box.upper - exact_hi).cwiseAbs().maxCoeff() < 1e-9);

  const BoxBounds ib = ibp(net, c, eps);
  CHECK(((cb.box.upper - cb.box.lower).array() <=
         (ib.upper - ib.lower).array() + 1e-12).all());
}

TEST_CASE("crown: sound, contained in IBP, linear bounds valid") {
  auto rng = make_rng(305);
  for (int trial = 0; trial < 30; ++trial) {
    const MlpParams net = random_net(rng, {4, 10, 10, 3});
    const VectorXd c = VectorXd::Random(4);
    const double eps = 0.15;
    const CrownBounds cb = crown(net, c, eps);
    const BoxBounds ib = ibp(net, c, eps);

    CHECK(((cb.box.lower.array()) >= ib.lower.array() - 1e-9).all());
    CHECK(((cb.box.upper.array()) <= ib.upper.array() + 1e-9).all());

    for (int s = 0; s < 300; ++s) {
      const VectorXd x = random_point_in_ball(c, eps, rng);
      const VectorXd y = mlp_forward(net, x);
      CHECK(((y - cb.box.lower).array() >= -1e-9).all());
      CHECK(((cb.box.upper - y).array() >= -1e-9).all());
      const VectorXd lin_up = cb.linear.upper_slope * x + cb.linear.upper_intercept;
      const VectorXd lin_lo = cb.linear.lower_slope * x + cb.linear.lower_intercept;
      CHECK(((lin_up - y).array() >= -1e-9).all());
      CHECK(((y - lin_lo).array() >= -1e-9).all());
    }
  }
}

TEST_CASE("crown_ibp: reduction identities and the midpoint mix") {
  auto rng = make_rng(306);
  const MlpParams net = random_net(rng, {4, 12, 12, 3});
  const VectorXd c = VectorXd::Random(4);
  const double eps = 0.1;

  const BoxBounds ib = ibp(net, c, eps);
  const CrownBounds cb = crown(net, c, eps);
  const BoxBounds mix0 = crown_ibp(net, c, eps, 0.0);
  const BoxBounds mix1 = crown_ibp(net, c, eps, 1.0);
  const BoxBounds mix5 = crown_ibp(net, c, eps, 0.5);

  CHECK((mix0.lower - ib.lower).cwiseAbs().maxCoeff() == 0.0);
  CHECK((mix0.upper - ib.upper).cwiseAbs().maxCoeff() == 0.0);
  CHECK((mix1.lower - cb.box.lower).cwiseAbs().maxCoeff() == 0.0);
  CHECK((mix1.upper - cb.box.upper).cwiseAbs().maxCoeff() == 0.0);
  CHECK((mix5.upper - 0.5 * (ib.upper + cb.box.upper)).cwiseAbs().maxCoeff() <
        1e-12);
  CHECK((mix5.lower - 0.5 * (ib.lower + cb.box.lower)).cwiseAbs().maxCoeff() <
        1e-12);
  CHECK_THROWS_AS(crown_ibp(net, c, eps, 1.5), std::invalid_argument);
}

TEST_CASE("crown_ibp: mixed box is sound for any beta") {
  auto rng = make_rng(307);
  const MlpParams net = random_net(rng, {4, 10, 10, 2});
  const VectorXd c = VectorXd::Random(4);
  const double eps = 0.2;
  for (double beta : {0.0, 0.3, 0.7, 1.0}) {
    const BoxBounds box = crown_ibp(net, c, eps, beta);
    for (int s = 0; s < 300; ++s) {
      const VectorXd y = mlp_forward(net, random_point_in_ball(c, eps, rng));
      CHECK(((y - box.lower).array() >= -1e-9).all());
      CHECK(((box.upper - y).array() >= -1e-9).all());
    }
  }
}

TEST_CASE("sa_regularizer: zero radius means zero loss and zero gradients") {
  auto rng = make_rng(308);
  const MlpParams net = random_net(rng, {4, 8, 3});
  std::vector<VectorXd> batch;
  for (int i = 0; i < 5; ++i) batch.push_back(VectorXd::Random(4));
  const RegularizerResult r = sa_regularizer(net, batch, 0.0, 0.5);
  CHECK(r.loss == 0.0);
  CHECK(r.grads.squared_norm() == 0.0);
}

TEST_CASE("sa_regularizer: loss is nondecreasing in the radius") {
  auto rng = make_rng(309);
  const MlpParams net = random_net(rng, {4, 10, 10, 3});
  std::vector<VectorXd> batch;
  for (int i = 0; i < 4; ++i) batch.push_back(VectorXd::Random(4));
  double prev = -1.0;
  for (double eps : {0.0, 0.01, 0.05, 0.1, 0.2, 0.5}) {
    for (double beta : {0.0, 0.5, 1.0}) {
      const double loss = sa_regularizer(net, batch, eps, beta).loss;
      CHECK(loss >= -1e-12);
      (void)beta;
    }
    const double loss_mid = sa_regularizer(net, batch, eps, 0.5).loss;
    CHECK(loss_mid >= prev - 1e-12);
    prev = loss_mid;
  }
}

TEST_CASE("sa_regularizer: bound width dominates the realized divergence") {
  // For sampled perturbations, |mu(s_hat) - mu(s)|^2 never exceeds the
  // squared width of the certified box around s.
  auto rng = make_rng(310);
  const MlpParams net = random_net(rng, {4, 10, 6});
  const double eps = 0.1;
  for (int trial = 0; trial < 10; ++trial) {
    const VectorXd s = VectorXd::Random(4);
    const BoxBounds box = crown_ibp(net, s, eps, 0.5);
    const double width2 = (box.upper - box.lower).squaredNorm();
    const VectorXd base = mlp_forward(net, s);
    for (int k = 0; k < 200; ++k) {
      const VectorXd shat = random_point_in_ball(s, eps, rng);
      CHECK((mlp_forward(net, shat) - base).squaredNorm() <= width2 + 1e-9);
    }
  }
}

TEST_CASE("sa_regularizer: gradient matches central finite differences") {
  auto rng = make_rng(311);
  MlpParams net = random_net(rng, {4, 16, 16, 2});
  std::vector<VectorXd> batch;
  for (int i = 0; i < 3; ++i) batch.push_back(VectorXd::Random(4));
  const double eps = 0.05;
  for (double beta : {0.0, 0.4, 1.0}) {
    const RegularizerResult r = sa_regularizer(net, batch, eps, beta);
    auto loss = [&]() { return sa_regularizer(net, batch, eps, beta).loss; };
    const auto rep = fdtest::fd_check(net, r.grads, loss, 1e-6, 1e-3, 250, rng,
                                      "sa_regularizer");
    CHECK(rep.failed == 0);
    CHECK(rep.checked > 100);
  }
}
