#include <cmath>
#include <stdexcept>
#include <vector>

#include "arsm/network.hpp"
#include "doctest.h"
#include "fd.hpp"

using namespace arsm;

using fd::random_vector;
using fd::fd_worst_relative_error;

TEST_CASE("mlp: dimension validation") {
  CHECK_THROWS_AS(Mlp(std::vector<LayerSpec>{}), std::invalid_argument);
  CHECK_THROWS_AS(Mlp({LayerSpec::linear(3, 4), LayerSpec::linear(5, 2)}), std::invalid_argument);
  CHECK_THROWS_AS(Mlp({LayerSpec::linear(3, 4), LayerSpec::softmax_heads(3, 2)}), std::invalid_argument);
  const Mlp net({LayerSpec::linear(3, 4), LayerSpec::relu(4), LayerSpec::linear(4, 2)});
  CHECK_THROWS_AS(net.forward(Eigen::VectorXd::Zero(5)), std::invalid_argument);
  CHECK(net.parameter_count() == 3 * 4 + 4 + 4 * 2 + 2);
}

TEST_CASE("mlp: zero weights give uniform softmax heads") {
  const Mlp net({LayerSpec::linear(5, 6), LayerSpec::softmax_heads(2, 3)});
  const Eigen::VectorXd out = net.forward(Eigen::VectorXd::Constant(5, 0.7));
  for (const auto& head : split_heads(out, 2, 3)) {
    const ProbVector p = softmax(head);
    for (std::size_t c = 0; c < 3; ++c) CHECK(p[c] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  }
}

TEST_CASE("mlp: identity linear layer passes inputs through") {
  Mlp net({LayerSpec::linear(4, 4)});
  *net.parameters()[0] = Eigen::MatrixXd::Identity(4, 4);
  RngStream rng(1, 0);
  const Eigen::VectorXd x = random_vector(4, rng);
  CHECK((net.forward(x) - x).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("mlp: random net gives finite outputs on [0,1]^d and infer matches forward") {
  RngStream rng(2, 0);
  Mlp net({LayerSpec::linear(8, 16), LayerSpec::leaky_relu(16), LayerSpec::linear(16, 12),
           LayerSpec::softmax_heads(3, 4)});
  net.init_glorot(rng);
  Mlp::Workspace ws;
  for (int i = 0; i < 200; ++i) {
    const Eigen::VectorXd x = random_vector(8, rng, 0.0, 1.0);
    const Eigen::VectorXd y = net.forward(x);
    REQUIRE(y.allFinite());
    REQUIRE((net.infer(x, ws) - y).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("mlp: backward needs a tape; zero output gradient gives zero parameter gradient") {
  RngStream rng(3, 0);
  Mlp net({LayerSpec::linear(3, 5), LayerSpec::leaky_relu(5), LayerSpec::linear(5, 2)});
  net.init_glorot(rng);
  Gradients g = net.zero_gradients();
  CHECK_THROWS_AS(net.backward(Mlp::Tape{}, Eigen::VectorXd::Zero(2), g), StateError);
  Mlp::Tape tape;
  net.forward(random_vector(3, rng), &tape);
  net.backward(tape, Eigen::VectorXd::Zero(2), g);
  for (const auto& m : g) CHECK(m.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("mlp: manual backprop matches finite differences on every layer type") {
  RngStream rng(4, 0);
  struct Case {
    const char* name;
    std::vector<LayerSpec> specs;
  };
  const std::vector<Case> cases = {
      {"linear", {LayerSpec::linear(5, 3)}},
      {"leaky_relu", {LayerSpec::linear(4, 6), LayerSpec::leaky_relu(6, 0.2), LayerSpec::linear(6, 3)}},
      {"relu", {LayerSpec::linear(4, 6), LayerSpec::relu(6), LayerSpec::linear(6, 3)}},
      {"softmax_heads", {LayerSpec::linear(4, 6), LayerSpec::softmax_heads(2, 3)}},
      {"stack", {LayerSpec::linear(6, 8), LayerSpec::leaky_relu(8), LayerSpec::linear(8, 8),
                 LayerSpec::relu(8), LayerSpec::linear(8, 6), LayerSpec::softmax_heads(3, 2)}},
  };
  for (const auto& c : cases) {
    for (int trial = 0; trial < 5; ++trial) {
      Mlp net(c.specs);
      net.init_glorot(rng);
      // Nonzero biases so both sides of every kink are exercised.
      for (auto* p : net.parameters())
        if (p->cols() == 1) *p = random_vector(p->rows(), rng, -0.5, 0.5);
      const Eigen::VectorXd x = random_vector(static_cast<Eigen::Index>(net.input_dim()), rng);
      const Eigen::VectorXd w = random_vector(static_cast<Eigen::Index>(net.output_dim()), rng);
      const double err = fd_worst_relative_error(net, x, w);
      INFO(c.name);
      CHECK(err < 1e-5);
    }
  }
}

TEST_CASE("heads helpers") {
  const Eigen::VectorXd oh = one_hot({2, 0}, 3);
  CHECK(oh.size() == 6);
  CHECK(oh[2] == 1.0);
  CHECK(oh[3] == 1.0);
  CHECK(oh.sum() == 2.0);
  CHECK_THROWS_AS(one_hot({3}, 3), std::invalid_argument);
  const Eigen::VectorXd f = flatten_heads({{1, 2}, {3, 4}});
  CHECK(f[2] == 3.0);
  CHECK_THROWS_AS(split_heads(f, 3, 2), std::invalid_argument);
}

TEST_CASE("adam: ascends a concave quadratic and is reproducible") {
  auto run = [] {
    Eigen::MatrixXd p = Eigen::MatrixXd::Constant(2, 1, 3.0);
    std::vector<Eigen::MatrixXd*> params = {&p};
    Adam adam(params, Adam::Options{0.05, 0.9, 0.999, 1e-8});
    for (int i = 0; i < 2000; ++i) {
      Gradients g = {-2.0 * (p.array() - 1.0).matrix()};
      adam.ascend(params, g);
    }
    return p;
  };
  const Eigen::MatrixXd a = run(), b = run();
  CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
  CHECK(std::abs(a(0, 0) - 1.0) < 1e-2);
  // First step moves every coordinate by the learning rate.
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(3, 1);
  std::vector<Eigen::MatrixXd*> params = {&p};
  Adam adam(params, Adam::Options{0.1, 0.9, 0.999, 1e-8});
  Gradients g = {(Eigen::MatrixXd(3, 1) << 5.0, -0.01, 2.0).finished()};
  adam.ascend(params, g);
  CHECK(p(0, 0) == doctest::Approx(0.1).epsilon(1e-6));
  CHECK(p(1, 0) == doctest::Approx(-0.1).epsilon(1e-4));
  CHECK(adam.steps() == 1);
}
