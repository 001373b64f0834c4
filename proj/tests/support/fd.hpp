// Central-difference check of Mlp::backward.
#pragma once

#include <algorithm>
#include <cmath>

#include "arsm/network.hpp"

namespace fd {

inline Eigen::VectorXd random_vector(Eigen::Index n, arsm::RngStream& rng, double lo = -1.0, double hi = 1.0) {
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = rng.uniform(lo, hi);
  return v;
}

// Smooth scalar loss of the network output: <w, y> + 0.5 |y|^2.
inline double loss(const arsm::Mlp& net, const Eigen::VectorXd& x, const Eigen::VectorXd& w) {
  const Eigen::VectorXd y = net.forward(x);
  return w.dot(y) + 0.5 * y.squaredNorm();
}

// Worst relative error between backward() and central differences, over all
// parameters and the input.
inline double fd_worst_relative_error(arsm::Mlp net, const Eigen::VectorXd& x, const Eigen::VectorXd& w) {
  const double h = 1e-4;
  arsm::Mlp::Tape tape;
  const Eigen::VectorXd y = net.forward(x, &tape);
  arsm::Gradients grads = net.zero_gradients();
  const Eigen::VectorXd dx = net.backward(tape, w + y, grads);

  double worst = 0.0;
  auto compare = [&worst](double analytic, double numeric) {
    const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
    worst = std::max(worst, std::abs(analytic - numeric) / scale);
  };
  auto params = net.parameters();
  for (std::size_t p = 0; p < params.size(); ++p) {
    Eigen::MatrixXd& m = *params[p];
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      const double keep = m.data()[i];
      m.data()[i] = keep + h;
      const double up = loss(net, x, w);
      m.data()[i] = keep - h;
      const double dn = loss(net, x, w);
      m.data()[i] = keep;
      compare(grads[p].data()[i], (up - dn) / (2 * h));
    }
  }
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Eigen::VectorXd xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    compare(dx[i], (loss(net, xp, w) - loss(net, xm, w)) / (2 * h));
  }
  return worst;
}

}  // namespace fd
