#include "arsm/pseudo_actions.hpp"

#include <algorithm>
#include <stdexcept>

namespace arsm {

namespace {

void check_dims(std::span<const double> phi, const SimplexPoint& pi) {
  if (phi.size() != pi.size() || phi.size() < 2)
    throw std::invalid_argument("pseudo actions: dimension mismatch");
}

// Argmin of ln pi^{m<->j}_i - phi_i without materializing the swap.
std::size_t swapped_argmin(std::span<const double> phi, const SimplexPoint& pi,
                           std::size_t m, std::size_t j) {
  std::size_t best = 0;
  double best_val = 0.0;
  for (std::size_t i = 0; i < phi.size(); ++i) {
    const std::size_t src = (i == m) ? j : (i == j) ? m : i;
    const double v = pi.log_pi[src] - phi[i];
    if (i == 0 || v < best_val) {
      best_val = v;
      best = i;
    }
  }
  return best;
}

// Lowest value wins; equal values go to the lowest index.
struct Candidate {
  std::size_t index;
  double value;
  void offer(std::size_t i, double v) {
    if (v < value || (v == value && i < index)) {
      index = i;
      value = v;
    }
  }
};

}  // namespace

SimplexPoint swap(const SimplexPoint& pi, std::size_t m, std::size_t j) {
  if (m >= pi.size() || j >= pi.size())
    throw std::invalid_argument("swap: index out of range");
  SimplexPoint out = pi;
  std::swap(out.pi[m], out.pi[j]);
  std::swap(out.log_pi[m], out.log_pi[j]);
  return out;
}

PseudoActionTable::PseudoActionTable(std::size_t num_categories,
                                     std::size_t true_action,
                                     std::vector<Exception> exceptions)
    : num_categories_(num_categories),
      true_action_(true_action),
      exceptions_(std::move(exceptions)) {
  if (true_action_ >= num_categories_)
    throw std::invalid_argument("PseudoActionTable: true action out of range");
  std::sort(exceptions_.begin(), exceptions_.end(), [](const auto& a, const auto& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  for (const auto& e : exceptions_) unique_others_.push_back(e.action);
  std::sort(unique_others_.begin(), unique_others_.end());
  unique_others_.erase(std::unique(unique_others_.begin(), unique_others_.end()),
                       unique_others_.end());

  if (num_categories_ <= kDenseLimit) {
    dense_.assign(num_categories_ * num_categories_,
                  static_cast<std::uint32_t>(true_action_));
    for (const auto& e : exceptions_) {
      dense_[e.row * num_categories_ + e.col] = e.action;
      dense_[e.col * num_categories_ + e.row] = e.action;
    }
  }
}

std::size_t PseudoActionTable::at(std::size_t c, std::size_t j) const {
  if (c >= num_categories_ || j >= num_categories_)
    throw std::out_of_range("PseudoActionTable::at: index out of range");
  if (!dense_.empty()) return dense_[c * num_categories_ + j];
  if (c == j) return true_action_;
  const auto row = static_cast<std::uint32_t>(std::max(c, j));
  const auto col = static_cast<std::uint32_t>(std::min(c, j));
  auto it = std::lower_bound(exceptions_.begin(), exceptions_.end(), Exception{row, col, 0},
                             [](const auto& a, const auto& b) {
                               return a.row != b.row ? a.row < b.row : a.col < b.col;
                             });
  if (it != exceptions_.end() && it->row == row && it->col == col) return it->action;
  return true_action_;
}

std::size_t pseudo_action(std::span<const double> phi, const SimplexPoint& pi,
                          std::size_t true_action, std::size_t m, std::size_t j) {
  if (m == j) return true_action;
  if (true_action == m || true_action == j) return swapped_argmin(phi, pi, m, j);
  // Only positions m and j change; every untouched position is >= o_min and,
  // by the tie rule, any untouched position equal to o_min has index > z.
  Candidate best{true_action, pi.log_pi[true_action] - phi[true_action]};
  best.offer(m, pi.log_pi[j] - phi[m]);
  best.offer(j, pi.log_pi[m] - phi[j]);
  return best.index;
}

PseudoActionTable pseudo_action_table_naive(std::span<const double> phi,
                                            const SimplexPoint& pi) {
  check_dims(phi, pi);
  const std::size_t C = phi.size();
  const std::size_t z = racing_sample(phi, pi);
  std::vector<PseudoActionTable::Exception> exceptions;
  for (std::size_t m = 1; m < C; ++m) {
    for (std::size_t j = 0; j < m; ++j) {
      const std::size_t a = racing_sample(phi, swap(pi, m, j));
      if (a != z)
        exceptions.push_back({static_cast<std::uint32_t>(m), static_cast<std::uint32_t>(j),
                              static_cast<std::uint32_t>(a)});
    }
  }
  return PseudoActionTable(C, z, std::move(exceptions));
}

PseudoActionTable pseudo_action_table_fast(std::span<const double> phi,
                                           const SimplexPoint& pi) {
  check_dims(phi, pi);
  const std::size_t C = phi.size();
  const std::size_t z = racing_sample(phi, pi);
  const double o_min = pi.log_pi[z] - phi[z];
  std::vector<PseudoActionTable::Exception> exceptions;
  for (std::size_t m = 1; m < C; ++m) {
    const double log_pi_m = pi.log_pi[m];
    const double phi_m = phi[m];
    for (std::size_t j = 0; j < m; ++j) {
      std::size_t a;
      if (m == z || j == z) {
        a = swapped_argmin(phi, pi, m, j);
      } else {
        const double at_m = pi.log_pi[j] - phi_m;  // o_jm
        const double at_j = log_pi_m - phi[j];     // o_mj
        if (at_m > o_min && at_j > o_min) continue;
        Candidate best{z, o_min};
        best.offer(m, at_m);
        best.offer(j, at_j);
        a = best.index;
      }
      if (a != z)
        exceptions.push_back({static_cast<std::uint32_t>(m), static_cast<std::uint32_t>(j),
                              static_cast<std::uint32_t>(a)});
    }
  }
  return PseudoActionTable(C, z, std::move(exceptions));
}

}  // namespace arsm
