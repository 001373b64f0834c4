#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "arsm/simplex.hpp"

namespace arsm {

/// pi with coordinates m and j exchanged.
SimplexPoint swap(const SimplexPoint& pi, std::size_t m, std::size_t j);

/// Pseudo actions z^{c<->j} = argmin_i (ln pi^{c<->j}_i - phi_i) for every
/// pair of categories, plus the true action z.
///
/// The table is symmetric with z on the diagonal, so only the strict lower
/// triangle is ever computed. Entries that differ from z are kept as a sorted
/// list of exceptions; up to kDenseLimit categories the full C x C table is
/// materialized as well so that at() is a direct lookup. Above the limit
/// at() falls back to a binary search over the exceptions.
class PseudoActionTable {
 public:
  static constexpr std::size_t kDenseLimit = 512;

  /// Lower-triangle entry (row > col) whose pseudo action differs from z.
  struct Exception {
    std::uint32_t row;
    std::uint32_t col;
    std::uint32_t action;
  };

  PseudoActionTable(std::size_t num_categories, std::size_t true_action,
                    std::vector<Exception> exceptions);

  std::size_t num_categories() const { return num_categories_; }
  std::size_t true_action() const { return true_action_; }
  std::size_t at(std::size_t c, std::size_t j) const;
  bool is_dense() const { return !dense_.empty(); }

  /// Exceptions ordered by (row, col).
  std::span<const Exception> exceptions() const { return exceptions_; }
  /// Sorted distinct pseudo actions different from the true action.
  const std::vector<std::size_t>& unique_others() const { return unique_others_; }

  bool all_equal_true_action() const { return exceptions_.empty(); }

 private:
  std::size_t num_categories_;
  std::size_t true_action_;
  std::vector<Exception> exceptions_;
  std::vector<std::size_t> unique_others_;
  std::vector<std::uint32_t> dense_;
};

/// Single pseudo action z^{m<->j} given the precomputed true action z.
/// O(1) when z is not one of the swapped indices, O(C) otherwise.
std::size_t pseudo_action(std::span<const double> phi, const SimplexPoint& pi,
                          std::size_t true_action, std::size_t m, std::size_t j);

/// Reference construction: every swap is materialized and argmin'd. O(C^3).
PseudoActionTable pseudo_action_table_naive(std::span<const double> phi,
                                            const SimplexPoint& pi);

/// Case analysis on o_ij = ln pi_i - phi_j; only swaps touching the true
/// action need a full argmin. Produces the same table as the naive version.
PseudoActionTable pseudo_action_table_fast(std::span<const double> phi,
                                           const SimplexPoint& pi);

inline PseudoActionTable pseudo_action_table_naive(const LogitVector& phi,
                                                   const SimplexPoint& pi) {
  return pseudo_action_table_naive(phi.values(), pi);
}
inline PseudoActionTable pseudo_action_table_fast(const LogitVector& phi,
                                                  const SimplexPoint& pi) {
  return pseudo_action_table_fast(phi.values(), pi);
}

}  // namespace arsm
