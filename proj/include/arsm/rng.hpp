#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <initializer_list>

namespace arsm {

/// SplitMix64 finalizer; used for seeding and for folding stream coordinates.
std::uint64_t splitmix64(std::uint64_t x);

/// Folds a list of coordinates (iteration, timestep, action, ...) into a
/// single stream id. Order matters.
std::uint64_t derive_stream_id(std::initializer_list<std::uint64_t> parts);

/// Reproducible random stream keyed by (seed, stream_id).
///
/// Backed by xoshiro256**. The state is expanded from the key with
/// SplitMix64, so any (seed, stream_id) pair gives an independent-looking
/// stream and identical keys give bitwise-identical draws. Streams are cheap
/// to construct, which lets callers create one per Monte Carlo replicate or
/// per rollout instead of sharing a generator across threads.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  /// Child stream with the same seed and a stream id derived from this
  /// stream's id and `sub`. Does not advance this stream.
  RngStream split(std::uint64_t sub) const;

  std::uint64_t next();
  std::uint64_t operator()() { return next(); }
  static constexpr std::uint64_t min() { return 0; }
  static constexpr std::uint64_t max() { return ~std::uint64_t{0}; }

  /// Uniform on the open interval (0, 1); never returns 0 or 1.
  double uniform_open();
  /// Uniform on [lo, hi).
  double uniform(double lo, double hi);
  /// Standard exponential, -ln(u) with u from uniform_open().
  double exponential();
  /// Uniform integer in [0, n). n must be positive.
  std::size_t uniform_index(std::size_t n);

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::array<std::uint64_t, 4> state_{};
};

}  // namespace arsm
