#pragma once

#include <array>
#include <cstdint>

namespace spdelab {

// Identifies one independent Gaussian stream. The stream is a pure function
// of the key, so replications and modes can be generated in any order.
struct RngStreamKey {
  std::uint64_t master_seed = 0;
  std::uint64_t replication = 0;
  std::uint64_t mode = 0;

  bool operator==(const RngStreamKey&) const = default;
};

// Sub-streams of a key. Path noise drives the mode transitions; bridge noise
// completes the Brownian increment conditional on the path noise.
enum class StreamChannel : std::uint32_t { Path = 0, Bridge = 1 };

// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter generate(Counter counter, Key key) noexcept;
};

// Standard normal variates from Philox blocks via Box-Muller; each block
// yields exactly two variates.
class GaussianStream {
 public:
  explicit GaussianStream(const RngStreamKey& key,
                          StreamChannel channel = StreamChannel::Path) noexcept;

  double next() noexcept {
    if (cached_) {
      cached_ = false;
      return spare_;
    }
    refill();
    cached_ = true;
    return first_;
  }

  // Position the stream at variate `index` (0-based).
  void seek(std::uint64_t index) noexcept;

 private:
  void refill() noexcept;

  Philox4x32::Key key_{};
  Philox4x32::Counter counter_{};
  std::uint64_t block_ = 0;
  double first_ = 0.0;
  double spare_ = 0.0;
  bool cached_ = false;
};

GaussianStream derive_stream(const RngStreamKey& key,
                             StreamChannel channel = StreamChannel::Path) noexcept;

}  // namespace spdelab
