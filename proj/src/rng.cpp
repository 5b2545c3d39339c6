#include "spdelab/rng.hpp"

#include <cmath>
#include <numbers>

namespace spdelab {
namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(product >> 32);
  lo = static_cast<std::uint32_t>(product);
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// (0, 1] so the logarithm in Box-Muller is finite.
inline double open_unit(std::uint64_t bits) {
  return static_cast<double>((bits >> 11) + 1) * 0x1.0p-53;
}

}  // namespace

Philox4x32::Counter Philox4x32::generate(Counter ctr, Key key) noexcept {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, ctr[0], hi0, lo0);
    mulhilo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

GaussianStream::GaussianStream(const RngStreamKey& key, StreamChannel channel) noexcept {
  std::uint64_t k = splitmix64(key.master_seed);
  k = splitmix64(k ^ key.replication);
  k = splitmix64(k ^ (static_cast<std::uint64_t>(channel) + 0x632BE59BD9B4E019ull));
  key_ = {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
  counter_[2] = static_cast<std::uint32_t>(key.mode);
  counter_[3] = static_cast<std::uint32_t>(key.mode >> 32);
}

void GaussianStream::seek(std::uint64_t index) noexcept {
  block_ = index / 2;
  cached_ = false;
  if (index % 2 == 1) {
    refill();
    cached_ = true;
  }
}

void GaussianStream::refill() noexcept {
  counter_[0] = static_cast<std::uint32_t>(block_);
  counter_[1] = static_cast<std::uint32_t>(block_ >> 32);
  ++block_;
  const auto out = Philox4x32::generate(counter_, key_);
  const std::uint64_t a = (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
  const std::uint64_t b = (static_cast<std::uint64_t>(out[2]) << 32) | out[3];
  const double radius = std::sqrt(-2.0 * std::log(open_unit(a)));
  const double angle = 2.0 * std::numbers::pi * static_cast<double>(b >> 11) * 0x1.0p-53;
  first_ = radius * std::cos(angle);
  spare_ = radius * std::sin(angle);
}

GaussianStream derive_stream(const RngStreamKey& key, StreamChannel channel) noexcept {
  return GaussianStream(key, channel);
}

}  // namespace spdelab
