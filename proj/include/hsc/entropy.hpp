#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace hsc {

// MSB-first bit packer; the final partial byte is zero-padded by finish().
class BitWriter {
 public:
  void write_bits(std::uint64_t value, int count);  // count in [0, 32]
  void write_ones(int count);
  void finish();

  [[nodiscard]] std::uint64_t bits_written() const noexcept { return bits_; }
  [[nodiscard]] const std::vector<std::uint8_t>& bytes() const noexcept { return bytes_; }
  std::vector<std::uint8_t> take_bytes();

 private:
  std::vector<std::uint8_t> bytes_;
  std::uint64_t acc_ = 0;
  int pending_ = 0;
  std::uint64_t bits_ = 0;
};

// Reads at most `payload_bits` bits; any read beyond throws TruncatedStream.
class BitReader {
 public:
  BitReader(std::span<const std::uint8_t> bytes, std::uint64_t payload_bits);

  std::uint64_t read_bits(int count);  // count in [0, 32]
  // Consumes consecutive ones up to `limit`, plus the terminating zero if one
  // is found before the limit. Returns the number of ones.
  int read_unary(int limit);

  [[nodiscard]] std::uint64_t consumed() const noexcept { return consumed_; }
  [[nodiscard]] std::uint64_t remaining() const noexcept { return payload_bits_ - consumed_; }

 private:
  void refill();
  [[nodiscard]] int available() const noexcept;

  std::span<const std::uint8_t> bytes_;
  std::uint64_t payload_bits_;
  std::uint64_t consumed_ = 0;
  std::size_t offset_ = 0;
  std::uint64_t acc_ = 0;  // valid bits right-aligned
  int count_ = 0;
};

// Zigzag: 0,-1,1,-2,2 ... -> 0,1,2,3,4 ...
inline std::uint64_t map_residual(std::int64_t e) noexcept {
  return e >= 0 ? static_cast<std::uint64_t>(e) << 1 : (static_cast<std::uint64_t>(-e) << 1) - 1;
}
inline std::int64_t unmap_residual(std::uint64_t u) noexcept {
  return (u & 1u) ? -static_cast<std::int64_t>((u + 1) >> 1) : static_cast<std::int64_t>(u >> 1);
}

inline constexpr int kEscapeThreshold = 32;
inline constexpr int kRescaleLog = 11;
inline constexpr int kMaxK = 26;

// Unary quotient (q ones, one zero) then k low bits; quotients of 32 or more
// escape to 32 ones followed by u as a raw 32-bit word. u must fit 32 bits.
void gpo2_encode(std::uint64_t u, int k, BitWriter& w);
std::uint64_t gpo2_decode(BitReader& r, int k);

inline std::uint64_t code_length(std::uint64_t u, int k) noexcept {
  const std::uint64_t q = u >> k;
  return q >= static_cast<std::uint64_t>(kEscapeThreshold) ? 2u * kEscapeThreshold
                                                           : q + 1 + static_cast<std::uint64_t>(k);
}

// Running statistics of one band's mapped residuals.
struct GolombContext {
  std::uint64_t sum = 0;
  std::uint32_t count = 1;

  void update(std::uint64_t u) noexcept {
    sum += u;
    if (++count >= (1u << kRescaleLog)) {
      sum >>= 1;
      count >>= 1;
    }
  }
  friend bool operator==(const GolombContext&, const GolombContext&) = default;
};

// Smallest k with count * 2^k >= sum, clamped to [0, kMaxK].
inline int adapt_k(const GolombContext& ctx) noexcept {
  if (ctx.sum <= ctx.count) {
    return 0;
  }
  // count << k then lands in the same octave as sum, at most one step short.
  int k = std::bit_width(ctx.sum) - std::bit_width(static_cast<std::uint64_t>(ctx.count));
  if ((static_cast<std::uint64_t>(ctx.count) << k) < ctx.sum) {
    ++k;
  }
  return k < kMaxK ? k : kMaxK;
}

}  // namespace hsc
