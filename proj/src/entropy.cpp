#include "hsc/entropy.hpp"

#include <algorithm>
#include <bit>
#include <cassert>

#include "hsc/error.hpp"

namespace hsc {

void BitWriter::write_bits(std::uint64_t value, int count) {
  assert(count >= 0 && count <= 32);
  if (count == 0) {
    return;
  }
  acc_ = (acc_ << count) | (value & ((std::uint64_t{1} << count) - 1));
  pending_ += count;
  bits_ += static_cast<std::uint64_t>(count);
  while (pending_ >= 8) {
    pending_ -= 8;
    bytes_.push_back(static_cast<std::uint8_t>(acc_ >> pending_));
  }
}

void BitWriter::write_ones(int count) {
  while (count > 0) {
    const int chunk = std::min(count, 32);
    write_bits(0xFFFFFFFFull, chunk);
    count -= chunk;
  }
}

void BitWriter::finish() {
  if (pending_ > 0) {
    bytes_.push_back(static_cast<std::uint8_t>(acc_ << (8 - pending_)));
    pending_ = 0;
  }
  acc_ = 0;
}

std::vector<std::uint8_t> BitWriter::take_bytes() {
  finish();
  return std::move(bytes_);
}

BitReader::BitReader(std::span<const std::uint8_t> bytes, std::uint64_t payload_bits)
    : bytes_(bytes), payload_bits_(payload_bits) {
  if ((payload_bits + 7) / 8 > bytes.size()) {
    throw TruncatedStream("payload declares " + std::to_string(payload_bits) + " bits but only " +
                          std::to_string(bytes.size()) + " bytes are present");
  }
}

void BitReader::refill() {
  while (count_ <= 56 && offset_ < bytes_.size()) {
    acc_ = (acc_ << 8) | bytes_[offset_++];
    count_ += 8;
  }
}

int BitReader::available() const noexcept {
  const std::uint64_t left = payload_bits_ - consumed_;
  return static_cast<int>(std::min<std::uint64_t>(static_cast<std::uint64_t>(count_), left));
}

std::uint64_t BitReader::read_bits(int count) {
  assert(count >= 0 && count <= 32);
  if (count == 0) {
    return 0;
  }
  if (count_ < count) {
    refill();
  }
  if (available() < count) {
    throw TruncatedStream("bitstream truncated at bit " + std::to_string(consumed_));
  }
  count_ -= count;
  consumed_ += static_cast<std::uint64_t>(count);
  return (acc_ >> count_) & ((std::uint64_t{1} << count) - 1);
}

int BitReader::read_unary(int limit) {
  int ones = 0;
  while (ones < limit) {
    if (count_ < 32) {
      refill();
    }
    const int avail = available();
    if (avail == 0) {
      throw TruncatedStream("bitstream truncated at bit " + std::to_string(consumed_));
    }
    // Top-align the available bits and count leading ones.
    const std::uint64_t window = acc_ << (64 - count_);
    const int run = std::min({std::countl_one(window), avail, limit - ones});
    ones += run;
    count_ -= run;
    consumed_ += static_cast<std::uint64_t>(run);
    if (ones == limit) {
      return ones;
    }
    if (run < avail) {
      // Next bit is the terminating zero.
      --count_;
      ++consumed_;
      return ones;
    }
  }
  return ones;
}

void gpo2_encode(std::uint64_t u, int k, BitWriter& w) {
  assert(k >= 0 && k <= kMaxK);
  const std::uint64_t q = u >> k;
  if (q >= static_cast<std::uint64_t>(kEscapeThreshold)) {
    assert(u <= 0xFFFFFFFFull);
    w.write_ones(kEscapeThreshold);
    w.write_bits(u, 32);
    return;
  }
  // q ones then a zero, then the k low bits; one write when it fits.
  const int prefix = static_cast<int>(q) + 1;
  const std::uint64_t ones = (std::uint64_t{1} << prefix) - 2;
  if (prefix + k <= 32) {
    w.write_bits((ones << k) | (u & ((std::uint64_t{1} << k) - 1)), prefix + k);
    return;
  }
  w.write_bits(ones, prefix);
  w.write_bits(u, k);
}

std::uint64_t gpo2_decode(BitReader& r, int k) {
  const int q = r.read_unary(kEscapeThreshold);
  if (q == kEscapeThreshold) {
    return r.read_bits(32);
  }
  return (static_cast<std::uint64_t>(q) << k) | r.read_bits(k);
}

}  // namespace hsc
