#include <doctest.h>

#include <random>
#include <string>

#include "hsc/entropy.hpp"
#include "hsc/error.hpp"

using namespace hsc;

namespace {

std::string bit_string(const BitWriter& w) {
  std::string s;
  for (std::uint64_t i = 0; i < w.bits_written(); ++i) {
    const auto byte = w.bytes()[i / 8];
    s += ((byte >> (7 - i % 8)) & 1u) ? '1' : '0';
  }
  return s;
}

std::string encoded(std::uint64_t u, int k) {
  BitWriter w;
  gpo2_encode(u, k, w);
  w.finish();
  return bit_string(w);
}

}  // namespace

TEST_CASE("map_residual") {
  CHECK(map_residual(0) == 0);
  CHECK(map_residual(-1) == 1);
  CHECK(map_residual(1) == 2);
  CHECK(map_residual(-2) == 3);
  for (std::int64_t e = -100000; e <= 100000; ++e) {
    REQUIRE(unmap_residual(map_residual(e)) == e);
  }
}

TEST_CASE("gpo2 codewords") {
  CHECK(encoded(9, 2) == "11001");
  CHECK(encoded(0, 0) == "0");
  CHECK(encoded(5, 0) == "111110");
  CHECK(code_length(9, 2) == 5);
  CHECK(code_length(0, 0) == 1);

  // q = 32 escapes: 32 ones then the raw 32-bit value.
  const std::string esc = encoded(32, 0);
  CHECK(esc.size() == 64);
  CHECK(esc.substr(0, 32) == std::string(32, '1'));
  CHECK(esc.substr(32) == std::string(26, '0') + "100000");
  CHECK(code_length(32, 0) == 64);
  CHECK(code_length(31, 0) == 32);
}

TEST_CASE("BitWriter pads the final byte with zeros") {
  BitWriter w;
  w.write_bits(0b101, 3);
  w.finish();
  REQUIRE(w.bytes().size() == 1);
  CHECK(w.bytes()[0] == 0xA0);
  CHECK(w.bits_written() == 3);
}

TEST_CASE("gpo2 round trip over u < 2^20 and k <= 16 with exact lengths") {
  for (int k = 0; k <= 16; ++k) {
    BitWriter w;
    std::uint64_t expected_bits = 0;
    for (std::uint64_t u = 0; u < (1u << 20); ++u) {
      gpo2_encode(u, k, w);
      expected_bits += code_length(u, k);
    }
    w.finish();
    INFO("k " << k);
    REQUIRE(w.bits_written() == expected_bits);
    BitReader r(w.bytes(), w.bits_written());
    bool ok = true;
    for (std::uint64_t u = 0; u < (1u << 20); ++u) {
      ok = ok && gpo2_decode(r, k) == u;
    }
    CHECK(ok);
    CHECK(r.remaining() == 0);
  }
}

TEST_CASE("truncated payloads raise TruncatedStream") {
  BitWriter w;
  gpo2_encode(1000, 3, w);
  w.finish();
  const auto full = w.bits_written();
  for (std::uint64_t cut = 0; cut < full; ++cut) {
    BitReader r(w.bytes(), cut);
    CHECK_THROWS_AS((void)gpo2_decode(r, 3), TruncatedStream);
  }
  BitReader r(w.bytes(), full);
  CHECK(gpo2_decode(r, 3) == 1000);
}

TEST_CASE("adapt_k rule and rescale") {
  CHECK(adapt_k(GolombContext{0, 1}) == 0);
  CHECK(adapt_k(GolombContext{1000, 10}) == 7);
  CHECK(adapt_k(GolombContext{1280, 10}) == 7);
  CHECK(adapt_k(GolombContext{1281, 10}) == 8);
  CHECK(adapt_k(GolombContext{~0ull >> 1, 1}) == kMaxK);
  for (std::uint64_t sum = 0; sum < 5000; ++sum) {
    for (std::uint32_t count : {1u, 2u, 3u, 7u, 100u, 2047u}) {
      int brute = 0;
      while (static_cast<std::uint64_t>(count) << brute < sum) {
        ++brute;
      }
      REQUIRE(adapt_k(GolombContext{sum, count}) == std::min(brute, kMaxK));
    }
  }

  GolombContext ctx;
  for (int i = 0; i < 2046; ++i) {
    ctx.update(4);
  }
  CHECK(ctx.count == 2047);
  ctx.update(4);
  CHECK(ctx.count == 1024);
  CHECK(ctx.sum == 4 * 2047 / 2);
}

TEST_CASE("adapted k tracks a geometric source") {
  // Against the block-optimal k found by brute force on the emitted lengths.
  for (int j : {0, 2, 5, 9}) {
    std::mt19937_64 rng(100 + j);
    std::geometric_distribution<std::uint64_t> geo(1.0 / (std::ldexp(1.0, j) + 1.0));
    GolombContext ctx;
    std::vector<std::uint64_t> block;
    for (int i = 0; i < 10000; ++i) {
      const auto u = geo(rng);
      ctx.update(u);
      block.push_back(u);
    }
    block.erase(block.begin(), block.end() - 2000);
    int best_k = 0;
    std::uint64_t best = ~0ull;
    for (int k = 0; k <= 20; ++k) {
      std::uint64_t bits = 0;
      for (auto u : block) {
        bits += code_length(u, k);
      }
      if (bits < best) {
        best = bits;
        best_k = k;
      }
    }
    INFO("j " << j << " adapted " << adapt_k(ctx) << " optimal " << best_k);
    CHECK(std::abs(adapt_k(ctx) - j) <= 1);
    CHECK(std::abs(adapt_k(ctx) - best_k) <= 1);
  }
}
