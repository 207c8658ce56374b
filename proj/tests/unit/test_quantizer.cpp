#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "hsc/error.hpp"
#include "hsc/quantizer.hpp"

using namespace hsc;

TEST_CASE("uniform_quantize examples") {
  const auto q = uniform_quantize(7, 2, 65535);
  CHECK(q.index == 1);
  CHECK(q.reconstruction == 5);
  for (std::uint32_t v : {0u, 1u, 999u, 65535u}) {
    CHECK(uniform_quantize(v, 0, 65535).index == v);
    CHECK(uniform_quantize(v, 0, 65535).reconstruction == v);
  }
}

TEST_CASE("uniform_quantize: exhaustive bound and monotonicity over 16-bit samples") {
  for (std::uint32_t delta : {1u, 2u, 3u, 5u, 7u, 10u, 15u, 20u, 30u, 50u}) {
    std::int64_t worst = 0;
    std::int64_t prev_rec = 0;
    bool monotone = true;
    for (std::uint32_t v = 0; v <= 65535; ++v) {
      const auto q = uniform_quantize(v, delta, 65535);
      worst = std::max<std::int64_t>(worst, std::abs(static_cast<std::int64_t>(v) - q.reconstruction));
      monotone = monotone && q.reconstruction >= prev_rec;
      prev_rec = q.reconstruction;
    }
    INFO("delta " << delta);
    CHECK(worst == delta);
    CHECK(monotone);
  }
}

TEST_CASE("inloop_quantize_residual") {
  CHECK(inloop_quantize_residual(0, 5).index == 0);
  CHECK(inloop_quantize_residual(0, 5).reconstruction == 0);
  const auto neg = inloop_quantize_residual(-7, 5);
  CHECK(neg.index == -1);
  CHECK(neg.reconstruction == -5);
  for (std::uint32_t step : {1u, 3u, 5u, 21u, 101u}) {
    for (std::int64_t e = -1000; e <= 1000; ++e) {
      const auto q = inloop_quantize_residual(e, step);
      REQUIRE(std::abs(e - q.reconstruction) <= (step - 1) / 2);
      REQUIRE(inloop_quantize_residual(-e, step).index == -q.index);
    }
  }
}

TEST_CASE("relative_step") {
  CHECK(relative_step(1000, 0.01) == 21);
  CHECK(relative_step(2500, 0.005) == 25);
  CHECK(relative_step(0, 0.01) == 1);
  CHECK(relative_step(-1000, 0.01) == 21);
  CHECK(relative_step(1000, 0.01, 0.5) == 11);
  CHECK(safe_relative_margin(0.01) == doctest::Approx(1.0 / 1.01));
}

TEST_CASE("safe margin keeps the relative bound whenever the prediction is not far above") {
  for (double rel : {0.01, 0.005, 0.001}) {
    const double m = safe_relative_margin(rel);
    for (std::int64_t s_hat = 1; s_hat <= 20000; s_hat += 7) {
      const auto h = static_cast<std::int64_t>((relative_step(s_hat, rel, m) - 1) / 2);
      // The worst sample for a given half-step sits h below the prediction.
      const std::int64_t s = s_hat - h;
      if (s > 0) {
        REQUIRE(static_cast<double>(h) <= rel * static_cast<double>(s) + 1e-9);
      }
    }
  }
}

TEST_CASE("relative codebook: the R = 0.1 interval starting at 10") {
  const auto iv = relative_interval(10, 0.1, 100);
  CHECK(iv.representative == 11);
  CHECK(iv.upper == 12);
  for (std::uint32_t v = 10; v <= iv.upper; ++v) {
    CHECK(within_relative(v, iv.representative, 0.1));
  }
  CHECK_FALSE(within_relative(iv.upper + 1, iv.representative, 0.1));

  const auto zero = relative_interval(0, 0.1, 100);
  CHECK(zero.representative == 0);
  CHECK(zero.upper == 0);

  // A codebook holding that interval quantizes 12 to 11, and 11's bin is [10, 12].
  const auto cb = std::make_shared<const Codebook>(
      Codebook({0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 13}, {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 11, 14}, 20));
  CHECK(codebook_quantize(12, *cb).second == 11);
  CHECK(codebook_quantize(11, *cb).second == 11);
  QuantizerSpec spec = QuantizerSpec::relative(0.1);
  spec.codebook = cb;
  const auto bin = bin_of(11, spec, 20);
  CHECK(bin.lo == 10.0);
  CHECK(bin.hi == 12.0);

  // The greedy build from 0 chains intervals with the same rule.
  const auto full = build_relative_codebook(0.1, 100);
  for (std::size_t i = 0; i < full.size(); ++i) {
    const auto expect = relative_interval(full.lower(i), 0.1, 100);
    REQUIRE(full.representative(i) == expect.representative);
    REQUIRE(full.upper(i) == expect.upper);
  }
}

TEST_CASE("relative codebook: exhaustive scan over 16-bit samples") {
  for (double rel : {0.01, 0.0075, 0.005, 0.0025, 0.001, 0.0005}) {
    const auto cb = build_relative_codebook(rel, 65535);
    std::size_t violations = 0;
    std::uint32_t prev = 0;
    bool monotone = true;
    for (std::uint32_t v = 0; v <= 65535; ++v) {
      const auto [idx, rep] = codebook_quantize(v, cb);
      violations += within_relative(v, rep, rel) ? 0 : 1;
      monotone = monotone && rep >= prev;
      prev = rep;
      if (cb.lower(idx) > v || cb.upper(idx) < v) {
        ++violations;
      }
    }
    INFO("R " << rel << " intervals " << cb.size());
    CHECK(violations == 0);
    CHECK(monotone);
    CHECK(cb.upper(cb.size() - 1) == 65535);
  }
}

TEST_CASE("codebook validation and lookup errors") {
  CHECK_THROWS_AS(Codebook({1, 5}, {1, 5}, 10), DataError);
  CHECK_THROWS_AS(Codebook({0, 5, 5}, {0, 5, 5}, 10), DataError);
  CHECK_THROWS_AS(Codebook({0, 5}, {0, 4}, 10), DataError);
  const Codebook ok({0, 5}, {0, 7}, 10);
  CHECK(ok.index_of(10) == 1);
  CHECK_THROWS_AS((void)ok.index_of(11), std::out_of_range);
}

TEST_CASE("bin_of") {
  const auto abs2 = QuantizerSpec::absolute(2);
  CHECK(bin_of(5, abs2, 65535) == BinSpec{3.0, 7.0});
  CHECK(bin_of(1, abs2, 65535) == BinSpec{0.0, 3.0});
  CHECK(bin_of(65535, abs2, 65535) == BinSpec{65533.0, 65535.0});
  CHECK(bin_of(42, QuantizerSpec::absolute(0), 65535) == BinSpec{42.0, 42.0});
  CHECK(bin_of(42, QuantizerSpec::lossless(), 65535) == BinSpec{42.0, 42.0});
  const auto rel = bin_of(1000, QuantizerSpec::relative(0.01), 65535);
  CHECK(rel.lo == doctest::Approx(990.0));
  CHECK(rel.hi == doctest::Approx(1010.0));
}

TEST_CASE("every sample lies in the bin of its reconstruction") {
  for (std::uint32_t delta : {1u, 10u, 50u}) {
    const auto spec = QuantizerSpec::absolute(delta);
    for (std::uint32_t v = 0; v <= 65535; v += 3) {
      const auto rec = static_cast<std::uint32_t>(uniform_quantize(v, delta, 65535).reconstruction);
      const auto bin = bin_of(rec, spec, 65535);
      REQUIRE(bin.contains(rec));
      REQUIRE(bin.contains(v));
    }
  }
  const auto spec = QuantizerSpec::relative_codebook(0.005, 65535);
  for (std::uint32_t v = 0; v <= 65535; ++v) {
    const auto rep = codebook_quantize(v, *spec.codebook).second;
    const auto bin = bin_of(rep, spec, 65535);
    REQUIRE(bin.contains(v));
  }
}

TEST_CASE("spec validation") {
  CHECK_NOTHROW(validate(QuantizerSpec::absolute(0)));
  CHECK_THROWS_AS(validate(QuantizerSpec::relative(0.0)), UsageError);
  CHECK_THROWS_AS(validate(QuantizerSpec::relative(0.01, 1.5)), UsageError);
  CHECK(index_bit_depth(1) == 2);
  CHECK(index_bit_depth(255) == 8);
  CHECK(index_bit_depth(256) == 9);
}
