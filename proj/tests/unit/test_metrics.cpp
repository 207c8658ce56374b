#include <doctest.h>

#include <cmath>

#include "hsc/codec.hpp"
#include "hsc/error.hpp"
#include "hsc/metrics.hpp"
#include "hsc/recon_tv.hpp"
#include "hsc/synth.hpp"
#include "test_support.hpp"

using namespace hsc;

namespace {

ImageCube row(std::vector<std::uint16_t> v) {
  const Dims d{v.size(), 1, 1};
  return ImageCube(d, 16, Order::bsq, std::move(v));
}

}  // namespace

TEST_CASE("snr") {
  CHECK(snr(row({2, 2}), row({1, 1})).db == doctest::Approx(10.0 * std::log10(4.0)));
  CHECK(snr(row({2, 2}), row({1, 1})).db == doctest::Approx(6.0206).epsilon(1e-4));
  CHECK(snr(row({5, 9}), row({5, 9})).db == kSnrSentinel);
  const auto zero = snr(row({0, 0}), row({1, 0}));
  CHECK(zero.db == 0.0);
  CHECK(zero.degenerate);
  CHECK_THROWS_AS((void)snr(row({1, 2}), row({1, 2, 3})), DataError);
}

TEST_CASE("mare") {
  CHECK(mare(row({100, 200}), row({99, 202})).value == doctest::Approx(0.01));
  CHECK(mare(row({100, 200}), row({100, 200})).value == 0.0);
  const auto ex = mare(row({0, 100}), row({3, 101}));
  CHECK(ex.excluded == 1);
  CHECK(ex.value == doctest::Approx(0.01));
}

TEST_CASE("metrics are invariant under consistent reordering") {
  const auto a = hsc::test::random_cube({9, 7, 5}, 14, 3);
  const auto b = hsc::test::random_cube({9, 7, 5}, 14, 4);
  const auto m1 = evaluate(a, b);
  const auto m2 = evaluate(reorder(a, Order::bil), reorder(b, Order::bil));
  const auto m3 = evaluate(a, reorder(b, Order::bil));
  CHECK(m1.snr_db == m2.snr_db);
  CHECK(m1.snr_db == m3.snr_db);
  CHECK(m1.mare == doctest::Approx(m2.mare).epsilon(1e-12));
  CHECK(m1.max_abs_error == m3.max_abs_error);
  CHECK(m1.max_rel_error == m2.max_rel_error);
}

TEST_CASE("histogram of identical cubes puts all mass at zero") {
  const auto a = hsc::test::random_cube({10, 10, 2}, 16, 1);
  const auto h = error_histogram(a, a, ErrorKind::absolute, -5.5, 5.5, 11);
  CHECK(h.total() == a.size());
  CHECK(h.counts[5] == a.size());
  CHECK(h.bin_center(5) == 0.0);
}

TEST_CASE("prequantized ramp errors stay inside [-delta, delta]") {
  ImageCube ramp(Dims{64, 8, 4}, 16);
  for (std::size_t z = 0; z < 4; ++z) {
    for (std::size_t y = 0; y < 8; ++y) {
      for (std::size_t x = 0; x < 64; ++x) {
        ramp.set(x, y, z, static_cast<std::uint16_t>(1000 + 3 * x + 5 * y + 7 * z));
      }
    }
  }
  CodecConfig cfg;
  cfg.pipeline = Pipeline::prequant;
  cfg.quantizer = QuantizerSpec::absolute(2);
  const auto dec = decode(encode(ramp, cfg));
  // Unit-width bins centred on -4 .. 4.
  const auto h = error_histogram(ramp, dec, ErrorKind::absolute, -4.5, 4.5, 9);
  CHECK(h.total() == ramp.size());
  CHECK(h.counts[0] + h.counts[1] + h.counts[7] + h.counts[8] == 0);
  CHECK(h.counts[2] > 0);
  CHECK(h.counts[6] > 0);
}

TEST_CASE("reconstructed errors stay within twice the bound") {
  PiecewiseParams pp;
  pp.dims = {24, 24, 4};
  pp.noise_std = 6.0;
  const auto orig = piecewise_constant_cube(pp);
  CodecConfig cfg;
  cfg.pipeline = Pipeline::prequant;
  cfg.quantizer = QuantizerSpec::absolute(5);
  const auto dec = decode(encode(orig, cfg));
  const auto rec = tv_reconstruct(dec, bins_for(dec, cfg.quantizer), TVConfig{});
  const auto h = error_histogram(orig, rec, ErrorKind::absolute, -30.5, 30.5, 61);
  CHECK(h.total() == orig.size());
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    if (std::abs(h.bin_center(i)) > 10.0) {
      CHECK(h.counts[i] == 0);
    }
  }
}

TEST_CASE("relative histogram counts zero originals separately") {
  const auto h = error_histogram(row({0, 100, 200}), row({1, 101, 200}), ErrorKind::relative,
                                 -0.02, 0.02, 4);
  CHECK(h.excluded == 1);
  CHECK(h.total() == 3);
  CHECK(h.counts[2] + h.counts[3] == 2);
}
