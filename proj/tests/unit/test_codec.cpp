#include <doctest.h>

#include <algorithm>

#include "hsc/codec.hpp"
#include "hsc/error.hpp"
#include "hsc/metrics.hpp"
#include "hsc/synth.hpp"
#include "test_support.hpp"

using namespace hsc;
using hsc::test::random_cube;

namespace {

CodecConfig make(Pipeline p, QuantizerSpec q = {}, PredictionMode mode = PredictionMode::full,
                 LocalSumMode sum = LocalSumMode::wide) {
  CodecConfig cfg;
  cfg.pipeline = p;
  cfg.quantizer = std::move(q);
  cfg.predictor.mode = mode;
  cfg.predictor.local_sum = sum;
  return cfg;
}

ImageCube smooth_cube(std::uint64_t seed = 3, Dims dims = {32, 32, 8}) {
  SynthesisParams sp;
  sp.dims = dims;
  sp.seed = seed;
  return synthesize_cube(sp);
}

}  // namespace

TEST_CASE("lossless round trip across predictor modes, depths and shapes") {
  const Dims shapes[] = {{1, 1, 1}, {1, 7, 3}, {9, 1, 4}, {13, 11, 5}, {32, 8, 20}};
  std::uint64_t seed = 1;
  for (const auto& d : shapes) {
    for (int depth : {2, 8, 12, 16}) {
      const auto cube = random_cube(d, depth, seed++, seed % 2 ? Order::bsq : Order::bil);
      for (auto mode : {PredictionMode::full, PredictionMode::reduced}) {
        for (auto sum : {LocalSumMode::wide, LocalSumMode::narrow}) {
          const auto bs = encode(cube, make(Pipeline::lossless, {}, mode, sum));
          const auto out = decode(bs);
          REQUIRE(out == cube);
        }
      }
    }
  }
}

TEST_CASE("lossless P = 0 and P = 15") {
  const auto cube = smooth_cube(9, {16, 16, 20});
  for (int p : {0, 1, 15}) {
    auto cfg = make(Pipeline::lossless);
    cfg.predictor.p_bands = p;
    CHECK(decode(encode(cube, cfg)) == cube);
  }
}

TEST_CASE("constant cube codes at about one bit per sample") {
  ImageCube cube(Dims{32, 32, 8}, 16);
  std::fill(cube.samples().begin(), cube.samples().end(), std::uint16_t{4321});
  const auto bs = encode(cube, make(Pipeline::lossless));
  CHECK(decode(bs) == cube);
  CHECK(bs.rate_bpp() >= 1.0);
  CHECK(bs.rate_bpp() < 1.05);
}

TEST_CASE("correlated synthetic cube compresses below 60% of raw size") {
  SynthesisParams sp;
  sp.spectral_corr = 0.95;
  const auto cube = synthesize_cube(sp);
  const auto bs = encode(cube, make(Pipeline::lossless));
  INFO("rate " << bs.rate_bpp());
  CHECK(bs.rate_bpp() < 0.6 * 16);
}

TEST_CASE("delta 0 in either lossy pipeline reproduces the lossless output") {
  const auto cube = smooth_cube();
  const auto lossless = encode(cube, make(Pipeline::lossless));
  for (auto p : {Pipeline::inloop, Pipeline::prequant}) {
    const auto bs = encode(cube, make(p, QuantizerSpec::absolute(0)));
    CHECK(decode(bs) == cube);
    CHECK(bs.payload == lossless.payload);
  }
}

TEST_CASE("absolute bound holds for both lossy pipelines") {
  const auto cube = smooth_cube(5);
  for (std::uint32_t delta : {1u, 2u, 5u, 10u, 50u}) {
    for (auto p : {Pipeline::inloop, Pipeline::prequant}) {
      EncodeStats stats;
      const auto bs = encode(cube, make(p, QuantizerSpec::absolute(delta)), {nullptr, &stats});
      const auto m = evaluate(cube, decode(bs));
      INFO(to_string(p) << " delta " << delta);
      CHECK(m.max_abs_error <= delta);
      CHECK(stats.max_abs_error == m.max_abs_error);
    }
  }
}

TEST_CASE("in-loop decode equals the encoder's reconstruction trace") {
  const auto cube = smooth_cube(11);
  for (const auto& q : {QuantizerSpec::absolute(2), QuantizerSpec::relative(0.01)}) {
    std::vector<std::uint16_t> trace;
    const auto bs = encode(cube, make(Pipeline::inloop, q), {&trace, nullptr});
    const auto bil = reorder(decode(bs), Order::bil);
    CHECK(std::equal(trace.begin(), trace.end(), bil.samples().begin(), bil.samples().end()));
  }
}

TEST_CASE("prequant relative mode respects the bound exactly") {
  const auto cube = smooth_cube(2);
  const auto bs = encode(cube, make(Pipeline::prequant, QuantizerSpec::relative_codebook(0.01, 65535)));
  const auto m = evaluate(cube, decode(bs));
  CHECK(m.max_rel_error <= 0.01);
}

TEST_CASE("in-loop relative mode reports violations consistently") {
  const auto cube = smooth_cube(4);
  EncodeStats stats;
  const auto bs = encode(cube, make(Pipeline::inloop, QuantizerSpec::relative(0.01)), {nullptr, &stats});
  const auto dec = decode(bs);
  std::size_t count = 0;
  for (std::size_t z = 0; z < cube.dims().nz; ++z) {
    for (std::size_t y = 0; y < cube.dims().ny; ++y) {
      for (std::size_t x = 0; x < cube.dims().nx; ++x) {
        const double s = cube.at(x, y, z);
        const double r = dec.at(x, y, z);
        count += std::abs(s - r) > 0.01 * s ? 1 : 0;
      }
    }
  }
  CHECK(stats.relative_violations == count);
  CHECK(stats.samples == cube.size());
  CHECK(stats.violation_fraction() < 0.01);
}

TEST_CASE("reduced narrow in-loop coding does not beat full wide at equal delta") {
  const auto cube = smooth_cube(8, {48, 48, 16});
  for (std::uint32_t delta : {3u, 10u}) {
    const auto q = QuantizerSpec::absolute(delta);
    const auto best = evaluate(cube, decode(encode(cube, make(Pipeline::inloop, q))));
    const auto rn = encode(cube, make(Pipeline::inloop, q, PredictionMode::reduced, LocalSumMode::narrow));
    const auto m = evaluate(cube, decode(rn));
    INFO("delta " << delta << " full/wide " << best.snr_db << " reduced/narrow " << m.snr_db);
    CHECK(m.max_abs_error <= delta);
    CHECK(m.snr_db <= best.snr_db + 0.05);
  }
}

TEST_CASE("container round trip and corruption handling") {
  const auto cube = smooth_cube(6, {12, 10, 4});
  const hsc::test::TempDir dir("codec");
  for (const auto& cfg : {make(Pipeline::lossless), make(Pipeline::inloop, QuantizerSpec::absolute(3)),
                          make(Pipeline::prequant, QuantizerSpec::relative_codebook(0.005, 65535))}) {
    const auto bs = encode(cube, cfg);
    const auto bytes = serialize(bs);
    CHECK(bytes[0] == 'H');
    CHECK(bytes[3] == '1');
    const auto back = parse_bitstream(bytes);
    CHECK(back.payload == bs.payload);
    CHECK(back.payload_bits == bs.payload_bits);
    CHECK(decode(back) == decode(bs));
    write_hsc(bs, dir / "c.hsc");
    CHECK(decode(read_hsc(dir / "c.hsc")) == decode(bs));

    auto bad_magic = bytes;
    bad_magic[0] = 'X';
    CHECK_THROWS_AS((void)parse_bitstream(bad_magic), DataError);
    const std::vector<std::uint8_t> head(bytes.begin(), bytes.begin() + 6);
    CHECK_THROWS_AS((void)parse_bitstream(head), DataError);
  }
}

TEST_CASE("truncated payload raises TruncatedStream") {
  const auto cube = smooth_cube(7, {16, 16, 4});
  auto bs = encode(cube, make(Pipeline::lossless));
  bs.payload.resize(bs.payload.size() / 2);
  bs.payload_bits = bs.payload.size() * 8;
  CHECK_THROWS_AS((void)decode(bs), TruncatedStream);
}

TEST_CASE("configuration validation") {
  CHECK_THROWS_AS(validate(make(Pipeline::lossless, QuantizerSpec::absolute(2))), UsageError);
  CHECK_THROWS_AS(validate(make(Pipeline::inloop)), UsageError);
  CHECK_THROWS_AS(validate(make(Pipeline::inloop, QuantizerSpec::relative(1.5))), UsageError);
  CHECK(parse_pipeline("inloop") == Pipeline::inloop);
  CHECK_THROWS_AS((void)parse_pipeline("fast"), UsageError);
}

TEST_CASE("bench_throughput reports medians") {
  const auto cube = smooth_cube(1, {16, 16, 4});
  const auto r = bench_throughput(cube, make(Pipeline::prequant, QuantizerSpec::absolute(3)), 3);
  CHECK(r.encode_sps > 0);
  CHECK(r.decode_sps > 0);
  CHECK(r.samples == cube.size());
  CHECK(r.repetitions == 3);
  CHECK_THROWS_AS((void)bench_throughput(cube, make(Pipeline::lossless), 2), UsageError);
}
