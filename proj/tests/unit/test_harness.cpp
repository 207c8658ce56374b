#include <doctest.h>

#include <sstream>
#include <stdexcept>

#include "hsc/error.hpp"
#include "hsc/harness.hpp"
#include "hsc/metrics.hpp"
#include "hsc/synth.hpp"
#include "test_support.hpp"

using namespace hsc;

namespace {

RDRecord point(double rate, double snr, double m = 0.0) {
  RDRecord r;
  r.pipeline = "inloop";
  r.rate_bpp = rate;
  r.snr_db = snr;
  r.mare = m;
  return r;
}

ImageCube cube(std::uint64_t seed = 1) {
  SynthesisParams sp;
  sp.dims = {24, 24, 8};
  sp.seed = seed;
  return synthesize_cube(sp);
}

}  // namespace

TEST_CASE("interpolate_at_rate") {
  const std::vector<RDRecord> recs{point(2.1, 58.0, 0.002), point(1.9, 57.0, 0.004),
                                   point(3.0, 64.0, 0.001)};
  const auto mid = interpolate_at_rate(recs, 2.0);
  CHECK(mid.snr_db == doctest::Approx(57.5));
  CHECK(mid.mare == doctest::Approx(0.003));
  const auto exact = interpolate_at_rate(recs, 3.0);
  CHECK(exact.snr_db == 64.0);
  CHECK(exact.mare == 0.001);
  CHECK_THROWS_AS((void)interpolate_at_rate(recs, 1.0), std::domain_error);
  CHECK_THROWS_AS((void)interpolate_at_rate(recs, 3.5), std::domain_error);
}

TEST_CASE("default sweep configuration carries the delta set") {
  std::istringstream empty("");
  const auto cfg = parse_sweep_config(empty);
  CHECK(cfg.deltas == std::vector<std::uint32_t>{1, 3, 5, 7, 10, 15, 20, 30, 50});
  REQUIRE(cfg.pipelines.size() == 2);
  CHECK(cfg.pipelines[0].tag == "inloop");
  CHECK(cfg.pipelines[1].tag == "prequant");
}

TEST_CASE("sweep configuration parsing") {
  std::istringstream in(
      "# comment\n"
      "pipelines = inloop-rn, lossless\n"
      "deltas = 2,4\n"
      "rels = 0.01\n"
      "recon = tv\n"
      "tv_lambda = 0.2\n"
      "threads = 2\n");
  const auto cfg = parse_sweep_config(in);
  CHECK(cfg.pipelines[0].mode == PredictionMode::reduced);
  CHECK(cfg.pipelines[0].local_sum == LocalSumMode::narrow);
  CHECK(cfg.pipelines[1].pipeline == Pipeline::lossless);
  CHECK(cfg.deltas == std::vector<std::uint32_t>{2, 4});
  CHECK(cfg.rels == std::vector<double>{0.01});
  CHECK(cfg.recon == ReconKind::tv);
  CHECK(cfg.tv.lambda == 0.2);
  CHECK(cfg.threads == 2);

  for (const char* bad : {"deltas =\n", "colour = red\n", "deltas = x\n", "pipelines =\n",
                          "timing = 1\ntiming_reps = 2\n", "recon = cnn\n"}) {
    std::istringstream b(bad);
    INFO(std::string(bad));
    CHECK_THROWS_AS((void)parse_sweep_config(b), UsageError);
  }
}

TEST_CASE("delta 0 gives a lossless point with the sentinel SNR") {
  SweepConfig cfg;
  cfg.deltas = {0};
  const auto recs = rd_sweep(cube(), cfg);
  REQUIRE(recs.size() == 2);
  for (const auto& r : recs) {
    CHECK(r.ok);
    CHECK(r.snr_db == kSnrSentinel);
    CHECK(r.max_abs_err == 0);
  }
}

TEST_CASE("sweep is ordered, monotone and reproducible") {
  SweepConfig cfg;
  cfg.threads = 3;
  const auto c = cube(4);
  const auto a = rd_sweep(c, cfg);
  REQUIRE(a.size() == 18);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].pipeline == (i < 9 ? "inloop" : "prequant"));
    CHECK(a[i].delta_or_r == cfg.deltas[i % 9]);
    CHECK(a[i].max_abs_err <= cfg.deltas[i % 9]);
    if (i % 9 != 0) {
      CHECK(a[i].rate_bpp < a[i - 1].rate_bpp);
      CHECK(a[i].snr_db <= a[i - 1].snr_db);
    }
  }
  cfg.threads = 1;
  std::ostringstream one;
  std::ostringstream two;
  write_csv(one, a);
  write_csv(two, rd_sweep(c, cfg));
  CHECK(one.str() == two.str());
}

TEST_CASE("TV reconstruction records follow their base points") {
  SweepConfig cfg;
  cfg.pipelines = {parse_variant("prequant")};
  cfg.deltas = {10};
  cfg.recon = ReconKind::tv;
  PiecewiseParams pp;
  pp.dims = {24, 24, 4};
  pp.noise_std = 4.0;
  const auto recs = rd_sweep(piecewise_constant_cube(pp), cfg);
  REQUIRE(recs.size() == 2);
  CHECK(recs[0].recon == ReconKind::none);
  CHECK(recs[1].recon == ReconKind::tv);
  CHECK(recs[1].rate_bpp == recs[0].rate_bpp);
  CHECK(recs[1].max_abs_err <= 20);
}

TEST_CASE("missing external reconstructions are recorded as failures") {
  const hsc::test::TempDir dir("ext");
  SweepConfig cfg;
  cfg.pipelines = {parse_variant("prequant")};
  cfg.deltas = {3};
  cfg.recon = ReconKind::external;
  cfg.external_dir = dir.path();
  const auto recs = rd_sweep(cube(), cfg);
  REQUIRE(recs.size() == 2);
  CHECK(recs[0].ok);
  CHECK_FALSE(recs[1].ok);
  CHECK(std::filesystem::exists(dir / "prequant_abs_3.decoded.raw"));
  CHECK(csv_row(recs[1]).find("external:failed") != std::string::npos);
}

TEST_CASE("CSV schema") {
  CHECK(csv_header() ==
        "pipeline,delta_or_r,rate_bpp,snr_db,mare,max_abs_err,max_rel_err,enc_sps,dec_sps,recon");
  RDRecord r = point(2.5, 50.0, 0.001);
  r.delta_or_r = 3;
  r.max_abs_err = 3;
  r.max_rel_err = 0.01;
  CHECK(csv_row(r) == "inloop,3,2.500000,50.0000,0.00100000,3,0.01000000,0,0,none");
}
