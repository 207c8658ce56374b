#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "hsc/codec.hpp"
#include "hsc/recon_tv.hpp"

namespace hsc {

// A named compressor configuration swept by the harness. Tags: "inloop",
// "prequant" (full prediction, wide sums), "inloop-rn", "prequant-rn"
// (reduced prediction, narrow sums) and "lossless".
struct PipelineVariant {
  std::string tag;
  Pipeline pipeline = Pipeline::inloop;
  PredictionMode mode = PredictionMode::full;
  LocalSumMode local_sum = LocalSumMode::wide;
};

PipelineVariant parse_variant(const std::string& tag);

enum class ReconKind { none, tv, external };

std::string to_string(ReconKind kind);
ReconKind parse_recon(const std::string& text);

inline constexpr std::uint32_t kDefaultDeltas[] = {1, 3, 5, 7, 10, 15, 20, 30, 50};

struct SweepConfig {
  std::vector<PipelineVariant> pipelines{parse_variant("inloop"), parse_variant("prequant")};
  std::vector<std::uint32_t> deltas{std::begin(kDefaultDeltas), std::end(kDefaultDeltas)};
  std::vector<double> rels;
  ReconKind recon = ReconKind::none;
  TVConfig tv;
  // ReconKind::external: decoded cubes are written here as
  // <tag>_<abs|rel>_<value>.decoded.raw/.hdr and reconstructions are read
  // back from <tag>_<abs|rel>_<value>.recon.raw/.hdr.
  std::filesystem::path external_dir;
  int p_bands = 3;
  // Throughput columns are measured only when enabled; otherwise they are 0
  // and the CSV is byte-reproducible.
  bool timing = false;
  int timing_repetitions = 3;
  // 0: HSC_THREADS if set, else the OpenMP default.
  int threads = 0;
};

// key=value lines: pipelines, deltas, rels, recon, tv_lambda, tv_iterations,
// tv_step, external_dir, pbands, timing, timing_reps, threads. '#' starts a
// comment. An explicitly empty deltas= with no rels is rejected.
SweepConfig parse_sweep_config(std::istream& in);
SweepConfig load_sweep_config(const std::filesystem::path& path);

struct RDRecord {
  std::string pipeline;
  BoundMode mode = BoundMode::absolute;
  double delta_or_r = 0.0;
  double rate_bpp = 0.0;
  double snr_db = 0.0;
  double mare = 0.0;
  std::uint32_t max_abs_err = 0;
  double max_rel_err = 0.0;
  double enc_sps = 0.0;
  double dec_sps = 0.0;
  ReconKind recon = ReconKind::none;
  bool ok = true;
  std::string error;
  // GPO2 cannot code below 1 bpp; points near that floor are flagged.
  bool saturated = false;
};

// Independent jobs run concurrently; records come back ordered by
// (pipeline, mode, value) with any reconstruction record right after its
// base point. A failing point is recorded with ok = false.
std::vector<RDRecord> rd_sweep(const ImageCube& cube, const SweepConfig& cfg);

// Exact CSV schema, one header row:
// pipeline,delta_or_r,rate_bpp,snr_db,mare,max_abs_err,max_rel_err,enc_sps,dec_sps,recon
void write_csv(std::ostream& out, std::span<const RDRecord> records);
std::string csv_header();
std::string csv_row(const RDRecord& r);

struct RatePoint {
  double rate_bpp = 0.0;
  double snr_db = 0.0;
  double mare = 0.0;
};

// Linear interpolation between the two closest records bracketing the target
// rate. Throws std::domain_error outside the covered rate range.
RatePoint interpolate_at_rate(std::span<const RDRecord> records, double target_bpp);

}  // namespace hsc
