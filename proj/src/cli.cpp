#include "hsc/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hsc/codec.hpp"
#include "hsc/cube.hpp"
#include "hsc/error.hpp"
#include "hsc/harness.hpp"
#include "hsc/metrics.hpp"
#include "hsc/recon_tv.hpp"
#include "hsc/synth.hpp"

namespace hsc {

namespace {

// Ordered key/value result printed either as key=value lines or as JSON.
class Report {
 public:
  void add(const std::string& key, const std::string& value) {
    entries_.push_back({key, value, nlohmann::ordered_json(value)});
  }
  void add(const std::string& key, const char* value) { add(key, std::string(value)); }
  void add(const std::string& key, double value, const char* fmt = "%.6f") {
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, value);
    nlohmann::ordered_json j = std::isfinite(value) ? nlohmann::ordered_json(value)
                                                    : nlohmann::ordered_json(nullptr);
    entries_.push_back({key, buf, std::move(j)});
  }
  void add_int(const std::string& key, std::uint64_t value) {
    entries_.push_back({key, std::to_string(value), nlohmann::ordered_json(value)});
  }

  void print(std::ostream& out, bool json) const {
    if (json) {
      nlohmann::ordered_json obj = nlohmann::ordered_json::object();
      for (const auto& e : entries_) {
        obj[e.key] = e.json;
      }
      out << obj.dump(2) << '\n';
      return;
    }
    for (const auto& e : entries_) {
      out << e.key << '=' << e.text << '\n';
    }
  }

 private:
  struct Entry {
    std::string key;
    std::string text;
    nlohmann::ordered_json json;
  };
  std::vector<Entry> entries_;
};

struct CodecFlags {
  std::string pipeline = "lossless";
  std::string mode;
  std::uint32_t delta = 0;
  double rel = 0.0;
  double margin = 1.0;
  std::string prediction = "full";
  std::string localsum = "wide";
  int pbands = 3;
  CLI::Option* mode_opt = nullptr;
  CLI::Option* delta_opt = nullptr;
  CLI::Option* rel_opt = nullptr;
  CLI::Option* margin_opt = nullptr;
};

void add_codec_flags(CLI::App* cmd, CodecFlags& f) {
  cmd->add_option("--pipeline", f.pipeline, "inloop | prequant | lossless")
      ->check(CLI::IsMember({"inloop", "prequant", "lossless"}))
      ->capture_default_str();
  f.mode_opt = cmd->add_option("--mode", f.mode, "error bound: abs | rel")
                   ->check(CLI::IsMember({"abs", "rel"}));
  f.delta_opt = cmd->add_option("--delta", f.delta, "absolute bound (max |error|)");
  f.rel_opt = cmd->add_option("--rel", f.rel, "relative bound R");
  f.margin_opt = cmd->add_option("--margin", f.margin, "in-loop relative step margin in (0, 1]");
  cmd->add_option("--prediction", f.prediction, "full | reduced")
      ->check(CLI::IsMember({"full", "reduced"}))
      ->capture_default_str();
  cmd->add_option("--localsum", f.localsum, "wide | narrow")
      ->check(CLI::IsMember({"wide", "narrow"}))
      ->capture_default_str();
  cmd->add_option("--pbands", f.pbands, "previous bands used for prediction")
      ->capture_default_str();
}

CodecConfig codec_config(const CodecFlags& f) {
  CodecConfig cfg;
  cfg.pipeline = parse_pipeline(f.pipeline);
  cfg.predictor.mode = f.prediction == "reduced" ? PredictionMode::reduced : PredictionMode::full;
  cfg.predictor.local_sum = f.localsum == "narrow" ? LocalSumMode::narrow : LocalSumMode::wide;
  cfg.predictor.p_bands = f.pbands;
  const bool has_delta = f.delta_opt->count() > 0;
  const bool has_rel = f.rel_opt->count() > 0;
  if (cfg.pipeline == Pipeline::lossless) {
    if (f.mode_opt->count() > 0 || has_delta || has_rel || f.margin_opt->count() > 0) {
      throw UsageError("--pipeline lossless conflicts with --mode/--delta/--rel/--margin");
    }
  } else if (f.mode_opt->count() == 0) {
    throw UsageError("--pipeline " + f.pipeline + " requires --mode abs|rel");
  } else if (f.mode == "abs") {
    if (has_rel) {
      throw UsageError("--mode abs conflicts with --rel");
    }
    if (f.margin_opt->count() > 0) {
      throw UsageError("--mode abs conflicts with --margin");
    }
    if (!has_delta) {
      throw UsageError("--mode abs requires --delta");
    }
    cfg.quantizer = QuantizerSpec::absolute(f.delta);
  } else {
    if (has_delta) {
      throw UsageError("--mode rel conflicts with --delta");
    }
    if (!has_rel) {
      throw UsageError("--mode rel requires --rel");
    }
    if (f.margin_opt->count() > 0 && cfg.pipeline != Pipeline::inloop) {
      throw UsageError("--margin applies only to --pipeline inloop");
    }
    cfg.quantizer = QuantizerSpec::relative(f.rel, f.margin);
  }
  validate(cfg);
  return cfg;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void add_quality(Report& r, const QualityMetrics& q) {
  r.add("snr_db", q.snr_db, "%.4f");
  r.add_int("snr_degenerate", q.snr_degenerate ? 1 : 0);
  r.add("mare", q.mare, "%.8f");
  r.add_int("mare_excluded", q.mare_excluded);
  r.add_int("max_abs_err", q.max_abs_error);
  r.add("max_rel_err", q.max_rel_error, "%.8f");
  r.add_int("samples", q.samples);
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Near-lossless hyperspectral cube compression toolkit", "hsc"};
  app.require_subcommand(1);
  bool json = false;
  app.add_flag("--json", json, "print results as a JSON object");

  // compress
  auto* compress = app.add_subcommand("compress", "encode a .raw/.hdr cube into .hsc");
  std::string c_in;
  std::string c_out;
  CodecFlags c_flags;
  compress->add_option("--input", c_in, "input .raw (with .hdr sidecar)")->required();
  compress->add_option("--output", c_out, "output .hsc")->required();
  add_codec_flags(compress, c_flags);

  // decompress
  auto* decompress = app.add_subcommand("decompress", "decode .hsc into .raw/.hdr");
  std::string d_in;
  std::string d_out;
  decompress->add_option("--input", d_in, "input .hsc")->required();
  decompress->add_option("--output", d_out, "output .raw (a .hdr is written alongside)")
      ->required();

  // reconstruct-tv
  auto* recon = app.add_subcommand("reconstruct-tv", "bin-consistent TV reconstruction");
  std::string r_in;
  std::string r_out;
  TVConfig tv;
  recon->add_option("--input", r_in, "input .hsc")->required();
  recon->add_option("--output", r_out, "output .raw")->required();
  recon->add_option("--lambda", tv.lambda, "TV weight")->capture_default_str();
  recon->add_option("--iterations", tv.iterations, "iteration cap")->capture_default_str();
  recon->add_option("--step", tv.step, "initial step")->capture_default_str();

  // evaluate
  auto* evaluate_cmd = app.add_subcommand("evaluate", "quality metrics of a reconstruction");
  std::string e_orig;
  std::string e_rec;
  std::string e_mode = "abs";
  double e_bound = -1.0;
  std::string e_csv;
  evaluate_cmd->add_option("--orig", e_orig, "original .raw")->required();
  evaluate_cmd->add_option("--recon", e_rec, "reconstructed .raw")->required();
  evaluate_cmd->add_option("--mode", e_mode, "abs | rel")
      ->check(CLI::IsMember({"abs", "rel"}))
      ->capture_default_str();
  evaluate_cmd->add_option("--bound", e_bound, "count samples exceeding this bound");
  evaluate_cmd->add_option("--csv", e_csv, "append a metrics row to this CSV file");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "rate-distortion sweep to CSV");
  std::string s_in;
  std::string s_cfg;
  std::string s_out;
  sweep->add_option("--input", s_in, "input .raw")->required();
  sweep->add_option("--config", s_cfg, "key=value sweep configuration");
  sweep->add_option("--out", s_out, "output CSV")->required();

  // bench
  auto* bench = app.add_subcommand("bench", "median encode/decode throughput");
  std::string b_in;
  int b_reps = 5;
  CodecFlags b_flags;
  bench->add_option("--input", b_in, "input .raw")->required();
  bench->add_option("--reps", b_reps, "repetitions (>= 3)")->capture_default_str();
  add_codec_flags(bench, b_flags);

  // synth
  auto* synth = app.add_subcommand("synth", "write a synthetic correlated cube");
  SynthesisParams sp;
  std::string y_out;
  std::string y_order = "bsq";
  synth->add_option("--nx", sp.dims.nx)->capture_default_str();
  synth->add_option("--ny", sp.dims.ny)->capture_default_str();
  synth->add_option("--nz", sp.dims.nz)->capture_default_str();
  synth->add_option("--seed", sp.seed)->capture_default_str();
  synth->add_option("--spectral-corr", sp.spectral_corr)->capture_default_str();
  synth->add_option("--bit-depth", sp.bit_depth)->capture_default_str();
  synth->add_option("--order", y_order)->check(CLI::IsMember({"bsq", "bil"}))->capture_default_str();
  synth->add_option("--out", y_out, "output .raw")->required();

  // clip-vectors
  auto* clip = app.add_subcommand("clip-vectors", "write the shared clip test-vector CSV");
  std::string v_out;
  clip->add_option("--out", v_out, "output CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  Report report;
  int status = kExitOk;
  try {
    if (*compress) {
      const CodecConfig cfg = codec_config(c_flags);
      const ImageCube cube = load_cube(c_in);
      EncodeStats stats;
      EncodeOptions opts;
      opts.stats = &stats;
      const auto t0 = std::chrono::steady_clock::now();
      const Bitstream bs = encode(cube, cfg, opts);
      const double secs = seconds_since(t0);
      write_hsc(bs, c_out);
      report.add("pipeline", to_string(cfg.pipeline));
      report.add("mode", to_string(cfg.quantizer.mode));
      report.add_int("samples", cube.size());
      report.add_int("payload_bits", bs.payload_bits);
      report.add("rate_bpp", bs.rate_bpp());
      report.add("encode_sps", static_cast<double>(cube.size()) / std::max(secs, 1e-12), "%.0f");
      report.add_int("max_abs_err", stats.max_abs_error);
      if (cfg.quantizer.mode == BoundMode::relative) {
        report.add_int("relative_violations", stats.relative_violations);
        report.add("violation_fraction", stats.violation_fraction(), "%.8f");
      }
      report.add("output", c_out);
    } else if (*decompress) {
      const Bitstream bs = read_hsc(d_in);
      const auto t0 = std::chrono::steady_clock::now();
      const ImageCube cube = decode(bs);
      const double secs = seconds_since(t0);
      store_cube_with_header(cube, d_out);
      report.add("pipeline", to_string(bs.config.pipeline));
      report.add_int("samples", cube.size());
      report.add("decode_sps", static_cast<double>(cube.size()) / std::max(secs, 1e-12), "%.0f");
      report.add("output", d_out);
    } else if (*recon) {
      validate(tv);
      const Bitstream bs = read_hsc(r_in);
      const ImageCube decoded = decode(bs);
      const auto bins = bins_for(decoded, bs.config.quantizer);
      const TVSolution sol = tv_solve(decoded, bins, tv);
      const ImageCube rec = tv_reconstruct(decoded, bins, tv);
      store_cube_with_header(rec, r_out);
      report.add("lambda", tv.lambda, "%g");
      report.add_int("iterations", sol.objective.size() - 1);
      report.add("objective_start", sol.objective.front(), "%.6f");
      report.add("objective_final", sol.objective.back(), "%.6f");
      report.add("output", r_out);
    } else if (*evaluate_cmd) {
      const ImageCube orig = load_cube(e_orig);
      const ImageCube rec = load_cube(e_rec);
      const QualityMetrics q = evaluate(orig, rec);
      add_quality(report, q);
      if (e_bound >= 0.0) {
        std::uint64_t violations = 0;
        const ImageCube r = reorder(rec, orig.order());
        const auto a = orig.samples();
        const auto b = r.samples();
        for (std::size_t i = 0; i < a.size(); ++i) {
          const double diff = std::abs(static_cast<double>(a[i]) - static_cast<double>(b[i]));
          const double bound = e_mode == "rel" ? e_bound * static_cast<double>(a[i]) : e_bound;
          violations += diff > bound ? 1 : 0;
        }
        report.add("mode", e_mode);
        report.add("bound", e_bound, "%g");
        report.add_int("violations", violations);
      }
      if (!e_csv.empty()) {
        const bool fresh = !std::filesystem::exists(e_csv);
        std::ofstream csv(e_csv, std::ios::app);
        if (!csv) {
          throw DataError("cannot open " + e_csv);
        }
        if (fresh) {
          csv << "orig,recon,snr_db,mare,max_abs_err,max_rel_err\n";
        }
        char row[256];
        std::snprintf(row, sizeof row, "%.4f,%.8f,%u,%.8f", q.snr_db, q.mare, q.max_abs_error,
                      q.max_rel_error);
        csv << e_orig << ',' << e_rec << ',' << row << '\n';
      }
    } else if (*sweep) {
      const SweepConfig cfg = s_cfg.empty() ? SweepConfig{} : load_sweep_config(s_cfg);
      const ImageCube cube = load_cube(s_in);
      const auto records = rd_sweep(cube, cfg);
      std::ofstream csv(s_out, std::ios::binary);
      if (!csv) {
        throw DataError("cannot open " + s_out);
      }
      write_csv(csv, records);
      std::size_t failures = 0;
      for (const auto& rec : records) {
        if (!rec.ok) {
          ++failures;
          err << "sweep point " << rec.pipeline << ' ' << rec.delta_or_r << ": " << rec.error
              << '\n';
        }
      }
      report.add_int("records", records.size());
      report.add_int("failures", failures);
      report.add("output", s_out);
      if (failures > 0) {
        status = kExitData;
      }
    } else if (*bench) {
      const CodecConfig cfg = codec_config(b_flags);
      const ImageCube cube = load_cube(b_in);
      const ThroughputReport t = bench_throughput(cube, cfg, b_reps);
      report.add("pipeline", to_string(cfg.pipeline));
      report.add_int("samples", t.samples);
      report.add_int("repetitions", static_cast<std::uint64_t>(t.repetitions));
      report.add("rate_bpp", t.rate_bpp);
      report.add("encode_sps", t.encode_sps, "%.0f");
      report.add("decode_sps", t.decode_sps, "%.0f");
    } else if (*synth) {
      if (sp.dims.count() == 0) {
        throw UsageError("--nx, --ny and --nz must be positive");
      }
      if (sp.bit_depth < 2 || sp.bit_depth > 16) {
        throw UsageError("--bit-depth must be in [2, 16]");
      }
      if (!(sp.spectral_corr >= 0.0 && sp.spectral_corr < 1.0)) {
        throw UsageError("--spectral-corr must be in [0, 1)");
      }
      ImageCube cube = synthesize_cube(sp);
      if (y_order == "bil") {
        cube = reorder(cube, Order::bil);
      }
      store_cube_with_header(cube, y_out);
      report.add_int("nx", sp.dims.nx);
      report.add_int("ny", sp.dims.ny);
      report.add_int("nz", sp.dims.nz);
      report.add_int("seed", sp.seed);
      report.add("output", y_out);
    } else if (*clip) {
      write_clip_vectors(v_out);
      report.add("output", v_out);
    }
  } catch (const std::invalid_argument& e) {
    // UsageError and argument checks inside the modules.
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  report.print(out, json);
  return status;
}

}  // namespace hsc
