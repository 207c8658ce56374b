#include "hsc/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <omp.h>

#include "hsc/error.hpp"
#include "hsc/metrics.hpp"

namespace hsc {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) {
    return {};
  }
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) {
      out.push_back(item);
    }
  }
  return out;
}

struct Job {
  PipelineVariant variant;
  QuantizerSpec quantizer;
  double value = 0.0;
};

std::string format_value(BoundMode mode, double value) {
  char buf[64];
  if (mode == BoundMode::relative) {
    std::snprintf(buf, sizeof buf, "%g", value);
  } else {
    std::snprintf(buf, sizeof buf, "%.0f", value);
  }
  return buf;
}

int sweep_threads(const SweepConfig& cfg) {
  if (cfg.threads > 0) {
    return cfg.threads;
  }
  if (const char* env = std::getenv("HSC_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) {
      return n;
    }
  }
  return omp_get_max_threads();
}

RDRecord measure(const std::string& tag, const Job& job, const ImageCube& orig,
                 const ImageCube& rec, double rate, ReconKind recon) {
  const QualityMetrics q = evaluate(orig, rec);
  RDRecord r;
  r.pipeline = tag;
  r.mode = job.quantizer.mode == BoundMode::relative ? BoundMode::relative : BoundMode::absolute;
  r.delta_or_r = job.value;
  r.rate_bpp = rate;
  r.snr_db = q.snr_db;
  r.mare = q.mare;
  r.max_abs_err = q.max_abs_error;
  r.max_rel_err = q.max_rel_error;
  r.recon = recon;
  r.saturated = rate < 1.05;
  return r;
}

RDRecord failed(const Job& job, ReconKind recon, const std::string& what) {
  RDRecord r;
  r.pipeline = job.variant.tag;
  r.mode = job.quantizer.mode == BoundMode::relative ? BoundMode::relative : BoundMode::absolute;
  r.delta_or_r = job.value;
  r.rate_bpp = r.snr_db = r.mare = r.max_rel_err = std::nan("");
  r.recon = recon;
  r.ok = false;
  r.error = what;
  return r;
}

std::vector<RDRecord> run_job(const ImageCube& cube, const SweepConfig& cfg, const Job& job) {
  std::vector<RDRecord> out;
  CodecConfig codec;
  codec.pipeline = job.variant.pipeline;
  codec.predictor.mode = job.variant.mode;
  codec.predictor.local_sum = job.variant.local_sum;
  codec.predictor.p_bands = cfg.p_bands;
  codec.quantizer = job.quantizer;
  Bitstream bs;
  ImageCube decoded;
  try {
    bs = encode(cube, codec);
    decoded = decode(bs);
    RDRecord base = measure(job.variant.tag, job, cube, decoded, bs.rate_bpp(), ReconKind::none);
    if (cfg.timing) {
      const ThroughputReport t = bench_throughput(cube, codec, cfg.timing_repetitions);
      base.enc_sps = t.encode_sps;
      base.dec_sps = t.decode_sps;
    }
    out.push_back(base);
  } catch (const std::exception& e) {
    out.push_back(failed(job, ReconKind::none, e.what()));
    return out;
  }
  if (cfg.recon == ReconKind::none) {
    return out;
  }
  try {
    if (cfg.recon == ReconKind::tv) {
      const auto bins = bins_for(decoded, bs.config.quantizer);
      const ImageCube rec = tv_reconstruct(decoded, bins, cfg.tv);
      out.push_back(measure(job.variant.tag, job, cube, rec, bs.rate_bpp(), ReconKind::tv));
    } else {
      const std::string stem = job.variant.tag + "_" + to_string(out.front().mode) + "_" +
                               format_value(out.front().mode, job.value);
      const auto dir = cfg.external_dir.empty() ? std::filesystem::path(".") : cfg.external_dir;
      store_cube_with_header(decoded, dir / (stem + ".decoded.raw"));
      const auto recon_path = dir / (stem + ".recon.raw");
      if (!std::filesystem::exists(recon_path)) {
        throw DataError("missing external reconstruction " + recon_path.string());
      }
      const ImageCube rec = load_cube(recon_path);
      out.push_back(measure(job.variant.tag, job, cube, rec, bs.rate_bpp(), ReconKind::external));
    }
  } catch (const std::exception& e) {
    out.push_back(failed(job, cfg.recon, e.what()));
  }
  return out;
}

std::string format_double(const char* fmt, double v) {
  if (std::isnan(v)) {
    return "nan";
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

}  // namespace

PipelineVariant parse_variant(const std::string& tag) {
  PipelineVariant v;
  v.tag = tag;
  std::string base = tag;
  if (tag.size() > 3 && tag.ends_with("-rn")) {
    base = tag.substr(0, tag.size() - 3);
    v.mode = PredictionMode::reduced;
    v.local_sum = LocalSumMode::narrow;
  }
  v.pipeline = parse_pipeline(base);
  return v;
}

std::string to_string(ReconKind kind) {
  switch (kind) {
    case ReconKind::none:
      return "none";
    case ReconKind::tv:
      return "tv";
    case ReconKind::external:
      return "external";
  }
  return "?";
}

ReconKind parse_recon(const std::string& text) {
  if (text == "none") return ReconKind::none;
  if (text == "tv") return ReconKind::tv;
  if (text == "external") return ReconKind::external;
  throw UsageError("unknown reconstruction '" + text + "' (expected none|tv|external)");
}

SweepConfig parse_sweep_config(std::istream& in) {
  SweepConfig cfg;
  bool deltas_empty = false;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.resize(hash);
    }
    line = trim(line);
    if (line.empty()) {
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError("sweep config line " + std::to_string(lineno) + ": expected key=value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      if (key == "pipelines") {
        cfg.pipelines.clear();
        for (const auto& tag : split_list(value)) {
          cfg.pipelines.push_back(parse_variant(tag));
        }
      } else if (key == "deltas") {
        cfg.deltas.clear();
        for (const auto& v : split_list(value)) {
          cfg.deltas.push_back(static_cast<std::uint32_t>(std::stoul(v)));
        }
        deltas_empty = cfg.deltas.empty();
      } else if (key == "rels") {
        cfg.rels.clear();
        for (const auto& v : split_list(value)) {
          cfg.rels.push_back(std::stod(v));
        }
      } else if (key == "recon") {
        cfg.recon = parse_recon(value);
      } else if (key == "tv_lambda") {
        cfg.tv.lambda = std::stod(value);
      } else if (key == "tv_iterations") {
        cfg.tv.iterations = std::stoi(value);
      } else if (key == "tv_step") {
        cfg.tv.step = std::stod(value);
      } else if (key == "external_dir") {
        cfg.external_dir = value;
      } else if (key == "pbands") {
        cfg.p_bands = std::stoi(value);
      } else if (key == "timing") {
        cfg.timing = value == "1" || value == "true";
      } else if (key == "timing_reps") {
        cfg.timing_repetitions = std::stoi(value);
      } else if (key == "threads") {
        cfg.threads = std::stoi(value);
      } else {
        throw UsageError("sweep config line " + std::to_string(lineno) + ": unknown key '" + key +
                         "'");
      }
    } catch (const std::logic_error& e) {
      if (dynamic_cast<const UsageError*>(&e) != nullptr) {
        throw;
      }
      throw UsageError("sweep config line " + std::to_string(lineno) + ": bad value for " + key);
    }
  }
  if (deltas_empty && cfg.rels.empty()) {
    throw UsageError("sweep config: empty delta set");
  }
  if (cfg.pipelines.empty()) {
    throw UsageError("sweep config: no pipelines");
  }
  for (double r : cfg.rels) {
    validate(QuantizerSpec::relative(r));
  }
  validate(cfg.tv);
  if (cfg.timing && cfg.timing_repetitions < 3) {
    throw UsageError("sweep config: timing_reps must be >= 3");
  }
  return cfg;
}

SweepConfig load_sweep_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw UsageError("cannot open sweep config " + path.string());
  }
  return parse_sweep_config(in);
}

std::vector<RDRecord> rd_sweep(const ImageCube& cube, const SweepConfig& cfg) {
  std::vector<Job> jobs;
  for (const PipelineVariant& v : cfg.pipelines) {
    if (v.pipeline == Pipeline::lossless) {
      jobs.push_back({v, QuantizerSpec::lossless(), 0.0});
      continue;
    }
    for (std::uint32_t delta : cfg.deltas) {
      jobs.push_back({v, QuantizerSpec::absolute(delta), static_cast<double>(delta)});
    }
    for (double r : cfg.rels) {
      jobs.push_back({v, QuantizerSpec::relative(r), r});
    }
  }
  std::vector<std::vector<RDRecord>> results(jobs.size());
  const auto n = static_cast<std::ptrdiff_t>(jobs.size());
  // Timed sweeps run serially so points do not compete for cores.
  const int threads = cfg.timing ? 1 : sweep_threads(cfg);
#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto j = static_cast<std::size_t>(i);
    results[j] = run_job(cube, cfg, jobs[j]);
  }
  std::vector<RDRecord> records;
  for (auto& r : results) {
    records.insert(records.end(), r.begin(), r.end());
  }
  return records;
}

std::string csv_header() {
  return "pipeline,delta_or_r,rate_bpp,snr_db,mare,max_abs_err,max_rel_err,enc_sps,dec_sps,recon";
}

std::string csv_row(const RDRecord& r) {
  std::string row = r.pipeline;
  row += ',' + format_value(r.mode, r.delta_or_r);
  row += ',' + format_double("%.6f", r.rate_bpp);
  row += ',' + format_double("%.4f", r.snr_db);
  row += ',' + format_double("%.8f", r.mare);
  row += ',' + (r.ok ? std::to_string(r.max_abs_err) : std::string("nan"));
  row += ',' + format_double("%.8f", r.max_rel_err);
  row += ',' + format_double("%.0f", r.enc_sps);
  row += ',' + format_double("%.0f", r.dec_sps);
  row += ',' + to_string(r.recon) + (r.ok ? "" : ":failed");
  return row;
}

void write_csv(std::ostream& out, std::span<const RDRecord> records) {
  out << csv_header() << '\n';
  for (const RDRecord& r : records) {
    out << csv_row(r) << '\n';
  }
}

RatePoint interpolate_at_rate(std::span<const RDRecord> records, double target_bpp) {
  std::vector<const RDRecord*> pts;
  for (const RDRecord& r : records) {
    if (r.ok) {
      pts.push_back(&r);
    }
  }
  std::sort(pts.begin(), pts.end(),
            [](const RDRecord* a, const RDRecord* b) { return a->rate_bpp < b->rate_bpp; });
  for (const RDRecord* p : pts) {
    if (p->rate_bpp == target_bpp) {
      return {p->rate_bpp, p->snr_db, p->mare};
    }
  }
  if (pts.size() < 2 || target_bpp < pts.front()->rate_bpp || target_bpp > pts.back()->rate_bpp) {
    throw std::domain_error("target rate outside the available rate-distortion points");
  }
  const auto hi = std::upper_bound(pts.begin(), pts.end(), target_bpp,
                                   [](double t, const RDRecord* r) { return t < r->rate_bpp; });
  const RDRecord* b = *hi;
  const RDRecord* a = *(hi - 1);
  const double w = (target_bpp - a->rate_bpp) / (b->rate_bpp - a->rate_bpp);
  return {target_bpp, a->snr_db + w * (b->snr_db - a->snr_db), a->mare + w * (b->mare - a->mare)};
}

}  // namespace hsc
