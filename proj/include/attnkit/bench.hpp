#pragma once

#include <algorithm>
#include <chrono>
#include <climits>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <vector>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include "attnkit/alloc.hpp"
#include "attnkit/io.hpp"
#include "attnkit/registry.hpp"
#include "attnkit/rng.hpp"

namespace attnkit {

// Efficiency-measurement settings: dummy sequences of the listed lengths,
// model dimension 512 over 8 heads, batches of 4, median wall-clock over 5
// repeats after 2 warmups. The small preset shrinks the model dimension so
// the full sweep finishes quickly on modest hardware.
struct BenchConfig {
  std::vector<std::size_t> lengths{256, 512, 1024, 2048, 4096, 8192};
  std::size_t emb_dim = 512;
  std::size_t heads = 8;
  std::size_t batch = 4;
  std::size_t repeats = 5;
  std::size_t warmup = 2;
  std::uint64_t seed = 42;
  MechanismConfig mech;

  static BenchConfig small_preset() {
    BenchConfig cfg;
    cfg.emb_dim = 64;
    return cfg;
  }

  void validate() const {
    if (lengths.empty()) throw ConfigError("bench: lengths must be non-empty");
    for (std::size_t i = 1; i < lengths.size(); ++i) {
      if (lengths[i] <= lengths[i - 1]) {
        throw ConfigError("bench: lengths must be strictly increasing");
      }
    }
    if (repeats < 3) throw ConfigError("bench: repeats must be >= 3");
    if (emb_dim == 0 || heads == 0 || batch == 0) throw ConfigError("bench: zero dimension");
    if (emb_dim % heads != 0) throw ConfigError("bench: emb_dim not divisible by heads");
  }
};

struct BenchRecord {
  Mechanism mechanism = Mechanism::Vanilla;
  AttentionPattern pattern = AttentionPattern::NoncausalSelf;
  std::size_t length = 0;
  double median_time_s = 0.0;
  std::size_t peak_bytes = 0;
  // Filled by with_ratios_vs_baseline; NaN until then.
  double time_ratio = std::numeric_limits<double>::quiet_NaN();
  double mem_ratio = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

inline AttentionInputs bench_inputs(const BenchConfig& cfg, std::size_t length,
                                    std::size_t batch_index, AttentionPattern pattern) {
  // One generator per (seed, length, batch item); every mechanism sees the
  // same dummy sequences.
  Rng rng(cfg.seed ^ (0x9E3779B97F4A7C15ULL * (length + 1)) ^ (batch_index + 1));
  Matrix q = gaussian_matrix(rng, length, cfg.emb_dim);
  Matrix k = gaussian_matrix(rng, length, cfg.emb_dim);
  Matrix v = gaussian_matrix(rng, length, cfg.emb_dim);
  return AttentionInputs::make(std::move(q), std::move(k), std::move(v), pattern, cfg.heads);
}

inline double median_of(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  // Even counts take the midpoint of the central pair.
  return n % 2 == 1 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

// The score buffers run to hundreds of megabytes; with default malloc
// tuning each trial would mmap, fault-in and munmap them from scratch,
// and the kernel time would swamp the kernels. Keeping large blocks on
// the retained heap lets trials reuse warm pages.
inline void retain_large_allocations() {
#if defined(__GLIBC__)
  static const bool done = [] {
    mallopt(M_MMAP_MAX, 0);
    mallopt(M_TRIM_THRESHOLD, INT_MAX);
    return true;
  }();
  (void)done;
#endif
}

}  // namespace detail

// Runs every (mechanism, length) cell serially: generate seeded inputs,
// warm up, then record the median kernel wall time over the repeats and the
// deterministic peak of the allocation counter. Timing brackets only the
// mechanism calls; input generation and validation stay outside.
inline std::vector<BenchRecord> run_bench(const BenchConfig& cfg,
                                          const std::vector<Mechanism>& mechanisms,
                                          AttentionPattern pattern) {
  cfg.validate();
  for (Mechanism m : mechanisms) {
    if (!check_support(m, pattern)) {
      throw UnsupportedPatternError(std::string(mechanism_name(m)) +
                                    " does not support pattern " + pattern_code(pattern));
    }
  }
  detail::retain_large_allocations();

  std::vector<BenchRecord> records;
  for (Mechanism mech : mechanisms) {
    for (std::size_t length : cfg.lengths) {
      std::vector<AttentionInputs> batch;
      batch.reserve(cfg.batch);
      for (std::size_t b = 0; b < cfg.batch; ++b) {
        batch.push_back(detail::bench_inputs(cfg, length, b, pattern));
      }

      auto run_once = [&](AllocCounter& counter) {
        std::vector<Matrix> outputs;
        outputs.reserve(cfg.batch);
        counter.reset();
        const auto start = std::chrono::steady_clock::now();
        {
          AllocScope scope(counter);
          for (const AttentionInputs& in : batch) {
            outputs.push_back(apply_mechanism(mech, in, cfg.mech));
          }
        }
        const auto stop = std::chrono::steady_clock::now();
        for (const Matrix& out : outputs) {
          if (!out.all_finite()) {
            throw NumericError(std::string("bench: non-finite output from ") +
                               mechanism_name(mech));
          }
        }
        return std::chrono::duration<double>(stop - start).count();
      };

      AllocCounter counter;
      for (std::size_t w = 0; w < cfg.warmup; ++w) run_once(counter);
      std::vector<double> times;
      times.reserve(cfg.repeats);
      std::size_t peak = 0;
      for (std::size_t rep = 0; rep < cfg.repeats; ++rep) {
        times.push_back(run_once(counter));
        peak = counter.peak_bytes();
      }

      BenchRecord rec;
      rec.mechanism = mech;
      rec.pattern = pattern;
      rec.length = length;
      rec.median_time_s = detail::median_of(times);
      rec.peak_bytes = peak;
      records.push_back(rec);
    }
  }

  std::sort(records.begin(), records.end(), [](const BenchRecord& a, const BenchRecord& b) {
    if (a.mechanism != b.mechanism) {
      return std::string(mechanism_name(a.mechanism)) < mechanism_name(b.mechanism);
    }
    return a.length < b.length;
  });
  return records;
}

// Attaches time and memory ratios relative to the baseline mechanism at the
// same length. The baseline must be present at every length that appears.
inline std::vector<BenchRecord> with_ratios_vs_baseline(std::vector<BenchRecord> records,
                                                        Mechanism baseline = Mechanism::Vanilla) {
  std::map<std::size_t, const BenchRecord*> base;
  for (const BenchRecord& r : records) {
    if (r.mechanism == baseline) base[r.length] = &r;
  }
  for (BenchRecord& r : records) {
    auto it = base.find(r.length);
    if (it == base.end()) {
      throw DataError(std::string("missing ") + mechanism_name(baseline) +
                      " baseline at length " + std::to_string(r.length));
    }
    r.time_ratio = r.median_time_s / it->second->median_time_s;
    r.mem_ratio = static_cast<double>(r.peak_bytes) /
                  static_cast<double>(it->second->peak_bytes);
  }
  return records;
}

inline std::string bench_records_csv(const std::vector<BenchRecord>& records) {
  std::ostringstream out;
  out << "mechanism,pattern,length,median_time_s,peak_bytes,time_ratio,mem_ratio\n";
  for (const BenchRecord& r : records) {
    out << mechanism_name(r.mechanism) << ',' << pattern_code(r.pattern) << ','
        << r.length << ',' << format_double(r.median_time_s) << ',' << r.peak_bytes << ',';
    if (!std::isnan(r.time_ratio)) out << format_double(r.time_ratio);
    out << ',';
    if (!std::isnan(r.mem_ratio)) out << format_double(r.mem_ratio);
    out << '\n';
  }
  return out.str();
}

inline std::vector<BenchRecord> parse_bench_csv(const std::vector<std::string>& lines) {
  if (lines.empty()) throw DataError("bench csv: empty file");
  std::vector<BenchRecord> records;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto fields = split_csv_line(lines[i]);
    if (fields.size() < 5) throw DataError("bench csv: bad row: " + lines[i]);
    BenchRecord r;
    r.mechanism = parse_mechanism(fields[0]);
    r.pattern = parse_pattern(fields[1]);
    r.length = static_cast<std::size_t>(parse_double(fields[2], "bench csv length"));
    r.median_time_s = parse_double(fields[3], "bench csv time");
    r.peak_bytes = static_cast<std::size_t>(parse_double(fields[4], "bench csv bytes"));
    if (fields.size() > 5 && !fields[5].empty()) r.time_ratio = parse_double(fields[5], "ratio");
    if (fields.size() > 6 && !fields[6].empty()) r.mem_ratio = parse_double(fields[6], "ratio");
    records.push_back(r);
  }
  return records;
}

}  // namespace attnkit
