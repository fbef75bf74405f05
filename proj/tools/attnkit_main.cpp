// Command-line front end: verification suites, the efficiency benchmark,
// cost-curve fitting, composite scoring and the pattern-support table.

#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "attnkit/bench.hpp"
#include "attnkit/ci.hpp"
#include "attnkit/efflen.hpp"
#include "attnkit/io.hpp"
#include "attnkit/svg.hpp"
#include "attnkit/verify.hpp"

namespace {

using json = nlohmann::json;

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> items;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

std::string chart_path(const std::string& csv_path, const std::string& suffix) {
  std::string stem = csv_path;
  if (stem.size() > 4 && stem.substr(stem.size() - 4) == ".csv") {
    stem = stem.substr(0, stem.size() - 4);
  }
  return stem + suffix;
}

int run_verify(const std::string& mechanism, std::uint64_t seed) {
  std::optional<attnkit::Mechanism> only;
  if (mechanism != "all") only = attnkit::parse_mechanism(mechanism);
  const auto results = attnkit::run_verification(only, seed);
  std::cout << attnkit::verification_report(results);
  for (const auto& r : results) {
    if (!r.pass) return 1;
  }
  return 0;
}

struct BenchCliOptions {
  std::string pattern = "ns";
  std::string mechanisms;  // comma list; empty = all supporting the pattern
  std::string lengths;
  std::string out = "bench.csv";
  bool small = false;
  attnkit::BenchConfig config;
};

int run_bench_cmd(BenchCliOptions opt, std::uint64_t seed) {
  if (opt.small) {
    const auto keep = opt.config;
    opt.config = attnkit::BenchConfig::small_preset();
    opt.config.repeats = keep.repeats;
    opt.config.warmup = keep.warmup;
  }
  opt.config.seed = seed;
  opt.config.mech.seed = seed;

  const auto pattern = attnkit::parse_pattern(opt.pattern);
  std::vector<attnkit::Mechanism> mechanisms;
  if (opt.mechanisms.empty()) {
    for (attnkit::Mechanism m : attnkit::all_mechanisms()) {
      if (attnkit::check_support(m, pattern)) mechanisms.push_back(m);
    }
  } else {
    for (const std::string& name : split_list(opt.mechanisms)) {
      mechanisms.push_back(attnkit::parse_mechanism(name));
    }
  }
  if (!opt.lengths.empty()) {
    opt.config.lengths.clear();
    for (const std::string& item : split_list(opt.lengths)) {
      opt.config.lengths.push_back(
          static_cast<std::size_t>(attnkit::parse_double(item, "--lengths")));
    }
  }

  auto records = attnkit::run_bench(opt.config, mechanisms, pattern);
  const bool has_baseline =
      std::find(mechanisms.begin(), mechanisms.end(), attnkit::Mechanism::Vanilla) !=
      mechanisms.end();
  if (has_baseline) records = attnkit::with_ratios_vs_baseline(records);

  attnkit::write_file(opt.out, attnkit::bench_records_csv(records));
  attnkit::write_file(chart_path(opt.out, "_time.svg"),
                      attnkit::bench_chart_svg(records, false, "median kernel time (s)"));
  attnkit::write_file(chart_path(opt.out, "_mem.svg"),
                      attnkit::bench_chart_svg(records, true, "peak allocated bytes"));

  std::printf("%-11s %8s %14s %16s\n", "mechanism", "length", "median_time_s", "peak_bytes");
  for (const auto& r : records) {
    std::printf("%-11s %8zu %14.6e %16zu\n", attnkit::mechanism_name(r.mechanism), r.length,
                r.median_time_s, r.peak_bytes);
  }
  std::cout << "note: median_time_s is volatile (wall clock); peak_bytes is deterministic\n";
  std::cout << "wrote " << opt.out << " and companion charts\n";
  return 0;
}

int run_efflen(const std::string& input, const std::string& baseline_name,
               const std::string& out) {
  const auto records = attnkit::parse_bench_csv(attnkit::read_lines(input));
  const auto baseline = attnkit::parse_mechanism(baseline_name);

  std::map<attnkit::Mechanism, std::vector<attnkit::CostPoint>> time_points, mem_points;
  for (const auto& r : records) {
    const double x = static_cast<double>(r.length);
    time_points[r.mechanism].push_back({x, r.median_time_s});
    mem_points[r.mechanism].push_back({x, static_cast<double>(r.peak_bytes)});
  }
  if (time_points.find(baseline) == time_points.end()) {
    throw attnkit::DataError("efflen: baseline mechanism missing from input");
  }

  json report;
  report["baseline"] = attnkit::mechanism_name(baseline);
  report["entries"] = json::array();
  for (const char* metric : {"time", "memory"}) {
    const bool memory = std::string(metric) == "memory";
    const auto& points = memory ? mem_points : time_points;
    const auto quad = attnkit::fit_curve(points.at(baseline), attnkit::CurveKind::Quadratic);
    report[std::string("baseline_fit_") + metric] = {
        {"a", quad.coef[0]}, {"b", quad.coef[1]}, {"c", quad.coef[2]},
        {"r_squared", quad.r_squared}};
    for (const auto& [mech, pts] : points) {
      if (mech == baseline) continue;
      const auto lin = attnkit::fit_curve(pts, attnkit::CurveKind::Linear);
      const auto el = attnkit::efficiency_length(quad, lin);
      json entry;
      entry["mechanism"] = attnkit::mechanism_name(mech);
      entry["metric"] = metric;
      entry["coefficients"] = {{"e", lin.coef[0]}, {"f", lin.coef[1]}};
      entry["r_squared"] = lin.r_squared;
      entry["exists"] = el.exists;
      if (el.exists) entry["efficiency_length"] = el.length;
      report["entries"].push_back(entry);
    }
  }

  const std::string text = report.dump(2) + "\n";
  if (out.empty()) {
    std::cout << text;
  } else {
    attnkit::write_file(out, text);
    std::cout << "wrote " << out << '\n';
  }
  return 0;
}

int run_ci(const std::string& metrics_path, const std::string& stats_path,
           bool population_sigma, const std::string& out_prefix) {
  const auto records = attnkit::parse_metrics_csv(attnkit::read_lines(metrics_path));
  attnkit::NormStats stats;
  if (!stats_path.empty()) {
    // Supplied stats take precedence so new mechanisms can be scored
    // against the shipped normalization tables.
    stats = attnkit::parse_stats_csv(attnkit::read_lines(stats_path));
  } else {
    stats = attnkit::compute_stats(records, population_sigma
                                                ? attnkit::SigmaMode::Population
                                                : attnkit::SigmaMode::Sample);
    attnkit::write_file(out_prefix + "_stats.csv", attnkit::stats_csv(stats));
  }

  const auto report = attnkit::score_models(records, stats);
  attnkit::write_file(out_prefix + "_task_ci.csv", attnkit::task_scores_csv(report));
  attnkit::write_file(out_prefix + "_overall_ci.csv", attnkit::overall_scores_csv(report));

  std::printf("%-16s %-8s %10s\n", "model", "task", "task_ci");
  for (const auto& t : report.tasks) {
    std::printf("%-16s %-8s %10.3f\n", t.model.c_str(), t.task.c_str(), t.score);
  }
  std::printf("\n%-16s %10s\n", "model", "overall_ci");
  for (const auto& m : report.overall) {
    std::printf("%-16s %10.3f\n", m.model.c_str(), m.score);
  }
  std::cout << "wrote " << out_prefix << "_task_ci.csv and " << out_prefix
            << "_overall_ci.csv\n";
  return 0;
}

int run_support(const std::string& out) {
  std::printf("%-11s %4s %4s %4s %4s\n", "mechanism", "ns", "cs", "nc", "cc");
  for (attnkit::Mechanism m : attnkit::all_mechanisms()) {
    std::printf("%-11s", attnkit::mechanism_name(m));
    for (attnkit::AttentionPattern p : attnkit::all_patterns()) {
      std::printf(" %4s", attnkit::check_support(m, p) ? "yes" : "no");
    }
    std::printf("\n");
  }
  if (!out.empty()) {
    attnkit::write_file(out, attnkit::support_matrix_csv());
    std::cout << "wrote " << out << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"attnkit: efficient attention kernels, benchmarks and scoring"};
  app.require_subcommand(1);
  app.fallthrough();  // allow the global --seed after a subcommand name

  std::uint64_t seed = 42;
  app.add_option("--seed", seed, "seed for every randomized component");

  auto* verify = app.add_subcommand("verify", "run oracle and invariant checks");
  std::string verify_mechanism = "all";
  verify->add_option("--mechanism", verify_mechanism, "mechanism name or 'all'");

  auto* bench = app.add_subcommand("bench", "run the efficiency measurement");
  BenchCliOptions bench_opt;
  bench->add_option("--pattern", bench_opt.pattern, "ns|cs|nc|cc");
  bench->add_option("--mechanisms", bench_opt.mechanisms, "comma-separated mechanism names");
  bench->add_option("--lengths", bench_opt.lengths, "comma-separated sequence lengths");
  bench->add_option("--repeats", bench_opt.config.repeats, "timed repeats per cell");
  bench->add_option("--warmup", bench_opt.config.warmup, "warmup runs per cell");
  bench->add_option("--emb-dim", bench_opt.config.emb_dim, "model dimension");
  bench->add_option("--heads", bench_opt.config.heads, "attention heads");
  bench->add_option("--batch", bench_opt.config.batch, "sequences per trial");
  bench->add_flag("--small", bench_opt.small, "small preset (emb_dim 64)");
  bench->add_option("--out", bench_opt.out, "output CSV path");

  auto* efflen = app.add_subcommand("efflen", "fit cost curves and intersect them");
  std::string efflen_input, efflen_baseline = "vanilla", efflen_out;
  efflen->add_option("--input", efflen_input, "bench CSV")->required();
  efflen->add_option("--baseline", efflen_baseline, "baseline mechanism");
  efflen->add_option("--out", efflen_out, "output JSON path (default: stdout)");

  auto* ci = app.add_subcommand("ci", "compute composite index scores");
  std::string ci_metrics, ci_stats, ci_out = "ci";
  bool ci_population = false;
  ci->add_option("--metrics", ci_metrics, "metrics CSV (model,task,metric,value,direction)")
      ->required();
  ci->add_option("--stats", ci_stats, "stats CSV (task,metric,mu,sigma); computed if absent");
  ci->add_flag("--population-sigma", ci_population,
               "divide by N instead of N-1 when computing stats");
  ci->add_option("--out", ci_out, "output file prefix");

  auto* support = app.add_subcommand("support", "print the pattern-support matrix");
  std::string support_out;
  support->add_option("--out", support_out, "also write the matrix as CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  std::cout << "seed: " << seed << '\n';
  try {
    if (verify->parsed()) return run_verify(verify_mechanism, seed);
    if (bench->parsed()) return run_bench_cmd(bench_opt, seed);
    if (efflen->parsed()) return run_efflen(efflen_input, efflen_baseline, efflen_out);
    if (ci->parsed()) return run_ci(ci_metrics, ci_stats, ci_population, ci_out);
    if (support->parsed()) return run_support(support_out);
  } catch (const attnkit::NumericError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const attnkit::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
