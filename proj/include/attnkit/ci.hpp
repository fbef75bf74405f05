#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "attnkit/errors.hpp"
#include "attnkit/io.hpp"

namespace attnkit {

enum class Direction { HigherBetter, LowerBetter };

inline Direction parse_direction(const std::string& s) {
  if (s == "higher") return Direction::HigherBetter;
  if (s == "lower") return Direction::LowerBetter;
  throw DataError("direction must be 'higher' or 'lower', got '" + s + "'");
}

struct MetricRecord {
  std::string model;
  std::string task;
  std::string metric;
  double value = 0.0;
  Direction direction = Direction::HigherBetter;
};

struct MuSigma {
  double mu = 0.0;
  double sigma = 0.0;
};

// (task, metric) -> normalization statistics.
using NormStats = std::map<std::pair<std::string, std::string>, MuSigma>;

enum class SigmaMode { Sample, Population };

// Direction-corrected z-score: larger is always better.
inline double zscore(const MetricRecord& rec, const NormStats& stats) {
  const auto it = stats.find({rec.task, rec.metric});
  if (it == stats.end()) {
    throw DataError("missing stats for " + rec.task + "/" + rec.metric);
  }
  const MuSigma& ms = it->second;
  if (!(ms.sigma > 0.0)) {
    throw DataError("sigma must be positive for " + rec.task + "/" + rec.metric);
  }
  const double z = (rec.value - ms.mu) / ms.sigma;
  return rec.direction == Direction::HigherBetter ? z : -z;
}

// Mean of the metric z-scores within one (model, task) group.
inline double task_ci(const std::vector<MetricRecord>& records, const NormStats& stats) {
  if (records.empty()) throw DataError("task_ci: no metric records");
  double acc = 0.0;
  for (const MetricRecord& rec : records) acc += zscore(rec, stats);
  return acc / static_cast<double>(records.size());
}

// Mean of per-task scores.
inline double overall_ci(const std::vector<double>& task_scores) {
  if (task_scores.empty()) throw DataError("overall_ci: no task scores");
  double acc = 0.0;
  for (double s : task_scores) acc += s;
  return acc / static_cast<double>(task_scores.size());
}

// Per-(task, metric) mean and standard deviation across models. Sample
// (divide by N-1) deviation by default; population available for comparison.
inline NormStats compute_stats(const std::vector<MetricRecord>& records,
                               SigmaMode mode = SigmaMode::Sample) {
  std::map<std::pair<std::string, std::string>, std::vector<double>> groups;
  for (const MetricRecord& rec : records) {
    groups[{rec.task, rec.metric}].push_back(rec.value);
  }
  NormStats stats;
  for (const auto& [key, values] : groups) {
    if (values.size() < 2) {
      throw DataError("compute_stats: need >= 2 models for " + key.first + "/" + key.second);
    }
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    const double denom = mode == SigmaMode::Sample
                             ? static_cast<double>(values.size() - 1)
                             : static_cast<double>(values.size());
    const double sigma = std::sqrt(ss / denom);
    if (!(sigma > 0.0)) {
      throw DataError("compute_stats: zero variance for " + key.first + "/" + key.second);
    }
    stats[key] = {mean, sigma};
  }
  return stats;
}

// Standard sample Pearson correlation coefficient.
inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw DataError("pearson: length mismatch");
  if (x.size() < 2) throw DataError("pearson: need at least 2 points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw DataError("pearson: zero variance input");
  return sxy / std::sqrt(sxx * syy);
}

// ---- CSV surfaces -------------------------------------------------------

// metrics file: model,task,metric,value,direction
inline std::vector<MetricRecord> parse_metrics_csv(const std::vector<std::string>& lines) {
  if (lines.empty()) throw DataError("metrics csv: empty file");
  std::vector<MetricRecord> records;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto fields = split_csv_line(lines[i]);
    if (fields.size() != 5) throw DataError("metrics csv: bad row: " + lines[i]);
    MetricRecord rec;
    rec.model = fields[0];
    rec.task = fields[1];
    rec.metric = fields[2];
    rec.value = parse_double(fields[3], "metrics csv");
    rec.direction = parse_direction(fields[4]);
    records.push_back(rec);
  }
  return records;
}

// stats file: task,metric,mu,sigma
inline NormStats parse_stats_csv(const std::vector<std::string>& lines) {
  if (lines.empty()) throw DataError("stats csv: empty file");
  NormStats stats;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto fields = split_csv_line(lines[i]);
    if (fields.size() != 4) throw DataError("stats csv: bad row: " + lines[i]);
    stats[{fields[0], fields[1]}] = {parse_double(fields[2], "stats csv mu"),
                                     parse_double(fields[3], "stats csv sigma")};
  }
  return stats;
}

struct TaskScore {
  std::string model;
  std::string task;
  double score = 0.0;
};

struct ModelScore {
  std::string model;
  double score = 0.0;
};

struct CiReport {
  std::vector<TaskScore> tasks;
  std::vector<ModelScore> overall;
};

// Scores every model in the metrics table: per-task CI first, then the mean
// across that model's tasks. Models and tasks keep their file order.
inline CiReport score_models(const std::vector<MetricRecord>& records, const NormStats& stats) {
  std::vector<std::string> model_order;
  std::vector<std::string> task_order;
  for (const MetricRecord& rec : records) {
    if (std::find(model_order.begin(), model_order.end(), rec.model) == model_order.end()) {
      model_order.push_back(rec.model);
    }
    if (std::find(task_order.begin(), task_order.end(), rec.task) == task_order.end()) {
      task_order.push_back(rec.task);
    }
  }

  CiReport report;
  for (const std::string& model : model_order) {
    std::vector<double> task_scores;
    for (const std::string& task : task_order) {
      std::vector<MetricRecord> group;
      for (const MetricRecord& rec : records) {
        if (rec.model == model && rec.task == task) group.push_back(rec);
      }
      if (group.empty()) continue;  // model did not run this task
      const double score = task_ci(group, stats);
      report.tasks.push_back({model, task, score});
      task_scores.push_back(score);
    }
    report.overall.push_back({model, overall_ci(task_scores)});
  }
  return report;
}

inline std::string task_scores_csv(const CiReport& report) {
  std::ostringstream out;
  out << "model,task,task_ci\n";
  for (const TaskScore& t : report.tasks) {
    out << t.model << ',' << t.task << ',' << format_double(t.score) << '\n';
  }
  return out.str();
}

inline std::string overall_scores_csv(const CiReport& report) {
  std::ostringstream out;
  out << "model,overall_ci\n";
  for (const ModelScore& m : report.overall) {
    out << m.model << ',' << format_double(m.score) << '\n';
  }
  return out.str();
}

inline std::string stats_csv(const NormStats& stats) {
  std::ostringstream out;
  out << "task,metric,mu,sigma\n";
  for (const auto& [key, ms] : stats) {
    out << key.first << ',' << key.second << ',' << format_double(ms.mu) << ','
        << format_double(ms.sigma) << '\n';
  }
  return out.str();
}

}  // namespace attnkit
