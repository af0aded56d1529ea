#pragma once

#include "qrcd/dataset.hpp"
#include "qrcd/metrics.hpp"
#include "qrcd/run.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace qrcd {

struct CompareOptions {
  EvalOptions eval;
  std::size_t n_boot = 1000;
  std::uint64_t seed = 0;
  double confidence = 0.95;
  // Refuse runs whose question sets differ (each other or the gold set).
  bool strict = false;
};

struct MetricDelta {
  std::string metric;  // "pRR", "EM", "F1@1"
  double a = 0.0;
  double b = 0.0;
  double delta = 0.0;  // a - b
  double ci_low = 0.0;
  double ci_high = 0.0;
  // Share of bootstrap resamples whose delta is <= 0.
  double frac_nonpositive = 0.0;

  friend bool operator==(const MetricDelta&, const MetricDelta&) = default;
};

struct CompareReport {
  std::string run_a;
  std::string run_b;
  std::size_t n_questions = 0;
  std::size_t n_boot = 0;
  std::uint64_t seed = 0;
  double confidence = 0.95;
  std::vector<MetricDelta> metrics;  // pRR, EM, F1@1
  EvalReport eval_a;
  EvalReport eval_b;

  friend bool operator==(const CompareReport&, const CompareReport&) = default;
};

// Deterministic for a given seed: resampled indices come from mt19937_64 with
// rejection sampling, so results do not depend on the standard library's
// distribution implementations.
std::vector<std::size_t> bootstrap_indices(std::size_t n, std::size_t n_boot, std::uint64_t seed);

// Percentile interval of the mean paired difference.
struct Interval {
  double low = 0.0;
  double high = 0.0;
  double frac_nonpositive = 0.0;
};
Interval paired_bootstrap(std::span<const double> a, std::span<const double> b,
                          std::size_t n_boot, std::uint64_t seed, double confidence);

CompareReport compare_runs(const Run& a, const Run& b, const std::vector<QPRecord>& gold,
                           const CompareOptions& opts = {});

}  // namespace qrcd
