#include "qrcd/compare.hpp"

#include "qrcd/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <stdexcept>

namespace qrcd {
namespace {

std::uint64_t draw_below(std::mt19937_64& rng, std::uint64_t bound) {
  // Rejection keeps the draw unbiased.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

double percentile(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) return 0.0;
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

Interval interval_from_indices(std::span<const double> a, std::span<const double> b,
                               std::span<const std::size_t> indices, std::size_t n_boot,
                               double confidence) {
  const std::size_t n = a.size();
  Interval out;
  if (n == 0 || n_boot == 0) return out;
  std::vector<double> diffs(n);
  for (std::size_t i = 0; i < n; ++i) diffs[i] = a[i] - b[i];
  std::vector<double> means(n_boot);
  std::size_t nonpositive = 0;
  for (std::size_t r = 0; r < n_boot; ++r) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += diffs[indices[r * n + i]];
    means[r] = sum / static_cast<double>(n);
    if (means[r] <= 0.0) ++nonpositive;
  }
  std::sort(means.begin(), means.end());
  const double tail = (1.0 - confidence) / 2.0;
  out.low = percentile(means, tail);
  out.high = percentile(means, 1.0 - tail);
  out.frac_nonpositive = static_cast<double>(nonpositive) / static_cast<double>(n_boot);
  return out;
}

void check_confidence(double confidence) {
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw std::invalid_argument("confidence must lie in (0, 1)");
  }
}

}  // namespace

std::vector<std::size_t> bootstrap_indices(std::size_t n, std::size_t n_boot, std::uint64_t seed) {
  std::vector<std::size_t> out;
  if (n == 0) return out;
  out.reserve(n * n_boot);
  std::mt19937_64 rng(seed);
  for (std::size_t k = 0; k < n * n_boot; ++k) {
    out.push_back(static_cast<std::size_t>(draw_below(rng, n)));
  }
  return out;
}

Interval paired_bootstrap(std::span<const double> a, std::span<const double> b,
                          std::size_t n_boot, std::uint64_t seed, double confidence) {
  if (a.size() != b.size()) throw std::invalid_argument("paired samples differ in length");
  check_confidence(confidence);
  const auto indices = bootstrap_indices(a.size(), n_boot, seed);
  return interval_from_indices(a, b, indices, n_boot, confidence);
}

CompareReport compare_runs(const Run& a, const Run& b, const std::vector<QPRecord>& gold,
                           const CompareOptions& opts) {
  check_confidence(opts.confidence);
  if (opts.n_boot == 0) throw std::invalid_argument("n_boot must be positive");
  if (opts.strict) {
    std::set<std::string> gold_ids;
    for (const auto& r : gold) gold_ids.insert(r.pq_id);
    auto ids_of = [](const Run& run) {
      std::set<std::string> s;
      for (const auto& [id, answers] : run.entries) s.insert(id);
      return s;
    };
    if (ids_of(a) != gold_ids || ids_of(b) != gold_ids) {
      throw ContractError("question sets of '" + a.run_id + "', '" + b.run_id +
                          "' and the gold data differ");
    }
  }

  CompareReport report;
  report.run_a = a.run_id;
  report.run_b = b.run_id;
  report.n_questions = gold.size();
  report.n_boot = opts.n_boot;
  report.seed = opts.seed;
  report.confidence = opts.confidence;
  report.eval_a = evaluate_run(a, gold, opts.eval);
  report.eval_b = evaluate_run(b, gold, opts.eval);

  const auto indices = bootstrap_indices(gold.size(), opts.n_boot, opts.seed);
  auto column = [](const EvalReport& r, auto field) {
    std::vector<double> v;
    v.reserve(r.per_question.size());
    for (const auto& q : r.per_question) v.push_back(static_cast<double>(q.*field));
    return v;
  };
  auto add = [&](const char* name, auto field, double macro_a, double macro_b) {
    const auto va = column(report.eval_a, field);
    const auto vb = column(report.eval_b, field);
    const Interval ci = interval_from_indices(va, vb, indices, opts.n_boot, opts.confidence);
    report.metrics.push_back(
        {name, macro_a, macro_b, macro_a - macro_b, ci.low, ci.high, ci.frac_nonpositive});
  };
  add("pRR", &QuestionScore::prr, report.eval_a.macro_prr, report.eval_b.macro_prr);
  add("EM", &QuestionScore::em, report.eval_a.macro_em, report.eval_b.macro_em);
  add("F1@1", &QuestionScore::f1_at_1, report.eval_a.macro_f1_at_1, report.eval_b.macro_f1_at_1);
  return report;
}

}  // namespace qrcd
