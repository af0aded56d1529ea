#include "qrcd/report.hpp"

#include "qrcd/run.hpp"

#include <fmt/format.h>

#include <algorithm>

namespace qrcd {

using json = nlohmann::json;

namespace {

double r6(double x) {
  const double q = quantize_score(x);
  return q == 0.0 ? 0.0 : q;
}

json findings_json(const std::vector<Finding>& findings) {
  json arr = json::array();
  for (const auto& f : findings) {
    arr.push_back({{"locator", f.locator}, {"rule", f.rule}, {"message", f.message}});
  }
  return arr;
}

std::size_t id_width(const EvalReport& report, std::size_t floor) {
  std::size_t w = floor;
  for (const auto& q : report.per_question) w = std::max(w, q.pq_id.size());
  return w;
}

}  // namespace

json report_json(const ValidationReport& report) {
  return {{"schema_version", kReportSchemaVersion},
          {"kind", "validation"},
          {"ok", report.ok()},
          {"errors", findings_json(report.errors)},
          {"warnings", findings_json(report.warnings)}};
}

json report_json(const EvalReport& report, bool per_question) {
  json doc = {{"schema_version", kReportSchemaVersion},
              {"kind", "evaluation"},
              {"prr_mode", to_string(report.mode)},
              {"norm_config", report.norm_config},
              {"n_questions", report.n_questions},
              {"n_missing", report.n_missing},
              {"n_vacuous_f1", report.n_vacuous},
              {"unknown_pq_ids", report.unknown_pq_ids},
              {"macro",
               {{"pRR", r6(report.macro_prr)},
                {"EM", r6(report.macro_em)},
                {"F1@1", r6(report.macro_f1_at_1)}}}};
  if (per_question) {
    json rows = json::array();
    for (const auto& q : report.per_question) {
      rows.push_back({{"pq_id", q.pq_id},
                      {"pRR", r6(q.prr)},
                      {"EM", q.em},
                      {"F1@1", r6(q.f1_at_1)},
                      {"first_match_rank",
                       q.first_match_rank ? json(*q.first_match_rank) : json(nullptr)},
                      {"missing", q.missing}});
    }
    doc["per_question"] = std::move(rows);
  }
  return doc;
}

json report_json(const CompareReport& report) {
  json metrics = json::array();
  for (const auto& m : report.metrics) {
    metrics.push_back({{"metric", m.metric},
                       {"a", r6(m.a)},
                       {"b", r6(m.b)},
                       {"delta", r6(m.delta)},
                       {"ci_low", r6(m.ci_low)},
                       {"ci_high", r6(m.ci_high)},
                       {"frac_nonpositive", r6(m.frac_nonpositive)}});
  }
  return {{"schema_version", kReportSchemaVersion},
          {"kind", "comparison"},
          {"run_a", report.run_a},
          {"run_b", report.run_b},
          {"prr_mode", to_string(report.eval_a.mode)},
          {"norm_config", report.eval_a.norm_config},
          {"n_questions", report.n_questions},
          {"n_missing_a", report.eval_a.n_missing},
          {"n_missing_b", report.eval_b.n_missing},
          {"bootstrap",
           {{"n_boot", report.n_boot},
            {"seed", report.seed},
            {"confidence", report.confidence}}},
          {"metrics", std::move(metrics)}};
}

json stats_json(const std::vector<std::pair<std::string, SplitStats>>& rows) {
  json arr = json::array();
  for (const auto& [name, s] : rows) {
    arr.push_back({{"dataset", name}, {"qp_pairs", s.qp_pairs}, {"qpa_triplets", s.qpa_triplets}});
  }
  return {{"schema_version", kReportSchemaVersion}, {"kind", "stats"}, {"rows", std::move(arr)}};
}

std::string render_table(const ValidationReport& report) {
  std::string out;
  for (const auto& f : report.errors) {
    out += fmt::format("error   {}  [{}] {}\n", f.locator, f.rule, f.message);
  }
  for (const auto& f : report.warnings) {
    out += fmt::format("warning {}  [{}] {}\n", f.locator, f.rule, f.message);
  }
  out += fmt::format("{}: {} error(s), {} warning(s)\n", report.ok() ? "OK" : "FAILED",
                     report.errors.size(), report.warnings.size());
  return out;
}

std::string render_table(const EvalReport& report, bool per_question) {
  const std::size_t w = id_width(report, 8);
  std::string out = fmt::format("{:<{}}  {:>6}  {:>6}  {:>6}\n", "pq_id", w, "pRR", "EM", "F1@1");
  out += std::string(w + 24, '-') + "\n";
  if (per_question) {
    for (const auto& q : report.per_question) {
      out += fmt::format("{:<{}}  {:>6.3f}  {:>6d}  {:>6.3f}{}\n", q.pq_id, w, q.prr, q.em,
                         q.f1_at_1, q.missing ? "  (missing)" : "");
    }
    out += std::string(w + 24, '-') + "\n";
  }
  out += fmt::format("{:<{}}  {:>6.3f}  {:>6.3f}  {:>6.3f}\n", "macro", w, report.macro_prr,
                     report.macro_em, report.macro_f1_at_1);
  out += fmt::format("questions: {}  missing: {}  pRR mode: {}\n", report.n_questions,
                     report.n_missing, to_string(report.mode));
  if (!report.unknown_pq_ids.empty()) {
    out += fmt::format("warning: {} run entries have no gold record and were not scored\n",
                       report.unknown_pq_ids.size());
  }
  if (report.n_vacuous > 0) {
    out += fmt::format("note: {} question(s) scored F1 = 1 on empty token sequences\n",
                       report.n_vacuous);
  }
  return out;
}

std::string render_table(const CompareReport& report) {
  std::string out = fmt::format("A = {}\nB = {}\n", report.run_a, report.run_b);
  out += fmt::format("{:<6}  {:>7}  {:>7}  {:>8}  {:>20}\n", "metric", "A", "B", "A - B",
                     fmt::format("{:.0f}% CI", report.confidence * 100.0));
  out += std::string(56, '-') + "\n";
  for (const auto& m : report.metrics) {
    out += fmt::format("{:<6}  {:>7.3f}  {:>7.3f}  {:>+8.3f}  {:>20}\n", m.metric, m.a, m.b,
                       m.delta, fmt::format("[{:+.3f}, {:+.3f}]", m.ci_low, m.ci_high));
  }
  out += fmt::format("questions: {}  bootstrap resamples: {}  seed: {}\n", report.n_questions,
                     report.n_boot, report.seed);
  return out;
}

std::string render_stats_table(const std::vector<std::pair<std::string, SplitStats>>& rows) {
  std::size_t w = 7;
  for (const auto& [name, s] : rows) w = std::max(w, name.size());
  std::string out = fmt::format("{:<{}}  {:>9}  {:>14}\n", "Dataset", w, "Q-P Pairs",
                                "Q-P-A Triplets");
  out += std::string(w + 27, '-') + "\n";
  for (const auto& [name, s] : rows) {
    out += fmt::format("{:<{}}  {:>9}  {:>14}\n", name, w, s.qp_pairs, s.qpa_triplets);
  }
  return out;
}

std::string dump_document(const json& doc) { return doc.dump(2) + "\n"; }

}  // namespace qrcd
