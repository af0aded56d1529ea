#include "qrcd/metrics.hpp"

#include "parallel.hpp"
#include "qrcd/errors.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

namespace qrcd {
namespace {

using Tokens = std::vector<std::string>;

double f1_tokens(const Tokens& pred, const Tokens& gold) {
  if (pred.empty() && gold.empty()) return 1.0;
  if (pred.empty() || gold.empty()) return 0.0;
  std::map<std::string_view, int> gold_counts;
  for (const auto& t : gold) ++gold_counts[t];
  int overlap = 0;
  for (const auto& t : pred) {
    auto it = gold_counts.find(t);
    if (it != gold_counts.end() && it->second > 0) {
      --it->second;
      ++overlap;
    }
  }
  if (overlap == 0) return 0.0;
  const double precision = static_cast<double>(overlap) / static_cast<double>(pred.size());
  const double recall = static_cast<double>(overlap) / static_cast<double>(gold.size());
  return 2.0 * precision * recall / (precision + recall);
}

struct GoldView {
  std::vector<std::string> normalized;
  std::vector<Tokens> tokens;
};

GoldView prepare_golds(std::span<const std::string> golds, const NormConfig& cfg) {
  GoldView v;
  v.normalized.reserve(golds.size());
  v.tokens.reserve(golds.size());
  for (const auto& g : golds) {
    v.normalized.push_back(normalize(g, cfg));
    v.tokens.push_back(tokenize(v.normalized.back(), cfg));
  }
  return v;
}

double best_partial_tokens(const Tokens& pred, const GoldView& golds) {
  double best = 0.0;
  for (const auto& g : golds.tokens) best = std::max(best, f1_tokens(pred, g));
  return best;
}

}  // namespace

std::string to_string(PrrMode mode) {
  return mode == PrrMode::kBestRatio ? "best_ratio" : "first_match";
}

PrrMode prr_mode_from_string(std::string_view name) {
  if (name == "first_match") return PrrMode::kFirstMatch;
  if (name == "best_ratio") return PrrMode::kBestRatio;
  throw std::invalid_argument("unknown pRR mode '" + std::string(name) +
                              "' (expected first_match or best_ratio)");
}

double token_f1(std::string_view pred, std::string_view gold, const NormConfig& cfg) {
  return f1_tokens(tokenize(pred, cfg), tokenize(gold, cfg));
}

int exact_match(std::string_view pred, std::span<const std::string> golds, const NormConfig& cfg) {
  const std::string p = normalize(pred, cfg);
  for (const auto& g : golds) {
    if (normalize(g, cfg) == p) return 1;
  }
  return 0;
}

double best_partial(std::string_view pred, std::span<const std::string> golds,
                    const NormConfig& cfg) {
  return best_partial_tokens(tokenize(pred, cfg), prepare_golds(golds, cfg));
}

PrrResult prr_from_partials(std::span<const double> partials, PrrMode mode) {
  PrrResult best;
  for (std::size_t i = 0; i < partials.size(); ++i) {
    const double m = partials[i];
    if (m <= 0.0) continue;
    const double ratio = m / static_cast<double>(i + 1);
    if (mode == PrrMode::kFirstMatch) return {ratio, static_cast<int>(i + 1)};
    if (ratio > best.value) best = {ratio, static_cast<int>(i + 1)};
  }
  return best;
}

PrrResult prr(const AnswerList& preds, std::span<const std::string> golds, const NormConfig& cfg,
              PrrMode mode) {
  const GoldView gv = prepare_golds(golds, cfg);
  std::vector<double> partials;
  partials.reserve(preds.size());
  for (const auto& p : preds) partials.push_back(best_partial_tokens(tokenize(p.text, cfg), gv));
  return prr_from_partials(partials, mode);
}

QuestionScore score_question(const std::string& pq_id, const AnswerList& preds,
                             std::span<const std::string> golds, const NormConfig& cfg,
                             PrrMode mode) {
  QuestionScore qs;
  qs.pq_id = pq_id;
  if (preds.empty()) {
    qs.missing = true;
    return qs;
  }
  const GoldView gv = prepare_golds(golds, cfg);
  std::vector<double> partials;
  partials.reserve(preds.size());
  Tokens top_tokens;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    Tokens t = tokenize(preds[i].text, cfg);
    partials.push_back(best_partial_tokens(t, gv));
    if (i == 0) top_tokens = std::move(t);
  }
  const PrrResult r = prr_from_partials(partials, mode);
  qs.prr = r.value;
  qs.first_match_rank = r.rank;
  qs.f1_at_1 = partials.front();

  const std::string top = normalize(preds.front().text, cfg);
  qs.em = std::find(gv.normalized.begin(), gv.normalized.end(), top) != gv.normalized.end();
  qs.vacuous_match =
      top_tokens.empty() && std::any_of(gv.tokens.begin(), gv.tokens.end(),
                                        [](const Tokens& g) { return g.empty(); });
  return qs;
}

std::vector<std::string> gold_texts(const QPRecord& record) {
  std::vector<std::string> out;
  out.reserve(record.answers.size());
  for (const auto& a : record.answers) out.push_back(a.text);
  return out;
}

EvalReport evaluate_run(const Run& run, const std::vector<QPRecord>& gold,
                        const EvalOptions& opts) {
  EvalReport report;
  report.norm_config = opts.norm;
  report.mode = opts.mode;
  report.n_questions = gold.size();

  std::set<std::string_view> gold_ids;
  for (const auto& rec : gold) gold_ids.insert(rec.pq_id);
  for (const auto& [pq_id, answers] : run.entries) {
    if (!gold_ids.contains(pq_id)) report.unknown_pq_ids.push_back(pq_id);
  }
  if (opts.strict && !report.unknown_pq_ids.empty()) {
    throw ContractError("run '" + run.run_id + "' has " +
                        std::to_string(report.unknown_pq_ids.size()) +
                        " pq_id(s) absent from the gold data, first '" +
                        report.unknown_pq_ids.front() + "'");
  }

  static const AnswerList kNoAnswers;
  report.per_question.resize(gold.size());
  detail::parallel_for(gold.size(), opts.threads, [&](std::size_t i) {
    const QPRecord& rec = gold[i];
    auto it = run.entries.find(rec.pq_id);
    const AnswerList& preds = it == run.entries.end() ? kNoAnswers : it->second;
    report.per_question[i] = score_question(rec.pq_id, preds, gold_texts(rec), opts.norm, opts.mode);
  });

  double sum_prr = 0.0;
  double sum_em = 0.0;
  double sum_f1 = 0.0;
  for (const auto& qs : report.per_question) {
    sum_prr += qs.prr;
    sum_em += qs.em;
    sum_f1 += qs.f1_at_1;
    report.n_missing += qs.missing ? 1 : 0;
    report.n_vacuous += qs.vacuous_match ? 1 : 0;
  }
  if (!gold.empty()) {
    const auto n = static_cast<double>(gold.size());
    report.macro_prr = sum_prr / n;
    report.macro_em = sum_em / n;
    report.macro_f1_at_1 = sum_f1 / n;
  }
  return report;
}

}  // namespace qrcd
