#pragma once

#include "qrcd/dataset.hpp"
#include "qrcd/run.hpp"
#include "qrcd/text_norm.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qrcd {

// How the partial reciprocal rank picks its answer.
//   kFirstMatch: m_r / r for the first rank r whose partial score m_r > 0.
//   kBestRatio:  max over ranks of m_i / i, smallest rank on ties.
enum class PrrMode { kFirstMatch, kBestRatio };

std::string to_string(PrrMode mode);
PrrMode prr_mode_from_string(std::string_view name);

struct PrrResult {
  double value = 0.0;
  std::optional<int> rank;

  friend bool operator==(const PrrResult&, const PrrResult&) = default;
};

struct QuestionScore {
  std::string pq_id;
  double prr = 0.0;
  int em = 0;
  double f1_at_1 = 0.0;
  std::optional<int> first_match_rank;
  bool missing = false;         // no entry, or an empty answer list
  bool vacuous_match = false;   // rank-1 answer and a gold both tokenize to nothing

  friend bool operator==(const QuestionScore&, const QuestionScore&) = default;
};

struct EvalReport {
  std::vector<QuestionScore> per_question;  // gold order
  double macro_prr = 0.0;
  double macro_em = 0.0;
  double macro_f1_at_1 = 0.0;
  NormConfig norm_config;
  PrrMode mode = PrrMode::kFirstMatch;
  std::size_t n_questions = 0;
  std::size_t n_missing = 0;
  std::size_t n_vacuous = 0;
  std::vector<std::string> unknown_pq_ids;  // in the run but not in gold; not scored

  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

struct EvalOptions {
  NormConfig norm;
  PrrMode mode = PrrMode::kFirstMatch;
  // Unknown pq_ids in the run raise ContractError instead of being listed.
  bool strict = false;
  // Worker threads for per-question scoring; results do not depend on it.
  unsigned threads = 1;
};

// Multiset token overlap F1. Both sides empty -> 1, exactly one empty -> 0.
double token_f1(std::string_view pred, std::string_view gold, const NormConfig& cfg);

// 1 iff normalize(pred) equals normalize(g) for some gold g.
int exact_match(std::string_view pred, std::span<const std::string> golds, const NormConfig& cfg);

// Max over golds of token_f1.
double best_partial(std::string_view pred, std::span<const std::string> golds,
                    const NormConfig& cfg);

// pRR from per-rank partial scores, partials[i] belonging to rank i + 1.
PrrResult prr_from_partials(std::span<const double> partials, PrrMode mode);

PrrResult prr(const AnswerList& preds, std::span<const std::string> golds, const NormConfig& cfg,
              PrrMode mode = PrrMode::kFirstMatch);

// Scores one question. An empty preds list scores 0 everywhere and is marked missing.
QuestionScore score_question(const std::string& pq_id, const AnswerList& preds,
                             std::span<const std::string> golds, const NormConfig& cfg,
                             PrrMode mode);

// Macro averages run over every gold question; missing ones score 0.
EvalReport evaluate_run(const Run& run, const std::vector<QPRecord>& gold,
                        const EvalOptions& opts = {});

std::vector<std::string> gold_texts(const QPRecord& record);

}  // namespace qrcd
