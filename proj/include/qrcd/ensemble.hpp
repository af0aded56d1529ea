#pragma once

#include "qrcd/run.hpp"
#include "qrcd/text_norm.hpp"

#include <nlohmann/json.hpp>

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace qrcd {

// How the scores an answer received in different runs are combined.
//   kMean             arithmetic mean over the runs containing the answer
//   kPairwiseRunning  s <- first; s <- (s + x) / 2 for each later run, in run order
//   kMax              maximum
//   kSum              sum divided by the number of input runs (keeps [0, 1];
//                     orders candidates exactly like the raw sum)
enum class Aggregation { kMean, kPairwiseRunning, kMax, kSum };

enum class MatchKind { kRawEquality, kNormalizedEquality };

// Ordering among candidates with equal (quantized) aggregate score.
//   kRankThenText  best input rank first, then normalized text, then raw text
//   kText          normalized text, then raw text
enum class TieBreak { kRankThenText, kText };

struct MatchPolicy {
  MatchKind kind = MatchKind::kNormalizedEquality;
  NormConfig norm;

  std::string key(std::string_view text) const;
};

struct FuseConfig {
  Aggregation aggregation = Aggregation::kMean;
  MatchPolicy match;
  TieBreak tie_break = TieBreak::kRankThenText;
  std::size_t k_max = kDefaultKMax;
  // Multiply the aggregate by (runs containing the answer) / (input runs).
  bool count_weighting = false;
  std::string output_run_id = "ensemble";
  unsigned threads = 1;
};

struct FusedCandidate {
  std::string text;
  double agg_score = 0.0;
  std::size_t support = 0;
  std::vector<std::pair<std::string, double>> source_scores;  // input run order

  friend bool operator==(const FusedCandidate&, const FusedCandidate&) = default;
};

struct FuseResult {
  Run run;
  // All candidates per question in output order, including those cut by k_max.
  std::map<std::string, std::vector<FusedCandidate>> candidates;
  std::size_t n_inputs = 0;
};

// Collapses answers that match under the policy to their first (highest
// scoring) occurrence and re-densifies ranks.
AnswerList dedupe_within(const AnswerList& answers, const MatchPolicy& policy);

// Running pairwise average in encounter order. Throws std::invalid_argument
// on an empty sequence.
double fuse_pairwise_running(std::span<const double> scores);

// Combines one answer's per-run scores; `n_inputs` is the number of runs fused.
double aggregate_scores(std::span<const double> scores, Aggregation aggregation,
                        std::size_t n_inputs);

// Fuses ranked runs question by question. The output covers the union of
// the input question sets and its scores are quantized to six decimals.
// Throws ContractError on an empty input or an input list longer than k_max.
FuseResult fuse_detailed(std::span<const Run> runs, const FuseConfig& cfg);
Run fuse(std::span<const Run> runs, const FuseConfig& cfg);

std::string to_string(Aggregation aggregation);
std::string to_string(MatchKind kind);
std::string to_string(TieBreak tie_break);
Aggregation aggregation_from_string(std::string_view name);
MatchKind match_kind_from_string(std::string_view name);
TieBreak tie_break_from_string(std::string_view name);

void to_json(nlohmann::json& j, const FuseConfig& cfg);
void from_json(const nlohmann::json& j, FuseConfig& cfg);

// Sidecar document listing support and per-run scores of every fused candidate.
nlohmann::json provenance_json(const FuseResult& result, const FuseConfig& cfg);

}  // namespace qrcd
