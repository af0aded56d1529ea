#include "qrcd/ensemble.hpp"

#include "parallel.hpp"
#include "qrcd/errors.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <stdexcept>
#include <unordered_map>

namespace qrcd {

std::string MatchPolicy::key(std::string_view text) const {
  return kind == MatchKind::kRawEquality ? std::string(text) : normalize(text, norm);
}

AnswerList dedupe_within(const AnswerList& answers, const MatchPolicy& policy) {
  AnswerList out;
  std::set<std::string> seen;
  for (const auto& a : answers) {
    if (!seen.insert(policy.key(a.text)).second) continue;
    out.push_back(a);
    out.back().rank = static_cast<int>(out.size());
  }
  return out;
}

double fuse_pairwise_running(std::span<const double> scores) {
  if (scores.empty()) throw std::invalid_argument("pairwise running average of nothing");
  double s = scores.front();
  for (std::size_t i = 1; i < scores.size(); ++i) s = (s + scores[i]) / 2.0;
  return s;
}

double aggregate_scores(std::span<const double> scores, Aggregation aggregation,
                        std::size_t n_inputs) {
  if (scores.empty()) throw std::invalid_argument("aggregate of no scores");
  if (aggregation == Aggregation::kPairwiseRunning) return fuse_pairwise_running(scores);
  // Summing in sorted order makes the result independent of run order.
  std::vector<double> sorted(scores.begin(), scores.end());
  std::sort(sorted.begin(), sorted.end());
  if (aggregation == Aggregation::kMax) return sorted.back();
  double sum = 0.0;
  for (double x : sorted) sum += x;
  const double denom =
      aggregation == Aggregation::kMean ? static_cast<double>(sorted.size())
                                        : static_cast<double>(std::max<std::size_t>(1, n_inputs));
  return sum / denom;
}

namespace {

struct Member {
  std::size_t run_index;
  int rank;
  double score;
  const std::string* text;
};

struct Group {
  std::vector<Member> members;  // input run order
};

struct Ranked {
  FusedCandidate candidate;
  int best_rank;
  std::string tie_text;
};

std::vector<FusedCandidate> fuse_question(std::span<const Run> runs,
                                          const std::vector<AnswerList>& deduped,
                                          const FuseConfig& cfg) {
  std::vector<std::string> order;  // first-seen keys; final order comes from sorting
  std::unordered_map<std::string, Group> groups;
  for (std::size_t r = 0; r < deduped.size(); ++r) {
    for (const auto& a : deduped[r]) {
      std::string key = cfg.match.key(a.text);
      auto [it, inserted] = groups.try_emplace(key);
      if (inserted) order.push_back(key);
      it->second.members.push_back({r, a.rank, a.score, &a.text});
    }
  }

  std::vector<Ranked> ranked;
  ranked.reserve(order.size());
  for (const auto& key : order) {
    const Group& g = groups.at(key);
    std::vector<double> scores;
    scores.reserve(g.members.size());
    const Member* rep = &g.members.front();
    int best_rank = std::numeric_limits<int>::max();
    for (const auto& m : g.members) {
      scores.push_back(m.score);
      best_rank = std::min(best_rank, m.rank);
      if (m.score > rep->score || (m.score == rep->score && *m.text < *rep->text)) rep = &m;
    }
    double agg = aggregate_scores(scores, cfg.aggregation, runs.size());
    if (cfg.count_weighting) {
      agg *= static_cast<double>(g.members.size()) / static_cast<double>(runs.size());
    }
    Ranked item;
    item.candidate.text = *rep->text;
    item.candidate.agg_score = quantize_score(agg);
    item.candidate.support = g.members.size();
    for (const auto& m : g.members) {
      item.candidate.source_scores.emplace_back(runs[m.run_index].run_id, m.score);
    }
    item.best_rank = best_rank;
    item.tie_text = normalize(item.candidate.text, cfg.match.norm);
    ranked.push_back(std::move(item));
  }

  const bool by_rank = cfg.tie_break == TieBreak::kRankThenText;
  std::sort(ranked.begin(), ranked.end(), [by_rank](const Ranked& x, const Ranked& y) {
    if (x.candidate.agg_score != y.candidate.agg_score) {
      return x.candidate.agg_score > y.candidate.agg_score;
    }
    if (by_rank && x.best_rank != y.best_rank) return x.best_rank < y.best_rank;
    if (x.tie_text != y.tie_text) return x.tie_text < y.tie_text;
    return x.candidate.text < y.candidate.text;
  });

  std::vector<FusedCandidate> out;
  out.reserve(ranked.size());
  for (auto& r : ranked) out.push_back(std::move(r.candidate));
  return out;
}

}  // namespace

FuseResult fuse_detailed(std::span<const Run> runs, const FuseConfig& cfg) {
  if (runs.empty()) throw ContractError("fuse needs at least one run");
  if (cfg.k_max < 1) throw ContractError("k_max must be at least 1");
  for (const auto& run : runs) check_run(run, cfg.k_max);

  std::set<std::string> ids;
  for (const auto& run : runs) {
    for (const auto& [pq_id, answers] : run.entries) ids.insert(pq_id);
  }
  const std::vector<std::string> questions(ids.begin(), ids.end());

  std::vector<std::vector<FusedCandidate>> slots(questions.size());
  detail::parallel_for(questions.size(), cfg.threads, [&](std::size_t q) {
    const std::string& pq_id = questions[q];
    std::vector<AnswerList> deduped(runs.size());
    for (std::size_t r = 0; r < runs.size(); ++r) {
      auto it = runs[r].entries.find(pq_id);
      if (it != runs[r].entries.end()) deduped[r] = dedupe_within(it->second, cfg.match);
    }
    slots[q] = fuse_question(runs, deduped, cfg);
  });

  FuseResult result;
  result.n_inputs = runs.size();
  result.run.run_id = cfg.output_run_id;
  for (std::size_t q = 0; q < questions.size(); ++q) {
    AnswerList& list = result.run.entries[questions[q]];
    const auto& cands = slots[q];
    for (std::size_t i = 0; i < cands.size() && i < cfg.k_max; ++i) {
      list.push_back({cands[i].text, static_cast<int>(i + 1), cands[i].agg_score});
    }
    result.candidates.emplace(questions[q], std::move(slots[q]));
  }
  return result;
}

Run fuse(std::span<const Run> runs, const FuseConfig& cfg) {
  return std::move(fuse_detailed(runs, cfg).run);
}

std::string to_string(Aggregation aggregation) {
  switch (aggregation) {
    case Aggregation::kMean:
      return "mean";
    case Aggregation::kPairwiseRunning:
      return "pairwise_running";
    case Aggregation::kMax:
      return "max";
    case Aggregation::kSum:
      return "sum";
  }
  return "mean";
}

std::string to_string(MatchKind kind) {
  return kind == MatchKind::kRawEquality ? "raw_equality" : "normalized_equality";
}

std::string to_string(TieBreak tie_break) {
  return tie_break == TieBreak::kText ? "text" : "rank_then_text";
}

Aggregation aggregation_from_string(std::string_view name) {
  if (name == "mean") return Aggregation::kMean;
  if (name == "pairwise_running") return Aggregation::kPairwiseRunning;
  if (name == "max") return Aggregation::kMax;
  if (name == "sum") return Aggregation::kSum;
  throw std::invalid_argument("unknown aggregation '" + std::string(name) +
                              "' (expected mean, pairwise_running, max or sum)");
}

MatchKind match_kind_from_string(std::string_view name) {
  if (name == "raw_equality" || name == "raw") return MatchKind::kRawEquality;
  if (name == "normalized_equality" || name == "normalized") return MatchKind::kNormalizedEquality;
  throw std::invalid_argument("unknown match policy '" + std::string(name) +
                              "' (expected raw_equality or normalized_equality)");
}

TieBreak tie_break_from_string(std::string_view name) {
  if (name == "rank_then_text") return TieBreak::kRankThenText;
  if (name == "text") return TieBreak::kText;
  throw std::invalid_argument("unknown tie break '" + std::string(name) +
                              "' (expected rank_then_text or text)");
}

void to_json(nlohmann::json& j, const FuseConfig& cfg) {
  j = nlohmann::json{{"aggregation", to_string(cfg.aggregation)},
                     {"match_policy", to_string(cfg.match.kind)},
                     {"norm", cfg.match.norm},
                     {"tie_break", to_string(cfg.tie_break)},
                     {"k_max", cfg.k_max},
                     {"count_weighting", cfg.count_weighting}};
}

void from_json(const nlohmann::json& j, FuseConfig& cfg) {
  if (!j.is_object()) throw std::invalid_argument("fuse config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == "aggregation") {
      cfg.aggregation = aggregation_from_string(value.get<std::string>());
    } else if (key == "match_policy") {
      cfg.match.kind = match_kind_from_string(value.get<std::string>());
    } else if (key == "norm") {
      from_json(value, cfg.match.norm);
    } else if (key == "tie_break") {
      cfg.tie_break = tie_break_from_string(value.get<std::string>());
    } else if (key == "k_max") {
      const auto k = value.get<long long>();
      if (k < 1) throw std::invalid_argument("k_max must be at least 1");
      cfg.k_max = static_cast<std::size_t>(k);
    } else if (key == "count_weighting") {
      cfg.count_weighting = value.get<bool>();
    } else if (key == "output_run_id") {
      cfg.output_run_id = value.get<std::string>();
    } else {
      throw std::invalid_argument("unknown fuse config key '" + key + "'");
    }
  }
}

nlohmann::json provenance_json(const FuseResult& result, const FuseConfig& cfg) {
  nlohmann::json questions = nlohmann::json::object();
  for (const auto& [pq_id, cands] : result.candidates) {
    nlohmann::json arr = nlohmann::json::array();
    for (std::size_t i = 0; i < cands.size(); ++i) {
      const auto& c = cands[i];
      nlohmann::json sources = nlohmann::json::array();
      for (const auto& [run_id, score] : c.source_scores) {
        sources.push_back({{"run_id", run_id}, {"score", score}});
      }
      arr.push_back({{"text", c.text},
                     {"agg_score", c.agg_score},
                     {"support", c.support},
                     {"kept", i < cfg.k_max},
                     {"sources", std::move(sources)}});
    }
    questions[pq_id] = std::move(arr);
  }
  return {{"schema_version", 1},
          {"n_inputs", result.n_inputs},
          {"config", cfg},
          {"questions", std::move(questions)}};
}

}  // namespace qrcd
