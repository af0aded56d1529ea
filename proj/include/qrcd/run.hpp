#pragma once

#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace qrcd {

inline constexpr std::size_t kDefaultKMax = 5;

struct RankedAnswer {
  std::string text;
  int rank = 1;
  double score = 0.0;

  friend bool operator==(const RankedAnswer&, const RankedAnswer&) = default;
};

using AnswerList = std::vector<RankedAnswer>;

// A system's output: per question, a ranked and scored list of answer texts.
// Entries are keyed (and therefore iterated) by pq_id in byte order.
struct Run {
  std::string run_id = "run";
  std::map<std::string, AnswerList> entries;

  friend bool operator==(const Run&, const Run&) = default;
};

struct RunReadOptions {
  std::string run_id = "run";
  std::size_t k_max = kDefaultKMax;
};

enum class RunFormat {
  kJsonl,     // one {"pq_id", "answers": [{"text", "rank", "score"}]} per line
  kDocument,  // one object {pq_id: [{"answer", "rank", "score"}]}
  kAuto,      // reading only: pick from the file contents
};

// Describes the first broken invariant of an answer list (ranks 1..m with no
// gaps, scores within [0, 1] and non-increasing in rank, m <= k_max), or
// nullopt when the list is valid. Expects the list ordered by position.
std::optional<std::string> answer_list_violation(const AnswerList& answers, std::size_t k_max);

// Throws ContractError naming the offending pq_id.
void check_run(const Run& run, std::size_t k_max = kDefaultKMax);

// Rounds to the 6 decimal places used on disk.
double quantize_score(double score);

// Throws ParseError (with a line number for JSONL) on malformed JSON,
// non-dense ranks, out-of-range scores, duplicate pq_id, or a list longer
// than k_max. Answers may appear in any order on disk; they are returned
// sorted by rank.
Run parse_run(std::istream& source, const RunReadOptions& opts = {});
Run parse_run(std::string_view text, const RunReadOptions& opts = {});
Run parse_run_document(std::string_view text, const RunReadOptions& opts = {});
Run read_run(std::string_view text, RunFormat format, const RunReadOptions& opts = {});

// Canonical bytes: entries sorted by pq_id, answers by rank, scores with six
// decimals, "\n" after every line. An empty run gives an empty string.
// Throws ContractError if the run is invalid.
std::string write_run(const Run& run, std::size_t k_max = kDefaultKMax);
std::string write_run_document(const Run& run, std::size_t k_max = kDefaultKMax);
std::string write_run_as(const Run& run, RunFormat format, std::size_t k_max = kDefaultKMax);

RunFormat run_format_from_string(std::string_view name);

}  // namespace qrcd
