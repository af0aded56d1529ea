#pragma once

#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace qrcd {

struct GoldAnswer {
  std::string text;
  // Offset into the raw passage, counted in Unicode scalar values.
  long long start_char = 0;

  friend bool operator==(const GoldAnswer&, const GoldAnswer&) = default;
};

// One question-passage pair with its gold answer spans (one dataset line).
struct QPRecord {
  std::string pq_id;
  std::string passage;
  std::string question;
  std::optional<int> surah;
  std::optional<std::string> verses;
  std::vector<GoldAnswer> answers;

  friend bool operator==(const QPRecord&, const QPRecord&) = default;
};

// Maps canonical field names (pq_id, passage, question, surah, verses,
// answers, text, start_char) to the keys used on disk. Unmapped fields keep
// their canonical name.
class FieldMap {
 public:
  FieldMap() = default;
  explicit FieldMap(std::map<std::string, std::string> renames);

  // Throws std::invalid_argument for a canonical name that does not exist.
  void set(const std::string& canonical, const std::string& on_disk);
  const std::string& key(const std::string& canonical) const;

  static const std::vector<std::string>& canonical_fields();

 private:
  std::map<std::string, std::string> renames_;
};

struct Finding {
  std::string locator;  // "line 3", "pq_id 2:1-5_101/answers[0]", ...
  std::string rule;
  std::string message;

  friend bool operator==(const Finding&, const Finding&) = default;
};

struct ValidationReport {
  std::vector<Finding> errors;
  std::vector<Finding> warnings;

  bool ok() const { return errors.empty(); }
  friend bool operator==(const ValidationReport&, const ValidationReport&) = default;
};

struct SplitStats {
  std::size_t qp_pairs = 0;
  std::size_t qpa_triplets = 0;

  SplitStats& operator+=(const SplitStats& other) {
    qp_pairs += other.qp_pairs;
    qpa_triplets += other.qpa_triplets;
    return *this;
  }
  friend SplitStats operator+(SplitStats a, const SplitStats& b) { return a += b; }
  friend bool operator==(const SplitStats&, const SplitStats&) = default;
};

// Rule ids reported by validate_dataset and the parsers.
namespace rules {
inline constexpr std::string_view kBlankLine = "blank-line";
inline constexpr std::string_view kDuplicatePqId = "duplicate-pq-id";
inline constexpr std::string_view kEmptyPqId = "empty-pq-id";
inline constexpr std::string_view kEmptyQuestion = "empty-question";
inline constexpr std::string_view kEmptyPassage = "empty-passage";
inline constexpr std::string_view kEmptyAnswers = "empty-answers";
inline constexpr std::string_view kEmptyAnswerText = "empty-answer-text";
inline constexpr std::string_view kSurahRange = "surah-range";
inline constexpr std::string_view kSpanBounds = "span-out-of-bounds";
inline constexpr std::string_view kSpanMismatch = "span-text-mismatch";
inline constexpr std::string_view kInvalidUtf8 = "invalid-utf8";
}  // namespace rules

// Reads JSON Lines, one record per non-blank line, in file order.
// Blank lines are skipped and reported through `warnings` when given.
// Throws ParseError on malformed JSON, a missing or mistyped required field,
// or a duplicate pq_id.
std::vector<QPRecord> parse_dataset(std::istream& source, const FieldMap& fields = {},
                                    std::vector<Finding>* warnings = nullptr);
std::vector<QPRecord> parse_dataset(std::string_view text, const FieldMap& fields = {},
                                    std::vector<Finding>* warnings = nullptr);

// Checks every record and gold-span invariant. Offset findings (bounds and
// substring equality on the raw passage) are errors when strict, otherwise
// warnings. Pure and deterministic.
ValidationReport validate_dataset(const std::vector<QPRecord>& records, bool strict);

SplitStats dataset_stats(const std::vector<QPRecord>& records);

}  // namespace qrcd
