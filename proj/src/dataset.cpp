#include "qrcd/dataset.hpp"

#include "qrcd/errors.hpp"
#include "qrcd/utf8.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <set>
#include <sstream>
#include <stdexcept>

namespace qrcd {

using json = nlohmann::json;

FieldMap::FieldMap(std::map<std::string, std::string> renames) {
  for (const auto& [canonical, on_disk] : renames) set(canonical, on_disk);
}

const std::vector<std::string>& FieldMap::canonical_fields() {
  static const std::vector<std::string> fields = {"pq_id",   "passage", "question",
                                                  "surah",   "verses",  "answers",
                                                  "text",    "start_char"};
  return fields;
}

void FieldMap::set(const std::string& canonical, const std::string& on_disk) {
  const auto& fields = canonical_fields();
  if (std::find(fields.begin(), fields.end(), canonical) == fields.end()) {
    throw std::invalid_argument("unknown canonical field '" + canonical + "'");
  }
  if (on_disk.empty()) throw std::invalid_argument("empty key for field '" + canonical + "'");
  renames_[canonical] = on_disk;
}

const std::string& FieldMap::key(const std::string& canonical) const {
  auto it = renames_.find(canonical);
  return it == renames_.end() ? canonical : it->second;
}

namespace {

bool is_blank(std::string_view line) {
  return std::all_of(line.begin(), line.end(), [](unsigned char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v';
  });
}

const json& require(const json& obj, const std::string& key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(line, "missing required field '" + key + "'");
  return *it;
}

std::string require_string(const json& obj, const std::string& key, std::size_t line) {
  const json& v = require(obj, key, line);
  if (!v.is_string()) throw ParseError(line, "field '" + key + "' must be a string");
  return v.get<std::string>();
}

long long require_integer(const json& v, const std::string& key, std::size_t line) {
  if (!v.is_number_integer()) throw ParseError(line, "field '" + key + "' must be an integer");
  return v.get<long long>();
}

QPRecord record_from_json(const json& obj, const FieldMap& f, std::size_t line) {
  if (!obj.is_object()) throw ParseError(line, "expected a JSON object");
  QPRecord rec;
  rec.pq_id = require_string(obj, f.key("pq_id"), line);
  rec.passage = require_string(obj, f.key("passage"), line);
  rec.question = require_string(obj, f.key("question"), line);

  if (auto it = obj.find(f.key("surah")); it != obj.end() && !it->is_null()) {
    rec.surah = static_cast<int>(require_integer(*it, f.key("surah"), line));
  }
  if (auto it = obj.find(f.key("verses")); it != obj.end() && !it->is_null()) {
    if (!it->is_string()) throw ParseError(line, "field '" + f.key("verses") + "' must be a string");
    rec.verses = it->get<std::string>();
  }

  const json& answers = require(obj, f.key("answers"), line);
  if (!answers.is_array()) throw ParseError(line, "field '" + f.key("answers") + "' must be an array");
  for (const json& a : answers) {
    if (!a.is_object()) throw ParseError(line, "each answer must be a JSON object");
    GoldAnswer g;
    g.text = require_string(a, f.key("text"), line);
    g.start_char = require_integer(require(a, f.key("start_char"), line), f.key("start_char"), line);
    rec.answers.push_back(std::move(g));
  }
  return rec;
}

}  // namespace

std::vector<QPRecord> parse_dataset(std::istream& source, const FieldMap& fields,
                                    std::vector<Finding>* warnings) {
  std::vector<QPRecord> records;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(source, line)) {
    ++line_no;
    if (line_no == 1 && line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
    if (is_blank(line)) {
      if (warnings != nullptr) {
        warnings->push_back({"line " + std::to_string(line_no), std::string(rules::kBlankLine),
                             "blank line skipped"});
      }
      continue;
    }
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(line_no, std::string("malformed JSON: ") + e.what());
    }
    QPRecord rec = record_from_json(obj, fields, line_no);
    if (!seen.insert(rec.pq_id).second) {
      throw ParseError(line_no, "duplicate pq_id '" + rec.pq_id + "'");
    }
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<QPRecord> parse_dataset(std::string_view text, const FieldMap& fields,
                                    std::vector<Finding>* warnings) {
  std::istringstream in{std::string(text)};
  return parse_dataset(in, fields, warnings);
}

ValidationReport validate_dataset(const std::vector<QPRecord>& records, bool strict) {
  ValidationReport report;
  auto error = [&](std::string loc, std::string_view rule, std::string msg) {
    report.errors.push_back({std::move(loc), std::string(rule), std::move(msg)});
  };
  auto warn = [&](std::string loc, std::string_view rule, std::string msg) {
    report.warnings.push_back({std::move(loc), std::string(rule), std::move(msg)});
  };
  auto offset_finding = [&](std::string loc, std::string_view rule, std::string msg) {
    if (strict) {
      error(std::move(loc), rule, std::move(msg));
    } else {
      warn(std::move(loc), rule, std::move(msg));
    }
  };

  std::set<std::string> seen;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const QPRecord& rec = records[i];
    const std::string loc =
        rec.pq_id.empty() ? "record " + std::to_string(i) : "pq_id " + rec.pq_id;

    if (rec.pq_id.empty()) error(loc, rules::kEmptyPqId, "pq_id is empty");
    if (!rec.pq_id.empty() && !seen.insert(rec.pq_id).second) {
      error(loc, rules::kDuplicatePqId, "pq_id appears more than once");
    }
    if (rec.question.empty()) warn(loc, rules::kEmptyQuestion, "question is empty");
    if (rec.passage.empty()) warn(loc, rules::kEmptyPassage, "passage is empty");
    if (rec.surah && (*rec.surah < 1 || *rec.surah > 114)) {
      error(loc, rules::kSurahRange, "surah " + std::to_string(*rec.surah) + " outside [1, 114]");
    }
    if (rec.answers.empty()) error(loc, rules::kEmptyAnswers, "no gold answers");

    const auto passage = utf8::decode(rec.passage);
    if (!passage) {
      error(loc, rules::kInvalidUtf8, "passage is not valid UTF-8");
      continue;
    }
    for (std::size_t k = 0; k < rec.answers.size(); ++k) {
      const GoldAnswer& ans = rec.answers[k];
      const std::string aloc = loc + "/answers[" + std::to_string(k) + "]";
      const auto text = utf8::decode(ans.text);
      if (!text) {
        error(aloc, rules::kInvalidUtf8, "answer text is not valid UTF-8");
        continue;
      }
      if (text->empty()) warn(aloc, rules::kEmptyAnswerText, "answer text is empty");
      const long long start = ans.start_char;
      const auto len = static_cast<long long>(text->size());
      const auto plen = static_cast<long long>(passage->size());
      if (start < 0 || start + len > plen) {
        offset_finding(aloc, rules::kSpanBounds,
                       "span [" + std::to_string(start) + ", " + std::to_string(start + len) +
                           ") outside passage of length " + std::to_string(plen));
        continue;
      }
      if (passage->compare(static_cast<std::size_t>(start), text->size(), *text) != 0) {
        offset_finding(aloc, rules::kSpanMismatch,
                       "passage text at start_char " + std::to_string(start) +
                           " does not equal the answer text");
      }
    }
  }
  return report;
}

SplitStats dataset_stats(const std::vector<QPRecord>& records) {
  SplitStats s;
  s.qp_pairs = records.size();
  for (const auto& r : records) s.qpa_triplets += r.answers.size();
  return s;
}

}  // namespace qrcd
