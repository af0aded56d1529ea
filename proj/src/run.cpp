#include "qrcd/run.hpp"

#include "qrcd/errors.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace qrcd {

using json = nlohmann::json;

std::optional<std::string> answer_list_violation(const AnswerList& answers, std::size_t k_max) {
  if (answers.size() > k_max) {
    return fmt::format("{} answers exceed k_max = {}", answers.size(), k_max);
  }
  for (std::size_t i = 0; i < answers.size(); ++i) {
    const RankedAnswer& a = answers[i];
    if (a.rank != static_cast<int>(i) + 1) {
      return fmt::format("ranks must be dense and 1-based: position {} has rank {}", i + 1,
                         a.rank);
    }
    if (!std::isfinite(a.score) || a.score < 0.0 || a.score > 1.0) {
      return fmt::format("score {} at rank {} outside [0, 1]", a.score, a.rank);
    }
    if (i > 0 && a.score > answers[i - 1].score) {
      return fmt::format("score at rank {} exceeds score at rank {}", a.rank, a.rank - 1);
    }
  }
  return std::nullopt;
}

void check_run(const Run& run, std::size_t k_max) {
  for (const auto& [pq_id, answers] : run.entries) {
    if (auto v = answer_list_violation(answers, k_max)) {
      throw ContractError("run '" + run.run_id + "', pq_id '" + pq_id + "': " + *v);
    }
  }
}

double quantize_score(double score) { return std::round(score * 1e6) / 1e6; }

namespace {

bool is_blank(std::string_view line) {
  return std::all_of(line.begin(), line.end(), [](unsigned char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v';
  });
}

// text_key is "text" for JSONL runs and "answer" for the document format.
AnswerList answers_from_json(const json& arr, const std::string& text_key, std::size_t k_max,
                             std::size_t line, const std::string& pq_id) {
  if (!arr.is_array()) throw ParseError(line, "'answers' for '" + pq_id + "' must be an array");
  AnswerList answers;
  for (const json& a : arr) {
    if (!a.is_object()) throw ParseError(line, "each answer must be a JSON object");
    auto t = a.find(text_key);
    auto r = a.find("rank");
    auto s = a.find("score");
    if (t == a.end() || !t->is_string()) {
      throw ParseError(line, "answer needs a string '" + text_key + "'");
    }
    if (r == a.end() || !r->is_number_integer()) {
      throw ParseError(line, "answer needs an integer 'rank'");
    }
    if (s == a.end() || !s->is_number()) throw ParseError(line, "answer needs a numeric 'score'");
    const auto rank = r->get<long long>();
    if (rank < 1 || rank > 1'000'000) {
      throw ParseError(line, fmt::format("rank {} for '{}' is not a positive rank", rank, pq_id));
    }
    answers.push_back({t->get<std::string>(), static_cast<int>(rank), s->get<double>()});
  }
  std::stable_sort(answers.begin(), answers.end(),
                   [](const RankedAnswer& x, const RankedAnswer& y) { return x.rank < y.rank; });
  if (auto v = answer_list_violation(answers, k_max)) {
    throw ParseError(line, "pq_id '" + pq_id + "': " + *v);
  }
  return answers;
}

std::string format_score(double score) {
  const double q = quantize_score(score);
  return fmt::format("{:.6f}", q == 0.0 ? 0.0 : q);
}

std::string quoted(const std::string& s) {
  try {
    return json(s).dump(-1, ' ', false, json::error_handler_t::strict);
  } catch (const json::type_error&) {
    throw ContractError("run text is not valid UTF-8");
  }
}

std::string answers_to_text(const AnswerList& answers, const char* text_key) {
  std::string out = "[";
  for (std::size_t i = 0; i < answers.size(); ++i) {
    const RankedAnswer& a = answers[i];
    if (i > 0) out += ',';
    out += fmt::format("{{\"{}\":{},\"rank\":{},\"score\":{}}}", text_key, quoted(a.text),
                       a.rank, format_score(a.score));
  }
  out += ']';
  return out;
}

}  // namespace

Run parse_run(std::istream& source, const RunReadOptions& opts) {
  Run run;
  run.run_id = opts.run_id;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(source, line)) {
    ++line_no;
    if (line_no == 1 && line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
    if (is_blank(line)) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(line_no, std::string("malformed JSON: ") + e.what());
    }
    if (!obj.is_object()) throw ParseError(line_no, "expected a JSON object");
    auto id = obj.find("pq_id");
    if (id == obj.end() || !id->is_string()) {
      throw ParseError(line_no, "missing string field 'pq_id'");
    }
    auto answers = obj.find("answers");
    if (answers == obj.end()) throw ParseError(line_no, "missing field 'answers'");
    std::string pq_id = id->get<std::string>();
    AnswerList list = answers_from_json(*answers, "text", opts.k_max, line_no, pq_id);
    if (!run.entries.emplace(pq_id, std::move(list)).second) {
      throw ParseError(line_no, "duplicate pq_id '" + pq_id + "'");
    }
  }
  return run;
}

Run parse_run(std::string_view text, const RunReadOptions& opts) {
  std::istringstream in{std::string(text)};
  return parse_run(in, opts);
}

Run parse_run_document(std::string_view text, const RunReadOptions& opts) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(0, std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError(0, "run document must be a JSON object");
  // nlohmann::json objects cannot hold duplicate keys; the last one wins.
  Run run;
  run.run_id = opts.run_id;
  for (const auto& [pq_id, arr] : doc.items()) {
    run.entries.emplace(pq_id, answers_from_json(arr, "answer", opts.k_max, 0, pq_id));
  }
  return run;
}

Run read_run(std::string_view text, RunFormat format, const RunReadOptions& opts) {
  if (format == RunFormat::kAuto) {
    // A document parses as one object without a "pq_id" key; anything else
    // (including multi-line JSONL, which does not parse as a whole) is JSONL.
    auto doc = json::parse(text, nullptr, false);
    const bool document = !doc.is_discarded() && doc.is_object() && !doc.contains("pq_id");
    format = document ? RunFormat::kDocument : RunFormat::kJsonl;
  }
  return format == RunFormat::kDocument ? parse_run_document(text, opts) : parse_run(text, opts);
}

std::string write_run(const Run& run, std::size_t k_max) {
  check_run(run, k_max);
  std::string out;
  for (const auto& [pq_id, answers] : run.entries) {
    out += fmt::format("{{\"pq_id\":{},\"answers\":{}}}\n", quoted(pq_id),
                       answers_to_text(answers, "text"));
  }
  return out;
}

std::string write_run_document(const Run& run, std::size_t k_max) {
  check_run(run, k_max);
  std::string out = "{";
  bool first = true;
  for (const auto& [pq_id, answers] : run.entries) {
    out += first ? "\n" : ",\n";
    first = false;
    out += fmt::format("  {}: {}", quoted(pq_id), answers_to_text(answers, "answer"));
  }
  out += first ? "}\n" : "\n}\n";
  return out;
}

std::string write_run_as(const Run& run, RunFormat format, std::size_t k_max) {
  return format == RunFormat::kDocument ? write_run_document(run, k_max) : write_run(run, k_max);
}

RunFormat run_format_from_string(std::string_view name) {
  if (name == "jsonl") return RunFormat::kJsonl;
  if (name == "document") return RunFormat::kDocument;
  if (name == "auto") return RunFormat::kAuto;
  throw std::invalid_argument("unknown run format '" + std::string(name) +
                              "' (expected jsonl, document or auto)");
}

}  // namespace qrcd
