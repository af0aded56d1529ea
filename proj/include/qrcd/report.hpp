#pragma once

#include "qrcd/compare.hpp"
#include "qrcd/dataset.hpp"
#include "qrcd/metrics.hpp"

#include <nlohmann/json.hpp>

#include <string>
#include <utility>
#include <vector>

namespace qrcd {

// Version of every machine-readable document emitted by the toolkit.
inline constexpr int kReportSchemaVersion = 1;

// Machine-readable reports. Reals are rounded to six decimals so that
// documents are byte-stable.
nlohmann::json report_json(const ValidationReport& report);
nlohmann::json report_json(const EvalReport& report, bool per_question = true);
nlohmann::json report_json(const CompareReport& report);
nlohmann::json stats_json(const std::vector<std::pair<std::string, SplitStats>>& rows);

// Human-readable tables; evaluation tables carry the columns pRR, EM, F1@1.
std::string render_table(const ValidationReport& report);
std::string render_table(const EvalReport& report, bool per_question = true);
std::string render_table(const CompareReport& report);
std::string render_stats_table(const std::vector<std::pair<std::string, SplitStats>>& rows);

// pretty-printed with two-space indentation and a trailing newline
std::string dump_document(const nlohmann::json& doc);

}  // namespace qrcd
