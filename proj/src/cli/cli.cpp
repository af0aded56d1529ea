#include "qrcd/cli.hpp"

#include "qrcd/compare.hpp"
#include "qrcd/dataset.hpp"
#include "qrcd/ensemble.hpp"
#include "qrcd/errors.hpp"
#include "qrcd/metrics.hpp"
#include "qrcd/report.hpp"
#include "qrcd/run.hpp"
#include "qrcd/text_norm.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>

namespace qrcd::cli {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_output(const std::optional<std::string>& path, const std::string& content,
                  std::ostream& out) {
  if (!path || *path == "-") {
    out << content;
    return;
  }
  std::ofstream f(*path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write '" + *path + "'");
  f << content;
  if (!f) throw IoError("failed writing '" + *path + "'");
}

std::string stem_of(const std::string& path) { return fs::path(path).stem().string(); }

// Options of every subcommand. Values absent on the command line fall back
// to the config file, then to built-in defaults.
struct Options {
  std::optional<std::string> config_path;

  // norm
  std::optional<std::string> unicode_form;
  std::optional<bool> strip_diacritics;
  std::optional<bool> strip_tatweel;
  std::optional<bool> normalize_alef_ya;
  std::optional<bool> strip_punctuation;
  std::optional<bool> collapse_whitespace;
  std::optional<bool> lowercase_latin;

  // shared
  std::string dataset;
  std::vector<std::string> datasets;
  std::vector<std::string> field_map;
  std::optional<std::string> format;
  std::optional<std::string> output;
  std::optional<std::string> prr_mode;
  std::optional<std::size_t> k_max;
  std::optional<unsigned> threads;
  std::optional<std::string> run_format;
  bool strict = false;
  bool per_question = true;

  // eval
  std::string run_path;

  // ensemble
  std::vector<std::string> run_paths;
  std::optional<std::string> aggregation;
  std::optional<std::string> match_policy;
  std::optional<std::string> tie_break;
  bool count_weighting = false;
  std::optional<std::string> provenance;
  std::optional<std::string> output_format;
  std::optional<std::string> run_id;

  // compare
  std::string run_a;
  std::string run_b;
  std::optional<std::size_t> n_boot;
  std::optional<std::uint64_t> seed;
  std::optional<double> confidence;
};

// Everything the config file may set.
struct Settings {
  NormConfig norm;
  PrrMode prr_mode = PrrMode::kFirstMatch;
  bool strict = false;
  FuseConfig fuse;
  std::size_t k_max = kDefaultKMax;
  std::size_t n_boot = 1000;
  std::uint64_t seed = 0;
  double confidence = 0.95;
  FieldMap field_map;
  unsigned threads = 1;
  RunFormat run_format = RunFormat::kAuto;
  std::string format = "table";
};

void load_config(const std::string& path, Settings& s) {
  const std::string text = read_file(path);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw UsageError("config '" + path + "': " + e.what());
  }
  if (!doc.is_object()) throw UsageError("config '" + path + "' must be a JSON object");
  try {
    bool fuse_has_norm = false;
    bool fuse_has_k_max = false;
    for (const auto& [key, value] : doc.items()) {
      if (key == "norm") {
        from_json(value, s.norm);
      } else if (key == "prr_mode") {
        s.prr_mode = prr_mode_from_string(value.get<std::string>());
      } else if (key == "strict") {
        s.strict = value.get<bool>();
      } else if (key == "fuse") {
        from_json(value, s.fuse);
        fuse_has_norm = value.contains("norm");
        fuse_has_k_max = value.contains("k_max");
      } else if (key == "k_max") {
        const auto k = value.get<long long>();
        if (k < 1) throw UsageError("k_max must be at least 1");
        s.k_max = static_cast<std::size_t>(k);
      } else if (key == "n_boot") {
        s.n_boot = value.get<std::size_t>();
      } else if (key == "seed") {
        s.seed = value.get<std::uint64_t>();
      } else if (key == "confidence") {
        s.confidence = value.get<double>();
      } else if (key == "field_map") {
        for (const auto& [canonical, on_disk] : value.items()) {
          s.field_map.set(canonical, on_disk.get<std::string>());
        }
      } else if (key == "threads") {
        s.threads = value.get<unsigned>();
      } else if (key == "run_format") {
        s.run_format = run_format_from_string(value.get<std::string>());
      } else if (key == "format") {
        s.format = value.get<std::string>();
      } else {
        throw UsageError("config '" + path + "': unknown key '" + key + "'");
      }
    }
    if (!fuse_has_norm) s.fuse.match.norm = s.norm;
    if (!fuse_has_k_max) s.fuse.k_max = s.k_max;
  } catch (const json::exception& e) {
    throw UsageError("config '" + path + "': " + e.what());
  } catch (const std::invalid_argument& e) {
    throw UsageError("config '" + path + "': " + e.what());
  }
}

Settings resolve(const Options& o) {
  Settings s;
  if (o.config_path) load_config(*o.config_path, s);
  try {
    if (o.unicode_form) s.norm.unicode_form = unicode_form_from_string(*o.unicode_form);
    if (o.strip_diacritics) s.norm.strip_diacritics = *o.strip_diacritics;
    if (o.strip_tatweel) s.norm.strip_tatweel = *o.strip_tatweel;
    if (o.normalize_alef_ya) s.norm.normalize_alef_ya = *o.normalize_alef_ya;
    if (o.strip_punctuation) s.norm.strip_punctuation = *o.strip_punctuation;
    if (o.collapse_whitespace) s.norm.collapse_whitespace = *o.collapse_whitespace;
    if (o.lowercase_latin) s.norm.lowercase_latin = *o.lowercase_latin;
    const bool norm_flag = o.unicode_form || o.strip_diacritics || o.strip_tatweel ||
                           o.normalize_alef_ya || o.strip_punctuation || o.collapse_whitespace ||
                           o.lowercase_latin;
    if (norm_flag || !o.config_path) s.fuse.match.norm = s.norm;

    if (o.prr_mode) s.prr_mode = prr_mode_from_string(*o.prr_mode);
    if (o.strict) s.strict = true;
    if (o.k_max) {
      if (*o.k_max < 1) throw UsageError("--k-max must be at least 1");
      s.k_max = *o.k_max;
    }
    if (o.k_max) s.fuse.k_max = *o.k_max;
    if (o.aggregation) s.fuse.aggregation = aggregation_from_string(*o.aggregation);
    if (o.match_policy) s.fuse.match.kind = match_kind_from_string(*o.match_policy);
    if (o.tie_break) s.fuse.tie_break = tie_break_from_string(*o.tie_break);
    if (o.count_weighting) s.fuse.count_weighting = true;
    if (o.run_id) s.fuse.output_run_id = *o.run_id;
    if (o.n_boot) s.n_boot = *o.n_boot;
    if (o.seed) s.seed = *o.seed;
    if (o.confidence) s.confidence = *o.confidence;
    if (o.threads) s.threads = *o.threads;
    if (o.run_format) s.run_format = run_format_from_string(*o.run_format);
    if (o.format) s.format = *o.format;
    for (const auto& mapping : o.field_map) {
      const auto eq = mapping.find('=');
      if (eq == std::string::npos) {
        throw UsageError("--field-map expects canonical=on_disk, got '" + mapping + "'");
      }
      s.field_map.set(mapping.substr(0, eq), mapping.substr(eq + 1));
    }
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (s.format != "table" && s.format != "json") {
    throw UsageError("format must be table or json, got '" + s.format + "'");
  }
  s.fuse.threads = s.threads;
  return s;
}

std::vector<QPRecord> load_dataset(const std::string& path, const Settings& s,
                                   std::vector<Finding>* warnings = nullptr) {
  const std::string text = read_file(path);
  return parse_dataset(std::string_view(text), s.field_map, warnings);
}

Run load_run(const std::string& path, const Settings& s, std::size_t k_max) {
  const std::string text = read_file(path);
  return read_run(text, s.run_format, {stem_of(path), k_max});
}

void add_norm_options(CLI::App* sub, Options& o) {
  const char* group = "Normalization";
  sub->add_option("--unicode-form", o.unicode_form, "none | nfc | nfkc")->group(group);
  sub->add_option("--strip-diacritics", o.strip_diacritics, "remove Arabic diacritics")
      ->group(group);
  sub->add_option("--strip-tatweel", o.strip_tatweel, "remove tatweel")->group(group);
  sub->add_option("--normalize-alef-ya", o.normalize_alef_ya, "fold alef variants and alef maqsura")
      ->group(group);
  sub->add_option("--strip-punctuation", o.strip_punctuation, "remove punctuation")->group(group);
  sub->add_option("--collapse-whitespace", o.collapse_whitespace, "collapse whitespace runs")
      ->group(group);
  sub->add_option("--lowercase-latin", o.lowercase_latin, "lowercase Latin letters")->group(group);
}

void add_output_options(CLI::App* sub, Options& o) {
  sub->add_option("--format", o.format, "table | json");
  sub->add_option("-o,--output", o.output, "output file (default: stdout)");
}

int cmd_validate(const Options& o, std::ostream& out, std::ostream& err) {
  const Settings s = resolve(o);
  std::vector<Finding> warnings;
  const auto records = load_dataset(o.dataset, s, &warnings);
  ValidationReport report = validate_dataset(records, s.strict);
  report.warnings.insert(report.warnings.begin(), warnings.begin(), warnings.end());
  const std::string text =
      s.format == "json" ? dump_document(report_json(report)) : render_table(report);
  write_output(o.output, text, out);
  (void)err;
  return report.ok() ? kOk : kValidationFailed;
}

int cmd_stats(const Options& o, std::ostream& out) {
  const Settings s = resolve(o);
  std::vector<std::pair<std::string, SplitStats>> rows;
  SplitStats total;
  for (const auto& path : o.datasets) {
    const SplitStats st = dataset_stats(load_dataset(path, s));
    rows.emplace_back(stem_of(path), st);
    total += st;
  }
  if (rows.size() > 1) rows.emplace_back("All", total);
  const std::string text =
      s.format == "json" ? dump_document(stats_json(rows)) : render_stats_table(rows);
  write_output(o.output, text, out);
  return kOk;
}

int cmd_eval(const Options& o, std::ostream& out, std::ostream& err) {
  const Settings s = resolve(o);
  const auto gold = load_dataset(o.dataset, s);
  const Run run = load_run(o.run_path, s, s.k_max);
  const EvalReport report = evaluate_run(run, gold, {s.norm, s.prr_mode, s.strict, s.threads});
  if (!report.unknown_pq_ids.empty()) {
    err << fmt::format("warning: {} pq_id(s) in '{}' are not in '{}' and were ignored\n",
                       report.unknown_pq_ids.size(), o.run_path, o.dataset);
  }
  const std::string text = s.format == "json"
                               ? dump_document(report_json(report, o.per_question))
                               : render_table(report, o.per_question);
  write_output(o.output, text, out);
  return kOk;
}

int cmd_ensemble(const Options& o, std::ostream& out, std::ostream& err) {
  const Settings s = resolve(o);
  std::vector<Run> runs;
  runs.reserve(o.run_paths.size());
  // Inputs are read without a length cap; fuse() rejects lists longer than
  // the configured k_max.
  for (const auto& path : o.run_paths) {
    runs.push_back(load_run(path, s, std::numeric_limits<std::size_t>::max()));
  }
  const FuseResult result = fuse_detailed(runs, s.fuse);
  const RunFormat out_format =
      o.output_format ? run_format_from_string(*o.output_format) : RunFormat::kJsonl;
  if (out_format == RunFormat::kAuto) throw UsageError("--output-format must be jsonl or document");
  write_output(o.output, write_run_as(result.run, out_format, s.fuse.k_max), out);
  if (o.provenance) {
    write_output(o.provenance, dump_document(provenance_json(result, s.fuse)), out);
  }

  std::map<std::size_t, std::size_t> support_hist;
  std::size_t kept = 0;
  for (const auto& [pq_id, cands] : result.candidates) {
    for (std::size_t i = 0; i < cands.size() && i < s.fuse.k_max; ++i) {
      ++support_hist[cands[i].support];
      ++kept;
    }
  }
  std::ostream& summary = (!o.output || *o.output == "-") ? err : out;
  summary << fmt::format("fused {} run(s) over {} question(s); {} answer(s) kept ({})\n",
                         runs.size(), result.run.entries.size(), kept,
                         to_string(s.fuse.aggregation));
  for (const auto& [support, count] : support_hist) {
    summary << fmt::format("  support {}/{}: {}\n", support, runs.size(), count);
  }
  return kOk;
}

int cmd_compare(const Options& o, std::ostream& out) {
  const Settings s = resolve(o);
  const auto gold = load_dataset(o.dataset, s);
  const Run a = load_run(o.run_a, s, s.k_max);
  const Run b = load_run(o.run_b, s, s.k_max);
  CompareOptions opts;
  opts.eval = {s.norm, s.prr_mode, s.strict, s.threads};
  opts.n_boot = s.n_boot;
  opts.seed = s.seed;
  opts.confidence = s.confidence;
  opts.strict = s.strict;
  CompareReport report;
  try {
    report = compare_runs(a, b, gold, opts);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const std::string text =
      s.format == "json" ? dump_document(report_json(report)) : render_table(report);
  write_output(o.output, text, out);
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Validate, score, fuse and compare span-prediction QA runs."};
  app.name("qrcd");
  app.require_subcommand(1);
  app.fallthrough();

  Options o;
  app.add_option("--config", o.config_path, "JSON config file; command-line flags win");

  auto* validate = app.add_subcommand("validate", "check a dataset's records and gold spans");
  validate->add_option("dataset", o.dataset, "dataset (JSON Lines)")->required();
  validate->add_flag("--strict", o.strict, "treat span offset findings as errors");
  validate->add_option("--field-map", o.field_map, "canonical=on_disk key rename (repeatable)");
  add_output_options(validate, o);

  auto* stats = app.add_subcommand("stats", "count question-passage pairs and answer triplets");
  stats->add_option("datasets", o.datasets, "dataset files (JSON Lines)")->required();
  stats->add_option("--field-map", o.field_map, "canonical=on_disk key rename (repeatable)");
  add_output_options(stats, o);

  auto* eval = app.add_subcommand("eval", "score a run with pRR, EM and F1@1");
  eval->add_option("-r,--run", o.run_path, "run file")->required();
  eval->add_option("-d,--dataset", o.dataset, "gold dataset (JSON Lines)")->required();
  eval->add_option("--mode", o.prr_mode, "pRR mode: first_match | best_ratio");
  eval->add_flag("--strict", o.strict, "fail on run entries absent from the gold data");
  eval->add_option("--per-question", o.per_question, "include per-question rows");
  eval->add_option("--k-max", o.k_max, "maximum answers per question in the run");
  eval->add_option("--run-format", o.run_format, "jsonl | document | auto");
  eval->add_option("--threads", o.threads, "worker threads");
  eval->add_option("--field-map", o.field_map, "canonical=on_disk key rename (repeatable)");
  add_norm_options(eval, o);
  add_output_options(eval, o);

  auto* ensemble = app.add_subcommand("ensemble", "fuse runs of one system into a single run");
  ensemble->add_option("runs", o.run_paths, "run files")->required();
  ensemble->add_option("-o,--output", o.output, "fused run file (default: stdout)");
  ensemble->add_option("--aggregation", o.aggregation, "mean | pairwise_running | max | sum");
  ensemble->add_option("--match", o.match_policy, "normalized_equality | raw_equality");
  ensemble->add_option("--tie-break", o.tie_break, "rank_then_text | text");
  ensemble->add_option("--k-max", o.k_max, "answers kept per question");
  ensemble->add_flag("--count-weighting", o.count_weighting,
                     "scale scores by the share of runs containing the answer");
  ensemble->add_option("--provenance", o.provenance, "write a support/score sidecar (JSON)");
  ensemble->add_option("--run-format", o.run_format, "input format: jsonl | document | auto");
  ensemble->add_option("--output-format", o.output_format, "jsonl | document");
  ensemble->add_option("--run-id", o.run_id, "label of the fused run");
  ensemble->add_option("--threads", o.threads, "worker threads");
  add_norm_options(ensemble, o);

  auto* compare = app.add_subcommand("compare", "paired comparison of two runs");
  compare->add_option("--run-a", o.run_a, "first run")->required();
  compare->add_option("--run-b", o.run_b, "second run")->required();
  compare->add_option("-d,--dataset", o.dataset, "gold dataset (JSON Lines)")->required();
  compare->add_option("--n-boot", o.n_boot, "bootstrap resamples");
  compare->add_option("--seed", o.seed, "bootstrap seed");
  compare->add_option("--confidence", o.confidence, "interval coverage, e.g. 0.95");
  compare->add_option("--mode", o.prr_mode, "pRR mode: first_match | best_ratio");
  compare->add_flag("--strict", o.strict, "fail when question sets differ");
  compare->add_option("--k-max", o.k_max, "maximum answers per question in the runs");
  compare->add_option("--run-format", o.run_format, "jsonl | document | auto");
  compare->add_option("--threads", o.threads, "worker threads");
  compare->add_option("--field-map", o.field_map, "canonical=on_disk key rename (repeatable)");
  add_norm_options(compare, o);
  add_output_options(compare, o);

  std::vector<const char*> argv;
  argv.push_back("qrcd");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (validate->parsed()) return cmd_validate(o, out, err);
    if (stats->parsed()) return cmd_stats(o, out);
    if (eval->parsed()) return cmd_eval(o, out, err);
    if (ensemble->parsed()) return cmd_ensemble(o, out, err);
    if (compare->parsed()) return cmd_compare(o, out);
  } catch (const UsageError& e) {
    err << "qrcd: " << e.what() << "\n";
    return kUsage;
  } catch (const IoError& e) {
    err << "qrcd: " << e.what() << "\n";
    return kIo;
  } catch (const ParseError& e) {
    err << "qrcd: " << e.what() << "\n";
    return kParse;
  } catch (const ContractError& e) {
    err << "qrcd: " << e.what() << "\n";
    return kContract;
  }
  return kUsage;
}

}  // namespace qrcd::cli
