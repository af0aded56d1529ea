#include "qrcd/cli.hpp"
#include "qrcd/compare.hpp"
#include "qrcd/dataset.hpp"
#include "qrcd/ensemble.hpp"
#include "qrcd/errors.hpp"
#include "qrcd/metrics.hpp"
#include "qrcd/report.hpp"
#include "qrcd/run.hpp"
#include "qrcd/text_norm.hpp"

#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#define STRINGIFY(x) #x
#define MACRO_STRINGIFY(x) STRINGIFY(x)

namespace py = pybind11;
using namespace qrcd;

namespace {

// Reports cross the boundary as their JSON documents.
py::object to_python(const nlohmann::json& doc) {
  return py::module_::import("json").attr("loads")(doc.dump());
}

std::vector<QPRecord> records_of(const std::string& text) { return parse_dataset(text); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Scoring, fusion and validation for span-prediction QA runs.";

  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<ContractError>(m, "ContractError", PyExc_ValueError);

  py::enum_<UnicodeForm>(m, "UnicodeForm")
      .value("NONE", UnicodeForm::kNone)
      .value("NFC", UnicodeForm::kNFC)
      .value("NFKC", UnicodeForm::kNFKC);

  py::class_<NormConfig>(m, "NormConfig")
      .def(py::init<>())
      .def_readwrite("unicode_form", &NormConfig::unicode_form)
      .def_readwrite("strip_diacritics", &NormConfig::strip_diacritics)
      .def_readwrite("strip_tatweel", &NormConfig::strip_tatweel)
      .def_readwrite("normalize_alef_ya", &NormConfig::normalize_alef_ya)
      .def_readwrite("strip_punctuation", &NormConfig::strip_punctuation)
      .def_readwrite("collapse_whitespace", &NormConfig::collapse_whitespace)
      .def_readwrite("lowercase_latin", &NormConfig::lowercase_latin)
      .def_static("identity", &NormConfig::identity)
      .def(py::self == py::self);

  py::class_<RankedAnswer>(m, "RankedAnswer")
      .def(py::init<std::string, int, double>(), py::arg("text"), py::arg("rank"),
           py::arg("score"))
      .def_readwrite("text", &RankedAnswer::text)
      .def_readwrite("rank", &RankedAnswer::rank)
      .def_readwrite("score", &RankedAnswer::score)
      .def(py::self == py::self)
      .def("__repr__", [](const RankedAnswer& a) {
        return "RankedAnswer(" + py::repr(py::str(a.text)).cast<std::string>() + ", " +
               std::to_string(a.rank) + ", " + py::repr(py::float_(a.score)).cast<std::string>() +
               ")";
      });

  py::class_<Run>(m, "Run")
      .def(py::init<>())
      .def(py::init([](std::string run_id, std::map<std::string, AnswerList> entries) {
             return Run{std::move(run_id), std::move(entries)};
           }),
           py::arg("run_id"), py::arg("entries"))
      .def_readwrite("run_id", &Run::run_id)
      .def_readwrite("entries", &Run::entries)
      .def(py::self == py::self);

  m.def("normalize", &normalize, py::arg("text"), py::arg("config") = NormConfig{});
  m.def("tokenize", &tokenize, py::arg("text"), py::arg("config") = NormConfig{});

  m.def(
      "token_f1",
      [](const std::string& pred, const std::string& gold, const NormConfig& cfg) {
        return token_f1(pred, gold, cfg);
      },
      py::arg("pred"), py::arg("gold"), py::arg("config") = NormConfig{});
  m.def(
      "exact_match",
      [](const std::string& pred, const std::vector<std::string>& golds, const NormConfig& cfg) {
        return exact_match(pred, golds, cfg);
      },
      py::arg("pred"), py::arg("golds"), py::arg("config") = NormConfig{});
  m.def(
      "prr",
      [](const std::vector<std::string>& preds, const std::vector<std::string>& golds,
         const std::string& mode, const NormConfig& cfg) {
        AnswerList list;
        for (const auto& p : preds) list.push_back({p, static_cast<int>(list.size()) + 1, 0.0});
        const PrrResult r = prr(list, golds, cfg, prr_mode_from_string(mode));
        return py::make_tuple(r.value, r.rank ? py::object(py::int_(*r.rank)) : py::none());
      },
      py::arg("preds"), py::arg("golds"), py::arg("mode") = "first_match",
      py::arg("config") = NormConfig{},
      "pRR of a ranked prediction list; returns (value, matched rank or None).");

  m.def(
      "parse_run",
      [](const std::string& text, const std::string& run_id, std::size_t k_max) {
        return read_run(text, RunFormat::kAuto, {run_id, k_max});
      },
      py::arg("text"), py::arg("run_id") = "run", py::arg("k_max") = kDefaultKMax);
  m.def(
      "write_run",
      [](const Run& run, const std::string& format, std::size_t k_max) {
        return write_run_as(run, run_format_from_string(format), k_max);
      },
      py::arg("run"), py::arg("format") = "jsonl", py::arg("k_max") = kDefaultKMax);

  m.def(
      "validate_dataset",
      [](const std::string& text, bool strict) {
        return to_python(report_json(validate_dataset(records_of(text), strict)));
      },
      py::arg("text"), py::arg("strict") = false);
  m.def(
      "dataset_stats",
      [](const std::string& text) {
        const SplitStats s = dataset_stats(records_of(text));
        return py::make_tuple(s.qp_pairs, s.qpa_triplets);
      },
      py::arg("text"), "(Q-P pairs, Q-P-A triplets) of a JSON Lines dataset.");

  m.def(
      "evaluate",
      [](const Run& run, const std::string& gold_text, const std::string& mode, bool strict,
         const NormConfig& cfg) {
        EvalOptions o;
        o.norm = cfg;
        o.mode = prr_mode_from_string(mode);
        o.strict = strict;
        return to_python(report_json(evaluate_run(run, records_of(gold_text), o)));
      },
      py::arg("run"), py::arg("gold_text"), py::arg("mode") = "first_match",
      py::arg("strict") = false, py::arg("config") = NormConfig{});

  m.def(
      "fuse",
      [](const std::vector<Run>& runs, const std::string& aggregation, const std::string& match,
         const std::string& tie_break, std::size_t k_max, bool count_weighting,
         const NormConfig& cfg) {
        FuseConfig f;
        f.aggregation = aggregation_from_string(aggregation);
        f.match.kind = match_kind_from_string(match);
        f.match.norm = cfg;
        f.tie_break = tie_break_from_string(tie_break);
        f.k_max = k_max;
        f.count_weighting = count_weighting;
        return fuse(runs, f);
      },
      py::arg("runs"), py::arg("aggregation") = "mean", py::arg("match") = "normalized_equality",
      py::arg("tie_break") = "rank_then_text", py::arg("k_max") = kDefaultKMax,
      py::arg("count_weighting") = false, py::arg("config") = NormConfig{});

  m.def(
      "compare",
      [](const Run& a, const Run& b, const std::string& gold_text, std::size_t n_boot,
         std::uint64_t seed, double confidence) {
        CompareOptions o;
        o.n_boot = n_boot;
        o.seed = seed;
        o.confidence = confidence;
        return to_python(report_json(compare_runs(a, b, records_of(gold_text), o)));
      },
      py::arg("a"), py::arg("b"), py::arg("gold_text"), py::arg("n_boot") = 1000,
      py::arg("seed") = 0, py::arg("confidence") = 0.95);

  m.def(
      "cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = cli::run(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the command line in-process; returns (exit code, stdout, stderr).");

#ifdef VERSION_INFO
  m.attr("__version__") = MACRO_STRINGIFY(VERSION_INFO);
#else
  m.attr("__version__") = "dev";
#endif
}
