#include "qrcd/cli.hpp"
#include "qrcd/metrics.hpp"
#include "qrcd/run.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using qrcd::cli::ExitCode;

namespace {

const std::string kGolden = std::string(QRCD_TEST_DATA_DIR) + "/golden/";

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result call(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = qrcd::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = fs::temp_directory_path() / ("qrcd-cli-" + std::to_string(rd()));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string write(const std::string& name, const std::string& content) const {
    const auto p = path_ / name;
    std::ofstream(p, std::ios::binary) << content;
    return p.string();
  }
  std::string path(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

const char* kTwoGold =
    R"({"pq_id": "q1", "passage": "a b", "question": "?", "answers": [{"text": "a b", "start_char": 0}]})"
    "\n"
    R"({"pq_id": "q2", "passage": "c d e f", "question": "?", "answers": [{"text": "c d e", "start_char": 0}, {"text": "f", "start_char": 6}]})"
    "\n";

const char* kTwoRun =
    R"({"pq_id": "q1", "answers": [{"text": "a x", "rank": 1, "score": 0.9}, {"text": "a b", "rank": 2, "score": 0.5}]})"
    "\n"
    R"({"pq_id": "q2", "answers": [{"text": "z", "rank": 1, "score": 0.9}, {"text": "c d", "rank": 2, "score": 0.5}]})"
    "\n";

}  // namespace

TEST_CASE("no subcommand or an unknown flag is a usage error") {
  CHECK(call({}).code == ExitCode::kUsage);
  CHECK(call({"frobnicate"}).code == ExitCode::kUsage);
  CHECK(call({"eval", "--no-such-flag"}).code == ExitCode::kUsage);
  CHECK(call({"--help"}).code == ExitCode::kOk);
}

TEST_CASE("validate") {
  TempDir tmp;
  CHECK(call({"validate", "--strict", kGolden + "gold.jsonl"}).code == ExitCode::kOk);

  std::string broken = slurp(kGolden + "gold.jsonl");
  broken.replace(broken.find("\"start_char\": 7"), 15, "\"start_char\": 6");
  const auto path = tmp.write("broken.jsonl", broken);
  const auto strict = call({"validate", "--strict", path});
  CHECK(strict.code == ExitCode::kValidationFailed);
  CHECK(strict.out.find("span-text-mismatch") != std::string::npos);
  CHECK(call({"validate", path}).code == ExitCode::kOk);

  const auto json = call({"validate", "--strict", "--format", "json", path});
  const auto doc = nlohmann::json::parse(json.out);
  CHECK(doc["schema_version"] == 1);
  CHECK(doc["errors"].size() == 1);

  CHECK(call({"validate", tmp.path("missing.jsonl")}).code == ExitCode::kIo);
  CHECK(call({"validate", tmp.write("bad.jsonl", "{nope\n")}).code == ExitCode::kParse);
  CHECK(call({"validate", "--format", "xml", path}).code == ExitCode::kUsage);
}

TEST_CASE("validate with a field map") {
  TempDir tmp;
  const auto path = tmp.write(
      "renamed.jsonl",
      R"({"id": "k", "passage": "ab", "question": "?", "answers": [{"text": "b", "start_char": 1}]})"
      "\n");
  CHECK(call({"validate", path}).code == ExitCode::kParse);
  CHECK(call({"validate", "--field-map", "pq_id=id", path}).code == ExitCode::kOk);
  CHECK(call({"validate", "--field-map", "pqid", path}).code == ExitCode::kUsage);
}

TEST_CASE("stats") {
  TempDir tmp;
  const auto empty = tmp.write("empty.jsonl", "");
  const auto r = call({"stats", "--format", "json", kGolden + "gold.jsonl", empty});
  REQUIRE(r.code == ExitCode::kOk);
  const auto doc = nlohmann::json::parse(r.out);
  const auto& rows = doc["rows"];
  REQUIRE(rows.size() == 3);
  CHECK(rows[0]["qp_pairs"] == 4);
  CHECK(rows[0]["qpa_triplets"] == 5);
  CHECK(rows[1]["qp_pairs"] == 0);
  CHECK(rows[2]["dataset"] == "All");
  CHECK(rows[2]["qpa_triplets"] == 5);

  const auto table = call({"stats", empty});
  CHECK(table.out.find("Q-P Pairs") != std::string::npos);
  CHECK(table.out.find("All") == std::string::npos);
}

TEST_CASE("eval") {
  TempDir tmp;
  const auto gold = tmp.write("gold.jsonl", kTwoGold);
  const auto run = tmp.write("sys.jsonl", kTwoRun);
  const auto r = call({"eval", "-r", run, "-d", gold, "--format", "json"});
  REQUIRE(r.code == ExitCode::kOk);
  const auto doc = nlohmann::json::parse(r.out);
  CHECK(doc["macro"]["pRR"] == 0.45);
  CHECK(doc["macro"]["EM"] == 0.0);
  CHECK(doc["macro"]["F1@1"] == 0.25);
  CHECK(doc["norm_config"]["unicode_form"] == "nfc");
  CHECK(doc["prr_mode"] == "first_match");

  const auto best = nlohmann::json::parse(
      call({"eval", "-r", run, "-d", gold, "--format", "json", "--mode", "best_ratio"}).out);
  CHECK(best["prr_mode"] == "best_ratio");

  const auto table = call({"eval", "-r", run, "-d", gold});
  CHECK(table.out.find("pRR") != std::string::npos);
  CHECK(table.out.find("F1@1") != std::string::npos);
  CHECK(table.out.find("0.450") != std::string::npos);

  const auto off = nlohmann::json::parse(
      call({"eval", "-r", run, "-d", gold, "--format", "json", "--strip-punctuation", "false",
            "--unicode-form", "nfkc"})
          .out);
  CHECK(off["norm_config"]["strip_punctuation"] == false);
  CHECK(off["norm_config"]["unicode_form"] == "nfkc");
}

TEST_CASE("eval contract and parse failures") {
  TempDir tmp;
  const auto gold = tmp.write("gold.jsonl", kTwoGold);
  const auto extra = tmp.write(
      "extra.jsonl", std::string(kTwoRun) +
                         R"({"pq_id": "zz", "answers": [{"text": "a", "rank": 1, "score": 0.5}]})"
                         "\n");
  const auto lenient = call({"eval", "-r", extra, "-d", gold});
  CHECK(lenient.code == ExitCode::kOk);
  CHECK(lenient.err.find("warning") != std::string::npos);
  CHECK(call({"eval", "--strict", "-r", extra, "-d", gold}).code == ExitCode::kContract);

  const auto gapped = tmp.write(
      "gapped.jsonl", R"({"pq_id": "q1", "answers": [{"text": "a", "rank": 2, "score": 0.5}]})"
                      "\n");
  CHECK(call({"eval", "-r", gapped, "-d", gold}).code == ExitCode::kParse);
  CHECK(call({"eval", "-r", tmp.path("none.jsonl"), "-d", gold}).code == ExitCode::kIo);
  CHECK(call({"eval", "-r", extra, "-d", gold, "--mode", "mrr"}).code == ExitCode::kUsage);
}

TEST_CASE("missing question is scored zero") {
  TempDir tmp;
  const auto gold = tmp.write(
      "gold.jsonl",
      std::string(kTwoGold) +
          R"({"pq_id": "q3", "passage": "g", "question": "?", "answers": [{"text": "g", "start_char": 0}]})"
          "\n");
  const auto perfect = tmp.write(
      "perfect.jsonl",
      R"({"pq_id": "q1", "answers": [{"text": "a b", "rank": 1, "score": 0.9}]})"
      "\n"
      R"({"pq_id": "q2", "answers": [{"text": "f", "rank": 1, "score": 0.9}]})"
      "\n");
  const auto doc =
      nlohmann::json::parse(call({"eval", "-r", perfect, "-d", gold, "--format", "json"}).out);
  CHECK(doc["n_missing"] == 1);
  CHECK(doc["macro"]["pRR"] == 0.666667);
}

TEST_CASE("ensemble writes the canonical fused run") {
  TempDir tmp;
  const std::vector<std::string> seeds = {kGolden + "seed1.jsonl", kGolden + "seed2.jsonl",
                                          kGolden + "seed3.jsonl"};
  const auto out = tmp.path("fused.jsonl");
  const auto r = call({"ensemble", seeds[0], seeds[1], seeds[2], "-o", out});
  REQUIRE(r.code == ExitCode::kOk);
  CHECK(slurp(out) == slurp(kGolden + "expected_fused.jsonl"));
  CHECK(r.out.find("support") != std::string::npos);

  // Reversed input order gives the same bytes.
  const auto rev = call({"ensemble", seeds[2], seeds[1], seeds[0]});
  CHECK(rev.out == slurp(kGolden + "expected_fused.jsonl"));
  CHECK(rev.err.find("fused 3 run(s)") != std::string::npos);

  // A single input equals its own dedupe.
  const auto one = call({"ensemble", seeds[0]});
  CHECK(qrcd::parse_run(one.out).entries ==
        qrcd::parse_run(slurp(seeds[0])).entries);
}

TEST_CASE("ensemble options") {
  TempDir tmp;
  const auto s1 = kGolden + "seed1.jsonl";
  const auto s2 = kGolden + "seed2.jsonl";
  CHECK(call({"ensemble"}).code == ExitCode::kUsage);
  CHECK(call({"ensemble", s1, "--k-max", "2"}).code == ExitCode::kContract);
  CHECK(call({"ensemble", s1, "--aggregation", "median"}).code == ExitCode::kUsage);

  const auto prov = tmp.path("prov.json");
  const auto r = call({"ensemble", s1, s2, "--aggregation", "max", "--provenance", prov,
                       "--output-format", "document"});
  REQUIRE(r.code == ExitCode::kOk);
  const auto doc = nlohmann::json::parse(r.out);
  CHECK(doc["q1"][0]["answer"].is_string());
  const auto p = nlohmann::json::parse(slurp(prov));
  CHECK(p["config"]["aggregation"] == "max");
  CHECK(p["n_inputs"] == 2);

  // Document output reads back through auto-detection.
  const auto docfile = tmp.write("doc.json", r.out);
  CHECK(call({"ensemble", docfile}).code == ExitCode::kOk);
}

TEST_CASE("compare") {
  TempDir tmp;
  const auto gold = tmp.write("gold.jsonl", kTwoGold);
  const auto run = tmp.write("sys.jsonl", kTwoRun);
  const auto self = call({"compare", "--run-a", run, "--run-b", run, "-d", gold, "--format",
                          "json", "--seed", "3", "--n-boot", "200"});
  REQUIRE(self.code == ExitCode::kOk);
  const auto doc = nlohmann::json::parse(self.out);
  for (const auto& m : doc["metrics"]) CHECK(m["delta"] == 0.0);

  const auto again = call({"compare", "--run-a", run, "--run-b", run, "-d", gold, "--format",
                           "json", "--seed", "3", "--n-boot", "200"});
  CHECK(again.out == self.out);

  CHECK(call({"compare", "--run-a", run, "--run-b", run, "-d", gold, "--confidence", "2"}).code ==
        ExitCode::kUsage);
  const auto partial = tmp.write(
      "partial.jsonl", R"({"pq_id": "q1", "answers": [{"text": "a b", "rank": 1, "score": 0.5}]})"
                       "\n");
  CHECK(call({"compare", "--strict", "--run-a", run, "--run-b", partial, "-d", gold}).code ==
        ExitCode::kContract);
}

TEST_CASE("config file with flag overrides") {
  TempDir tmp;
  const auto gold = tmp.write("gold.jsonl", kTwoGold);
  const auto run = tmp.write("sys.jsonl", kTwoRun);
  const auto cfg = tmp.write("cfg.json", R"({"prr_mode": "best_ratio", "format": "json"})");
  const auto r = call({"--config", cfg, "eval", "-r", run, "-d", gold});
  REQUIRE(r.code == ExitCode::kOk);
  CHECK(nlohmann::json::parse(r.out)["prr_mode"] == "best_ratio");

  const auto flag = call({"--config", cfg, "eval", "-r", run, "-d", gold, "--mode", "first_match"});
  CHECK(nlohmann::json::parse(flag.out)["prr_mode"] == "first_match");

  const auto bad = tmp.write("bad.json", R"({"prr_mode": "best_ratio", "colour": 1})");
  CHECK(call({"--config", bad, "eval", "-r", run, "-d", gold}).code == ExitCode::kUsage);
  CHECK(call({"--config", tmp.path("none.json"), "eval", "-r", run, "-d", gold}).code ==
        ExitCode::kIo);

  const auto fuse_cfg =
      tmp.write("fuse.json", R"({"fuse": {"aggregation": "max", "k_max": 3}})");
  const auto fused =
      call({"--config", fuse_cfg, "ensemble", kGolden + "seed1.jsonl", kGolden + "seed2.jsonl"});
  REQUIRE(fused.code == ExitCode::kOk);
  for (const auto& [id, list] : qrcd::parse_run(fused.out).entries) CHECK(list.size() <= 3);
}

TEST_CASE("eval of fused output keeps report invariants") {
  TempDir tmp;
  const auto out = tmp.path("fused.jsonl");
  REQUIRE(call({"ensemble", kGolden + "seed1.jsonl", kGolden + "seed2.jsonl",
                kGolden + "seed3.jsonl", "-o", out})
              .code == ExitCode::kOk);
  const auto r = call({"eval", "-r", out, "-d", kGolden + "gold.jsonl", "--format", "json",
                       "--mode", "best_ratio"});
  REQUIRE(r.code == ExitCode::kOk);
  const auto doc = nlohmann::json::parse(r.out);
  for (const auto& q : doc["per_question"]) {
    CHECK(q["EM"].get<double>() <= q["F1@1"].get<double>());
    CHECK(q["F1@1"].get<double>() <= q["pRR"].get<double>());
  }
}
