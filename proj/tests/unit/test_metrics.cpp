#include "qrcd/errors.hpp"
#include "qrcd/metrics.hpp"

#include "oracle/generators.hpp"
#include "oracle/reference.hpp"

#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

using namespace qrcd;

namespace {

const NormConfig kDefault{};

QPRecord gold(std::string id, std::vector<std::string> texts) {
  QPRecord r;
  r.pq_id = std::move(id);
  r.passage = "p";
  r.question = "q";
  for (auto& t : texts) r.answers.push_back({std::move(t), 0});
  return r;
}

AnswerList ranked(std::vector<std::string> texts) {
  AnswerList out;
  double s = 1.0;
  for (auto& t : texts) {
    out.push_back({std::move(t), static_cast<int>(out.size()) + 1, s});
    s /= 2;
  }
  return out;
}

std::vector<std::string> random_golds(gen::Rng& rng) {
  std::vector<std::string> golds(1 + gen::below(rng, 3));
  for (auto& g : golds) g = gen::phrase(rng, 4);
  return golds;
}

bool close(double a, double b) { return std::abs(a - b) <= 1e-12; }

}  // namespace

TEST_CASE("token_f1 worked examples") {
  CHECK(token_f1("a b", "a b", kDefault) == 1.0);
  // pred "a b", gold "a c": P = R = 1/2.
  CHECK(token_f1("a b", "a c", kDefault) == 0.5);
  CHECK(token_f1("a b", "c d", kDefault) == 0.0);
  CHECK(token_f1("", "", kDefault) == 1.0);
  CHECK(token_f1("؟", " . ", kDefault) == 1.0);
  CHECK(token_f1("a", "", kDefault) == 0.0);
  CHECK(token_f1("", "a", kDefault) == 0.0);
  // Multiset: repeated tokens only match as often as they occur in gold.
  CHECK(token_f1("a a", "a", kDefault) == doctest::Approx(2.0 / 3.0));
  CHECK(token_f1("كَتَبَ", "كتب", kDefault) == 1.0);
}

TEST_CASE("exact_match compares normalized strings") {
  const std::vector<std::string> golds = {"الصبر مفتاح", "أيوب"};
  CHECK(exact_match("الصَّبْر  مفتاح.", golds, kDefault) == 1);
  CHECK(exact_match("ايوب", golds, kDefault) == 0);
  auto folded = kDefault;
  folded.normalize_alef_ya = true;
  CHECK(exact_match("ايوب", golds, folded) == 1);
  CHECK(exact_match("a", std::vector<std::string>{}, kDefault) == 0);
}

TEST_CASE("best_partial takes the max over golds") {
  const std::vector<std::string> golds = {"a", "a b c d e f"};
  // Against "a": 2*(1/4*1)/(1/4+1) = 0.4. Against the long gold: P=1, R=4/6 -> 0.8.
  CHECK(token_f1("a b c d", golds[0], kDefault) == doctest::Approx(0.4));
  CHECK(best_partial("a b c d", golds, kDefault) == doctest::Approx(0.8));
  CHECK(best_partial("z", golds, kDefault) == 0.0);
}

TEST_CASE("pRR worked example on m = (0, 0.6, 1.0)") {
  const std::vector<double> m = {0.0, 0.6, 1.0};
  const auto first = prr_from_partials(m, PrrMode::kFirstMatch);
  CHECK(first.value == 0.3);
  CHECK(first.rank == 2);
  const auto best = prr_from_partials(m, PrrMode::kBestRatio);
  CHECK(best.value == 1.0 / 3.0);
  CHECK(best.rank == 3);
}

TEST_CASE("pRR edge cases") {
  CHECK(prr_from_partials(std::vector<double>{}, PrrMode::kFirstMatch) == PrrResult{});
  CHECK(prr_from_partials(std::vector<double>{0, 0}, PrrMode::kBestRatio) == PrrResult{});
  CHECK(prr_from_partials(std::vector<double>{1.0, 1.0}, PrrMode::kFirstMatch) == PrrResult{1.0, 1});
  // Ties keep the smaller rank.
  CHECK(prr_from_partials(std::vector<double>{0.5, 1.0}, PrrMode::kBestRatio) == PrrResult{0.5, 1});

  const std::vector<std::string> golds = {"قال موسى"};
  CHECK(prr(ranked({"قال موسى", "x"}), golds, kDefault) == PrrResult{1.0, 1});
  CHECK(prr(AnswerList{}, golds, kDefault) == PrrResult{});
}

TEST_CASE("two-question evaluation") {
  const std::vector<QPRecord> g = {gold("q1", {"a b"}), gold("q2", {"c d e", "f"})};
  Run run;
  run.entries["q1"] = ranked({"a x", "a b"});
  run.entries["q2"] = ranked({"z", "c d"});
  const EvalReport rep = evaluate_run(run, g);
  // q1: m = (0.5, 1) -> pRR 0.5, F1@1 0.5. q2: m = (0, 0.8) -> pRR 0.4, F1@1 0.
  REQUIRE(rep.per_question.size() == 2);
  CHECK(rep.per_question[0].prr == 0.5);
  CHECK(rep.per_question[1].prr == doctest::Approx(0.4));
  CHECK(rep.per_question[1].first_match_rank == 2);
  CHECK(rep.macro_prr == doctest::Approx(0.45));
  CHECK(rep.macro_em == 0.0);
  CHECK(rep.macro_f1_at_1 == doctest::Approx(0.25));
  CHECK(rep.n_questions == 2);
  CHECK(rep.n_missing == 0);
}

TEST_CASE("perfect run scores 1 everywhere") {
  const std::vector<QPRecord> g = {gold("q1", {"a b"}), gold("q2", {"c", "d"})};
  Run run;
  run.entries["q1"] = ranked({"a b"});
  run.entries["q2"] = ranked({"d", "c"});
  const auto rep = evaluate_run(run, g);
  CHECK(rep.macro_prr == 1.0);
  CHECK(rep.macro_em == 1.0);
  CHECK(rep.macro_f1_at_1 == 1.0);
}

TEST_CASE("missing questions score zero and count in the average") {
  const std::vector<QPRecord> g = {gold("q1", {"a"}), gold("q2", {"b"})};
  Run run;
  run.entries["q1"] = ranked({"a"});
  const auto rep = evaluate_run(run, g);
  CHECK(rep.macro_prr == 0.5);
  CHECK(rep.n_missing == 1);
  CHECK(rep.per_question[1].missing);
  CHECK_FALSE(rep.per_question[1].first_match_rank.has_value());

  run.entries["q2"] = {};
  CHECK(evaluate_run(run, g).n_missing == 1);
}

TEST_CASE("unknown pq_ids are listed, or rejected when strict") {
  const std::vector<QPRecord> g = {gold("q1", {"a"})};
  Run run;
  run.entries["q1"] = ranked({"a"});
  run.entries["zz"] = ranked({"a"});
  const auto rep = evaluate_run(run, g);
  CHECK(rep.unknown_pq_ids == std::vector<std::string>{"zz"});
  CHECK(rep.macro_prr == 1.0);
  EvalOptions strict;
  strict.strict = true;
  CHECK_THROWS_AS(evaluate_run(run, g, strict), ContractError);
}

TEST_CASE("vacuous matches are flagged") {
  const std::vector<QPRecord> g = {gold("q1", {"؟"})};
  Run run;
  run.entries["q1"] = ranked({"."});
  const auto rep = evaluate_run(run, g);
  CHECK(rep.n_vacuous == 1);
  CHECK(rep.per_question[0].vacuous_match);
  CHECK(rep.per_question[0].em == 1);
}

TEST_CASE("empty gold set") {
  const auto rep = evaluate_run(Run{}, {});
  CHECK(rep.n_questions == 0);
  CHECK(rep.macro_prr == 0.0);
}

TEST_CASE("thread count does not change the report") {
  gen::Rng rng(3);
  std::vector<QPRecord> g;
  Run run;
  for (int i = 0; i < 200; ++i) {
    const std::string id = "q" + std::to_string(i);
    g.push_back(gold(id, random_golds(rng)));
    if (gen::coin(rng, 0.9)) run.entries[id] = gen::answer_list(rng, 5, 4);
  }
  const auto one = evaluate_run(run, g);
  for (unsigned t : {2u, 3u, 8u}) {
    EvalOptions o;
    o.threads = t;
    CHECK(evaluate_run(run, g, o) == one);
  }
}

TEST_CASE("metric properties on random instances") {
  gen::Rng rng(99);
  for (int i = 0; i < 3000; ++i) {
    const auto golds = random_golds(rng);
    const AnswerList preds = gen::answer_list(rng, 5, 4);
    for (PrrMode mode : {PrrMode::kFirstMatch, PrrMode::kBestRatio}) {
      const auto qs = score_question("q", preds, golds, kDefault, mode);
      REQUIRE(qs.em <= qs.f1_at_1);
      REQUIRE(qs.f1_at_1 <= qs.prr);
      REQUIRE(qs.prr >= 0.0);
      REQUIRE(qs.prr <= 1.0);

      // Truncating the list below the first match cannot raise pRR.
      if (!preds.empty()) {
        AnswerList cut(preds.begin(), preds.end() - 1);
        REQUIRE(prr(cut, golds, kDefault, mode).value <= qs.prr);
      }
    }

    // Order of the golds does not matter.
    auto reversed = golds;
    std::reverse(reversed.begin(), reversed.end());
    REQUIRE(score_question("q", preds, reversed, kDefault, PrrMode::kBestRatio) ==
            score_question("q", preds, golds, kDefault, PrrMode::kBestRatio));

    // Prepending a non-matching answer moves the first match from rank r to
    // r + 1, scaling first_match pRR by r / (r + 1).
    AnswerList shifted = {{"zzz", 1, 1.0}};
    for (auto a : preds) {
      a.rank += 1;
      shifted.push_back(a);
    }
    const auto before = prr(preds, golds, kDefault);
    const auto after = prr(shifted, golds, kDefault);
    if (before.rank) {
      const double r = *before.rank;
      REQUIRE(after.rank == *before.rank + 1);
      REQUIRE(after.value == doctest::Approx(before.value * r / (r + 1)));
    } else {
      REQUIRE(after.value == 0.0);
    }
  }
}

TEST_CASE("binary partials reduce pRR to reciprocal rank") {
  for (std::size_t hit = 0; hit < 5; ++hit) {
    std::vector<double> m(5, 0.0);
    m[hit] = 1.0;
    for (std::size_t later = hit + 1; later < 5; ++later) m[later] = 1.0;
    CHECK(prr_from_partials(m, PrrMode::kFirstMatch).value == 1.0 / static_cast<double>(hit + 1));
    CHECK(prr_from_partials(m, PrrMode::kBestRatio).value == 1.0 / static_cast<double>(hit + 1));
  }
}

TEST_CASE("agreement with the brute-force reference") {
  gen::Rng rng(1234);
  for (int i = 0; i < 2000; ++i) {
    const auto golds = random_golds(rng);
    const AnswerList preds = gen::answer_list(rng, 5, 4);
    std::vector<std::string> texts;
    for (const auto& p : preds) texts.push_back(p.text);

    for (const auto& p : texts) {
      REQUIRE(exact_match(p, golds, kDefault) == oracle::em(p, golds));
      for (const auto& g : golds) REQUIRE(close(token_f1(p, g, kDefault), oracle::f1(p, g)));
    }
    for (PrrMode mode : {PrrMode::kFirstMatch, PrrMode::kBestRatio}) {
      const auto ours = prr(preds, golds, kDefault, mode);
      const auto ref = oracle::prr(texts, golds, mode);
      REQUIRE(close(ours.value, ref.value));
      REQUIRE(ours.rank.has_value() == ref.rank.has_value());
    }
  }
}

TEST_CASE("mode names") {
  CHECK(to_string(PrrMode::kBestRatio) == "best_ratio");
  CHECK(prr_mode_from_string("first_match") == PrrMode::kFirstMatch);
  CHECK_THROWS_AS(prr_mode_from_string("mrr"), std::invalid_argument);
}
