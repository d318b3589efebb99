#include <fstream>
#include <random>

#include "doctest.h"
#include "hypotopo/error.hpp"
#include "hypotopo/text.hpp"
#include "hypotopo/trace_model.hpp"

using namespace hypotopo;

namespace {

ProblemInstance chain(std::size_t m) {
  ProblemInstance inst;
  inst.instance_id = "t/1";
  inst.question = "q";
  ReasoningPath p;
  p.path_id = "p";
  for (std::size_t i = 0; i < m; ++i) p.steps.push_back({"step " + std::to_string(i), 0.5, {}, {}});
  inst.paths.push_back(p);
  return inst;
}

}  // namespace

TEST_CASE("trace record round trip") {
  const std::string rec =
      R"({"instance_id":"a/1","question":"q","paths":[{"path_id":"p","steps":[)"
      R"({"text":"one","confidence":0.5},{"text":"two","confidence":0.25},{"text":"three","confidence":1,"answer":"3"}]}]})";
  auto inst = parse_trace_record(rec);
  CHECK(inst.paths.size() == 1);
  CHECK(inst.paths[0].steps.size() == 3);
  CHECK(inst.paths[0].steps[2].answer == "3");
  auto once = serialize_instance(inst);
  auto twice = serialize_instance(parse_trace_record(once));
  CHECK(once == twice);
}

TEST_CASE("out of range confidence names the field") {
  const std::string rec =
      R"({"instance_id":"a/1","question":"q","paths":[{"path_id":"p","steps":[{"text":"x","confidence":1.3}]}]})";
  try {
    parse_trace_record(rec);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(e.field() == "paths[0].steps[0].confidence");
  }
}

TEST_CASE("malformed records") {
  CHECK_THROWS_AS(parse_trace_record("{not json", 7), ParseError);
  CHECK_THROWS_AS(parse_trace_record(R"({"instance_id":"a","question":"q","paths":[]})"), ValidationError);
  CHECK_THROWS_AS(parse_trace_record(R"({"instance_id":"a","question":"q","paths":[{"path_id":"p","steps":[]}]})"),
                  ValidationError);
  CHECK_THROWS_AS(
      parse_trace_record(
          R"({"instance_id":"a","question":"q","paths":[{"path_id":"p","steps":[{"text":"x","confidence":0.5}]},{"path_id":"p","steps":[{"text":"y","confidence":0.5}]}]})"),
      ValidationError);
  CHECK_THROWS_AS(
      parse_trace_record(
          R"({"instance_id":"a","question":"q","paths":[{"path_id":"p","steps":[{"text":"x","confidence":0.5,"raw_progress":2}]}]})"),
      ValidationError);
  try {
    parse_trace_text("\n{bad\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("fixture file keeps record order") {
  auto all = parse_trace_file(std::string(HYPOTOPO_TEST_DATA) + "/five.jsonl");
  REQUIRE(all.size() == 5);
  const char* ids[] = {"gsm/001", "gsm/002", "gsm/003", "math/004", "math/005"};
  for (std::size_t i = 0; i < 5; ++i) CHECK(all[i].instance_id == ids[i]);
  CHECK(all[2].paths[0].steps[0].raw_progress == 0.5);
  CHECK_FALSE(all[1].gold_answer.has_value());
  auto again = parse_trace_text(serialize_traces(all));
  CHECK(serialize_traces(again) == serialize_traces(all));
}

TEST_CASE("effective progress") {
  auto inst = chain(4);
  const auto& p = inst.paths[0];
  CHECK(effective_progress(p, 3) == 1.0);
  CHECK(effective_progress(p, 0) == 0.25);
  for (std::size_t j = 1; j < 4; ++j) CHECK(effective_progress(p, j) >= effective_progress(p, j - 1));
  inst.paths[0].steps[1].raw_progress = 0.7;
  CHECK(effective_progress(inst.paths[0], 1) == 0.7);
  CHECK_THROWS_AS(effective_progress(p, 4), std::out_of_range);
}

TEST_CASE("random valid fixtures parse and validate") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    ProblemInstance inst;
    inst.instance_id = "r/" + std::to_string(trial);
    inst.question = "q";
    const int n = 1 + static_cast<int>(rng() % 4);
    for (int p = 0; p < n; ++p) {
      ReasoningPath path;
      path.path_id = "p" + std::to_string(p);
      const int m = 1 + static_cast<int>(rng() % 5);
      for (int s = 0; s < m; ++s) {
        ReasoningStep step{"s " + std::to_string(rng() % 100), u(rng), {}, {}};
        if (rng() % 3 == 0) step.raw_progress = u(rng);
        path.steps.push_back(step);
      }
      inst.paths.push_back(path);
    }
    auto back = parse_trace_record(serialize_instance(inst));
    CHECK_NOTHROW(validate(back));
    CHECK(serialize_instance(back) == serialize_instance(inst));
  }
}

TEST_CASE("canonicalize") {
  CHECK(canonicalize("2 + 2 = 4") == "2+2=4");
  CHECK(canonicalize("The   Sum  is Four") == "the sum is four");
  CHECK(canonicalize("x = 007.50") == "x=7.5");
  CHECK(canonical_number(" -007.50 ") == "-7.5");
  CHECK_FALSE(canonical_number("7a").has_value());

  std::mt19937_64 rng(3);
  const std::string alphabet = "aZ 09.+-*/=()\t,x";
  for (int i = 0; i < 1000; ++i) {
    std::string s;
    const int len = static_cast<int>(rng() % 24);
    for (int k = 0; k < len; ++k) s += alphabet[rng() % alphabet.size()];
    const auto once = canonicalize(s);
    CHECK(canonicalize(once) == once);
  }
}

TEST_CASE("assignment parsing") {
  auto a = parse_assignment(canonicalize("x = 3"));
  REQUIRE(a);
  CHECK(a->head == "x");
  CHECK(a->value == "3");
  CHECK_FALSE(parse_assignment("no equals here"));
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
}
