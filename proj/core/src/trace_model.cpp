#include "hypotopo/trace_model.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "hypotopo/error.hpp"
#include "json.hpp"

namespace hypotopo {

namespace {

using Json = nlohmann::ordered_json;

bool in_unit_interval(double x) { return std::isfinite(x) && x >= 0.0 && x <= 1.0; }

const Json& require(const Json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ValidationError(where + key, "missing required field");
  return *it;
}

std::string require_string(const Json& obj, const char* key, const std::string& where) {
  const Json& v = require(obj, key, where);
  if (!v.is_string()) throw ValidationError(where + key, "expected a string");
  return v.get<std::string>();
}

double require_number(const Json& obj, const char* key, const std::string& where) {
  const Json& v = require(obj, key, where);
  if (!v.is_number()) throw ValidationError(where + key, "expected a number");
  return v.get<double>();
}

ReasoningStep decode_step(const Json& j, const std::string& where) {
  if (!j.is_object()) throw ValidationError(where, "expected an object");
  ReasoningStep step;
  step.text = require_string(j, "text", where + ".");
  step.confidence = require_number(j, "confidence", where + ".");
  if (auto it = j.find("answer"); it != j.end() && !it->is_null()) {
    if (!it->is_string()) throw ValidationError(where + ".answer", "expected a string");
    step.answer = it->get<std::string>();
  }
  if (auto it = j.find("raw_progress"); it != j.end() && !it->is_null()) {
    if (!it->is_number()) throw ValidationError(where + ".raw_progress", "expected a number");
    step.raw_progress = it->get<double>();
  }
  return step;
}

ProblemInstance decode_instance(const Json& j) {
  if (!j.is_object()) throw ValidationError("record", "expected an object");
  ProblemInstance inst;
  inst.instance_id = require_string(j, "instance_id", "");
  inst.question = require_string(j, "question", "");
  if (auto it = j.find("gold_answer"); it != j.end() && !it->is_null()) {
    if (!it->is_string()) throw ValidationError("gold_answer", "expected a string");
    inst.gold_answer = it->get<std::string>();
  }
  const Json& paths = require(j, "paths", "");
  if (!paths.is_array()) throw ValidationError("paths", "expected an array");
  for (std::size_t p = 0; p < paths.size(); ++p) {
    const std::string where = "paths[" + std::to_string(p) + "]";
    const Json& pj = paths[p];
    if (!pj.is_object()) throw ValidationError(where, "expected an object");
    ReasoningPath path;
    path.path_id = require_string(pj, "path_id", where + ".");
    const Json& steps = require(pj, "steps", where + ".");
    if (!steps.is_array()) throw ValidationError(where + ".steps", "expected an array");
    for (std::size_t s = 0; s < steps.size(); ++s) {
      path.steps.push_back(decode_step(steps[s], where + ".steps[" + std::to_string(s) + "]"));
    }
    inst.paths.push_back(std::move(path));
  }
  return inst;
}

Json encode_instance(const ProblemInstance& inst) {
  Json j;
  j["instance_id"] = inst.instance_id;
  j["question"] = inst.question;
  if (inst.gold_answer) j["gold_answer"] = *inst.gold_answer;
  Json paths = Json::array();
  for (const auto& path : inst.paths) {
    Json pj;
    pj["path_id"] = path.path_id;
    Json steps = Json::array();
    for (const auto& step : path.steps) {
      Json sj;
      sj["text"] = step.text;
      sj["confidence"] = step.confidence;
      if (step.answer) sj["answer"] = *step.answer;
      if (step.raw_progress) sj["raw_progress"] = *step.raw_progress;
      steps.push_back(std::move(sj));
    }
    pj["steps"] = std::move(steps);
    paths.push_back(std::move(pj));
  }
  j["paths"] = std::move(paths);
  return j;
}

}  // namespace

void validate(const ProblemInstance& instance) {
  if (instance.paths.empty()) throw ValidationError("paths", "at least one path is required");
  std::set<std::string> seen;
  for (std::size_t p = 0; p < instance.paths.size(); ++p) {
    const auto& path = instance.paths[p];
    const std::string where = "paths[" + std::to_string(p) + "]";
    if (!seen.insert(path.path_id).second) {
      throw ValidationError(where + ".path_id", "duplicate path_id '" + path.path_id + "'");
    }
    if (path.steps.empty()) throw ValidationError(where + ".steps", "a path needs at least one step");
    for (std::size_t s = 0; s < path.steps.size(); ++s) {
      const auto& step = path.steps[s];
      const std::string sw = where + ".steps[" + std::to_string(s) + "]";
      if (!in_unit_interval(step.confidence)) {
        throw ValidationError(sw + ".confidence", "must lie in [0,1], got " + std::to_string(step.confidence));
      }
      if (step.raw_progress && !in_unit_interval(*step.raw_progress)) {
        throw ValidationError(sw + ".raw_progress",
                              "must lie in [0,1], got " + std::to_string(*step.raw_progress));
      }
    }
  }
}

double effective_progress(const ReasoningPath& path, std::size_t index) {
  if (index >= path.steps.size()) {
    throw std::out_of_range("step index " + std::to_string(index) + " out of range for path '" +
                            path.path_id + "' of length " + std::to_string(path.steps.size()));
  }
  if (const auto& raw = path.steps[index].raw_progress) return *raw;
  return static_cast<double>(index + 1) / static_cast<double>(path.steps.size());
}

ProblemInstance parse_trace_record(std::string_view record, std::size_t line) {
  Json j;
  try {
    j = Json::parse(record.begin(), record.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(line, std::string("malformed record: ") + e.what());
  }
  ProblemInstance inst;
  try {
    inst = decode_instance(j);
    validate(inst);
  } catch (const ValidationError& e) {
    throw ValidationError(e.field(), "line " + std::to_string(line) + ": " + e.what());
  }
  return inst;
}

std::vector<ProblemInstance> parse_trace_stream(std::istream& in) {
  std::vector<ProblemInstance> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(parse_trace_record(line, line_no));
  }
  return out;
}

std::vector<ProblemInstance> parse_trace_text(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_trace_stream(in);
}

std::vector<ProblemInstance> parse_trace_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open trace file '" + path + "'");
  return parse_trace_stream(in);
}

std::string serialize_instance(const ProblemInstance& instance) { return encode_instance(instance).dump(); }

std::string serialize_traces(const std::vector<ProblemInstance>& instances) {
  std::string out;
  for (const auto& inst : instances) {
    out += serialize_instance(inst);
    out += '\n';
  }
  return out;
}

}  // namespace hypotopo
