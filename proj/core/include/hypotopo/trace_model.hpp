#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hypotopo {

struct ReasoningStep {
  std::string text;
  double confidence = 1.0;
  std::optional<std::string> answer;
  std::optional<double> raw_progress;
};

struct ReasoningPath {
  std::string path_id;
  std::vector<ReasoningStep> steps;
};

struct ProblemInstance {
  std::string instance_id;
  std::string question;
  std::optional<std::string> gold_answer;
  std::vector<ReasoningPath> paths;
};

/// Throws ValidationError naming the first offending field.
void validate(const ProblemInstance& instance);

/// Progress of the step at 0-based `index`: the trace's raw_progress when
/// present, else (index + 1) / m. Throws std::out_of_range on a bad index.
double effective_progress(const ReasoningPath& path, std::size_t index);

/// Decodes one JSON record. `line` is used only for error messages.
ProblemInstance parse_trace_record(std::string_view record, std::size_t line = 1);

/// Line-delimited records; blank lines are skipped. Records come back in file
/// order and are validated.
std::vector<ProblemInstance> parse_trace_text(std::string_view text);
std::vector<ProblemInstance> parse_trace_stream(std::istream& in);
std::vector<ProblemInstance> parse_trace_file(const std::string& path);

/// Single-line JSON encoding with fixed key order. Absent optionals are omitted.
std::string serialize_instance(const ProblemInstance& instance);
std::string serialize_traces(const std::vector<ProblemInstance>& instances);

}  // namespace hypotopo
